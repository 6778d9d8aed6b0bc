#include "litterbot/posebuffer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace litterbot {

NonMonotonicTime::NonMonotonicTime(double t, double newest)
    : std::runtime_error(fmt::format("pose stamp {} is not after newest stamp {}", t, newest)) {}

OutOfRange::OutOfRange(double t_)
    : std::runtime_error(fmt::format("no stored pose brackets t = {}", t_)), t(t_) {}

PoseBuffer::PoseBuffer(double horizon) : horizon_(horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("pose buffer horizon must be positive");
}

void PoseBuffer::insert(const StampedPose& sp) {
  if (!std::isfinite(sp.t) || sp.t < 0.0) throw std::invalid_argument("pose stamp must be finite and >= 0");
  if (!entries_.empty() && sp.t <= entries_.back().t) throw NonMonotonicTime(sp.t, entries_.back().t);
  entries_.push_back(sp);
  const double cutoff = sp.t - horizon_;
  while (entries_.front().t < cutoff) entries_.pop_front();
}

Pose2D PoseBuffer::pose_at(double t) const {
  if (entries_.empty() || !(t >= entries_.front().t) || !(t <= entries_.back().t)) throw OutOfRange(t);

  auto upper = std::lower_bound(entries_.begin(), entries_.end(), t,
                                [](const StampedPose& e, double q) { return e.t < q; });
  if (upper->t == t) return upper->pose;
  const StampedPose& a = *std::prev(upper);
  const StampedPose& b = *upper;

  const double s = (t - a.t) / (b.t - a.t);
  const double x = a.pose.x() + s * (b.pose.x() - a.pose.x());
  const double y = a.pose.y() + s * (b.pose.y() - a.pose.y());
  const double theta = a.pose.theta() + s * angle_diff(b.pose.theta(), a.pose.theta());
  return {x, y, theta};
}

void write_trajectory(std::ostream& os, std::span<const StampedPose> trajectory) {
  for (const auto& e : trajectory)
    fmt::print(os, "{:.4f} {:.6f} {:.6f} {:.6f}\n", e.t, e.pose.x(), e.pose.y(), e.pose.theta());
}

}  // namespace litterbot
