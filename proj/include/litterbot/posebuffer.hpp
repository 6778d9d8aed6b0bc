#pragma once

#include <deque>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "litterbot/geometry.hpp"

namespace litterbot {

struct StampedPose {
  double t = 0.0;  // mission clock, s
  Pose2D pose;
};

class NonMonotonicTime : public std::runtime_error {
 public:
  NonMonotonicTime(double t, double newest);
};

/// Query time outside the stored span. Callers drop the detection.
class OutOfRange : public std::runtime_error {
 public:
  explicit OutOfRange(double t);
  double t;
};

// Recent trajectory of the robot, used to place a detection at the pose the
// robot had when the frame was captured rather than when it was processed.
class PoseBuffer {
 public:
  static constexpr double kDefaultHorizon = 60.0;

  explicit PoseBuffer(double horizon = kDefaultHorizon);

  /// Appends `sp` and evicts entries older than sp.t - horizon.
  void insert(const StampedPose& sp);

  /// Pose at time `t`, linearly interpolated between the bracketing entries
  /// (heading along the shorter arc). Throws OutOfRange outside [oldest, newest].
  Pose2D pose_at(double t) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  double horizon() const { return horizon_; }
  const StampedPose& oldest() const { return entries_.front(); }
  const StampedPose& newest() const { return entries_.back(); }
  const std::deque<StampedPose>& entries() const { return entries_; }

 private:
  double horizon_;
  std::deque<StampedPose> entries_;
};

/// One `t x y theta` line per entry.
void write_trajectory(std::ostream& os, std::span<const StampedPose> trajectory);

}  // namespace litterbot
