#include "litterbot/pickup.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace litterbot {

void PickupConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(fmt::format("pickup.{} out of range", field));
  };
  require(timeout > 0.0, "timeout");
  require(confidence_threshold >= 0.0 && confidence_threshold <= 1.0, "confidence_threshold");
  require(overshoot > 0.0, "overshoot");
  require(spin_rate > 0.0, "spin_rate");
  require(drive_speed > 0.0, "drive_speed");
  require(brush_halfwidth > 0.0, "brush_halfwidth");
  require(activation_radius > 0.0, "activation_radius");
  require(activation_tolerance >= 0.0, "activation_tolerance");
  require(align_tolerance > 0.0, "align_tolerance");
  require(gate_angle > 0.0, "gate_angle");
  require(max_sighting_range > 0.0, "max_sighting_range");
}

double PickupConfig::episode_limit() const {
  return timeout + (activation_radius + activation_tolerance + overshoot) / drive_speed + std::numbers::pi / spin_rate;
}

std::string_view to_string(PickupPhase phase) {
  switch (phase) {
    case PickupPhase::SpinSearch: return "SpinSearch";
    case PickupPhase::Align: return "Align";
    case PickupPhase::DriveThrough: return "DriveThrough";
    case PickupPhase::Done: return "Done";
    case PickupPhase::TimedOut: return "TimedOut";
  }
  return "?";
}

TooFar::TooFar(double distance)
    : std::runtime_error(fmt::format("pickup target is {:.3f} m away, beyond the activation radius", distance)) {}

namespace {

void lock_on(PickupState& s, const Pose2D& robot, const GroundPoint& target, const PickupConfig& cfg) {
  const GroundPoint d = target - robot.position();
  const double n = d.norm();
  s.approach_dir = n > 1e-9 ? d * (1.0 / n) : robot.heading();
  s.locked_target = target;
  s.drive_goal = target + s.approach_dir * cfg.overshoot;
  s.phase = PickupPhase::Align;
}

double clamp_rate(double error, double limit, double dt) {
  return std::clamp(error / dt, -limit, limit);
}

}  // namespace

PickupState start_pickup(const Pose2D& robot, const GroundPoint& expected, const PickupConfig& cfg) {
  const double d = distance(robot.position(), expected);
  if (d > cfg.activation_radius + cfg.activation_tolerance) throw TooFar(d);

  PickupState s;
  s.expected = expected;
  s.spin_direction = left_or_right(robot, expected) == Side::Right ? -1.0 : 1.0;
  if (!cfg.reidentify) lock_on(s, robot, expected, cfg);
  return s;
}

namespace {

bool within_gate(const Pose2D& robot, const GroundPoint& seen, const GroundPoint& expected, const PickupConfig& cfg) {
  if (distance(robot.position(), seen) > cfg.max_sighting_range) return false;
  if (distance(robot.position(), seen) < 1e-9 || distance(robot.position(), expected) < 1e-9) return true;
  return std::abs(angle_diff(angle_to(robot, seen), angle_to(robot, expected))) <= cfg.gate_angle;
}

}  // namespace

std::pair<PickupState, MotionCommand> step(PickupState s, const Pose2D& robot, std::span<const Sighting> detections,
                                           const PickupConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pickup step requires dt > 0");
  if (s.finished()) return {s, {}};

  s.episode_time += dt;
  if (s.episode_time > cfg.episode_limit()) {
    s.phase = PickupPhase::TimedOut;
    return {s, {}};
  }

  MotionCommand cmd;
  switch (s.phase) {
    case PickupPhase::SpinSearch: {
      // Several items may be in view; take the confident one closest to where we expect ours.
      const Sighting* hit = nullptr;
      for (const Sighting& d : detections) {
        if (d.confidence < cfg.confidence_threshold || !within_gate(robot, d.point, s.expected, cfg)) continue;
        if (!hit || distance(d.point, s.expected) < distance(hit->point, s.expected)) hit = &d;
      }
      if (hit) {
        lock_on(s, robot, hit->point, cfg);
        return {s, cmd};
      }
      s.elapsed += dt;
      if (s.elapsed > cfg.timeout) {
        s.phase = PickupPhase::TimedOut;
        return {s, cmd};
      }
      cmd.omega = s.spin_direction * cfg.spin_rate;
      return {s, cmd};
    }

    case PickupPhase::Align: {
      const GroundPoint to_goal = *s.drive_goal - robot.position();
      const double err = to_goal.norm() > 1e-9 ? angle_to(robot, *s.drive_goal) : 0.0;
      if (std::abs(err) > cfg.align_tolerance) {
        cmd.omega = clamp_rate(err, cfg.spin_rate, dt);
        return {s, cmd};
      }
      s.phase = PickupPhase::DriveThrough;
      [[fallthrough]];
    }

    case PickupPhase::DriveThrough: {
      const GroundPoint to_goal = *s.drive_goal - robot.position();
      const double remaining = dot(to_goal, s.approach_dir);
      if (remaining <= 1e-9) {
        s.phase = PickupPhase::Done;
        return {s, cmd};
      }
      cmd.mechanism_on = true;
      cmd.v = std::min(cfg.drive_speed, remaining / dt);
      // Hold the line toward the goal; the correction vanishes when already on it.
      if (to_goal.norm() > 0.05) cmd.omega = clamp_rate(0.5 * angle_to(robot, *s.drive_goal), cfg.spin_rate, dt);
      return {s, cmd};
    }

    case PickupPhase::Done:
    case PickupPhase::TimedOut:
      break;
  }
  return {s, cmd};
}

void write_episode_line(std::ostream& os, double t, PickupPhase phase, const MotionCommand& cmd, const Pose2D& pose) {
  fmt::print(os, "{:.3f} {} {:.4f} {:.4f} {} {:.4f} {:.4f} {:.4f}\n", t, to_string(phase), cmd.v, cmd.omega,
             cmd.mechanism_on ? 1 : 0, pose.x(), pose.y(), pose.theta());
}

}  // namespace litterbot
