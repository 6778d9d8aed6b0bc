#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "litterbot/geometry.hpp"

namespace litterbot {

struct MotionCommand {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
  bool mechanism_on = false;
};

struct PickupConfig {
  double timeout = 30.0;              // s of spin search before giving up
  double confidence_threshold = 0.6;
  double overshoot = 0.2;             // m driven past the locked trash position
  double spin_rate = 0.5;             // rad/s
  double drive_speed = 0.2;           // m/s
  double brush_halfwidth = 0.15;      // m
  double activation_radius = 2.0;     // m
  double activation_tolerance = 0.25; // m
  double align_tolerance = 0.05;      // rad
  double gate_angle = 0.5;            // rad; sightings off the expected bearing by more are ignored
  double max_sighting_range = 3.0;    // m; farther sightings are ignored
  bool reidentify = true;             // false: commit to the mapped point without a spin search

  void validate() const;
  /// Upper bound on the length of one episode.
  double episode_limit() const;
};

enum class PickupPhase { SpinSearch, Align, DriveThrough, Done, TimedOut };

std::string_view to_string(PickupPhase phase);

struct PickupState {
  PickupPhase phase = PickupPhase::SpinSearch;
  double elapsed = 0.0;       // spin-search time
  double episode_time = 0.0;  // total time since start_pickup
  double spin_direction = 1.0;
  GroundPoint expected;
  std::optional<GroundPoint> locked_target;
  std::optional<GroundPoint> drive_goal;
  GroundPoint approach_dir;

  bool finished() const { return phase == PickupPhase::Done || phase == PickupPhase::TimedOut; }
};

/// A detection already placed in the map frame with the pose at capture time.
struct Sighting {
  GroundPoint point;
  double confidence = 0.0;
};

class TooFar : public std::runtime_error {
 public:
  explicit TooFar(double distance);
};

/// Begins an episode for the trash expected at `expected`, spinning toward its side.
PickupState start_pickup(const Pose2D& robot, const GroundPoint& expected, const PickupConfig& cfg);

/// Advances the episode by dt using the sightings delivered this step.
std::pair<PickupState, MotionCommand> step(PickupState state, const Pose2D& robot,
                                           std::span<const Sighting> detections, const PickupConfig& cfg, double dt);

/// `t phase v omega mech x y theta`
void write_episode_line(std::ostream& os, double t, PickupPhase phase, const MotionCommand& cmd, const Pose2D& pose);

}  // namespace litterbot
