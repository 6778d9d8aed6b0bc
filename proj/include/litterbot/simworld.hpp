#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <vector>

#include "litterbot/clusterfilter.hpp"
#include "litterbot/geometry.hpp"
#include "litterbot/gridmap.hpp"
#include "litterbot/pickup.hpp"
#include "litterbot/rng.hpp"

namespace litterbot {

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(const GroundPoint& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  /// Euclidean distance from `p` to the rectangle (0 inside).
  double distance_to(const GroundPoint& p) const;
  bool operator==(const Rect&) const = default;
};

struct TrashSpec {
  GroundPoint position;
  double mass = 0.5;  // kg
};

inline constexpr double kMaxTrashMass = 0.64;

struct RobotParams {
  double radius = 0.18;          // collision disc
  double brush_halfwidth = 0.15;
  double brush_offset = 0.1;     // brush axis ahead of the base
};

struct WorldConfig {
  Rect arena{0.0, 0.0, 8.0, 6.0};
  std::vector<Rect> obstacles;
  std::vector<TrashSpec> trash;
  std::uint64_t seed = 1;
  double dt = 0.05;
  Pose2D start{0.6, 0.6, 0.0};
  RobotParams robot;

  void validate() const;
};

// Sensor and odometry error model. All defaults are calibration choices.
struct NoiseModel {
  double odom_heading_bias = 0.02;  // rad per meter traveled
  double odom_noise_sigma = 0.02;   // relative per-step sigma on measured v and omega
  double odom_bias_sigma = 0.0;     // per-run spread of the heading bias, rad/m
  double odom_scale_sigma = 0.0;    // per-run relative error of the measured distance
  double detect_pos_sigma = 0.15;   // m at 1 m range, linear in range (depth channel)
  double pixel_sigma = 2.0;         // px on the box center
  double p_detect_max = 0.95;       // p_detect(r) = clamp(1 - slope*r, min, max)
  double p_detect_min = 0.3;
  double p_detect_slope = 0.1;
  double false_positive_rate = 3.0;      // ground detector, spurious boxes per second
  double survey_false_positives = 0.025; // aerial detector, spurious points per frame
  double confidence_base = 0.95;      // mean true-detection confidence at 0 m
  double confidence_slope = 0.08;     // per meter
  double confidence_sigma = 0.08;
  double detector_latency = 0.5;  // s
  double comm_latency = 0.2;      // s
  double comm_drop = 0.05;

  double p_detect(double range) const;
  bool noiseless_odometry() const {
    return odom_heading_bias == 0.0 && odom_noise_sigma == 0.0 && odom_bias_sigma == 0.0 && odom_scale_sigma == 0.0;
  }
  void validate() const;

  /// Every noise and failure channel off, detection certain.
  static NoiseModel zero();
};

struct RobotState {
  Pose2D true_pose;
  Pose2D believed_pose;
  bool mechanism_on = false;
};

struct TrashItem {
  GroundPoint position;
  double mass = 0.5;
  bool collected = false;
};

struct DetectionFrame {
  double t = 0.0;  // capture time
  std::vector<BoundingBox> boxes;
};

/// Exact unicycle motion over dt (arc when omega != 0).
Pose2D integrate_unicycle(const Pose2D& p, double v, double omega, double dt);

/// Distance from `p` to the segment [a, b].
double point_segment_distance(const GroundPoint& p, const GroundPoint& a, const GroundPoint& b);

/// In-process link with fixed latency and independent per-message drops.
template <typename T>
class MessageChannel {
 public:
  MessageChannel(double latency, double drop) : latency_(latency), drop_(drop) {}

  void send(double t, T msg, Rng& rng) {
    if (drop_ > 0.0 && rng.bernoulli(drop_)) return;
    queue_.push_back({t + latency_, std::move(msg)});
  }

  /// Messages whose arrival time is <= now, in send order.
  std::vector<T> receive(double now) {
    std::vector<T> out;
    while (!queue_.empty() && queue_.front().first <= now) {
      out.push_back(std::move(queue_.front().second));
      queue_.pop_front();
    }
    return out;
  }

  std::size_t in_flight() const { return queue_.size(); }

 private:
  double latency_;
  double drop_;
  std::deque<std::pair<double, T>> queue_;
};

class World {
 public:
  World(WorldConfig cfg, NoiseModel noise);

  const WorldConfig& config() const { return cfg_; }
  const NoiseModel& noise() const { return noise_; }
  double time() const { return time_; }
  const RobotState& robot() const { return robot_; }
  const std::vector<TrashItem>& trash() const { return trash_; }
  std::size_t collected_count() const;
  Rng& rng() { return rng_; }

  /// Places the robot (true and believed pose) without simulating motion.
  void teleport(const Pose2D& pose);

  /// Advances the world by dt under `cmd`.
  void step(const MotionCommand& cmd, double dt);

  /// True if a robot disc centered at `p` would overlap an obstacle or leave the arena.
  bool collides(const GroundPoint& p) const;

  /// Distance along the ray to the first obstacle or arena wall (capped at max_range).
  double raycast(const GroundPoint& origin, double heading, double max_range) const;

  /// Exact depth scan across the camera's horizontal field of view.
  std::vector<ScanRay> scan(const CameraModel& cam, int rays) const { return scan_from(robot_.true_pose, cam, rays); }
  std::vector<ScanRay> scan_from(const Pose2D& robot_pose, const CameraModel& cam, int rays) const;

  /// One frame of the synthetic trash detector, stamped with the current time.
  DetectionFrame detect(const CameraModel& cam);

 private:
  WorldConfig cfg_;
  NoiseModel noise_;
  Rng rng_;
  Rng odom_rng_;     // separate streams keep odometry and clutter draws
  Rng clutter_rng_;  // aligned across runs that differ only in geometry
  double odom_bias_ = 0.0;
  double odom_scale_ = 1.0;
  double time_ = 0.0;
  RobotState robot_;
  std::vector<TrashItem> trash_;
};

struct SurveyConfig {
  double lane_spacing = 1.0;
  double altitude = 3.0;
  double footprint = 3.0;        // side of the square ground footprint, m
  double speed = 1.0;            // m/s
  double frame_interval = 0.5;   // s

  void validate() const;
};

/// Lane centers and along-lane frame positions of the lawnmower flight.
std::vector<GroundPoint> survey_frame_positions(const Rect& arena, const SurveyConfig& survey);

/// Simulates the drone pass and returns detections in the order the ground
/// robot receives them over the lossy link.
std::vector<RawDetection> aerial_survey(World& world, const SurveyConfig& survey);

/// Plain-text dump of trash, obstacles and collected flags.
void write_ground_truth(std::ostream& os, const World& world);

}  // namespace litterbot
