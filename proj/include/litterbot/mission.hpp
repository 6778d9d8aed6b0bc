#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "litterbot/clusterfilter.hpp"
#include "litterbot/geometry.hpp"
#include "litterbot/gridmap.hpp"
#include "litterbot/pickup.hpp"
#include "litterbot/planner.hpp"
#include "litterbot/posebuffer.hpp"
#include "litterbot/simworld.hpp"

namespace litterbot {

struct ScenarioConfig {
  bool random = true;          // generate obstacles and trash from the seed
  int min_obstacles = 4;
  int max_obstacles = 8;
  double min_obstacle_size = 0.3;
  double max_obstacle_size = 0.9;
  int trash_count = 3;
  double trash_clearance = 0.6;    // from walls and obstacles
  double trash_separation = 1.2;   // between items
  double start_clearance = 1.0;
};

struct MappingConfig {
  double resolution = 0.05;
  double margin = 0.5;          // grid extends this far beyond the arena
  double sweep_spacing = 1.0;   // lawnmower lane spacing
  double pose_spacing = 0.5;
  int headings = 6;             // scan directions per sweep pose
  int rays = 48;                // rays per scan
  int morph_side = 3;
};

struct NavConfig {
  double inflation = 0.23;   // robot half-width plus margin
  double speed = 0.3;
  double turn_rate = 1.0;
  double stuck_time = 10.0;
  double stuck_distance = 0.02;
  double backoff = 0.3;  // reverse this far before replanning after getting stuck
};

enum class MissionMode { Full, PickupTrial };

// Single Greedy Pickup episode with the robot placed `distance` from one item.
struct TrialConfig {
  double distance = 2.0;
};

struct MissionConfig {
  MissionMode mode = MissionMode::Full;
  WorldConfig world;
  ScenarioConfig scenario;
  NoiseModel noise;
  CameraModel camera;
  FilterConfig filter;
  PickupConfig pickup;
  SurveyConfig survey;
  MappingConfig mapping;
  NavConfig nav;
  TrialConfig trial;
  double standoff = 2.0;
  double match_radius = 0.5;  // ground-truth to hypothesis pairing
  std::filesystem::path output_dir;  // empty: keep everything in memory

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

enum class TrashOutcome { Collected, TimedOut, Unreachable, Undetected, Missed };
std::string_view to_string(TrashOutcome outcome);

struct TrashResult {
  GroundPoint ground_truth;
  std::optional<GroundPoint> hypothesis;
  double map_error = 0.0;  // m, only meaningful with a hypothesis
  TrashOutcome outcome = TrashOutcome::Undetected;
};

struct MissionReport {
  std::uint64_t seed = 0;
  std::string map_file;
  std::vector<TrashHypothesis> hypotheses;
  std::vector<TrashResult> per_trash;
  bool success = false;
  double wall_time = 0.0;  // simulated mission clock, s
  std::size_t n_collected = 0;

  double mean_map_error() const;  // NaN when nothing was matched
};

/// Canonical `key = value` rendering of a report (report.txt).
std::string format_report(const MissionReport& report);

/// Turns the scenario section into concrete obstacles and trash for `seed`.
WorldConfig generate_world(const MissionConfig& cfg, std::uint64_t seed);

/// Rasterized ground-truth occupancy of the arena (walls included).
OccupancyGrid truth_grid(const WorldConfig& world, double resolution, double margin);

/// Lawnmower mapping sweep with exact poses, followed by morphological cleanup.
OccupancyGrid build_map(const World& world, const CameraModel& cam, const MappingConfig& mapping);

enum class FollowStatus { Following, Arrived, Stuck };

/// Rotate-then-drive tracking of a planned path using the believed pose.
class PathFollower {
 public:
  PathFollower(PathPlan plan, const NavConfig& nav, double resolution);

  MotionCommand step(const Pose2D& believed, double t, double dt);
  FollowStatus status() const { return status_; }
  std::size_t index() const { return index_; }

 private:
  PathPlan plan_;
  NavConfig nav_;
  double resolution_;
  std::size_t index_ = 0;
  FollowStatus status_ = FollowStatus::Following;
  GroundPoint anchor_;
  double anchor_t_ = 0.0;
  bool anchored_ = false;
};

/// Runs one mission end to end. Dump files are written when cfg.output_dir is set.
MissionReport run_mission(const MissionConfig& cfg, std::uint64_t seed);

/// Mapping phase only: survey, filter and map. Returns the cleaned grid.
struct MappingResult {
  OccupancyGrid grid;
  std::vector<TrashHypothesis> hypotheses;
  std::vector<GroundPoint> confirmed;
  std::vector<TrashItem> truth;
};
MappingResult run_mapping(const MissionConfig& cfg, std::uint64_t seed);

/// Greedy pairing of ground-truth items to hypotheses by distance, within `radius`.
/// Returns, for each truth item, the index into `hyps` or nullopt.
std::vector<std::optional<std::size_t>> match_truth(std::span<const GroundPoint> truth,
                                                    std::span<const GroundPoint> hyps, double radius);

}  // namespace litterbot
