#include "litterbot/mission.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "litterbot/config.hpp"

namespace litterbot {

namespace {

// Validation helpers throw std::invalid_argument("<section.key> out of range").
template <typename F>
void checked(F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(' ')), "out of range");
  }
}

void require(bool ok, const char* key) {
  if (!ok) throw ConfigError(key, "out of range");
}

}  // namespace

void MissionConfig::validate() const {
  checked([&] { camera.validate(); });
  checked([&] { noise.validate(); });
  checked([&] { filter.validate(); });
  checked([&] { pickup.validate(); });
  checked([&] { survey.validate(); });
  checked([&] {
    WorldConfig w = world;
    if (scenario.random || mode == MissionMode::PickupTrial) {
      w.obstacles.clear();
      w.trash.clear();
    }
    w.validate();
  });
  require(standoff > 0.0, "mission.standoff");
  require(match_radius > 0.0, "mission.match_radius");
  require(scenario.min_obstacles >= 0 && scenario.max_obstacles >= scenario.min_obstacles, "scenario.max_obstacles");
  require(scenario.min_obstacle_size > 0.0 && scenario.max_obstacle_size >= scenario.min_obstacle_size,
          "scenario.max_obstacle_size");
  require(scenario.trash_count >= 0, "scenario.trash_count");
  require(scenario.trash_clearance >= 0.0, "scenario.trash_clearance");
  require(scenario.trash_separation >= 0.0, "scenario.trash_separation");
  require(mapping.resolution > 0.0, "mapping.resolution");
  require(mapping.margin >= 0.0, "mapping.margin");
  require(mapping.sweep_spacing > 0.0, "mapping.sweep_spacing");
  require(mapping.pose_spacing > 0.0, "mapping.pose_spacing");
  require(mapping.headings >= 1, "mapping.headings");
  require(mapping.rays >= 1, "mapping.rays");
  require(mapping.morph_side >= 1 && mapping.morph_side % 2 == 1, "mapping.morph_side");
  require(nav.inflation >= 0.0, "nav.inflation");
  require(nav.speed > 0.0, "nav.speed");
  require(nav.turn_rate > 0.0, "nav.turn_rate");
  require(nav.stuck_time > 0.0, "nav.stuck_time");
  require(nav.stuck_distance > 0.0, "nav.stuck_distance");
  require(nav.backoff >= 0.0, "nav.backoff");
  require(trial.distance > 0.0 && trial.distance <= pickup.activation_radius + pickup.activation_tolerance,
          "trial.distance");
}

std::string_view to_string(TrashOutcome outcome) {
  switch (outcome) {
    case TrashOutcome::Collected: return "Collected";
    case TrashOutcome::TimedOut: return "TimedOut";
    case TrashOutcome::Unreachable: return "Unreachable";
    case TrashOutcome::Undetected: return "Undetected";
    case TrashOutcome::Missed: return "Missed";
  }
  return "?";
}

double MissionReport::mean_map_error() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& t : per_trash) {
    if (!t.hypothesis) continue;
    sum += t.map_error;
    ++n;
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

std::string format_report(const MissionReport& r) {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };
  line("seed", std::to_string(r.seed));
  line("success", r.success ? "true" : "false");
  line("n_trash", std::to_string(r.per_trash.size()));
  line("n_collected", std::to_string(r.n_collected));
  line("wall_time_s", fmt::format("{:.3f}", r.wall_time));
  line("mean_map_error_m", fmt::format("{:.6f}", r.mean_map_error()));
  line("map_file", r.map_file.empty() ? "none" : r.map_file);
  line("n_hypotheses", std::to_string(r.hypotheses.size()));
  for (std::size_t i = 0; i < r.hypotheses.size(); ++i)
    line(fmt::format("hypothesis.{}", i),
         fmt::format("{:.6f} {:.6f} {}", r.hypotheses[i].point.x, r.hypotheses[i].point.y, r.hypotheses[i].count));
  for (std::size_t i = 0; i < r.per_trash.size(); ++i) {
    const TrashResult& t = r.per_trash[i];
    line(fmt::format("trash.{}.ground_truth", i), fmt::format("{:.6f} {:.6f}", t.ground_truth.x, t.ground_truth.y));
    line(fmt::format("trash.{}.hypothesis", i),
         t.hypothesis ? fmt::format("{:.6f} {:.6f}", t.hypothesis->x, t.hypothesis->y) : "none");
    line(fmt::format("trash.{}.map_error_m", i), t.hypothesis ? fmt::format("{:.6f}", t.map_error) : "nan");
    line(fmt::format("trash.{}.outcome", i), std::string(to_string(t.outcome)));
  }
  return out;
}

OccupancyGrid truth_grid(const WorldConfig& world, double resolution, double margin) {
  const Rect& a = world.arena;
  const int w = static_cast<int>(std::ceil((a.width() + 2.0 * margin) / resolution - 1e-9));
  const int h = static_cast<int>(std::ceil((a.height() + 2.0 * margin) / resolution - 1e-9));
  OccupancyGrid grid(w, h, resolution, Pose2D(a.x0 - margin, a.y0 - margin, 0.0), Cell::Free);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const GroundPoint c = grid.cell_center({col, row});
      const bool blocked = !a.contains(c) || std::ranges::any_of(world.obstacles, [&](const Rect& o) {
        return o.contains(c);
      });
      if (blocked) grid.at({col, row}) = Cell::Occupied;
    }
  }
  return grid;
}

WorldConfig generate_world(const MissionConfig& cfg, std::uint64_t seed) {
  WorldConfig w = cfg.world;
  w.seed = seed;
  w.robot.brush_halfwidth = cfg.pickup.brush_halfwidth;
  const Rect& a = w.arena;

  if (cfg.mode == MissionMode::PickupTrial) {
    Rng rng(derive_seed(seed, 2));
    const GroundPoint trash{0.5 * (a.x0 + a.x1), 0.5 * (a.y0 + a.y1)};
    const double bearing = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    w.obstacles.clear();
    w.trash = {{trash, 0.5}};
    w.start = Pose2D(trash + GroundPoint{std::cos(bearing), std::sin(bearing)} * cfg.trial.distance, heading);
    return w;
  }
  if (!cfg.scenario.random) return w;

  const ScenarioConfig& sc = cfg.scenario;
  Rng rng(derive_seed(seed, 1));
  const GroundPoint start = w.start.position();
  for (int attempt = 0; attempt < 200; ++attempt) {
    w.obstacles.clear();
    w.trash.clear();

    const int n_obstacles = sc.min_obstacles + static_cast<int>(rng.below(sc.max_obstacles - sc.min_obstacles + 1));
    for (int i = 0, tries = 0; i < n_obstacles && tries < 200; ++tries) {
      const double ow = rng.uniform(sc.min_obstacle_size, sc.max_obstacle_size);
      const double oh = rng.uniform(sc.min_obstacle_size, sc.max_obstacle_size);
      const double x0 = rng.uniform(a.x0 + 0.3, a.x1 - 0.3 - ow);
      const double y0 = rng.uniform(a.y0 + 0.3, a.y1 - 0.3 - oh);
      const Rect r{x0, y0, x0 + ow, y0 + oh};
      if (r.distance_to(start) < sc.start_clearance) continue;
      w.obstacles.push_back(r);
      ++i;
    }

    for (int i = 0, tries = 0; i < sc.trash_count && tries < 2000; ++tries) {
      const GroundPoint p{rng.uniform(a.x0 + sc.trash_clearance, a.x1 - sc.trash_clearance),
                          rng.uniform(a.y0 + sc.trash_clearance, a.y1 - sc.trash_clearance)};
      if (distance(p, start) < sc.start_clearance) continue;
      if (std::ranges::any_of(w.obstacles, [&](const Rect& o) { return o.distance_to(p) < sc.trash_clearance; }))
        continue;
      if (std::ranges::any_of(w.trash, [&](const TrashSpec& t) { return distance(t.position, p) < sc.trash_separation; }))
        continue;
      w.trash.push_back({p, rng.uniform(0.2, kMaxTrashMass)});
      ++i;
    }
    if (static_cast<int>(w.trash.size()) != sc.trash_count) continue;

    const OccupancyGrid g = inflate(truth_grid(w, cfg.mapping.resolution, cfg.mapping.margin), cfg.nav.inflation);
    const bool reachable = std::ranges::all_of(w.trash, [&](const TrashSpec& t) {
      return g.world_to_cell(start) && g.is_free(*g.world_to_cell(start)) && astar(g, start, t.position).has_value();
    });
    if (reachable) return w;
  }
  throw ConfigError("scenario", "could not generate a solvable scenario");
}

OccupancyGrid build_map(const World& world, const CameraModel& cam, const MappingConfig& mapping) {
  const Rect& a = world.config().arena;
  OccupancyGrid grid = truth_grid(world.config(), mapping.resolution, mapping.margin);
  std::ranges::fill(grid.cells(), Cell::Unknown);

  const double inset = world.config().robot.radius + 0.05;
  for (double y = a.y0 + 0.5 * mapping.sweep_spacing; y < a.y1; y += mapping.sweep_spacing) {
    for (double x = a.x0 + inset; x <= a.x1 - inset + 1e-9; x += mapping.pose_spacing) {
      const GroundPoint p{x, std::clamp(y, a.y0 + inset, a.y1 - inset)};
      if (world.collides(p)) continue;
      for (int k = 0; k < mapping.headings; ++k) {
        const Pose2D pose(p, 2.0 * std::numbers::pi * k / mapping.headings);
        const std::vector<ScanRay> rays = world.scan_from(pose, cam, mapping.rays);
        integrate_scan(grid, compose(pose, Pose2D(cam.forward_offset, 0.0, 0.0)), rays);
      }
    }
  }
  return morph_close_open(grid, {mapping.morph_side});
}

std::vector<std::optional<std::size_t>> match_truth(std::span<const GroundPoint> truth,
                                                    std::span<const GroundPoint> hyps, double radius) {
  struct Pair {
    double d;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < hyps.size(); ++j)
      if (const double d = distance(truth[i], hyps[j]); d <= radius) pairs.push_back({d, i, j});
  std::ranges::sort(pairs, [](const Pair& x, const Pair& y) {
    return std::tie(x.d, x.i, x.j) < std::tie(y.d, y.i, y.j);
  });

  std::vector<std::optional<std::size_t>> out(truth.size());
  std::vector<bool> used(hyps.size(), false);
  for (const Pair& p : pairs) {
    if (out[p.i] || used[p.j]) continue;
    out[p.i] = p.j;
    used[p.j] = true;
  }
  return out;
}

PathFollower::PathFollower(PathPlan plan, const NavConfig& nav, double resolution)
    : plan_(std::move(plan)), nav_(nav), resolution_(resolution) {
  if (plan_.waypoints.empty()) throw std::invalid_argument("cannot follow an empty path");
}

MotionCommand PathFollower::step(const Pose2D& believed, double t, double dt) {
  if (status_ != FollowStatus::Following) return {};

  const GroundPoint here = believed.position();
  if (!anchored_ || distance(here, anchor_) > nav_.stuck_distance) {
    anchor_ = here;
    anchor_t_ = t;
    anchored_ = true;
  } else if (t - anchor_t_ >= nav_.stuck_time) {
    status_ = FollowStatus::Stuck;
    return {};
  }

  const auto& wp = plan_.waypoints;
  const std::size_t last = wp.size() - 1;
  while (index_ < last && distance(here, wp[index_]) <= 1.5 * resolution_) ++index_;

  const GroundPoint target = wp[index_];
  const double dist = distance(here, target);
  if (index_ == last && dist <= 0.25 * resolution_) {
    status_ = FollowStatus::Arrived;
    return {};
  }

  const double err = angle_to(believed, target);
  MotionCommand cmd;
  if (std::abs(err) > 0.5) {
    cmd.omega = std::clamp(err / dt, -nav_.turn_rate, nav_.turn_rate);
    return cmd;
  }
  cmd.omega = std::clamp(2.0 * err, -nav_.turn_rate, nav_.turn_rate);
  cmd.v = index_ == last ? std::min(nav_.speed, dist / dt) : nav_.speed;
  return cmd;
}

namespace {

enum class Attempt { NotTried, Done, TimedOut, Unreachable };

class MissionRunner {
 public:
  MissionRunner(const MissionConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed), world_(generate_world(cfg, seed), cfg.noise), buffer_(PoseBuffer::kDefaultHorizon) {
    record();
  }

  MissionReport run() { return cfg_.mode == MissionMode::PickupTrial ? run_trial() : run_full(); }

  MappingResult map_only() {
    MappingResult m;
    const std::vector<RawDetection> stream = aerial_survey(world_, cfg_.survey);
    for (const RawDetection& d : stream) ingest(m.hypotheses, d, cfg_.filter);
    m.confirmed = confirmed(m.hypotheses, cfg_.filter);
    m.grid = build_map(world_, cfg_.camera, cfg_.mapping);
    m.truth = world_.trash();
    return m;
  }

 private:
  double dt() const { return cfg_.world.dt; }

  void record() {
    const RobotState& r = world_.robot();
    buffer_.insert({world_.time(), r.believed_pose});
    trajectory_.push_back({world_.time(), r.believed_pose});
    true_trajectory_.push_back({world_.time(), r.true_pose});
  }

  void advance(const MotionCommand& cmd) {
    world_.step(cmd, dt());
    record();
  }

  const Pose2D& believed() const { return world_.robot().believed_pose; }

  Attempt navigate(const NavGoal& goal, const OccupancyGrid& map) {
    // A stuck robot marks the contact as an obstacle, backs off and replans.
    constexpr int kAttempts = 3;
    OccupancyGrid planning = map;
    for (int attempt = 0;; ++attempt) {
      const auto start = nearest_free(planning, believed().position(), 1.0);
      if (!start) return Attempt::Unreachable;
      const auto plan = astar(planning, *start, goal.pose.position());
      if (!plan) return Attempt::Unreachable;
      paths_.push_back(*plan);

      PathFollower follower(*plan, cfg_.nav, planning.resolution());
      const double limit = world_.time() + 3.0 * plan->cost / cfg_.nav.speed + 30.0;
      while (follower.status() == FollowStatus::Following) {
        if (world_.time() > limit) return Attempt::Unreachable;
        advance(follower.step(believed(), world_.time(), dt()));
      }
      if (follower.status() == FollowStatus::Arrived) break;
      if (attempt + 1 == kAttempts) return Attempt::Unreachable;
      mark_contact(planning);
      for (double t = 0.0; t < cfg_.nav.backoff / cfg_.nav.speed; t += dt()) advance({-cfg_.nav.speed, 0.0, false});
    }

    // Face the target before the pickup starts.
    for (int i = 0; i < 400; ++i) {
      const double err = angle_diff(goal.pose.theta(), believed().theta());
      if (std::abs(err) <= 0.05) break;
      advance({0.0, std::clamp(err / dt(), -cfg_.nav.turn_rate, cfg_.nav.turn_rate), false});
    }
    return Attempt::Done;
  }

  void mark_contact(OccupancyGrid& planning) const {
    const Pose2D& b = believed();
    const GroundPoint contact = b.position() + b.heading() * world_.config().robot.radius;
    const double r = cfg_.nav.inflation;
    const double res = planning.resolution();
    const int span = static_cast<int>(std::ceil(r / res)) + 1;
    const GroundPoint g = planning.world_to_grid(contact);
    const CellIndex c{static_cast<int>(std::floor(g.x)), static_cast<int>(std::floor(g.y))};
    for (int dr = -span; dr <= span; ++dr)
      for (int dc = -span; dc <= span; ++dc) {
        const CellIndex n{c.col + dc, c.row + dr};
        if (planning.contains(n) && distance(planning.cell_center(n), contact) <= r) planning.at(n) = Cell::Occupied;
      }
  }

  PickupPhase pickup_episode(const GroundPoint& expected) {
    PickupState state = start_pickup(believed(), expected, cfg_.pickup);
    MessageChannel<DetectionFrame> detector(cfg_.noise.detector_latency, 0.0);
    std::vector<Sighting> sightings;
    while (!state.finished()) {
      if (state.phase == PickupPhase::SpinSearch) {
        DetectionFrame frame = world_.detect(cfg_.camera);
        const double t = frame.t;
        detector.send(t, std::move(frame), world_.rng());
      }
      sightings.clear();
      for (const DetectionFrame& f : detector.receive(world_.time())) {
        Pose2D at_capture;
        try {
          at_capture = buffer_.pose_at(f.t);
        } catch (const OutOfRange&) {
          continue;
        }
        for (const BoundingBox& box : f.boxes) {
          try {
            sightings.push_back({project_detection(at_capture, box, cfg_.camera), box.confidence});
          } catch (const DegenerateDepth&) {
          }
        }
      }
      auto [next, cmd] = step(state, believed(), sightings, cfg_.pickup, dt());
      state = next;
      write_episode_line(episode_log_, world_.time(), state.phase, cmd, believed());
      advance(cmd);
    }
    return state.phase;
  }

  MissionReport run_trial() {
    MissionReport report;
    report.seed = seed_;
    const GroundPoint target = world_.trash().front().position;
    const PickupPhase end = pickup_episode(target);

    TrashResult t;
    t.ground_truth = target;
    t.hypothesis = target;
    t.map_error = 0.0;
    if (world_.trash().front().collected) {
      t.outcome = TrashOutcome::Collected;
    } else {
      t.outcome = end == PickupPhase::TimedOut ? TrashOutcome::TimedOut : TrashOutcome::Missed;
    }
    report.per_trash.push_back(t);
    finish(report, nullptr);
    return report;
  }

  MissionReport run_full() {
    MissionReport report;
    report.seed = seed_;

    // 1. Aerial survey streamed into the anti-clustering filter.
    const std::vector<RawDetection> stream = aerial_survey(world_, cfg_.survey);
    for (const RawDetection& d : stream) ingest(report.hypotheses, d, cfg_.filter);
    const std::vector<GroundPoint> targets = confirmed(report.hypotheses, cfg_.filter);

    // 2. Ground mapping sweep.
    const OccupancyGrid map = build_map(world_, cfg_.camera, cfg_.mapping);
    const OccupancyGrid planning = inflate(map, cfg_.nav.inflation);

    // 3. Tour over confirmed hypotheses.
    std::vector<TourStop> tour;
    if (auto s = nearest_free(planning, believed().position(), 1.0)) tour = order_waypoints(*s, targets, planning);
    else
      for (std::size_t i = 0; i < targets.size(); ++i) tour.push_back({targets[i], i, false});

    // 4. Navigate to each standoff goal, then run a Greedy Pickup episode.
    std::vector<Attempt> attempts(targets.size(), Attempt::NotTried);
    for (const TourStop& stop : tour) attempts[stop.input_index] = visit(stop.point, planning);

    // 5. Score against ground truth.
    std::vector<GroundPoint> truth;
    for (const TrashItem& t : world_.trash()) truth.push_back(t.position);
    const auto matches = match_truth(truth, targets, cfg_.match_radius);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      TrashResult r;
      r.ground_truth = truth[i];
      if (matches[i]) {
        r.hypothesis = targets[*matches[i]];
        r.map_error = distance(truth[i], *r.hypothesis);
      }
      if (world_.trash()[i].collected) {
        r.outcome = TrashOutcome::Collected;
      } else if (!matches[i]) {
        r.outcome = TrashOutcome::Undetected;
      } else {
        switch (attempts[*matches[i]]) {
          case Attempt::Done: r.outcome = TrashOutcome::Missed; break;
          case Attempt::TimedOut: r.outcome = TrashOutcome::TimedOut; break;
          case Attempt::Unreachable:
          case Attempt::NotTried: r.outcome = TrashOutcome::Unreachable; break;
        }
      }
      report.per_trash.push_back(r);
    }
    finish(report, &map);
    return report;
  }

  Attempt visit(const GroundPoint& target, const OccupancyGrid& planning) {
    const auto from = nearest_free(planning, believed().position(), 1.0);
    if (!from) return Attempt::Unreachable;
    const auto goal = approach_goal(target, planning, Pose2D(*from, believed().theta()), cfg_.standoff);
    if (!goal) return Attempt::Unreachable;
    if (navigate(*goal, planning) != Attempt::Done) return Attempt::Unreachable;
    try {
      return pickup_episode(target) == PickupPhase::Done ? Attempt::Done : Attempt::TimedOut;
    } catch (const TooFar&) {
      return Attempt::Unreachable;
    }
  }

  void finish(MissionReport& report, const OccupancyGrid* map) {
    report.n_collected = world_.collected_count();
    report.success = std::ranges::all_of(report.per_trash,
                                         [](const TrashResult& t) { return t.outcome == TrashOutcome::Collected; });
    report.wall_time = world_.time();
    if (map) report.map_file = "map.gridmap";
    if (cfg_.output_dir.empty()) return;

    const auto& dir = cfg_.output_dir;
    std::filesystem::create_directories(dir);
    if (map) save_map(*map, dir / report.map_file);
    write_file(dir / "report.txt", [&](std::ostream& os) { os << format_report(report); });
    write_file(dir / "trajectory.txt", [&](std::ostream& os) { write_trajectory(os, trajectory_); });
    write_file(dir / "trajectory_true.txt", [&](std::ostream& os) { write_trajectory(os, true_trajectory_); });
    write_file(dir / "hypotheses.txt", [&](std::ostream& os) { write_hypotheses(os, report.hypotheses, cfg_.filter); });
    write_file(dir / "episodes.txt", [&](std::ostream& os) { os << episode_log_.str(); });
    write_file(dir / "ground_truth.txt", [&](std::ostream& os) { write_ground_truth(os, world_); });
    for (std::size_t i = 0; i < paths_.size(); ++i)
      write_file(dir / fmt::format("path_{}.txt", i), [&](std::ostream& os) { write_path(os, paths_[i]); });
  }

  template <typename F>
  static void write_file(const std::filesystem::path& path, F&& body) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw MapIoError(fmt::format("cannot open {} for writing", path.string()));
    body(os);
    if (!os) throw MapIoError(fmt::format("write failed for {}", path.string()));
  }

  const MissionConfig& cfg_;
  std::uint64_t seed_;
  World world_;
  PoseBuffer buffer_;
  std::vector<StampedPose> trajectory_;
  std::vector<StampedPose> true_trajectory_;
  std::ostringstream episode_log_;
  std::vector<PathPlan> paths_;
};

}  // namespace

MissionReport run_mission(const MissionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return MissionRunner(cfg, seed).run();
}

MappingResult run_mapping(const MissionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  MissionConfig full = cfg;
  full.mode = MissionMode::Full;
  return MissionRunner(full, seed).map_only();
}

}  // namespace litterbot
