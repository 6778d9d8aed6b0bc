#include "litterbot/simworld.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace litterbot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTrashHalfSize = 0.1;  // m, for box extents only

void require(bool ok, const std::string& field) {
  if (!ok) throw std::invalid_argument(fmt::format("{} out of range", field));
}

// Entry distance of a ray into a rectangle, or infinity. An origin inside gives 0.
double ray_rect_entry(const GroundPoint& o, const GroundPoint& d, const Rect& r) {
  double t_min = -kInf;
  double t_max = kInf;
  const double lo[2] = {r.x0, r.y0};
  const double hi[2] = {r.x1, r.y1};
  const double oo[2] = {o.x, o.y};
  const double dd[2] = {d.x, d.y};
  for (int k = 0; k < 2; ++k) {
    if (dd[k] == 0.0) {
      if (oo[k] < lo[k] || oo[k] > hi[k]) return kInf;
      continue;
    }
    double t1 = (lo[k] - oo[k]) / dd[k];
    double t2 = (hi[k] - oo[k]) / dd[k];
    if (t1 > t2) std::swap(t1, t2);
    t_min = std::max(t_min, t1);
    t_max = std::min(t_max, t2);
  }
  if (t_max < 0.0 || t_min > t_max) return kInf;
  return std::max(t_min, 0.0);
}

}  // namespace

double Rect::distance_to(const GroundPoint& p) const {
  const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

void WorldConfig::validate() const {
  require(arena.x1 > arena.x0 && arena.y1 > arena.y0, "world.arena");
  require(dt > 0.0, "world.dt");
  require(robot.radius > 0.0, "robot.radius");
  require(robot.brush_halfwidth > 0.0, "robot.brush_halfwidth");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Rect& o = obstacles[i];
    require(o.x1 > o.x0 && o.y1 > o.y0 && o.x0 >= arena.x0 && o.y0 >= arena.y0 && o.x1 <= arena.x1 &&
                o.y1 <= arena.y1,
            fmt::format("world.obstacles[{}]", i));
  }
  for (std::size_t i = 0; i < trash.size(); ++i) {
    const auto& t = trash[i];
    require(arena.contains(t.position), fmt::format("world.trash[{}].position", i));
    require(t.mass > 0.0 && t.mass <= kMaxTrashMass, fmt::format("world.trash[{}].mass", i));
    for (const Rect& o : obstacles)
      require(!o.contains(t.position), fmt::format("world.trash[{}].position (inside obstacle)", i));
  }
  require(arena.contains(start.position()), "world.start");
}

double NoiseModel::p_detect(double range) const {
  return std::clamp(1.0 - p_detect_slope * range, p_detect_min, p_detect_max);
}

void NoiseModel::validate() const {
  require(odom_noise_sigma >= 0.0, "noise.odom_noise_sigma");
  require(std::isfinite(odom_heading_bias), "noise.odom_heading_bias");
  require(odom_bias_sigma >= 0.0, "noise.odom_bias_sigma");
  require(odom_scale_sigma >= 0.0 && odom_scale_sigma < 0.2, "noise.odom_scale_sigma");
  require(detect_pos_sigma >= 0.0, "noise.detect_pos_sigma");
  require(pixel_sigma >= 0.0, "noise.pixel_sigma");
  require(p_detect_min >= 0.0 && p_detect_min <= 1.0, "noise.p_detect_min");
  require(p_detect_max >= p_detect_min && p_detect_max <= 1.0, "noise.p_detect_max");
  require(p_detect_slope >= 0.0, "noise.p_detect_slope");
  require(false_positive_rate >= 0.0, "noise.false_positive_rate");
  require(survey_false_positives >= 0.0, "noise.survey_false_positives");
  require(confidence_sigma >= 0.0, "noise.confidence_sigma");
  require(detector_latency >= 0.0, "noise.detector_latency");
  require(comm_latency >= 0.0, "noise.comm_latency");
  require(comm_drop >= 0.0 && comm_drop <= 1.0, "noise.comm_drop");
}

NoiseModel NoiseModel::zero() {
  NoiseModel n;
  n.odom_heading_bias = 0.0;
  n.odom_noise_sigma = 0.0;
  n.odom_bias_sigma = 0.0;
  n.odom_scale_sigma = 0.0;
  n.detect_pos_sigma = 0.0;
  n.pixel_sigma = 0.0;
  n.p_detect_max = 1.0;
  n.p_detect_min = 1.0;
  n.p_detect_slope = 0.0;
  n.false_positive_rate = 0.0;
  n.survey_false_positives = 0.0;
  n.confidence_sigma = 0.0;
  n.comm_drop = 0.0;
  return n;
}

Pose2D integrate_unicycle(const Pose2D& p, double v, double omega, double dt) {
  const double th = p.theta();
  if (std::abs(omega * dt) < 1e-12) {
    return {p.x() + v * dt * std::cos(th), p.y() + v * dt * std::sin(th), th + omega * dt};
  }
  const double th1 = th + omega * dt;
  const double r = v / omega;
  return {p.x() + r * (std::sin(th1) - std::sin(th)), p.y() - r * (std::cos(th1) - std::cos(th)), th1};
}

double point_segment_distance(const GroundPoint& p, const GroundPoint& a, const GroundPoint& b) {
  const GroundPoint ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * s);
}

World::World(WorldConfig cfg, NoiseModel noise) : cfg_(std::move(cfg)), noise_(noise),
      rng_(cfg_.seed),
      odom_rng_(derive_seed(cfg_.seed, 101)),
      clutter_rng_(derive_seed(cfg_.seed, 102)) {
  cfg_.validate();
  noise_.validate();
  // Per-run wheel miscalibration.
  odom_bias_ = noise_.odom_heading_bias;
  if (noise_.odom_bias_sigma > 0.0) odom_bias_ += odom_rng_.normal(0.0, noise_.odom_bias_sigma);
  if (noise_.odom_scale_sigma > 0.0) odom_scale_ = 1.0 + odom_rng_.normal(0.0, noise_.odom_scale_sigma);
  for (const auto& t : cfg_.trash) trash_.push_back({t.position, t.mass, false});
  robot_.true_pose = cfg_.start;
  robot_.believed_pose = cfg_.start;
}

std::size_t World::collected_count() const {
  return static_cast<std::size_t>(std::ranges::count_if(trash_, [](const TrashItem& t) { return t.collected; }));
}

void World::teleport(const Pose2D& pose) {
  robot_.true_pose = pose;
  robot_.believed_pose = pose;
}

bool World::collides(const GroundPoint& p) const {
  const double r = cfg_.robot.radius;
  const Rect& a = cfg_.arena;
  if (p.x - r < a.x0 || p.x + r > a.x1 || p.y - r < a.y0 || p.y + r > a.y1) return true;
  return std::ranges::any_of(cfg_.obstacles, [&](const Rect& o) { return o.distance_to(p) < r; });
}

double World::raycast(const GroundPoint& origin, double heading, double max_range) const {
  const GroundPoint d{std::cos(heading), std::sin(heading)};
  const Rect& a = cfg_.arena;
  double best = max_range;
  if (d.x > 0) best = std::min(best, (a.x1 - origin.x) / d.x);
  if (d.x < 0) best = std::min(best, (a.x0 - origin.x) / d.x);
  if (d.y > 0) best = std::min(best, (a.y1 - origin.y) / d.y);
  if (d.y < 0) best = std::min(best, (a.y0 - origin.y) / d.y);
  for (const Rect& o : cfg_.obstacles) best = std::min(best, ray_rect_entry(origin, d, o));
  return std::max(best, 0.0);
}

void World::step(const MotionCommand& cmd, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("world step requires dt > 0");
  const Pose2D before = robot_.true_pose;

  // Fraction of the commanded translation completed before contact.
  double frac = 1.0;
  Pose2D moved = integrate_unicycle(before, cmd.v, cmd.omega, dt);
  if (cmd.v != 0.0 && collides(moved.position())) {
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 40; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (collides(integrate_unicycle(before, cmd.v, cmd.omega, mid * dt).position())) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    frac = lo;
  }

  auto advance = [&](const Pose2D& p, double v, double omega) {
    if (frac == 1.0) return integrate_unicycle(p, v, omega, dt);
    const Pose2D part = integrate_unicycle(p, v, omega, frac * dt);
    return Pose2D(part.position(), part.theta() + omega * (1.0 - frac) * dt);
  };

  robot_.true_pose = advance(before, cmd.v, cmd.omega);

  // Odometry sees the realized wheel motion, with noise and a heading bias.
  double v_meas = cmd.v;
  double omega_meas = cmd.omega;
  if (noise_.odom_noise_sigma > 0.0) {
    v_meas *= 1.0 + odom_rng_.normal(0.0, noise_.odom_noise_sigma);
    omega_meas *= 1.0 + odom_rng_.normal(0.0, noise_.odom_noise_sigma);
  }
  v_meas *= odom_scale_;
  if (odom_bias_ != 0.0) omega_meas += odom_bias_ * std::abs(v_meas) * frac;  // bias follows distance actually rolled
  robot_.believed_pose = advance(robot_.believed_pose, v_meas, omega_meas);

  robot_.mechanism_on = cmd.mechanism_on;
  if (cmd.mechanism_on) {
    const double off = cfg_.robot.brush_offset;
    const GroundPoint a = before.position() + before.heading() * off;
    const GroundPoint b = robot_.true_pose.position() + robot_.true_pose.heading() * off;
    for (TrashItem& t : trash_)
      if (!t.collected && point_segment_distance(t.position, a, b) <= cfg_.robot.brush_halfwidth) t.collected = true;
  }
  time_ += dt;
}

std::vector<ScanRay> World::scan_from(const Pose2D& robot_pose, const CameraModel& cam, int rays) const {
  const Pose2D cam_pose = compose(robot_pose, Pose2D(cam.forward_offset, 0.0, 0.0));
  std::vector<ScanRay> out;
  out.reserve(static_cast<std::size_t>(rays));
  for (int i = 0; i < rays; ++i) {
    const double b = rays == 1 ? 0.0 : -0.5 * cam.hfov + cam.hfov * i / (rays - 1);
    out.push_back({b, raycast(cam_pose.position(), cam_pose.theta() + b, cam.max_range), cam.max_range});
  }
  return out;
}

DetectionFrame World::detect(const CameraModel& cam) {
  DetectionFrame frame{time_, {}};
  const Pose2D& pose = robot_.true_pose;
  const Pose2D cam_pose = compose(pose, Pose2D(cam.forward_offset, 0.0, 0.0));
  const double focal_u = cam.image_width / (2.0 * std::tan(0.5 * cam.hfov));
  const double focal_v = cam.image_height / (2.0 * std::tan(0.5 * cam.vfov));

  auto make_box = [&](double u, double depth, double fwd, double confidence) {
    const double v = cam.image_height * 0.5 + focal_v * cam.mount_height / fwd;
    const double hw = std::max(std::min({focal_u * kTrashHalfSize / fwd, u, cam.image_width - u}), 1e-6);
    const double hh = std::max(std::min({focal_v * kTrashHalfSize / fwd, v, cam.image_height - v}), 1e-6);
    return BoundingBox{u - hw, v - hh, u + hw, v + hh, confidence, depth};
  };

  for (const TrashItem& item : trash_) {
    if (item.collected) continue;
    const PixelObservation obs = render_point(pose, item.position, cam);
    if (!obs.in_frustum) continue;
    const GroundPoint rel = item.position - cam_pose.position();
    const double range = rel.norm();
    if (range > cam.max_range) continue;
    if (raycast(cam_pose.position(), std::atan2(rel.y, rel.x), range) < range - 1e-9) continue;  // occluded
    if (!rng_.bernoulli(noise_.p_detect(range))) continue;

    double u = obs.u;
    double ground = range;
    if (noise_.pixel_sigma > 0.0) u += rng_.normal(0.0, noise_.pixel_sigma);
    if (noise_.detect_pos_sigma > 0.0) ground += rng_.normal(0.0, noise_.detect_pos_sigma * range);
    if (!(u > 0.0 && u < cam.image_width) || ground <= 0.05) continue;

    double conf = noise_.confidence_base - noise_.confidence_slope * range;
    if (noise_.confidence_sigma > 0.0) conf += rng_.normal(0.0, noise_.confidence_sigma);
    const double depth = std::sqrt(ground * ground + cam.mount_height * cam.mount_height);
    const double fwd = to_local(cam_pose, item.position).x;
    frame.boxes.push_back(make_box(u, depth, fwd, std::clamp(conf, 0.0, 1.0)));
  }

  const int spurious = clutter_rng_.poisson(noise_.false_positive_rate * cfg_.dt);
  for (int i = 0; i < spurious; ++i) {
    const double u = clutter_rng_.uniform(0.02, 0.98) * cam.image_width;
    const double ground = clutter_rng_.uniform(0.5, cam.max_range);
    const double conf = clutter_rng_.uniform();
    const double depth = std::sqrt(ground * ground + cam.mount_height * cam.mount_height);
    frame.boxes.push_back(make_box(u, depth, ground, conf));
  }
  return frame;
}

void SurveyConfig::validate() const {
  require(lane_spacing > 0.0, "survey.lane_spacing");
  require(altitude > 0.0, "survey.altitude");
  require(footprint > 0.0, "survey.footprint");
  require(speed > 0.0, "survey.speed");
  require(frame_interval > 0.0, "survey.frame_interval");
}

std::vector<GroundPoint> survey_frame_positions(const Rect& arena, const SurveyConfig& survey) {
  survey.validate();
  std::vector<GroundPoint> frames;
  const double step = survey.speed * survey.frame_interval;
  const int per_lane = static_cast<int>(std::floor(arena.width() / step + 1e-9)) + 1;
  int lane = 0;
  for (double y = arena.y0 + 0.5 * survey.lane_spacing; y <= arena.y1 + 1e-9; y += survey.lane_spacing, ++lane) {
    for (int k = 0; k < per_lane; ++k) {
      const int j = lane % 2 == 0 ? k : per_lane - 1 - k;
      frames.push_back({arena.x0 + j * step, y});
    }
  }
  return frames;
}

std::vector<RawDetection> aerial_survey(World& world, const SurveyConfig& survey) {
  const NoiseModel& noise = world.noise();
  const Rect& arena = world.config().arena;
  const std::vector<GroundPoint> frames = survey_frame_positions(arena, survey);
  const double half = 0.5 * survey.footprint;
  Rng& rng = world.rng();
  MessageChannel<RawDetection> link(noise.comm_latency, noise.comm_drop);

  double t = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (f > 0) t += distance(frames[f - 1], frames[f]) / survey.speed;
    const GroundPoint& c = frames[f];
    for (const TrashItem& item : world.trash()) {
      if (item.collected) continue;
      if (std::abs(item.position.x - c.x) > half || std::abs(item.position.y - c.y) > half) continue;
      if (!rng.bernoulli(noise.p_detect(survey.altitude))) continue;
      GroundPoint p = item.position;
      if (noise.detect_pos_sigma > 0.0) {
        p.x += rng.normal(0.0, noise.detect_pos_sigma);
        p.y += rng.normal(0.0, noise.detect_pos_sigma);
      }
      double conf = noise.confidence_base - noise.confidence_slope * survey.altitude;
      if (noise.confidence_sigma > 0.0) conf += rng.normal(0.0, noise.confidence_sigma);
      link.send(t, {t, p, std::clamp(conf, 0.0, 1.0)}, rng);
    }
    const int spurious = rng.poisson(noise.survey_false_positives);
    for (int i = 0; i < spurious; ++i) {
      const GroundPoint p{std::clamp(c.x + rng.uniform(-half, half), arena.x0, arena.x1),
                          std::clamp(c.y + rng.uniform(-half, half), arena.y0, arena.y1)};
      link.send(t, {t, p, rng.uniform()}, rng);
    }
  }
  return link.receive(kInf);
}

void write_ground_truth(std::ostream& os, const World& world) {
  const Rect& a = world.config().arena;
  fmt::print(os, "arena {} {} {} {}\n", a.x0, a.y0, a.x1, a.y1);
  for (const Rect& o : world.config().obstacles) fmt::print(os, "obstacle {} {} {} {}\n", o.x0, o.y0, o.x1, o.y1);
  for (const TrashItem& t : world.trash())
    fmt::print(os, "trash {:.6f} {:.6f} {} {}\n", t.position.x, t.position.y, t.mass, t.collected ? 1 : 0);
}

}  // namespace litterbot
