#include "litterbot/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace litterbot {

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : fmt::format("{}: {}", key, message)),
      key_(std::move(key)),
      detail_(message) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = s.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    std::size_t end = s.find_first_of(" \t", start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    pos = end;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(std::string(key), fmt::format("expected a number, got '{}'", v));
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(std::string(key), fmt::format("expected an integer, got '{}'", v));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(std::string(key), fmt::format("expected true or false, got '{}'", v));
}

std::vector<double> to_doubles(std::string_view key, std::string_view v, std::size_t n) {
  const auto parts = words(v);
  if (parts.size() != n) throw ConfigError(std::string(key), fmt::format("expected {} numbers, got '{}'", n, v));
  std::vector<double> out;
  for (auto p : parts) out.push_back(to_double(key, p));
  return out;
}

using Setter = std::function<void(MissionConfig&, std::string_view key, std::string_view value)>;

template <typename Field>
Setter number(Field MissionConfig::*section, double Field::*member) {
  return [=](MissionConfig& c, std::string_view k, std::string_view v) { (c.*section).*member = to_double(k, v); };
}

template <typename Field>
Setter integer(Field MissionConfig::*section, int Field::*member) {
  return [=](MissionConfig& c, std::string_view k, std::string_view v) { (c.*section).*member = to_int<int>(k, v); };
}

template <typename Field>
Setter boolean(Field MissionConfig::*section, bool Field::*member) {
  return [=](MissionConfig& c, std::string_view k, std::string_view v) { (c.*section).*member = to_bool(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    using M = MissionConfig;

    t["mission.mode"] = [](M& c, std::string_view k, std::string_view v) {
      if (v == "full") {
        c.mode = MissionMode::Full;
      } else if (v == "pickup_trial") {
        c.mode = MissionMode::PickupTrial;
      } else {
        throw ConfigError(std::string(k), fmt::format("expected full or pickup_trial, got '{}'", v));
      }
    };
    t["mission.standoff"] = [](M& c, std::string_view k, std::string_view v) { c.standoff = to_double(k, v); };
    t["mission.match_radius"] = [](M& c, std::string_view k, std::string_view v) { c.match_radius = to_double(k, v); };

    t["world.arena"] = [](M& c, std::string_view k, std::string_view v) {
      auto d = to_doubles(k, v, 4);
      c.world.arena = {d[0], d[1], d[2], d[3]};
    };
    t["world.obstacles"] = [](M& c, std::string_view k, std::string_view v) {
      c.world.obstacles.clear();
      if (trim(v).empty() || v == "none") return;
      for (auto item : split(v, ';')) {
        auto d = to_doubles(k, item, 4);
        c.world.obstacles.push_back({d[0], d[1], d[2], d[3]});
      }
    };
    t["world.trash"] = [](M& c, std::string_view k, std::string_view v) {
      c.world.trash.clear();
      if (trim(v).empty() || v == "none") return;
      for (auto item : split(v, ';')) {
        const auto parts = words(item);
        if (parts.size() != 2 && parts.size() != 3)
          throw ConfigError(std::string(k), fmt::format("expected 'x y [mass]', got '{}'", item));
        TrashSpec s{{to_double(k, parts[0]), to_double(k, parts[1])}, 0.5};
        if (parts.size() == 3) s.mass = to_double(k, parts[2]);
        c.world.trash.push_back(s);
      }
    };
    t["world.seed"] = [](M& c, std::string_view k, std::string_view v) { c.world.seed = to_int<std::uint64_t>(k, v); };
    t["world.dt"] = [](M& c, std::string_view k, std::string_view v) { c.world.dt = to_double(k, v); };
    t["world.start"] = [](M& c, std::string_view k, std::string_view v) {
      auto d = to_doubles(k, v, 3);
      c.world.start = Pose2D(d[0], d[1], d[2]);
    };
    t["robot.radius"] = [](M& c, std::string_view k, std::string_view v) { c.world.robot.radius = to_double(k, v); };
    t["robot.brush_offset"] = [](M& c, std::string_view k, std::string_view v) {
      c.world.robot.brush_offset = to_double(k, v);
    };

    t["scenario.random"] = boolean(&M::scenario, &ScenarioConfig::random);
    t["scenario.min_obstacles"] = integer(&M::scenario, &ScenarioConfig::min_obstacles);
    t["scenario.max_obstacles"] = integer(&M::scenario, &ScenarioConfig::max_obstacles);
    t["scenario.min_obstacle_size"] = number(&M::scenario, &ScenarioConfig::min_obstacle_size);
    t["scenario.max_obstacle_size"] = number(&M::scenario, &ScenarioConfig::max_obstacle_size);
    t["scenario.trash_count"] = integer(&M::scenario, &ScenarioConfig::trash_count);
    t["scenario.trash_clearance"] = number(&M::scenario, &ScenarioConfig::trash_clearance);
    t["scenario.trash_separation"] = number(&M::scenario, &ScenarioConfig::trash_separation);
    t["scenario.start_clearance"] = number(&M::scenario, &ScenarioConfig::start_clearance);

    t["noise.preset"] = [](M& c, std::string_view k, std::string_view v) {
      if (v == "zero") {
        c.noise = NoiseModel::zero();
      } else if (v == "default") {
        c.noise = NoiseModel{};
      } else {
        throw ConfigError(std::string(k), fmt::format("expected zero or default, got '{}'", v));
      }
    };
    t["noise.odom_heading_bias"] = number(&M::noise, &NoiseModel::odom_heading_bias);
    t["noise.odom_noise_sigma"] = number(&M::noise, &NoiseModel::odom_noise_sigma);
    t["noise.odom_bias_sigma"] = number(&M::noise, &NoiseModel::odom_bias_sigma);
    t["noise.odom_scale_sigma"] = number(&M::noise, &NoiseModel::odom_scale_sigma);
    t["noise.detect_pos_sigma"] = number(&M::noise, &NoiseModel::detect_pos_sigma);
    t["noise.pixel_sigma"] = number(&M::noise, &NoiseModel::pixel_sigma);
    t["noise.p_detect_max"] = number(&M::noise, &NoiseModel::p_detect_max);
    t["noise.p_detect_min"] = number(&M::noise, &NoiseModel::p_detect_min);
    t["noise.p_detect_slope"] = number(&M::noise, &NoiseModel::p_detect_slope);
    t["noise.false_positive_rate"] = number(&M::noise, &NoiseModel::false_positive_rate);
    t["noise.survey_false_positives"] = number(&M::noise, &NoiseModel::survey_false_positives);
    t["noise.confidence_base"] = number(&M::noise, &NoiseModel::confidence_base);
    t["noise.confidence_slope"] = number(&M::noise, &NoiseModel::confidence_slope);
    t["noise.confidence_sigma"] = number(&M::noise, &NoiseModel::confidence_sigma);
    t["noise.detector_latency"] = number(&M::noise, &NoiseModel::detector_latency);
    t["noise.comm_latency"] = number(&M::noise, &NoiseModel::comm_latency);
    t["noise.comm_drop"] = number(&M::noise, &NoiseModel::comm_drop);

    t["camera.image_width"] = number(&M::camera, &CameraModel::image_width);
    t["camera.image_height"] = number(&M::camera, &CameraModel::image_height);
    t["camera.hfov"] = number(&M::camera, &CameraModel::hfov);
    t["camera.vfov"] = number(&M::camera, &CameraModel::vfov);
    t["camera.mount_height"] = number(&M::camera, &CameraModel::mount_height);
    t["camera.forward_offset"] = number(&M::camera, &CameraModel::forward_offset);
    t["camera.max_range"] = number(&M::camera, &CameraModel::max_range);

    t["filter.cluster_radius"] = number(&M::filter, &FilterConfig::cluster_radius);
    t["filter.accept_threshold"] = integer(&M::filter, &FilterConfig::accept_threshold);

    t["pickup.timeout"] = number(&M::pickup, &PickupConfig::timeout);
    t["pickup.confidence_threshold"] = number(&M::pickup, &PickupConfig::confidence_threshold);
    t["pickup.overshoot"] = number(&M::pickup, &PickupConfig::overshoot);
    t["pickup.spin_rate"] = number(&M::pickup, &PickupConfig::spin_rate);
    t["pickup.drive_speed"] = number(&M::pickup, &PickupConfig::drive_speed);
    t["pickup.brush_halfwidth"] = number(&M::pickup, &PickupConfig::brush_halfwidth);
    t["pickup.activation_radius"] = number(&M::pickup, &PickupConfig::activation_radius);
    t["pickup.activation_tolerance"] = number(&M::pickup, &PickupConfig::activation_tolerance);
    t["pickup.align_tolerance"] = number(&M::pickup, &PickupConfig::align_tolerance);
    t["pickup.gate_angle"] = number(&M::pickup, &PickupConfig::gate_angle);
    t["pickup.max_sighting_range"] = number(&M::pickup, &PickupConfig::max_sighting_range);
    t["pickup.reidentify"] = boolean(&M::pickup, &PickupConfig::reidentify);

    t["survey.lane_spacing"] = number(&M::survey, &SurveyConfig::lane_spacing);
    t["survey.altitude"] = number(&M::survey, &SurveyConfig::altitude);
    t["survey.footprint"] = number(&M::survey, &SurveyConfig::footprint);
    t["survey.speed"] = number(&M::survey, &SurveyConfig::speed);
    t["survey.frame_interval"] = number(&M::survey, &SurveyConfig::frame_interval);

    t["mapping.resolution"] = number(&M::mapping, &MappingConfig::resolution);
    t["mapping.margin"] = number(&M::mapping, &MappingConfig::margin);
    t["mapping.sweep_spacing"] = number(&M::mapping, &MappingConfig::sweep_spacing);
    t["mapping.pose_spacing"] = number(&M::mapping, &MappingConfig::pose_spacing);
    t["mapping.headings"] = integer(&M::mapping, &MappingConfig::headings);
    t["mapping.rays"] = integer(&M::mapping, &MappingConfig::rays);
    t["mapping.morph_side"] = integer(&M::mapping, &MappingConfig::morph_side);

    t["nav.inflation"] = number(&M::nav, &NavConfig::inflation);
    t["nav.speed"] = number(&M::nav, &NavConfig::speed);
    t["nav.turn_rate"] = number(&M::nav, &NavConfig::turn_rate);
    t["nav.stuck_time"] = number(&M::nav, &NavConfig::stuck_time);
    t["nav.stuck_distance"] = number(&M::nav, &NavConfig::stuck_distance);
    t["nav.backoff"] = number(&M::nav, &NavConfig::backoff);

    t["trial.distance"] = number(&M::trial, &TrialConfig::distance);
    return t;
  }();
  return table;
}

}  // namespace

void set_config_value(MissionConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError(std::string(key), "unknown key");
  it->second(cfg, key, trim(value));
}

MissionConfig parse_config(std::string_view text, MissionConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", fmt::format("line {}: expected 'section.key = value'", line_no));
    const std::string_view key = trim(line.substr(0, eq));
    try {
      set_config_value(base, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), fmt::format("line {}: {}", line_no, e.detail()));
    }
  }
  base.validate();
  return base;
}

MissionConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::ios_base::failure(fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace litterbot
