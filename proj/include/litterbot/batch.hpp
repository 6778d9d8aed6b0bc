#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "litterbot/mission.hpp"

namespace litterbot {

/// One swept parameter: a config key and the values it takes.
struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses `key=v1,v2,...`. Throws ConfigError on a malformed spec or unknown key.
SweepAxis parse_sweep(std::string_view spec);

/// Parses `a..b` (inclusive) or a single seed.
std::vector<std::uint64_t> parse_seed_range(std::string_view spec);

struct BatchRun {
  std::uint64_t seed = 0;
  std::size_t point = 0;            // index into BatchResult::points
  std::vector<std::string> values;  // one per sweep axis
  bool success = false;
  std::size_t n_collected = 0;
  std::size_t n_trash = 0;
  double mean_map_error = 0.0;  // NaN when nothing matched
  double wall_time = 0.0;
};

struct BatchPoint {
  std::vector<std::string> values;
  std::size_t runs = 0;
  double success_rate = 0.0;
  double mean_map_error = 0.0;  // over runs with a finite error, NaN if none
  double mean_wall_time = 0.0;
};

struct BatchResult {
  std::vector<std::string> keys;
  std::vector<BatchPoint> points;
  std::vector<BatchRun> runs;  // point-major, then seed order
};

/// Runs every (sweep point x seed). `jobs` worker threads; results do not depend on it.
/// Output directories are not written unless `cfg.output_dir` is set, in which case
/// each run dumps into `<output_dir>/p<point>_s<seed>`.
BatchResult run_batch(const MissionConfig& cfg, const std::vector<std::uint64_t>& seeds,
                      const std::vector<SweepAxis>& sweep, unsigned jobs = 1);

void write_runs_csv(std::ostream& os, const BatchResult& result);
void write_aggregate_csv(std::ostream& os, const BatchResult& result);

}  // namespace litterbot
