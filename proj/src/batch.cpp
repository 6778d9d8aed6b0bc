#include "litterbot/batch.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "litterbot/config.hpp"

namespace litterbot {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("seeds", fmt::format("expected a seed, got '{}'", s));
  return v;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.6f}", v);
}

}  // namespace

SweepAxis parse_sweep(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) throw ConfigError("sweep", fmt::format("expected key=v1,v2,..., got '{}'", spec));
  SweepAxis axis{std::string(trim(spec.substr(0, eq))), {}};
  std::string_view rest = spec.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    const auto v = trim(rest.substr(0, comma));
    if (v.empty()) throw ConfigError(axis.key, "empty sweep value");
    axis.values.emplace_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  // Reject unknown keys and bad values up front.
  MissionConfig probe;
  for (const auto& v : axis.values) set_config_value(probe, axis.key, v);
  return axis;
}

std::vector<std::uint64_t> parse_seed_range(std::string_view spec) {
  const auto dots = spec.find("..");
  if (dots == std::string_view::npos) return {parse_u64(spec)};
  const std::uint64_t a = parse_u64(spec.substr(0, dots));
  const std::uint64_t b = parse_u64(spec.substr(dots + 2));
  if (b < a) throw ConfigError("seeds", fmt::format("empty range '{}'", spec));
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = a;; ++s) {
    out.push_back(s);
    if (s == b) break;
  }
  return out;
}

BatchResult run_batch(const MissionConfig& cfg, const std::vector<std::uint64_t>& seeds,
                      const std::vector<SweepAxis>& sweep, unsigned jobs) {
  if (seeds.empty()) throw ConfigError("seeds", "no seeds given");
  BatchResult result;
  for (const auto& axis : sweep) result.keys.push_back(axis.key);

  // Cartesian product, last axis fastest.
  std::vector<MissionConfig> configs;
  std::vector<std::size_t> idx(sweep.size(), 0);
  while (true) {
    MissionConfig c = cfg;
    BatchPoint p;
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      if (sweep[k].values.empty()) throw ConfigError(sweep[k].key, "no sweep values");
      set_config_value(c, sweep[k].key, sweep[k].values[idx[k]]);
      p.values.push_back(sweep[k].values[idx[k]]);
    }
    c.validate();
    configs.push_back(std::move(c));
    result.points.push_back(std::move(p));
    // Odometer increment; done when every axis has wrapped.
    std::size_t k = sweep.size();
    while (k > 0 && ++idx[k - 1] == sweep[k - 1].values.size()) {
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }

  const std::size_t total = configs.size() * seeds.size();
  result.runs.resize(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t point = i / seeds.size();
      const std::uint64_t seed = seeds[i % seeds.size()];
      try {
        MissionConfig c = configs[point];
        if (!c.output_dir.empty()) c.output_dir /= fmt::format("p{}_s{}", point, seed);
        const MissionReport r = run_mission(c, seed);
        BatchRun& run = result.runs[i];
        run.seed = seed;
        run.point = point;
        run.values = result.points[point].values;
        run.success = r.success;
        run.n_collected = r.n_collected;
        run.n_trash = r.per_trash.size();
        run.mean_map_error = r.mean_map_error();
        run.wall_time = r.wall_time;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = total;
        return;
      }
    }
  };

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t p = 0; p < result.points.size(); ++p) {
    BatchPoint& bp = result.points[p];
    std::size_t ok = 0;
    std::size_t n_err = 0;
    double err = 0.0;
    double wall = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const BatchRun& r = result.runs[p * seeds.size() + s];
      ok += r.success ? 1 : 0;
      wall += r.wall_time;
      if (std::isfinite(r.mean_map_error)) {
        err += r.mean_map_error;
        ++n_err;
      }
    }
    bp.runs = seeds.size();
    bp.success_rate = static_cast<double>(ok) / static_cast<double>(bp.runs);
    bp.mean_map_error = n_err ? err / static_cast<double>(n_err) : std::nan("");
    bp.mean_wall_time = wall / static_cast<double>(bp.runs);
  }
  return result;
}

void write_runs_csv(std::ostream& os, const BatchResult& result) {
  fmt::print(os, "seed");
  for (const auto& k : result.keys) fmt::print(os, ",{}", k);
  fmt::print(os, ",success,n_collected,n_trash,mean_map_error_m,wall_time_s\n");
  for (const auto& r : result.runs) {
    fmt::print(os, "{}", r.seed);
    for (const auto& v : r.values) fmt::print(os, ",{}", v);
    fmt::print(os, ",{},{},{},{},{}\n", r.success ? 1 : 0, r.n_collected, r.n_trash, fmt_double(r.mean_map_error),
               fmt_double(r.wall_time));
  }
}

void write_aggregate_csv(std::ostream& os, const BatchResult& result) {
  bool first = true;
  for (const auto& k : result.keys) {
    fmt::print(os, "{}{}", first ? "" : ",", k);
    first = false;
  }
  fmt::print(os, "{}runs,success_rate,mean_map_error_m,mean_wall_time_s\n", first ? "" : ",");
  for (const auto& p : result.points) {
    for (const auto& v : p.values) fmt::print(os, "{},", v);
    fmt::print(os, "{},{},{},{}\n", p.runs, fmt_double(p.success_rate), fmt_double(p.mean_map_error),
               fmt_double(p.mean_wall_time));
  }
}

}  // namespace litterbot
