#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "litterbot/batch.hpp"
#include "litterbot/config.hpp"
#include "litterbot/mission.hpp"

namespace fs = std::filesystem;
using namespace litterbot;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kIoError = 2;

MissionConfig read_config(const std::string& path) {
  if (path.empty()) return {};
  return load_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw MapIoError(fmt::format("cannot open {} for writing", path.string()));
  os << text;
  if (!os) throw MapIoError(fmt::format("write failed for {}", path.string()));
}

int cmd_run(const std::string& config, std::uint64_t seed, const std::string& out) {
  MissionConfig cfg = read_config(config);
  cfg.output_dir = out;
  const MissionReport report = run_mission(cfg, seed);
  fmt::print("success = {}\ncollected = {}/{}\n", report.success, report.n_collected, report.per_trash.size());
  for (std::size_t i = 0; i < report.per_trash.size(); ++i)
    fmt::print("trash {}: {}\n", i, to_string(report.per_trash[i].outcome));
  return kOk;
}

int cmd_batch(const std::string& config, const std::string& seeds, const std::vector<std::string>& sweeps,
              const std::string& out, unsigned jobs, bool dumps) {
  MissionConfig cfg = read_config(config);
  std::vector<SweepAxis> axes;
  for (const auto& s : sweeps) axes.push_back(parse_sweep(s));
  const auto seed_list = parse_seed_range(seeds);
  fs::create_directories(out);
  if (dumps) cfg.output_dir = fs::path(out) / "runs";
  const BatchResult result = run_batch(cfg, seed_list, axes, jobs);

  std::ostringstream runs;
  write_runs_csv(runs, result);
  write_text(fs::path(out) / "runs.csv", runs.str());
  std::ostringstream agg;
  write_aggregate_csv(agg, result);
  write_text(fs::path(out) / "aggregate.csv", agg.str());
  std::cout << agg.str();
  return kOk;
}

int cmd_map(const std::string& config, std::uint64_t seed, const std::string& out) {
  const MissionConfig cfg = read_config(config);
  const MappingResult m = run_mapping(cfg, seed);
  save_map(m.grid, out);
  fmt::print("confirmed hypotheses = {}\n", m.confirmed.size());
  for (const auto& p : m.confirmed) fmt::print("  {:.3f} {:.3f}\n", p.x, p.y);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"litterbot: survey, map, plan and pick up trash in a simulated arena"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 1;
  std::string out;

  auto* run = app.add_subcommand("run", "run one mission and write its dump files");
  run->add_option("--config", config, "scenario config file");
  run->add_option("--seed", seed, "mission seed");
  run->add_option("--out", out, "output directory")->required();

  std::string seeds = "1..10";
  std::vector<std::string> sweeps;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool dumps = false;
  auto* batch = app.add_subcommand("batch", "run a seed range over a parameter sweep");
  batch->add_option("--config", config, "scenario config file");
  batch->add_option("--seeds", seeds, "seed range a..b (inclusive)");
  batch->add_option("--sweep", sweeps, "key=v1,v2,... (repeatable)");
  batch->add_option("--out", out, "output directory")->required();
  batch->add_option("--jobs", jobs, "worker threads");
  batch->add_flag("--dumps", dumps, "also write per-run dump files");

  auto* map = app.add_subcommand("map", "run the mapping phase only and save the map");
  map->add_option("--config", config, "scenario config file");
  map->add_option("--seed", seed, "scenario seed");
  map->add_option("--out", out, "map file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, seed, out);
    if (*batch) return cmd_batch(config, seeds, sweeps, out, jobs, dumps);
    if (*map) return cmd_map(config, seed, out);
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const MapIoError& e) {
    fmt::print(std::cerr, "i/o error: {}\n", e.what());
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    fmt::print(std::cerr, "i/o error: {}\n", e.what());
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    fmt::print(std::cerr, "i/o error: {}\n", e.what());
    return kIoError;
  }
  return kOk;
}
