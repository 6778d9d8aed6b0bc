#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "litterbot/gridmap.hpp"
#include "oracles.hpp"

using namespace litterbot;
using std::numbers::pi;

TEST_SUITE("gridmap") {
  TEST_CASE("world and cell coordinates") {
    OccupancyGrid g(10, 8, 0.1, Pose2D(1.0, 2.0, 0.0), Cell::Free);
    CHECK(g.world_to_cell({1.05, 2.05}) == CellIndex{0, 0});
    CHECK(g.world_to_cell({1.95, 2.75}) == CellIndex{9, 7});
    CHECK_FALSE(g.world_to_cell({0.99, 2.05}).has_value());
    CHECK_FALSE(g.world_to_cell({2.0, 2.05}).has_value());
    const GroundPoint c = g.cell_center({3, 4});
    CHECK(c.x == doctest::Approx(1.35));
    CHECK(c.y == doctest::Approx(2.45));
    CHECK(g.count(Cell::Free) == 80);
  }

  TEST_CASE("rotated origin") {
    OccupancyGrid g(4, 4, 0.5, Pose2D(0.0, 0.0, pi / 2), Cell::Free);
    const GroundPoint c = g.cell_center({0, 0});
    CHECK(c.x == doctest::Approx(-0.25));
    CHECK(c.y == doctest::Approx(0.25));
    CHECK(g.world_to_cell({-0.25, 0.25}) == CellIndex{0, 0});
  }

  TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(OccupancyGrid(0, 5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(OccupancyGrid(5, 5, 0.0), std::invalid_argument);
    CHECK(OccupancyGrid(2, 2, 0.1).count(Cell::Unknown) == 4);
  }

  TEST_CASE("trace_cells examples") {
    const auto a = trace_cells({0.5, 0.5}, {3.5, 0.5});
    CHECK(a == std::vector<CellIndex>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    const auto b = trace_cells({0.5, 0.5}, {0.7, 0.2});
    CHECK(b == std::vector<CellIndex>{{0, 0}});
    const auto c = trace_cells({2.5, 2.5}, {0.5, 2.5});
    CHECK(c == std::vector<CellIndex>{{2, 2}, {1, 2}, {0, 2}});
  }

  TEST_CASE("traced cells are connected and cover the segment") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    for (int i = 0; i < 300; ++i) {
      const GroundPoint a{u(gen), u(gen)};
      const GroundPoint b{u(gen), u(gen)};
      const auto cells = trace_cells(a, b);
      CHECK(cells.front() == CellIndex{static_cast<int>(std::floor(a.x)), static_cast<int>(std::floor(a.y))});
      CHECK(cells.back() == CellIndex{static_cast<int>(std::floor(b.x)), static_cast<int>(std::floor(b.y))});
      for (std::size_t k = 1; k < cells.size(); ++k) {
        CHECK(std::abs(cells[k].col - cells[k - 1].col) <= 1);
        CHECK(std::abs(cells[k].row - cells[k - 1].row) <= 1);
      }
      const std::set<CellIndex> s(cells.begin(), cells.end());
      CHECK(s.size() == cells.size());
      for (int k = 0; k <= 1000; ++k) {
        const double t = k / 1000.0;
        const GroundPoint p = a + (b - a) * t;
        const CellIndex c{static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))};
        // Skip samples that sit on a cell boundary.
        if (std::abs(p.x - std::round(p.x)) < 1e-6 || std::abs(p.y - std::round(p.y)) < 1e-6) continue;
        CHECK(s.count(c) == 1);
      }
    }
  }

  TEST_CASE("range 1.0 at 0.05 m: 19 Free cells past the sensor cell, then one Occupied") {
    OccupancyGrid g(40, 10, 0.05, {}, Cell::Unknown);
    const Pose2D sensor(0.025, 0.275, 0.0);
    const ScanRay ray{0.0, 1.0, 4.0};
    integrate_scan(g, sensor, std::span<const ScanRay>(&ray, 1));
    CHECK(g.at({0, 5}) == Cell::Free);
    for (int c = 1; c <= 19; ++c) CHECK(g.at({c, 5}) == Cell::Free);
    CHECK(g.at({20, 5}) == Cell::Occupied);
    CHECK(g.at({21, 5}) == Cell::Unknown);
    CHECK(g.count(Cell::Free) == 20);
    CHECK(g.count(Cell::Occupied) == 1);
  }

  TEST_CASE("a max-range ray writes no Occupied cell and never demotes one") {
    OccupancyGrid g(40, 10, 0.05, {}, Cell::Unknown);
    g.at({10, 5}) = Cell::Occupied;
    const Pose2D sensor(0.025, 0.275, 0.0);
    const ScanRay ray{0.0, 1.5, 1.5};
    integrate_scan(g, sensor, std::span<const ScanRay>(&ray, 1));
    CHECK(g.count(Cell::Occupied) == 1);
    CHECK(g.at({10, 5}) == Cell::Occupied);
    CHECK(g.at({30, 5}) == Cell::Free);
  }

  TEST_CASE("scan from outside the grid is rejected") {
    OccupancyGrid g(10, 10, 0.05);
    const ScanRay ray{0.0, 0.2, 1.0};
    CHECK_THROWS_AS(integrate_scan(g, Pose2D(-1, -1, 0), std::span<const ScanRay>(&ray, 1)), std::invalid_argument);
  }

  TEST_CASE("structuring element validation") {
    CHECK_THROWS_AS(StructuringElement{2}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(StructuringElement{0}.validate(), std::invalid_argument);
    CHECK_NOTHROW(StructuringElement{1}.validate());
    OccupancyGrid g(5, 5, 0.1, {}, Cell::Free);
    CHECK_THROWS_AS(morph_close_open(g, {4}), std::invalid_argument);
  }

  TEST_CASE("isolated speck is removed, one-cell gap is closed") {
    OccupancyGrid g(12, 12, 0.05, {}, Cell::Free);
    g.at({2, 2}) = Cell::Occupied;
    for (int r = 5; r < 10; ++r)
      for (int c = 3; c < 10; ++c)
        if (c != 6) g.at({c, r}) = Cell::Occupied;
    const OccupancyGrid m = morph_close_open(g);
    CHECK(m.at({2, 2}) == Cell::Free);
    for (int r = 5; r < 10; ++r) CHECK(m.at({6, r}) == Cell::Occupied);
  }

  TEST_CASE("side 1 keeps Free and Occupied and promotes Unknown") {
    std::mt19937_64 gen(42);
    const OccupancyGrid g = oracle::random_tri_grid(gen, 20, 20);
    const OccupancyGrid m = morph_close_open(g, {1});
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c)
        CHECK(m.at({c, r}) == (g.at({c, r}) == Cell::Free ? Cell::Free : Cell::Occupied));
  }

  TEST_CASE("close-open matches set morphology") {
    std::mt19937_64 gen(43);
    for (int i = 0; i < 30; ++i) {
      const OccupancyGrid g = oracle::random_tri_grid(gen, 25, 20);
      for (int side : {3, 5}) CHECK(morph_close_open(g, {side}) == oracle::set_close_open(g, side));
    }
  }

  TEST_CASE("opening and closing are idempotent") {
    std::mt19937_64 gen(44);
    std::bernoulli_distribution bit(0.4);
    const int w = 30;
    const int h = 25;
    for (int i = 0; i < 30; ++i) {
      Mask m(static_cast<std::size_t>(w) * h);
      for (auto& v : m) v = bit(gen);
      auto open = [&](const Mask& x) { return dilate(erode(x, w, h, 3), w, h, 3); };
      auto close = [&](const Mask& x) { return erode(dilate(x, w, h, 3), w, h, 3); };
      CHECK(open(open(m)) == open(m));
      CHECK(close(close(m)) == close(m));
    }
  }

  TEST_CASE("inflate matches brute force") {
    std::mt19937_64 gen(45);
    for (int i = 0; i < 20; ++i) {
      const OccupancyGrid g = oracle::random_tri_grid(gen, 30, 30);
      for (double r : {0.0, 0.05, 0.07, 0.1, 0.13, 0.2}) CHECK(inflate(g, r) == oracle::brute_inflate(g, r));
    }
    CHECK_THROWS_AS(inflate(OccupancyGrid(3, 3, 0.1), -0.1), std::invalid_argument);
  }

  TEST_CASE("inflate leaves Unknown untouched") {
    OccupancyGrid g(5, 5, 0.1, {}, Cell::Unknown);
    g.at({2, 2}) = Cell::Occupied;
    const OccupancyGrid out = inflate(g, 0.15);
    CHECK(out.count(Cell::Occupied) == 1);
  }

  TEST_CASE("map encoding round trip") {
    std::mt19937_64 gen(46);
    OccupancyGrid g = oracle::random_tri_grid(gen, 17, 9);
    g = OccupancyGrid(17, 9, 0.05, Pose2D(-1.25, 3.5, 0.3), Cell::Free);
    g.at({0, 0}) = Cell::Occupied;
    g.at({16, 8}) = Cell::Unknown;
    const std::string bytes = encode_map(g);
    CHECK(bytes.rfind("GRIDMAP v1 17 9 0.05 -1.25 3.5 0.3\n", 0) == 0);
    const std::size_t header = bytes.find('\n') + 1;
    CHECK(bytes.size() == header + 17 * 9);
    CHECK(static_cast<std::uint8_t>(bytes[header]) == kOccupiedByte);
    CHECK(static_cast<std::uint8_t>(bytes[header + 1]) == kFreeByte);
    CHECK(static_cast<std::uint8_t>(bytes.back()) == kUnknownByte);
    CHECK(decode_map(bytes) == g);
    CHECK(encode_map(decode_map(bytes)) == bytes);
  }

  TEST_CASE("malformed maps report the byte offset") {
    const std::string good = encode_map(OccupancyGrid(2, 2, 0.1, {}, Cell::Free));
    const std::size_t header = good.find('\n') + 1;

    auto offset_of = [](const std::string& s) -> std::size_t {
      try {
        decode_map(s);
      } catch (const MapFormatError& e) {
        return e.offset;
      }
      return static_cast<std::size_t>(-1);
    };
    std::string bad = good;
    bad[header + 2] = 7;
    CHECK(offset_of(bad) == header + 2);
    CHECK(offset_of(good.substr(0, good.size() - 1)) == good.size() - 1);
    CHECK(offset_of("GRIDMAP v1 2 2 0.1 0 0") == 22);
    CHECK(offset_of("NOTAMAP v1 2 2 0.1 0 0 0\n") == 0);
    CHECK(offset_of("GRIDMAP v2 2 2 0.1 0 0 0\n") == 8);
    CHECK(offset_of("GRIDMAP v1 x 2 0.1 0 0 0\n") == 11);
    CHECK(offset_of("GRIDMAP v1 2 2 -0.1 0 0 0\n") == 15);
    CHECK(offset_of(good + "x") == header + 4);
  }

  TEST_CASE("save and load") {
    const auto dir = std::filesystem::temp_directory_path() / "litterbot_gridmap_test";
    std::filesystem::create_directories(dir);
    std::mt19937_64 gen(47);
    const OccupancyGrid g = oracle::random_tri_grid(gen, 31, 7);
    save_map(g, dir / "m.gridmap");
    CHECK(load_map(dir / "m.gridmap") == g);
    CHECK_THROWS_AS(load_map(dir / "missing.gridmap"), MapIoError);
    CHECK_THROWS_AS(save_map(g, dir / "no_such_dir" / "m.gridmap"), MapIoError);
    std::filesystem::remove_all(dir);
  }
}
