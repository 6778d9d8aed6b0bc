#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "litterbot/clusterfilter.hpp"
#include "oracles.hpp"

using namespace litterbot;

namespace {

std::vector<TrashHypothesis> run(const std::vector<GroundPoint>& pts, const FilterConfig& cfg) {
  std::vector<TrashHypothesis> st;
  for (const auto& p : pts) ingest(st, {0.0, p, 1.0}, cfg);
  return st;
}

std::vector<GroundPoint> random_stream(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<GroundPoint> s(n);
  for (auto& p : s) p = {u(gen), u(gen)};
  return s;
}

}  // namespace

TEST_SUITE("clusterfilter") {
  TEST_CASE("three nearby detections make one confirmed hypothesis") {
    FilterConfig cfg;
    const auto st = run({{1.0, 1.0}, {1.1, 1.0}, {1.0, 1.2}}, cfg);
    REQUIRE(st.size() == 1);
    CHECK(st[0].count == 3);
    CHECK(st[0].point.x == doctest::Approx(1.1 / 3.0 + 2.0 / 3.0));
    CHECK(st[0].point.y == doctest::Approx(3.2 / 3.0));
    CHECK(confirmed(st, cfg).size() == 1);
  }

  TEST_CASE("detections outside the window start new hypotheses") {
    FilterConfig cfg;
    const auto st = run({{0.0, 0.0}, {0.6, 0.0}, {0.0, -0.6}}, cfg);
    CHECK(st.size() == 3);
    CHECK(confirmed(st, cfg).empty());
  }

  TEST_CASE("window is an inclusive square") {
    FilterConfig cfg;
    CHECK(match_hypothesis(std::vector<TrashHypothesis>{{{0, 0}, 1}}, {0.5, 0.5}, cfg) == 0u);
    CHECK_FALSE(match_hypothesis(std::vector<TrashHypothesis>{{{0, 0}, 1}}, {0.5, 0.5000001}, cfg).has_value());
  }

  TEST_CASE("nearest hypothesis wins, ties go to the earliest") {
    FilterConfig cfg;
    std::vector<TrashHypothesis> st{{{0.0, 0.0}, 1}, {{0.8, 0.0}, 1}};
    CHECK(match_hypothesis(st, {0.5, 0.0}, cfg) == 1u);
    CHECK(match_hypothesis(st, {0.3, 0.0}, cfg) == 0u);
    CHECK(match_hypothesis(st, {0.4, 0.0}, cfg) == 0u);
  }

  TEST_CASE("threshold boundary") {
    FilterConfig cfg;
    for (int a = 1; a <= 6; ++a) CHECK(is_confirmed({{0, 0}, a}, cfg) == (a >= 3));
    cfg.accept_threshold = 4;
    CHECK_FALSE(is_confirmed({{0, 0}, 4}, cfg));
    CHECK(is_confirmed({{0, 0}, 5}, cfg));
  }

  TEST_CASE("config validation") {
    FilterConfig cfg;
    cfg.cluster_radius = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.accept_threshold = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }

  TEST_CASE("matches the reference filter on random streams") {
    std::mt19937_64 gen(31);
    FilterConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = random_stream(gen, 50);
      const auto st = run(s, cfg);
      const auto ref = oracle::reference_filter(s, cfg.cluster_radius);
      REQUIRE(st.size() == ref.points.size());
      for (std::size_t i = 0; i < st.size(); ++i) {
        CHECK(st[i].count == ref.counts[i]);
        CHECK(std::abs(st[i].point.x - ref.points[i].x) < 1e-9);
        CHECK(std::abs(st[i].point.y - ref.points[i].y) < 1e-9);
      }
    }
  }

  TEST_CASE("counts sum to the stream length and points are member means") {
    std::mt19937_64 gen(32);
    FilterConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = random_stream(gen, 1 + trial % 50);
      const auto st = run(s, cfg);
      const auto ref = oracle::reference_filter(s, cfg.cluster_radius);
      const int total = std::accumulate(st.begin(), st.end(), 0, [](int a, const auto& h) { return a + h.count; });
      CHECK(total == static_cast<int>(s.size()));
      for (std::size_t i = 0; i < st.size(); ++i) {
        GroundPoint m;
        for (auto k : ref.members[i]) m = m + s[k];
        m = m * (1.0 / ref.members[i].size());
        CHECK(std::abs(st[i].point.x - m.x) < 1e-9);
        CHECK(std::abs(st[i].point.y - m.y) < 1e-9);
      }
    }
  }

  TEST_CASE("hypothesis output lines") {
    FilterConfig cfg;
    std::ostringstream os;
    write_hypotheses(os, std::vector<TrashHypothesis>{{{1, 2}, 3}, {{0.5, 0}, 1}}, cfg);
    CHECK(os.str() == "1.000000 2.000000 3 1\n0.500000 0.000000 1 0\n");
  }
}
