#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "litterbot/posebuffer.hpp"

using namespace litterbot;
using std::numbers::pi;

TEST_SUITE("posebuffer") {
  TEST_CASE("interpolates position linearly") {
    PoseBuffer buf;
    buf.insert({0.0, {0, 0, 0}});
    buf.insert({1.0, {2, 0, 0}});
    const Pose2D p = buf.pose_at(0.5);
    CHECK(p.x() == doctest::Approx(1.0));
    CHECK(p.y() == doctest::Approx(0.0));
    CHECK(buf.pose_at(0.0) == Pose2D(0, 0, 0));
    CHECK(buf.pose_at(1.0) == Pose2D(2, 0, 0));
  }

  TEST_CASE("heading interpolates along the shorter arc") {
    PoseBuffer buf;
    buf.insert({0.0, {0, 0, 3.0}});
    buf.insert({1.0, {0, 0, -3.0}});
    const double mid = buf.pose_at(0.5).theta();
    CHECK(std::abs(std::abs(mid) - pi) < 1e-9);
  }

  TEST_CASE("queries outside the stored span throw") {
    PoseBuffer buf;
    CHECK_THROWS_AS(buf.pose_at(0.0), OutOfRange);
    buf.insert({1.0, {}});
    buf.insert({2.0, {}});
    CHECK_THROWS_AS(buf.pose_at(0.5), OutOfRange);
    CHECK_THROWS_AS(buf.pose_at(2.5), OutOfRange);
    CHECK_THROWS_AS(buf.pose_at(std::nan("")), OutOfRange);
    try {
      buf.pose_at(3.0);
    } catch (const OutOfRange& e) {
      CHECK(e.t == 3.0);
    }
  }

  TEST_CASE("stamps must increase") {
    PoseBuffer buf;
    buf.insert({1.0, {}});
    CHECK_THROWS_AS(buf.insert({1.0, {}}), NonMonotonicTime);
    CHECK_THROWS_AS(buf.insert({0.5, {}}), NonMonotonicTime);
    CHECK_THROWS_AS(buf.insert({-1.0, {}}), std::invalid_argument);
    CHECK_THROWS_AS(PoseBuffer(0.0), std::invalid_argument);
    CHECK(buf.size() == 1);
  }

  TEST_CASE("old entries are evicted past the horizon") {
    PoseBuffer buf(5.0);
    for (int i = 0; i <= 20; ++i) buf.insert({static_cast<double>(i), {static_cast<double>(i), 0, 0}});
    CHECK(buf.oldest().t == 15.0);
    CHECK(buf.newest().t == 20.0);
    CHECK(buf.size() == 6);
    CHECK_THROWS_AS(buf.pose_at(14.0), OutOfRange);
    CHECK(buf.pose_at(15.5).x() == doctest::Approx(15.5));
  }

  TEST_CASE("stored stamps are strictly increasing and bounded by the horizon") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> dt(0.01, 0.5);
    PoseBuffer buf(3.0);
    double t = 0.0;
    for (int i = 0; i < 2000; ++i) {
      t += dt(gen);
      buf.insert({t, {t, -t, t}});
      const auto& e = buf.entries();
      for (std::size_t k = 1; k < e.size(); ++k) REQUIRE(e[k].t > e[k - 1].t);
      REQUIRE(e.back().t - e.front().t <= 3.0 + 1e-12);
    }
  }

  TEST_CASE("interpolation stays between the bracketing poses") {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> s(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      PoseBuffer buf;
      const Pose2D a(u(gen), u(gen), u(gen));
      const Pose2D b(u(gen), u(gen), u(gen));
      buf.insert({1.0, a});
      buf.insert({2.0, b});
      const double f = s(gen);
      const Pose2D p = buf.pose_at(1.0 + f);
      CHECK(p.x() == doctest::Approx(a.x() + f * (b.x() - a.x())));
      CHECK(p.y() == doctest::Approx(a.y() + f * (b.y() - a.y())));
      const double arc = angle_diff(b.theta(), a.theta());
      CHECK(std::abs(angle_diff(p.theta(), a.theta() + f * arc)) < 1e-9);
      CHECK(std::abs(angle_diff(p.theta(), a.theta())) <= std::abs(arc) + 1e-9);
    }
  }

  TEST_CASE("trajectory lines") {
    std::vector<StampedPose> tr{{0.0, {1, 2, 0}}, {0.5, {1.5, 2, 0.25}}};
    std::ostringstream os;
    write_trajectory(os, tr);
    CHECK(os.str() == "0.0000 1.000000 2.000000 0.000000\n0.5000 1.500000 2.000000 0.250000\n");
  }
}
