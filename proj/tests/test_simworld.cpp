#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "litterbot/simworld.hpp"

using namespace litterbot;
using std::numbers::pi;

namespace {

WorldConfig small_world() {
  WorldConfig w;
  w.arena = {0, 0, 4, 3};
  w.obstacles = {{2.0, 1.0, 2.5, 2.0}};
  w.trash = {{{1.0, 2.5}, 0.5}};
  w.start = Pose2D(0.5, 0.5, 0.0);
  return w;
}

}  // namespace

TEST_SUITE("simworld") {
  TEST_CASE("rng is reproducible and its distributions are sane") {
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng r(6);
    double sum = 0.0;
    double sq = 0.0;
    double psum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = r.normal(1.0, 2.0);
      sum += x;
      sq += x * x;
      psum += r.poisson(3.0);
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      REQUIRE(r.below(7) < 7u);
    }
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::sqrt(sq / n - (sum / n) * (sum / n)) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(psum / n == doctest::Approx(3.0).epsilon(0.02));
    CHECK(r.poisson(0.0) == 0);
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  }

  TEST_CASE("unicycle integration") {
    const Pose2D a = integrate_unicycle({0, 0, 0}, 1.0, 0.0, 2.0);
    CHECK(a.x() == doctest::Approx(2.0));
    // Quarter circle of radius 1.
    const Pose2D b = integrate_unicycle({0, 0, 0}, 1.0, 1.0, pi / 2);
    CHECK(b.x() == doctest::Approx(1.0));
    CHECK(b.y() == doctest::Approx(1.0));
    CHECK(b.theta() == doctest::Approx(pi / 2));
    // Many small straight steps approach the exact arc.
    Pose2D c(0, 0, 0);
    for (int i = 0; i < 100000; ++i) c = integrate_unicycle(c, 0.3, 0.7, 1e-4);
    const Pose2D d = integrate_unicycle({0, 0, 0}, 0.3, 0.7, 10.0);
    CHECK(c.x() == doctest::Approx(d.x()).epsilon(1e-4));
    CHECK(c.y() == doctest::Approx(d.y()).epsilon(1e-4));
  }

  TEST_CASE("geometry helpers") {
    CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3, 0}, {-1, 0}, {1, 0}) == doctest::Approx(2.0));
    CHECK(point_segment_distance({1, 1}, {0, 0}, {0, 0}) == doctest::Approx(std::sqrt(2.0)));
    const Rect r{0, 0, 1, 1};
    CHECK(r.distance_to({0.5, 0.5}) == 0.0);
    CHECK(r.distance_to({2, 2}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.distance_to({0.5, -3}) == doctest::Approx(3.0));
  }

  TEST_CASE("message channel latency and drops") {
    Rng rng(1);
    MessageChannel<int> ch(0.2, 0.0);
    ch.send(0.0, 1, rng);
    ch.send(0.1, 2, rng);
    CHECK(ch.receive(0.19).empty());
    CHECK(ch.receive(0.2) == std::vector<int>{1});
    CHECK(ch.in_flight() == 1);
    CHECK(ch.receive(1.0) == std::vector<int>{2});
    MessageChannel<int> lossy(0.0, 0.3);
    for (int i = 0; i < 10000; ++i) lossy.send(0.0, i, rng);
    CHECK(static_cast<double>(lossy.in_flight()) == doctest::Approx(7000).epsilon(0.03));
  }

  TEST_CASE("collision and raycast") {
    const World w(small_world(), NoiseModel::zero());
    CHECK(w.collides({0.1, 1.0}));
    CHECK(w.collides({2.25, 1.5}));
    CHECK(w.collides({1.9, 1.5}));
    CHECK_FALSE(w.collides({1.0, 1.0}));
    CHECK(w.raycast({1.0, 1.5}, 0.0, 10.0) == doctest::Approx(1.0));
    CHECK(w.raycast({1.0, 1.5}, pi, 10.0) == doctest::Approx(1.0));
    CHECK(w.raycast({1.0, 1.5}, pi / 2, 10.0) == doctest::Approx(1.5));
    CHECK(w.raycast({1.0, 1.5}, pi / 2, 0.5) == doctest::Approx(0.5));
  }

  TEST_CASE("motion stops at obstacles") {
    World w(small_world(), NoiseModel::zero());
    w.teleport({1.0, 1.5, 0.0});
    for (int i = 0; i < 100; ++i) w.step({0.5, 0.0, false}, 0.05);
    CHECK(w.robot().true_pose.x() == doctest::Approx(2.0 - 0.18).epsilon(1e-3));
    CHECK_FALSE(w.collides(w.robot().true_pose.position()));
    CHECK(w.time() == doctest::Approx(5.0));
    CHECK_THROWS_AS(w.step({}, 0.0), std::invalid_argument);
  }

  TEST_CASE("zero noise keeps the believed pose exact") {
    World w(small_world(), NoiseModel::zero());
    for (int i = 0; i < 200; ++i) w.step({0.2, 0.3, false}, 0.05);
    CHECK(w.robot().believed_pose.x() == doctest::Approx(w.robot().true_pose.x()));
    CHECK(w.robot().believed_pose.y() == doctest::Approx(w.robot().true_pose.y()));
    CHECK(w.robot().believed_pose.theta() == doctest::Approx(w.robot().true_pose.theta()));
  }

  TEST_CASE("heading bias drifts the believed heading with distance") {
    NoiseModel n = NoiseModel::zero();
    n.odom_heading_bias = 0.02;
    WorldConfig c = small_world();
    c.obstacles.clear();
    c.start = Pose2D(0.3, 0.5, 0.0);
    World w(c, n);
    for (int i = 0; i < 100; ++i) w.step({0.6, 0.0, false}, 0.05);
    CHECK(w.robot().true_pose.theta() == doctest::Approx(0.0));
    CHECK(w.robot().believed_pose.theta() == doctest::Approx(0.02 * 3.0).epsilon(1e-6));
  }

  TEST_CASE("a robot pressed against a wall accumulates no heading bias") {
    NoiseModel n = NoiseModel::zero();
    n.odom_heading_bias = 0.02;
    World w(small_world(), n);
    w.teleport({4.0 - 0.18 - 1e-6, 1.0, 0.0});
    for (int i = 0; i < 100; ++i) w.step({0.3, 0.0, false}, 0.05);
    CHECK(std::abs(w.robot().believed_pose.theta()) < 1e-6);
  }

  TEST_CASE("brush collects trash only with the mechanism on") {
    World w(small_world(), NoiseModel::zero());
    w.teleport({0.5, 2.5, 0.0});
    for (int i = 0; i < 30; ++i) w.step({0.3, 0.0, false}, 0.05);
    CHECK(w.collected_count() == 0);
    w.teleport({0.5, 2.5, 0.0});
    for (int i = 0; i < 30; ++i) w.step({0.3, 0.0, true}, 0.05);
    CHECK(w.collected_count() == 1);
    CHECK(w.trash()[0].collected);
  }

  TEST_CASE("scan rays span the field of view") {
    const World w(small_world(), NoiseModel::zero());
    CameraModel cam;
    const auto s = w.scan_from({1.0, 1.5, 0.0}, cam, 5);
    REQUIRE(s.size() == 5);
    CHECK(s.front().bearing == doctest::Approx(-0.6));
    CHECK(s.back().bearing == doctest::Approx(0.6));
    CHECK(s[2].range == doctest::Approx(0.9));
  }

  TEST_CASE("noise-free detector places boxes on the true item") {
    WorldConfig c = small_world();
    c.obstacles.clear();
    World w(c, NoiseModel::zero());
    w.teleport({0.5, 2.5, 0.0});
    CameraModel cam;
    const DetectionFrame f = w.detect(cam);
    REQUIRE(f.boxes.size() == 1);
    const GroundPoint p = project_detection(w.robot().true_pose, f.boxes[0], cam);
    CHECK(distance(p, {1.0, 2.5}) < 1e-9);
    w.teleport({0.5, 2.5, pi});
    CHECK(w.detect(cam).boxes.empty());
  }

  TEST_CASE("trash hidden behind an obstacle is not detected") {
    WorldConfig c = small_world();
    c.trash = {{{3.0, 1.5}, 0.5}};
    World w(c, NoiseModel::zero());
    w.teleport({1.0, 1.5, 0.0});
    CHECK(w.detect(CameraModel{}).boxes.empty());
  }

  TEST_CASE("detection probability model") {
    NoiseModel n;
    CHECK(n.p_detect(0.0) == doctest::Approx(0.95));
    CHECK(n.p_detect(3.0) == doctest::Approx(0.7));
    CHECK(n.p_detect(10.0) == doctest::Approx(0.3));
    CHECK(NoiseModel::zero().p_detect(10.0) == 1.0);
    CHECK(NoiseModel::zero().noiseless_odometry());
    CHECK_FALSE(n.noiseless_odometry());
  }

  TEST_CASE("validation") {
    WorldConfig c = small_world();
    c.obstacles.push_back({3.5, 0, 4.5, 1});
    CHECK_THROWS(World(c, NoiseModel::zero()));
    NoiseModel n;
    n.comm_drop = 1.5;
    CHECK_THROWS(n.validate());
    n = {};
    n.odom_scale_sigma = 0.5;
    CHECK_THROWS(n.validate());
    SurveyConfig s;
    s.lane_spacing = 0.0;
    CHECK_THROWS(s.validate());
  }

  TEST_CASE("survey covers the arena") {
    const Rect arena{0, 0, 8, 6};
    SurveyConfig s;
    const auto frames = survey_frame_positions(arena, s);
    REQUIRE_FALSE(frames.empty());
    for (double x = 0.1; x < 8; x += 0.4)
      for (double y = 0.1; y < 6; y += 0.4) {
        bool seen = false;
        for (const auto& f : frames)
          if (std::abs(f.x - x) <= s.footprint / 2 && std::abs(f.y - y) <= s.footprint / 2) seen = true;
        CHECK(seen);
      }
  }

  TEST_CASE("noise-free survey reports each item repeatedly at its true position") {
    WorldConfig c = small_world();
    World w(c, NoiseModel::zero());
    const auto dets = aerial_survey(w, SurveyConfig{});
    REQUIRE(dets.size() >= 3);
    for (const auto& d : dets) CHECK(distance(d.point, {1.0, 2.5}) < 1e-9);
    for (std::size_t i = 1; i < dets.size(); ++i) CHECK(dets[i].t >= dets[i - 1].t);
  }

  TEST_CASE("same seed, same world evolution") {
    auto trace = [] {
      World w(small_world(), NoiseModel{});
      std::vector<double> out;
      CameraModel cam;
      for (int i = 0; i < 50; ++i) {
        w.step({0.1, 0.2, false}, 0.05);
        out.push_back(w.robot().believed_pose.x());
        out.push_back(static_cast<double>(w.detect(cam).boxes.size()));
      }
      return out;
    };
    CHECK(trace() == trace());
  }

  TEST_CASE("ground truth dump") {
    World w(small_world(), NoiseModel::zero());
    std::ostringstream os;
    write_ground_truth(os, w);
    CHECK(os.str().find("1.") != std::string::npos);
    CHECK_FALSE(os.str().empty());
  }
}
