#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mdim/dynamics.hpp"
#include "mdim/error.hpp"

using namespace mdim;

namespace {

DynSystem cycle_system(std::size_t n, bool invertible = true) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(i) / static_cast<double>(n)});
  std::vector<std::size_t> step(n);
  for (std::size_t i = 0; i < n; ++i) step[i] = invertible ? (i + 1) % n : std::min(i + 1, n - 1);
  return DynSystem(MetricSample::from_points_sup(pts), step);
}

DynSystem random_perm_system(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> pts(n);
  for (auto& p : pts) p = {U(rng)};
  std::vector<std::size_t> step(n);
  std::iota(step.begin(), step.end(), 0);
  std::shuffle(step.begin(), step.end(), rng);
  return DynSystem(MetricSample::from_points_sup(pts), step);
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("suspension flow examples") {
    const DynSystem sys = cycle_system(4);
    const RoofFunction one = RoofFunction::constant(4, 1.0);
    const RoofFunction two = RoofFunction::constant(4, 2.0);
    SuspensionPoint p = suspend(sys, one, {0, 0.0}, 1.0);
    CHECK(p.base == 1);
    CHECK(p.height == 0.0);
    p = suspend(sys, one, {0, 0.25}, 0.5);
    CHECK(p.base == 0);
    CHECK(p.height == doctest::Approx(0.75));
    // 0.5 + 3 = 3.5 = f(x) + 1.5.
    p = suspend(sys, two, {0, 0.5}, 3.0);
    CHECK(p.base == 1);
    CHECK(p.height == doctest::Approx(1.5));
  }

  TEST_CASE("canonical form at the roof") {
    const DynSystem sys = cycle_system(3);
    const RoofFunction roof({1.0, 2.0, 0.5});
    const SuspensionPoint c = canonical(sys, roof, {1, 2.0});
    CHECK(c.base == 2);
    CHECK(c.height == 0.0);
    CHECK(same_point(sys, roof, {1, 2.0}, {2, 0.0}));
    CHECK_THROWS_AS(canonical(sys, roof, {1, 2.5}), Error);
    CHECK_THROWS_AS(RoofFunction({1.0, 0.0}), Error);
  }

  TEST_CASE("negative time needs an inverse") {
    const DynSystem sys = cycle_system(4, false);
    const RoofFunction one = RoofFunction::constant(4, 1.0);
    try {
      suspend(sys, one, {1, 0.5}, -1.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedDirection);
    }
  }

  TEST_CASE("flow law") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> T(-5.0, 5.0);
    for (int it = 0; it < 200; ++it) {
      const DynSystem sys = random_perm_system(rng, 2 + rng() % 8);
      std::vector<double> rv(sys.size());
      for (auto& r : rv) r = 0.3 + 1.7 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const RoofFunction roof(rv);
      const std::size_t x = rng() % sys.size();
      const SuspensionPoint p{x, roof(x) * std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
      const double t1 = T(rng), t2 = T(rng);
      CHECK(same_point(sys, roof, suspend(sys, roof, p, t1 + t2), suspend(sys, roof, suspend(sys, roof, p, t1), t2)));
    }
  }

  TEST_CASE("Bowen-Walters examples") {
    const DynSystem sys = cycle_system(5);
    const RoofFunction one = RoofFunction::constant(5, 1.0);
    CHECK(bw_distance({2, 0.3}, {2, 0.3}, sys, one) == 0.0);
    CHECK(bw_distance({0, 0.0}, {2, 0.0}, sys, one) <= sys.base(0, 2) + 1e-12);
    CHECK(bw_distance({1, 0.2}, {1, 0.5}, sys, one) <= 0.3 + 1e-12);
  }

  TEST_CASE("Bowen-Walters distance is antitone in its parameters") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 30; ++it) {
      const DynSystem sys = random_perm_system(rng, 3 + rng() % 5);
      std::vector<double> rv(sys.size());
      for (auto& r : rv) r = 0.5 + std::uniform_real_distribution<double>(0.0, 1.5)(rng);
      const RoofFunction roof(rv);
      const std::size_t a = rng() % sys.size(), b = rng() % sys.size();
      const SuspensionPoint p{a, 0.37 * roof(a)}, q{b, 0.81 * roof(b)};
      double prev = bw_distance(p, q, sys, roof, {2, 8});
      for (std::size_t m : {3u, 4u, 6u, 0u}) {
        const double d = bw_distance(p, q, sys, roof, {m, 8});
        CHECK(d <= prev + 1e-12);
        prev = d;
      }
      prev = bw_distance(p, q, sys, roof, {4, 1});
      for (std::size_t H : {2u, 4u, 8u, 16u}) {
        const double d = bw_distance(p, q, sys, roof, {4, H});
        CHECK(d <= prev + 1e-12);
        prev = d;
      }
      CHECK(bw_distance(p, q, sys, roof) == doctest::Approx(bw_distance(q, p, sys, roof)).epsilon(1e-12));
    }
  }

  TEST_CASE("Bowen-Walters matrix is a metric") {
    std::mt19937_64 rng(29);
    const DynSystem sys = random_perm_system(rng, 6);
    std::vector<double> rv(6);
    for (auto& r : rv) r = 0.5 + std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    const RoofFunction roof(rv);
    std::vector<SuspensionPoint> pts;
    for (std::size_t x = 0; x < 6; ++x)
      for (int k = 0; k < 3; ++k) pts.push_back({x, roof(x) * k / 3.0});
    const MetricSample d = bw_distance_matrix(pts, sys, roof);
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < d.size(); ++j) {
        CHECK(d(i, j) == d(j, i));
        for (std::size_t k = 0; k < d.size(); ++k) CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-9);
        if (i != j) CHECK(d(i, j) > 0.0);
      }
  }

  TEST_CASE("mapping torus") {
    // 0 -> 1 -> 2 -> 0 and a fixed point 3.
    std::vector<std::vector<double>> pts{{0.0}, {0.3}, {0.6}, {0.9}};
    const DynSystem sys(MetricSample::from_points_sup(pts), {1, 2, 0, 3});
    const SuspensionFlow torus = mapping_torus(sys, 2);
    CHECK(torus.points.size() == 8);
    const RoofFunction& roof = torus.roof;
    for (std::size_t x = 0; x < 4; ++x) {
      const SuspensionPoint p = suspend(sys, roof, {x, 0.0}, 1.0);
      CHECK(p.base == sys.step[x]);
      CHECK(p.height == 0.0);
    }
    CHECK(flow_period(sys, roof, {0, 0.0}, 10.0) == doctest::Approx(3.0));
    CHECK(flow_period(sys, roof, {3, 0.4}, 10.0) == doctest::Approx(1.0));
    const FlowSystem f = torus.flow();
    CHECK(f.size == 8);
    CHECK(f.snapshot(0.0).size() == 8);
  }

  TEST_CASE("solenoid action") {
    const SolenoidPoint zero = SolenoidPoint::from_real(0.0, 3);
    const SolenoidPoint p = solenoid_act(zero, 1.5);
    CHECK(p[1] == 0.5);
    CHECK(p[2] == 1.5);
    CHECK(p[3] == 1.5);
    const SolenoidPoint q = SolenoidPoint::from_top(4.25, 5);
    const SolenoidPoint same = solenoid_act(q, 0.0);
    for (std::size_t n = 1; n <= 5; ++n) CHECK(same[n] == q[n]);
    // 5! is a multiple of every n!, n <= 5.
    const SolenoidPoint full = solenoid_act(q, 120.0);
    for (std::size_t n = 1; n <= 5; ++n) CHECK(circle_dist(full[n], q[n], factorial(n)) < 1e-12);
    SolenoidPoint bad = q;
    bad.coords[1] += 0.5;
    CHECK_FALSE(bad.valid());
    try {
      solenoid_act(bad, 1.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvariantViolation);
    }
  }

  TEST_CASE("solenoid action is a group action") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> R(-200.0, 200.0);
    for (int it = 0; it < 200; ++it) {
      const SolenoidPoint p = SolenoidPoint::from_top(std::uniform_real_distribution<double>(0.0, 120.0)(rng), 5);
      const double r1 = R(rng), r2 = R(rng);
      const SolenoidPoint a = solenoid_act(solenoid_act(p, r1), r2);
      const SolenoidPoint b = solenoid_act(p, r1 + r2);
      CHECK(a.valid());
      for (std::size_t n = 1; n <= 5; ++n) CHECK(circle_dist(a[n], b[n], factorial(n)) < 1e-9);
    }
    // Dyadic shifts stay exact.
    const SolenoidPoint p = SolenoidPoint::from_top(3.25, 5);
    const SolenoidPoint a = solenoid_act(solenoid_act(p, 0.5), 1.75);
    const SolenoidPoint b = solenoid_act(p, 2.25);
    for (std::size_t n = 1; n <= 5; ++n) CHECK(a[n] == b[n]);
  }

  TEST_CASE("solenoid distance") {
    const SolenoidPoint p = SolenoidPoint::from_top(10.0, 5);
    const SolenoidPoint q = SolenoidPoint::from_top(70.0, 5);
    CHECK(solenoid_distance(p, p) == 0.0);
    CHECK(solenoid_distance(p, q) == doctest::Approx(solenoid_distance(q, p)));
    CHECK(solenoid_distance(p, q) > 0.0);
    CHECK(solenoid_distance(p, q) <= 0.5);
  }
}
