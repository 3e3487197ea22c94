#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mdim/bandlimited.hpp"
#include "mdim/error.hpp"

using namespace mdim;

namespace {

constexpr double kPi = std::numbers::pi;

cplx tone(double lambda, double t) { return std::polar(1.0, 2 * kPi * lambda * t); }

// Random trigonometric polynomial with frequencies in [0, 1], sup <= 1.
Signal random_signal(std::mt19937_64& rng, double W, double step, std::size_t terms = 4) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> lam(terms);
  std::vector<cplx> c(terms);
  for (std::size_t k = 0; k < terms; ++k) {
    lam[k] = U(rng);
    c[k] = std::polar(U(rng) / static_cast<double>(terms), 2 * kPi * U(rng));
  }
  return Signal::sample(Band(0.0, 1.0), W, step, [&](double t) {
    cplx s = 0;
    for (std::size_t k = 0; k < terms; ++k) s += c[k] * tone(lam[k], t);
    return s;
  }, true);
}

// Direct evaluation of the truncated series.
double metric_oracle(const Signal& f, const Signal& g, std::size_t n_max) {
  double total = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    double m = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
      if (std::abs(f.time(j)) <= static_cast<double>(n) + 1e-12) m = std::max(m, std::abs(f.values[j] - g.values[j]));
    total += std::ldexp(m, -static_cast<int>(n));
  }
  return total;
}

}  // namespace

TEST_SUITE("bandlimited") {
  TEST_CASE("signal construction") {
    CHECK_THROWS_AS(Band(1.0, 1.0), Error);
    CHECK_THROWS_AS(Signal(Band(0, 1), 4.0, 0.125, std::vector<cplx>(10), false), Error);
    // Under-sampled.
    CHECK_THROWS_AS(Signal(Band(0, 1), 4.0, 0.5, std::vector<cplx>(17), false), Error);
    CHECK_THROWS_AS(Signal(Band(0, 1), 4.0, 0.125, std::vector<cplx>(65, cplx(2.0)), true), Error);
  }

  TEST_CASE("signal metric") {
    std::mt19937_64 rng(5);
    const Signal f = random_signal(rng, 16, 0.125);
    const Signal g = random_signal(rng, 16, 0.125);
    const Signal h = random_signal(rng, 16, 0.125);
    CHECK(signal_metric(f, f, 10).value == 0.0);
    const double d = signal_metric(f, g, 10).value;
    CHECK(d == doctest::Approx(metric_oracle(f, g, 10)).epsilon(1e-14));
    CHECK(d == doctest::Approx(signal_metric(g, f, 10).value).epsilon(1e-14));
    CHECK(d <= 2.0);
    CHECK(d <= signal_metric(f, h, 10).value + signal_metric(h, g, 10).value + 1e-12);

    const Signal c = Signal::sample(Band(0, 1), 16, 0.125, [](double) { return cplx(0.6); }, true);
    const Signal z = Signal::sample(Band(0, 1), 16, 0.125, [](double) { return cplx(0.0); }, true);
    CHECK(signal_metric(c, z, 12).value == doctest::Approx(0.6 * (1 - std::ldexp(1.0, -12))).epsilon(1e-14));
    CHECK(signal_metric(c, z, 12).tail_bound == doctest::Approx(2 * std::ldexp(1.0, -12)));
    CHECK_THROWS_AS(signal_metric(c, z, 17), Error);
    const Signal other = Signal::sample(Band(0, 1), 8, 0.125, [](double) { return cplx(0.0); }, true);
    try {
      signal_metric(c, other, 4);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IncompatibleSignal);
    }
  }

  TEST_CASE("shift of a pure tone") {
    const double lambda = 0.37;
    const Signal f = Signal::sample(Band(0, 1), 64, 0.125, [&](double t) { return tone(lambda, t); }, true);
    CHECK(shift(f, 0.0).values.size() <= f.values.size());
    for (double r : {0.3, -1.7, 5.05}) {
      const Signal g = shift(f, r);
      double err = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(g.values[j] - tone(lambda, g.time(j) + r)));
      CHECK(err < 1e-6);
    }
  }

  TEST_CASE("shift at r = 0 and grid shifts are exact") {
    std::mt19937_64 rng(6);
    const Signal f = random_signal(rng, 32, 0.125);
    const Signal g = shift(f, 0.0);
    const auto off = static_cast<std::size_t>(std::lround((g.time(0) - f.time(0)) / f.step));
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(g.values[j] - f.values[j + off]) < 1e-12);
    const Signal h = shift(f, 0.5);
    const auto off2 = static_cast<std::size_t>(std::lround((h.time(0) + 0.5 - f.time(0)) / f.step));
    for (std::size_t j = 0; j < h.size(); ++j) CHECK(std::abs(h.values[j] - f.values[j + off2]) < 1e-12);
  }

  TEST_CASE("shift group law and invariants") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> R(-3.0, 3.0);
    for (int it = 0; it < 10; ++it) {
      const Signal f = random_signal(rng, 48, 0.125);
      const double r1 = R(rng), r2 = R(rng);
      const Signal a = shift(shift(f, r1), r2);
      const Signal b = shift(f, r1 + r2);
      const Signal& small = a.window < b.window ? a : b;
      const Signal& big = a.window < b.window ? b : a;
      const auto off = static_cast<std::size_t>(std::lround((small.time(0) - big.time(0)) / big.step));
      double err = 0.0;
      for (std::size_t j = 0; j < small.size(); ++j) err = std::max(err, std::abs(small.values[j] - big.values[j + off]));
      CHECK(err < 1e-6);
      // The grid sup of the shift is bounded by a dense sup of f over the
      // translated window (the plain grid sup of f can miss the peak).
      const Signal g = shift(f, r1);
      double dense = 0.0;
      for (double t = -g.window + r1; t <= g.window + r1; t += f.step / 16) dense = std::max(dense, std::abs(f.at(t)));
      CHECK(g.sup_abs(-g.window, g.window) <= dense + 1e-6);
      CHECK(band_support_check(g, 4.0 / g.window) < 1e-3);
    }
  }

  TEST_CASE("shift runs out of window") {
    const Signal f = Signal::sample(Band(0, 1), 8, 0.125, [](double t) { return tone(0.5, t); }, true);
    try {
      shift(f, 5.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::WindowExhausted);
    }
  }

  TEST_CASE("leakage") {
    const double W = 200;
    const Signal in = Signal::sample(Band(0, 1), W, 0.125, [](double t) { return tone(0.5, t); }, true);
    CHECK(band_support_check(in, 4.0 / W) < 1e-3);
    const Signal out = Signal::sample(Band(0, 1), W, 0.125, [](double t) { return tone(2.5, t); }, true);
    CHECK(band_support_check(out, 1.0 / W) > 0.99);
    const Signal zero = Signal::sample(Band(0, 1), W, 0.125, [](double) { return cplx(0.0); }, true);
    CHECK(band_support_check(zero, 1.0 / W) == 0.0);
  }

  TEST_CASE("fold to real") {
    const Signal f = Signal::sample(Band(0, 1), 16, 0.125, [](double t) { return tone(0.4, t); }, true);
    const Signal g = fold_real(f);
    CHECK(g.band.a == -1.0);
    CHECK(g.band.b == 1.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(g.values[j].imag() == 0.0);
      CHECK(g.values[j].real() == doctest::Approx(std::cos(2 * kPi * 0.4 * g.time(j))).epsilon(1e-12));
    }
    const Signal bad = Signal::sample(Band(-0.5, 1), 16, 0.125, [](double) { return cplx(0.0); }, true);
    try {
      fold_real(bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Band);
    }
  }

  TEST_CASE("periodic subspace dimension") {
    CHECK(periodic_subspace_dim(1, 2.5).dim == 5);
    CHECK(periodic_subspace_dim(1, 0.5).dim == 1);
    CHECK(periodic_subspace_dim(2, 3).dim == 13);
    CHECK(periodic_subspace_dim(2, 3).boundary);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.1, 3.0);
    for (int it = 0; it < 20; ++it) {
      const double a = U(rng), r = U(rng);
      const PeriodicDim p = periodic_subspace_dim(a, r);
      const auto expect = 2 * static_cast<std::size_t>(std::floor(a * r)) + 1;
      CHECK(p.dim == expect);
      CHECK(p.rank == expect);
    }
  }
}
