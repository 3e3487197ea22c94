// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "mdim/bandlimited.hpp"
#include "mdim/dynamics.hpp"
#include "mdim/embedding.hpp"
#include "mdim/error.hpp"
#include "mdim/kernel.hpp"
#include "mdim/metric.hpp"

using namespace mdim;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

DynSystem random_system(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> pts(n);
  for (auto& q : pts) q = {U(rng), U(rng)};
  std::vector<std::size_t> step(n);
  std::iota(step.begin(), step.end(), 0);
  std::shuffle(step.begin(), step.end(), rng);
  return DynSystem(MetricSample::from_points_sup(pts), std::move(step));
}

Outcome sinc_oracle() {
  std::size_t violations = 0;
  double worst_big = 0.0;
  for (double rho : {0.5, 1.0, 1.5}) {
    for (int i = -1000; i <= 1000; ++i) {
      const double z = i / 100.0;
      const ProductValue t = product_truncated(z, rho, 1000);
      if (std::abs(t.value - product_function(z, rho)) > t.bound) ++violations;
    }
    for (int i = -200; i <= 200; ++i) {
      const double z = i / 20.0;
      worst_big = std::max(worst_big, std::abs(product_truncated(z, rho, 1000000).value - product_function(z, rho)));
    }
  }
  return {violations == 0 && worst_big <= 1e-3,
          fmt("bound violations %.0f, max error at K=1e6 %.3g", static_cast<double>(violations), worst_big)};
}

Outcome kernel_identities() {
  const KernelSpec spec{Band(0, 2), 1.0, 0.5, 1000, 200.0, 1.0 / 16};
  const double phi0 = std::abs(interpolation_kernel(0.0, spec) - cplx(1.0));
  std::size_t nonzero = 0;
  for (int k = -50; k <= 50; ++k)
    if (k != 0 && interpolation_kernel(k / spec.rho, spec) != cplx(0.0)) ++nonzero;
  std::size_t h_viol = 0;
  for (double y : {1.0, 5.0, 10.0})
    for (double s : {-1.0, 1.0})
      if (std::abs(bump_transform(cplx(0, s * y), spec.tau).value) > std::exp(kPi * spec.tau * y)) ++h_viol;
  return {phi0 <= 1e-9 && nonzero == 0 && h_viol == 0,
          fmt("|phi(0)-1| %.3g, nonzero nodes %.0f, h(iy) violations %.0f", phi0, static_cast<double>(nonzero),
              static_cast<double>(h_viol))};
}

Outcome imaginary_axis() {
  std::size_t violations = 0;
  double worst = 0.0;
  for (double rho : {0.5, 1.0, 1.5})
    for (int i = -2000; i <= 2000; ++i) {
      const double y = i / 100.0;
      const double bound = std::exp(kPi * rho * std::abs(y));
      for (double v : {std::abs(product_function(cplx(0, y), rho)), std::abs(product_truncated(cplx(0, y), rho, 1000).value)}) {
        worst = std::max(worst, v / bound);
        if (v > bound) ++violations;
      }
    }
  const GrowthAudit g = growth_audit(Lattice(1, 1, 3));
  return {violations == 0 && g.imag_violations == 0,
          fmt("violations %.0f, max ratio %.6f, audit ratio %.6f", static_cast<double>(violations), worst, g.imag_ratio_max)};
}

Outcome band_confinement() {
  const KernelSpec spec{Band(0, 2), 1.0, 0.5, 1000, 200.0, 1.0 / 16};
  const double leak = band_support_check(kernel_signal(spec), 8.0 / spec.window);
  return {leak < 1e-3, fmt("leakage %.3g", leak)};
}

Outcome periodic_dims() {
  std::size_t mismatches = 0, cases = 0;
  auto check = [&](double a, double r) {
    const PeriodicDim p = periodic_subspace_dim(a, r);
    ++cases;
    if (p.dim != 2 * static_cast<std::size_t>(std::floor(a * r)) + 1 || p.rank != p.dim) ++mismatches;
  };
  check(1, 2.5);
  check(1, 0.5);
  check(2, 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.1, 4.0);
  for (int drawn = 0; drawn < 20;) {
    const double a = U(rng), r = U(rng);
    if (std::abs(a * r - std::round(a * r)) < 1e-6) continue;
    check(a, r);
    ++drawn;
  }
  return {mismatches == 0, fmt("%.0f cases, %.0f mismatches", static_cast<double>(cases), static_cast<double>(mismatches))};
}

Outcome mdim_tables() {
  const double eps[] = {0.3};
  const std::size_t Ns[] = {1, 2, 3, 4};
  std::vector<std::vector<double>> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back({i / 20.0});
  std::size_t bad = 0;
  std::string seen;
  for (std::size_t D : {1u, 2u}) {
    const Table t = mdim_table(window_source(ShiftSpace{MetricSample::from_points_sup(grid), 0, {1.0}, D}), eps, Ns);
    for (const auto& r : t.rows) {
      if (r.value != static_cast<double>(D)) ++bad;
      seen += fmt(" %.0f", r.value);
    }
  }
  std::vector<double> w;
  for (int i = 0; i <= 5; ++i) w.push_back(std::ldexp(1.0, -i));
  for (const auto& r : mdim_table(window_source(ShiftSpace{MetricSample(2, {0, 1, 1, 0}), 5, w, 1}), eps, Ns).rows) {
    if (r.value != 0.0) ++bad;
    seen += fmt(" %.0f", r.value);
  }
  return {bad == 0, "D=1,D=2,binary:" + seen};
}

Outcome widim_properties() {
  std::mt19937_64 rng(77);
  std::size_t antitone = 0, subadd = 0, shift_inv = 0;
  const double eps_list[] = {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0};
  for (int it = 0; it < 100; ++it) {
    const DynSystem sys = random_system(rng, 2 + rng() % 39);
    std::size_t prev = sys.size();
    for (double e : eps_list) {
      const std::size_t v = widim_upper(sys.base, e);
      if (v > prev) ++antitone;
      prev = v;
    }
    const auto W = widim_windows(window_source(sys), 0.25, 4);
    for (std::size_t a = 1; a <= 4; ++a)
      for (std::size_t b = 1; a + b <= 4; ++b)
        if (W[a + b].value > W[a].value + W[b].value) ++subadd;
    const long long r = static_cast<long long>(rng() % 9) - 4;
    for (double e : {0.2, 0.4})
      if (widim_upper(orbit_metric_window(sys, 0, 2), e) != widim_upper(orbit_metric_window(sys, r, r + 2), e)) ++shift_inv;
  }
  return {antitone + subadd + shift_inv == 0,
          fmt("antitone %.0f, subadditivity %.0f, shift invariance %.0f failures", static_cast<double>(antitone),
              static_cast<double>(subadd), static_cast<double>(shift_inv))};
}

Outcome solenoid_round_trip() {
  const SolenoidEmbedding emb = SolenoidEmbedding::make(1.0, 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> top(0.0, 24.0), R(-5.0, 5.0);
  double worst = 0.0, equiv = 0.0;
  for (int i = 0; i < 20; ++i) {
    const SolenoidPoint p = SolenoidPoint::from_top(top(rng), 4);
    const SolenoidPoint q = solenoid_recover([&](double t) { return solenoid_value(p, emb, t); }, emb, 2e4);
    for (std::size_t n = 1; n <= 4; ++n) worst = std::max(worst, circle_dist(p[n], q[n], factorial(n)) / factorial(n));
    const double r = R(rng);
    const Signal moved = solenoid_embed(solenoid_act(p, r), emb, 24, 1.0 / 16);
    const Signal shifted = shift(solenoid_embed(p, emb, 24, 1.0 / 16), r);
    const auto off = static_cast<std::size_t>(std::lround((shifted.time(0) - moved.time(0)) / moved.step));
    for (std::size_t j = 0; j < shifted.size(); ++j)
      equiv = std::max(equiv, std::abs(shifted.values[j] - moved.values[j + off]));
  }
  return {worst <= 1e-2 && equiv < 1e-9, fmt("worst distance / n! %.3g, equivariance %.3g", worst, equiv)};
}

Outcome desk_pipeline() {
  const DeskReport r = run_desk_pipeline(DeskConfig{});
  std::string d = fmt("states %.0f, delta' %.4f, sup|g-f| %.4g", static_cast<double>(r.states),
                      r.constants.delta_prime, r.sup_h + r.tail_bound);
  d += fmt(", node %.3g, equivariance %.3g", r.node_residual, r.equivariance_residual);
  for (const auto& f : r.failures) d += "; " + f;
  const bool ok = r.pass && r.states <= 200 && r.verdict.pass && r.sup_h + r.tail_bound < 0.2 && r.node_residual < 1e-8 &&
                  r.equivariance_residual < 1e-6;
  return {ok, d};
}

Outcome metric_contracts() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  // Signals: random tone mixtures on a shared grid.
  auto sig = [&] {
    std::vector<double> lam(3);
    std::vector<cplx> c(3);
    for (int k = 0; k < 3; ++k) {
      lam[k] = U(rng);
      c[k] = std::polar(U(rng) / 3, 2 * kPi * U(rng));
    }
    return Signal::sample(Band(0, 1), 12, 0.125, [&](double t) {
      cplx s = 0;
      for (int k = 0; k < 3; ++k) s += c[k] * std::polar(1.0, 2 * kPi * lam[k] * t);
      return s;
    }, true);
  };
  std::size_t sig_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const Signal f = sig(), g = sig(), h = sig();
    const double fg = signal_metric(f, g, 10).value, gf = signal_metric(g, f, 10).value;
    const double fh = signal_metric(f, h, 10).value, hg = signal_metric(h, g, 10).value;
    if (std::abs(fg - gf) > 1e-9 || fg > fh + hg + 1e-9) ++sig_bad;
  }
  // Bowen-Walters matrix on random suspensions.
  std::size_t bw_bad = 0;
  for (int it = 0; it < 10; ++it) {
    const DynSystem sys = random_system(rng, 5);
    std::vector<double> rv(5);
    for (auto& v : rv) v = 0.5 + 1.5 * U(rng);
    const RoofFunction roof(rv);
    std::vector<SuspensionPoint> pts;
    for (int k = 0; k < 12; ++k) {
      const std::size_t x = rng() % 5;
      pts.push_back({x, roof(x) * U(rng)});
    }
    const MetricSample d = bw_distance_matrix(pts, sys, roof);
    for (int t = 0; t < 100; ++t) {
      const std::size_t i = rng() % 12, j = rng() % 12, k = rng() % 12;
      if (std::abs(d(i, j) - d(j, i)) > 1e-9 || d(i, k) > d(i, j) + d(j, k) + 1e-9) ++bw_bad;
    }
  }
  // Spanning battery.
  std::size_t span_bad = 0, checked = 0;
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 1 + rng() % 15;
    std::vector<std::vector<double>> pts(n);
    for (auto& q : pts) q = {U(rng), U(rng)};
    const MetricSample s = MetricSample::from_points_sup(pts);
    const double e = 0.05 + 0.4 * U(rng);
    const std::size_t g = spanning_number(s, e).count, opt = spanning_number_exact(s, e).count;
    ++checked;
    if (static_cast<double>(g) > (1.0 + std::log(static_cast<double>(n))) * static_cast<double>(opt) + 1e-12 || g < opt)
      ++span_bad;
  }
  return {sig_bad + bw_bad + span_bad == 0,
          fmt("signal %.0f, bw %.0f, spanning %.0f failures", static_cast<double>(sig_bad), static_cast<double>(bw_bad),
              static_cast<double>(span_bad)) + fmt(" over %.0f spanning instances", static_cast<double>(checked))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"sinc oracle", sinc_oracle},
      {"kernel identities", kernel_identities},
      {"imaginary-axis bound", imaginary_axis},
      {"kernel band confinement", band_confinement},
      {"periodic-subspace dimension", periodic_dims},
      {"mean-dimension table", mdim_tables},
      {"widim property suite", widim_properties},
      {"solenoid round trip", solenoid_round_trip},
      {"end-to-end embedding pipeline", desk_pipeline},
      {"metric-space contracts", metric_contracts},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu: %s (%s) [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
