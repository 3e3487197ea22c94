#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mdim/embedding.hpp"
#include "mdim/error.hpp"

using namespace mdim;

namespace {

constexpr double kPi = std::numbers::pi;

cplx embed_oracle(const SolenoidPoint& p, const SolenoidEmbedding& e, double t) {
  cplx s = 0;
  for (std::size_t n = e.m; n <= e.K; ++n)
    s += std::ldexp(1.0, -static_cast<int>(n)) * std::polar(1.0, 2 * kPi * (t + p[n]) / factorial(n));
  return e.amplitude * s;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

EmbeddingRun small_run(double delta) {
  EmbeddingRun run;
  run.delta = delta;
  run.eps = delta / 2;
  run.N = 2;
  run.kernel = KernelSpec{Band(0, 2), 1.0, 0.5, 1000, 200.0, 1.0 / 16};
  run.constants = certify_constants(run.kernel, delta);
  run.FC = {{0.0, 0.0}};
  run.GC = {{0.0, 0.0}};
  return run;
}

}  // namespace

TEST_SUITE("embedding") {
  TEST_CASE("solenoid embedding values") {
    const SolenoidEmbedding e = SolenoidEmbedding::make(1.0, 4);
    CHECK(e.m == 1);
    CHECK(SolenoidEmbedding::make(0.2, 5).m == 3);
    const SolenoidPoint zero = SolenoidPoint::from_real(0.0, 4);
    CHECK(std::abs(solenoid_value(zero, e, 0.0) - cplx(0.5 + 0.25 + 0.125 + 0.0625)) < 1e-15);
    const SolenoidPoint p = SolenoidPoint::from_top(13.7, 4);
    for (double t : {-3.0, 0.4, 11.0}) CHECK(std::abs(solenoid_value(p, e, t) - embed_oracle(p, e, t)) < 1e-14);
    CHECK(kind_of([&] { solenoid_value(SolenoidPoint::from_top(1.0, 3), e, 0.0); }) == ErrorKind::Truncation);
    CHECK(kind_of([] { SolenoidEmbedding{1.0, 1, 4, 1.5}.validate(); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("solenoid embedding is equivariant") {
    const SolenoidEmbedding e = SolenoidEmbedding::make(1.0, 4);
    const SolenoidPoint p = SolenoidPoint::from_top(5.5, 4);
    const Signal f = solenoid_embed(p, e, 16, 0.125);
    const Signal g = solenoid_embed(solenoid_act(p, 0.7), e, 16, 0.125);
    const Signal fs = shift(f, 0.7);
    const auto off = static_cast<std::size_t>(std::lround((fs.time(0) - g.time(0)) / g.step));
    double err = 0.0;
    for (std::size_t j = 0; j < fs.size(); ++j) err = std::max(err, std::abs(fs.values[j] - g.values[j + off]));
    CHECK(err < 1e-6);
    CHECK(f.band.b == 1.0);
    CHECK(f.sup_bound);
  }

  TEST_CASE("Bohr coefficients") {
    const double lam = 0.8;
    auto one = [&](double t) { return std::polar(1.0, lam * t); };
    CHECK(std::abs(bohr_coefficient(one, lam, 100.0) - cplx(1.0)) < 1e-9);
    const double T = 1e3;
    CHECK(std::abs(bohr_coefficient(one, lam + 1.0, T)) <= 2.0 / T);
    const double mu = 2.3;
    auto two = [&](double t) { return 0.5 * std::polar(1.0, lam * t) + 0.5 * std::polar(1.0, mu * t); };
    const cplx c = bohr_coefficient(two, lam, T);
    CHECK(std::abs(c - cplx(0.5)) <= 1e-3);
    // Cross term: 0.5 |e^{i(mu-lam)T} - 1| / ((mu - lam) T).
    const double cross = 0.5 * std::abs(std::polar(1.0, (mu - lam) * T) - cplx(1.0)) / ((mu - lam) * T);
    CHECK(std::abs(c - cplx(0.5)) == doctest::Approx(cross).epsilon(1e-6));
  }

  TEST_CASE("recovery round trip") {
    const SolenoidEmbedding e = SolenoidEmbedding::make(1.0, 4);
    for (const SolenoidPoint& p : {SolenoidPoint::from_real(0.0, 4), SolenoidPoint::from_real(1.5, 4),
                                   SolenoidPoint::from_top(17.3, 4)}) {
      const SolenoidPoint q = solenoid_recover([&](double t) { return solenoid_value(p, e, t); }, e, 2e4);
      CHECK(q.valid());
      for (std::size_t n = 1; n <= 4; ++n) CHECK(circle_dist(p[n], q[n], factorial(n)) < 1e-2 * factorial(n));
    }
    CHECK(kind_of([&] { solenoid_recover([](double) { return cplx(0.0); }, e, 1e3); }) ==
          ErrorKind::NotAnEmbeddingImage);
  }

  TEST_CASE("epsilon embedding search") {
    const MetricSample line = MetricSample::from_points_sup({{0.0}, {0.5}, {1.0}});
    // Already separating: accepted as is.
    const SearchResult a = epsilon_embedding_search({{0.0}, {0.3}, {0.6}}, line, 0.4, 0.1, 1);
    CHECK(a.attempts == 1);
    CHECK(a.max_perturbation == 0.0);
    // A constant map has to be perturbed.
    const SearchResult b = epsilon_embedding_search({{0.0}, {0.0}, {0.0}}, line, 0.4, 0.1, 1);
    CHECK(b.attempts >= 2);
    CHECK(b.max_perturbation < 0.1);
    CHECK(b.min_separation > kImageTol);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) CHECK(std::abs(b.G[i][0] - b.G[j][0]) > kImageTol);
    // Close points with far images.
    CHECK(kind_of([&] { epsilon_embedding_search({{0.0}, {1.0}, {0.0}}, line, 0.6, 0.1, 1); }) ==
          ErrorKind::Precondition);
    CHECK(kind_of([&] { epsilon_embedding_search({{0.0}, {2.0}, {0.0}}, line, 0.4, 0.1, 1); }) ==
          ErrorKind::InvalidArgument);
  }

  TEST_CASE("perturbation interpolates the node corrections") {
    EmbeddingRun run = small_run(0.2);
    const double dp = run.constants.delta_prime;
    run.GC = {{cplx(0.5 * dp, 0.0), cplx(0.0, -0.25 * dp)}};
    const Perturbation h(run, 30.0);
    const FactorView x{0.0, [](long long) { return std::size_t{0}; }};
    for (int m = -20; m <= 20; ++m) {
      const cplx expect = run.GC[0][static_cast<std::size_t>(((m % 2) + 2) % 2)];
      CHECK(std::abs(h(x, m) - expect) < 1e-12);
    }
    // Off the nodes: direct sum of the kernel over the same nodes.
    for (double t : {0.3, -4.55}) {
      cplx s = 0;
      for (int m = static_cast<int>(std::ceil(t - run.R)); m <= static_cast<int>(std::floor(t + run.R)); ++m)
        s += run.GC[0][static_cast<std::size_t>(((m % 2) + 2) % 2)] * interpolation_kernel(t - m, run.kernel);
      CHECK(std::abs(h(x, t) - s) < 1e-9);
    }
    CHECK(h.tail_bound() > 0.0);
    CHECK(h.tail_bound() < 1e-2);
  }

  TEST_CASE("G = F leaves f unchanged") {
    const EmbeddingRun run = small_run(0.2);
    const Perturbation h(run, 30.0);
    const SolenoidEmbedding e = SolenoidEmbedding::make(1.0, 3, 0.5);
    const Signal f = solenoid_embed(SolenoidPoint::from_top(2.5, 3), e, 8, 1.0 / 16);
    const FactorView x{2.5, [](long long) { return std::size_t{0}; }};
    const Signal g = perturb_signal_map(h, f, x);
    for (std::size_t j = 0; j < f.size(); ++j) CHECK(g.values[j] == f.values[j]);
    CHECK(g.band.b == 2.0);
  }

  TEST_CASE("run validation") {
    EmbeddingRun run = small_run(0.2);
    run.constants = certify_constants(run.kernel, 0.3);
    CHECK(kind_of([&] { run.validate(); }) == ErrorKind::Configuration);
    run = small_run(0.2);
    run.eps = 0.25;
    CHECK(kind_of([&] { run.validate(); }) == ErrorKind::Configuration);
    run = small_run(0.2);
    run.GC = {{cplx(run.constants.delta_prime), 0.0}};
    CHECK(kind_of([&] { run.validate(); }) == ErrorKind::Configuration);
    run = small_run(0.2);
    run.kernel.rho = 0.4;
    run.constants = certify_constants(run.kernel, 0.2);
    CHECK(kind_of([&] { run.validate(); }) == ErrorKind::Configuration);
  }

  TEST_CASE("delta embedding verification") {
    const MetricSample s = MetricSample::from_points_sup({{0.0}, {0.5}, {1.0}});
    const SolenoidEmbedding e = SolenoidEmbedding::make(1.0, 3);
    std::vector<SolenoidPoint> phi{SolenoidPoint::from_top(0.0, 3), SolenoidPoint::from_top(2.0, 3),
                                   SolenoidPoint::from_top(4.0, 3)};
    std::vector<Signal> g;
    for (const auto& p : phi) g.push_back(solenoid_embed(p, e, 8, 0.125));
    const Verdict v = verify_delta_embedding(g, phi, s, 0.2, 1e-6, 4);
    CHECK(v.pass);
    CHECK(v.matched == 0);
    CHECK(v.pairs == 3);

    // Everything sent to one image.
    std::vector<SolenoidPoint> same(3, phi[0]);
    std::vector<Signal> flat(3, g[0]);
    const Verdict w = verify_delta_embedding(flat, same, s, 0.2, 1e-6, 4);
    CHECK_FALSE(w.pass);
    CHECK(w.matched == 3);
    REQUIRE(w.witness.has_value());
    CHECK(w.worst_margin == doctest::Approx(0.2 - 1.0));
    CHECK(*w.witness == std::make_pair(std::size_t{0}, std::size_t{2}));
  }

  TEST_CASE("desk pipeline") {
    const DeskReport r = run_desk_pipeline(DeskConfig{});
    for (const auto& f : r.failures) MESSAGE(f);
    CHECK(r.pass);
    CHECK(r.states == 96);
    CHECK(r.verdict.pass);
    CHECK(r.node_residual < 1e-8);
    CHECK(r.equivariance_residual < 1e-6);
    CHECK(r.sup_h + r.tail_bound < 0.2);
    CHECK(r.leakage_violations == 0);
  }
}
