#include "mdim/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "mdim/error.hpp"

namespace mdim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// Solenoid embedding

std::size_t min_solenoid_index(double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "band limit must be positive");
  std::size_t m = 1;
  while (1.0 / factorial(m) > c) {
    if (++m > 20) throw Error(ErrorKind::InvalidArgument, "band limit too small");
  }
  return m;
}

SolenoidEmbedding SolenoidEmbedding::make(double c, std::size_t K, double amplitude) {
  SolenoidEmbedding e{c, min_solenoid_index(c), K, amplitude};
  e.validate();
  return e;
}

double SolenoidEmbedding::coefficient_mass() const {
  double s = 0.0;
  for (std::size_t n = m; n <= K; ++n) s += std::ldexp(amplitude, -static_cast<int>(n));
  return s;
}

void SolenoidEmbedding::validate() const {
  if (!(c > 0.0) || m < 1 || 1.0 / factorial(m) > c) throw Error(ErrorKind::InvalidArgument, "need 1/m! <= c");
  if (K < m) throw Error(ErrorKind::InvalidArgument, "need K >= m");
  if (!(amplitude > 0.0) || coefficient_mass() > 1.0 + 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "coefficient moduli must sum to at most 1");
  }
}

cplx solenoid_value(const SolenoidPoint& p, const SolenoidEmbedding& emb, double t) {
  if (p.depth() < emb.K) throw Error(ErrorKind::Truncation, "solenoid point shallower than the embedding");
  cplx acc = 0.0;
  for (std::size_t n = emb.m; n <= emb.K; ++n) {
    const double nf = factorial(n);
    const double ph = 2.0 * kPi * circle_mod(t + p[n], nf) / nf;
    acc += std::polar(std::ldexp(emb.amplitude, -static_cast<int>(n)), ph);
  }
  return acc;
}

Signal solenoid_embed(const SolenoidPoint& p, const SolenoidEmbedding& emb, double window, double step) {
  emb.validate();
  p.validate();
  return Signal::sample(Band(0.0, emb.c), window, step, [&](double t) { return solenoid_value(p, emb, t); }, true);
}

namespace {

// Bohr means for several frequencies from one pass over f. The step is the
// smallest the frequencies ask for; e^{-i lambda t} advances by rotation and
// is re-seeded exactly every 1024 steps.
std::vector<cplx> bohr_coefficients(const Evaluator& f, const std::vector<double>& lambdas, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  double hmax = 0.01;
  for (double l : lambdas) hmax = std::min(hmax, 1.0 / (8.0 * std::abs(l) + 8.0));
  auto n = static_cast<std::size_t>(std::ceil(T / hmax));
  if (n % 2) ++n;
  const double h = T / static_cast<double>(n);
  const std::size_t L = lambdas.size();
  std::vector<cplx> acc(L, 0.0), rot(L), step(L);
  for (std::size_t i = 0; i < L; ++i) step[i] = std::polar(1.0, -lambdas[i] * h);
  for (std::size_t j = 0; j <= n; ++j) {
    const double t = h * static_cast<double>(j);
    if (j % 1024 == 0)
      for (std::size_t i = 0; i < L; ++i) rot[i] = std::polar(1.0, -lambdas[i] * t);
    const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const cplx fv = w * f(t);
    for (std::size_t i = 0; i < L; ++i) {
      acc[i] += fv * rot[i];
      rot[i] *= step[i];
    }
  }
  for (auto& a : acc) a *= (h / 3.0) / T;
  return acc;
}

}  // namespace

cplx bohr_coefficient(const Evaluator& f, double lambda, double T) { return bohr_coefficients(f, {lambda}, T)[0]; }

SolenoidPoint solenoid_recover(const Evaluator& f, const SolenoidEmbedding& emb, double T) {
  emb.validate();
  std::vector<double> raw(emb.K + 1, 0.0);
  std::vector<double> lambdas;
  for (std::size_t n = emb.m; n <= emb.K; ++n) lambdas.push_back(2.0 * kPi / factorial(n));
  const std::vector<cplx> coef = bohr_coefficients(f, lambdas, T);
  for (std::size_t n = emb.m; n <= emb.K; ++n) {
    const double nf = factorial(n);
    const cplx a = coef[n - emb.m];
    const double expected = std::ldexp(emb.amplitude, -static_cast<int>(n));
    if (std::abs(std::abs(a) - expected) > 0.25 * expected) {
      std::ostringstream os;
      os << "coefficient of frequency 1/" << n << "! has modulus " << std::abs(a) << ", expected " << expected;
      throw Error(ErrorKind::NotAnEmbeddingImage, os.str());
    }
    raw[n] = circle_mod(nf / (2.0 * kPi) * std::arg(a), nf);
  }
  // Lift coordinate by coordinate: x_n = x_{n-1} + j (n-1)! with j chosen
  // closest to the raw estimate, so the result is compatible.
  SolenoidPoint p;
  p.coords.assign(emb.K, 0.0);
  double x = raw[emb.m];
  for (std::size_t n = emb.m + 1; n <= emb.K; ++n) {
    const double prev = factorial(n - 1);
    double best = x;
    double best_d = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      const double cand = x + static_cast<double>(j) * prev;
      const double d = circle_dist(cand, raw[n], factorial(n));
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
    x = best;
  }
  for (std::size_t n = 1; n <= emb.K; ++n) p.coords[n - 1] = circle_mod(x, factorial(n));
  return p;
}

// ---------------------------------------------------------------------------
// Epsilon-embedding search

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

SearchResult epsilon_embedding_search(const std::vector<std::vector<double>>& F, const MetricSample& sample,
                                      double eps, double delta_prime, std::uint64_t seed, std::size_t budget) {
  const std::size_t n = sample.size();
  if (F.size() != n) throw Error(ErrorKind::InvalidArgument, "F needs one row per sample point");
  if (!(eps > 0.0) || !(delta_prime > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps and delta' must be positive");
  const std::size_t M = n ? F[0].size() : 0;
  for (const auto& row : F) {
    if (row.size() != M) throw Error(ErrorKind::InvalidArgument, "ragged F");
    for (double v : row)
      if (!(std::abs(v) <= 1.0)) throw Error(ErrorKind::InvalidArgument, "F must map into [-1, 1]^M");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (sample(i, j) < eps && sup_diff(F[i], F[j]) >= delta_prime) {
        std::ostringstream os;
        os << "points " << i << " and " << j << " are closer than eps but F differs by " << sup_diff(F[i], F[j]);
        throw Error(ErrorKind::Precondition, os.str());
      }

  SearchResult out;
  out.widim = widim_upper(sample, eps);
  if (2 * out.widim >= M) {
    out.warnings.push_back("Widim upper estimate " + std::to_string(out.widim) + " is not below M/2 = " +
                           std::to_string(M / 2) + "; the search may still succeed");
  }

  // Smallest separation over pairs that must be separated.
  auto separation = [&](const std::vector<std::vector<double>>& G, std::pair<std::size_t, std::size_t>& pair) {
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (sample(i, j) < eps) continue;
        const double s = sup_diff(G[i], G[j]);
        if (s < best) {
          best = s;
          pair = {i, j};
        }
      }
    return best;
  };

  std::mt19937_64 rng(seed);
  const double amp = delta_prime * (1.0 - 1e-9);
  std::uniform_real_distribution<double> U(-amp, amp);
  std::pair<std::size_t, std::size_t> worst{0, 0};
  double worst_sep = -1.0;
  std::vector<std::vector<double>> G = F;
  for (std::size_t attempt = 1; attempt <= budget; ++attempt) {
    if (attempt > 1) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < M; ++k) G[i][k] = std::clamp(F[i][k] + U(rng), -1.0, 1.0);
    }
    std::pair<std::size_t, std::size_t> pair{0, 0};
    const double sep = separation(G, pair);
    if (sep > kImageTol) {
      out.G = G;
      out.attempts = attempt;
      out.min_separation = sep;
      for (std::size_t i = 0; i < n; ++i) out.max_perturbation = std::max(out.max_perturbation, sup_diff(F[i], G[i]));
      return out;
    }
    if (sep > worst_sep) {
      worst_sep = sep;
      worst = pair;
    }
  }
  std::ostringstream os;
  os << "no epsilon-embedding after " << budget << " attempts; best attempt still identifies points " << worst.first
     << " and " << worst.second << " (separation " << worst_sep << ")";
  throw Error(ErrorKind::SearchFailure, os.str());
}

// ---------------------------------------------------------------------------
// Perturbation

FactorView SampledFactor::view(std::size_t x) const {
  return FactorView{phase(x), [this, x](long long n) { return section(x, n); }};
}

std::size_t EmbeddingRun::nodes_per_block() const {
  const double v = kernel.rho * factorial(N);
  const double r = std::round(v);
  if (!(r >= 1.0) || std::abs(v - r) > 1e-9 * r) throw Error(ErrorKind::Configuration, "rho * N! must be an integer");
  return static_cast<std::size_t>(r);
}

void EmbeddingRun::validate() const {
  kernel.validate();
  if (!(eps > 0.0) || !(eps < delta)) throw Error(ErrorKind::Configuration, "need 0 < eps < delta");
  const std::size_t B = nodes_per_block();
  if (constants.delta != delta || !(constants.delta_prime > 0.0) || !(constants.delta_prime * constants.S_sup < delta)) {
    throw Error(ErrorKind::Configuration, "kernel constants are not certified for this delta");
  }
  if (FC.size() != GC.size() || FC.empty()) throw Error(ErrorKind::Configuration, "F and G need the same section states");
  for (std::size_t s = 0; s < FC.size(); ++s) {
    if (FC[s].size() != B || GC[s].size() != B) throw Error(ErrorKind::Configuration, "rows need rho N! entries");
    for (std::size_t k = 0; k < B; ++k)
      if (!(std::abs(FC[s][k] - GC[s][k]) < constants.delta_prime)) {
        throw Error(ErrorKind::Configuration, "|F^C - G^C| must stay below delta'");
      }
  }
  if (!(R > 1.0 / kernel.rho)) throw Error(ErrorKind::Configuration, "node radius too small");
}

Perturbation::Perturbation(EmbeddingRun run, double t_max)
    : run_((run.validate(), std::move(run))), t_max_(t_max), phi_(run_.kernel, t_max + run_.R) {}

cplx Perturbation::operator()(const FactorView& x, double t) const {
  if (std::abs(t) > t_max_ * (1.0 + 1e-12)) throw Error(ErrorKind::WindowExhausted, "time outside the table range");
  const double rho = run_.kernel.rho;
  const auto B = static_cast<long long>(run_.nodes_per_block());
  // lambda = m / rho - phase.
  const double base = t + x.phase;
  const auto m_lo = static_cast<long long>(std::ceil(rho * (base - run_.R)));
  const auto m_hi = static_cast<long long>(std::floor(rho * (base + run_.R)));
  cplx acc = 0.0;
  long long cached_block = std::numeric_limits<long long>::min();
  std::size_t s = 0;
  for (long long m = m_lo; m <= m_hi; ++m) {
    const long long n = floor_div(m, B);
    const auto k = static_cast<std::size_t>(m - n * B);
    if (n != cached_block) {
      s = x.section(n);
      cached_block = n;
    }
    const cplx c = run_.GC.at(s)[k] - run_.FC.at(s)[k];
    if (c == 0.0) continue;
    acc += c * phi_(base - static_cast<double>(m) / rho);
  }
  return acc;
}

double Perturbation::tail_bound() const {
  const double rho = run_.kernel.rho;
  return run_.constants.delta_prime * run_.constants.K_dec * 2.0 * rho *
         (kPi / 2.0 - std::atan(run_.R - 1.0 / rho));
}

Signal perturb_signal_map(const Perturbation& h, const Signal& f, const FactorView& x) {
  const Band& kb = h.run().kernel.band;
  if (f.band.a < kb.a || f.band.b > kb.b) throw Error(ErrorKind::Band, "f must lie in the kernel band");
  std::vector<cplx> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) v[j] = f.values[j] + h(x, f.time(j));
  return Signal(kb, f.window, f.step, std::move(v), true);
}

Verdict verify_delta_embedding(const std::vector<Signal>& g, const std::vector<SolenoidPoint>& phi,
                               const MetricSample& sample, double delta, double match_tol, std::size_t n_max) {
  if (!(match_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "match_tol must be positive");
  const std::size_t n = sample.size();
  if (g.size() != n || phi.size() != n) throw Error(ErrorKind::InvalidArgument, "one image per sample point");
  Verdict v;
  v.worst_margin = kInf;
  v.min_image_gap = kInf;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++v.pairs;
      if (solenoid_distance(phi[i], phi[j]) > match_tol) continue;
      const double gap = signal_metric(g[i], g[j], n_max).value;
      v.min_image_gap = std::min(v.min_image_gap, gap);
      if (gap > match_tol) continue;
      ++v.matched;
      const double margin = delta - sample(i, j);
      if (margin < v.worst_margin) {
        v.worst_margin = margin;
        v.witness = std::make_pair(i, j);
      }
    }
  v.pass = !(v.worst_margin <= 0.0);
  return v;
}

// ---------------------------------------------------------------------------
// Desk instance

namespace {

struct DeskState {
  std::size_t i = 0;
  std::size_t j = 0;
  double u = 0.0;
};

class Desk {
 public:
  explicit Desk(const DeskConfig& c) : cfg_(c), perm_(c.ys), inv_(c.ys) {
    if (c.ys < 2 || std::gcd(c.ys, std::size_t{3}) != 1) {
      throw Error(ErrorKind::Configuration, "ys must be >= 2 and prime to 3");
    }
    if (c.heights < 1) throw Error(ErrorKind::Configuration, "heights must be >= 1");
    if (c.N < 2 || c.N > 3) throw Error(ErrorKind::Configuration, "the desk instance supports N in {2, 3}");
    for (std::size_t i = 0; i < c.ys; ++i) {
      perm_[i] = (3 * i + 1) % c.ys;
      inv_[perm_[i]] = i;
    }
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < c.ys; ++i)
        for (std::size_t k = 0; k < c.heights; ++k)
          states_.push_back({i, j, 2.0 * static_cast<double>(k) / static_cast<double>(c.heights)});
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < c.ys; ++i)
        if ((2 * j) % static_cast<std::size_t>(factorial(c.N)) == 0) section_.push_back({i, j, 0.0});
  }

  const std::vector<DeskState>& states() const { return states_; }
  const std::vector<DeskState>& section() const { return section_; }

  // Base system Y x Z_3, (i, j) -> (P i, j + 1), sup of |y - y'| and the
  // discrete metric on Z_3.
  DynSystem base() const {
    const std::size_t nb = 3 * cfg_.ys;
    std::vector<std::size_t> step(nb);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < cfg_.ys; ++i) step[base_index(i, j)] = base_index(perm_[i], (j + 1) % 3);
    MetricSample m = MetricSample::from_function(nb, [&](std::size_t a, std::size_t b) {
      if (a == b) return 0.0;
      const std::size_t ja = a / cfg_.ys, jb = b / cfg_.ys;
      const double dy = std::abs(y(a % cfg_.ys) - y(b % cfg_.ys));
      return ja == jb ? dy : std::max(dy, 1.0);
    });
    return DynSystem(std::move(m), std::move(step));
  }

  RoofFunction roof() const { return RoofFunction::constant(3 * cfg_.ys, 2.0); }

  SuspensionPoint lift(const DeskState& s) const { return {base_index(s.i, s.j), s.u}; }

  DeskState flow(DeskState s, double r) const {
    s.u += r;
    while (s.u >= 2.0 - 1e-12) {
      s.u = std::max(0.0, s.u - 2.0);
      s.i = perm_[s.i];
      s.j = (s.j + 1) % 3;
    }
    while (s.u < 0.0) {
      s.u += 2.0;
      s.i = inv_[s.i];
      s.j = (s.j + 2) % 3;
    }
    return s;
  }

  double x3(const DeskState& s) const { return 2.0 * static_cast<double>(s.j) + s.u; }
  SolenoidPoint phi(const DeskState& s) const { return SolenoidPoint::from_top(x3(s), 3); }
  double phase(const DeskState& s) const { return circle_mod(x3(s), factorial(cfg_.N)); }

  // Section index of T^{n N! - phase} s, stepped through roof crossings.
  std::size_t section_index(const DeskState& s, long long n) const {
    const auto Nf = static_cast<long long>(factorial(cfg_.N));
    // x_3 of the target is a multiple of N! in the unrolled orbit.
    const long long lap = static_cast<long long>(std::floor(x3(s) / static_cast<double>(Nf) + 1e-12));
    const long long target = (n + lap) * Nf;
    const long long crossings = (target - 2 * static_cast<long long>(s.j)) / 2;
    std::size_t i = s.i;
    if (crossings >= 0)
      for (long long c = 0; c < crossings; ++c) i = perm_[i];
    else
      for (long long c = 0; c < -crossings; ++c) i = inv_[i];
    const auto j = static_cast<std::size_t>(((static_cast<long long>(s.j) + crossings) % 3 + 3) % 3);
    for (std::size_t k = 0; k < section_.size(); ++k)
      if (section_[k].i == i && section_[k].j == j) return k;
    throw Error(ErrorKind::InvariantViolation, "section point not in the sample");
  }

  FactorView view(const DeskState& s) const {
    return FactorView{phase(s), [this, s](long long n) { return section_index(s, n); }};
  }

 private:
  double y(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(cfg_.ys - 1); }
  std::size_t base_index(std::size_t i, std::size_t j) const { return j * cfg_.ys + i; }

  DeskConfig cfg_;
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> inv_;
  std::vector<DeskState> states_;
  std::vector<DeskState> section_;
};

}  // namespace

DeskReport run_desk_pipeline(const DeskConfig& cfg) {
  if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0)) throw Error(ErrorKind::Configuration, "delta must be in (0, 1)");
  const Lattice lat(cfg.rho_p, cfg.rho_q, cfg.N);
  const Desk desk(cfg);
  DeskReport rep;
  rep.states = desk.states().size();
  rep.section_states = desk.section().size();

  KernelSpec ks{Band(cfg.band_a, cfg.band_b), lat.rho(), cfg.tau, 1000, cfg.kernel_window, cfg.step};
  ks.validate();
  rep.constants = certify_constants(ks, cfg.delta);
  rep.kernel_leakage = band_support_check(kernel_signal(ks), 8.0 / cfg.kernel_window);

  // f(x) = (1 - delta) * normalised solenoid embedding of Phi(x).
  const SolenoidEmbedding emb0 = SolenoidEmbedding::make(cfg.band_b, 3);
  const SolenoidEmbedding emb = SolenoidEmbedding::make(cfg.band_b, 3, (1.0 - cfg.delta) / emb0.coefficient_mass());

  // Metric d on the sample: Bowen-Walters over the base, unbounded chains.
  const DynSystem base = desk.base();
  const RoofFunction roof = desk.roof();
  std::vector<SuspensionPoint> all;
  for (const auto& s : desk.states()) all.push_back(desk.lift(s));
  MetricSample d = bw_distance_matrix(all, base, roof);
  d.set_resolution(0.0);

  // d_{N!} on the section.
  SuspensionFlow sf{base, roof, {}, 8};
  for (const auto& s : desk.section()) sf.points.push_back(desk.lift(s));
  OrbitMetricSpec spec{OrbitMetricSpec::Kind::RWindow, factorial(cfg.N), 0.125};
  MetricSample dN = orbit_metric_R(sf.flow(), spec);
  dN.set_resolution(0.0);

  // F on the section: f(s)(k/rho), split into real and imaginary parts.
  const std::size_t B = lat.count();
  EmbeddingRun run;
  run.delta = cfg.delta;
  run.eps = cfg.eps;
  run.N = cfg.N;
  run.kernel = ks;
  run.constants = rep.constants;
  run.R = cfg.R;
  std::vector<std::vector<double>> F;
  for (const auto& s : desk.section()) {
    std::vector<cplx> row(B);
    std::vector<double> re(2 * B);
    for (std::size_t k = 0; k < B; ++k) {
      row[k] = solenoid_value(desk.phi(s), emb, lat.node(static_cast<std::int64_t>(k)));
      re[k] = row[k].real();
      re[B + k] = row[k].imag();
    }
    run.FC.push_back(row);
    F.push_back(re);
  }
  // Real coordinates within delta'/2 keep the complex entries within delta'.
  rep.search = epsilon_embedding_search(F, dN, cfg.eps, rep.constants.delta_prime / 2.0, cfg.seed, cfg.budget);
  for (const auto& g : rep.search.G) {
    std::vector<cplx> row(B);
    for (std::size_t k = 0; k < B; ++k) row[k] = cplx(g[k], g[B + k]);
    run.GC.push_back(row);
  }

  const Perturbation h(run, cfg.window + 2.0 * factorial(cfg.N) + 1.0);
  rep.tail_bound = h.tail_bound();
  const std::size_t n_max = static_cast<std::size_t>(std::floor(cfg.window));
  std::vector<Signal> gs;
  std::vector<SolenoidPoint> phis;
  for (const auto& s : desk.states()) {
    const Signal f = solenoid_embed(desk.phi(s), emb, cfg.window, cfg.step);
    const Signal g = perturb_signal_map(h, f, desk.view(s));
    for (std::size_t j = 0; j < f.size(); ++j) {
      rep.sup_f = std::max(rep.sup_f, std::abs(f.values[j]));
      rep.sup_h = std::max(rep.sup_h, std::abs(g.values[j] - f.values[j]));
    }
    const double eta = 8.0 / cfg.window;
    const double lf = band_support_check(f, eta);
    const double lg = band_support_check(g, eta);
    rep.leakage_f_max = std::max(rep.leakage_f_max, lf);
    rep.leakage_g_max = std::max(rep.leakage_g_max, lg);
    if (!(lg < 2.0 * lf + rep.kernel_leakage)) ++rep.leakage_violations;

    // Node identity g(x)(-Phi(x)_N + k/rho) = G^C(T^{-Phi(x)_N} x)(k).
    const FactorView v = desk.view(s);
    const std::size_t sec = v.section(0);
    for (std::size_t k = 0; k < B; ++k) {
      const double t = -v.phase + lat.node(static_cast<std::int64_t>(k));
      const cplx gt = solenoid_value(desk.phi(s), emb, t) + h(v, t);
      rep.node_residual = std::max(rep.node_residual, std::abs(gt - run.GC[sec][k]));
    }
    // Equivariance h(T^r x)(t) = h(x)(t + r), T^r computed by the flow.
    for (double r : cfg.shifts) {
      const FactorView vr = desk.view(desk.flow(s, r));
      // Every eighth grid time is plenty for a residual.
      for (std::size_t j = 0; j < f.size(); j += 8) {
        const double t = f.time(j);
        if (std::abs(t + r) > cfg.window) continue;
        rep.equivariance_residual = std::max(rep.equivariance_residual, std::abs(h(vr, t) - h(v, t + r)));
      }
    }
    gs.push_back(g);
    phis.push_back(desk.phi(s));
  }
  rep.verdict = verify_delta_embedding(gs, phis, d, cfg.delta, cfg.match_tol, n_max);

  auto fail = [&](bool bad, const std::string& what) {
    if (bad) rep.failures.push_back(what);
  };
  fail(!(rep.constants.delta_prime * rep.constants.S_sup < cfg.delta), "delta' S_sup >= delta");
  fail(!(rep.sup_f <= 1.0 - cfg.delta + 1e-12), "sup |f| exceeds 1 - delta");
  fail(!(rep.sup_h + rep.tail_bound < cfg.delta), "sup |g - f| not below delta");
  fail(!(rep.node_residual < 1e-8), "node identity residual too large");
  fail(!(rep.equivariance_residual < 1e-6), "equivariance residual too large");
  fail(rep.leakage_violations > 0, "g leaks more than twice f plus the kernel");
  fail(!rep.verdict.pass, "delta-embedding verification failed");
  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace mdim
