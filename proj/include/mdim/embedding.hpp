#pragma once

// Solenoid embedding into band-limited signals and its Bohr-mean inverse, the
// finite-sample epsilon-embedding search, the perturbation g = f + h built
// from the interpolation kernel, delta-embedding verification, and a small
// end-to-end instance exercising all of it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdim/bandlimited.hpp"
#include "mdim/dynamics.hpp"
#include "mdim/kernel.hpp"
#include "mdim/metric.hpp"

namespace mdim {

/// Smallest m with 1/m! <= c.
std::size_t min_solenoid_index(double c);

/// f_x(t) = amplitude * sum_{n=m}^{K} 2^{-n} e^{2 pi i (t + x_n)/n!}.
struct SolenoidEmbedding {
  double c = 1.0;
  std::size_t m = 1;
  std::size_t K = kSolenoidDepth;
  double amplitude = 1.0;

  /// m = min_solenoid_index(c).
  static SolenoidEmbedding make(double c, std::size_t K, double amplitude = 1.0);
  /// Throws InvalidArgument on 1/m! > c, K < m or amplitude * sum 2^{-n} > 1.
  void validate() const;
  double coefficient_mass() const;
};

/// f_x(t) at one time. Truncation error when p.depth() < K.
cplx solenoid_value(const SolenoidPoint& p, const SolenoidEmbedding& emb, double t);

/// f_x sampled on [-window, window]; band [0, c], sup_bound set.
Signal solenoid_embed(const SolenoidPoint& p, const SolenoidEmbedding& emb, double window, double step);

using Evaluator = std::function<cplx(double)>;

/// (1/T) int_0^T f(t) e^{-i lambda t} dt by composite Simpson with step at
/// most min(0.01, 1/(8|lambda| + 8)).
cplx bohr_coefficient(const Evaluator& f, double lambda, double T);

/// Reads x_n off the phase of the coefficient of frequency 1/n!, m <= n <= K;
/// coordinates below m are reduced from x_m. NotAnEmbeddingImage when a
/// coefficient modulus is more than 25% away from amplitude * 2^{-n}.
SolenoidPoint solenoid_recover(const Evaluator& f, const SolenoidEmbedding& emb, double T);

// ---------------------------------------------------------------------------
// Epsilon-embedding search

struct SearchResult {
  std::vector<std::vector<double>> G;
  /// Attempts used, 1 when F itself was accepted.
  std::size_t attempts = 0;
  double max_perturbation = 0.0;
  /// Smallest ||G(x) - G(y)||_inf over pairs with d(x, y) >= eps.
  double min_separation = 0.0;
  std::size_t widim = 0;
  std::vector<std::string> warnings;
};

/// Coordinates closer than this count as equal images.
inline constexpr double kImageTol = 1e-12;

/// Finds G with sup ||F - G||_inf < delta_prime and ||G(x) - G(y)||_inf >
/// kImageTol whenever d(x, y) >= eps, trying F first and then seeded uniform
/// perturbations of magnitude < delta_prime clamped to [-1, 1].
/// Precondition error if d(x, y) < eps with ||F(x) - F(y)||_inf >= delta_prime;
/// SearchFailure after `budget` attempts.
SearchResult epsilon_embedding_search(const std::vector<std::vector<double>>& F, const MetricSample& sample,
                                      double eps, double delta_prime, std::uint64_t seed,
                                      std::size_t budget = 10000);

// ---------------------------------------------------------------------------
// Perturbation g = f + h

/// A point as seen by the construction: its phase Phi(x)_N in [0, N!) and
/// the section sample index of T^{n N! - Phi(x)_N} x for every n.
struct FactorView {
  double phase = 0.0;
  std::function<std::size_t(long long)> section;
};

/// Factor map on a finite sample of states.
struct SampledFactor {
  std::vector<SolenoidPoint> phi;
  std::size_t N = 2;
  std::function<std::size_t(std::size_t, long long)> section;

  double phase(std::size_t x) const { return phi.at(x)[N]; }
  FactorView view(std::size_t x) const;
};

struct EmbeddingRun {
  double delta = 0.2;
  double eps = 0.1;
  std::size_t N = 2;
  KernelSpec kernel;
  KernelConstants constants;
  /// Complex samples f(s)(k/rho), G^C(s)(k) on the section states.
  std::vector<std::vector<cplx>> FC;
  std::vector<std::vector<cplx>> GC;
  /// Nodes farther than R from t are dropped from h(x)(t).
  double R = 60.0141421356;

  std::size_t nodes_per_block() const;
  /// eps < delta, rho N! integer, certified constants for this delta,
  /// sup |F^C - G^C| < delta'. Throws Configuration otherwise.
  void validate() const;
};

class Perturbation {
 public:
  /// Builds the kernel table for |t| <= t_max + R.
  Perturbation(EmbeddingRun run, double t_max);

  /// h(x)(t): sum over lattice nodes lambda = m/rho - phase with
  /// |t - lambda| <= R of (G^C - F^C)(section)(k) phi(t - lambda).
  cplx operator()(const FactorView& x, double t) const;
  /// Bound on the dropped nodes: delta' K_dec 2 rho (pi/2 - atan(R - 1/rho)).
  double tail_bound() const;
  const EmbeddingRun& run() const noexcept { return run_; }

 private:
  EmbeddingRun run_;
  double t_max_;
  KernelTable phi_;
};

/// g(x) = f(x) + h(x) on the grid of f.
Signal perturb_signal_map(const Perturbation& h, const Signal& f, const FactorView& x);

struct Verdict {
  bool pass = true;
  std::size_t pairs = 0;
  /// Pairs whose images match within match_tol.
  std::size_t matched = 0;
  /// min over matched pairs of delta - d(x, y); +inf when nothing matched.
  double worst_margin = 0.0;
  /// Smallest signal distance over pairs with matching factor images.
  double min_image_gap = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
};

/// Pairs with signal_metric(g(x), g(y)) <= match_tol and
/// solenoid_distance(Phi(x), Phi(y)) <= match_tol must have d(x, y) < delta.
Verdict verify_delta_embedding(const std::vector<Signal>& g, const std::vector<SolenoidPoint>& phi,
                               const MetricSample& sample, double delta, double match_tol, std::size_t n_max);

// ---------------------------------------------------------------------------
// Desk instance: suspension with roof 2 over Y x Z_3 with factor onto the
// depth-3 solenoid, x_3 = 2j + u.

struct DeskConfig {
  double delta = 0.2;
  double eps = 0.1;
  std::int64_t rho_p = 1;
  std::int64_t rho_q = 1;
  std::size_t N = 2;
  double tau = 0.5;
  double band_a = 0.0;
  double band_b = 2.0;
  /// Y = {0, 1/(ys-1), ..., 1} with the permutation i -> (3i + 1) mod ys.
  std::size_t ys = 8;
  /// Heights u = 2k/heights, k < heights, on every fiber.
  std::size_t heights = 4;
  double window = 24.0;
  double step = 1.0 / 16.0;
  double kernel_window = 200.0;
  double R = 60.0141421356;
  std::uint64_t seed = 1;
  std::size_t budget = 10000;
  double match_tol = 1e-6;
  /// Shifts used for the equivariance residual.
  std::vector<double> shifts{0.3, 2.0};
};

struct DeskReport {
  std::size_t states = 0;
  std::size_t section_states = 0;
  KernelConstants constants;
  SearchResult search;
  double sup_f = 0.0;
  double sup_h = 0.0;
  double tail_bound = 0.0;
  double node_residual = 0.0;
  double equivariance_residual = 0.0;
  double kernel_leakage = 0.0;
  double leakage_f_max = 0.0;
  double leakage_g_max = 0.0;
  /// States where leakage(g) >= 2 leakage(f) + kernel leakage.
  std::size_t leakage_violations = 0;
  Verdict verdict;
  std::vector<std::string> failures;
  bool pass = false;
};

DeskReport run_desk_pipeline(const DeskConfig& cfg);

}  // namespace mdim
