#pragma once

// Finite-sample metric spaces, dynamical (orbit) metrics, the Widim upper
// estimator built from cover nerves, spanning numbers, and the mean-dimension
// tables derived from them.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mdim {

/// Finite point set with a symmetric distance table. Points are identified by
/// their index 0..size()-1.
class MetricSample {
 public:
  enum class Check { Full, Structural };

  /// Triangle-inequality tolerance used by Check::Full.
  static constexpr double kTriangleTol = 1e-9;
  /// Above this many points Check::Full degrades to Check::Structural; the
  /// triangle check is cubic.
  static constexpr std::size_t kTriangleCheckLimit = 400;

  MetricSample() = default;

  /// Row-major n*n table. Throws InvariantViolation on a bad diagonal,
  /// asymmetry, negative or non-finite entries, or (Check::Full) a triangle
  /// violation beyond kTriangleTol.
  MetricSample(std::size_t n, std::vector<double> dist, Check check = Check::Full);

  static MetricSample from_function(std::size_t n,
                                    const std::function<double(std::size_t, std::size_t)>& d,
                                    Check check = Check::Full);

  /// Points in R^k with the sup (l-infinity) metric.
  static MetricSample from_points_sup(const std::vector<std::vector<double>>& pts);

  std::size_t size() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return dist_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {dist_.data() + i * n_, n_}; }
  const std::vector<double>& table() const noexcept { return dist_; }

  double diameter() const noexcept;

  /// Largest nearest-neighbour distance: the scale below which the sample
  /// carries no information about the space it was drawn from.
  double sampling_resolution() const;

  /// Resolution used by the Widim estimator. Defaults to
  /// sampling_resolution(); 0 declares the sample to be the space itself
  /// (a genuinely finite space).
  double resolution() const;
  MetricSample& set_resolution(double h);
  bool has_resolution_override() const noexcept { return resolution_.has_value(); }

  /// Quotient by zero distance. `classes[i]` is the representative index of
  /// point i in the returned sample.
  MetricSample collapse_duplicates(std::vector<std::size_t>* classes = nullptr) const;

  /// Relabelled copy: new point i is old point perm[i].
  MetricSample permuted(std::span<const std::size_t> perm) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> dist_;
  std::optional<double> resolution_;
  mutable std::optional<double> sampling_resolution_;
};

/// Z-system on a finite sample: base metric plus a total step map, optionally
/// invertible.
struct DynSystem {
  MetricSample base;
  std::vector<std::size_t> step;
  std::optional<std::vector<std::size_t>> inverse;

  DynSystem() = default;
  /// Validates the step table; fills `inverse` when step is a bijection.
  DynSystem(MetricSample base, std::vector<std::size_t> step);

  std::size_t size() const noexcept { return base.size(); }
  bool invertible() const noexcept { return inverse.has_value(); }
  /// T^k x; negative k requires an inverse.
  std::size_t iterate(std::size_t x, long long k) const;
};

/// R-flow on a finite sample, represented by the distance table of the
/// evolved sample at each time.
struct FlowSystem {
  std::size_t size = 0;
  std::function<MetricSample(double t)> snapshot;
};

struct OrbitMetricSpec {
  enum class Kind { ZWindow, RWindow };
  Kind kind = Kind::ZWindow;
  double horizon = 1.0;
  /// R windows only; 0 selects the default horizon/256.
  double time_step = 0.0;

  void validate() const;
};

/// max_{0<=n<N} d(T^n x, T^n y).
MetricSample orbit_metric_Z(const DynSystem& sys, std::size_t N);

/// max_{n in [first, last]} d(T^n x, T^n y); negative indices need an inverse.
MetricSample orbit_metric_window(const DynSystem& sys, long long first, long long last);

/// sup over the grid {0, dt, ..., R} of d(rx, ry). A lower bound for the true
/// sup over [0, R]; the gap is controlled by the modulus of continuity of the
/// flow on the grid spacing.
MetricSample orbit_metric_R(const FlowSystem& flow, const OrbitMetricSpec& spec);

struct CoverNerve {
  std::vector<std::vector<std::size_t>> cover;
  /// Largest number of cover elements sharing a point, minus one.
  std::size_t nerve_dim = 0;
  /// Resolution at which the cover has a Lebesgue number.
  double lebesgue_number = 0.0;
  /// Scale at which the cover was built (mesh < scale).
  double scale = 0.0;
  /// True when the sample is too coarse for the scale and no cover with the
  /// required Lebesgue number exists; nerve_dim then holds |X|-1.
  bool unresolved = false;
};

/// Cover of mesh < eps with Lebesgue number sample.resolution(), built by the
/// coloured greedy (point-id ascending, ball radius eps/2). Deterministic.
CoverNerve build_cover(const MetricSample& sample, double eps);

/// Upper estimate of Widim_eps(sample): the smallest nerve dimension among
/// the covers built at every scale eps' <= eps at which the construction
/// changes, with points visited in two orders taken from the metric alone
/// (sweep from the most eccentric point, nearest-neighbour chain). Antitone
/// in eps, and unchanged by relabelling up to ties in the distance rows.
std::size_t widim_upper(const MetricSample& sample, double eps);

struct SpanningResult {
  std::size_t count = 0;
  std::vector<std::size_t> centers;
  bool exact = false;
};

/// Scales examined by spanning_number below eps.
inline constexpr std::size_t kSpanningScales = 4096;

/// Greedy closed-ball (d <= eps) set cover, largest-coverage first, ties to
/// the smallest id, run at eps and at every pairwise distance below it (the
/// largest kSpanningScales of them); the smallest cover wins. Antitone in eps
/// while the sample has at most kSpanningScales distinct distances below eps.
/// count <= (1 + ln|X|) * optimum.
SpanningResult spanning_number(const MetricSample& sample, double eps);

/// Exact minimum spanning set by enumeration over center subsets.
/// Throws InvalidArgument above `max_points` points.
SpanningResult spanning_number_exact(const MetricSample& sample, double eps,
                                     std::size_t max_points = 15);

/// Source of window samples for an action. A window of N steps is a product
/// of N * atoms_per_step atoms (sup metric over atoms); `sample(k)` is the
/// finite sample over k atoms and `size(k)` its point count, computed without
/// building it. For a plain Z-system an atom is one time step.
struct WindowSource {
  std::function<std::size_t(std::size_t)> size;
  std::function<MetricSample(std::size_t)> sample;
  std::size_t atoms_per_step = 1;
};

/// The source keeps its own copy of the system.
WindowSource window_source(const DynSystem& sys);

/// Full shift over a finite alphabet with a base metric reading coordinates
/// -memory..memory: d(x, y) = sum_{|i|<=memory} weight[|i|] * s(x_i, y_i).
/// Window samples are the quotient by words of length N + 2*memory.
///
/// With factors > 1 a letter is a tuple of `factors` alphabet symbols and the
/// letter metric is the sup over the tuple (memory must be 0). The N-step
/// window is then isometric to a window of N*factors single symbols, which is
/// how the D-cube shift is represented.
struct ShiftSpace {
  MetricSample alphabet;
  std::size_t memory = 0;
  std::vector<double> weights{1.0};
  std::size_t factors = 1;

  std::size_t word_length(std::size_t N) const { return N + 2 * memory; }
  /// Points in the sample over k single-symbol positions.
  std::size_t word_count(std::size_t k) const;
  /// Sample over k single-symbol positions (k = N steps when factors == 1).
  MetricSample atom_sample(std::size_t k) const;
  MetricSample window_sample(std::size_t N) const { return atom_sample(N * factors); }
};

WindowSource window_source(const ShiftSpace& shift);

struct WidimEstimate {
  std::size_t value = 0;
  /// 0 for a direct cover of the window sample, otherwise the length (in
  /// atoms) of the first block of the product construction W(A) + W(k-A).
  std::size_t split = 0;
};

struct MdimOptions {
  /// Window samples larger than this are not covered directly; only the
  /// product construction bounds them.
  std::size_t direct_limit = 4096;
};

/// Widim estimates for windows of 1..N_max*atoms_per_step atoms: min of the
/// direct cover bound and W(A) + W(k-A), which bounds Widim(d_k) through the
/// product map x -> (f(x), g(T^A x)). Index k of the result is k atoms.
std::vector<WidimEstimate> widim_windows(const WindowSource& src, double eps,
                                         std::size_t N_max, const MdimOptions& opt = {});

struct TableRow {
  double epsilon = 0.0;
  std::size_t N = 0;
  double value = 0.0;
  std::size_t raw = 0;
  std::string note;
};

struct Table {
  std::vector<TableRow> rows;
  std::vector<std::string> diagnostics;

  void write_csv(std::ostream& os) const;
};

/// Widim_eps(d_N)/N for every (eps, N); diagnostics report entries that are
/// not antitone in eps.
Table mdim_table(const WindowSource& src, std::span<const double> eps_list,
                 std::span<const std::size_t> N_list, const MdimOptions& opt = {});

/// log A(X, eps, d, n) / (n |log eps|) from greedy spanning numbers.
Table metric_mdim_table(const WindowSource& src, std::span<const double> eps_list,
                        std::span<const std::size_t> n_list);

}  // namespace mdim
