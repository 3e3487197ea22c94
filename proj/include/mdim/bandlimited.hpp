#pragma once

// Band-limited signals on finite windows: the metric of B_1(V[a,b]), the
// shift flow by band-limited interpolation, a discrete Fourier support check,
// real folding, and the periodic-subspace dimension count.

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace mdim {

using cplx = std::complex<double>;

struct Band {
  double a = 0.0;
  double b = 1.0;

  Band() = default;
  /// Throws Band unless a < b (both finite).
  Band(double a_, double b_);

  double width() const noexcept { return b - a; }
  double max_abs() const noexcept;
};

/// Samples on the grid t_j = -W + j*step, j = 0..2W/step. 2W/step must be an
/// integer (checked to 1e-9 relative).
struct Signal {
  Band band;
  double window = 0.0;
  double step = 0.0;
  std::vector<cplx> values;
  bool sup_bound = false;

  /// Tolerance on the declared sup bound.
  static constexpr double kSupTol = 1e-9;

  Signal() = default;
  /// Checks grid shape, oversampling 1/step >= 4*max(|a|,|b|,1) and, with
  /// sup_bound, |value| <= 1 + kSupTol.
  Signal(Band band, double window, double step, std::vector<cplx> values, bool sup_bound);

  static Signal sample(Band band, double window, double step, const std::function<cplx(double)>& f,
                       bool sup_bound);

  std::size_t size() const noexcept { return values.size(); }
  double time(std::size_t j) const noexcept { return -window + static_cast<double>(j) * step; }

  /// Band-limited interpolation at an arbitrary time inside the usable
  /// window (Gaussian-regularised sinc). Throws WindowExhausted outside.
  cplx at(double t) const;

  /// Grid sup of |f| over [lo, hi].
  double sup_abs(double lo, double hi) const;

  /// CSV block "t,re,im".
  void write_csv(std::ostream& os) const;
};

/// Interpolation half-width in grid steps and Gaussian width (in steps).
inline constexpr std::size_t kInterpTaps = 36;
inline constexpr double kInterpSigma = 5.0;

/// True when f and g share band, window and grid.
bool same_grid(const Signal& f, const Signal& g);

struct SignalDistance {
  double value = 0.0;
  /// Bound on the omitted terms n > n_max for sup-bounded signals.
  double tail_bound = 0.0;
};

/// sum_{n=1}^{n_max} 2^{-n} sup_{[-n,n]} |f - g| (grid sups).
/// IncompatibleSignal on different grids; InvalidArgument if n_max > W.
SignalDistance signal_metric(const Signal& f, const Signal& g, std::size_t n_max);

/// f(. + r) on the window shrunk by |r| plus the interpolation half-width,
/// rounded up to whole grid steps so the grid stays aligned. WindowExhausted
/// when |r| > W/2 or nothing would remain.
Signal shift(const Signal& f, double r);

/// Restriction to the aligned sub-window [-W', W'] (W' <= W, W - W' a whole
/// number of steps).
Signal restrict_window(const Signal& f, double new_window);

/// Fraction of spectral energy outside [a - eta, b + eta] after a cosine
/// (Tukey) taper of width W/8 at both ends and zero padding. Zero for the
/// zero signal.
double band_support_check(const Signal& f, double eta);

/// Re f with band [-b, b]; Band error unless the band lies in [0, b].
Signal fold_real(const Signal& f);

struct PeriodicDim {
  std::size_t dim = 0;
  /// Numerical rank of the sampled real basis (threshold 1e-8 * sigma_max).
  std::size_t rank = 0;
  std::size_t samples = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  /// a*r is within 1e-12 of an integer: the band edge frequency is included.
  bool boundary = false;
};

/// 2 floor(a r) + 1 with its rank certificate.
PeriodicDim periodic_subspace_dim(double a, double r);

}  // namespace mdim
