#include "mdim/bandlimited.hpp"

#include <fftw3.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "mdim/error.hpp"

namespace mdim {

namespace {

std::size_t whole_steps(double span, double step, const char* what) {
  const double q = span / step;
  const double k = std::round(q);
  if (!(k >= 0.0) || std::abs(q - k) > 1e-9 * std::max(1.0, k)) {
    throw Error(ErrorKind::IncompatibleSignal, std::string(what) + " is not a whole number of grid steps");
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

Band::Band(double a_, double b_) : a(a_), b(b_) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw Error(ErrorKind::Band, "band needs a < b");
}

double Band::max_abs() const noexcept { return std::max(std::abs(a), std::abs(b)); }

Signal::Signal(Band band_, double window_, double step_, std::vector<cplx> values_, bool sup_bound_)
    : band(band_), window(window_), step(step_), values(std::move(values_)), sup_bound(sup_bound_) {
  if (!(window > 0.0) || !(step > 0.0) || !std::isfinite(window) || !std::isfinite(step)) {
    throw Error(ErrorKind::InvalidArgument, "window and step must be positive");
  }
  if (1.0 / step < 4.0 * std::max(band.max_abs(), 1.0) * (1.0 - 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "grid must oversample the band by at least 4");
  }
  const std::size_t n = whole_steps(2.0 * window, step, "window") + 1;
  if (values.size() != n) throw Error(ErrorKind::InvalidArgument, "value count does not match the grid");
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error(ErrorKind::Numerical, "non-finite sample");
    if (sup_bound && std::abs(v) > 1.0 + kSupTol) throw Error(ErrorKind::InvariantViolation, "sup bound exceeded");
  }
}

Signal Signal::sample(Band band, double window, double step, const std::function<cplx(double)>& f, bool sup_bound) {
  const std::size_t n = whole_steps(2.0 * window, step, "window") + 1;
  std::vector<cplx> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = f(-window + static_cast<double>(j) * step);
  return Signal(band, window, step, std::move(v), sup_bound);
}

cplx Signal::at(double t) const {
  const double u = (t + window) / step;
  const double taps = static_cast<double>(kInterpTaps);
  const double last = static_cast<double>(values.size() - 1);
  const double snapped = std::round(u);
  if (std::abs(u - snapped) < 1e-9 && snapped >= 0.0 && snapped <= last) {
    return values[static_cast<std::size_t>(snapped)];
  }
  if (u < taps - 1e-9 || u > last - taps + 1e-9) {
    throw Error(ErrorKind::WindowExhausted, "interpolation point too close to the window edge");
  }
  const auto j0 = static_cast<long long>(snapped);
  const double c = 1.0 / (2.0 * kInterpSigma * kInterpSigma);
  const auto T = static_cast<long long>(kInterpTaps);
  // sin(pi x) alternates in sign from tap to tap and the Gaussian follows a
  // two-term recurrence, so only three transcendental calls per point.
  const double frac = u - snapped;
  const double s0 = std::sin(std::numbers::pi * frac);
  double x = frac + static_cast<double>(T);
  double sgn = (T % 2) ? -1.0 : 1.0;
  double g = std::exp(-x * x * c);
  double ratio = std::exp(c * (2.0 * x - 1.0));
  const double ratio_step = std::exp(-2.0 * c);
  cplx acc = 0.0;
  for (long long j = j0 - T; j <= j0 + T; ++j) {
    acc += values[static_cast<std::size_t>(j)] * (sgn * s0 / (std::numbers::pi * x) * g);
    g *= ratio;
    ratio *= ratio_step;
    x -= 1.0;
    sgn = -sgn;
  }
  return acc;
}

double Signal::sup_abs(double lo, double hi) const {
  double m = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double t = time(j);
    if (t >= lo - 1e-12 && t <= hi + 1e-12) m = std::max(m, std::abs(values[j]));
  }
  return m;
}

void Signal::write_csv(std::ostream& os) const {
  os << "t,re,im\n";
  char buf[128];
  for (std::size_t j = 0; j < values.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", time(j), values[j].real(), values[j].imag());
    os << buf;
  }
}

bool same_grid(const Signal& f, const Signal& g) {
  return f.band.a == g.band.a && f.band.b == g.band.b && f.size() == g.size() &&
         std::abs(f.step - g.step) <= 1e-12 * f.step && std::abs(f.window - g.window) <= 1e-9 * f.window;
}

SignalDistance signal_metric(const Signal& f, const Signal& g, std::size_t n_max) {
  if (!same_grid(f, g)) throw Error(ErrorKind::IncompatibleSignal, "signals live on different grids");
  if (n_max == 0 || static_cast<double>(n_max) > f.window * (1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= n_max <= W");
  }
  std::vector<double> sup(n_max + 1, 0.0);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double t = std::abs(f.time(j));
    const double d = std::abs(f.values[j] - g.values[j]);
    // The smallest n with |t| <= n; the sup over [-n, n] sees it and every
    // larger n does too.
    auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t - 1e-12)));
    if (n <= n_max) sup[n] = std::max(sup[n], d);
  }
  SignalDistance out;
  double running = 0.0;
  double w = 0.5;
  for (std::size_t n = 1; n <= n_max; ++n, w *= 0.5) {
    running = std::max(running, sup[n]);
    out.value += w * running;
  }
  out.tail_bound = (f.sup_bound && g.sup_bound) ? std::ldexp(1.0, 1 - static_cast<int>(n_max))
                                               : std::numeric_limits<double>::infinity();
  return out;
}

Signal restrict_window(const Signal& f, double new_window) {
  if (!(new_window > 0.0) || new_window > f.window * (1.0 + 1e-12)) {
    throw Error(ErrorKind::WindowExhausted, "sub-window must lie inside the window");
  }
  const std::size_t k = whole_steps(f.window - new_window, f.step, "window difference");
  const std::size_t n = f.size() - 2 * k;
  std::vector<cplx> v(f.values.begin() + static_cast<std::ptrdiff_t>(k),
                      f.values.begin() + static_cast<std::ptrdiff_t>(k + n));
  return Signal(f.band, f.window - static_cast<double>(k) * f.step, f.step, std::move(v), f.sup_bound);
}

Signal shift(const Signal& f, double r) {
  if (!std::isfinite(r) || std::abs(r) > f.window / 2.0 * (1.0 + 1e-12)) {
    throw Error(ErrorKind::WindowExhausted, "shift exceeds half the window");
  }
  const double steps = std::abs(r) / f.step;
  const double whole = std::round(steps);
  const bool on_grid = std::abs(steps - whole) < 1e-9;
  // Shifts by whole steps copy samples; other shifts need the interpolation
  // half-width on both sides.
  const std::size_t m = on_grid ? static_cast<std::size_t>(whole)
                                : static_cast<std::size_t>(std::ceil(steps)) + kInterpTaps;
  if (2 * m >= f.size() - 1) throw Error(ErrorKind::WindowExhausted, "nothing left of the window after shifting");
  const double W = f.window - static_cast<double>(m) * f.step;
  const std::size_t n = f.size() - 2 * m;
  std::vector<cplx> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = f.at(-W + static_cast<double>(j) * f.step + r);
  Signal out;
  out.band = f.band;
  out.window = W;
  out.step = f.step;
  out.values = std::move(v);
  // Interpolation may overshoot the declared bound by rounding only.
  out.sup_bound = f.sup_bound;
  return out;
}

double band_support_check(const Signal& f, double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be >= 0");
  const std::size_t n = f.size();
  std::size_t M = 1;
  while (M < 4 * n) M <<= 1;
  fftw_complex* buf = fftw_alloc_complex(M);
  const double edge = f.window / 8.0;
  for (std::size_t j = 0; j < M; ++j) {
    if (j < n) {
      const double dist = std::min(f.time(j) + f.window, f.window - f.time(j));
      const double w = dist >= edge ? 1.0 : 0.5 * (1.0 - std::cos(std::numbers::pi * std::max(0.0, dist) / edge));
      buf[j][0] = w * f.values[j].real();
      buf[j][1] = w * f.values[j].imag();
    } else {
      buf[j][0] = buf[j][1] = 0.0;
    }
  }
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(M), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  double total = 0.0;
  double outside = 0.0;
  const double lo = f.band.a - eta;
  const double hi = f.band.b + eta;
  for (std::size_t k = 0; k < M; ++k) {
    const double kk = k < M / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(M);
    const double nu = kk / (static_cast<double>(M) * f.step);
    const double e = buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    total += e;
    if (nu < lo || nu > hi) outside += e;
  }
  fftw_destroy_plan(plan);
  fftw_free(buf);
  return total > 0.0 ? outside / total : 0.0;
}

Signal fold_real(const Signal& f) {
  if (f.band.a < 0.0) throw Error(ErrorKind::Band, "fold_real needs a band inside [0, b]");
  std::vector<cplx> v(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) v[j] = f.values[j].real();
  return Signal(Band(-f.band.b, f.band.b), f.window, f.step, std::move(v), f.sup_bound);
}

PeriodicDim periodic_subspace_dim(double a, double r) {
  if (!(a > 0.0) || !(r > 0.0) || !std::isfinite(a) || !std::isfinite(r)) {
    throw Error(ErrorKind::InvalidArgument, "a and r must be positive");
  }
  PeriodicDim out;
  const long double ar = static_cast<long double>(a) * static_cast<long double>(r);
  const long double nearest = std::round(ar);
  std::size_t K;
  if (std::abs(ar - nearest) < 1e-12L) {
    // Frequencies k/r = a sit on the closed band edge and are included.
    out.boundary = true;
    K = static_cast<std::size_t>(nearest);
  } else {
    K = static_cast<std::size_t>(std::floor(ar));
  }
  out.dim = 2 * K + 1;
  out.samples = 4 * K + 8;
  const double offset = (std::sqrt(5.0) - 1.0) / 2.0;
  Eigen::MatrixXd A(out.samples, out.dim);
  for (std::size_t i = 0; i < out.samples; ++i) {
    const double x = r * (static_cast<double>(i) + offset) / static_cast<double>(out.samples);
    A(i, 0) = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
      const double ph = 2.0 * std::numbers::pi * static_cast<double>(k) * x / r;
      A(i, 2 * k - 1) = std::cos(ph);
      A(i, 2 * k) = std::sin(ph);
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  out.sigma_max = s(0);
  out.sigma_min = s(s.size() - 1);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-8 * out.sigma_max) ++out.rank;
  return out;
}

}  // namespace mdim
