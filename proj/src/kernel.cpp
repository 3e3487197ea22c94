#include "mdim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <string>

#include "mdim/error.hpp"

namespace mdim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Nonzero integer k when w is within a few ulp of it on the real axis.
bool near_nonzero_integer(cplx w, double& k) {
  if (w.imag() != 0.0) return false;
  k = std::round(w.real());
  return k != 0.0 && std::abs(w.real() - k) <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(k);
}

std::int64_t factorial_int(std::size_t n) {
  std::int64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<std::int64_t>(k);
  return f;
}

double psi0(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Lattice

Lattice::Lattice(std::int64_t p, std::int64_t q, std::size_t depth) : p_(p), q_(q), depth_(depth) {
  if (p < 1 || q < 1) throw Error(ErrorKind::InvalidArgument, "rho = p/q needs p, q >= 1");
  if (depth < 1 || depth > 20) throw Error(ErrorKind::InvalidArgument, "lattice depth must be in 1..20");
  const std::int64_t g = std::gcd(p_, q_);
  p_ /= g;
  q_ /= g;
  const std::int64_t nf = factorial_int(depth);
  if (nf % q_ != 0) throw Error(ErrorKind::InvalidArgument, "rho * N! must be an integer");
  const auto c = static_cast<__int128>(p_) * (nf / q_);
  if (c > static_cast<__int128>(1) << 40) throw Error(ErrorKind::InvalidArgument, "rho * N! too large");
  count_ = static_cast<std::size_t>(c);
}

double Lattice::node(std::int64_t k) const noexcept {
  return static_cast<double>(k) * static_cast<double>(q_) / static_cast<double>(p_);
}

std::vector<double> Lattice::nodes() const {
  std::vector<double> out(count_);
  for (std::size_t k = 0; k < count_; ++k) out[k] = node(static_cast<std::int64_t>(k));
  return out;
}

// ---------------------------------------------------------------------------
// Product function

cplx product_function(cplx z, double rho) {
  const cplx w = rho * z;
  if (w == 0.0) return 1.0;
  double k;
  if (near_nonzero_integer(w, k)) return 0.0;
  const cplx pw = kPi * w;
  if (std::abs(pw) < 1e-4) return 1.0 - pw * pw / 6.0 + pw * pw * pw * pw / 120.0;
  return std::sin(pw) / pw;
}

ProductValue product_truncated(cplx z, double rho, std::size_t K) {
  if (K == 0) throw Error(ErrorKind::InvalidArgument, "K_trunc must be >= 1");
  const cplx w = rho * z;
  double k0;
  if (near_nonzero_integer(w, k0) && std::abs(k0) <= static_cast<double>(K)) return {0.0, 0.0};
  const cplx w2 = w * w;
  cplx acc = 1.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    acc *= 1.0 - w2 / (kk * kk);
  }
  const double aw = std::abs(w2);
  const double Kd = static_cast<double>(K);
  double bound = kInf;
  // Truncated tail plus the rounding of K products (about 3K half-ulps).
  if (aw < Kd * Kd) {
    bound = std::abs(acc) * (std::expm1(aw / (Kd * (1.0 - aw / (Kd * Kd)))) +
                             2.0 * Kd * std::numeric_limits<double>::epsilon());
  }
  return {acc, bound};
}

GrowthAudit growth_audit(const Lattice& lat, double y_max, std::size_t samples) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  GrowthAudit out;
  const double rho = lat.rho();
  const double span = 10.0 * static_cast<double>(factorial_int(lat.depth()));
  const double power = 5.0 * static_cast<double>(lat.count());
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double v = std::abs(product_function(x, rho));
    out.real_max = std::max(out.real_max, v);
    // log form: (1+|x|)^power overflows quickly.
    out.fitted_C = std::max(out.fitted_C, std::exp(std::log(std::max(v, 1e-300)) - power * std::log1p(std::abs(x))));
  }
  out.real_samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const double y = -y_max + 2.0 * y_max * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double v = std::abs(product_function(cplx(0.0, y), rho));
    const double ratio = v / std::exp(kPi * rho * std::abs(y));
    out.imag_ratio_max = std::max(out.imag_ratio_max, ratio);
    if (ratio > 1.0) ++out.imag_violations;
  }
  out.imag_samples = samples;
  out.pass = out.imag_violations == 0 && std::isfinite(out.fitted_C);
  return out;
}

// ---------------------------------------------------------------------------
// Bump and its transform

void KernelSpec::validate() const {
  if (!(rho > 0.0) || !(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "rho and tau must be positive");
  if (!(rho + tau < band.width())) throw Error(ErrorKind::InvalidArgument, "need rho + tau < b - a");
  if (K_trunc < 1) throw Error(ErrorKind::InvalidArgument, "K_trunc must be >= 1");
  if (!(window > 0.0) || !(grid_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "window and grid step must be positive");
}

double bump_mass() {
  // Trapezoid on the flat-ended integrand converges past double precision by
  // 512 intervals.
  static const double mass = [] {
    constexpr int M = 2048;
    double s = 0.0;
    for (int j = 1; j < M; ++j) s += psi0(-1.0 + 2.0 * j / M);
    return s * 2.0 / M;
  }();
  return mass;
}

double bump(double xi, double tau) { return psi0(2.0 * xi / tau) * 2.0 / (tau * bump_mass()); }

double bump_second_derivative_l1(double tau) {
  constexpr int M = 1 << 16;
  double s = 0.0;
  for (int j = 1; j < M; ++j) {
    const double u = -1.0 + 2.0 * j / M;
    const double sq = 1.0 - u * u;
    const double g1 = -2.0 * u / (sq * sq);
    const double g2 = -2.0 / (sq * sq) - 8.0 * u * u / (sq * sq * sq);
    s += std::abs((g2 + g1 * g1) * psi0(u));
  }
  s *= 2.0 / M;
  // psi(xi) = (2/tau) psi0(2 xi/tau) / mass, so psi'' picks up (2/tau)^3 and
  // the change of variable gives back tau/2.
  return s * (2.0 / tau) * (2.0 / tau) / bump_mass();
}

namespace {

// (1/mass) int_{-1}^{1} psi0(u) e^{i pi tau z u} du, M trapezoid intervals,
// exponentials by geometric recurrence.
cplx bump_trapezoid(cplx z, double tau, std::size_t M) {
  const double du = 2.0 / static_cast<double>(M);
  const cplx a = cplx(0.0, kPi * tau) * z;
  cplx e = std::exp(a * (-1.0 + du));
  const cplx ratio = std::exp(a * du);
  cplx s = 0.0;
  for (std::size_t j = 1; j < M; ++j) {
    s += psi0(-1.0 + du * static_cast<double>(j)) * e;
    e *= ratio;
  }
  return s * du / bump_mass();
}

}  // namespace

Quadrature bump_transform(cplx z, double tau, double tol) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  std::size_t M = 512;
  cplx prev = bump_trapezoid(z, tau, M);
  for (M = 1024; M <= (std::size_t{1} << 20); M *= 2) {
    const cplx cur = bump_trapezoid(z, tau, M);
    const double diff = std::abs(cur - prev);
    if (diff <= tol * std::max(1.0, std::abs(cur))) return {cur, M, diff};
    prev = cur;
  }
  throw Error(ErrorKind::Numerical, "bump quadrature did not converge");
}

BumpTransform::BumpTransform(double tau, double t_max) : tau_(tau) {
  if (!(tau > 0.0) || !(t_max >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bad bump parameters");
  // Pick the node count by convergence at the most oscillatory point.
  std::size_t M = 1024;
  while (M <= (std::size_t{1} << 20)) {
    const double a = bump_trapezoid(t_max, tau, M).real();
    const double b = bump_trapezoid(t_max, tau, 2 * M).real();
    if (std::abs(a - b) <= 1e-14) break;
    M *= 2;
  }
  if (M > (std::size_t{1} << 20)) throw Error(ErrorKind::Numerical, "bump quadrature did not converge");
  // psi0 is even: keep u >= 0 and fold the weights.
  const double du = 2.0 / static_cast<double>(M);
  for (std::size_t j = M / 2; j < M; ++j) {
    const double u = -1.0 + du * static_cast<double>(j);
    const double w = psi0(u) * du / bump_mass() * (j == M / 2 ? 1.0 : 2.0);
    if (w == 0.0) continue;
    u_.push_back(u);
    w_.push_back(w);
  }
}

double BumpTransform::operator()(double t) const {
  const double a = kPi * tau_ * t;
  double s = 0.0;
  for (std::size_t j = 0; j < u_.size(); ++j) s += w_[j] * std::cos(a * u_[j]);
  return s;
}

// ---------------------------------------------------------------------------
// Interpolation kernel

InterpolationKernel::InterpolationKernel(const KernelSpec& spec, double t_max) : spec_(spec), h_(spec.tau, t_max) {
  spec_.validate();
}

cplx InterpolationKernel::operator()(double t) const {
  const cplx g = product_function(t, spec_.rho);
  if (g == 0.0) return 0.0;
  return std::polar(1.0, kPi * t * (spec_.band.a + spec_.band.b)) * (h_(t) * g);
}

KernelTable::KernelTable(const KernelSpec& spec, double t_max) : spec_(spec), t_max_(t_max) {
  spec_.validate();
  if (!(t_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "table range must be positive");
  const double d = spec_.grid_step;
  const double W = d * (std::ceil(t_max / d) + static_cast<double>(kInterpTaps) + 1.0);
  const BumpTransform bt(spec_.tau, W);
  h_ = Signal::sample(Band(-spec_.tau / 2.0, spec_.tau / 2.0), W, d, [&](double t) { return cplx(bt(t)); }, true);
}

double KernelTable::h(double t) const {
  if (std::abs(t) > t_max_ * (1.0 + 1e-12)) throw Error(ErrorKind::WindowExhausted, "kernel table range exceeded");
  return h_.at(t).real();
}

cplx KernelTable::operator()(double t) const {
  const cplx g = product_function(t, spec_.rho);
  if (g == 0.0) return 0.0;
  return std::polar(1.0, kPi * t * (spec_.band.a + spec_.band.b)) * (h(t) * g);
}

cplx interpolation_kernel(double t, const KernelSpec& spec) {
  spec.validate();
  const cplx g = product_function(t, spec.rho);
  if (g == 0.0) return 0.0;
  return std::polar(1.0, kPi * t * (spec.band.a + spec.band.b)) * bump_transform(t, spec.tau).value * g;
}

Signal kernel_signal(const KernelSpec& spec) {
  const InterpolationKernel phi(spec, spec.window);
  return Signal::sample(spec.band, spec.window, spec.grid_step, [&](double t) { return phi(t); }, true);
}

double lattice_sum_closed(double t, double rho) {
  // sum_k 1/(1 + (t - k c)^2) = (pi/c) sinh(2 pi/c) / (cosh(2 pi/c) - cos(2 pi t/c)), c = 1/rho.
  const double c = 1.0 / rho;
  const double a = 2.0 * kPi / c;
  // Divide through by cosh to stay finite for large a.
  return (kPi / c) * std::tanh(a) / (1.0 - std::cos(2.0 * kPi * t / c) / std::cosh(a));
}

KernelConstants certify_constants(const KernelSpec& spec, double delta) {
  spec.validate();
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  KernelConstants out;
  out.delta = delta;
  const Signal phi = kernel_signal(spec);
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double t = phi.time(j);
    out.window_max = std::max(out.window_max, std::abs(phi.values[j]) * (1.0 + t * t));
  }
  // Beyond the window: |h(t)| <= ||psi''||_1 / (2 pi t)^2 and
  // |sinc(rho t)| <= 1/(pi rho |t|); the product times (1 + t^2) decreases.
  const double W = spec.window;
  out.envelope_beyond =
      bump_second_derivative_l1(spec.tau) / ((2.0 * kPi * W) * (2.0 * kPi * W)) / (kPi * spec.rho * W) * (1.0 + W * W);
  out.K_dec = std::max(1.1 * out.window_max, out.envelope_beyond);

  // Lattice sum over one period: direct terms |k| <= M plus an integral
  // bound on the rest.
  const double c = 1.0 / spec.rho;
  constexpr std::int64_t M = 2000;
  constexpr std::size_t G = 10000;
  double best = 0.0;
  for (std::size_t i = 0; i <= G; ++i) {
    const double t = c * static_cast<double>(i) / static_cast<double>(G);
    double s = 0.0;
    for (std::int64_t k = -M; k <= M; ++k) {
      const double d = t - static_cast<double>(k) * c;
      s += 1.0 / (1.0 + d * d);
    }
    best = std::max(best, s);
  }
  const double tail = (2.0 / c) * (kPi / 2.0 - std::atan(static_cast<double>(M - 1) * c));
  out.S_sup = out.K_dec * (best + tail);
  out.delta_prime = 0.9 * delta / out.S_sup;
  return out;
}

}  // namespace mdim
