#pragma once

// The lattice L(rho), the product function with zeros on L*(rho), the smooth
// bump transform h, the interpolation kernel phi and its certified decay
// constants.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mdim/bandlimited.hpp"

namespace mdim {

/// L(rho) = {k / rho : k in Z} with rho = p/q. `depth` is N with rho * N! an
/// integer; L(rho, N) = L(rho) cap [0, N!).
class Lattice {
 public:
  /// Throws InvalidArgument unless p, q >= 1 and p * N! / q is an integer
  /// (exact integer arithmetic, N <= 20).
  Lattice(std::int64_t p, std::int64_t q, std::size_t depth);

  std::int64_t p() const noexcept { return p_; }
  std::int64_t q() const noexcept { return q_; }
  std::size_t depth() const noexcept { return depth_; }
  double rho() const noexcept { return static_cast<double>(p_) / static_cast<double>(q_); }

  /// k / rho.
  double node(std::int64_t k) const noexcept;
  /// |L(rho, N)| = rho * N!.
  std::size_t count() const noexcept { return count_; }
  /// L(rho, N) in increasing order.
  std::vector<double> nodes() const;

 private:
  std::int64_t p_;
  std::int64_t q_;
  std::size_t depth_;
  std::size_t count_;
};

struct ProductValue {
  cplx value;
  /// Bound on |full product - value|. 0 for the closed form.
  double bound = 0.0;
};

/// Closed form of the full product over L*(rho): sin(pi rho z)/(pi rho z).
/// Exactly 1 at 0 and exactly 0 at nonzero lattice points (rho z within a few
/// ulp of a nonzero integer).
cplx product_function(cplx z, double rho);

/// Paired truncation prod_{k=1}^{K} (1 - (rho z)^2 / k^2), exactly 0 at the
/// included nodes 0 < |k| <= K. The bound is
/// |value| * (exp(|w| / (K (1 - |w|/K^2))) - 1 + 2 K eps), w = (rho z)^2:
/// the analytic tail plus accumulated rounding. Infinite for |w| >= K^2.
ProductValue product_truncated(cplx z, double rho, std::size_t K);

struct GrowthAudit {
  /// Fitted C with |f(x)| <= C (1 + |x|)^{5 rho N!} on the real samples.
  double fitted_C = 0.0;
  double real_max = 0.0;
  /// max over imaginary samples of |f(iy)| / e^{pi rho |y|}; <= 1 required.
  double imag_ratio_max = 0.0;
  std::size_t imag_violations = 0;
  std::size_t real_samples = 0;
  std::size_t imag_samples = 0;
  bool pass = false;
};

/// Samples |f| on |x| <= 10 N! and on the imaginary axis |y| <= y_max.
GrowthAudit growth_audit(const Lattice& lat, double y_max = 20.0, std::size_t samples = 2001);

struct KernelSpec {
  Band band;
  double rho = 1.0;
  double tau = 0.5;
  std::size_t K_trunc = 1000;
  double window = 200.0;
  double grid_step = 1.0 / 16.0;

  /// Throws InvalidArgument unless 0 < rho, 0 < tau, rho + tau < b - a,
  /// K_trunc >= 1 and a positive window.
  void validate() const;
};

/// Normalising integral of exp(-1/(1-u^2)) on (-1, 1).
double bump_mass();

/// psi(xi) = c exp(-1/(1 - (2 xi/tau)^2)) on (-tau/2, tau/2), unit integral.
double bump(double xi, double tau);

/// || psi'' ||_1 for the bump of width tau.
double bump_second_derivative_l1(double tau);

struct Quadrature {
  cplx value;
  std::size_t nodes = 0;
  /// |value(nodes) - value(nodes/2)|.
  double achieved = 0.0;
};

/// h(z) = int psi(xi) e^{2 pi i z xi} d xi by the trapezoid rule, doubling
/// from 512 nodes until successive values agree to `tol` (absolute, scaled
/// by max(1, |h|)). Numerical error when 2^20 nodes do not suffice.
Quadrature bump_transform(cplx z, double tau, double tol = 1e-12);

/// Fast evaluator of h on the real axis for one tau: fixed node set chosen
/// by convergence up to |t| <= t_max.
class BumpTransform {
 public:
  BumpTransform(double tau, double t_max);
  double operator()(double t) const;
  std::size_t nodes() const noexcept { return u_.size(); }

 private:
  double tau_;
  std::vector<double> u_;
  std::vector<double> w_;
};

/// phi(t) = e^{pi i t (a+b)} h(t) sinc(rho t), with precomputed bump
/// quadrature for |t| <= t_max.
class InterpolationKernel {
 public:
  InterpolationKernel(const KernelSpec& spec, double t_max);
  cplx operator()(double t) const;
  const KernelSpec& spec() const noexcept { return spec_; }

 private:
  KernelSpec spec_;
  BumpTransform h_;
};

/// phi from a table of h on the KernelSpec grid step over [-t_max, t_max]:
/// grid-aligned arguments read the table, others interpolate h (itself
/// band-limited to [-tau/2, tau/2]) with the signal interpolator.
class KernelTable {
 public:
  KernelTable(const KernelSpec& spec, double t_max);
  cplx operator()(double t) const;
  double h(double t) const;
  double t_max() const noexcept { return t_max_; }
  const KernelSpec& spec() const noexcept { return spec_; }

 private:
  KernelSpec spec_;
  double t_max_;
  Signal h_;
};

/// Single evaluation of phi(t) (adaptive bump quadrature).
cplx interpolation_kernel(double t, const KernelSpec& spec);

/// phi sampled on the KernelSpec window grid.
Signal kernel_signal(const KernelSpec& spec);

struct KernelConstants {
  /// |phi(t)| <= K_dec / (1 + t^2) for all t.
  double K_dec = 0.0;
  /// max over the window grid of |phi(t)| (1 + t^2), before the margin.
  double window_max = 0.0;
  /// Analytic envelope of |phi(t)| (1 + t^2) for |t| >= W.
  double envelope_beyond = 0.0;
  /// sup_t sum_lambda K_dec / (1 + (t - lambda)^2).
  double S_sup = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;
};

/// Sum over L(rho) of 1 / (1 + (t - lambda)^2) in closed form.
double lattice_sum_closed(double t, double rho);

KernelConstants certify_constants(const KernelSpec& spec, double delta);

}  // namespace mdim
