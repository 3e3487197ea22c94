#pragma once

// Suspension flows over finite Z-systems, the Bowen-Walters metric on them,
// mapping tori, and the truncated n!-solenoid with its translation flow.

#include <cstddef>
#include <vector>

#include "mdim/metric.hpp"

namespace mdim {

/// Positive roof over the states of a system.
struct RoofFunction {
  std::vector<double> values;
  double f_min = 0.0;

  RoofFunction() = default;
  /// Throws InvariantViolation unless every value is finite and positive.
  explicit RoofFunction(std::vector<double> v);
  static RoofFunction constant(std::size_t n, double c) { return RoofFunction(std::vector<double>(n, c)); }

  std::size_t size() const noexcept { return values.size(); }
  double operator()(std::size_t x) const { return values.at(x); }
};

struct SuspensionPoint {
  std::size_t base = 0;
  double height = 0.0;
};

/// Relative tolerance used when comparing heights and deciding whether a
/// height has reached the roof.
inline constexpr double kHeightTol = 1e-9;

/// Canonical representative: height in [0, f(x)), with heights at the roof
/// (within kHeightTol) rewritten as (Tx, 0). Throws InvariantViolation for a
/// point outside 0 <= s <= f(x).
SuspensionPoint canonical(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p);

/// Equality in S_f X up to kHeightTol, including the identification
/// (x, f(x)) ~ (Tx, 0).
bool same_point(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p, SuspensionPoint q);

/// psi_t(p): follows the flow for time t. Negative t needs an inverse
/// (UnsupportedDirection otherwise). Result is canonical.
SuspensionPoint suspend(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p, double t);

/// Parameters of the chain approximation to the Bowen-Walters distance.
struct BwParams {
  /// Largest number of segments in a chain (>= 2). 0 means unbounded.
  std::size_t max_segments = 4;
  /// Intermediate heights (in S_1 X) are restricted to {j/m : 0 <= j < m,
  /// 1 <= m <= height_grid}. The sets are nested in height_grid, so the
  /// distance is antitone in it.
  std::size_t height_grid = 8;
};

/// Heights of the nested grid used by BwParams::height_grid, sorted.
std::vector<double> bw_levels(std::size_t height_grid);

/// Upper bound for the Bowen-Walters distance on S_f X: shortest chain of at
/// most max_segments horizontal and vertical segments in S_1 X (via
/// (x, s) -> (x, s/f(x))), intermediate heights on the grid.
double bw_distance(SuspensionPoint p, SuspensionPoint q, const DynSystem& sys, const RoofFunction& roof,
                   const BwParams& params = {});

/// Pairwise chain distances for a point list, computed with unbounded chain
/// length on one shared height set (the grid plus every point's height).
/// This is a shortest-path metric, so the triangle inequality holds exactly;
/// max_segments is ignored.
MetricSample bw_distance_matrix(const std::vector<SuspensionPoint>& pts, const DynSystem& sys,
                                const RoofFunction& roof, std::size_t height_grid = 8);

/// Suspension flow restricted to a finite point set, with the Bowen-Walters
/// matrix as the metric of every snapshot.
struct SuspensionFlow {
  DynSystem sys;
  RoofFunction roof;
  std::vector<SuspensionPoint> points;
  std::size_t height_grid = 8;

  std::vector<SuspensionPoint> evolve(double t) const;
  /// FlowSystem view; snapshot(t) is the matrix of the evolved points.
  FlowSystem flow() const;
};

/// Mapping torus: roof 1 and `fiber_points` equally spaced heights on every
/// fiber.
SuspensionFlow mapping_torus(const DynSystem& sys, std::size_t fiber_points = 1, std::size_t height_grid = 8);

/// Smallest r in (0, max_time] with psi_r(p) = p, scanning the return times
/// to the base; 0 if there is none.
double flow_period(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p, double max_time);

// ---------------------------------------------------------------------------
// Solenoid

inline constexpr std::size_t kSolenoidDepth = 5;
inline constexpr double kSolenoidTol = 1e-9;

/// n! as a double (exact for the depths used here).
double factorial(std::size_t n);

/// x mod m in [0, m).
double circle_mod(double x, double m);

/// Distance on the circle R / mZ.
double circle_dist(double x, double y, double m);

/// Truncated solenoid point: coords[n-1] = x_n in [0, n!).
struct SolenoidPoint {
  std::vector<double> coords;

  std::size_t depth() const noexcept { return coords.size(); }
  double operator[](std::size_t n) const { return coords.at(n - 1); }

  /// x_{n+1} mod n! = x_n within kSolenoidTol, every x_n in [0, n!).
  bool valid() const;
  /// Throws InvariantViolation unless valid().
  void validate() const;

  /// The point (r mod 1!, r mod 2!, ..., r mod K!) on the orbit of 0.
  static SolenoidPoint from_real(double r, std::size_t depth = kSolenoidDepth);
  /// Builds a compatible point from its top coordinate x_K.
  static SolenoidPoint from_top(double top, std::size_t depth);
};

/// Translation flow: x_n + r mod n!, reduced after every operation.
SolenoidPoint solenoid_act(const SolenoidPoint& p, double r);

/// sum_n 2^{-n} circle_dist(x_n, y_n, n!) / n!: a metric on the truncated
/// solenoid bounded by 1/2.
double solenoid_distance(const SolenoidPoint& p, const SolenoidPoint& q);

}  // namespace mdim
