#include "mdim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <string>

#include "mdim/error.hpp"

namespace mdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double height_tol(double f) { return kHeightTol * std::max(1.0, f); }

void check_roof(const DynSystem& sys, const RoofFunction& roof) {
  if (roof.size() != sys.size()) throw Error(ErrorKind::InvalidArgument, "roof size does not match the system");
}

}  // namespace

RoofFunction::RoofFunction(std::vector<double> v) : values(std::move(v)) {
  if (values.empty()) throw Error(ErrorKind::InvariantViolation, "empty roof");
  f_min = kInf;
  for (double f : values) {
    if (!std::isfinite(f) || !(f > 0.0)) throw Error(ErrorKind::InvariantViolation, "roof values must be positive");
    f_min = std::min(f_min, f);
  }
}

SuspensionPoint canonical(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p) {
  check_roof(sys, roof);
  if (p.base >= sys.size()) throw Error(ErrorKind::InvariantViolation, "base state out of range");
  const double f = roof(p.base);
  const double tol = height_tol(f);
  if (!std::isfinite(p.height) || p.height < -tol || p.height > f + tol) {
    throw Error(ErrorKind::InvariantViolation, "height outside [0, f(x)]");
  }
  if (p.height >= f - tol) return {sys.step[p.base], 0.0};
  return {p.base, std::max(0.0, p.height)};
}

bool same_point(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p, SuspensionPoint q) {
  p = canonical(sys, roof, p);
  q = canonical(sys, roof, q);
  if (p.base == q.base && std::abs(p.height - q.height) <= height_tol(roof(p.base))) return true;
  // Points straddling the identification (x, f(x)) ~ (Tx, 0).
  auto straddle = [&](SuspensionPoint lo, SuspensionPoint hi) {
    return sys.step[hi.base] == lo.base && (roof(hi.base) - hi.height) + lo.height <= height_tol(roof(hi.base));
  };
  return straddle(p, q) || straddle(q, p);
}

SuspensionPoint suspend(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p, double t) {
  if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "non-finite time");
  p = canonical(sys, roof, p);
  if (t < 0.0 && !sys.invertible()) {
    throw Error(ErrorKind::UnsupportedDirection, "negative time needs an invertible base");
  }
  std::size_t x = p.base;
  double s = p.height + t;
  while (s < 0.0) {
    x = (*sys.inverse)[x];
    s += roof(x);
  }
  while (s >= roof(x) - height_tol(roof(x))) {
    s = std::max(0.0, s - roof(x));
    x = sys.step[x];
  }
  return {x, s};
}

// ---------------------------------------------------------------------------
// Bowen-Walters chains

std::vector<double> bw_levels(std::size_t height_grid) {
  if (height_grid == 0) throw Error(ErrorKind::InvalidArgument, "height_grid must be >= 1");
  std::vector<double> lv;
  for (std::size_t m = 1; m <= height_grid; ++m)
    for (std::size_t j = 0; j < m; ++j) lv.push_back(static_cast<double>(j) / static_cast<double>(m));
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  return lv;
}

namespace {

// Nodes are (state, level) pairs in S_1 X; u = x * L + i.
class ChainGraph {
 public:
  ChainGraph(const DynSystem& sys, std::vector<double> levels) : sys_(sys), lv_(std::move(levels)), pre_(sys.size()) {
    for (std::size_t x = 0; x < sys.size(); ++x) pre_[sys.step[x]].push_back(x);
  }

  std::size_t nodes() const { return sys_.size() * lv_.size(); }

  std::size_t node(std::size_t x, double level) const {
    const auto it = std::lower_bound(lv_.begin(), lv_.end(), level);
    return x * lv_.size() + static_cast<std::size_t>(it - lv_.begin());
  }

  template <class F>
  void edges(std::size_t u, F&& relax) const {
    const std::size_t L = lv_.size();
    const std::size_t x = u / L;
    const std::size_t i = u % L;
    const double l = lv_[i];
    const std::size_t tx = sys_.step[x];
    // Horizontal: (1-l) d(x,y) + l d(Tx,Ty).
    for (std::size_t y = 0; y < sys_.size(); ++y) {
      if (y == x) continue;
      relax(y * L + i, (1.0 - l) * sys_.base(x, y) + l * sys_.base(tx, sys_.step[y]));
    }
    for (std::size_t j = 0; j < L; ++j) {
      // Vertical inside the fiber, then across the roof in both directions.
      if (j != i) relax(x * L + j, std::abs(lv_[j] - l));
      relax(tx * L + j, (1.0 - l) + lv_[j]);
      for (std::size_t w : pre_[x]) relax(w * L + j, (1.0 - lv_[j]) + l);
    }
  }

  // Shortest distances from src using at most `segments` edges.
  std::vector<double> bounded(std::size_t src, std::size_t segments) const {
    std::vector<double> cur(nodes(), kInf);
    cur[src] = 0.0;
    for (std::size_t k = 0; k < segments; ++k) {
      std::vector<double> next = cur;
      for (std::size_t u = 0; u < cur.size(); ++u) {
        if (cur[u] == kInf) continue;
        const double du = cur[u];
        edges(u, [&](std::size_t v, double w) { next[v] = std::min(next[v], du + w); });
      }
      cur.swap(next);
    }
    return cur;
  }

  std::vector<double> dijkstra(std::size_t src) const {
    std::vector<double> dist(nodes(), kInf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (du > dist[u]) continue;
      edges(u, [&](std::size_t v, double w) {
        if (du + w < dist[v]) {
          dist[v] = du + w;
          pq.push({dist[v], v});
        }
      });
    }
    return dist;
  }

 private:
  const DynSystem& sys_;
  std::vector<double> lv_;
  std::vector<std::vector<std::size_t>> pre_;
};

// Canonical point mapped to S_1 X.
SuspensionPoint normalized(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p) {
  p = canonical(sys, roof, p);
  return {p.base, p.height / roof(p.base)};
}

std::vector<double> merged_levels(std::size_t height_grid, const std::vector<SuspensionPoint>& pts) {
  std::vector<double> lv = bw_levels(height_grid);
  for (const auto& p : pts) lv.push_back(p.height);
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  return lv;
}

}  // namespace

double bw_distance(SuspensionPoint p, SuspensionPoint q, const DynSystem& sys, const RoofFunction& roof,
                   const BwParams& params) {
  if (params.max_segments == 1) throw Error(ErrorKind::InvalidArgument, "max_segments must be >= 2");
  const SuspensionPoint a = normalized(sys, roof, p);
  const SuspensionPoint b = normalized(sys, roof, q);
  if (a.base == b.base && a.height == b.height) return 0.0;
  const ChainGraph g(sys, merged_levels(params.height_grid, {a, b}));
  const std::size_t src = g.node(a.base, a.height);
  const auto dist = params.max_segments == 0 ? g.dijkstra(src) : g.bounded(src, params.max_segments);
  return dist[g.node(b.base, b.height)];
}

MetricSample bw_distance_matrix(const std::vector<SuspensionPoint>& pts, const DynSystem& sys,
                                const RoofFunction& roof, std::size_t height_grid) {
  std::vector<SuspensionPoint> norm;
  norm.reserve(pts.size());
  for (const auto& p : pts) norm.push_back(normalized(sys, roof, p));
  const ChainGraph g(sys, merged_levels(height_grid, norm));
  const std::size_t n = pts.size();
  std::vector<double> table(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dist = g.dijkstra(g.node(norm[i].base, norm[i].height));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist[g.node(norm[j].base, norm[j].height)];
      if (d == kInf) throw Error(ErrorKind::Numerical, "points in different chain components");
      table[i * n + j] = table[j * n + i] = d;
    }
  }
  return MetricSample(n, std::move(table), MetricSample::Check::Structural);
}

std::vector<SuspensionPoint> SuspensionFlow::evolve(double t) const {
  std::vector<SuspensionPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(suspend(sys, roof, p, t));
  return out;
}

FlowSystem SuspensionFlow::flow() const {
  auto self = std::make_shared<const SuspensionFlow>(*this);
  return FlowSystem{points.size(), [self](double t) {
                      return bw_distance_matrix(self->evolve(t), self->sys, self->roof, self->height_grid);
                    }};
}

SuspensionFlow mapping_torus(const DynSystem& sys, std::size_t fiber_points, std::size_t height_grid) {
  if (fiber_points == 0) throw Error(ErrorKind::InvalidArgument, "fiber_points must be >= 1");
  SuspensionFlow out{sys, RoofFunction::constant(sys.size(), 1.0), {}, height_grid};
  for (std::size_t x = 0; x < sys.size(); ++x)
    for (std::size_t j = 0; j < fiber_points; ++j)
      out.points.push_back({x, static_cast<double>(j) / static_cast<double>(fiber_points)});
  return out;
}

double flow_period(const DynSystem& sys, const RoofFunction& roof, SuspensionPoint p, double max_time) {
  p = canonical(sys, roof, p);
  double r = 0.0;
  std::size_t x = p.base;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    r += roof(x);
    x = sys.step[x];
    if (r > max_time + height_tol(max_time)) return 0.0;
    if (x == p.base) return r;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Solenoid

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

double circle_mod(double x, double m) {
  double r = std::fmod(x, m);
  if (r < 0.0) r += m;
  if (r >= m) r = 0.0;
  return r;
}

double circle_dist(double x, double y, double m) {
  const double d = circle_mod(x - y, m);
  return std::min(d, m - d);
}

bool SolenoidPoint::valid() const {
  if (coords.empty()) return false;
  for (std::size_t n = 1; n <= coords.size(); ++n) {
    const double x = coords[n - 1];
    if (!std::isfinite(x) || x < 0.0 || x >= factorial(n)) return false;
    if (n > 1 && circle_dist(circle_mod(x, factorial(n - 1)), coords[n - 2], factorial(n - 1)) > kSolenoidTol) {
      return false;
    }
  }
  return true;
}

void SolenoidPoint::validate() const {
  if (!valid()) throw Error(ErrorKind::InvariantViolation, "incompatible solenoid coordinates");
}

SolenoidPoint SolenoidPoint::from_top(double top, std::size_t depth) {
  if (depth == 0) throw Error(ErrorKind::InvalidArgument, "solenoid depth must be >= 1");
  SolenoidPoint p;
  p.coords.resize(depth);
  const double xk = circle_mod(top, factorial(depth));
  for (std::size_t n = 1; n <= depth; ++n) p.coords[n - 1] = circle_mod(xk, factorial(n));
  return p;
}

SolenoidPoint SolenoidPoint::from_real(double r, std::size_t depth) { return from_top(r, depth); }

SolenoidPoint solenoid_act(const SolenoidPoint& p, double r) {
  p.validate();
  if (!std::isfinite(r)) throw Error(ErrorKind::InvalidArgument, "non-finite time");
  SolenoidPoint out = p;
  for (std::size_t n = 1; n <= p.depth(); ++n) {
    const double m = factorial(n);
    out.coords[n - 1] = circle_mod(p.coords[n - 1] + circle_mod(r, m), m);
  }
  return out;
}

double solenoid_distance(const SolenoidPoint& p, const SolenoidPoint& q) {
  if (p.depth() != q.depth()) throw Error(ErrorKind::InvalidArgument, "solenoid depths differ");
  double d = 0.0;
  double w = 0.5;
  for (std::size_t n = 1; n <= p.depth(); ++n, w *= 0.5) {
    const double m = factorial(n);
    d += w * circle_dist(p.coords[n - 1], q.coords[n - 1], m) / m;
  }
  return d;
}

}  // namespace mdim
