#include "mdim/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mdim/error.hpp"

namespace mdim {

namespace {

// Relative slack for strict scale comparisons, so that distances equal up to
// rounding fall on the same side of a threshold.
constexpr double kScaleSlack = 1e-12;

bool strictly_below(double d, double bound) { return d < bound - kScaleSlack * std::max(1.0, bound); }
bool at_most(double d, double bound) { return d <= bound + kScaleSlack * std::max(1.0, bound); }

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// MetricSample

MetricSample::MetricSample(std::size_t n, std::vector<double> dist, Check check)
    : n_(n), dist_(std::move(dist)) {
  if (dist_.size() != n_ * n_) {
    throw Error(ErrorKind::InvalidArgument, "distance table is not n*n");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (dist_[i * n_ + i] != 0.0) {
      throw Error(ErrorKind::InvariantViolation, "nonzero diagonal at " + std::to_string(i));
    }
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = dist_[i * n_ + j];
      const double b = dist_[j * n_ + i];
      if (!std::isfinite(a) || a < 0.0) {
        throw Error(ErrorKind::InvariantViolation, "negative or non-finite distance");
      }
      if (a != b) throw Error(ErrorKind::InvariantViolation, "asymmetric distance table");
    }
  }
  if (check == Check::Full && n_ <= kTriangleCheckLimit) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k)
          if (dist_[i * n_ + k] > dist_[i * n_ + j] + dist_[j * n_ + k] + kTriangleTol) {
            std::ostringstream os;
            os << "triangle inequality fails at (" << i << "," << j << "," << k << ")";
            throw Error(ErrorKind::InvariantViolation, os.str());
          }
  }
}

MetricSample MetricSample::from_function(std::size_t n,
                                         const std::function<double(std::size_t, std::size_t)>& d,
                                         Check check) {
  std::vector<double> t(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) t[i * n + j] = t[j * n + i] = d(i, j);
  return MetricSample(n, std::move(t), check);
}

MetricSample MetricSample::from_points_sup(const std::vector<std::vector<double>>& pts) {
  return from_function(
      pts.size(),
      [&](std::size_t i, std::size_t j) {
        double m = 0.0;
        for (std::size_t k = 0; k < pts[i].size(); ++k) m = std::max(m, std::abs(pts[i][k] - pts[j][k]));
        return m;
      },
      Check::Structural);
}

double MetricSample::diameter() const noexcept {
  double m = 0.0;
  for (double v : dist_) m = std::max(m, v);
  return m;
}

double MetricSample::sampling_resolution() const {
  if (!sampling_resolution_) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_; ++j) {
        const double d = (*this)(i, j);
        if (j != i && d > 0.0) nearest = std::min(nearest, d);
      }
      if (std::isfinite(nearest)) worst = std::max(worst, nearest);
    }
    sampling_resolution_ = worst;
  }
  return *sampling_resolution_;
}

double MetricSample::resolution() const { return resolution_ ? *resolution_ : sampling_resolution(); }

MetricSample& MetricSample::set_resolution(double h) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw Error(ErrorKind::InvalidArgument, "resolution must be >= 0");
  resolution_ = h;
  return *this;
}

MetricSample MetricSample::collapse_duplicates(std::vector<std::size_t>* classes) const {
  std::vector<std::size_t> rep(n_);
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n_; ++i) {
    rep[i] = reps.size();
    for (std::size_t r = 0; r < reps.size(); ++r)
      if ((*this)(i, reps[r]) == 0.0) {
        rep[i] = r;
        break;
      }
    if (rep[i] == reps.size()) reps.push_back(i);
  }
  const std::size_t m = reps.size();
  std::vector<double> t(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) t[a * m + b] = (*this)(reps[a], reps[b]);
  if (classes) *classes = std::move(rep);
  MetricSample out(m, std::move(t), Check::Structural);
  if (resolution_) out.resolution_ = resolution_;
  return out;
}

MetricSample MetricSample::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw Error(ErrorKind::InvalidArgument, "permutation size mismatch");
  std::vector<double> t(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t[i * n_ + j] = (*this)(perm[i], perm[j]);
  MetricSample out(n_, std::move(t), Check::Structural);
  out.resolution_ = resolution_;
  return out;
}

// ---------------------------------------------------------------------------
// Systems and orbit metrics

DynSystem::DynSystem(MetricSample b, std::vector<std::size_t> s) : base(std::move(b)), step(std::move(s)) {
  const std::size_t n = base.size();
  if (step.size() != n) throw Error(ErrorKind::InvalidArgument, "step table size differs from sample size");
  std::vector<std::size_t> inv(n, n);
  bool bijective = true;
  for (std::size_t x = 0; x < n; ++x) {
    if (step[x] >= n) throw Error(ErrorKind::InvalidArgument, "step maps outside the sample");
    if (inv[step[x]] != n) bijective = false;
    inv[step[x]] = x;
  }
  if (bijective) inverse = std::move(inv);
}

std::size_t DynSystem::iterate(std::size_t x, long long k) const {
  if (k < 0 && !inverse) throw Error(ErrorKind::UnsupportedDirection, "negative iterate of a non-invertible map");
  const auto& table = k < 0 ? *inverse : step;
  for (long long i = 0; i < std::llabs(k); ++i) x = table[x];
  return x;
}

void OrbitMetricSpec::validate() const {
  if (kind == Kind::ZWindow) {
    if (!(horizon >= 1.0) || horizon != std::floor(horizon)) {
      throw Error(ErrorKind::InvalidHorizon, "Z window needs an integer horizon >= 1");
    }
    return;
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::InvalidHorizon, "R window needs horizon >= 0");
  if (time_step < 0.0 || (horizon > 0.0 && time_step > horizon)) {
    throw Error(ErrorKind::InvalidHorizon, "time step must satisfy 0 < dt <= R");
  }
}

MetricSample orbit_metric_window(const DynSystem& sys, long long first, long long last) {
  if (last < first) throw Error(ErrorKind::InvalidHorizon, "empty window");
  const std::size_t n = sys.size();
  std::vector<std::size_t> pos(n);
  for (std::size_t x = 0; x < n; ++x) pos[x] = sys.iterate(x, first);
  std::vector<double> t(n * n, 0.0);
  for (long long k = first; k <= last; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = sys.base(pos[i], pos[j]);
        if (d > t[i * n + j]) t[i * n + j] = t[j * n + i] = d;
      }
    if (k < last)
      for (auto& p : pos) p = sys.step[p];
  }
  MetricSample out(n, std::move(t), MetricSample::Check::Structural);
  if (sys.base.has_resolution_override()) out.set_resolution(sys.base.resolution());
  return out;
}

MetricSample orbit_metric_Z(const DynSystem& sys, std::size_t N) {
  if (N == 0) throw Error(ErrorKind::InvalidHorizon, "N must be >= 1");
  return orbit_metric_window(sys, 0, static_cast<long long>(N) - 1);
}

MetricSample orbit_metric_R(const FlowSystem& flow, const OrbitMetricSpec& spec) {
  if (spec.kind != OrbitMetricSpec::Kind::RWindow) throw Error(ErrorKind::InvalidArgument, "expected an R window");
  spec.validate();
  const double R = spec.horizon;
  const double dt = spec.time_step > 0.0 ? spec.time_step : R / 256.0;
  std::vector<double> times{0.0};
  if (R > 0.0) {
    const auto steps = static_cast<std::size_t>(std::floor(R / dt + 1e-9));
    for (std::size_t k = 1; k <= steps; ++k) times.push_back(std::min(R, static_cast<double>(k) * dt));
    if (times.back() < R) times.push_back(R);
  }
  const std::size_t n = flow.size;
  std::vector<double> t(n * n, 0.0);
  for (double r : times) {
    const MetricSample snap = flow.snapshot(r);
    if (snap.size() != n) throw Error(ErrorKind::Numerical, "flow snapshot changed size");
    for (std::size_t k = 0; k < n * n; ++k) {
      if (!std::isfinite(snap.table()[k])) throw Error(ErrorKind::Numerical, "non-finite evolution");
      t[k] = std::max(t[k], snap.table()[k]);
    }
  }
  return MetricSample(n, std::move(t), MetricSample::Check::Structural);
}

// ---------------------------------------------------------------------------
// Covers and the Widim estimator

CoverNerve build_cover(const MetricSample& s, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  CoverNerve out;
  out.scale = eps;
  const std::size_t n = s.size();
  if (n == 0) return out;
  const double h = s.resolution();
  out.lebesgue_number = h;

  // h-neighbourhoods: a cover has Lebesgue number h when each of these lies
  // inside one cover element.
  std::vector<std::vector<std::size_t>> near(n);
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (at_most(s(i, j), h)) {
        near[i].push_back(j);
        uf.unite(i, j);
      }

  std::vector<std::vector<std::size_t>> components;
  {
    std::vector<std::size_t> slot(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = uf.find(i);
      if (slot[r] == n) {
        slot[r] = components.size();
        components.emplace_back();
      }
      components[slot[r]].push_back(i);
    }
  }

  const double radius = eps / 2.0;
  std::vector<std::size_t> multiplicity(n, 0);
  std::vector<std::size_t> owner(n);  // set index within the current colour
  std::vector<char> safe(n, 0);

  for (const auto& comp : components) {
    double diam = 0.0;
    for (std::size_t a : comp)
      for (std::size_t b : comp) diam = std::max(diam, s(a, b));
    if (strictly_below(diam, eps)) {
      out.cover.push_back(comp);
      for (std::size_t p : comp) ++multiplicity[p];
      continue;
    }
    if (!strictly_below(h, radius)) {
      out.unresolved = true;
      out.nerve_dim = n - 1;
      return out;
    }
    std::size_t remaining = comp.size();
    const std::size_t kNone = std::numeric_limits<std::size_t>::max();
    while (remaining > 0) {
      for (std::size_t p : comp) owner[p] = kNone;
      for (std::size_t p : comp) {
        if (safe[p]) continue;
        bool qualifies = true;
        for (std::size_t q : near[p])
          if (owner[q] != kNone) {
            qualifies = false;
            break;
          }
        if (!qualifies) continue;
        std::vector<std::size_t> U;
        for (std::size_t q : comp)
          if (owner[q] == kNone && strictly_below(s(p, q), radius)) U.push_back(q);
        const std::size_t id = out.cover.size();
        for (std::size_t q : U) {
          owner[q] = id;
          ++multiplicity[q];
        }
        for (std::size_t q : U) {
          if (safe[q]) continue;
          bool inside = true;
          for (std::size_t r : near[q])
            if (owner[r] != id) {
              inside = false;
              break;
            }
          if (inside) {
            safe[q] = 1;
            --remaining;
          }
        }
        out.cover.push_back(std::move(U));
      }
    }
  }
  out.nerve_dim = *std::max_element(multiplicity.begin(), multiplicity.end()) - 1;
  return out;
}

std::size_t widim_upper(const MetricSample& s, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  const std::size_t n = s.size();
  if (n <= 1) return 0;
  // The construction only changes where eps crosses a distance, twice a
  // distance, or twice the resolution; evaluating at each such breakpoint
  // below eps covers every distinct cover of mesh < eps it can produce.
  std::vector<double> breaks;
  breaks.reserve(n * (n - 1) + 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = s(i, j);
      if (d > 0.0 && d < eps) breaks.push_back(d);
      if (d > 0.0 && 2.0 * d < eps) breaks.push_back(2.0 * d);
    }
  const double h2 = 2.0 * s.resolution();
  if (h2 > 0.0 && h2 < eps) breaks.push_back(h2);
  breaks.push_back(eps);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> scales;
  for (double b : breaks)
    if (scales.empty() || b - scales.back() > kScaleSlack * std::max(1.0, b)) scales.push_back(b);
  if (scales.back() < eps) scales.push_back(eps);

  // Points are visited in orders read off the metric alone (ids only break
  // ties between identical distance rows), so relabelling the sample does not
  // change the estimate. Two orders from the most eccentric point: a sweep by
  // distance from it, and a nearest-neighbour chain.
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].assign(s.row(i).begin(), s.row(i).end());
    std::sort(rows[i].begin(), rows[i].end());
  }
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (rows[start] < rows[i]) start = i;
  auto before = [&](std::size_t a, std::size_t b) {
    if (s(start, a) != s(start, b)) return s(start, a) < s(start, b);
    if (rows[a] != rows[b]) return rows[a] < rows[b];
    return a < b;
  };
  std::vector<std::size_t> sweep(n);
  std::iota(sweep.begin(), sweep.end(), 0);
  std::sort(sweep.begin(), sweep.end(), before);
  std::vector<std::size_t> chain{start};
  {
    std::vector<char> used(n, 0);
    used[start] = 1;
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t last = chain.back();
      std::size_t next = n;
      for (std::size_t q = 0; q < n; ++q) {
        if (used[q]) continue;
        if (next == n || s(last, q) < s(last, next) || (s(last, q) == s(last, next) && before(q, next))) next = q;
      }
      used[next] = 1;
      chain.push_back(next);
    }
  }

  std::size_t best = n - 1;
  for (const auto* order : {&sweep, &chain}) {
    MetricSample c_sample = s.permuted(*order);
    c_sample.set_resolution(s.resolution());
    for (auto it = scales.rbegin(); it != scales.rend() && best > 0; ++it) {
      const CoverNerve c = build_cover(c_sample, *it);
      best = std::min(best, c.nerve_dim);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Spanning numbers

namespace {

// Largest-coverage greedy over balls given as prefixes of the sorted
// neighbour lists: ball[i] = near[i][0 .. len[i]).
std::vector<std::size_t> greedy_cover(const std::vector<std::vector<std::pair<double, std::size_t>>>& near,
                                      const std::vector<std::size_t>& len) {
  const std::size_t n = near.size();
  std::vector<std::size_t> gain(len);
  std::vector<char> covered(n, 0);
  std::vector<std::size_t> centers;
  std::size_t left = n;
  while (left > 0) {
    std::size_t c = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (gain[i] > gain[c]) c = i;
    centers.push_back(c);
    for (std::size_t k = 0; k < len[c]; ++k) {
      const std::size_t q = near[c][k].second;
      if (covered[q]) continue;
      covered[q] = 1;
      --left;
      // Balls are symmetric: r covers q iff q covers r.
      for (std::size_t m = 0; m < len[q]; ++m) --gain[near[q][m].second];
    }
  }
  return centers;
}

}  // namespace

SpanningResult spanning_number(const MetricSample& s, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  SpanningResult out;
  const std::size_t n = s.size();
  if (n == 0) return out;
  std::vector<std::vector<std::pair<double, std::size_t>>> near(n);
  std::vector<double> scales;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (at_most(s(i, j), eps)) near[i].emplace_back(s(i, j), j);
    std::sort(near[i].begin(), near[i].end());
    for (const auto& [d, j] : near[i])
      if (d < eps) scales.push_back(d);
  }
  std::sort(scales.begin(), scales.end(), std::greater<>());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  if (scales.size() > kSpanningScales) scales.resize(kSpanningScales);

  std::vector<std::size_t> len(n);
  for (std::size_t i = 0; i < n; ++i) len[i] = near[i].size();
  out.centers = greedy_cover(near, len);
  // A cover by smaller balls also covers at eps; keeping the best one makes
  // the count antitone in eps.
  for (double d : scales) {
    if (out.centers.size() == 1) break;
    for (std::size_t i = 0; i < n; ++i)
      while (len[i] > 0 && near[i][len[i] - 1].first > d) --len[i];
    auto c = greedy_cover(near, len);
    if (c.size() < out.centers.size()) out.centers = std::move(c);
  }
  out.count = out.centers.size();
  return out;
}

SpanningResult spanning_number_exact(const MetricSample& s, double eps, std::size_t max_points) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  const std::size_t n = s.size();
  if (n > max_points || n > 24) {
    throw Error(ErrorKind::InvalidArgument, "exact spanning number limited to " + std::to_string(max_points) + " points");
  }
  SpanningResult out;
  out.exact = true;
  if (n == 0) return out;
  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (at_most(s(i, j), eps)) ball[i] |= std::uint32_t{1} << j;
  const std::uint32_t all = n == 32 ? ~0u : ((std::uint32_t{1} << n) - 1);
  std::uint32_t best = all;
  int best_size = static_cast<int>(n);
  for (std::uint32_t subset = 1; subset <= all; ++subset) {
    const int k = std::popcount(subset);
    if (k >= best_size) continue;
    std::uint32_t cov = 0;
    for (std::uint32_t rest = subset; rest; rest &= rest - 1) cov |= ball[std::countr_zero(rest)];
    if (cov == all) {
      best = subset;
      best_size = k;
    }
  }
  for (std::uint32_t rest = best; rest; rest &= rest - 1) out.centers.push_back(std::countr_zero(rest));
  out.count = out.centers.size();
  return out;
}

// ---------------------------------------------------------------------------
// Window sources

WindowSource window_source(const DynSystem& sys) {
  return WindowSource{
      [n = sys.size()](std::size_t) { return n; },
      [s = std::make_shared<const DynSystem>(sys)](std::size_t N) { return orbit_metric_Z(*s, N); },
      1,
  };
}

std::size_t ShiftSpace::word_count(std::size_t k) const {
  const std::size_t L = word_length(k);
  const double approx = std::pow(static_cast<double>(alphabet.size()), static_cast<double>(L));
  if (approx > 1e15) return std::numeric_limits<std::size_t>::max();
  std::size_t c = 1;
  for (std::size_t i = 0; i < L; ++i) c *= alphabet.size();
  return c;
}

MetricSample ShiftSpace::atom_sample(std::size_t N) const {
  if (N == 0) throw Error(ErrorKind::InvalidHorizon, "N must be >= 1");
  if (weights.size() != memory + 1) throw Error(ErrorKind::InvalidArgument, "need memory+1 weights");
  if (factors == 0) throw Error(ErrorKind::InvalidArgument, "factors must be >= 1");
  if (factors > 1 && memory != 0) throw Error(ErrorKind::InvalidArgument, "product letters need memory 0");
  const std::size_t A = alphabet.size();
  const std::size_t L = word_length(N);
  const std::size_t count = word_count(N);
  if (count > (std::size_t{1} << 16)) throw Error(ErrorKind::InvalidArgument, "window sample too large");
  std::vector<std::uint16_t> words(count * L);
  for (std::size_t w = 0; w < count; ++w) {
    std::size_t code = w;
    for (std::size_t p = L; p-- > 0;) {
      words[w * L + p] = static_cast<std::uint16_t>(code % A);
      code /= A;
    }
  }
  const auto m = static_cast<long long>(memory);
  auto dist = [&](std::size_t u, std::size_t v) {
    const std::uint16_t* a = &words[u * L];
    const std::uint16_t* b = &words[v * L];
    double worst = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      double acc = 0.0;
      for (long long i = -m; i <= m; ++i) {
        const std::size_t p = n + static_cast<std::size_t>(i + m);
        acc += weights[static_cast<std::size_t>(std::llabs(i))] * alphabet(a[p], b[p]);
      }
      worst = std::max(worst, acc);
    }
    return worst;
  };
  MetricSample out = MetricSample::from_function(count, dist, MetricSample::Check::Structural);
  if (alphabet.has_resolution_override()) out.set_resolution(alphabet.resolution());
  return out;
}

WindowSource window_source(const ShiftSpace& shift) {
  auto s = std::make_shared<const ShiftSpace>(shift);
  return WindowSource{
      [s](std::size_t k) { return s->word_count(k); },
      [s](std::size_t k) { return s->atom_sample(k); },
      shift.factors,
  };
}

// ---------------------------------------------------------------------------
// Tables

std::vector<WidimEstimate> widim_windows(const WindowSource& src, double eps, std::size_t N_max,
                                         const MdimOptions& opt) {
  if (src.atoms_per_step == 0) throw Error(ErrorKind::InvalidArgument, "atoms_per_step must be >= 1");
  const std::size_t K = N_max * src.atoms_per_step;
  std::vector<WidimEstimate> W(K + 1);
  for (std::size_t N = 1; N <= K; ++N) {
    WidimEstimate best{std::numeric_limits<std::size_t>::max(), 0};
    const std::size_t size = src.size(N);
    if (size <= opt.direct_limit) {
      best.value = widim_upper(src.sample(N), eps);
    }
    for (std::size_t A = 1; A < N; ++A) {
      const std::size_t v = W[A].value + W[N - A].value;
      if (v < best.value) best = {v, A};
    }
    if (best.value == std::numeric_limits<std::size_t>::max()) {
      // Window 1 too large to cover directly: only the trivial bound remains.
      best.value = size == std::numeric_limits<std::size_t>::max() ? size : size - 1;
    }
    W[N] = best;
  }
  return W;
}

namespace {

void check_sorted_nonempty(std::span<const double> eps_list, std::span<const std::size_t> N_list) {
  if (eps_list.empty() || N_list.empty()) throw Error(ErrorKind::InvalidArgument, "empty parameter list");
  if (!std::is_sorted(eps_list.begin(), eps_list.end()) || !std::is_sorted(N_list.begin(), N_list.end())) {
    throw Error(ErrorKind::InvalidArgument, "parameter lists must be sorted");
  }
  for (double e : eps_list)
    if (!(e > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  if (N_list.front() == 0) throw Error(ErrorKind::InvalidHorizon, "N must be >= 1");
}

}  // namespace

Table mdim_table(const WindowSource& src, std::span<const double> eps_list,
                 std::span<const std::size_t> N_list, const MdimOptions& opt) {
  check_sorted_nonempty(eps_list, N_list);
  Table t;
  std::vector<std::vector<std::size_t>> raw(eps_list.size());
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const auto W = widim_windows(src, eps_list[e], N_list.back(), opt);
    for (std::size_t N : N_list) {
      const std::size_t k = N * src.atoms_per_step;
      TableRow row{eps_list[e], N, static_cast<double>(W[k].value) / static_cast<double>(N), W[k].value,
                   W[k].split == 0 ? "upper-estimate:direct"
                                   : "upper-estimate:split " + std::to_string(W[k].split) + "+" +
                                         std::to_string(k - W[k].split)};
      t.rows.push_back(std::move(row));
      raw[e].push_back(W[k].value);
    }
  }
  for (std::size_t e = 1; e < eps_list.size(); ++e)
    for (std::size_t k = 0; k < N_list.size(); ++k)
      if (raw[e][k] > raw[e - 1][k]) {
        std::ostringstream os;
        os << "not antitone in eps at N=" << N_list[k] << ": " << raw[e - 1][k] << " at eps=" << eps_list[e - 1]
           << " < " << raw[e][k] << " at eps=" << eps_list[e];
        t.diagnostics.push_back(os.str());
      }
  return t;
}

Table metric_mdim_table(const WindowSource& src, std::span<const double> eps_list,
                        std::span<const std::size_t> n_list) {
  check_sorted_nonempty(eps_list, n_list);
  for (double e : eps_list)
    if (e >= 1.0) throw Error(ErrorKind::InvalidArgument, "metric mean dimension needs eps < 1");
  Table t;
  for (std::size_t n : n_list) {
    const MetricSample s = src.sample(n * src.atoms_per_step);
    std::size_t prev = 0;
    for (std::size_t e = eps_list.size(); e-- > 0;) {
      const auto A = spanning_number(s, eps_list[e]).count;
      const double v = A == 0 ? 0.0 : std::log(static_cast<double>(A)) /
                                           (static_cast<double>(n) * std::abs(std::log(eps_list[e])));
      t.rows.push_back({eps_list[e], n, v, A, "greedy-spanning"});
      if (A < prev) t.diagnostics.push_back("spanning number not antitone at n=" + std::to_string(n));
      prev = A;
    }
  }
  std::sort(t.rows.begin(), t.rows.end(), [](const TableRow& a, const TableRow& b) {
    return a.epsilon != b.epsilon ? a.epsilon < b.epsilon : a.N < b.N;
  });
  return t;
}

void Table::write_csv(std::ostream& os) const {
  os << "epsilon,N,value\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g\n", r.epsilon, r.N, r.value);
    os << buf;
  }
}

}  // namespace mdim
