// mdim: experiment runner. One subcommand per experiment; parameters come
// from a flat key=value file (--config) with command-line flags on top.
//
// Exit codes: 0 all checks passed, 1 a contract check failed (a diagnostic
// report is still written), 2 usage or configuration error.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdim/bandlimited.hpp"
#include "mdim/dynamics.hpp"
#include "mdim/embedding.hpp"
#include "mdim/error.hpp"
#include "mdim/kernel.hpp"
#include "mdim/metric.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mdim;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Output {
  json report;
  bool pass = true;
  // (suffix, contents); written as <subcommand>-<hash><suffix>.
  std::vector<std::pair<std::string, std::string>> files;
};

// A subcommand: options are registered on `app`, `config` serialises the
// final parameters (hashed for file names), `prepare` validates them and
// returns the computation.
struct Command {
  CLI::App* app = nullptr;
  std::function<json()> config;
  std::function<std::function<Output()>()> prepare;
};

std::string sha256_hex(const std::string& s) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(s.data(), s.size(), md, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* key) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream is(item);
    T v;
    if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError(std::string("bad list entry for ") + key + ": " + item);
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string("empty list for ") + key);
  return out;
}

// "p/q", an integer, or a decimal with at most 6 places.
std::pair<std::int64_t, std::int64_t> parse_rho(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t u = 0, v = 0;
      const long long p = std::stoll(s.substr(0, slash), &u);
      const long long q = std::stoll(s.substr(slash + 1), &v);
      if (u != slash || v != s.size() - slash - 1) throw UsageError("");
      return {p, q};
    }
    std::size_t u = 0;
    const double x = std::stod(s, &u);
    if (u != s.size()) throw UsageError("");
    const auto p = static_cast<std::int64_t>(std::llround(x * 1e6));
    if (std::abs(static_cast<double>(p) - x * 1e6) > 1e-6) throw UsageError("");
    const std::int64_t g = std::gcd(p, std::int64_t{1000000});
    return {p / g, 1000000 / g};
  } catch (const std::exception&) {
    throw UsageError("rho must be p/q, an integer or a short decimal: " + s);
  }
}

// Flat key=value lines, '#' comments, blank lines ignored.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (kv.empty()) throw UsageError("config file " + path + " has no parameters");
  return kv;
}

std::string file_digest(const std::string& path) {
  if (path.empty()) return "";
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// System manifest: {"points": [[...], ...], "metric": "sup" | "euclidean"}
// or {"distances": [[...], ...]}, plus "step": [...] and optional "roof".
struct LoadedSystem {
  DynSystem sys;
  std::optional<std::vector<double>> roof;
};

LoadedSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read system file " + path);
  json j;
  try {
    j = json::parse(in);
    std::optional<MetricSample> base;
    if (j.contains("distances")) {
      const auto rows = j.at("distances").get<std::vector<std::vector<double>>>();
      std::vector<double> flat;
      for (const auto& r : rows) {
        if (r.size() != rows.size()) throw UsageError("distance matrix must be square");
        flat.insert(flat.end(), r.begin(), r.end());
      }
      base.emplace(rows.size(), std::move(flat));
    } else {
      const auto pts = j.at("points").get<std::vector<std::vector<double>>>();
      const std::string kind = j.value("metric", "sup");
      if (kind == "sup") {
        base = MetricSample::from_points_sup(pts);
      } else if (kind == "euclidean") {
        base = MetricSample::from_function(pts.size(), [&](std::size_t a, std::size_t b) {
          double s = 0.0;
          for (std::size_t k = 0; k < pts[a].size(); ++k) s += (pts[a][k] - pts[b][k]) * (pts[a][k] - pts[b][k]);
          return std::sqrt(s);
        });
      } else {
        throw UsageError("metric must be sup or euclidean");
      }
    }
    std::vector<std::size_t> step;
    if (j.contains("step")) {
      step = j.at("step").get<std::vector<std::size_t>>();
    } else {
      step.resize(base->size());
      std::iota(step.begin(), step.end(), 0);
    }
    LoadedSystem out{DynSystem(std::move(*base), std::move(step)), std::nullopt};
    if (j.contains("roof")) out.roof = j.at("roof").get<std::vector<double>>();
    return out;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// kernel-report

Command kernel_report(CLI::App& root) {
  struct P {
    double a = 0.0, b = 2.0, tau = 0.5, delta = 0.2, window = 200.0, grid = 1.0 / 16.0;
    std::string rho = "1";
    std::size_t N = 2, K = 1000, zeros = 50;
  };
  auto p = std::make_shared<P>();
  Command c;
  c.app = root.add_subcommand("kernel-report", "Interpolation kernel identities and certified constants");
  c.app->add_option("--a", p->a, "band start")->capture_default_str();
  c.app->add_option("--b", p->b, "band end")->capture_default_str();
  c.app->add_option("--rho", p->rho, "lattice density p/q")->capture_default_str();
  c.app->add_option("--tau", p->tau, "bump width")->capture_default_str();
  c.app->add_option("--delta", p->delta)->capture_default_str();
  c.app->add_option("--window", p->window, "kernel window W")->capture_default_str();
  c.app->add_option("--grid", p->grid, "grid step")->capture_default_str();
  c.app->add_option("--N", p->N, "lattice depth")->capture_default_str();
  c.app->add_option("--K", p->K, "product truncation")->capture_default_str();
  c.app->add_option("--zeros", p->zeros, "check phi(k/rho) for 0 < |k| <= zeros")->capture_default_str();
  c.config = [p] {
    return json{{"a", p->a},         {"b", p->b},         {"rho", p->rho},   {"tau", p->tau}, {"delta", p->delta},
                {"window", p->window}, {"grid", p->grid}, {"N", p->N},       {"K", p->K},     {"zeros", p->zeros}};
  };
  c.prepare = [p] {
    const auto [rp, rq] = parse_rho(p->rho);
    const Lattice lat(rp, rq, p->N);
    const KernelSpec ks{Band(p->a, p->b), lat.rho(), p->tau, p->K, p->window, p->grid};
    ks.validate();
    if (!(p->delta > 0.0 && p->delta < 1.0)) throw UsageError("delta must be in (0, 1)");
    return std::function<Output()>([p, lat, ks] {
      Output out;
      const cplx phi0 = interpolation_kernel(0.0, ks);
      double zero_max = 0.0;
      std::size_t nonzero = 0;
      for (long long k = -static_cast<long long>(p->zeros); k <= static_cast<long long>(p->zeros); ++k) {
        if (k == 0) continue;
        const double v = std::abs(interpolation_kernel(lat.node(k), ks));
        zero_max = std::max(zero_max, v);
        if (v != 0.0) ++nonzero;
      }
      json hy = json::array();
      std::size_t h_viol = 0;
      for (double y : {1.0, 5.0, 10.0}) {
        const double v = std::abs(bump_transform(cplx(0.0, y), ks.tau).value);
        const double bound = std::exp(std::numbers::pi * ks.tau * y);
        if (!(v <= bound)) ++h_viol;
        hy.push_back({{"y", y}, {"abs_h", v}, {"bound", bound}});
      }
      double trunc_err = 0.0, trunc_ratio = 0.0;
      std::size_t trunc_viol = 0;
      for (int i = 0; i <= 2000; ++i) {
        const double z = -10.0 + 0.01 * i;
        const ProductValue t = product_truncated(z, ks.rho, ks.K_trunc);
        const double e = std::abs(t.value - product_function(z, ks.rho));
        trunc_err = std::max(trunc_err, e);
        if (t.bound > 0.0) trunc_ratio = std::max(trunc_ratio, e / t.bound);
        if (!(e <= t.bound)) ++trunc_viol;
      }
      const GrowthAudit ga = growth_audit(lat);
      const KernelConstants kc = certify_constants(ks, p->delta);
      const Signal phi = kernel_signal(ks);
      const double leak = band_support_check(phi, 8.0 / ks.window);

      const bool ok_phi0 = std::abs(phi0 - cplx(1.0)) <= 1e-9;
      const bool ok_leak = leak < 1e-3;
      const bool ok_delta = kc.delta_prime * kc.S_sup < p->delta;
      out.pass = ok_phi0 && nonzero == 0 && h_viol == 0 && trunc_viol == 0 && ga.pass && ok_leak && ok_delta;
      out.report = {
          {"phi0", {{"re", phi0.real()}, {"im", phi0.imag()}, {"error", std::abs(phi0 - cplx(1.0))}, {"pass", ok_phi0}}},
          {"lattice_zeros", {{"checked", 2 * p->zeros}, {"max_abs", zero_max}, {"nonzero", nonzero}}},
          {"h_imaginary", {{"samples", hy}, {"violations", h_viol}}},
          {"truncation",
           {{"K", ks.K_trunc}, {"max_error", trunc_err}, {"max_error_over_bound", trunc_ratio}, {"violations", trunc_viol}}},
          {"growth",
           {{"fitted_C", ga.fitted_C},
            {"imag_ratio_max", ga.imag_ratio_max},
            {"imag_violations", ga.imag_violations},
            {"pass", ga.pass}}},
          {"constants",
           {{"K_dec", kc.K_dec},
            {"window_max", kc.window_max},
            {"envelope_beyond", kc.envelope_beyond},
            {"S_sup", kc.S_sup},
            {"delta", kc.delta},
            {"delta_prime", kc.delta_prime}}},
          {"leakage", {{"eta", 8.0 / ks.window}, {"fraction", leak}, {"pass", ok_leak}}},
          {"pass", out.pass}};
      std::ostringstream csv;
      phi.write_csv(csv);
      out.files.emplace_back(".csv", csv.str());
      return out;
    });
  };
  return c;
}

// ---------------------------------------------------------------------------
// solenoid-demo

Command solenoid_demo(CLI::App& root) {
  struct P {
    double c = 1.0, T = 2e4, window = 24.0, step = 1.0 / 16.0;
    std::size_t K = 4, points = 20, depth = 5;
    std::uint64_t seed = 1;
  };
  auto p = std::make_shared<P>();
  Command c;
  c.app = root.add_subcommand("solenoid-demo", "Solenoid embedding round trip and equivariance");
  c.app->add_option("--c", p->c, "band limit")->capture_default_str();
  c.app->add_option("--K", p->K, "embedding depth")->capture_default_str();
  c.app->add_option("--T", p->T, "Bohr averaging length")->capture_default_str();
  c.app->add_option("--points", p->points)->capture_default_str();
  c.app->add_option("--depth", p->depth, "solenoid truncation depth")->capture_default_str();
  c.app->add_option("--window", p->window)->capture_default_str();
  c.app->add_option("--step", p->step)->capture_default_str();
  c.app->add_option("--seed", p->seed)->capture_default_str();
  c.config = [p] {
    return json{{"c", p->c},           {"K", p->K},         {"T", p->T},       {"points", p->points},
                {"depth", p->depth}, {"window", p->window}, {"step", p->step}, {"seed", p->seed}};
  };
  c.prepare = [p] {
    const SolenoidEmbedding emb = SolenoidEmbedding::make(p->c, p->K);
    if (p->depth < p->K || p->depth > 12) throw UsageError("need K <= depth <= 12");
    if (!(p->T > 0.0) || p->points == 0) throw UsageError("T and points must be positive");
    // Validates the grid.
    (void)Signal::sample(Band(0.0, p->c), p->window, p->step, [](double) { return cplx(0.0); }, true);
    return std::function<Output()>([p, emb] {
      Output out;
      std::mt19937_64 rng(p->seed);
      std::uniform_real_distribution<double> top(0.0, factorial(p->depth));
      std::uniform_real_distribution<double> rs(-p->window / 2.0, p->window / 2.0);
      std::ostringstream csv;
      csv << "point,n,true,recovered,circle_error,tolerance\n";
      double worst_ratio = 0.0, equiv = 0.0;
      std::size_t bad = 0;
      for (std::size_t i = 0; i < p->points; ++i) {
        const SolenoidPoint x = SolenoidPoint::from_top(top(rng), p->depth);
        const double r = rs(rng);
        const SolenoidPoint rec = solenoid_recover([&](double t) { return solenoid_value(x, emb, t); }, emb, p->T);
        for (std::size_t n = 1; n <= p->K; ++n) {
          const double e = circle_dist(rec[n], x[n], factorial(n));
          const double tol = 1e-2 * factorial(n);
          worst_ratio = std::max(worst_ratio, e / tol);
          if (!(e <= tol)) ++bad;
          csv << i << ',' << n << ',' << fmt(x[n]) << ',' << fmt(rec[n]) << ',' << fmt(e) << ',' << fmt(tol) << '\n';
        }
        const Signal f = solenoid_embed(x, emb, p->window, p->step);
        const Signal sf = shift(f, r);
        const SolenoidPoint xr = solenoid_act(x, r);
        for (std::size_t j = 0; j < sf.size(); ++j)
          equiv = std::max(equiv, std::abs(sf.values[j] - solenoid_value(xr, emb, sf.time(j))));
      }
      out.pass = bad == 0 && equiv < 1e-9;
      out.report = {{"embedding", {{"c", emb.c}, {"m", emb.m}, {"K", emb.K}, {"amplitude", emb.amplitude}}},
                    {"points", p->points},
                    {"round_trip", {{"violations", bad}, {"worst_error_over_tolerance", worst_ratio}}},
                    {"equivariance_residual", equiv},
                    {"pass", out.pass}};
      out.files.emplace_back(".csv", csv.str());
      return out;
    });
  };
  return c;
}

// ---------------------------------------------------------------------------
// widim-sweep and mdim-table share the system description.

struct SystemParams {
  std::string system = "cube";
  std::string file;
  std::size_t D = 1, alphabet = 21, memory = 5, points = 30;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--system", system, "cube | binary | random | file")
        ->check(CLI::IsMember({"cube", "binary", "random", "file"}))
        ->capture_default_str();
    app->add_option("--file", file, "system manifest (JSON) for system=file");
    app->add_option("--D", D, "cube dimension")->capture_default_str();
    app->add_option("--alphabet", alphabet, "grid points per cube coordinate")->capture_default_str();
    app->add_option("--memory", memory, "binary shift metric memory")->capture_default_str();
    app->add_option("--points", points, "random system size")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
  }
  json to_json() const {
    return {{"system", system}, {"file", file}, {"file_sha256", file_digest(file)}, {"D", D}, {"alphabet", alphabet}, {"memory", memory}, {"points", points}, {"seed", seed}};
  }
  WindowSource build() const {
    if (system == "cube") {
      if (D < 1 || alphabet < 2) throw UsageError("cube needs D >= 1 and alphabet >= 2");
      std::vector<std::vector<double>> pts;
      for (std::size_t i = 0; i < alphabet; ++i) pts.push_back({static_cast<double>(i) / static_cast<double>(alphabet - 1)});
      return window_source(ShiftSpace{MetricSample::from_points_sup(pts), 0, {1.0}, D});
    }
    if (system == "binary") {
      std::vector<double> w;
      for (std::size_t i = 0; i <= memory; ++i) w.push_back(std::ldexp(1.0, -static_cast<int>(i)));
      return window_source(ShiftSpace{MetricSample(2, {0.0, 1.0, 1.0, 0.0}), memory, w, 1});
    }
    if (system == "file") {
      if (file.empty()) throw UsageError("system=file needs --file");
      return window_source(load_system(file).sys);
    }
    if (points < 1 || points > 2000) throw UsageError("random system needs 1..2000 points");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<std::vector<double>> pts(points, std::vector<double>(2));
    for (auto& q : pts) q = {U(rng), U(rng)};
    std::vector<std::size_t> step(points);
    std::iota(step.begin(), step.end(), 0);
    std::shuffle(step.begin(), step.end(), rng);
    return window_source(DynSystem(MetricSample::from_points_sup(pts), std::move(step)));
  }
};

Command widim_sweep(CLI::App& root) {
  struct P {
    SystemParams sys;
    std::string eps = "0.1,0.2,0.3,0.4,0.5";
    std::size_t N = 2, direct_limit = 4096;
  };
  auto p = std::make_shared<P>();
  Command c;
  c.app = root.add_subcommand("widim-sweep", "Widim upper estimates of one window over a list of eps");
  p->sys.add(c.app);
  c.app->add_option("--eps", p->eps, "comma-separated scales")->capture_default_str();
  c.app->add_option("--N", p->N, "window length")->capture_default_str();
  c.app->add_option("--direct-limit", p->direct_limit)->capture_default_str();
  c.config = [p] {
    json j = p->sys.to_json();
    j["eps"] = p->eps;
    j["N"] = p->N;
    j["direct_limit"] = p->direct_limit;
    return j;
  };
  c.prepare = [p] {
    auto eps = parse_list<double>(p->eps, "eps");
    for (double e : eps)
      if (!(e > 0.0)) throw UsageError("eps must be positive");
    if (p->N < 1) throw UsageError("N must be >= 1");
    std::sort(eps.begin(), eps.end());
    WindowSource src = p->sys.build();
    return std::function<Output()>([p, eps, src] {
      Output out;
      std::ostringstream csv;
      csv << "epsilon,N,widim,split\n";
      json rows = json::array();
      std::size_t prev = std::numeric_limits<std::size_t>::max();
      std::size_t non_antitone = 0;
      const std::size_t k = p->N * src.atoms_per_step;
      for (double e : eps) {
        const auto w = widim_windows(src, e, p->N, MdimOptions{p->direct_limit});
        const WidimEstimate& est = w.at(k);
        if (est.value > prev) ++non_antitone;
        prev = est.value;
        csv << fmt(e) << ',' << p->N << ',' << est.value << ',' << est.split << '\n';
        rows.push_back({{"epsilon", e}, {"widim", est.value}, {"split", est.split}});
      }
      out.pass = non_antitone == 0;
      out.report = {{"N", p->N}, {"rows", rows}, {"non_antitone", non_antitone}, {"pass", out.pass}};
      out.files.emplace_back(".csv", csv.str());
      return out;
    });
  };
  return c;
}

Command mdim_table_cmd(CLI::App& root) {
  struct P {
    SystemParams sys;
    std::string eps = "0.3", Ns = "1,2,3,4", kind = "widim";
    std::size_t direct_limit = 4096;
  };
  auto p = std::make_shared<P>();
  Command c;
  c.app = root.add_subcommand("mdim-table", "Widim(d_N)/N or metric mean dimension table");
  p->sys.add(c.app);
  c.app->add_option("--eps", p->eps, "comma-separated scales")->capture_default_str();
  c.app->add_option("--Ns", p->Ns, "comma-separated window lengths")->capture_default_str();
  c.app->add_option("--kind", p->kind, "widim | metric")->check(CLI::IsMember({"widim", "metric"}))->capture_default_str();
  c.app->add_option("--direct-limit", p->direct_limit)->capture_default_str();
  c.config = [p] {
    json j = p->sys.to_json();
    j["eps"] = p->eps;
    j["Ns"] = p->Ns;
    j["kind"] = p->kind;
    j["direct_limit"] = p->direct_limit;
    return j;
  };
  c.prepare = [p] {
    const auto eps = parse_list<double>(p->eps, "eps");
    const auto Ns = parse_list<std::size_t>(p->Ns, "Ns");
    for (double e : eps)
      if (!(e > 0.0)) throw UsageError("eps must be positive");
    for (std::size_t n : Ns)
      if (n < 1) throw UsageError("N must be >= 1");
    if (p->kind == "metric")
      for (double e : eps)
        if (!(e < 1.0)) throw UsageError("metric mean dimension needs eps < 1");
    WindowSource src = p->sys.build();
    // Spanning numbers need the whole window sample.
    if (p->kind == "metric")
      for (std::size_t n : Ns)
        if (src.size(n * src.atoms_per_step) > p->direct_limit)
          throw UsageError("window N=" + std::to_string(n) + " has " + std::to_string(src.size(n * src.atoms_per_step)) +
                           " points, above direct-limit; lower Ns or alphabet");
    return std::function<Output()>([p, eps, Ns, src] {
      Output out;
      const Table t = p->kind == "widim" ? mdim_table(src, eps, Ns, MdimOptions{p->direct_limit})
                                         : metric_mdim_table(src, eps, Ns);
      json rows = json::array();
      for (const auto& r : t.rows)
        rows.push_back({{"epsilon", r.epsilon}, {"N", r.N}, {"value", r.value}, {"raw", r.raw}, {"note", r.note}});
      out.pass = t.diagnostics.empty();
      out.report = {{"kind", p->kind}, {"rows", rows}, {"diagnostics", t.diagnostics}, {"pass", out.pass}};
      std::ostringstream csv;
      t.write_csv(csv);
      out.files.emplace_back(".csv", csv.str());
      return out;
    });
  };
  return c;
}

// ---------------------------------------------------------------------------
// periodic-dim

Command periodic_dim(CLI::App& root) {
  struct P {
    double a = 1.0, r = 2.5;
  };
  auto p = std::make_shared<P>();
  Command c;
  c.app = root.add_subcommand("periodic-dim", "Dimension of r-periodic signals in V[-a, a]");
  c.app->add_option("--a", p->a)->capture_default_str();
  c.app->add_option("--r", p->r)->capture_default_str();
  c.config = [p] { return json{{"a", p->a}, {"r", p->r}}; };
  c.prepare = [p] {
    if (!(p->a > 0.0) || !(p->r > 0.0) || !std::isfinite(p->a) || !std::isfinite(p->r))
      throw UsageError("a and r must be positive");
    return std::function<Output()>([p] {
      Output out;
      const PeriodicDim d = periodic_subspace_dim(p->a, p->r);
      out.pass = d.rank == d.dim;
      out.report = {{"a", p->a},
                    {"r", p->r},
                    {"formula", d.dim},
                    {"rank", d.rank},
                    {"pass", out.pass},
                    {"samples", d.samples},
                    {"sigma_min", d.sigma_min},
                    {"sigma_max", d.sigma_max},
                    {"boundary", d.boundary}};
      return out;
    });
  };
  return c;
}

// ---------------------------------------------------------------------------
// bw-metric

Command bw_metric(CLI::App& root) {
  struct P {
    std::size_t base = 6, fibers = 3, height_grid = 8, triples = 1000;
    double roof_min = 0.5, roof_max = 2.0;
    std::uint64_t seed = 1;
    std::string file;
  };
  auto p = std::make_shared<P>();
  Command c;
  c.app = root.add_subcommand("bw-metric", "Bowen-Walters distances on a random suspension");
  c.app->add_option("--base", p->base, "base points")->capture_default_str();
  c.app->add_option("--fibers", p->fibers, "heights per fiber")->capture_default_str();
  c.app->add_option("--height-grid", p->height_grid)->capture_default_str();
  c.app->add_option("--triples", p->triples)->capture_default_str();
  c.app->add_option("--roof-min", p->roof_min)->capture_default_str();
  c.app->add_option("--roof-max", p->roof_max)->capture_default_str();
  c.app->add_option("--seed", p->seed)->capture_default_str();
  c.app->add_option("--file", p->file, "system manifest with roof (replaces the random system)");
  c.config = [p] {
    return json{{"file", p->file}, {"file_sha256", file_digest(p->file)}, {"base", p->base},         {"fibers", p->fibers},     {"height_grid", p->height_grid},
                {"triples", p->triples},   {"roof_min", p->roof_min}, {"roof_max", p->roof_max},
                {"seed", p->seed}};
  };
  c.prepare = [p] {
    if (p->base < 2 || p->base > 200 || p->fibers < 1 || p->height_grid < 1)
      throw UsageError("need 2 <= base <= 200, fibers >= 1, height-grid >= 1");
    if (!(p->roof_min > 0.0) || !(p->roof_max >= p->roof_min)) throw UsageError("need 0 < roof-min <= roof-max");
    std::optional<LoadedSystem> loaded;
    if (!p->file.empty()) {
      loaded = load_system(p->file);
      if (!loaded->roof || loaded->roof->size() != loaded->sys.size()) throw UsageError("manifest needs one roof value per state");
      try {
        (void)RoofFunction(*loaded->roof);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    return std::function<Output()>([p, loaded] {
      Output out;
      std::mt19937_64 rng(p->seed);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      DynSystem sys;
      std::vector<double> rv;
      if (loaded) {
        sys = loaded->sys;
        rv = *loaded->roof;
      } else {
        std::vector<std::vector<double>> xs(p->base);
        for (auto& x : xs) x = {U(rng)};
        std::vector<std::size_t> step(p->base);
        std::iota(step.begin(), step.end(), 0);
        std::shuffle(step.begin(), step.end(), rng);
        sys = DynSystem(MetricSample::from_points_sup(xs), step);
        rv.resize(p->base);
        for (auto& r : rv) r = p->roof_min + (p->roof_max - p->roof_min) * U(rng);
      }
      const RoofFunction roof(rv);
      std::vector<SuspensionPoint> pts;
      for (std::size_t x = 0; x < sys.size(); ++x)
        for (std::size_t k = 0; k < p->fibers; ++k)
          pts.push_back({x, roof(x) * static_cast<double>(k) / static_cast<double>(p->fibers)});
      const MetricSample d = bw_distance_matrix(pts, sys, roof, p->height_grid);
      const std::size_t n = d.size();
      double sym = 0.0, tri = 0.0;
      std::size_t viol = 0;
      std::uniform_int_distribution<std::size_t> I(0, n - 1);
      for (std::size_t t = 0; t < p->triples; ++t) {
        const std::size_t i = I(rng), j = I(rng), k = I(rng);
        sym = std::max(sym, std::abs(d(i, j) - d(j, i)));
        const double excess = d(i, k) - d(i, j) - d(j, k);
        tri = std::max(tri, excess);
        if (excess > 1e-9 || std::abs(d(i, j) - d(j, i)) > 1e-9) ++viol;
      }
      std::ostringstream csv;
      csv << "i,j,base_i,height_i,base_j,height_j,distance\n";
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          csv << i << ',' << j << ',' << pts[i].base << ',' << fmt(pts[i].height) << ',' << pts[j].base << ','
              << fmt(pts[j].height) << ',' << fmt(d(i, j)) << '\n';
      out.pass = viol == 0;
      out.report = {{"points", n},
                    {"triples", p->triples},
                    {"max_asymmetry", sym},
                    {"max_triangle_excess", tri},
                    {"violations", viol},
                    {"pass", out.pass}};
      out.files.emplace_back(".csv", csv.str());
      return out;
    });
  };
  return c;
}

// ---------------------------------------------------------------------------
// embed-pipeline

Command embed_pipeline(CLI::App& root) {
  struct P {
    DeskConfig cfg;
    std::string rho = "1", shifts = "0.3,2";
  };
  auto p = std::make_shared<P>();
  DeskConfig& d = p->cfg;
  Command c;
  c.app = root.add_subcommand("embed-pipeline", "End-to-end delta-embedding on the desk instance");
  c.app->add_option("--delta", d.delta)->capture_default_str();
  c.app->add_option("--eps", d.eps)->capture_default_str();
  c.app->add_option("--rho", p->rho, "lattice density p/q")->capture_default_str();
  c.app->add_option("--N", d.N)->capture_default_str();
  c.app->add_option("--tau", d.tau)->capture_default_str();
  c.app->add_option("--a", d.band_a, "band start")->capture_default_str();
  c.app->add_option("--b", d.band_b, "band end")->capture_default_str();
  c.app->add_option("--ys", d.ys, "base points per Z_3 fiber")->capture_default_str();
  c.app->add_option("--heights", d.heights, "heights per fiber")->capture_default_str();
  c.app->add_option("--window", d.window, "signal window")->capture_default_str();
  c.app->add_option("--step", d.step, "signal grid step")->capture_default_str();
  c.app->add_option("--kernel-window", d.kernel_window)->capture_default_str();
  c.app->add_option("--R", d.R, "node truncation radius")->capture_default_str();
  c.app->add_option("--seed", d.seed)->capture_default_str();
  c.app->add_option("--budget", d.budget, "search attempts")->capture_default_str();
  c.app->add_option("--match-tol", d.match_tol)->capture_default_str();
  c.app->add_option("--shifts", p->shifts, "equivariance shifts")->capture_default_str();
  c.config = [p] {
    const DeskConfig& d = p->cfg;
    return json{{"delta", d.delta},   {"eps", d.eps},         {"rho", p->rho},
                {"N", d.N},           {"tau", d.tau},         {"a", d.band_a},
                {"b", d.band_b},      {"ys", d.ys},           {"heights", d.heights},
                {"window", d.window}, {"step", d.step},       {"kernel_window", d.kernel_window},
                {"R", d.R},           {"seed", d.seed},       {"budget", d.budget},
                {"match_tol", d.match_tol}, {"shifts", p->shifts}};
  };
  c.prepare = [p] {
    DeskConfig cfg = p->cfg;
    std::tie(cfg.rho_p, cfg.rho_q) = parse_rho(p->rho);
    cfg.shifts = parse_list<double>(p->shifts, "shifts");
    const Lattice lat(cfg.rho_p, cfg.rho_q, cfg.N);
    KernelSpec{Band(cfg.band_a, cfg.band_b), lat.rho(), cfg.tau, 1000, cfg.kernel_window, cfg.step}.validate();
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0) || !(cfg.eps > 0.0 && cfg.eps < cfg.delta))
      throw UsageError("need 0 < eps < delta < 1");
    if (cfg.window < 4.0 || cfg.budget == 0 || !(cfg.match_tol > 0.0)) throw UsageError("bad window, budget or match-tol");
    return std::function<Output()>([cfg] {
      Output out;
      const DeskReport r = run_desk_pipeline(cfg);
      json witness = nullptr;
      if (r.verdict.witness) witness = {r.verdict.witness->first, r.verdict.witness->second};
      auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      out.pass = r.pass;
      out.report = {
          {"states", r.states},
          {"section_states", r.section_states},
          {"constants",
           {{"K_dec", r.constants.K_dec},
            {"S_sup", r.constants.S_sup},
            {"delta", r.constants.delta},
            {"delta_prime", r.constants.delta_prime}}},
          {"search",
           {{"attempts", r.search.attempts},
            {"max_perturbation", r.search.max_perturbation},
            {"min_separation", r.search.min_separation},
            {"widim", r.search.widim},
            {"warnings", r.search.warnings}}},
          {"sup_f", r.sup_f},
          {"sup_h", r.sup_h},
          {"tail_bound", r.tail_bound},
          {"node_residual", r.node_residual},
          {"equivariance_residual", r.equivariance_residual},
          {"leakage", {{"kernel", r.kernel_leakage}, {"f_max", r.leakage_f_max}, {"g_max", r.leakage_g_max},
                       {"violations", r.leakage_violations}}},
          {"verdict",
           {{"pass", r.verdict.pass},
            {"pairs", r.verdict.pairs},
            {"matched", r.verdict.matched},
            {"worst_margin", num(r.verdict.worst_margin)},
            {"min_image_gap", num(r.verdict.min_image_gap)},
            {"witness", witness}}},
          {"failures", r.failures},
          {"pass", r.pass}};
      std::ostringstream csv;
      csv << "section,coordinate,G\n";
      for (std::size_t s = 0; s < r.search.G.size(); ++s)
        for (std::size_t k = 0; k < r.search.G[s].size(); ++k) csv << s << ',' << k << ',' << fmt(r.search.G[s][k]) << '\n';
      out.files.emplace_back(".csv", csv.str());
      return out;
    });
  };
  return c;
}

// ---------------------------------------------------------------------------

void write_file(const fs::path& path, const std::string& s) {
  std::ofstream os(path, std::ios::binary);
  os << s;
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

// Merges this run into <out>/manifest.json, keyed by the JSON report name.
void update_manifest(const fs::path& dir, const std::string& sub, const std::string& hash, const json& config,
                     const std::vector<std::string>& files, bool pass) {
  const fs::path mpath = dir / "manifest.json";
  json m = json::object();
  if (fs::exists(mpath)) {
    std::ifstream in(mpath);
    try {
      m = json::parse(in);
    } catch (const json::exception&) {
      m = json::object();
    }
    if (!m.is_object()) m = json::object();
  }
  if (!m.contains("runs") || !m["runs"].is_object()) m["runs"] = json::object();
  m["runs"][sub + "-" + hash] = {{"subcommand", sub}, {"config_hash", hash}, {"config", config}, {"files", files},
                                 {"pass", pass}};
  write_file(mpath, m.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean dimension and band-limited embedding experiments"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  std::string out_dir = "out";
  app.add_option("--config", config_path, "flat key=value parameter file; flags override it");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.require_subcommand(1);

  std::vector<Command> cmds;
  cmds.push_back(kernel_report(app));
  cmds.push_back(solenoid_demo(app));
  cmds.push_back(widim_sweep(app));
  cmds.push_back(mdim_table_cmd(app));
  cmds.push_back(periodic_dim(app));
  cmds.push_back(bw_metric(app));
  cmds.push_back(embed_pipeline(app));
  for (auto& c : cmds) c.app->fallthrough();

  // The config file is spliced in as flags ahead of the real ones, so the
  // command line wins under TakeLast. Keys must name subcommand options.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
      } else {
        continue;
      }
      auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return std::any_of(cmds.begin(), cmds.end(), [&](const Command& c) { return c.app->get_name() == a; });
      });
      if (sub == args.end()) throw UsageError("a subcommand is required");
      const Command& cmd = *std::find_if(cmds.begin(), cmds.end(), [&](const Command& c) { return c.app->get_name() == *sub; });
      std::vector<std::string> extra;
      for (const auto& [k, v] : read_config(path)) {
        const std::string flag = "--" + k;
        const auto opts = cmd.app->get_options();
        if (std::none_of(opts.begin(), opts.end(), [&](const CLI::Option* o) { return o->check_lname(k); })) throw UsageError("unknown key '" + k + "' for " + cmd.app->get_name());
        extra.push_back(flag + "=" + v);
      }
      args.insert(sub + 1, extra.begin(), extra.end());
      break;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const Command* cmd = nullptr;
  for (const auto& c : cmds)
    if (c.app->parsed()) cmd = &c;
  const std::string sub = cmd->app->get_name();
  const json config = cmd->config();
  const std::string hash = sha256_hex(sub + "\n" + config.dump()).substr(0, 16);

  std::function<Output()> run;
  try {
    run = cmd->prepare();
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  Output out;
  try {
    out = run();
  } catch (const Error& e) {
    out.pass = false;
    out.report = {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}, {"pass", false}};
  } catch (const std::exception& e) {
    out.pass = false;
    out.report = {{"error", {{"kind", "internal"}, {"message", e.what()}}}, {"pass", false}};
  }

  try {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const std::string stem = sub + "-" + hash;
    json doc = {{"subcommand", sub}, {"config_hash", hash}, {"config", config}};
    for (auto it = out.report.begin(); it != out.report.end(); ++it) doc[it.key()] = it.value();
    std::vector<std::string> files{stem + ".json"};
    write_file(dir / files[0], doc.dump(2) + "\n");
    for (const auto& [suffix, text] : out.files) {
      files.push_back(stem + suffix);
      write_file(dir / files.back(), text);
    }
    update_manifest(dir, sub, hash, config, files, out.pass);
    std::cout << doc.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return out.pass ? 0 : 1;
}
