#include "fbmlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fbmlab/csv.hpp"
#include "fbmlab/fbm_engine.hpp"
#include "fbmlab/gaussian_kernel.hpp"
#include "fbmlab/local_time.hpp"
#include "fbmlab/mc.hpp"
#include "fbmlab/qcov.hpp"
#include "fbmlab/quadrature.hpp"
#include "fbmlab/rng.hpp"
#include "fbmlab/version.hpp"

namespace fbmlab {

namespace {

// ---------------------------------------------------------------------------
// config plumbing
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError({key}, "config: field '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError({key}, "config: field '" + key + "' expects an integer, got '" + v + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v,
                          T (*one)(const std::string&, const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<T>(one(key, item)));
  }
  return out;
}

const std::vector<std::string> kExperiments = {
    "qcov_sweep", "localtime_profile", "inequality_suite", "ito_check", "bouleau_yor",
    "occupation", "norm_eval",         "curve_localtime",  "simulate"};

bool is_identity(const FunctionSpec& f) {
  if (f.time_dependent()) return false;
  for (double x : {-2.3, 0.0, 0.7, 1.9})
    if (f(x) != x) return false;
  return true;
}

// ---------------------------------------------------------------------------
// shared experiment machinery
// ---------------------------------------------------------------------------

struct CheckList {
  nlohmann::json entries = nlohmann::json::array();
  bool all_ok = true;

  void add(const std::string& name, bool ok, double observed, double allowed) {
    entries.push_back(
        {{"name", name}, {"pass", ok}, {"observed", observed}, {"allowed", allowed}});
    all_ok = all_ok && ok;
  }
};

template <typename F>
auto collect(const FbmSampler& sampler, std::size_t n_paths, unsigned workers,
             std::uint64_t seed, F&& body) {
  using R = std::invoke_result_t<F, const FbmPath&>;
  std::vector<R> out(n_paths);
  parallel_for(n_paths, workers,
               [&](std::size_t i) { out[i] = body(sampler.generate(derive_seed(seed, i))); });
  return out;
}

nlohmann::json mc_json(const McEstimate& e) {
  return {{"mean", e.value}, {"std_error", e.std_error}, {"n", e.n}};
}

// within max(3 SE, 5% relative) of the target
bool anchor_ok(const McEstimate& e, double target, double* allowed = nullptr) {
  const double tol = std::max(3.0 * e.std_error, 0.05 * std::abs(target));
  if (allowed) *allowed = tol;
  return std::abs(e.value - target) <= tol;
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

void run_qcov_sweep(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                    CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  std::vector<std::size_t> eps = cfg.eps_multiples;
  std::sort(eps.rbegin(), eps.rend());
  const TimeGrid grid{cfg.t_max, cfg.n_steps, eps.front()};
  const FbmSampler sampler(grid, h);
  const double t = cfg.eval_time();
  const bool td = cfg.function.time_dependent();
  const bool with_riemann = !td;
  const bool with_closed = !td && cfg.function.has_derivative();

  struct PerPath {
    std::vector<double> eps_vals;
    double riemann = 0.0;
    double closed = 0.0;
  };
  const auto stats = collect(sampler, cfg.n_paths, cfg.workers, cfg.seed, [&](const FbmPath& p) {
    PerPath s;
    s.eps_vals.reserve(eps.size());
    for (std::size_t k : eps) {
      const double e = static_cast<double>(k) * grid.delta();
      s.eps_vals.push_back(td ? estimate_eps_td(cfg.function, p, e, t).value
                              : estimate_eps(cfg.function, p, e, t).value);
    }
    if (with_riemann) {
      const auto part = full_partition(p, t);
      s.riemann = estimate_riemann(cfg.function, p, part).value;
    }
    if (with_closed) s.closed = closed_form(cfg.function, p, t).value;
    return s;
  });

  out.row({"form", "hurst", "n_steps", "eps", "t", "mc_mean", "mc_se", "n_paths", "seed_base"});
  results["sweep"] = nlohmann::json::array();
  std::vector<double> column(cfg.n_paths);
  McEstimate final_eps;
  for (std::size_t j = 0; j < eps.size(); ++j) {
    for (std::size_t i = 0; i < cfg.n_paths; ++i) column[i] = stats[i].eps_vals[j];
    const McEstimate e = summarize(column);
    if (j + 1 == eps.size()) final_eps = e;
    const double eval = static_cast<double>(eps[j]) * grid.delta();
    out.row({"eps_limit", cfg.hurst, static_cast<unsigned long long>(cfg.n_steps), eval, t,
             e.value, e.std_error, static_cast<unsigned long long>(cfg.n_paths),
             static_cast<unsigned long long>(cfg.seed)});
    results["sweep"].push_back({{"form", "eps_limit"}, {"eps", eval}, {"mc", mc_json(e)}});
  }
  McEstimate riemann_est;
  if (with_riemann) {
    for (std::size_t i = 0; i < cfg.n_paths; ++i) column[i] = stats[i].riemann;
    riemann_est = summarize(column);
    out.row({"riemann_sum", cfg.hurst, static_cast<unsigned long long>(cfg.n_steps),
             grid.delta(), t, riemann_est.value, riemann_est.std_error,
             static_cast<unsigned long long>(cfg.n_paths),
             static_cast<unsigned long long>(cfg.seed)});
    results["sweep"].push_back({{"form", "riemann_sum"}, {"mc", mc_json(riemann_est)}});
  }
  if (with_closed) {
    for (std::size_t i = 0; i < cfg.n_paths; ++i) column[i] = stats[i].closed;
    const McEstimate e = summarize(column);
    out.row({"closed_form", cfg.hurst, static_cast<unsigned long long>(cfg.n_steps),
             grid.delta(), t, e.value, e.std_error,
             static_cast<unsigned long long>(cfg.n_paths),
             static_cast<unsigned long long>(cfg.seed)});
    results["sweep"].push_back({{"form", "closed_form"}, {"mc", mc_json(e)}});
  }

  if (is_identity(cfg.function)) {
    // anchor: the weighted quadratic variation of the path itself is t^2H
    const double target = std::pow(t, 2.0 * cfg.hurst);
    double allowed = 0.0;
    bool ok = anchor_ok(final_eps, target, &allowed);
    checks.add("eps_limit_identity_anchor", ok, std::abs(final_eps.value - target), allowed);
    if (with_riemann) {
      ok = anchor_ok(riemann_est, target, &allowed);
      checks.add("riemann_identity_anchor", ok, std::abs(riemann_est.value - target), allowed);
    }
  }
}

void run_localtime_profile(const ExperimentConfig& cfg, csv::Writer& out,
                           nlohmann::json& results, CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  const TimeGrid grid{cfg.t_max, cfg.n_steps, 0};
  const FbmSampler sampler(grid, h);
  const double t = cfg.eval_time();
  const double b0 = cfg.resolved_bandwidth();

  std::vector<double> levels = cfg.levels;
  if (levels.empty()) {
    const double scale = std::pow(cfg.t_max, cfg.hurst);
    levels = {-scale, -0.5 * scale, 0.0, 0.5 * scale, scale};
  }
  const std::vector<double> bandwidths = {0.5 * b0, b0, 2.0 * b0};

  const auto stats = collect(sampler, cfg.n_paths, cfg.workers, cfg.seed, [&](const FbmPath& p) {
    std::vector<double> vals;
    vals.reserve(levels.size() * bandwidths.size());
    for (double b : bandwidths)
      for (double x : levels) vals.push_back(weighted_local_time(p, x, t, b).value);
    return vals;
  });

  out.row({"x", "t", "mc_mean", "mc_se", "bandwidth"});
  results["profile"] = nlohmann::json::array();
  std::vector<double> column(cfg.n_paths);
  std::size_t idx = 0;
  for (double b : bandwidths) {
    for (double x : levels) {
      for (std::size_t i = 0; i < cfg.n_paths; ++i) column[i] = stats[i][idx];
      ++idx;
      const McEstimate e = summarize(column);
      const double oracle = expected_weighted_local_time(x, t, h);
      out.row({x, t, e.value, e.std_error, b});
      results["profile"].push_back(
          {{"x", x}, {"bandwidth", b}, {"mc", mc_json(e)}, {"exact", oracle}});
      if (b == b0) {
        double allowed = 0.0;
        const bool ok = anchor_ok(e, oracle, &allowed);
        checks.add("localtime_expectation_x=" + csv::format(x), ok,
                   std::abs(e.value - oracle), allowed);
      }
    }
  }
}

void run_inequality_suite(const ExperimentConfig& cfg, csv::Writer& out,
                          nlohmann::json& results, CheckList& checks) {
  const ViolationReport report = verify_inequality_suite(cfg.samples, cfg.seed);
  out.row({"name", "samples", "violations", "worst_margin"});
  for (const auto& s : report.inequalities)
    out.row({s.name, static_cast<unsigned long long>(s.samples),
             static_cast<unsigned long long>(s.violations), s.worst_margin});
  for (const auto& r : report.ratios)
    out.row({r.name, static_cast<unsigned long long>(r.samples), 0ULL, r.max_ratio});
  results["report"] = report.to_json();
  checks.add("zero_violations", report.total_violations() == 0,
             static_cast<double>(report.total_violations()), 0.0);
}

void run_ito_check(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                   CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  const std::size_t k = *std::min_element(cfg.eps_multiples.begin(), cfg.eps_multiples.end());
  const TimeGrid grid{cfg.t_max, cfg.n_steps, k};
  const FbmSampler sampler(grid, h);
  const double t = cfg.eval_time();
  const double eps = static_cast<double>(k) * grid.delta();
  const FunctionSpec f = cfg.function.derivative();
  const double f0 = cfg.function(0.0);

  const auto stats = collect(sampler, cfg.n_paths, cfg.workers, cfg.seed, [&](const FbmPath& p) {
    const double lhs = cfg.function(p.at_time(t)) - f0;
    const double rhs = 0.5 * estimate_eps(f, p, eps, t).value;
    return std::pair<double, double>(lhs, rhs);
  });

  std::vector<double> lhs(cfg.n_paths), rhs(cfg.n_paths);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    lhs[i] = stats[i].first;
    rhs[i] = stats[i].second;
  }
  const McEstimate el = summarize(lhs), er = summarize(rhs);
  const McEstimate diff = summarize_paired_diff(lhs, rhs);
  out.row({"quantity", "mean", "se"});
  out.row({"F(B_t)-F(0)", el.value, el.std_error});
  out.row({"half_qcov", er.value, er.std_error});
  out.row({"difference", diff.value, diff.std_error});
  results["lhs"] = mc_json(el);
  results["rhs"] = mc_json(er);
  results["difference"] = mc_json(diff);
  checks.add("ito_expectation_identity", std::abs(diff.value) <= 3.0 * diff.std_error,
             std::abs(diff.value), 3.0 * diff.std_error);
}

void run_bouleau_yor(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                     CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  const TimeGrid grid{cfg.t_max, cfg.n_steps, 0};
  const FbmSampler sampler(grid, h);
  const double t = cfg.eval_time();
  const double b = cfg.resolved_bandwidth();

  const auto stats = collect(sampler, cfg.n_paths, cfg.workers, cfg.seed, [&](const FbmPath& p) {
    const auto part = full_partition(p, t);
    const double qc = estimate_riemann(cfg.function, p, part).value;
    const double integral = integral_against_local_time(cfg.function, p, t, b);
    return std::pair<double, double>(qc, -integral);
  });

  std::vector<double> qc(cfg.n_paths), neg_int(cfg.n_paths);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    qc[i] = stats[i].first;
    neg_int[i] = stats[i].second;
  }
  const McEstimate eq = summarize(qc), ei = summarize(neg_int);
  const McEstimate diff = summarize_paired_diff(qc, neg_int);
  out.row({"quantity", "mean", "se"});
  out.row({"riemann_qcov", eq.value, eq.std_error});
  out.row({"neg_localtime_integral", ei.value, ei.std_error});
  out.row({"difference", diff.value, diff.std_error});
  results["qcov"] = mc_json(eq);
  results["neg_integral"] = mc_json(ei);
  results["difference"] = mc_json(diff);
  checks.add("bouleau_yor_identity", std::abs(diff.value) <= 3.0 * diff.std_error,
             std::abs(diff.value), 3.0 * diff.std_error);
}

void run_occupation(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                    CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  const TimeGrid grid{cfg.t_max, cfg.n_steps, 0};
  const FbmSampler sampler(grid, h);
  const double t = cfg.eval_time();
  const double scale = std::pow(cfg.t_max, cfg.hurst);
  const double b = cfg.bandwidth > 0.0 ? cfg.bandwidth : 0.05 * scale;
  // the binned comparison wants bandwidth = 2 * level spacing
  const double spacing = 0.5 * b;
  std::vector<double> levels;
  for (double x = -6.0 * scale; x <= 6.0 * scale + 0.5 * spacing; x += spacing)
    levels.push_back(x);

  const auto stats = collect(sampler, cfg.n_paths, cfg.workers, cfg.seed, [&](const FbmPath& p) {
    return occupation_check(p, cfg.function, t, b, levels);
  });

  out.row({"path", "time_side", "space_side", "relative_gap"});
  double max_gap = 0.0;
  std::vector<double> ts(cfg.n_paths), ss(cfg.n_paths);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    ts[i] = stats[i].time_side;
    ss[i] = stats[i].space_side;
    max_gap = std::max(max_gap, stats[i].relative_gap());
    out.row({static_cast<unsigned long long>(i), stats[i].time_side, stats[i].space_side,
             stats[i].relative_gap()});
  }
  results["time_side"] = mc_json(summarize(ts));
  results["space_side"] = mc_json(summarize(ss));
  results["max_relative_gap"] = max_gap;
  checks.add("occupation_identity_per_path", max_gap <= 0.05, max_gap, 0.05);
}

void run_norm_eval(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                   CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  const NormValue nv = cfg.function.time_dependent() ? norm_H_star(cfg.function, cfg.t_max, h)
                                                     : norm_H(cfg.function, cfg.t_max, h);
  out.row({"kind", "t_max", "hurst", "value", "abs_error_estimate"});
  out.row({cfg.function.kind(), cfg.t_max, cfg.hurst, nv.value, nv.abs_error_estimate});
  results["norm"] = {{"value", nv.value}, {"abs_error_estimate", nv.abs_error_estimate}};
  const bool finite = std::isfinite(nv.value);
  checks.add("norm_refinement_converged",
             finite && nv.abs_error_estimate <= 1e-4 * std::max(1.0, nv.value),
             nv.abs_error_estimate, 1e-4 * std::max(1.0, nv.value));
}

void run_curve_localtime(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                         CheckList& checks) {
  const HurstIndex h(cfg.hurst);
  const TimeGrid grid{cfg.t_max, cfg.n_steps, 0};
  const FbmSampler sampler(grid, h);
  const double t = cfg.eval_time();
  const double b = cfg.resolved_bandwidth();
  const auto levels = default_level_grid(cfg.t_max, cfg.hurst);
  const std::size_t n_times = grid.index_of(t) + 1;
  const bool constant_curve = cfg.curve.kind() == "constant";
  const double const_level = constant_curve ? cfg.curve(0.0) : 0.0;

  struct PerPath {
    std::vector<double> curve;
    std::size_t negative_increments = 0;
    double fixed_level_final = 0.0;
  };
  const auto stats = collect(sampler, cfg.n_paths, cfg.workers, cfg.seed, [&](const FbmPath& p) {
    PerPath s;
    s.curve = curve_local_time(p, cfg.curve, t, b, levels);
    for (std::size_t i = 1; i < s.curve.size(); ++i)
      if (s.curve[i] < s.curve[i - 1]) ++s.negative_increments;
    if (constant_curve) s.fixed_level_final = weighted_local_time(p, const_level, t, b).value;
    return s;
  });

  std::size_t neg = 0, total_incr = 0;
  KahanSum reduction_gap;
  std::vector<double> mean_curve(n_times, 0.0);
  for (const auto& s : stats) {
    neg += s.negative_increments;
    total_incr += s.curve.size() - 1;
    for (std::size_t i = 0; i < n_times; ++i) mean_curve[i] += s.curve[i];
  }
  for (auto& v : mean_curve) v /= static_cast<double>(cfg.n_paths);

  const std::size_t stride = std::max<std::size_t>(1, (n_times - 1) / 128);
  out.row({"t", "value"});
  for (std::size_t i = 0; i < n_times; i += stride) out.row({grid.time(i), mean_curve[i]});
  if ((n_times - 1) % stride) out.row({grid.time(n_times - 1), mean_curve[n_times - 1]});

  const double neg_fraction =
      total_incr ? static_cast<double>(neg) / static_cast<double>(total_incr) : 0.0;
  results["negative_increment_fraction"] = neg_fraction;
  checks.add("curve_localtime_monotone", neg_fraction < 0.01, neg_fraction, 0.01);

  if (constant_curve) {
    std::vector<double> curve_final(cfg.n_paths), fixed_final(cfg.n_paths);
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
      curve_final[i] = stats[i].curve.back();
      fixed_final[i] = stats[i].fixed_level_final;
    }
    const McEstimate ec = summarize(curve_final), ef = summarize(fixed_final);
    const double gap = std::abs(ec.value - ef.value) /
                       std::max({std::abs(ef.value), std::abs(ec.value), 1e-12});
    results["constant_curve_reduction"] = {
        {"curve", mc_json(ec)}, {"fixed_level", mc_json(ef)}, {"relative_gap", gap}};
    checks.add("constant_curve_matches_fixed_level", gap <= 0.05, gap, 0.05);
    (void)reduction_gap;
  }
}

void run_simulate(const ExperimentConfig& cfg, csv::Writer& out, nlohmann::json& results,
                  CheckList& checks, std::vector<std::string>& files) {
  const HurstIndex h(cfg.hurst);
  const TimeGrid grid{cfg.t_max, cfg.n_steps, 0};
  const FbmSampler sampler(grid, h);

  auto dump = [&](csv::Writer& w, const FbmPath& p) {
    w.comment("hurst=" + csv::format(p.hurst) + " seed=" + std::to_string(p.seed) +
              " delta=" + csv::format(p.grid.delta()) +
              (p.cholesky_fallback ? " sampler=cholesky_fallback" : " sampler=circulant"));
    w.row({"index", "time", "value"});
    for (std::size_t i = 0; i < p.values.size(); ++i)
      w.row({static_cast<unsigned long long>(i), p.grid.time(i), p.values[i]});
  };

  dump(out, sampler.generate(derive_seed(cfg.seed, 0)));
  for (std::size_t r = 1; r < cfg.n_paths; ++r) {
    const std::string path = cfg.out + "_r" + std::to_string(r) + ".csv";
    csv::Writer w(path);
    dump(w, sampler.generate(derive_seed(cfg.seed, r)));
    files.push_back(path);
  }
  results["paths_written"] = cfg.n_paths;
  checks.add("simulate_completed", true, 0.0, 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig
// ---------------------------------------------------------------------------

double ExperimentConfig::resolved_bandwidth() const {
  return bandwidth > 0.0 ? bandwidth : default_bandwidth(t_max, hurst);
}

nlohmann::json ExperimentConfig::to_json(bool include_execution) const {
  nlohmann::json j{{"experiment", experiment},
                   {"hurst", hurst},
                   {"t_max", t_max},
                   {"n_steps", n_steps},
                   {"eps_multiples", eps_multiples},
                   {"bandwidth", bandwidth},
                   {"function", function.to_json()},
                   {"curve", curve.to_json()},
                   {"levels", levels},
                   {"n_paths", n_paths},
                   {"samples", samples},
                   {"t", t},
                   {"seed", seed},
                   {"out", out},
                   {"assert", assert_contracts}};
  if (include_execution) j["workers"] = workers;
  return j;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config"}, "config: cannot open '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError({"line " + std::to_string(line_no)},
                        "config: expected 'key = value' at line " + std::to_string(line_no));
    cfg.apply_override(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "experiment") experiment = value;
  else if (key == "hurst") hurst = parse_double(key, value);
  else if (key == "t_max") t_max = parse_double(key, value);
  else if (key == "n_steps") n_steps = parse_u64(key, value);
  else if (key == "eps_multiples")
    eps_multiples = parse_list<std::size_t>(key, value, [](const std::string& k,
                                                           const std::string& v) {
      return static_cast<std::size_t>(parse_u64(k, v));
    });
  else if (key == "bandwidth") bandwidth = parse_double(key, value);
  else if (key == "function") function = FunctionSpec::parse(value);
  else if (key == "curve")
    curve = value.empty() || value.front() != '{'
                ? Curve::constant(parse_double(key, value))
                : Curve::from_json(nlohmann::json::parse(value));
  else if (key == "levels")
    levels = parse_list<double>(key, value, parse_double);
  else if (key == "n_paths") n_paths = parse_u64(key, value);
  else if (key == "samples") samples = parse_u64(key, value);
  else if (key == "t") t = parse_double(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "workers") workers = static_cast<unsigned>(parse_u64(key, value));
  else if (key == "out") out = value;
  else if (key == "assert")
    assert_contracts = (value == "1" || value == "true" || value == "yes");
  else
    throw ConfigError({key}, "config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  std::string detail;
  auto flag = [&](const std::string& field, const std::string& why) {
    bad.push_back(field);
    if (!detail.empty()) detail += "; ";
    detail += field + ": " + why;
  };

  if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end())
    flag("experiment", "unknown experiment '" + experiment + "'");
  if (!(hurst > 0.0 && hurst < 1.0)) flag("hurst", "must lie in (0,1)");
  if (!(t_max > 0.0)) flag("t_max", "must be positive");
  if (n_steps < 2) flag("n_steps", "need at least 2 steps");
  if (t < 0.0 || t > t_max) flag("t", "must lie in (0, t_max]");
  if (bandwidth < 0.0) flag("bandwidth", "must be nonnegative");
  if (experiment == "qcov_sweep" || experiment == "ito_check") {
    if (eps_multiples.empty()) flag("eps_multiples", "need at least one epsilon multiple");
    for (std::size_t k : eps_multiples)
      if (k == 0 || k > n_steps) flag("eps_multiples", "multiples must lie in [1, n_steps]");
  }
  if (experiment != "inequality_suite" && experiment != "norm_eval" &&
      experiment != "simulate" && n_paths < 2)
    flag("n_paths", "Monte Carlo experiments need at least 2 paths");
  if (experiment == "simulate" && n_paths < 1) flag("n_paths", "need at least 1 path");
  if (experiment == "inequality_suite" && samples == 0) flag("samples", "must be positive");
  if (experiment == "ito_check" && !function.has_derivative())
    flag("function", "ito_check needs a spec with a registered derivative");
  if (experiment == "bouleau_yor" &&
      !(function.kind() == "step" || function.kind() == "indicator"))
    flag("function", "bouleau_yor needs a step or indicator spec");
  if (out.empty()) flag("out", "output prefix must not be empty");

  if (!bad.empty()) throw ConfigError(bad, "config validation failed: " + detail);
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

double expected_weighted_local_time(double x, double t, HurstIndex h) {
  const double vt = std::pow(t, h.value());
  const double floor = vt * 1e-14;
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return 2.0 * quad::simpson(
                   [&](double v) {
                     const double vv = std::max(v, floor);
                     const double z = x / vv;
                     return inv_sqrt2pi * std::exp(-0.5 * z * z);
                   },
                   0.0, vt, 4096);
}

ResultSet run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  ResultSet rs;
  const std::string csv_path = cfg.out + ".csv";
  const std::string json_path = cfg.out + ".json";
  nlohmann::json results;
  CheckList checks;
  {
    csv::Writer out(csv_path);
    out.comment("fbmlab " + std::string(kVersion) + " experiment=" + cfg.experiment);
    out.comment("config " + cfg.to_json(false).dump());
    rs.files.push_back(csv_path);

    if (cfg.experiment == "qcov_sweep") run_qcov_sweep(cfg, out, results, checks);
    else if (cfg.experiment == "localtime_profile")
      run_localtime_profile(cfg, out, results, checks);
    else if (cfg.experiment == "inequality_suite")
      run_inequality_suite(cfg, out, results, checks);
    else if (cfg.experiment == "ito_check") run_ito_check(cfg, out, results, checks);
    else if (cfg.experiment == "bouleau_yor") run_bouleau_yor(cfg, out, results, checks);
    else if (cfg.experiment == "occupation") run_occupation(cfg, out, results, checks);
    else if (cfg.experiment == "norm_eval") run_norm_eval(cfg, out, results, checks);
    else if (cfg.experiment == "curve_localtime")
      run_curve_localtime(cfg, out, results, checks);
    else if (cfg.experiment == "simulate")
      run_simulate(cfg, out, results, checks, rs.files);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rs.contracts_ok = checks.all_ok;
  rs.summary = {{"version", kVersion},
                {"config", cfg.to_json(true)},
                {"results", results},
                {"checks", checks.entries},
                {"all_checks_passed", checks.all_ok},
                {"wall_time_seconds", wall},
                {"files", rs.files}};
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("run: cannot open '" + json_path + "' for writing");
  js << rs.summary.dump(2) << "\n";
  rs.files.push_back(json_path);
  return rs;
}

}  // namespace fbmlab
