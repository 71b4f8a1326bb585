// Acceptance suite: every contract the artifact must satisfy, one pass/fail
// line per criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fbmlab/fbm_engine.hpp"
#include "fbmlab/function_space.hpp"
#include "fbmlab/gaussian_kernel.hpp"
#include "fbmlab/harness.hpp"
#include "fbmlab/local_time.hpp"
#include "fbmlab/mc.hpp"
#include "fbmlab/qcov.hpp"
#include "fbmlab/rng.hpp"

using namespace fbmlab;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  --  %s\n", pass ? "PASS" : "FAIL", idx, name.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr unsigned kWorkers = 4;

// --------------------------------------------------------------------------
// 1. quadratic covariation anchor, both estimator forms
// --------------------------------------------------------------------------
void criterion_1() {
  bool pass = true;
  std::string detail;
  for (double H : {0.1, 0.3, 0.45}) {
    Timer timer;
    const std::size_t n_paths = 200;
    const TimeGrid grid{1.0, 4096, 8};
    const FbmSampler sampler(grid, HurstIndex(H));
    std::vector<double> ev(n_paths), rv(n_paths);
    parallel_for(n_paths, kWorkers, [&](std::size_t i) {
      const FbmPath p = sampler.generate(derive_seed(101, i));
      ev[i] = estimate_eps(FunctionSpec::identity(), p, 8 * grid.delta(), 1.0).value;
      rv[i] = estimate_riemann(FunctionSpec::identity(), p, full_partition(p, 1.0)).value;
    });
    const McEstimate ee = summarize(ev), re = summarize(rv);
    const double target = 1.0;  // t^2H at t = 1
    const bool ok_e = std::abs(ee.value - target) <= std::max(3.0 * ee.std_error, 0.05);
    const bool ok_r = std::abs(re.value - target) <= std::max(3.0 * re.std_error, 0.05);
    const bool ok_t = timer.seconds() < 60.0;
    pass = pass && ok_e && ok_r && ok_t;
    detail += "H=" + fmt(H) + ": eps " + fmt(ee.value) + " riemann " + fmt(re.value) + " (" +
              fmt(timer.seconds()) + "s)  ";
  }
  report(1, "both estimator forms hit t^2H = 1 within max(3SE, 5%)", pass, detail);
}

// --------------------------------------------------------------------------
// 2. inequality ladder, zero violations
// --------------------------------------------------------------------------
void criterion_2() {
  Timer timer;
  const auto rep = verify_inequality_suite(100000, 20260809);
  const double secs = timer.seconds();
  const bool pass = rep.total_violations() == 0 && secs < 10.0;
  double worst = 1e9;
  for (const auto& s : rep.inequalities) worst = std::min(worst, s.worst_margin);
  report(2, "10^5 tuples per inequality, zero violations at slack 1e-12", pass,
         "violations=" + std::to_string(rep.total_violations()) + " worst_margin=" + fmt(worst) +
             " time=" + fmt(secs) + "s");
}

// --------------------------------------------------------------------------
// 3. local time expectation at two levels
// --------------------------------------------------------------------------
void criterion_3() {
  const HurstIndex h(0.3);
  const std::size_t n_paths = 500;
  const TimeGrid grid{1.0, 65536, 0};
  const FbmSampler sampler(grid, h);
  std::vector<double> at0(n_paths), at_half(n_paths);
  parallel_for(n_paths, kWorkers, [&](std::size_t i) {
    const FbmPath p = sampler.generate(derive_seed(303, i));
    at0[i] = weighted_local_time(p, 0.0, 1.0, 0.02).value;
    at_half[i] = weighted_local_time(p, 0.5, 1.0, 0.02).value;
  });
  const McEstimate e0 = summarize(at0), e5 = summarize(at_half);
  const double x0 = std::sqrt(2.0 / std::numbers::pi);
  const double x5 = expected_weighted_local_time(0.5, 1.0, h);
  const bool ok0 = std::abs(e0.value - x0) <= 0.05 * x0;
  const bool ok5 = std::abs(e5.value - x5) <= 0.05 * x5;
  report(3, "E L(x,1) within 5% of the density integral at x=0 and x=0.5", ok0 && ok5,
         "x=0: " + fmt(e0.value) + " vs " + fmt(x0) + "; x=0.5: " + fmt(e5.value) + " vs " +
             fmt(x5));
}

// --------------------------------------------------------------------------
// 4. Tanaka identity in expectation
// --------------------------------------------------------------------------
void criterion_4() {
  const TimeGrid grid{1.0, 16384, 0};
  bool pass = true;
  std::string detail;
  struct Case {
    double hurst, x;
  };
  for (const Case c : {Case{0.3, 0.0}, Case{0.3, 0.5}, Case{0.45, 0.2}}) {
    const auto r = tanaka_expectation_check(HurstIndex(c.hurst), c.x, 1.0, 500, grid, 0.02,
                                            404, kWorkers);
    const double gap = std::abs(r.folded_mean - r.local_time_mean);
    const bool ok = gap <= 3.0 * r.diff_std_error;
    pass = pass && ok;
    detail += "(H=" + fmt(c.hurst) + ",x=" + fmt(c.x) + "): gap " + fmt(gap) + " vs 3SE " +
              fmt(3.0 * r.diff_std_error) + "  ";
  }
  report(4, "E|B_1 - x| - |x| agrees with E L(x,1) within 3SE of the difference", pass, detail);
}

// --------------------------------------------------------------------------
// 5. expectation identity for F(x) = x^2
// --------------------------------------------------------------------------
void criterion_5() {
  const std::size_t n_paths = 500;
  const TimeGrid grid{1.0, 4096, 8};
  const FbmSampler sampler(grid, HurstIndex(0.3));
  const auto fp = FunctionSpec::polynomial({0.0, 2.0});
  std::vector<double> lhs(n_paths), rhs(n_paths);
  parallel_for(n_paths, kWorkers, [&](std::size_t i) {
    const FbmPath p = sampler.generate(derive_seed(505, i));
    const double bt = p.at_time(1.0);
    lhs[i] = bt * bt;
    rhs[i] = 0.5 * estimate_eps(fp, p, 8 * grid.delta(), 1.0).value;
  });
  const McEstimate el = summarize(lhs), er = summarize(rhs);
  const bool ok_l = std::abs(el.value - 1.0) <= 3.0 * el.std_error;
  const bool ok_r = std::abs(er.value - 1.0) <= 3.0 * er.std_error;
  report(5, "F(x)=x^2: E F(B_1) and half the qcov mean both equal 1 within 3SE",
         ok_l && ok_r,
         "E F(B_1) = " + fmt(el.value) + " (3SE " + fmt(3 * el.std_error) + "), half-qcov = " +
             fmt(er.value) + " (3SE " + fmt(3 * er.std_error) +
             "); non-smooth case via criterion 6");
}

// --------------------------------------------------------------------------
// 6. quadratic covariation against the local-time integral
// --------------------------------------------------------------------------
void criterion_6() {
  const std::size_t n_paths = 500;
  const TimeGrid grid{1.0, 16384, 0};
  const FbmSampler sampler(grid, HurstIndex(0.3));
  const auto f = FunctionSpec::indicator(-0.5, 0.5);
  std::vector<double> qc(n_paths), neg_int(n_paths);
  parallel_for(n_paths, kWorkers, [&](std::size_t i) {
    const FbmPath p = sampler.generate(derive_seed(606, i));
    qc[i] = estimate_riemann(f, p, full_partition(p, 1.0)).value;
    neg_int[i] = -integral_against_local_time(f, p, 1.0, 0.02);
  });
  const McEstimate diff = summarize_paired_diff(qc, neg_int);
  const McEstimate eq = summarize(qc);
  const bool ok = std::abs(diff.value) <= 3.0 * diff.std_error;
  report(6, "indicator qcov equals -integral f dL within 3SE of the difference", ok,
         "qcov mean " + fmt(eq.value) + ", paired gap " + fmt(diff.value) + " vs 3SE " +
             fmt(3.0 * diff.std_error));
}

// --------------------------------------------------------------------------
// 7. norm quadrature anchors
// --------------------------------------------------------------------------
void criterion_7() {
  bool pass = true;
  std::string detail;
  for (double H : {0.1, 0.3, 0.45}) {
    const double v = norm_H(FunctionSpec::constant(1.0), 1.0, HurstIndex(H)).value;
    const double exact = 2.0 / std::sqrt(H);
    const bool ok = std::abs(v - exact) <= 1e-4 * exact;
    pass = pass && ok;
    detail += "H=" + fmt(H) + ": rel " + fmt(std::abs(v - exact) / exact) + "  ";
  }
  const auto f = FunctionSpec::indicator(0.0, 1.0);
  const double a = norm_H(f, 1.0, HurstIndex(0.3), NormOptions{256}).value;
  const double b = norm_H(f, 1.0, HurstIndex(0.3), NormOptions{512}).value;
  const bool ok_ref = std::abs(a - b) <= 1e-6 * b;
  pass = pass && ok_ref;
  detail += "indicator refinement rel " + fmt(std::abs(a - b) / b);
  report(7, "norm of 1 matches 2/sqrt(H) to 1e-4; indicator refinement to 1e-6", pass, detail);
}

// --------------------------------------------------------------------------
// 8. time-dependent consistency
// --------------------------------------------------------------------------
void criterion_8() {
  const std::size_t n_paths = 200;
  const TimeGrid grid{1.0, 4096, 1};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  const auto f = FunctionSpec::space_time_product(FunctionSpec::identity(), {0.0, 1.0});
  std::vector<double> vals(n_paths);
  parallel_for(n_paths, kWorkers, [&](std::size_t i) {
    vals[i] = estimate_eps_td(f, sampler.generate(derive_seed(808, i)), grid.delta(), 1.0).value;
  });
  const McEstimate e = summarize(vals);
  const double exact = 0.6 / 1.6;  // 2H/(2H+1) at t = 1
  const bool ok_td = std::abs(e.value - exact) <= 3.0 * e.std_error;

  // constant curve vs fixed level
  const TimeGrid cgrid{1.0, 8192, 0};
  const FbmSampler csampler(cgrid, h);
  const auto levels = default_level_grid(1.0, 0.3);
  double max_gap = 0.0;
  std::vector<double> gaps(100);
  parallel_for(gaps.size(), kWorkers, [&](std::size_t i) {
    const FbmPath p = csampler.generate(derive_seed(818, i));
    const double curve = curve_local_time(p, Curve::constant(0.0), 1.0, 0.02, levels).back();
    const double fixed = weighted_local_time(p, 0.0, 1.0, 0.02).value;
    gaps[i] = std::abs(curve - fixed) / std::max({curve, fixed, 1e-12});
  });
  for (double g : gaps) max_gap = std::max(max_gap, g);
  const bool ok_curve = max_gap <= 0.05;
  report(8, "f(x,s)=xs matches (2H/(2H+1)) t^(2H+1); constant-curve local time reduces", 
         ok_td && ok_curve,
         "xs mean " + fmt(e.value) + " vs " + fmt(exact) + " (3SE " + fmt(3 * e.std_error) +
             "); curve gap " + fmt(max_gap));
}

// --------------------------------------------------------------------------
// 9. engine distributional checks
// --------------------------------------------------------------------------
void criterion_9() {
  const std::size_t n_paths = 2000;
  const TimeGrid grid{1.0, 512, 0};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  std::vector<FbmPath> paths(n_paths);
  parallel_for(n_paths, kWorkers,
               [&](std::size_t i) { paths[i] = sampler.generate(derive_seed(909, i)); });
  const std::vector<std::pair<double, double>> pairs = {
      {0.125, 0.625}, {0.25, 0.25}, {0.25, 0.75}, {0.5, 1.0}, {1.0, 1.0}};
  bool pass = true;
  std::string detail;
  for (const auto& [s, t] : pairs) {
    const McEstimate e = empirical_cov(paths, s, t);
    const double exact = covariance(s, t, h);
    const bool ok = std::abs(e.value - exact) <= 3.0 * e.std_error;
    pass = pass && ok;
    detail += "(" + fmt(s) + "," + fmt(t) + "): " + (ok ? "ok " : "FAIL ");
  }
  // Brownian reduction: pooled lag-1 increment autocorrelation
  const FbmSampler bm(grid, HurstIndex(0.5));
  double num = 0.0, den = 0.0;
  std::size_t count = 0;
  std::vector<FbmPath> bpaths(500);
  parallel_for(bpaths.size(), kWorkers,
               [&](std::size_t i) { bpaths[i] = bm.generate(derive_seed(919, i)); });
  for (const auto& p : bpaths)
    for (std::size_t i = 0; i + 1 < 512; ++i) {
      const double d0 = p[i + 1] - p[i], d1 = p[i + 2] - p[i + 1];
      num += d0 * d1;
      den += d0 * d0;
      ++count;
    }
  const double rho = num / den;
  const double bound = 3.0 / std::sqrt(static_cast<double>(count));
  const bool ok_bm = std::abs(rho) <= bound;
  pass = pass && ok_bm;
  detail += "lag-1 rho " + fmt(rho) + " vs " + fmt(bound);
  report(9, "empirical covariance at 5 grid pairs within 3SE; H=0.5 is white in increments",
         pass, detail);
}

// --------------------------------------------------------------------------
// 10. byte-identical outputs across worker counts
// --------------------------------------------------------------------------
void criterion_10() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fbmlab_acceptance";
  fs::create_directories(dir);
  bool pass = true;
  std::string detail;

  ExperimentConfig qc;
  qc.experiment = "qcov_sweep";
  qc.n_steps = 512;
  qc.eps_multiples = {8, 4};
  qc.n_paths = 60;
  qc.seed = 1001;
  qc.out = (dir / "qc").string();
  qc.workers = 1;
  run(qc);
  const std::string qc1 = slurp(qc.out + ".csv");
  qc.workers = 8;
  run(qc);
  const bool ok_qc = qc1 == slurp(qc.out + ".csv");

  ExperimentConfig lt;
  lt.experiment = "localtime_profile";
  lt.n_steps = 2048;
  lt.n_paths = 50;
  lt.seed = 1002;
  lt.out = (dir / "lt").string();
  lt.workers = 1;
  run(lt);
  const std::string lt1 = slurp(lt.out + ".csv");
  lt.workers = 8;
  run(lt);
  const bool ok_lt = lt1 == slurp(lt.out + ".csv");

  pass = ok_qc && ok_lt;
  detail = std::string("qcov csv ") + (ok_qc ? "identical" : "DIFFERS") + ", localtime csv " +
           (ok_lt ? "identical" : "DIFFERS") + " across workers 1 and 8";
  report(10, "rerun with different worker counts produces byte-identical CSV", pass, detail);
}

}  // namespace

int main() {
  Timer total;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("acceptance: %d/10 criteria passed in %.1fs\n", 10 - g_failures, total.seconds());
  return g_failures;
}
