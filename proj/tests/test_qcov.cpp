#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fbmlab/mc.hpp"
#include "fbmlab/qcov.hpp"
#include "fbmlab/quadrature.hpp"
#include "fbmlab/rng.hpp"

using namespace fbmlab;

namespace {

std::vector<FbmPath> make_paths(const FbmSampler& s, std::size_t n, std::uint64_t seed) {
  std::vector<FbmPath> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(s.generate(derive_seed(seed, i)));
  return out;
}

// deterministic expectation of -I_eps^- for f(x) = x:
// (1/eps^2H) sum_i (1/2)[t_i^2H + eps^2H - (t_i+eps)^2H] w_i
double neg_iminus_expectation(const TimeGrid& g, double H, std::size_t k, double t) {
  const double p = 2.0 * H;
  const double eps = static_cast<double>(k) * g.delta();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.index_of(t); ++i) {
    const double ti = g.time(i);
    acc += 0.5 * (std::pow(ti, p) + std::pow(eps, p) - std::pow(ti + eps, p)) *
           g.power_cell_weight(i, p);
  }
  return acc / std::pow(eps, p);
}

}  // namespace

TEST_CASE("constant functions produce exactly zero") {
  const TimeGrid grid{1.0, 512, 8};
  const FbmPath p = generate_path(grid, HurstIndex(0.3), 4);
  const auto f = FunctionSpec::constant(3.0);
  CHECK(estimate_eps(f, p, 8 * grid.delta(), 1.0).value == 0.0);
  CHECK(estimate_riemann(f, p, full_partition(p, 1.0)).value == 0.0);
  const auto [ip, im] = estimate_decomposed(f, p, 8 * grid.delta(), 1.0);
  CHECK(ip == doctest::Approx(im).epsilon(1e-12));
}

TEST_CASE("closed form for the identity telescopes to t^2H") {
  const TimeGrid grid{1.0, 1024, 0};
  for (double H : {0.1, 0.3, 0.45}) {
    const FbmPath p = generate_path(grid, HurstIndex(H), 11);
    for (double t : {0.25, 1.0}) {
      const double v = closed_form(FunctionSpec::identity(), p, t).value;
      CHECK(v == doctest::Approx(std::pow(t, 2 * H)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(closed_form(FunctionSpec::sign(), generate_path(grid, HurstIndex(0.3), 1), 1.0),
                  std::invalid_argument);
}

TEST_CASE("decomposition difference equals the estimator") {
  const TimeGrid grid{1.0, 1024, 16};
  const auto f = FunctionSpec::polynomial({0.0, 1.0, 0.5});
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const FbmPath p = generate_path(grid, HurstIndex(0.25), seed);
    const double eps = 16 * grid.delta();
    const double est = estimate_eps(f, p, eps, 1.0).value;
    const auto [ip, im] = estimate_decomposed(f, p, eps, 1.0);
    const double scale = std::max({1.0, std::abs(ip), std::abs(im)});
    CHECK(std::abs((ip - im) - est) <= 1e-12 * scale);
  }
}

TEST_CASE("estimators are linear in the function, exactly") {
  const TimeGrid grid{1.0, 512, 8};
  const FbmPath p = generate_path(grid, HurstIndex(0.3), 17);
  const double alpha = 2.5, beta = -1.25;
  const auto f = FunctionSpec::polynomial({0.0, 1.0});         // x
  const auto g = FunctionSpec::polynomial({0.0, 0.0, 1.0});    // x^2
  const auto combo = FunctionSpec::polynomial({0.0, alpha, beta});
  const double eps = 8 * grid.delta();
  const double lhs = estimate_eps(combo, p, eps, 1.0).value;
  const double rhs = alpha * estimate_eps(f, p, eps, 1.0).value +
                     beta * estimate_eps(g, p, eps, 1.0).value;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("partition form with unit mesh equals the shift form") {
  const TimeGrid grid{1.0, 512, 1};
  const auto f = FunctionSpec::polynomial({0.0, 1.0, -0.5});
  for (double H : {0.1, 0.3, 0.5}) {
    const FbmPath p = generate_path(grid, HurstIndex(H), 23);
    const double a = estimate_eps(f, p, grid.delta(), 1.0).value;
    const double b = estimate_riemann(f, p, full_partition(p, 1.0)).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("identity anchor: both forms average to t^2H") {
  const std::size_t n_paths = 200;
  const TimeGrid grid{1.0, 4096, 8};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  const auto paths = make_paths(sampler, n_paths, 3100);
  std::vector<double> ev(n_paths), rv(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    ev[i] = estimate_eps(FunctionSpec::identity(), paths[i], 8 * grid.delta(), 1.0).value;
    rv[i] = estimate_riemann(FunctionSpec::identity(), paths[i], full_partition(paths[i], 1.0)).value;
  }
  const McEstimate ee = summarize(ev), re = summarize(rv);
  CHECK(std::abs(ee.value - 1.0) <= std::max(3.0 * ee.std_error, 0.05));
  CHECK(std::abs(re.value - 1.0) <= std::max(3.0 * re.std_error, 0.05));
}

TEST_CASE("Brownian consistency: quadratic variation is t") {
  const std::size_t n_paths = 300;
  const TimeGrid grid{1.0, 1024, 4};
  const FbmSampler sampler(grid, HurstIndex(0.5));
  const auto paths = make_paths(sampler, n_paths, 41);
  std::vector<double> ev(n_paths), rv(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    ev[i] = estimate_eps(FunctionSpec::identity(), paths[i], 4 * grid.delta(), 1.0).value;
    rv[i] = estimate_riemann(FunctionSpec::identity(), paths[i], full_partition(paths[i], 1.0)).value;
  }
  const McEstimate ee = summarize(ev), re = summarize(rv);
  CHECK(std::abs(ee.value - 1.0) <= 3.0 * ee.std_error);
  CHECK(std::abs(re.value - 1.0) <= 3.0 * re.std_error);
}

TEST_CASE("square function tracks its closed form") {
  const std::size_t n_paths = 250;
  const TimeGrid grid{1.0, 4096, 8};
  const FbmSampler sampler(grid, HurstIndex(0.3));
  const auto paths = make_paths(sampler, n_paths, 57);
  const auto f = FunctionSpec::polynomial({0.0, 0.0, 1.0});
  std::vector<double> est(n_paths), cf(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    est[i] = estimate_eps(f, paths[i], 8 * grid.delta(), 1.0).value;
    cf[i] = closed_form(f, paths[i], 1.0).value;
  }
  const McEstimate diff = summarize_paired_diff(est, cf);
  CHECK(std::abs(diff.value) <= 3.0 * diff.std_error);
  // E[closed form] = 0 for the even function x^2
  const McEstimate c = summarize(cf);
  CHECK(std::abs(c.value) <= 3.0 * c.std_error);
}

TEST_CASE("cubic closed form matches the Gaussian moment integral") {
  // E = 6H int_0^t s^(4H-1) ds = (3/2) t^4H
  const std::size_t n_paths = 400;
  const TimeGrid grid{1.0, 2048, 0};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  const auto paths = make_paths(sampler, n_paths, 91);
  const auto f = FunctionSpec::polynomial({0.0, 0.0, 0.0, 1.0});
  std::vector<double> cf(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) cf[i] = closed_form(f, paths[i], 1.0).value;
  const McEstimate e = summarize(cf);
  CHECK(std::abs(e.value - 1.5) <= 3.0 * e.std_error);
}

TEST_CASE("sine closed form matches the exact heat-kernel integral") {
  // E[2H int cos(B_s) s^(2H-1) ds] = 2 (1 - exp(-t^2H / 2))
  const std::size_t n_paths = 400;
  const TimeGrid grid{1.0, 2048, 0};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  const auto paths = make_paths(sampler, n_paths, 93);
  std::vector<double> cf(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i)
    cf[i] = closed_form(FunctionSpec::sine(), paths[i], 1.0).value;
  const McEstimate e = summarize(cf);
  const double exact = 2.0 * (1.0 - std::exp(-0.5));
  CHECK(std::abs(e.value - exact) <= 3.0 * e.std_error);
}

TEST_CASE("closed form tracks the generic expectation quadrature") {
  // E[closed form] = 2H int_0^t E[f'(B_s)] s^(2H-1) ds with the inner
  // expectation by Gauss-Hermite and the singular weight handled exactly
  const std::size_t n_paths = 400;
  const TimeGrid grid{1.0, 2048, 0};
  const double H = 0.3;
  const HurstIndex h(H);
  const FbmSampler sampler(grid, h);
  const std::vector<FunctionSpec> fs = {FunctionSpec::polynomial({0.0, 0.0, 0.0, 1.0}),
                                        FunctionSpec::sine(), FunctionSpec::smooth_bump()};
  for (const auto& f : fs) {
    const auto fp = f.derivative();
    const double oracle = quad::power_weighted_integral(
        [&](double s) {
          const double sigma = std::pow(std::max(s, 1e-14), H);
          return 2.0 * H *
                 quad::normal_expectation([&](double z) { return fp(sigma * z); });
        },
        0.0, 1.0, 2.0 * H, 512);
    std::vector<double> vals(n_paths);
    parallel_for(n_paths, 4, [&](std::size_t i) {
      vals[i] = closed_form(f, sampler.generate(derive_seed(4040, i)), 1.0).value;
    });
    const McEstimate e = summarize(vals);
    INFO(f.kind());
    CHECK(std::abs(e.value - oracle) <= 3.0 * e.std_error);
  }
}

TEST_CASE("one-sided term reproduces the worked expectation limit") {
  // -E[I_eps^-] for f(x)=x converges to t^2H / 2 from below
  const std::size_t n_paths = 500;
  const TimeGrid grid{1.0, 65536, 1};
  const HurstIndex h(0.3);
  const double eps = grid.delta();

  const double expected = neg_iminus_expectation(grid, 0.3, 1, 1.0);
  CHECK(std::abs(expected - 0.5) <= 0.05 * 0.5);  // the limit is visible at this mesh

  const FbmSampler sampler(grid, h);
  std::vector<double> vals(n_paths);
  parallel_for(n_paths, 4, [&](std::size_t i) {
    const FbmPath p = sampler.generate(derive_seed(1212, i));
    vals[i] = -estimate_decomposed(FunctionSpec::identity(), p, eps, 1.0).second;
  });
  const McEstimate e = summarize(vals);
  CHECK(std::abs(e.value - expected) <= 3.0 * e.std_error);  // MC vs discrete expectation
  CHECK(std::abs(e.value - 0.5) <= 0.05 * 0.5);              // and the limit itself
}

TEST_CASE("epsilon refinement moves the one-sided term toward the limit") {
  const TimeGrid grid{1.0, 4096, 32};
  double prev_gap = 1e9;
  for (std::size_t k : {32, 16, 8, 4, 1}) {
    const double gap = std::abs(neg_iminus_expectation(grid, 0.3, k, 1.0) - 0.5);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("time-dependent estimator reduces exactly for frozen time") {
  const TimeGrid grid{1.0, 512, 8};
  const FbmPath p = generate_path(grid, HurstIndex(0.3), 5);
  const auto g = FunctionSpec::polynomial({0.0, 1.0, 1.0});
  const auto g_td = FunctionSpec::space_time_product(g, {1.0});
  const double eps = 8 * grid.delta();
  CHECK(estimate_eps_td(g_td, p, eps, 1.0).value ==
        doctest::Approx(estimate_eps(g, p, eps, 1.0).value).epsilon(1e-14));
}

TEST_CASE("purely temporal integrand has zero mean") {
  // f(x,s) = s: the factor multiplying the increments is deterministic
  const std::size_t n_paths = 300;
  const TimeGrid grid{1.0, 2048, 4};
  const FbmSampler sampler(grid, HurstIndex(0.3));
  const auto f = FunctionSpec::time_polynomial({0.0, 1.0});
  std::vector<double> vals(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i)
    vals[i] = estimate_eps_td(f, sampler.generate(derive_seed(77, i)), 4 * grid.delta(), 1.0).value;
  const McEstimate e = summarize(vals);
  CHECK(std::abs(e.value) <= 3.0 * e.std_error);
}

TEST_CASE("bilinear integrand matches its time-weighted closed form") {
  // f(x,s) = x s: 2H int s^2H ds = (2H/(2H+1)) t^(2H+1)
  const std::size_t n_paths = 200;
  const TimeGrid grid{1.0, 4096, 1};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  const auto f = FunctionSpec::space_time_product(FunctionSpec::identity(), {0.0, 1.0});
  std::vector<double> vals(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i)
    vals[i] = estimate_eps_td(f, sampler.generate(derive_seed(88, i)), grid.delta(), 1.0).value;
  const McEstimate e = summarize(vals);
  const double exact = 0.6 / 1.6;
  CHECK(std::abs(e.value - exact) <= 3.0 * e.std_error);
}

TEST_CASE("expectation identity for F(x) = x^2") {
  // E[F(B_t)] - F(0) = (1/2) E[qcov of F'] with both sides equal to t^2H
  const std::size_t n_paths = 400;
  const TimeGrid grid{1.0, 4096, 8};
  const HurstIndex h(0.3);
  const FbmSampler sampler(grid, h);
  const auto fp = FunctionSpec::polynomial({0.0, 2.0});  // derivative of x^2
  std::vector<double> lhs(n_paths), rhs(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const FbmPath p = sampler.generate(derive_seed(555, i));
    const double bt = p.at_time(1.0);
    lhs[i] = bt * bt;
    rhs[i] = 0.5 * estimate_eps(fp, p, 8 * grid.delta(), 1.0).value;
  }
  const McEstimate diff = summarize_paired_diff(lhs, rhs);
  CHECK(std::abs(diff.value) <= 3.0 * diff.std_error);
  const McEstimate el = summarize(lhs);
  CHECK(std::abs(el.value - 1.0) <= 3.0 * el.std_error);
}

TEST_CASE("estimator input validation") {
  const TimeGrid grid{1.0, 128, 4};
  const FbmPath p = generate_path(grid, HurstIndex(0.3), 2);
  const auto f = FunctionSpec::identity();
  CHECK_THROWS_AS(estimate_eps(f, p, 0.3 * grid.delta(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_eps(f, p, 8 * grid.delta(), 1.0), std::invalid_argument);  // lookahead
  CHECK_THROWS_AS(estimate_eps(f, p, grid.delta(), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_eps(f, p, grid.delta(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_eps(FunctionSpec::time_polynomial({1.0}), p, grid.delta(), 1.0),
                  std::invalid_argument);
  const std::vector<double> bad = {0.0, 0.5, 0.25, 1.0};
  CHECK_THROWS_AS(estimate_riemann(f, p, bad), std::invalid_argument);
  const std::vector<double> not_zero = {0.25, 0.5, 1.0};
  CHECK_THROWS_AS(estimate_riemann(f, p, not_zero), std::invalid_argument);
}
