#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fbmlab/fbm_engine.hpp"
#include "fbmlab/gaussian_kernel.hpp"
#include "fbmlab/mc.hpp"
#include "fbmlab/rng.hpp"

using namespace fbmlab;

namespace {

std::vector<FbmPath> make_paths(const FbmSampler& s, std::size_t n, std::uint64_t seed) {
  std::vector<FbmPath> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(s.generate(derive_seed(seed, i)));
  return out;
}

}  // namespace

TEST_CASE("grid indexing and validation") {
  TimeGrid grid{1.0, 512, 16};
  CHECK(grid.delta() == doctest::Approx(1.0 / 512));
  CHECK(grid.n_points() == 529);
  CHECK(grid.index_of(0.0) == 0);
  CHECK(grid.index_of(1.0) == 512);
  CHECK(grid.index_of(1.0 + 16.0 / 512) == 528);
  CHECK_THROWS_AS(grid.index_of(0.7501 / 512), std::invalid_argument);  // off grid
  CHECK_THROWS_AS(grid.index_of(2.0), std::invalid_argument);           // beyond grid
  CHECK_THROWS_AS((TimeGrid{1.0, 1, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TimeGrid{-1.0, 64, 0}.validate()), std::invalid_argument);
  // exact cell mass of d(s^p)
  const double p = 0.6;
  double total = 0.0;
  for (std::size_t i = 0; i < 512; ++i) total += grid.power_cell_weight(i, p);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("same seed gives bit-identical paths") {
  TimeGrid grid{1.0, 256, 8};
  FbmSampler sampler(grid, HurstIndex(0.3));
  const FbmPath a = sampler.generate(123456);
  const FbmPath b = sampler.generate(123456);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
  CHECK(a.values[0] == 0.0);
  CHECK(a.cholesky_fallback == false);

  const FbmPath c = sampler.generate(123457);
  bool any_diff = false;
  for (std::size_t i = 1; i < a.values.size(); ++i) any_diff |= (a.values[i] != c.values[i]);
  CHECK(any_diff);
}

TEST_CASE("Brownian case: increments are uncorrelated at lag 1") {
  TimeGrid grid{1.0, 512, 0};
  FbmSampler sampler(grid, HurstIndex(0.5));
  const auto paths = make_paths(sampler, 200, 901);
  // pooled lag-1 autocorrelation of increments
  double num = 0.0, den = 0.0;
  std::size_t n_prod = 0;
  for (const auto& p : paths) {
    for (std::size_t i = 0; i + 1 < 512; ++i) {
      const double d0 = p[i + 1] - p[i], d1 = p[i + 2] - p[i + 1];
      num += d0 * d1;
      den += d0 * d0;
      ++n_prod;
    }
  }
  const double rho = num / den;
  CHECK(std::abs(rho) < 3.0 / std::sqrt(static_cast<double>(n_prod)));
}

TEST_CASE("terminal variance matches the kernel") {
  TimeGrid grid{1.0, 256, 0};
  for (double H : {0.2, 0.5, 0.7}) {
    FbmSampler sampler(grid, HurstIndex(H));
    const auto paths = make_paths(sampler, 2000, 311);
    std::vector<double> sq(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const double v = paths[i].at_time(1.0);
      sq[i] = v * v;
    }
    const McEstimate v = summarize(sq);  // E B_1^2 = 1 for every H
    INFO("H = " << H);
    CHECK(std::abs(v.value - 1.0) <= 3.0 * v.std_error);
  }
}

TEST_CASE("empirical covariance matches the kernel") {
  TimeGrid grid{1.0, 256, 0};
  FbmSampler sampler(grid, HurstIndex(0.3));
  const auto paths = make_paths(sampler, 2000, 77);
  const McEstimate e = empirical_cov(paths, 0.5, 1.0);
  const double exact = covariance(0.5, 1.0, HurstIndex(0.3));
  CHECK(std::abs(e.value - exact) <= 3.0 * e.std_error);
  CHECK(e.n == 2000);

  // pinned origin
  const McEstimate z = empirical_cov(paths, 0.0, 0.0);
  CHECK(z.value == 0.0);
  CHECK(z.std_error == 0.0);

  // Brownian reduction
  FbmSampler bm(grid, HurstIndex(0.5));
  const auto bpaths = make_paths(bm, 2000, 78);
  const McEstimate eb = empirical_cov(bpaths, 0.25, 0.75);
  CHECK(std::abs(eb.value - 0.25) <= 3.0 * eb.std_error);

  // off-grid times and tiny collections rejected
  CHECK_THROWS_AS(empirical_cov(paths, 0.5 + 1e-5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(empirical_cov(std::span<const FbmPath>(paths.data(), 1), 0.5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("increment variance is stationary") {
  TimeGrid grid{1.0, 512, 0};
  const HurstIndex h(0.3);
  FbmSampler sampler(grid, h);
  const auto paths = make_paths(sampler, 1500, 1234);
  const std::size_t k = 4;
  const double exact = std::pow(k * grid.delta(), 2 * h.value());
  for (double t0 : {0.0, 0.25, 0.5}) {
    const std::size_t i0 = grid.index_of(t0);
    std::vector<double> sq(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const double d = paths[i][i0 + k] - paths[i][i0];
      sq[i] = d * d;
    }
    const McEstimate v = summarize(sq);
    INFO("t0 = " << t0);
    CHECK(std::abs(v.value - exact) <= 3.0 * v.std_error);
  }
}

TEST_CASE("cholesky fallback agrees with the embedding in distribution") {
  TimeGrid grid{1.0, 128, 0};
  const HurstIndex h(0.3);
  FbmSampler fast(grid, h);
  FbmSampler dense(grid, h, /*force_cholesky=*/true);
  CHECK_FALSE(fast.uses_cholesky_fallback());
  CHECK(dense.uses_cholesky_fallback());
  CHECK(dense.generate(5).cholesky_fallback);

  // same seed twice is still deterministic on the fallback path
  const FbmPath a = dense.generate(42), b = dense.generate(42);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

  // both samplers reproduce the exact covariance at a fixed pair
  const double exact = covariance(0.5, 1.0, h);
  for (const FbmSampler* s : {&fast, &dense}) {
    const auto paths = make_paths(*s, 1500, 5150);
    const McEstimate e = empirical_cov(paths, 0.5, 1.0);
    CHECK(std::abs(e.value - exact) <= 3.0 * e.std_error);
  }
}

TEST_CASE("lookahead region extends the grid without changing delta") {
  TimeGrid grid{2.0, 128, 32};
  FbmSampler sampler(grid, HurstIndex(0.25));
  const FbmPath p = sampler.generate(9);
  CHECK(p.values.size() == 161);
  CHECK(p.grid.time(160) == doctest::Approx(2.0 + 32 * grid.delta()));
  // variance growth continues smoothly into the lookahead region
  CHECK(std::isfinite(p.values.back()));
}
