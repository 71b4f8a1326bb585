#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fbmlab/fbm_engine.hpp"
#include "fbmlab/function_space.hpp"

namespace fbmlab {

/// Occupation-window estimate of the weighted local time at a level:
/// (1/2b) sum_{t_i < t} 1{|B_{t_i} - x| < b} (t_{i+1}^2H - t_i^2H).
struct LocalTimeEstimate {
  double x = 0.0;
  double t = 0.0;
  double value = 0.0;
  double bandwidth = 0.0;
};

LocalTimeEstimate weighted_local_time(const FbmPath& path, double x, double t, double bandwidth);

/// Cumulative weighted local time at every grid time up to t (entry 0 is 0).
std::vector<double> weighted_local_time_profile(const FbmPath& path, double x, double t,
                                                double bandwidth);

/// Default kernel width 0.02 * t_max^H; callers sweep {1/2x, 1x, 2x} around it.
double default_bandwidth(double t_max, double hurst);

/// Uniform level grid spanning +-4 t_max^H, odd count so 0 is a grid level.
std::vector<double> default_level_grid(double t_max, double hurst, std::size_t n_levels = 201);

/// Stieltjes integral of f against the level measure of the local time:
/// sum_j f(a_j) [L(a_j,t) - L(a_{j-1},t)] over the step boundaries of f.
/// Non-step specs are first sampled onto level_grid (default grid if empty).
double integral_against_local_time(const FunctionSpec& f, const FbmPath& path, double t,
                                   double bandwidth, std::span<const double> level_grid = {});

/// Both sides of the occupation identity on one path: the direct time sum of
/// phi(B_s, s) ds against the space sum over a binned (unweighted, ds-weight)
/// local time.
struct OccupationCheck {
  double time_side = 0.0;
  double space_side = 0.0;
  double relative_gap() const;
};

OccupationCheck occupation_check(const FbmPath& path, const FunctionSpec& phi, double t,
                                 double bandwidth, std::span<const double> level_grid);

/// Monte Carlo check of the Tanaka identity in expectation: E|B_t - x| - |x|
/// against E L(x,t); the stochastic-integral term has mean zero.
struct TanakaCheck {
  double folded_mean = 0.0;       // E_MC |B_t - x| - |x|
  double local_time_mean = 0.0;   // E_MC L(x, t)
  double diff_std_error = 0.0;    // SE of the per-path difference
  std::size_t n_paths = 0;
};

TanakaCheck tanaka_expectation_check(HurstIndex h, double x, double t, std::size_t n_paths,
                                     const TimeGrid& grid, double bandwidth, std::uint64_t seed,
                                     unsigned workers = 1);

/// Local time accumulated along a moving level: per time cell the curve is
/// snapped to the nearest grid level and that level's occupation mass is
/// collected. Returns the cumulative process at every grid time up to t;
/// increments are nonnegative by construction.
std::vector<double> curve_local_time(const FbmPath& path, const Curve& a, double t,
                                     double bandwidth, std::span<const double> level_grid);

}  // namespace fbmlab
