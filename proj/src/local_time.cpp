#include "fbmlab/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbmlab/mc.hpp"
#include "fbmlab/rng.hpp"

namespace fbmlab {

namespace {

void check_bandwidth(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("local_time: bandwidth must be positive");
}

}  // namespace

double default_bandwidth(double t_max, double hurst) {
  return 0.02 * std::pow(t_max, hurst);
}

std::vector<double> default_level_grid(double t_max, double hurst, std::size_t n_levels) {
  if (n_levels < 3) throw std::invalid_argument("default_level_grid: need at least 3 levels");
  if (n_levels % 2 == 0) ++n_levels;  // keep 0 on the grid
  const double span = 4.0 * std::pow(t_max, hurst);
  std::vector<double> levels(n_levels);
  const double h = 2.0 * span / static_cast<double>(n_levels - 1);
  for (std::size_t k = 0; k < n_levels; ++k)
    levels[k] = -span + h * static_cast<double>(k);
  return levels;
}

LocalTimeEstimate weighted_local_time(const FbmPath& path, double x, double t, double bandwidth) {
  check_bandwidth(bandwidth);
  const std::size_t n = path.grid.index_of(t);
  const double two_h = 2.0 * path.hurst;
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(path[i] - x) < bandwidth) sum.add(path.grid.power_cell_weight(i, two_h));
  return {x, t, sum.value() / (2.0 * bandwidth), bandwidth};
}

std::vector<double> weighted_local_time_profile(const FbmPath& path, double x, double t,
                                                double bandwidth) {
  check_bandwidth(bandwidth);
  const std::size_t n = path.grid.index_of(t);
  const double two_h = 2.0 * path.hurst;
  const double inv = 1.0 / (2.0 * bandwidth);
  std::vector<double> out(n + 1, 0.0);
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(path[i] - x) < bandwidth) sum.add(path.grid.power_cell_weight(i, two_h));
    out[i + 1] = sum.value() * inv;
  }
  return out;
}

double integral_against_local_time(const FunctionSpec& f, const FbmPath& path, double t,
                                   double bandwidth, std::span<const double> level_grid) {
  check_bandwidth(bandwidth);
  if (f.time_dependent())
    throw std::invalid_argument("integral_against_local_time: spec must be time-independent");

  std::vector<double> levels;
  if (f.kind() == "step" || f.kind() == "indicator") {
    levels = f.space_breakpoints();
  } else if (!level_grid.empty()) {
    levels.assign(level_grid.begin(), level_grid.end());
  } else {
    levels = default_level_grid(path.grid.t_max, path.hurst);
  }
  if (levels.size() < 2)
    throw std::invalid_argument("integral_against_local_time: need at least 2 levels");

  // sum_j f(a_j) [L(a_j) - L(a_{j-1})]; f sampled at the right endpoint of
  // each cell matches the left-continuous step convention
  KahanSum acc;
  double prev = weighted_local_time(path, levels[0], t, bandwidth).value;
  for (std::size_t j = 1; j < levels.size(); ++j) {
    const double cur = weighted_local_time(path, levels[j], t, bandwidth).value;
    const double fj = f(levels[j]);
    if (fj != 0.0) acc.add(fj * (cur - prev));
    prev = cur;
  }
  return acc.value();
}

double OccupationCheck::relative_gap() const {
  const double scale = std::max(std::abs(time_side), std::abs(space_side));
  if (scale == 0.0) return 0.0;
  return std::abs(time_side - space_side) / scale;
}

OccupationCheck occupation_check(const FbmPath& path, const FunctionSpec& phi, double t,
                                 double bandwidth, std::span<const double> level_grid) {
  check_bandwidth(bandwidth);
  if (level_grid.size() < 2)
    throw std::invalid_argument("occupation_check: need a level grid");
  const std::size_t n = path.grid.index_of(t);
  const double delta = path.grid.delta();
  const double x0 = level_grid[0];
  const double h = level_grid[1] - level_grid[0];
  const std::size_t n_levels = level_grid.size();

  KahanSum time_side, space_side;
  const double cell_mass = delta / (2.0 * bandwidth);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = path.grid.time(i);
    const double b = path[i];
    time_side.add(phi(b, s) * delta);
    // levels with |b - x_k| < bandwidth
    const auto lo = static_cast<long>(std::ceil((b - bandwidth - x0) / h + 1e-12));
    const auto hi = static_cast<long>(std::floor((b + bandwidth - x0) / h - 1e-12));
    for (long k = std::max(lo, 0L); k <= std::min<long>(hi, static_cast<long>(n_levels) - 1);
         ++k)
      space_side.add(phi(level_grid[static_cast<std::size_t>(k)], s) * cell_mass * h);
  }
  return {time_side.value(), space_side.value()};
}

TanakaCheck tanaka_expectation_check(HurstIndex h, double x, double t, std::size_t n_paths,
                                     const TimeGrid& grid, double bandwidth, std::uint64_t seed,
                                     unsigned workers) {
  h.require_rough("tanaka_expectation_check");
  if (n_paths < 2) throw std::invalid_argument("tanaka_expectation_check: need >= 2 paths");
  FbmSampler sampler(grid, h);
  std::vector<double> folded(n_paths), local(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    const FbmPath path = sampler.generate(derive_seed(seed, i));
    folded[i] = std::abs(path.at_time(t) - x) - std::abs(x);
    local[i] = weighted_local_time(path, x, t, bandwidth).value;
  });
  TanakaCheck out;
  out.folded_mean = summarize(folded).value;
  out.local_time_mean = summarize(local).value;
  out.diff_std_error = summarize_paired_diff(folded, local).std_error;
  out.n_paths = n_paths;
  return out;
}

std::vector<double> curve_local_time(const FbmPath& path, const Curve& a, double t,
                                     double bandwidth, std::span<const double> level_grid) {
  check_bandwidth(bandwidth);
  if (level_grid.size() < 2)
    throw std::invalid_argument("curve_local_time: need a level grid");
  const std::size_t n = path.grid.index_of(t);
  const double two_h = 2.0 * path.hurst;
  const double x0 = level_grid[0];
  const double h = level_grid[1] - level_grid[0];
  const double inv = 1.0 / (2.0 * bandwidth);
  const auto top = static_cast<long>(level_grid.size()) - 1;

  std::vector<double> out(n + 1, 0.0);
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    const double mid = path.grid.time(i) + 0.5 * path.grid.delta();
    long k = std::lround((a(mid) - x0) / h);
    k = std::clamp(k, 0L, top);
    const double level = level_grid[static_cast<std::size_t>(k)];
    if (std::abs(path[i] - level) < bandwidth)
      sum.add(path.grid.power_cell_weight(i, two_h));
    out[i + 1] = sum.value() * inv;
  }
  return out;
}

}  // namespace fbmlab
