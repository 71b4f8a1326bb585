#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fbmlab/hurst.hpp"
#include "fbmlab/mc.hpp"

namespace fbmlab {

/// Uniform time grid on [0, t_max], optionally extended past t_max so that
/// epsilon-shifted statistics can read B_{s+eps} without extrapolation.
struct TimeGrid {
  double t_max = 1.0;
  std::size_t n_steps = 0;
  std::size_t lookahead_steps = 0;

  double delta() const { return t_max / static_cast<double>(n_steps); }
  std::size_t total_steps() const { return n_steps + lookahead_steps; }
  std::size_t n_points() const { return total_steps() + 1; }
  double time(std::size_t i) const { return static_cast<double>(i) * delta(); }

  /// Index of an on-grid time; off-grid times are rejected, never interpolated.
  std::size_t index_of(double t) const;

  /// t_{i+1}^p - t_i^p, the exact mass of d(s^p) over cell i.
  double power_cell_weight(std::size_t i, double p) const;

  void validate() const;
};

struct FbmPath {
  TimeGrid grid;
  double hurst = 0.5;
  std::uint64_t seed = 0;
  bool cholesky_fallback = false;
  std::vector<double> values;  // values[0] = 0, size n_points()

  double operator[](std::size_t i) const { return values[i]; }
  double at_time(double t) const { return values[grid.index_of(t)]; }
};

/// Exact-in-distribution sampler of fractional Gaussian noise by circulant
/// embedding of the Toeplitz increment covariance (O(n log n)), with a dense
/// Cholesky fallback if the embedding is indefinite beyond tolerance.
/// Immutable after construction; generate() is safe to call concurrently.
class FbmSampler {
 public:
  /// force_cholesky skips the embedding and factors the dense covariance
  /// directly; the fallback path is otherwise only reachable on indefinite
  /// embeddings.
  FbmSampler(TimeGrid grid, HurstIndex h, bool force_cholesky = false);
  ~FbmSampler();
  FbmSampler(const FbmSampler&) = delete;
  FbmSampler& operator=(const FbmSampler&) = delete;

  FbmPath generate(std::uint64_t seed) const;
  bool uses_cholesky_fallback() const { return fallback_; }
  const TimeGrid& grid() const { return grid_; }
  HurstIndex hurst() const { return h_; }

 private:
  TimeGrid grid_;
  HurstIndex h_;
  bool fallback_ = false;
  std::vector<double> spectrum_scale_;  // sqrt(lambda_j / M), j = 0..m
  std::vector<double> chol_;            // lower triangular factor when fallback_
  struct Plan;
  std::unique_ptr<Plan> plan_;
};

/// One-shot convenience wrapper around FbmSampler.
FbmPath generate_path(const TimeGrid& grid, HurstIndex h, std::uint64_t seed);

/// Sample mean and standard error of B_s * B_t over a path collection.
McEstimate empirical_cov(std::span<const FbmPath> paths, double s, double t);

}  // namespace fbmlab
