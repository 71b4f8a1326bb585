#include "fbmlab/fbm_engine.hpp"

#include <fftw3.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fbmlab/rng.hpp"

namespace fbmlab {

namespace {

// FFTW planning is not thread-safe; execution on caller-owned arrays is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kEigClampFloor = -1e-10;  // clamp window for rounding noise

// fGn autocovariance at lag k, unit spacing scaled by delta^(2H)
double fgn_autocov(std::size_t k, double two_h, double delta_2h) {
  const double kk = static_cast<double>(k);
  return 0.5 * delta_2h *
         (std::pow(kk + 1.0, two_h) + std::pow(std::abs(kk - 1.0), two_h) -
          2.0 * std::pow(kk, two_h));
}

}  // namespace

std::size_t TimeGrid::index_of(double t) const {
  const double d = delta();
  const double raw = t / d;
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-9 * std::max(1.0, std::abs(raw)))
    throw std::invalid_argument("TimeGrid: time " + std::to_string(t) +
                                " is not a grid point (no interpolation)");
  if (rounded < 0.0 || rounded > static_cast<double>(total_steps()))
    throw std::invalid_argument("TimeGrid: time " + std::to_string(t) + " outside grid");
  return static_cast<std::size_t>(rounded);
}

double TimeGrid::power_cell_weight(std::size_t i, double p) const {
  const double d = delta();
  return std::pow(d * static_cast<double>(i + 1), p) - std::pow(d * static_cast<double>(i), p);
}

void TimeGrid::validate() const {
  if (!(t_max > 0.0)) throw std::invalid_argument("TimeGrid: t_max must be positive");
  if (n_steps < 2) throw std::invalid_argument("TimeGrid: need n_steps >= 2");
}

struct FbmSampler::Plan {
  fftw_plan c2r = nullptr;
  std::size_t m = 0;  // increments
  std::size_t M = 0;  // embedding size, 2m

  Plan(std::size_t m_, std::size_t M_) : m(m_), M(M_) {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_complex* in = fftw_alloc_complex(m + 1);
    double* out = fftw_alloc_real(M);
    c2r = fftw_plan_dft_c2r_1d(static_cast<int>(M), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (!c2r) throw std::runtime_error("FbmSampler: FFTW plan creation failed");
  }
  ~Plan() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (c2r) fftw_destroy_plan(c2r);
  }
};

FbmSampler::FbmSampler(TimeGrid grid, HurstIndex h, bool force_cholesky)
    : grid_(grid), h_(h) {
  grid_.validate();
  const std::size_t m = grid_.total_steps();
  const std::size_t M = 2 * m;
  const double two_h = h_.two_h();
  const double delta_2h = std::pow(grid_.delta(), two_h);

  double min_eig = 0.0;
  std::vector<double> lambda(m + 1);
  if (!force_cholesky) {
    // first row of the circulant embedding: gamma(0..m), mirrored
    std::vector<double> c(M);
    for (std::size_t k = 0; k <= m; ++k) c[k] = fgn_autocov(k, two_h, delta_2h);
    for (std::size_t k = m + 1; k < M; ++k) c[k] = c[M - k];

    // eigenvalues of the circulant = DFT of its first row (real by symmetry)
    std::lock_guard<std::mutex> lock(fftw_mutex());
    double* in = fftw_alloc_real(M);
    fftw_complex* out = fftw_alloc_complex(m + 1);
    fftw_plan r2c = fftw_plan_dft_r2c_1d(static_cast<int>(M), in, out, FFTW_ESTIMATE);
    std::memcpy(in, c.data(), M * sizeof(double));
    fftw_execute(r2c);
    for (std::size_t j = 0; j <= m; ++j) lambda[j] = out[j][0];
    fftw_destroy_plan(r2c);
    fftw_free(in);
    fftw_free(out);
    min_eig = lambda[0];
    for (double v : lambda) min_eig = std::min(min_eig, v);
  }

  if (!force_cholesky && min_eig >= kEigClampFloor) {
    spectrum_scale_.resize(m + 1);
    const double inv_m = 1.0 / static_cast<double>(M);
    for (std::size_t j = 0; j <= m; ++j)
      spectrum_scale_[j] = std::sqrt(std::max(lambda[j], 0.0) * inv_m);
    plan_ = std::make_unique<Plan>(m, M);
    return;
  }

  // indefinite embedding: factor the dense Toeplitz increment covariance
  fallback_ = true;
  Eigen::MatrixXd sigma(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = fgn_autocov(i - j, two_h, delta_2h);
      sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  const double scale = delta_2h;
  for (double jitter : {0.0, 1e-12, 1e-10}) {
    Eigen::MatrixXd reg = sigma;
    if (jitter > 0.0) reg.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd L = llt.matrixL();
      chol_.assign(L.data(), L.data() + m * m);  // column-major
      return;
    }
  }
  throw std::runtime_error(
      "FbmSampler: circulant embedding indefinite and Cholesky fallback failed after "
      "regularization");
}

FbmSampler::~FbmSampler() = default;

FbmPath FbmSampler::generate(std::uint64_t seed) const {
  const std::size_t m = grid_.total_steps();
  FbmPath path;
  path.grid = grid_;
  path.hurst = h_.value();
  path.seed = seed;
  path.cholesky_fallback = fallback_;
  path.values.assign(m + 1, 0.0);

  GaussianSampler normals(splitmix64(seed));
  std::vector<double> increments(m);

  if (!fallback_) {
    const std::size_t M = 2 * m;
    fftw_complex* spec = fftw_alloc_complex(m + 1);
    double* out = fftw_alloc_real(M);
    const double inv_root2 = 1.0 / std::numbers::sqrt2;
    spec[0][0] = spectrum_scale_[0] * normals();
    spec[0][1] = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
      spec[j][0] = spectrum_scale_[j] * normals() * inv_root2;
      spec[j][1] = spectrum_scale_[j] * normals() * inv_root2;
    }
    spec[m][0] = spectrum_scale_[m] * normals();
    spec[m][1] = 0.0;
    fftw_execute_dft_c2r(plan_->c2r, spec, out);
    for (std::size_t i = 0; i < m; ++i) increments[i] = out[i];
    fftw_free(spec);
    fftw_free(out);
  } else {
    std::vector<double> z(m);
    for (auto& v : z) v = normals();
    // increments = L z, L stored column-major lower triangular
    for (std::size_t j = 0; j < m; ++j) {
      const double zj = z[j];
      const double* col = chol_.data() + j * m;
      for (std::size_t i = j; i < m; ++i) increments[i] += col[i] * zj;
    }
  }

  for (std::size_t i = 0; i < m; ++i) path.values[i + 1] = path.values[i] + increments[i];
  return path;
}

FbmPath generate_path(const TimeGrid& grid, HurstIndex h, std::uint64_t seed) {
  return FbmSampler(grid, h).generate(seed);
}

McEstimate empirical_cov(std::span<const FbmPath> paths, double s, double t) {
  if (paths.size() < 2) throw std::invalid_argument("empirical_cov: need at least 2 paths");
  const std::size_t is = paths.front().grid.index_of(s);
  const std::size_t it = paths.front().grid.index_of(t);
  std::vector<double> prods;
  prods.reserve(paths.size());
  for (const auto& p : paths) prods.push_back(p[is] * p[it]);
  return summarize(prods);
}

}  // namespace fbmlab
