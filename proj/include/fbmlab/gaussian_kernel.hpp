#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmlab/hurst.hpp"

namespace fbmlab {

/// E[B_t B_s] = (t^2H + s^2H - |t-s|^2H) / 2 for fractional Brownian motion.
double covariance(double s, double t, HurstIndex h);

/// Covariance pair (mu, rho2) of (B_s, B_t): mu = E[B_t B_s],
/// rho2 = t^2H s^2H - mu^2 (the determinant of the covariance matrix).
struct PairCovariance {
  double s = 0.0;
  double t = 0.0;
  double mu = 0.0;
  double rho2 = 0.0;
};

PairCovariance pair_covariance(double s, double t, HurstIndex h);

/// E[(B_t - B_s)(B_t' - B_s')] for intervals [s,t), [s',t').
double increment_cross_cov(double s_prime, double t_prime, double s, double t, HurstIndex h);

/// The explicit action of the M operator on an interval indicator,
/// K_H * ((b-x)/|b-x|^(3/2-H) - (a-x)/|a-x|^(3/2-H)).
/// Singular at x = a and x = b; exact hits are rejected.
double m_indicator(double a, double b, double x, HurstIndex h);

/// Normalizing constant K_H of m_indicator.
double m_indicator_constant(HurstIndex h);

// ---------------------------------------------------------------------------
// Randomized verification of the covariance inequality ladder
// ---------------------------------------------------------------------------

struct InequalityStat {
  std::string name;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;          // min over samples of (bound - value), scaled
  std::vector<double> worst_tuple;    // sample attaining the worst margin
};

/// Empirical ratio |quantity| / bound for estimates whose constant C_H is
/// not pinned; reported, never asserted.
struct RatioStat {
  std::string name;
  std::size_t samples = 0;
  double max_ratio = 0.0;
  std::vector<double> worst_tuple;
};

struct ViolationReport {
  std::vector<InequalityStat> inequalities;
  std::vector<RatioStat> ratios;
  std::size_t total_violations() const;
  nlohmann::json to_json() const;
};

/// Draws random tuples and checks every two-sided bound in the ladder with
/// relative slack 1e-12 (scaled by the larger side). Sampling: times uniform
/// on (0,4], H uniform on (0.02,0.48) for the rough-regime bounds and on
/// (0.02,0.98) for the variance-product bound, x and alpha uniform on [0,1).
ViolationReport verify_inequality_suite(std::size_t samples, std::uint64_t seed);

}  // namespace fbmlab
