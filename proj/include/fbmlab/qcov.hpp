#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbmlab/fbm_engine.hpp"
#include "fbmlab/function_space.hpp"

namespace fbmlab {

/// Single-path weighted quadratic-covariation statistic.
///
/// Both discretizations integrate the singular weight d(s^2H) exactly per
/// grid cell (weights t_{i+1}^2H - t_i^2H), which keeps the s->0 mass out of
/// the discretization error; with the identity function the estimators then
/// average to t^2H exactly at any resolution.
struct QcovEstimate {
  double value = 0.0;
  enum class Form { eps_limit, riemann_sum, closed_form } form = Form::eps_limit;
  double t = 0.0;
  double eps_or_mesh = 0.0;
};

const char* to_string(QcovEstimate::Form f);

/// Shift-based form: (1/eps^2H) sum_{t_i < t} {f(B_{t_i+eps}) - f(B_{t_i})}
/// (B_{t_i+eps} - B_{t_i}) w_i. eps must be a grid multiple inside the
/// extended grid.
QcovEstimate estimate_eps(const FunctionSpec& f, const FbmPath& path, double eps, double t);

/// The two halves (I+, I-) whose difference is estimate_eps exactly.
std::pair<double, double> estimate_decomposed(const FunctionSpec& f, const FbmPath& path,
                                              double eps, double t);

/// Partition form over an on-grid partition 0 = t_0 < t_1 < ... < t_k:
/// sum_j [(t_j^2H - t_{j-1}^2H) / (t_j - t_{j-1})^2H] {f(B_{t_j}) -
/// f(B_{t_{j-1}})}(B_{t_j} - B_{t_{j-1}}). The first cell carries weight 1.
QcovEstimate estimate_riemann(const FunctionSpec& f, const FbmPath& path,
                              std::span<const double> partition);

/// Uniform partition of [0, t] with every grid point.
std::vector<double> full_partition(const FbmPath& path, double t);

/// Left-point discretization of 2H int f'(B_s) s^(2H-1) ds with exact cell
/// weights; requires a registered derivative.
QcovEstimate closed_form(const FunctionSpec& f, const FbmPath& path, double t);

/// Time-dependent shift form with f(B_{t_i+eps}, t_i+eps) - f(B_{t_i}, t_i);
/// reduces exactly to estimate_eps for time-independent f.
QcovEstimate estimate_eps_td(const FunctionSpec& f, const FbmPath& path, double eps, double t);

}  // namespace fbmlab
