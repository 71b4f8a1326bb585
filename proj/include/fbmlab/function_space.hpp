#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmlab/hurst.hpp"

namespace fbmlab {

/// Continuous catalog curve s -> a(s) for moving-level statistics.
class Curve {
 public:
  static Curve constant(double level);
  static Curve linear(double intercept, double slope);
  static Curve sinusoid(double amplitude, double omega, double phase, double offset);

  double operator()(double s) const;
  const std::string& kind() const { return kind_; }
  nlohmann::json to_json() const;
  static Curve from_json(const nlohmann::json& j);

 private:
  Curve(std::string kind, double p0, double p1, double p2, double p3);
  std::string kind_;
  double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
};

class FunctionImpl;

/// Closed catalog of deterministic test functions f(x) or f(x,s): step
/// functions on half-open cells (a_{j-1}, a_j] (left-continuous), polynomials,
/// sign, interval indicators, |x|^p, a handful of smooth entries, mollified
/// versions of any of them, and a few time-dependent combinations. Keeping the
/// catalog closed keeps second moments and derivatives analytically known.
class FunctionSpec {
 public:
  FunctionSpec();  // zero function

  static FunctionSpec constant(double c);
  static FunctionSpec identity();
  static FunctionSpec polynomial(std::vector<double> coeffs);  // c0 + c1 x + ...
  static FunctionSpec step(std::vector<double> breakpoints, std::vector<double> levels);
  static FunctionSpec indicator(double a, double b);  // 1 on (a, b]
  static FunctionSpec sign();
  static FunctionSpec power_abs(double p);  // |x|^p
  static FunctionSpec sine();
  static FunctionSpec cosine();
  static FunctionSpec smooth_bump();  // exp(-1/(1-x^2)) on (-1,1)

  // time-dependent catalog
  static FunctionSpec time_polynomial(std::vector<double> coeffs);  // f(x,s) = p(s)
  static FunctionSpec space_time_product(FunctionSpec space, std::vector<double> time_coeffs);
  static FunctionSpec below_curve(Curve a);  // 1 on {x < a(s)}
  static FunctionSpec elementary_td(double a, double b, double s0, double s1, double value);

  bool time_dependent() const;
  double operator()(double x) const;  // rejects time-dependent specs
  double operator()(double x, double s) const;

  bool has_derivative() const;
  FunctionSpec derivative() const;  // spatial derivative; throws if absent

  /// E[f(scale * Z, s)^2] for standard normal Z; analytic for most kinds,
  /// panelized Gauss-Legendre otherwise.
  double second_moment(double scale, double s = 0.0) const;

  std::vector<double> space_breakpoints() const;
  std::vector<double> time_breakpoints() const;

  std::string kind() const;
  nlohmann::json to_json() const;
  static FunctionSpec from_json(const nlohmann::json& j);
  /// Named shorthand ("identity", "square", ...) or an inline JSON object.
  static FunctionSpec parse(const std::string& text);

 private:
  explicit FunctionSpec(std::shared_ptr<const FunctionImpl> impl);
  std::shared_ptr<const FunctionImpl> impl_;
  friend FunctionSpec mollify(const FunctionSpec& f, int n);
  friend class FunctionImpl;
};

/// f_n(x) = integral of f(x - y/n) against the normalized bump on (0,2).
FunctionSpec mollify(const FunctionSpec& f, int n);

/// Mollifier kernel (normalized bump on (0,2)) and its primitive; exposed for
/// oracle tests.
double mollifier_kernel(double y);
double mollifier_kernel_cdf(double y);

struct NormValue {
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

struct NormOptions {
  int n_subdiv = 512;  // error estimate comes from comparing n and 2n
};

/// Two-term Gaussian-weighted norm; finite exactly on the function space the
/// covariation theory needs. First term integrates E[f(B_s)^2] s^(H-1) ds,
/// second the mirrored (T-s)^(H-1) weight.
NormValue norm_H(const FunctionSpec& f, double t_max, HurstIndex h, const NormOptions& opt = {});

/// Time-dependent variant; coincides with norm_H for time-independent f.
NormValue norm_H_star(const FunctionSpec& f, double t_max, HurstIndex h,
                      const NormOptions& opt = {});

/// Same norm driven by a raw second-moment function g2(scale, s); used for
/// composite functions (differences, sums) and independent oracles.
NormValue norm_from_second_moment(const std::function<double(double, double)>& g2,
                                  std::span<const double> time_breaks, double t_max, HurstIndex h,
                                  const NormOptions& opt = {});

/// E[g(v Z)^2] by Gauss-Legendre panels split at the breakpoint images.
double gaussian_second_moment(const std::function<double(double)>& g,
                              std::span<const double> breakpoints, double v);

}  // namespace fbmlab
