#include "fbmlab/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fbmlab/quadrature.hpp"

namespace fbmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScaleFloor = 1e-300;

double normal_cdf(double z) {
  if (std::isnan(z)) return 0.5;  // only reached via 0/0 at a zero breakpoint
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double odd_factorial(int k) {  // (k-1)!! for even k
  double v = 1.0;
  for (int j = k - 1; j > 1; j -= 2) v *= j;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Curve
// ---------------------------------------------------------------------------

Curve::Curve(std::string kind, double p0, double p1, double p2, double p3)
    : kind_(std::move(kind)), p0_(p0), p1_(p1), p2_(p2), p3_(p3) {}

Curve Curve::constant(double level) { return Curve("constant", level, 0, 0, 0); }
Curve Curve::linear(double intercept, double slope) {
  return Curve("linear", intercept, slope, 0, 0);
}
Curve Curve::sinusoid(double amplitude, double omega, double phase, double offset) {
  return Curve("sinusoid", amplitude, omega, phase, offset);
}

double Curve::operator()(double s) const {
  if (kind_ == "constant") return p0_;
  if (kind_ == "linear") return p0_ + p1_ * s;
  return p3_ + p0_ * std::sin(p1_ * s + p2_);
}

nlohmann::json Curve::to_json() const {
  if (kind_ == "constant") return {{"kind", kind_}, {"params", {{"level", p0_}}}};
  if (kind_ == "linear")
    return {{"kind", kind_}, {"params", {{"intercept", p0_}, {"slope", p1_}}}};
  return {{"kind", kind_},
          {"params",
           {{"amplitude", p0_}, {"omega", p1_}, {"phase", p2_}, {"offset", p3_}}}};
}

Curve Curve::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  const auto& p = j.at("params");
  if (kind == "constant") return constant(p.at("level"));
  if (kind == "linear") return linear(p.at("intercept"), p.at("slope"));
  if (kind == "sinusoid")
    return sinusoid(p.at("amplitude"), p.at("omega"), p.at("phase"), p.at("offset"));
  throw std::invalid_argument("Curve::from_json: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Function implementations
// ---------------------------------------------------------------------------

class FunctionImpl {
 public:
  virtual ~FunctionImpl() = default;
  virtual std::string kind() const = 0;
  virtual bool time_dependent() const { return false; }
  virtual double eval(double x, double s) const = 0;
  virtual bool has_derivative() const { return false; }
  virtual std::shared_ptr<const FunctionImpl> derivative() const {
    throw std::logic_error("FunctionSpec: no registered derivative for kind '" + kind() + "'");
  }
  virtual double second_moment(double scale, double s) const;
  virtual std::vector<double> space_breakpoints() const { return {}; }
  virtual std::vector<double> time_breakpoints() const { return {}; }
  virtual nlohmann::json to_json() const = 0;

 protected:
  static FunctionSpec wrap(std::shared_ptr<const FunctionImpl> impl) {
    return FunctionSpec(std::move(impl));
  }
};

double FunctionImpl::second_moment(double scale, double s) const {
  const auto bps = space_breakpoints();
  return gaussian_second_moment([&](double x) { return eval(x, s); }, bps, scale);
}

namespace {

// ---- piecewise constant (step, indicator) ----------------------------------

class StepLikeImpl final : public FunctionImpl {
 public:
  StepLikeImpl(std::string kind, std::vector<double> boundaries, std::vector<double> piece_values,
               nlohmann::json params)
      : kind_(std::move(kind)),
        boundaries_(std::move(boundaries)),
        values_(std::move(piece_values)),
        params_(std::move(params)) {
    if (values_.size() != boundaries_.size() + 1)
      throw std::invalid_argument("StepLikeImpl: need one value per piece");
    if (!std::is_sorted(boundaries_.begin(), boundaries_.end()))
      throw std::invalid_argument("step breakpoints must be strictly increasing");
    for (std::size_t i = 1; i < boundaries_.size(); ++i)
      if (boundaries_[i] == boundaries_[i - 1])
        throw std::invalid_argument("step breakpoints must be strictly increasing");
  }

  std::string kind() const override { return kind_; }

  // value on (b_{i-1}, b_i]; left-continuous, so the boundary itself belongs
  // to the piece that ends there
  double eval(double x, double) const override {
    const auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), x);
    return values_[static_cast<std::size_t>(it - boundaries_.begin())];
  }

  double second_moment(double scale, double) const override {
    const double v = std::max(scale, kScaleFloor);
    double acc = 0.0;
    double lower_cdf = 0.0;  // Phi(-inf)
    for (std::size_t i = 0; i < boundaries_.size(); ++i) {
      const double upper_cdf = normal_cdf(boundaries_[i] / v);
      acc += values_[i] * values_[i] * (upper_cdf - lower_cdf);
      lower_cdf = upper_cdf;
    }
    acc += values_.back() * values_.back() * (1.0 - lower_cdf);
    return acc;
  }

  std::vector<double> space_breakpoints() const override { return boundaries_; }
  nlohmann::json to_json() const override {
    return {{"kind", kind_}, {"params", params_}, {"time_dependent", false}};
  }

  const std::vector<double>& boundaries() const { return boundaries_; }
  const std::vector<double>& piece_values() const { return values_; }

 private:
  std::string kind_;
  std::vector<double> boundaries_;
  std::vector<double> values_;
  nlohmann::json params_;
};

// ---- polynomial -------------------------------------------------------------

class PolynomialImpl final : public FunctionImpl {
 public:
  explicit PolynomialImpl(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }
  std::string kind() const override { return "polynomial"; }
  double eval(double x, double) const override {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }
  bool has_derivative() const override { return true; }
  std::shared_ptr<const FunctionImpl> derivative() const override {
    std::vector<double> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<double>(i));
    return std::make_shared<PolynomialImpl>(std::move(d));
  }
  double second_moment(double scale, double) const override {
    // E p(vZ)^2 via Gaussian moments E Z^k = (k-1)!! (even k)
    const double v = std::max(scale, kScaleFloor);
    double acc = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < c_.size(); ++j) {
        const std::size_t k = i + j;
        if (k % 2) continue;
        acc += c_[i] * c_[j] * std::pow(v, static_cast<double>(k)) *
               odd_factorial(static_cast<int>(k));
      }
    return acc;
  }
  nlohmann::json to_json() const override {
    return {{"kind", "polynomial"}, {"params", {{"coeffs", c_}}}, {"time_dependent", false}};
  }
  const std::vector<double>& coeffs() const { return c_; }

 private:
  std::vector<double> c_;
};

// ---- sign -------------------------------------------------------------------

class SignImpl final : public FunctionImpl {
 public:
  std::string kind() const override { return "sign"; }
  double eval(double x, double) const override {
    return (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  }
  double second_moment(double, double) const override { return 1.0; }
  std::vector<double> space_breakpoints() const override { return {0.0}; }
  nlohmann::json to_json() const override {
    return {{"kind", "sign"}, {"params", nlohmann::json::object()}, {"time_dependent", false}};
  }
};

// ---- |x|^p -------------------------------------------------------------------

class PowerAbsImpl final : public FunctionImpl {
 public:
  explicit PowerAbsImpl(double p) : p_(p) {
    if (p < 0.0) throw std::invalid_argument("power_abs: exponent must be nonnegative");
  }
  std::string kind() const override { return "power_abs"; }
  double eval(double x, double) const override { return std::pow(std::abs(x), p_); }
  double second_moment(double scale, double) const override {
    // E |vZ|^(2p) = v^(2p) 2^p Gamma(p + 1/2) / sqrt(pi)
    const double v = std::max(scale, kScaleFloor);
    return std::exp(2.0 * p_ * std::log(v) + p_ * std::numbers::ln2 +
                    std::lgamma(p_ + 0.5) - 0.5 * std::log(std::numbers::pi));
  }
  std::vector<double> space_breakpoints() const override { return {0.0}; }
  nlohmann::json to_json() const override {
    return {{"kind", "power_abs"}, {"params", {{"p", p_}}}, {"time_dependent", false}};
  }

 private:
  double p_;
};

// ---- sine / cosine -----------------------------------------------------------

class CosineImpl final : public FunctionImpl {
 public:
  std::string kind() const override { return "cosine"; }
  double eval(double x, double) const override { return std::cos(x); }
  double second_moment(double scale, double) const override {
    const double v = std::max(scale, kScaleFloor);
    return 0.5 * (1.0 + std::exp(-2.0 * v * v));
  }
  nlohmann::json to_json() const override {
    return {{"kind", "cosine"}, {"params", nlohmann::json::object()}, {"time_dependent", false}};
  }
};

class SineImpl final : public FunctionImpl {
 public:
  std::string kind() const override { return "sine"; }
  double eval(double x, double) const override { return std::sin(x); }
  bool has_derivative() const override { return true; }
  std::shared_ptr<const FunctionImpl> derivative() const override {
    return std::make_shared<CosineImpl>();
  }
  double second_moment(double scale, double) const override {
    const double v = std::max(scale, kScaleFloor);
    return 0.5 * (1.0 - std::exp(-2.0 * v * v));
  }
  nlohmann::json to_json() const override {
    return {{"kind", "sine"}, {"params", nlohmann::json::object()}, {"time_dependent", false}};
  }
};

// ---- compactly supported smooth bump ------------------------------------------

double bump_value(double x) {
  const double u = 1.0 - x * x;
  return u > 0.0 ? std::exp(-1.0 / u) : 0.0;
}

double bump_d1_value(double x) {
  const double u = 1.0 - x * x;
  if (u <= 0.0) return 0.0;
  return bump_value(x) * (-2.0 * x / (u * u));
}

class SmoothBumpD1Impl final : public FunctionImpl {
 public:
  std::string kind() const override { return "smooth_bump_d1"; }
  double eval(double x, double) const override { return bump_d1_value(x); }
  std::vector<double> space_breakpoints() const override { return {-1.0, 1.0}; }
  nlohmann::json to_json() const override {
    return {{"kind", "smooth_bump_d1"},
            {"params", nlohmann::json::object()},
            {"time_dependent", false}};
  }
};

class SmoothBumpImpl final : public FunctionImpl {
 public:
  std::string kind() const override { return "smooth_bump"; }
  double eval(double x, double) const override { return bump_value(x); }
  bool has_derivative() const override { return true; }
  std::shared_ptr<const FunctionImpl> derivative() const override {
    return std::make_shared<SmoothBumpD1Impl>();
  }
  std::vector<double> space_breakpoints() const override { return {-1.0, 1.0}; }
  nlohmann::json to_json() const override {
    return {{"kind", "smooth_bump"},
            {"params", nlohmann::json::object()},
            {"time_dependent", false}};
  }
};

// ---- time-dependent kinds ------------------------------------------------------

double poly_eval(const std::vector<double>& c, double s) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
  return acc;
}

class TimePolynomialImpl final : public FunctionImpl {
 public:
  explicit TimePolynomialImpl(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }
  std::string kind() const override { return "time_polynomial"; }
  bool time_dependent() const override { return true; }
  double eval(double, double s) const override { return poly_eval(c_, s); }
  bool has_derivative() const override { return true; }
  std::shared_ptr<const FunctionImpl> derivative() const override {  // d/dx = 0
    return std::make_shared<PolynomialImpl>(std::vector<double>{0.0});
  }
  double second_moment(double, double s) const override {
    const double p = poly_eval(c_, s);
    return p * p;
  }
  nlohmann::json to_json() const override {
    return {{"kind", "time_polynomial"}, {"params", {{"coeffs", c_}}}, {"time_dependent", true}};
  }

 private:
  std::vector<double> c_;
};

class SpaceTimeProductImpl final : public FunctionImpl {
 public:
  SpaceTimeProductImpl(std::shared_ptr<const FunctionImpl> space, std::vector<double> time_coeffs)
      : space_(std::move(space)), tc_(std::move(time_coeffs)) {
    if (tc_.empty()) tc_.push_back(0.0);
    if (space_->time_dependent())
      throw std::invalid_argument("space_time_product: space factor must be time-independent");
  }
  std::string kind() const override { return "space_time_product"; }
  bool time_dependent() const override { return true; }
  double eval(double x, double s) const override {
    return space_->eval(x, 0.0) * poly_eval(tc_, s);
  }
  bool has_derivative() const override { return space_->has_derivative(); }
  std::shared_ptr<const FunctionImpl> derivative() const override {
    return std::make_shared<SpaceTimeProductImpl>(space_->derivative(), tc_);
  }
  double second_moment(double scale, double s) const override {
    const double p = poly_eval(tc_, s);
    return p * p * space_->second_moment(scale, 0.0);
  }
  std::vector<double> space_breakpoints() const override { return space_->space_breakpoints(); }
  nlohmann::json to_json() const override {
    return {{"kind", "space_time_product"},
            {"params", {{"time_coeffs", tc_}}},
            {"base", space_->to_json()},
            {"time_dependent", true}};
  }

 private:
  std::shared_ptr<const FunctionImpl> space_;
  std::vector<double> tc_;
};

class BelowCurveImpl final : public FunctionImpl {
 public:
  explicit BelowCurveImpl(Curve a) : a_(std::move(a)) {}
  std::string kind() const override { return "below_curve"; }
  bool time_dependent() const override { return true; }
  double eval(double x, double s) const override { return x < a_(s) ? 1.0 : 0.0; }
  double second_moment(double scale, double s) const override {
    return normal_cdf(a_(s) / std::max(scale, kScaleFloor));
  }
  nlohmann::json to_json() const override {
    return {{"kind", "below_curve"},
            {"params", {{"curve", a_.to_json()}}},
            {"time_dependent", true}};
  }
  const Curve& curve() const { return a_; }

 private:
  Curve a_;
};

class ElementaryTdImpl final : public FunctionImpl {
 public:
  ElementaryTdImpl(double a, double b, double s0, double s1, double value)
      : a_(a), b_(b), s0_(s0), s1_(s1), v_(value) {
    if (!(a < b) || !(s0 < s1))
      throw std::invalid_argument("elementary_td: need a < b and s0 < s1");
  }
  std::string kind() const override { return "elementary_td"; }
  bool time_dependent() const override { return true; }
  double eval(double x, double s) const override {
    return (x > a_ && x <= b_ && s > s0_ && s <= s1_) ? v_ : 0.0;
  }
  double second_moment(double scale, double s) const override {
    if (!(s > s0_ && s <= s1_)) return 0.0;
    const double v = std::max(scale, kScaleFloor);
    return v_ * v_ * (normal_cdf(b_ / v) - normal_cdf(a_ / v));
  }
  std::vector<double> space_breakpoints() const override { return {a_, b_}; }
  std::vector<double> time_breakpoints() const override { return {s0_, s1_}; }
  nlohmann::json to_json() const override {
    return {{"kind", "elementary_td"},
            {"params", {{"a", a_}, {"b", b_}, {"s0", s0_}, {"s1", s1_}, {"value", v_}}},
            {"time_dependent", true}};
  }

 private:
  double a_, b_, s0_, s1_, v_;
};

// ---- mollification ---------------------------------------------------------------

// normalizer of the bump y -> exp(1/((y-1)^2 - 1)) on (0,2)
const double kMollifierNorm = [] {
  return quad::integrate_gl(
      [](double y) {
        const double d = (y - 1.0) * (y - 1.0) - 1.0;
        return d < 0.0 ? std::exp(1.0 / d) : 0.0;
      },
      0.0, 2.0, 128);
}();

// (y-1)^2 - 1 can round to 0 at the support edges; the kernel limit there is 0
double zeta_raw(double y) {
  if (y <= 0.0 || y >= 2.0) return 0.0;
  const double d = (y - 1.0) * (y - 1.0) - 1.0;
  if (d >= 0.0) return 0.0;
  return std::exp(1.0 / d);
}

double zeta_d1_raw(double y) {
  if (y <= 0.0 || y >= 2.0) return 0.0;
  const double d = (y - 1.0) * (y - 1.0) - 1.0;
  if (d >= 0.0) return 0.0;
  return std::exp(1.0 / d) * (-2.0 * (y - 1.0) / (d * d));
}

class MollifiedDerivImpl;

class MollifiedImpl final : public FunctionImpl,
                            public std::enable_shared_from_this<MollifiedImpl> {
 public:
  MollifiedImpl(std::shared_ptr<const FunctionImpl> base, int n) : base_(std::move(base)), n_(n) {
    if (n_ < 1) throw std::invalid_argument("mollify: n must be >= 1");
    if (base_->time_dependent())
      throw std::invalid_argument("mollify: base must be time-independent");
    if (const auto* sl = dynamic_cast<const StepLikeImpl*>(base_.get())) step_ = sl;
  }

  std::string kind() const override { return "mollified"; }

  double eval(double x, double) const override {
    if (step_) return eval_piecewise(x);
    // fixed 64-point rule against the bump weight
    const auto& r = quad::gauss_legendre(64);
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double y = 1.0 + r.nodes[i];  // map [-1,1] -> [0,2]
      acc += r.weights[i] * zeta_raw(y) * base_->eval(x - y / n_, 0.0);
    }
    return acc / kMollifierNorm;
  }

  // derivative of the smoothed function; exact for piecewise-constant bases,
  // integration by parts against the kernel otherwise
  double eval_derivative(double x) const {
    if (step_) {
      // d/dx of sum_i v_i [Z(n(x-lower_i)) - Z(n(x-upper_i))]
      const auto& b = step_->boundaries();
      const auto& v = step_->piece_values();
      double acc = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        const double zl = (i == 0) ? 0.0 : mollifier_kernel(n_ * (x - b[i - 1]));
        const double zu = (i == v.size() - 1) ? 0.0 : mollifier_kernel(n_ * (x - b[i]));
        acc += v[i] * n_ * (zl - zu);
      }
      return acc;
    }
    const auto& r = quad::gauss_legendre(64);
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double y = 1.0 + r.nodes[i];
      acc += r.weights[i] * zeta_d1_raw(y) * base_->eval(x - y / n_, 0.0);
    }
    return acc * n_ / kMollifierNorm;
  }

  bool has_derivative() const override { return true; }
  std::shared_ptr<const FunctionImpl> derivative() const override;

  std::vector<double> space_breakpoints() const override {
    std::vector<double> out;
    for (double b : base_->space_breakpoints()) {
      out.push_back(b);
      out.push_back(b + 1.0 / n_);
      out.push_back(b + 2.0 / n_);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "mollified"},
            {"params", {{"n", n_}}},
            {"base", base_->to_json()},
            {"time_dependent", false}};
  }

 private:
  double eval_piecewise(double x) const {
    const auto& b = step_->boundaries();
    const auto& v = step_->piece_values();
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      // piece (lower, upper] contributes mass Z(n(x-lower)) - Z(n(x-upper))
      const double zl =
          (i == 0) ? 1.0 : mollifier_kernel_cdf(n_ * (x - b[i - 1]));
      const double zu =
          (i == v.size() - 1) ? 0.0 : mollifier_kernel_cdf(n_ * (x - b[i]));
      acc += v[i] * (zl - zu);
    }
    return acc;
  }

  std::shared_ptr<const FunctionImpl> base_;
  int n_;
  const StepLikeImpl* step_ = nullptr;  // fast path when the base is a step
};

class MollifiedDerivImpl final : public FunctionImpl {
 public:
  explicit MollifiedDerivImpl(std::shared_ptr<const MollifiedImpl> m) : m_(std::move(m)) {}
  std::string kind() const override { return "mollified_derivative"; }
  double eval(double x, double) const override { return m_->eval_derivative(x); }
  std::vector<double> space_breakpoints() const override { return m_->space_breakpoints(); }
  nlohmann::json to_json() const override {
    nlohmann::json j = m_->to_json();
    j["kind"] = "mollified_derivative";
    return j;
  }

 private:
  std::shared_ptr<const MollifiedImpl> m_;
};

std::shared_ptr<const FunctionImpl> MollifiedImpl::derivative() const {
  return std::make_shared<MollifiedDerivImpl>(shared_from_this());
}

}  // namespace

double mollifier_kernel(double y) { return zeta_raw(y) / kMollifierNorm; }

double mollifier_kernel_cdf(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 2.0) return 1.0;
  // the kernel is symmetric about 1, so integrate the shorter side
  if (y > 1.0)
    return 1.0 - quad::integrate_gl([](double u) { return zeta_raw(u); }, 0.0, 2.0 - y, 96) /
                     kMollifierNorm;
  return quad::integrate_gl([](double u) { return zeta_raw(u); }, 0.0, y, 96) / kMollifierNorm;
}

// ---------------------------------------------------------------------------
// FunctionSpec
// ---------------------------------------------------------------------------

FunctionSpec::FunctionSpec() : impl_(std::make_shared<PolynomialImpl>(std::vector<double>{0.0})) {}
FunctionSpec::FunctionSpec(std::shared_ptr<const FunctionImpl> impl) : impl_(std::move(impl)) {}

FunctionSpec FunctionSpec::constant(double c) {
  return FunctionSpec(std::make_shared<PolynomialImpl>(std::vector<double>{c}));
}
FunctionSpec FunctionSpec::identity() {
  return FunctionSpec(std::make_shared<PolynomialImpl>(std::vector<double>{0.0, 1.0}));
}
FunctionSpec FunctionSpec::polynomial(std::vector<double> coeffs) {
  return FunctionSpec(std::make_shared<PolynomialImpl>(std::move(coeffs)));
}
FunctionSpec FunctionSpec::step(std::vector<double> breakpoints, std::vector<double> levels) {
  if (breakpoints.size() != levels.size() + 1)
    throw std::invalid_argument("step: need one level per cell (breakpoints = levels + 1)");
  std::vector<double> values;
  values.push_back(0.0);
  for (double l : levels) values.push_back(l);
  values.push_back(0.0);
  nlohmann::json params = {{"breaks", breakpoints}, {"levels", levels}};
  return FunctionSpec(std::make_shared<StepLikeImpl>("step", std::move(breakpoints),
                                                     std::move(values), std::move(params)));
}
FunctionSpec FunctionSpec::indicator(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("indicator: need a < b");
  nlohmann::json params = {{"a", a}, {"b", b}};
  return FunctionSpec(std::make_shared<StepLikeImpl>(
      "indicator", std::vector<double>{a, b}, std::vector<double>{0.0, 1.0, 0.0},
      std::move(params)));
}
FunctionSpec FunctionSpec::sign() { return FunctionSpec(std::make_shared<SignImpl>()); }
FunctionSpec FunctionSpec::power_abs(double p) {
  return FunctionSpec(std::make_shared<PowerAbsImpl>(p));
}
FunctionSpec FunctionSpec::sine() { return FunctionSpec(std::make_shared<SineImpl>()); }
FunctionSpec FunctionSpec::cosine() { return FunctionSpec(std::make_shared<CosineImpl>()); }
FunctionSpec FunctionSpec::smooth_bump() {
  return FunctionSpec(std::make_shared<SmoothBumpImpl>());
}
FunctionSpec FunctionSpec::time_polynomial(std::vector<double> coeffs) {
  return FunctionSpec(std::make_shared<TimePolynomialImpl>(std::move(coeffs)));
}
FunctionSpec FunctionSpec::space_time_product(FunctionSpec space,
                                              std::vector<double> time_coeffs) {
  return FunctionSpec(
      std::make_shared<SpaceTimeProductImpl>(space.impl_, std::move(time_coeffs)));
}
FunctionSpec FunctionSpec::below_curve(Curve a) {
  return FunctionSpec(std::make_shared<BelowCurveImpl>(std::move(a)));
}
FunctionSpec FunctionSpec::elementary_td(double a, double b, double s0, double s1, double value) {
  return FunctionSpec(std::make_shared<ElementaryTdImpl>(a, b, s0, s1, value));
}

bool FunctionSpec::time_dependent() const { return impl_->time_dependent(); }

double FunctionSpec::operator()(double x) const {
  if (impl_->time_dependent())
    throw std::invalid_argument("FunctionSpec: time-dependent spec needs f(x, s)");
  return impl_->eval(x, 0.0);
}

double FunctionSpec::operator()(double x, double s) const { return impl_->eval(x, s); }

bool FunctionSpec::has_derivative() const { return impl_->has_derivative(); }

FunctionSpec FunctionSpec::derivative() const { return FunctionSpec(impl_->derivative()); }

double FunctionSpec::second_moment(double scale, double s) const {
  return impl_->second_moment(scale, s);
}

std::vector<double> FunctionSpec::space_breakpoints() const { return impl_->space_breakpoints(); }
std::vector<double> FunctionSpec::time_breakpoints() const { return impl_->time_breakpoints(); }
std::string FunctionSpec::kind() const { return impl_->kind(); }
nlohmann::json FunctionSpec::to_json() const { return impl_->to_json(); }

FunctionSpec FunctionSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (kind == "polynomial") return polynomial(params.at("coeffs").get<std::vector<double>>());
  if (kind == "step")
    return step(params.at("breaks").get<std::vector<double>>(),
                params.at("levels").get<std::vector<double>>());
  if (kind == "indicator") return indicator(params.at("a"), params.at("b"));
  if (kind == "sign") return sign();
  if (kind == "power_abs") return power_abs(params.at("p"));
  if (kind == "sine") return sine();
  if (kind == "cosine") return cosine();
  if (kind == "smooth_bump") return smooth_bump();
  if (kind == "mollified") return mollify(from_json(j.at("base")), params.at("n"));
  if (kind == "time_polynomial")
    return time_polynomial(params.at("coeffs").get<std::vector<double>>());
  if (kind == "space_time_product")
    return space_time_product(from_json(j.at("base")),
                              params.at("time_coeffs").get<std::vector<double>>());
  if (kind == "below_curve") return below_curve(Curve::from_json(params.at("curve")));
  if (kind == "elementary_td")
    return elementary_td(params.at("a"), params.at("b"), params.at("s0"), params.at("s1"),
                         params.at("value"));
  throw std::invalid_argument("FunctionSpec::from_json: unknown kind '" + kind + "'");
}

FunctionSpec FunctionSpec::parse(const std::string& text) {
  if (!text.empty() && text.front() == '{') return from_json(nlohmann::json::parse(text));
  if (text == "zero") return FunctionSpec();
  if (text == "identity") return identity();
  if (text == "square") return polynomial({0.0, 0.0, 1.0});
  if (text == "cube") return polynomial({0.0, 0.0, 0.0, 1.0});
  if (text == "sine") return sine();
  if (text == "cosine") return cosine();
  if (text == "sign") return sign();
  if (text == "abs") return power_abs(1.0);
  if (text == "bump") return smooth_bump();
  if (text == "indicator") return indicator(-0.5, 0.5);
  if (text == "xs") return space_time_product(identity(), {0.0, 1.0});
  if (text == "time") return time_polynomial({0.0, 1.0});
  throw std::invalid_argument(
      "FunctionSpec::parse: unknown name '" + text +
      "' (expected zero|identity|square|cube|sine|cosine|sign|abs|bump|indicator|xs|time or a "
      "JSON object)");
}

FunctionSpec mollify(const FunctionSpec& f, int n) {
  return FunctionSpec(std::make_shared<MollifiedImpl>(f.impl_, n));
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

namespace {

// composite Simpson over [a,b], split at interior discontinuities, endpoint
// evaluations nudged into the open piece
double piecewise_simpson(const std::function<double(double)>& g, double a, double b,
                         std::span<const double> splits, int total_panels) {
  std::vector<double> cuts{a};
  for (double s : splits)
    if (s > a + 1e-15 && s < b - 1e-15) cuts.push_back(s);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const double len = hi - lo;
    if (len <= 0.0) continue;
    int panels = std::max(8, static_cast<int>(std::lround(total_panels * len / (b - a))));
    const double nudge = len * 1e-9;
    acc += quad::simpson(
        [&](double v) { return g(std::clamp(v, lo + nudge, hi - nudge)); }, lo, hi, panels);
  }
  return acc;
}

struct NormTerms {
  double term1_sq = 0.0;
  double term2_sq = 0.0;
};

NormTerms norm_terms(const std::function<double(double, double)>& g2,
                     std::span<const double> time_breaks, double T, double H, int n_subdiv) {
  const double vT = std::pow(T, H);
  const double v_half = std::pow(0.5 * T, H);
  const double v_floor = vT * 1e-14;
  const double inv_h = 1.0 / H;

  auto ghat = [&](double v) {
    const double vv = std::max(v, v_floor);
    return g2(vv, std::pow(vv, inv_h));
  };

  std::vector<double> v_splits;
  for (double s : time_breaks)
    if (s > 0.0 && s < T) v_splits.push_back(std::pow(s, H));
  std::sort(v_splits.begin(), v_splits.end());

  NormTerms out;
  // int_0^T g2 s^(H-1) ds  ==  (1/H) int_0^(T^H) ghat(v) dv
  out.term1_sq = inv_h * piecewise_simpson(ghat, 0.0, vT, v_splits, n_subdiv);

  // int_0^T g2 (T-s)^(H-1) ds, split at T/2: the left half is smooth in
  // v = s^H (Jacobian ds = (1/H) v^(1/H - 1) dv), the right half gets exact
  // monomial weights for the endpoint singularity
  auto left_integrand = [&](double v) {
    const double vv = std::max(v, v_floor);
    const double s = std::pow(vv, inv_h);
    return ghat(v) * std::pow(T - s, H - 1.0) * std::pow(vv, inv_h - 1.0);
  };
  out.term2_sq = inv_h * piecewise_simpson(left_integrand, 0.0, v_half, v_splits, n_subdiv / 2);

  std::vector<double> s_cuts{0.5 * T};
  for (double s : time_breaks)
    if (s > 0.5 * T && s < T) s_cuts.push_back(s);
  s_cuts.push_back(T);
  std::sort(s_cuts.begin(), s_cuts.end());
  for (std::size_t i = 0; i + 1 < s_cuts.size(); ++i) {
    const double lo = s_cuts[i], hi = s_cuts[i + 1];
    if (hi - lo <= 0.0) continue;
    const double nudge = (hi - lo) * 1e-9;
    int cells = std::max(
        16, static_cast<int>(std::lround(n_subdiv / 2 * (hi - lo) / (0.5 * T))));
    out.term2_sq += quad::mirror_power_weighted_integral(
        [&](double s) {
          const double sc = std::clamp(s, lo + nudge, hi - nudge);
          return g2(std::pow(sc, H), sc);
        },
        lo, hi, T, H, cells);
  }
  return out;
}

}  // namespace

NormValue norm_from_second_moment(const std::function<double(double, double)>& g2,
                                  std::span<const double> time_breaks, double t_max, HurstIndex h,
                                  const NormOptions& opt) {
  if (!(t_max > 0.0)) throw std::invalid_argument("norm: t_max must be positive");
  const double H = h.value();
  const NormTerms coarse = norm_terms(g2, time_breaks, t_max, H, opt.n_subdiv);
  const NormTerms fine = norm_terms(g2, time_breaks, t_max, H, 2 * opt.n_subdiv);
  NormValue nv;
  const double v_coarse = std::sqrt(coarse.term1_sq) + std::sqrt(coarse.term2_sq);
  nv.value = std::sqrt(fine.term1_sq) + std::sqrt(fine.term2_sq);
  nv.abs_error_estimate = std::abs(nv.value - v_coarse);
  // divergence shows up as a non-finite value or refinement blow-up
  if (!std::isfinite(nv.value) || nv.abs_error_estimate > 0.25 * nv.value) {
    nv.value = kInf;
    nv.abs_error_estimate = kInf;
  }
  return nv;
}

NormValue norm_H(const FunctionSpec& f, double t_max, HurstIndex h, const NormOptions& opt) {
  if (f.time_dependent())
    throw std::invalid_argument("norm_H: spec is time-dependent, use norm_H_star");
  const auto tb = f.time_breakpoints();
  return norm_from_second_moment(
      [&](double v, double s) { return f.second_moment(v, s); }, tb, t_max, h, opt);
}

NormValue norm_H_star(const FunctionSpec& f, double t_max, HurstIndex h, const NormOptions& opt) {
  const auto tb = f.time_breakpoints();
  return norm_from_second_moment(
      [&](double v, double s) { return f.second_moment(v, s); }, tb, t_max, h, opt);
}

double gaussian_second_moment(const std::function<double(double)>& g,
                              std::span<const double> breakpoints, double v) {
  const double vv = std::max(v, kScaleFloor);
  // integrate f(v u)^2 phi(u) du over u in [-8, 8], panels split at
  // breakpoint images and capped at width 1/2
  std::vector<double> cuts{-8.0, 8.0};
  for (double b : breakpoints) {
    const double u = b / vv;
    if (u > -8.0 && u < 8.0) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi - lo < 1e-14) continue;
    const int sub = std::max(1, static_cast<int>(std::ceil((hi - lo) / 0.5)));
    const double w = (hi - lo) / sub;
    for (int k = 0; k < sub; ++k) {
      acc += quad::integrate_gl(
          [&](double u) {
            const double fx = g(vv * u);
            return fx * fx * std::exp(-0.5 * u * u) * inv_sqrt2pi;
          },
          lo + k * w, lo + (k + 1) * w, 16);
    }
  }
  return acc;
}

}  // namespace fbmlab
