#include "fbmlab/qcov.hpp"

#include <cmath>
#include <stdexcept>

#include "fbmlab/mc.hpp"

namespace fbmlab {

namespace {

std::size_t eps_to_steps(const FbmPath& path, double eps) {
  const double d = path.grid.delta();
  const double raw = eps / d;
  const double rounded = std::round(raw);
  if (rounded < 1.0 || std::abs(raw - rounded) > 1e-9 * std::max(1.0, raw))
    throw std::invalid_argument("qcov: eps must be a positive integer multiple of the grid step");
  return static_cast<std::size_t>(rounded);
}

struct EpsSumContext {
  std::size_t n_cells;  // cells with t_i < t
  std::size_t k;        // eps in steps
  double inv_eps_2h;
  double two_h;
};

EpsSumContext eps_context(const FbmPath& path, double eps, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("qcov: need t > 0");
  EpsSumContext ctx;
  ctx.k = eps_to_steps(path, eps);
  ctx.n_cells = path.grid.index_of(t);
  if (ctx.n_cells + ctx.k > path.grid.total_steps())
    throw std::invalid_argument(
        "qcov: t + eps exceeds the extended grid; regenerate with more lookahead");
  ctx.two_h = 2.0 * path.hurst;
  ctx.inv_eps_2h = 1.0 / std::pow(static_cast<double>(ctx.k) * path.grid.delta(), ctx.two_h);
  return ctx;
}

}  // namespace

const char* to_string(QcovEstimate::Form f) {
  switch (f) {
    case QcovEstimate::Form::eps_limit: return "eps_limit";
    case QcovEstimate::Form::riemann_sum: return "riemann_sum";
    case QcovEstimate::Form::closed_form: return "closed_form";
  }
  return "?";
}

QcovEstimate estimate_eps(const FunctionSpec& f, const FbmPath& path, double eps, double t) {
  if (f.time_dependent())
    throw std::invalid_argument("estimate_eps: time-dependent spec, use estimate_eps_td");
  const auto ctx = eps_context(path, eps, t);
  KahanSum sum;
  for (std::size_t i = 0; i < ctx.n_cells; ++i) {
    const double b0 = path[i], b1 = path[i + ctx.k];
    const double df = f(b1) - f(b0);
    if (df == 0.0) continue;
    sum.add(df * (b1 - b0) * path.grid.power_cell_weight(i, ctx.two_h));
  }
  return {ctx.inv_eps_2h * sum.value(), QcovEstimate::Form::eps_limit, t,
          static_cast<double>(ctx.k) * path.grid.delta()};
}

std::pair<double, double> estimate_decomposed(const FunctionSpec& f, const FbmPath& path,
                                              double eps, double t) {
  if (f.time_dependent())
    throw std::invalid_argument("estimate_decomposed: requires a time-independent spec");
  const auto ctx = eps_context(path, eps, t);
  KahanSum plus, minus;
  for (std::size_t i = 0; i < ctx.n_cells; ++i) {
    const double b0 = path[i], b1 = path[i + ctx.k];
    const double w = (b1 - b0) * path.grid.power_cell_weight(i, ctx.two_h);
    plus.add(f(b1) * w);
    minus.add(f(b0) * w);
  }
  return {ctx.inv_eps_2h * plus.value(), ctx.inv_eps_2h * minus.value()};
}

std::vector<double> full_partition(const FbmPath& path, double t) {
  const std::size_t n = path.grid.index_of(t);
  std::vector<double> p(n + 1);
  for (std::size_t i = 0; i <= n; ++i) p[i] = path.grid.time(i);
  return p;
}

QcovEstimate estimate_riemann(const FunctionSpec& f, const FbmPath& path,
                              std::span<const double> partition) {
  if (f.time_dependent())
    throw std::invalid_argument("estimate_riemann: requires a time-independent spec");
  if (partition.size() < 2 || partition.front() != 0.0)
    throw std::invalid_argument("estimate_riemann: partition must start at 0");
  const double two_h = 2.0 * path.hurst;
  KahanSum sum;
  double mesh = 0.0;
  std::size_t prev = path.grid.index_of(partition[0]);
  for (std::size_t j = 1; j < partition.size(); ++j) {
    if (!(partition[j] > partition[j - 1]))
      throw std::invalid_argument("estimate_riemann: partition must be strictly increasing");
    const std::size_t cur = path.grid.index_of(partition[j]);
    const double t0 = path.grid.time(prev), t1 = path.grid.time(cur);
    mesh = std::max(mesh, t1 - t0);
    const double db = path[cur] - path[prev];
    const double df = f(path[cur]) - f(path[prev]);
    if (df != 0.0) {
      const double weight = (std::pow(t1, two_h) - std::pow(t0, two_h)) / std::pow(t1 - t0, two_h);
      sum.add(weight * df * db);
    }
    prev = cur;
  }
  return {sum.value(), QcovEstimate::Form::riemann_sum, partition.back(), mesh};
}

QcovEstimate closed_form(const FunctionSpec& f, const FbmPath& path, double t) {
  if (!f.has_derivative())
    throw std::invalid_argument("closed_form: spec has no registered derivative");
  const FunctionSpec fp = f.derivative();
  const std::size_t n = path.grid.index_of(t);
  const double two_h = 2.0 * path.hurst;
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i)
    sum.add(fp(path[i]) * path.grid.power_cell_weight(i, two_h));
  return {sum.value(), QcovEstimate::Form::closed_form, t, path.grid.delta()};
}

QcovEstimate estimate_eps_td(const FunctionSpec& f, const FbmPath& path, double eps, double t) {
  const auto ctx = eps_context(path, eps, t);
  const double shift = static_cast<double>(ctx.k) * path.grid.delta();
  KahanSum sum;
  for (std::size_t i = 0; i < ctx.n_cells; ++i) {
    const double s = path.grid.time(i);
    const double b0 = path[i], b1 = path[i + ctx.k];
    const double df = f(b1, s + shift) - f(b0, s);
    if (df == 0.0) continue;
    sum.add(df * (b1 - b0) * path.grid.power_cell_weight(i, ctx.two_h));
  }
  return {ctx.inv_eps_2h * sum.value(), QcovEstimate::Form::eps_limit, t, shift};
}

}  // namespace fbmlab
