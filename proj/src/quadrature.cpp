#include "fbmlab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fbmlab::quad {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights
// come from the first components of the eigenvectors.
Rule golub_welsch(int n, const std::function<double(int)>& beta, double mu0) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = beta(k);
    jacobi(k - 1, k) = beta(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

const Rule& cached(std::map<int, Rule>& cache, std::mutex& m, int n,
                   const std::function<Rule(int)>& make) {
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

}  // namespace

const Rule& gauss_hermite(int n) {
  static std::map<int, Rule> cache;
  static std::mutex m;
  return cached(cache, m, n, [](int k) {
    return golub_welsch(
        k, [](int j) { return std::sqrt(0.5 * j); }, std::sqrt(std::numbers::pi));
  });
}

const Rule& gauss_legendre(int n) {
  static std::map<int, Rule> cache;
  static std::mutex m;
  return cached(cache, m, n, [](int k) {
    return golub_welsch(
        k, [](int j) { return j / std::sqrt(4.0 * j * j - 1.0); }, 2.0);
  });
}

double normal_expectation(const std::function<double(double)>& g, int n) {
  const Rule& r = gauss_hermite(n);
  const double root2 = std::numbers::sqrt2;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += r.weights[i] * g(root2 * r.nodes[i]);
  return acc / std::sqrt(std::numbers::pi);
}

double integrate_gl(const std::function<double(double)>& g, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += r.weights[i] * g(mid + half * r.nodes[i]);
  return half * acc;
}

double simpson(const std::function<double(double)>& g, double a, double b, int n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = g(a) + g(b);
  for (int i = 1; i < n; i += 2) acc += 4.0 * g(a + i * h);
  for (int i = 2; i < n; i += 2) acc += 2.0 * g(a + i * h);
  return acc * h / 3.0;
}

double power_weighted_integral(const std::function<double(double)>& g, double a, double b,
                               double p, int n_cells) {
  if (!(p > 0.0)) throw std::invalid_argument("power_weighted_integral: p must be positive");
  if (!(b > a) || a < 0.0) throw std::invalid_argument("power_weighted_integral: need 0 <= a < b");
  const double h = (b - a) / n_cells;
  double acc = 0.0;
  double s0 = a, g0 = g(a);
  double m0_prev = std::pow(a, p), m1_prev = std::pow(a, p + 1.0);
  for (int i = 0; i < n_cells; ++i) {
    const double s1 = (i + 1 == n_cells) ? b : a + (i + 1) * h;
    const double g1 = g(s1);
    const double m0_next = std::pow(s1, p), m1_next = std::pow(s1, p + 1.0);
    const double m0 = (m0_next - m0_prev) / p;            // int s^(p-1)
    const double m1 = (m1_next - m1_prev) / (p + 1.0);    // int s^p
    // linear interpolation of g across the cell, exact monomial moments
    acc += (g0 * (s1 * m0 - m1) + g1 * (m1 - s0 * m0)) / (s1 - s0);
    s0 = s1;
    g0 = g1;
    m0_prev = m0_next;
    m1_prev = m1_next;
  }
  return acc;
}

double mirror_power_weighted_integral(const std::function<double(double)>& g, double a, double b,
                                      double T, double p, int n_cells) {
  // substitute u = T - s
  return power_weighted_integral([&](double u) { return g(T - u); }, T - b, T - a, p, n_cells);
}

}  // namespace fbmlab::quad
