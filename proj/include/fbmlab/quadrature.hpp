#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fbmlab::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for weight exp(-x^2) on R (Golub-Welsch).
const Rule& gauss_hermite(int n);

/// Gauss-Legendre rule on [-1,1].
const Rule& gauss_legendre(int n);

/// E[g(Z)] for standard normal Z via n-point Gauss-Hermite.
double normal_expectation(const std::function<double(double)>& g, int n = 64);

/// Integral of g over [a,b] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& g, double a, double b, int n = 32);

/// Composite Simpson on [a,b] with n panels (n even, endpoints included).
double simpson(const std::function<double(double)>& g, double a, double b, int n);

/// Integral of g(s) * s^(p-1) over [a,b], 0 <= a < b, p > 0.
/// g is interpolated linearly per cell; the singular monomial factor is
/// integrated exactly, so an integrable endpoint singularity at s = 0
/// contributes no error beyond the interpolation of g.
double power_weighted_integral(const std::function<double(double)>& g, double a, double b,
                               double p, int n_cells);

/// Integral of g(s) * (T-s)^(p-1) over [a,b] with a < b <= T (mirror case).
double mirror_power_weighted_integral(const std::function<double(double)>& g, double a, double b,
                                      double T, double p, int n_cells);

}  // namespace fbmlab::quad
