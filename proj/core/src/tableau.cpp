#include "hbvm/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hbvm/legendre.hpp"

namespace hbvm {

namespace {

void check_degree(int s) {
  if (s < 1 || s > max_degree_s)
    throw std::invalid_argument("polynomial degree s must lie in [1,10], got " + std::to_string(s));
}

std::complex<double> horner(const std::vector<double>& coeffs, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::complex<double> horner_derivative(const std::vector<double>& coeffs, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = coeffs.size() - 1; n >= 1; --n) acc = acc * z + double(n) * coeffs[n];
  return acc;
}

Matrix basis_values(const QuadratureRule& quad, int columns) {
  Matrix p(quad.size(), columns);
  for (std::size_t i = 0; i < quad.size(); ++i) shifted_legendre_all(quad.nodes[i], p.row(i));
  return p;
}

}  // namespace

double xi(int j) {
  if (j < 1) throw std::invalid_argument("xi: index must be >= 1");
  return 1.0 / (2.0 * std::sqrt(4.0 * j * j - 1.0));
}

Matrix x_matrix(int s) {
  check_degree(s);
  Matrix x(s, s);
  x(0, 0) = 0.5;
  for (int j = 1; j < s; ++j) {
    x(j, j - 1) = xi(j);
    x(j - 1, j) = -xi(j);
  }
  return x;
}

std::vector<double> x_characteristic_polynomial(int s) {
  check_degree(s);
  // p_0 = 1, p_1 = λ - 1/2
  std::vector<double> older{1.0};
  std::vector<double> old{-0.5, 1.0};
  for (int j = 2; j <= s; ++j) {
    const double xi2 = xi(j - 1) * xi(j - 1);
    std::vector<double> cur(j + 1, 0.0);
    for (std::size_t n = 0; n < old.size(); ++n) cur[n + 1] += old[n];
    for (std::size_t n = 0; n < older.size(); ++n) cur[n] += xi2 * older[n];
    older = std::move(old);
    old = std::move(cur);
  }
  return old;
}

std::vector<std::complex<double>> x_eigenvalues(int s) {
  const auto coeffs = x_characteristic_polynomial(s);  // monic
  const std::size_t n = coeffs.size() - 1;

  // Initial guesses on a circle that encloses the spectrum (|λ| <= ||X_s||_inf < 1).
  std::vector<std::complex<double>> roots(n);
  const std::complex<double> seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) roots[i] = 0.8 * std::pow(seed, double(i));

  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      const auto delta = horner(coeffs, roots[i]) / denom;
      roots[i] -= delta;
      change = std::max(change, std::abs(delta));
    }
    if (change < 1e-15) break;
  }
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      const auto d = horner_derivative(coeffs, r);
      if (std::abs(d) == 0.0) break;
      r -= horner(coeffs, r) / d;
    }
  }
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a.imag() < b.imag();
  });
  return roots;
}

double rho_opt(int s) {
  const auto roots = x_eigenvalues(s);
  return std::abs(roots.front());
}

MethodTableau build_tableau(int k, int s) {
  check_degree(s);
  if (k < s) throw std::invalid_argument("build_tableau: need k >= s");
  if (k > max_gauss_nodes) throw std::invalid_argument("build_tableau: k > 64 unsupported");

  MethodTableau t;
  t.k = k;
  t.s = s;
  t.quad = gauss_rule(k);
  t.basis_ext = basis_values(t.quad, s + 1);
  t.basis = Matrix(k, s);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < s; ++j) t.basis(i, j) = t.basis_ext(i, j);

  t.x = x_matrix(s);
  t.x_hat = Matrix(s + 1, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) t.x_hat(i, j) = t.x(i, j);
  t.x_hat(s, s - 1) = xi(s);

  t.integrals = t.basis_ext * t.x_hat;
  t.projection = t.basis.transpose() * t.quad.omega();
  t.butcher = t.integrals * t.projection;
  t.integrals_x = t.integrals * t.x;
  t.x_squared = t.x * t.x;

  const LUFactor xlu(t.x);
  t.x_inv = Matrix(s, s);
  for (int j = 0; j < s; ++j) {
    Vector e(s, 0.0);
    e[j] = 1.0;
    xlu.solve_in_place(e);
    for (int i = 0; i < s; ++i) t.x_inv(i, j) = e[i];
  }
  t.x_inv_squared = t.x_inv * t.x_inv;

  t.weights_a.assign(k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) t.weights_a[j] += t.quad.weights[i] * t.butcher(i, j);

  t.rho = rho_opt(s);
  return t;
}

}  // namespace hbvm
