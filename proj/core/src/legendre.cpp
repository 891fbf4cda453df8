#include "hbvm/legendre.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hbvm {

namespace {

void check_unit_interval(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("shifted Legendre evaluated outside [0,1]: x = " + std::to_string(x));
}

}  // namespace

double shifted_legendre(int degree, double x) {
  if (degree < 0) throw std::invalid_argument("shifted_legendre: negative degree");
  check_unit_interval(x);
  const double t = 2.0 * x - 1.0;
  double prev = 1.0;
  double cur = t;
  if (degree == 0) return 1.0;
  for (int n = 1; n < degree; ++n) {
    const double next = ((2 * n + 1) * t * cur - n * prev) / (n + 1);
    prev = cur;
    cur = next;
  }
  return std::sqrt(2.0 * degree + 1.0) * cur;
}

void shifted_legendre_all(double x, std::span<double> out) {
  check_unit_interval(x);
  if (out.empty()) return;
  const double t = 2.0 * x - 1.0;
  double prev = 1.0;
  double cur = t;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = std::sqrt(3.0) * t;
  for (std::size_t n = 1; n + 1 < out.size(); ++n) {
    const double next = ((2.0 * n + 1.0) * t * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
    out[n + 1] = std::sqrt(2.0 * (n + 1) + 1.0) * cur;
  }
}

LegendreValue legendre_with_derivative(int degree, double t) {
  if (degree < 0) throw std::invalid_argument("legendre_with_derivative: negative degree");
  if (degree == 0) return {1.0, 0.0};
  double prev = 1.0;
  double cur = t;
  double dprev = 0.0;
  double dcur = 1.0;
  for (int n = 1; n < degree; ++n) {
    const double next = ((2 * n + 1) * t * cur - n * prev) / (n + 1);
    // P'_{n+1} = P'_{n-1} + (2n+1) P_n
    const double dnext = dprev + (2 * n + 1) * cur;
    prev = cur;
    cur = next;
    dprev = dcur;
    dcur = dnext;
  }
  return {cur, dcur};
}

}  // namespace hbvm
