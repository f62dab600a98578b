// Independent oracles for checking the kernel-weighted least-squares path.
// Everything here is hand-rolled on purpose: explicit normal equations
// solved by Gaussian elimination with partial pivoting, no Eigen, no shared
// code with the library's QR-based solver.
#pragma once

#include "geodid/local_regression.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracles {

// Solves A x = b in place; partial pivoting. Throws on a (near) zero pivot.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) {
      throw std::runtime_error("oracle: singular normal equations");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t row = n; row-- > 0;) {
    double s = b[row];
    for (std::size_t c = row + 1; c < n; ++c) s -= a[row][c] * x[c];
    x[row] = s / a[row][row];
  }
  return x;
}

// Dense weighted normal equations for the polynomial fit centered at
// `center`: M[j][k] = sum_i w_i (x_i - c)^(j+k), rhs[j] = sum_i w_i
// (x_i - c)^j y_i, with w_i = K((x_i - c)/h).
inline std::vector<double> wls_normal_equations(
    const std::vector<double>& xs, const std::vector<double>& ys,
    geodid::KernelKind kernel, double h, int order, double center = 0.0) {
  const std::size_t k = static_cast<std::size_t>(order) + 1;
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  std::vector<double> rhs(k, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - center;
    const double w = geodid::kernel_weight(kernel, dx / h);
    if (w <= 0.0) continue;
    std::vector<double> powers(2 * k - 1, 1.0);
    for (std::size_t p = 1; p < powers.size(); ++p) {
      powers[p] = powers[p - 1] * dx;
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        m[r][c] += w * powers[r + c];
      }
      rhs[r] += w * powers[r] * ys[i];
    }
  }
  return gauss_solve(std::move(m), rhs);
}

// One-sided fit at the cutoff for a CrossSection, mirroring the calling
// convention of fit_local_polynomial.
inline std::vector<double> one_sided_fit(const geodid::CrossSection& points,
                                         geodid::Side side,
                                         geodid::KernelKind kernel, double h,
                                         int order) {
  std::vector<double> xs, ys;
  for (const auto& p : points.points) {
    if (geodid::side_of(p.distance) == side) {
      xs.push_back(p.distance);
      ys.push_back(p.value);
    }
  }
  return wls_normal_equations(xs, ys, kernel, h, order, 0.0);
}

}  // namespace oracles
