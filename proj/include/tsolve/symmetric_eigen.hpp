#pragma once

/// @file symmetric_eigen.hpp
/// @brief Cyclic Jacobi eigensolver for small dense symmetric matrices, and the
/// truncated pseudo-inverse solve built on it.

#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace tsolve {

struct SymmetricEigen {
  std::vector<double> values;  ///< unsorted, in Jacobi order
  DenseMatrix vectors;         ///< column k is the eigenvector for values[k]
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi with threshold-free rotation of every nonzero off-diagonal
/// pair. A diagonal input performs no rotations and yields vectors == I.
inline SymmetricEigen jacobi_eigen(const DenseMatrix& input, std::size_t max_sweeps = 100) {
  require(input.rows() == input.cols(), "jacobi_eigen: matrix must be square");
  const std::size_t n = input.rows();
  DenseMatrix a = input;
  DenseMatrix v = DenseMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };
  double total = 0.0;
  for (double x : a.data()) total += x * x;
  total = std::sqrt(total);

  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    const double off = off_norm();
    if (off == 0.0 || off <= 1e-15 * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);
  out.sweeps = sweep;
  return out;
}

struct PinvSolve {
  Vector x;
  std::size_t rank = 0;
};

/// Minimum-norm solution of the symmetric system S x = rhs. Eigenvalues with
/// |lambda| <= rel_tol * max|lambda| are treated as zero.
inline PinvSolve symmetric_pinv_solve(const DenseMatrix& s, std::span<const double> rhs,
                                      double rel_tol) {
  require(s.rows() == rhs.size(), "symmetric_pinv_solve: dimension mismatch");
  const std::size_t n = s.rows();
  const SymmetricEigen eig = jacobi_eigen(s);
  double lmax = 0.0;
  for (double l : eig.values) lmax = std::max(lmax, std::abs(l));
  PinvSolve out{Vector(n, 0.0), 0};
  if (lmax == 0.0) return out;
  for (std::size_t k = 0; k < n; ++k) {
    const double l = eig.values[k];
    if (std::abs(l) <= rel_tol * lmax) continue;
    ++out.rank;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += eig.vectors(i, k) * rhs[i];
    const double coef = proj / l;
    for (std::size_t i = 0; i < n; ++i) out.x[i] += coef * eig.vectors(i, k);
  }
  return out;
}

} // namespace tsolve
