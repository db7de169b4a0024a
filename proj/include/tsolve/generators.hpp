#pragma once

/// @file generators.hpp
/// @brief Test-matrix families and the row-sum right-hand side.
///
/// Every generator is a pure function of its arguments. Random families draw
/// from std::mt19937_64 and map raw 64-bit outputs to doubles by hand, so a
/// fixed (family, n, params, seed) yields bit-identical matrices regardless of
/// the standard library's distribution implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"

namespace tsolve {

enum class Family {
  DiagPD,
  DiagPSD,
  DiagIndefinite,
  Clement,
  Dorr,
  Lotkin,
  Poisson2DDirichlet,
  Poisson2DNeumann,
  ConvDiff,
  OdeMvm
};

enum class DiagKind { PD, PSD, Indefinite };
enum class BoundaryCondition { Dirichlet, Neumann };

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

namespace detail {
inline Matrix diagonal(const std::vector<double>& d) {
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.push_back({i, i, d[i]});
  return Matrix(CsrMatrix::from_triplets(d.size(), d.size(), std::move(t)));
}
} // namespace detail

/// Random diagonal matrix. PD draws from [1, 3n]; PSD from [0, 3n] with one
/// forced exact zero; Indefinite from [-3n, 3n] with a forced negative, zero
/// and positive entry (so n >= 3).
inline Matrix gen_diag(DiagKind kind, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "gen_diag: n must be positive");
  if (kind == DiagKind::Indefinite) require(n >= 3, "gen_diag: indefinite family needs n >= 3");
  std::mt19937_64 rng(seed);
  const double top = 3.0 * static_cast<double>(n);
  std::vector<double> d(n);
  switch (kind) {
    case DiagKind::PD:
      for (auto& x : d) x = uniform_in(rng, 1.0, top);
      break;
    case DiagKind::PSD: {
      for (auto& x : d) x = uniform_in(rng, 0.0, top);
      d[uniform_index(rng, n)] = 0.0;
      break;
    }
    case DiagKind::Indefinite: {
      for (auto& x : d) x = uniform_in(rng, -top, top);
      // three distinct slots for the forced signs
      std::vector<std::size_t> slots(n);
      std::iota(slots.begin(), slots.end(), std::size_t{0});
      for (std::size_t k = 0; k < 3; ++k) std::swap(slots[k], slots[k + uniform_index(rng, n - k)]);
      d[slots[0]] = -uniform_in(rng, 1.0, top);
      d[slots[1]] = 0.0;
      d[slots[2]] = uniform_in(rng, 1.0, top);
      break;
    }
  }
  return detail::diagonal(d);
}

/// Symmetric Clement matrix: zero diagonal, off-diagonals sqrt(k(n-k)).
/// Singular for odd n.
inline Matrix gen_clement(std::size_t n) {
  require(n >= 2, "gen_clement: n must be at least 2");
  std::vector<Triplet> t;
  for (std::size_t k = 1; k < n; ++k) {
    const double v = std::sqrt(static_cast<double>(k) * static_cast<double>(n - k));
    t.push_back({k - 1, k, v});
    t.push_back({k, k - 1, v});
  }
  return Matrix(CsrMatrix::from_triplets(n, n, std::move(t)));
}

/// Dorr's diagonally dominant, ill-conditioned tridiagonal M-matrix
/// (same construction as MATLAB's gallery('dorr', n, theta)).
inline Matrix gen_dorr(std::size_t n, double theta = 0.01) {
  require(n >= 3, "gen_dorr: n must be at least 3");
  require(theta > 0.0, "gen_dorr: theta must be positive");
  const double h = 1.0 / static_cast<double>(n + 1);
  const std::size_t mid = (n + 1) / 2;
  const double term = theta / (h * h);
  std::vector<double> c(n), d(n), e(n);  // sub, diag, super (1-based i = k+1)
  for (std::size_t k = 0; k < n; ++k) {
    const double i = static_cast<double>(k + 1);
    if (k + 1 <= mid) {
      c[k] = -term;
      e[k] = c[k] - (0.5 - i * h) / h;
    } else {
      e[k] = -term;
      c[k] = e[k] + (0.5 - i * h) / h;
    }
    d[k] = -(c[k] + e[k]);
  }
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) t.push_back({k, k - 1, c[k]});
    t.push_back({k, k, d[k]});
    if (k + 1 < n) t.push_back({k, k + 1, e[k]});
  }
  return Matrix(CsrMatrix::from_triplets(n, n, std::move(t)));
}

/// Hilbert matrix with its first row replaced by ones.
inline Matrix gen_lotkin(std::size_t n) {
  require(n >= 2, "gen_lotkin: n must be at least 2");
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(i, j) = i == 0 ? 1.0 : 1.0 / static_cast<double>(i + j + 1);
  return Matrix(std::move(a));
}

/// 2-D Laplacian on a grid x grid mesh, 5-point stencil (centre plus four
/// neighbours), natural row-major node ordering. Dirichlet: diagonal 4.
/// Neumann: diagonal equals the neighbour count, so constants span the
/// nullspace.
inline Matrix gen_poisson2d(std::size_t grid, BoundaryCondition bc) {
  require(grid >= 2, "gen_poisson2d: grid must be at least 2");
  const std::size_t n = grid * grid;
  std::vector<Triplet> t;
  t.reserve(5 * n);
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const std::size_t p = i * grid + j;
      double neighbours = 0.0;
      if (i > 0) { t.push_back({p, p - grid, -1.0}); neighbours += 1.0; }
      if (j > 0) { t.push_back({p, p - 1, -1.0}); neighbours += 1.0; }
      if (j + 1 < grid) { t.push_back({p, p + 1, -1.0}); neighbours += 1.0; }
      if (i + 1 < grid) { t.push_back({p, p + grid, -1.0}); neighbours += 1.0; }
      t.push_back({p, p, bc == BoundaryCondition::Dirichlet ? 4.0 : neighbours});
    }
  }
  return Matrix(CsrMatrix::from_triplets(n, n, std::move(t)));
}

/// Central-difference discretisation of -Lap(u) + 2 p1 u_x + 2 p2 u_y - p3 u
/// on the unit square with Dirichlet boundary, scaled by h^2, h = 1/(grid+1).
/// Columns index x (east/west), rows index y (north/south).
inline Matrix gen_convdiff(std::size_t grid, double p1, double p2, double p3) {
  require(grid >= 2, "gen_convdiff: grid must be at least 2");
  require(p1 > 0.0 && p2 > 0.0 && p3 > 0.0, "gen_convdiff: p1, p2, p3 must be positive");
  const double h = 1.0 / static_cast<double>(grid + 1);
  const double centre = 4.0 - p3 * h * h;
  const double east = -1.0 + p1 * h;
  const double west = -1.0 - p1 * h;
  const double north = -1.0 + p2 * h;
  const double south = -1.0 - p2 * h;
  const std::size_t n = grid * grid;
  std::vector<Triplet> t;
  t.reserve(5 * n);
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const std::size_t p = i * grid + j;
      if (i > 0) t.push_back({p, p - grid, south});
      if (j > 0) t.push_back({p, p - 1, west});
      t.push_back({p, p, centre});
      if (j + 1 < grid) t.push_back({p, p + 1, east});
      if (i + 1 < grid) t.push_back({p, p + grid, north});
    }
  }
  return Matrix(CsrMatrix::from_triplets(n, n, std::move(t)));
}

namespace detail {

/// Finite-difference operator for y'' = -mu^2 y, y(0) = 0,
/// y'(0) + gamma y'(1) = 0, unknowns y_1..y_n. Rows 0..n-2 are the interior
/// second differences; the last row is the boundary condition
/// y_1 + gamma (y_n - y_{n-1}) = 0, which adds one corner entry (n-1, 0) to
/// an otherwise tridiagonal matrix.
struct OdeOperator {
  std::vector<double> sub, diag, super;  // tridiagonal part, sub[k] = T(k, k-1)
  double corner = 0.0;                   // T(n-1, 0), zero when n == 2 (folded into sub)
};

inline OdeOperator ode_operator(std::size_t n, double gamma) {
  OdeOperator op;
  op.sub.assign(n, 0.0);
  op.diag.assign(n, 0.0);
  op.super.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (k > 0) op.sub[k] = 1.0;
    op.diag[k] = -2.0;
    op.super[k] = 1.0;
  }
  op.diag[n - 1] = gamma;
  op.sub[n - 1] = -gamma;
  if (n == 2)
    op.sub[1] += 1.0;
  else
    op.corner = 1.0;
  return op;
}

/// Thomas algorithm on the tridiagonal part.
inline Vector thomas(const OdeOperator& op, Vector rhs) {
  const std::size_t n = rhs.size();
  std::vector<double> cp(n), dp(n);
  double denom = op.diag[0];
  cp[0] = op.super[0] / denom;
  dp[0] = rhs[0] / denom;
  for (std::size_t k = 1; k < n; ++k) {
    denom = op.diag[k] - op.sub[k] * cp[k - 1];
    cp[k] = k + 1 < n ? op.super[k] / denom : 0.0;
    dp[k] = (rhs[k] - op.sub[k] * dp[k - 1]) / denom;
  }
  Vector x(n);
  x[n - 1] = dp[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) x[k] = dp[k] - cp[k] * x[k + 1];
  return x;
}

/// Solves (T + corner e_{n-1} e_0^T) x = rhs by Sherman-Morrison.
inline Vector ode_solve(const OdeOperator& op, const Vector& rhs, const Vector& t_inv_last) {
  Vector y = thomas(op, rhs);
  if (op.corner == 0.0) return y;
  const double factor = op.corner * y[0] / (1.0 + op.corner * t_inv_last[0]);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] -= factor * t_inv_last[k];
  return y;
}

} // namespace detail

/// M = A^{-1} B for the two-point boundary value problem above, with
/// B = h^2 diag(1, ..., 1, 0). Dense; the last column is exactly zero.
inline Matrix gen_ode_mvm(std::size_t n, double gamma = 0.5, double h = -1.0) {
  require(n >= 2, "gen_ode_mvm: n must be at least 2");
  require(gamma > 0.0 && gamma < 1.0, "gen_ode_mvm: gamma must lie in (0, 1)");
  if (h < 0.0) h = 1.0 / static_cast<double>(n + 1);
  require(h > 0.0, "gen_ode_mvm: h must be positive");
  const auto op = detail::ode_operator(n, gamma);
  Vector e_last(n, 0.0);
  e_last[n - 1] = 1.0;
  const Vector t_inv_last = detail::thomas(op, e_last);
  DenseMatrix m(n, n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    Vector col(n, 0.0);
    col[j] = h * h;
    const Vector x = detail::ode_solve(op, col, t_inv_last);
    for (std::size_t i = 0; i < n; ++i) m(i, j) = x[i];
  }
  return Matrix(std::move(m));
}

/// The finite-difference operator of gen_ode_mvm as an explicit dense
/// matrix (used to check the column solves).
inline DenseMatrix ode_operator_dense(std::size_t n, double gamma) {
  require(n >= 2, "ode_operator_dense: n must be at least 2");
  const auto op = detail::ode_operator(n, gamma);
  DenseMatrix a(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) a(k, k - 1) = op.sub[k];
    a(k, k) = op.diag[k];
    if (k + 1 < n) a(k, k + 1) = op.super[k];
  }
  if (op.corner != 0.0) a(n - 1, 0) += op.corner;
  return a;
}

// ---------------------------------------------------------------------------
// Generator specs
// ---------------------------------------------------------------------------

/// `n` is the matrix dimension, except for the 2-D families where it is the
/// grid size (the matrix is n^2 x n^2).
struct GeneratorSpec {
  Family family = Family::DiagPD;
  std::size_t n = 0;
  std::vector<double> params;
  std::uint64_t seed = 0;
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::DiagPD: return "diag-pd";
    case Family::DiagPSD: return "diag-psd";
    case Family::DiagIndefinite: return "diag-indef";
    case Family::Clement: return "clement";
    case Family::Dorr: return "dorr";
    case Family::Lotkin: return "lotkin";
    case Family::Poisson2DDirichlet: return "poisson-d";
    case Family::Poisson2DNeumann: return "poisson-n";
    case Family::ConvDiff: return "convdiff";
    case Family::OdeMvm: return "ode-mvm";
  }
  return "unknown";
}

/// Parses `FAMILY:N[:P1,P2,...]`, e.g. `diag-pd:1000`, `dorr:50:0.01`,
/// `convdiff:16:1,1,1`, `ode-mvm:100:0.5`.
inline GeneratorSpec parse_generator_spec(const std::string& text, std::uint64_t seed = 0) {
  GeneratorSpec spec;
  spec.seed = seed;
  const auto first = text.find(':');
  require(first != std::string::npos, "generator spec must look like FAMILY:N[:PARAMS], got '" + text + "'");
  const std::string name = text.substr(0, first);
  const auto second = text.find(':', first + 1);
  const std::string n_text = text.substr(first + 1, second == std::string::npos ? std::string::npos : second - first - 1);

  static const std::pair<const char*, Family> names[] = {
      {"diag-pd", Family::DiagPD},       {"diag-psd", Family::DiagPSD},
      {"diag-indef", Family::DiagIndefinite}, {"clement", Family::Clement},
      {"dorr", Family::Dorr},            {"lotkin", Family::Lotkin},
      {"poisson-d", Family::Poisson2DDirichlet}, {"poisson-n", Family::Poisson2DNeumann},
      {"convdiff", Family::ConvDiff},    {"ode-mvm", Family::OdeMvm}};
  bool found = false;
  for (const auto& [key, fam] : names) {
    if (name == key) {
      spec.family = fam;
      found = true;
    }
  }
  require(found, "unknown generator family '" + name + "'");

  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(n_text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == n_text.size() && !n_text.empty() && n_text[0] != '-', "generator size must be a positive integer, got '" + n_text + "'");
  spec.n = static_cast<std::size_t>(n);

  if (second != std::string::npos) {
    std::string rest = text.substr(second + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const std::string tok = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == tok.size() && !tok.empty(), "generator parameter must be a number, got '" + tok + "'");
      spec.params.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return spec;
}

inline Matrix generate(const GeneratorSpec& s) {
  auto param = [&](std::size_t i, double fallback) { return i < s.params.size() ? s.params[i] : fallback; };
  switch (s.family) {
    case Family::DiagPD: return gen_diag(DiagKind::PD, s.n, s.seed);
    case Family::DiagPSD: return gen_diag(DiagKind::PSD, s.n, s.seed);
    case Family::DiagIndefinite: return gen_diag(DiagKind::Indefinite, s.n, s.seed);
    case Family::Clement: return gen_clement(s.n);
    case Family::Dorr: return gen_dorr(s.n, param(0, 0.01));
    case Family::Lotkin: return gen_lotkin(s.n);
    case Family::Poisson2DDirichlet: return gen_poisson2d(s.n, BoundaryCondition::Dirichlet);
    case Family::Poisson2DNeumann: return gen_poisson2d(s.n, BoundaryCondition::Neumann);
    case Family::ConvDiff: return gen_convdiff(s.n, param(0, 1.0), param(1, 1.0), param(2, 1.0));
    case Family::OdeMvm: return gen_ode_mvm(s.n, param(0, 0.5), param(1, -1.0));
  }
  throw ContractViolation("generate: unknown family");
}

/// b_i = sum_j a_ij, via the same kernel as matvec(A, ones), so x = ones
/// solves A x = b exactly in floating point.
inline Vector row_sum_rhs(const Matrix& a) {
  const Vector ones(a.cols(), 1.0);
  return matvec(a, ones);
}

} // namespace tsolve
