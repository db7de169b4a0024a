#pragma once

/// @file dynamics.hpp
/// @brief Orbits of the first-order residual map F1, critical lines, the
/// eigenbasis equivalence check and phase-portrait output.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "f1.hpp"
#include "linalg.hpp"
#include "symmetric_eigen.hpp"
#include "trace.hpp"

namespace tsolve {

struct Orbit {
  std::vector<Vector> points;  ///< points[0] = r0
  std::vector<double> norms;
};

/// Up to k applications of F1, stopping after a zero residual or when H r = 0.
template <LinearOperator Op>
Orbit f1_orbit(const HOperator<Op>& h, std::span<const double> r0, std::size_t k) {
  require(r0.size() == h.size(), "f1_orbit: r0 length must equal H dimension");
  Orbit o;
  o.points.emplace_back(r0.begin(), r0.end());
  o.norms.push_back(norm2(r0));
  for (std::size_t step = 0; step < k; ++step) {
    if (o.norms.back() == 0.0) break;
    F1Step s = f1_step(h, o.points.back());
    if (s.hr_zero) break;
    o.norms.push_back(norm2(s.r));
    o.points.push_back(std::move(s.r));
  }
  return o;
}

struct CriticalPair {
  double lambda_i = 0.0, lambda_j = 0.0;
  double alpha_i = 0.0, alpha_j = 0.0;
  Vector r_plus, r_minus;
  double rho_ij = 0.0;  ///< (lambda_j - lambda_i) / (lambda_j + lambda_i)
};

/// r+- = alpha_i u_i +- alpha_j u_j with alpha_i = sqrt(l_j / (l_i + l_j)),
/// alpha_j = sqrt(l_i / (l_i + l_j)).
inline CriticalPair critical_pair(double lambda_i, double lambda_j, std::span<const double> u_i,
                                  std::span<const double> u_j) {
  require(lambda_i > 0.0 && lambda_j > 0.0, "critical_pair: eigenvalues must be positive");
  require(lambda_i != lambda_j, "critical_pair: equal eigenvalues have no critical pair");
  require(lambda_i < lambda_j, "critical_pair: requires lambda_i < lambda_j");
  require(u_i.size() == u_j.size(), "critical_pair: eigenvector length mismatch");
  CriticalPair cp;
  cp.lambda_i = lambda_i;
  cp.lambda_j = lambda_j;
  const double sum = lambda_i + lambda_j;
  cp.alpha_i = std::sqrt(lambda_j / sum);
  cp.alpha_j = std::sqrt(lambda_i / sum);
  cp.rho_ij = (lambda_j - lambda_i) / sum;
  cp.r_plus.resize(u_i.size());
  cp.r_minus.resize(u_i.size());
  for (std::size_t k = 0; k < u_i.size(); ++k) {
    cp.r_plus[k] = cp.alpha_i * u_i[k] + cp.alpha_j * u_j[k];
    cp.r_minus[k] = cp.alpha_i * u_i[k] - cp.alpha_j * u_j[k];
  }
  return cp;
}

struct EquivalenceReport {
  double max_deviation = 0.0;       ///< max_k | ||r_k|| - ||y_k|| |
  double eigen_residual = 0.0;      ///< ||H U - U Lambda||_F / ||H||_F
  std::size_t steps = 0;
  Orbit orbit_h;
  Orbit orbit_lambda;
};

/// Orbit of r0 under H against the orbit of U^T r0 under the diagonal of
/// eigenvalues. Dense, m <= 200.
inline EquivalenceReport eigenbasis_equivalence_check(const DenseMatrix& h, std::span<const double> r0, std::size_t k) {
  require(h.rows() == h.cols(), "eigenbasis_equivalence_check: H must be square");
  require(h.rows() <= 200, "eigenbasis_equivalence_check: m must not exceed 200");
  require(r0.size() == h.rows(), "eigenbasis_equivalence_check: r0 length mismatch");
  require(is_symmetric(Matrix(h), 1e-12), "eigenbasis_equivalence_check: H must be symmetric");
  const std::size_t m = h.rows();
  const SymmetricEigen eig = jacobi_eigen(h);

  EquivalenceReport rep;
  double hn = 0.0, res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double hu = 0.0;
      for (std::size_t l = 0; l < m; ++l) hu += h(i, l) * eig.vectors(l, j);
      const double d = hu - eig.vectors(i, j) * eig.values[j];
      res += d * d;
      hn += h(i, j) * h(i, j);
    }
  }
  rep.eigen_residual = hn > 0.0 ? std::sqrt(res / hn) : std::sqrt(res);
  if (rep.eigen_residual > 1e-10) throw std::runtime_error("eigenbasis_equivalence_check: eigendecomposition failed");

  std::vector<Triplet> diag;
  for (std::size_t i = 0; i < m; ++i)
    if (eig.values[i] != 0.0) diag.push_back({i, i, eig.values[i]});
  const Matrix lambda(CsrMatrix::from_triplets(m, m, std::move(diag)));
  Vector y0(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += eig.vectors(i, j) * r0[i];
    y0[j] = s;
  }
  const Matrix hm(h);
  rep.orbit_h = f1_orbit(HOperator<Matrix>(hm, HMode::SymmetricA), r0, k);
  rep.orbit_lambda = f1_orbit(HOperator<Matrix>(lambda, HMode::SymmetricA), y0, k);
  const std::size_t len = std::max(rep.orbit_h.norms.size(), rep.orbit_lambda.norms.size());
  rep.steps = len == 0 ? 0 : len - 1;
  for (std::size_t s = 0; s < len; ++s) {
    const double a = s < rep.orbit_h.norms.size() ? rep.orbit_h.norms[s] : 0.0;
    const double b = s < rep.orbit_lambda.norms.size() ? rep.orbit_lambda.norms[s] : 0.0;
    rep.max_deviation = std::max(rep.max_deviation, std::abs(a - b));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Phase portraits
// ---------------------------------------------------------------------------

struct PhasePortrait {
  DenseMatrix h;
  std::vector<double> lambda;          ///< ascending
  std::vector<Vector> eigenvectors;    ///< matching lambda
  std::vector<Orbit> orbits;
  std::vector<Vector> critical_directions;  ///< empty when the eigenvalues coincide
};

/// Orbits of `starts` equally spaced unit vectors (angles 2 pi k / starts)
/// under a 2x2 symmetric positive definite H.
inline PhasePortrait phase_portrait(const DenseMatrix& h, std::size_t starts, std::size_t steps) {
  require(h.rows() == 2 && h.cols() == 2, "phase_portrait: H must be 2x2");
  require(std::abs(h(0, 1) - h(1, 0)) <= 1e-12 * std::max(1.0, std::abs(h(0, 1))), "phase_portrait: H must be symmetric");
  require(starts >= 1, "phase_portrait: need at least one start");
  PhasePortrait p;
  p.h = h;
  const SymmetricEigen eig = jacobi_eigen(h);
  std::size_t lo = eig.values[0] <= eig.values[1] ? 0 : 1;
  std::size_t hi = 1 - lo;
  require(eig.values[lo] > 0.0, "phase_portrait: H must be positive definite");
  p.lambda = {eig.values[lo], eig.values[hi]};
  for (std::size_t idx : {lo, hi}) p.eigenvectors.push_back({eig.vectors(0, idx), eig.vectors(1, idx)});
  if (p.lambda[0] < p.lambda[1]) {
    const CriticalPair cp = critical_pair(p.lambda[0], p.lambda[1], p.eigenvectors[0], p.eigenvectors[1]);
    p.critical_directions = {cp.r_plus, cp.r_minus};
  }
  const Matrix hm(h);
  const HOperator<Matrix> op(hm, HMode::SymmetricA);
  for (std::size_t s = 0; s < starts; ++s) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(starts);
    const Vector r0{std::cos(theta), std::sin(theta)};
    p.orbits.push_back(f1_orbit(op, r0, steps));
  }
  return p;
}

/// Rows `start_id,step,x,y,norm`.
inline void write_portrait_csv(const PhasePortrait& p, std::ostream& os) {
  os << "start_id,step,x,y,norm\n";
  for (std::size_t s = 0; s < p.orbits.size(); ++s) {
    const Orbit& o = p.orbits[s];
    for (std::size_t k = 0; k < o.points.size(); ++k)
      os << s << ',' << k << ',' << format_double(o.points[k][0]) << ',' << format_double(o.points[k][1]) << ','
         << format_double(o.norms[k]) << '\n';
  }
}

/// SVG 1.1 on the square [-1.2, 1.2]^2: one polyline per orbit, critical
/// lines as dashed lines through the origin.
inline void write_portrait_svg(const PhasePortrait& p, std::ostream& os) {
  const double size = 480.0;
  const double extent = 1.2;
  auto px = [&](double x) { return format_double(std::round((x + extent) / (2 * extent) * size * 1000.0) / 1000.0); };
  auto py = [&](double y) { return format_double(std::round((extent - y) / (2 * extent) * size * 1000.0) / 1000.0); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << px(-extent) << "\" y1=\"" << py(0) << "\" x2=\"" << px(extent) << "\" y2=\"" << py(0)
     << "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
  os << "<line x1=\"" << px(0) << "\" y1=\"" << py(-extent) << "\" x2=\"" << px(0) << "\" y2=\"" << py(extent)
     << "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
  for (std::size_t c = 0; c < p.critical_directions.size(); ++c) {
    const Vector& d = p.critical_directions[c];
    const double n = norm2(d);
    const double s = extent * 1.5 / n;
    os << "<line class=\"critical\" id=\"critical-" << c << "\" x1=\"" << px(-s * d[0]) << "\" y1=\"" << py(-s * d[1])
       << "\" x2=\"" << px(s * d[0]) << "\" y2=\"" << py(s * d[1])
       << "\" stroke=\"#e0b000\" stroke-width=\"1.5\" stroke-dasharray=\"6,3\"/>\n";
  }
  for (std::size_t s = 0; s < p.orbits.size(); ++s) {
    os << "<polyline class=\"orbit\" id=\"orbit-" << s << "\" fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"0.8\" points=\"";
    const Orbit& o = p.orbits[s];
    for (std::size_t k = 0; k < o.points.size(); ++k) {
      if (k) os << ' ';
      os << px(o.points[k][0]) << ',' << py(o.points[k][1]);
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

} // namespace tsolve
