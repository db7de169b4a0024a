#pragma once

/// @file f1.hpp
/// @brief The first-order residual map F1(r) = r - (r'Hr / r'H^2 r) H r and
/// the two-point acceleration built on it.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "linalg.hpp"

namespace tsolve {

struct F1Step {
  Vector r;             ///< F1(r), or r unchanged when H r = 0
  double alpha = 0.0;   ///< phi1 / phi2
  bool hr_zero = false;
};

template <LinearOperator Op>
F1Step f1_step(const HOperator<Op>& h, std::span<const double> r) {
  F1Step out;
  const Vector hr = h.apply(r);
  const double phi2 = dot(hr, hr);
  out.r.assign(r.begin(), r.end());
  if (phi2 == 0.0) {
    out.hr_zero = true;
    return out;
  }
  out.alpha = dot(r, hr) / phi2;
  axpy(-out.alpha, hr, out.r);
  return out;
}

struct Acceleration {
  double alpha = 0.0;  ///< weight on r_k in r_bar = alpha r_k + (1 - alpha) r_{k+1}
  Vector r_bar;
  Vector f1_r_bar;     ///< F1(r_bar)
};

/// Picks the convex combination of r_k and r_{k+1} = F1(r_k) whose F1 image is
/// smallest. Candidates: both endpoints, the clamped minimiser of
/// ||a F1(r_k) + (1-a) F1(r_{k+1})||, and rho/(rho+1) with
/// rho = ||r_{k+1}|| / ||r_k||, which is exact on a critical line.
template <LinearOperator Op>
Acceleration accelerate(const HOperator<Op>& h, std::span<const double> r_k, std::span<const double> r_k1) {
  require(r_k.size() == r_k1.size(), "accelerate: length mismatch");
  const double nk = norm2(r_k);
  const double nk1 = norm2(r_k1);

  Acceleration best;
  best.alpha = 0.0;
  best.r_bar.assign(r_k1.begin(), r_k1.end());
  best.f1_r_bar = f1_step(h, r_k1).r;
  if (nk1 == 0.0 || nk == 0.0) return best;
  double best_norm = norm2(best.f1_r_bar);
  if (best_norm == 0.0) return best;

  // quadratic surrogate: u = F1(r_k) = r_k1, w = F1(r_k1)
  const Vector& w = best.f1_r_bar;
  const Vector diff = subtract(r_k1, w);
  const double dd = dot(diff, diff);
  double a_quad = dd > 0.0 ? -dot(w, diff) / dd : 0.0;
  a_quad = std::clamp(a_quad, 0.0, 1.0);
  const double rho = nk1 / nk;

  const std::array<double, 3> candidates{rho / (rho + 1.0), a_quad, 1.0};
  for (double a : candidates) {
    Vector rb(r_k.size());
    for (std::size_t i = 0; i < rb.size(); ++i) rb[i] = a * r_k[i] + (1.0 - a) * r_k1[i];
    Vector f = f1_step(h, rb).r;
    const double fn = norm2(f);
    if (fn < best_norm) {
      best_norm = fn;
      best.alpha = a;
      best.r_bar = std::move(rb);
      best.f1_r_bar = std::move(f);
    }
  }
  return best;
}

} // namespace tsolve
