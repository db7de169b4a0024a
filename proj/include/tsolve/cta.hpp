#pragma once

/// @file cta.hpp
/// @brief Centering Triangle Algorithm: moments, the auxiliary Hankel solve,
/// order-t steps, the enhanced x-hat step and the cycling driver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "f1.hpp"
#include "linalg.hpp"
#include "outcome.hpp"
#include "symmetric_eigen.hpp"
#include "trace.hpp"

namespace tsolve {

// ---------------------------------------------------------------------------
// Moments and the auxiliary system
// ---------------------------------------------------------------------------

/// Krylov vectors p_0 = r, p_k = H p_{k-1}, k = 1..t.
struct Krylov {
  std::vector<Vector> p;
  std::size_t order() const { return p.empty() ? 0 : p.size() - 1; }
};

template <LinearOperator Op>
Krylov krylov_vectors(const HOperator<Op>& h, std::span<const double> r, std::size_t t) {
  require(r.size() == h.size(), "krylov_vectors: residual length must equal H dimension");
  Krylov k;
  k.p.reserve(t + 1);
  k.p.emplace_back(r.begin(), r.end());
  for (std::size_t i = 1; i <= t; ++i) k.p.push_back(h.apply(k.p.back()));
  return k;
}

struct Moments {
  std::size_t t = 0;
  std::vector<double> phi;  ///< phi[k-1] = r^T H^k r, k = 1..2t

  double operator()(std::size_t k) const { return phi.at(k - 1); }
};

/// phi_k = p_floor(k/2)^T p_ceil(k/2) for the first `t` Krylov vectors.
inline Moments moments_from_krylov(const Krylov& k, std::size_t t) {
  require(t >= 1 && t <= k.order(), "moments_from_krylov: order exceeds available Krylov vectors");
  Moments m;
  m.t = t;
  m.phi.resize(2 * t);
  for (std::size_t idx = 1; idx <= 2 * t; ++idx) m.phi[idx - 1] = dot(k.p[idx / 2], k.p[(idx + 1) / 2]);
  return m;
}

/// phi_1..phi_2t of r with respect to H, using t applications of H.
template <LinearOperator Op>
Moments compute_moments(const HOperator<Op>& h, std::span<const double> r, std::size_t t) {
  require(t >= 1 && t <= h.size(), "compute_moments: order t must satisfy 1 <= t <= m");
  require(norm2(r) > 0.0, "compute_moments: residual must be nonzero");
  return moments_from_krylov(krylov_vectors(h, r, t), t);
}

struct AlphaCoeffs {
  std::size_t t = 0;
  std::vector<double> alpha;
  std::size_t rank = 0;
  bool inconsistent = false;  ///< Hankel residual exceeded tolerance; alpha is the least-squares fit
};

inline constexpr double kAuxiliaryRelTol = 1e-13;

/// Minimum-norm solution of sum_j phi_{i+j} alpha_j = phi_i, i = 1..t.
/// The Hankel matrix is symmetrically scaled by diag(phi_{2i})^{-1/2} before
/// the truncated eigen-solve.
inline AlphaCoeffs solve_auxiliary(const Moments& mom) {
  const std::size_t t = mom.t;
  require(t >= 1 && mom.phi.size() == 2 * t, "solve_auxiliary: malformed moments");
  std::vector<double> d(t);
  for (std::size_t i = 0; i < t; ++i) {
    const double diag = mom(2 * (i + 1));
    d[i] = diag > 0.0 ? 1.0 / std::sqrt(diag) : 0.0;
  }
  DenseMatrix s(t, t);
  Vector rhs(t);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) s(i, j) = d[i] * mom(i + j + 2) * d[j];
    rhs[i] = d[i] * mom(i + 1);
  }
  const PinvSolve sol = symmetric_pinv_solve(s, rhs, kAuxiliaryRelTol);

  AlphaCoeffs out;
  out.t = t;
  out.rank = sol.rank;
  out.alpha.resize(t);
  for (std::size_t i = 0; i < t; ++i) out.alpha[i] = d[i] * sol.x[i];

  double res = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    double row = -mom(i + 1);
    for (std::size_t j = 0; j < t; ++j) row += mom(i + j + 2) * out.alpha[j];
    res += row * row;
    scale += mom(i + 1) * mom(i + 1);
  }
  out.inconsistent = std::sqrt(res) > 1e-8 * std::sqrt(scale);
  return out;
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

struct CtaState {
  Vector x;
  Vector r;
  std::size_t iter = 0;
  std::size_t schedule_pos = 0;
};

struct CtaStepReport {
  std::size_t requested_order = 0;
  std::size_t applied_order = 0;  ///< 0 when no order decreased the residual
  bool hr_zero = false;           ///< H r = 0: x solves the normal equation
  double residual_before = 0.0;
  double residual_after = 0.0;
  std::vector<double> alpha;
};

/// Applies the largest order s <= K.order() whose F_s decreases ||r||. The
/// state is left untouched when H r = 0 or when no order helps.
template <LinearOperator Op>
CtaStepReport cta_step_with(CtaState& state, const HOperator<Op>& h, const Krylov& k) {
  CtaStepReport rep;
  rep.requested_order = k.order();
  rep.residual_before = norm2(state.r);
  rep.residual_after = rep.residual_before;
  if (dot(k.p[1], k.p[1]) == 0.0) {
    rep.hr_zero = true;
    return rep;
  }
  const std::size_t m = state.r.size();
  for (std::size_t s = k.order(); s >= 1; --s) {
    const AlphaCoeffs a = solve_auxiliary(moments_from_krylov(k, s));
    Vector d(m, 0.0);    // sum alpha_i H^i r
    Vector dir(m, 0.0);  // sum alpha_i H^{i-1} r
    for (std::size_t i = 1; i <= s; ++i) {
      axpy(a.alpha[i - 1], k.p[i], d);
      axpy(a.alpha[i - 1], k.p[i - 1], dir);
    }
    // ||r||^2 - ||r - d||^2 without the cancellation of differencing two norms
    const double gain = 2.0 * dot(d, state.r) - dot(d, d);
    if (gain > 0.0) {
      Vector r_new = subtract(state.r, d);
      const double n_new = norm2(r_new);
      const Vector dx = h.lift(dir);
      axpy(1.0, dx, state.x);
      state.r = std::move(r_new);
      rep.applied_order = s;
      rep.residual_after = n_new;
      rep.alpha = a.alpha;
      return rep;
    }
  }
  return rep;
}

/// r <- F_t(r) with the matching x update (falls back to lower orders if
/// floating point makes order t non-decreasing).
template <LinearOperator Op>
CtaStepReport cta_step(CtaState& state, const HOperator<Op>& h, std::size_t t) {
  require(t >= 1 && t <= h.size(), "cta_step: order t must satisfy 1 <= t <= m");
  require(state.r.size() == h.size() && state.x.size() == h.matrix().cols(), "cta_step: state dimension mismatch");
  require(norm2(state.r) > 0.0, "cta_step: residual must be nonzero");
  return cta_step_with(state, h, krylov_vectors(h, state.r, t));
}

struct XHat {
  Vector x;
  std::size_t j = 0;  ///< number of F1 compositions applied
};

/// Looks for the smallest j <= j_max - 1 with F1^j(r)^T H F1^j(r) <= eps and
/// returns x + sum_{i<j} alpha11(F1^i r) * lift(F1^i r). Empty when no such j.
template <LinearOperator Op>
std::optional<XHat> compute_x_hat(std::span<const double> x, std::span<const double> r, const HOperator<Op>& h,
                                  std::size_t j_max, double eps) {
  require(x.size() == h.matrix().cols() && r.size() == h.size(), "compute_x_hat: dimension mismatch");
  Vector s(r.begin(), r.end());
  Vector dir(s.size(), 0.0);
  Vector hs = h.apply(s);
  for (std::size_t j = 1; j + 1 <= j_max; ++j) {
    const double phi2 = dot(hs, hs);
    if (phi2 == 0.0) return std::nullopt;
    const double a = dot(s, hs) / phi2;
    axpy(a, s, dir);
    axpy(-a, hs, s);
    hs = h.apply(s);
    if (dot(s, hs) <= eps) {
      XHat out;
      out.x.assign(x.begin(), x.end());
      axpy(1.0, h.lift(dir), out.x);
      out.j = j;
      return out;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Triangle-wave order schedule 1, 2, ..., t_max, t_max - 1, ..., 1, 2, ...
inline std::size_t schedule_order(std::size_t pos, std::size_t t_max) {
  if (t_max <= 1) return 1;
  const std::size_t period = 2 * (t_max - 1);
  const std::size_t p = pos % period;
  return p < t_max ? p + 1 : 2 * t_max - 1 - p;
}

struct CtaOptions {
  double epsilon = 1e-15;
  /// Tolerance of the r^T H r clause. Unset means `epsilon`; 0 disables the
  /// clause (the run then stops only on the residual, Hr = 0, or the cap).
  std::optional<double> quadratic_epsilon;
  std::size_t t_max = 5;  ///< clamped to m
  std::size_t max_iters = 100000;
  HMode h_mode = HMode::GramAAT;
  bool enhanced = false;
  std::size_t recheck_every = 50;
  std::optional<Vector> x0;
  /// Two-point acceleration after three consecutive steps with ratio above
  /// `accelerate_ratio`.
  bool accelerate = false;
  double accelerate_ratio = 0.95;
  bool record_trace = true;
};

struct CtaResult {
  Status status = Status::IterationCapReached;
  Vector x;
  Vector r;                          ///< b - A x, recomputed at exit
  std::size_t iterations = 0;
  double residual_norm = 0.0;        ///< ||b - A x||
  double normal_residual_norm = 0.0; ///< ||A^T (b - A x)||
  double normal_bound = NAN;         ///< bound implied by the quadratic clause, when it fired
  std::optional<Vector> x_hat;
  std::size_t x_hat_j = 0;
  double max_drift = 0.0;            ///< max ||r_maintained - (b - Ax)|| / (||b|| + ||A||_F ||x||)
  std::size_t order_fallbacks = 0;   ///< steps applied below the scheduled order
  std::size_t accelerations = 0;
  std::vector<CtaTraceRow> trace;
};

namespace cta_detail {

template <LinearOperator Op>
void finish(CtaResult& res, const Op& a, std::span<const double> b, const Vector& x) {
  res.x = x;
  res.r = residual(a, x, b);
  res.residual_norm = norm2(res.r);
  res.normal_residual_norm = norm2(matvec_transpose(a, res.r));
}

} // namespace cta_detail

/// Iterates F_t from x0 (default 0) while ||r|| > eps and r^T H r > eps_q,
/// cycling the order through the triangle-wave schedule.
template <LinearOperator Op>
CtaResult cta_solve(const Op& a, std::span<const double> b, const CtaOptions& opts = {}) {
  require(b.size() == a.rows(), "cta_solve: b length must equal A row count");
  require(opts.epsilon > 0.0 && std::isfinite(opts.epsilon), "cta_solve: epsilon must be positive");
  const double eps_q = opts.quadratic_epsilon.value_or(opts.epsilon);
  require(eps_q >= 0.0, "cta_solve: quadratic_epsilon must be nonnegative");
  const HOperator<Op> h(a, opts.h_mode);
  require(opts.t_max >= 1, "cta_solve: t_max must be at least 1");
  const std::size_t t_max = std::min(opts.t_max, h.size());
  require(opts.recheck_every >= 1, "cta_solve: recheck_every must be positive");

  const Stopwatch clock;
  CtaResult res;
  CtaState st;
  st.x = opts.x0 ? *opts.x0 : Vector(a.cols(), 0.0);
  require(st.x.size() == a.cols(), "cta_solve: x0 length must equal A column count");

  if (norm2(b) == 0.0 && !opts.x0) {
    res.status = Status::ApproxSolution;
    cta_detail::finish(res, a, b, st.x);
    if (opts.record_trace) res.trace.push_back({0, 0, 0.0, 0.0, clock.elapsed_ns()});
    return res;
  }

  st.r = residual(a, st.x, b);
  const double norm_b = norm2(b);
  const double norm_a = a.frobenius_norm();
  bool refreshed = false;  // r was recomputed from b - Ax since the last successful step
  std::size_t slow_steps = 0;
  Vector prev_x, prev_r;

  auto refresh = [&] {
    Vector true_r = residual(a, st.x, b);
    const double denom = norm_b + norm_a * norm2(st.x);
    if (denom > 0.0) res.max_drift = std::max(res.max_drift, norm2(subtract(true_r, st.r)) / denom);
    st.r = std::move(true_r);
    refreshed = true;
  };
  auto record = [&](std::size_t t, double rn, double nrn) {
    if (opts.record_trace) res.trace.push_back({st.iter, t, rn, nrn, clock.elapsed_ns()});
  };
  auto done = [&](Status s) {
    res.status = s;
    res.iterations = st.iter;
    cta_detail::finish(res, a, b, st.x);
    return res;
  };

  while (true) {
    const std::size_t t = schedule_order(st.schedule_pos, t_max);
    const Krylov k = krylov_vectors(h, st.r, t);
    const double rn = norm2(st.r);
    const double phi1 = dot(k.p[0], k.p[1]);
    const double phi2 = dot(k.p[1], k.p[1]);
    const double nrn = opts.h_mode == HMode::GramAAT ? std::sqrt(std::max(phi1, 0.0)) : std::sqrt(phi2);

    if (!std::isfinite(rn) || !std::isfinite(phi2) || !all_finite(st.x)) {
      record(0, rn, nrn);
      return done(Status::NumericalFailure);
    }
    if (rn <= opts.epsilon) {
      if (!refreshed) {
        refresh();
        continue;
      }
      record(0, rn, nrn);
      return done(Status::ApproxSolution);
    }
    if ((eps_q > 0.0 && phi1 <= eps_q) || phi2 == 0.0) {
      if (!refreshed) {
        refresh();
        continue;
      }
      record(0, rn, nrn);
      res.normal_bound = opts.h_mode == HMode::GramAAT ? std::sqrt(eps_q) : std::sqrt(eps_q * norm_a);
      return done(Status::NormalEqSolution);
    }
    if (st.iter >= opts.max_iters) {
      record(0, rn, nrn);
      return done(Status::IterationCapReached);
    }
    record(t, rn, nrn);

    if (opts.enhanced && t >= 2) {
      const double eps_hat = eps_q > 0.0 ? eps_q : opts.epsilon;
      if (auto xh = compute_x_hat(st.x, st.r, h, t, eps_hat)) {
        const double nx = norm2(matvec_transpose(a, residual(a, st.x, b)));
        const double nh = norm2(matvec_transpose(a, residual(a, xh->x, b)));
        res.x_hat = xh->x;
        res.x_hat_j = xh->j;
        if (nh < nx) st.x = xh->x;
        res.normal_bound = opts.h_mode == HMode::GramAAT ? std::sqrt(eps_hat) : std::sqrt(eps_hat * norm_a);
        return done(Status::NormalEqSolution);
      }
    }

    if (opts.accelerate) {
      prev_x = st.x;
      prev_r = st.r;
    }
    const CtaStepReport rep = cta_step_with(st, h, k);
    if (rep.applied_order == 0) {
      if (refreshed) return done(Status::Stagnated);
      refresh();
      continue;
    }
    if (rep.applied_order < t) ++res.order_fallbacks;
    refreshed = false;
    ++st.iter;
    ++st.schedule_pos;

    if (opts.accelerate) {
      slow_steps = rep.residual_after > opts.accelerate_ratio * rep.residual_before ? slow_steps + 1 : 0;
      if (slow_steps >= 3) {
        slow_steps = 0;
        const Acceleration acc = accelerate(h, prev_r, st.r);
        if (acc.alpha > 0.0) {
          // x_bar pairs with r_bar by linearity; F1 then applies on top
          Vector xb(st.x.size());
          for (std::size_t i = 0; i < xb.size(); ++i) xb[i] = acc.alpha * prev_x[i] + (1.0 - acc.alpha) * st.x[i];
          CtaState trial{std::move(xb), acc.r_bar, st.iter, st.schedule_pos};
          const CtaStepReport r1 = cta_step_with(trial, h, krylov_vectors(h, trial.r, 1));
          if (r1.applied_order == 1 && r1.residual_after < norm2(st.r)) {
            st.x = std::move(trial.x);
            st.r = std::move(trial.r);
            ++res.accelerations;
          }
        }
      }
    }

    if (st.iter % opts.recheck_every == 0) refresh();
  }
}

} // namespace tsolve
