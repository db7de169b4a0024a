#pragma once

/// @file ta.hpp
/// @brief Triangle Algorithm over the ellipsoid E_{A,rho} = {Ax : ||x|| <= rho}:
/// pivots and witnesses, the fixed-radius and adaptive-radius solvers, and
/// minimum-norm bisection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "outcome.hpp"
#include "trace.hpp"

namespace tsolve {

/// c = A^T (b - b')
template <LinearOperator Op>
Vector compute_c(const Op& a, std::span<const double> b, std::span<const double> b_prime) {
  require(b.size() == a.rows() && b_prime.size() == a.rows(), "compute_c: b and b' must have length m");
  return matvec_transpose(a, subtract(b, b_prime));
}

struct Pivot {
  Vector v;         ///< point of E_{A,rho}
  Vector preimage;  ///< x with A x = v, ||x|| = rho
};

/// v = rho A c / ||c||, the maximiser of c^T x over the radius-rho ball mapped by A.
template <LinearOperator Op>
Pivot pivot_candidate(const Op& a, std::span<const double> c, double rho) {
  require(c.size() == a.cols(), "pivot_candidate: c must have length n");
  require(rho > 0.0, "pivot_candidate: rho must be positive");
  const double cn = norm2(c);
  require(cn > 0.0, "pivot_candidate: c = 0 has no pivot direction");
  Pivot p;
  p.preimage = scaled(rho / cn, c);
  p.v = matvec(a, p.preimage);
  return p;
}

/// rho ||c|| >= (b - b')^T b
inline bool is_strict_pivot(double rho, std::span<const double> c, std::span<const double> b,
                            std::span<const double> b_prime) {
  return rho * norm2(c) >= dot(subtract(b, b_prime), b);
}

struct TaStep {
  Vector b2;
  Vector x2;
  double alpha = 0.0;
};

/// Moves b' toward v by the distance-minimising weight alpha (clamped to [0, 1]).
inline TaStep ta_step(std::span<const double> b_prime, std::span<const double> x_prime, std::span<const double> v,
                      std::span<const double> preimage, std::span<const double> b) {
  require(b_prime.size() == v.size() && b.size() == v.size() && x_prime.size() == preimage.size(),
          "ta_step: dimension mismatch");
  const Vector d = subtract(v, b_prime);
  const double dd = dot(d, d);
  require(dd > 0.0, "ta_step: degenerate pivot (v = b')");
  const double alpha = std::clamp(dot(subtract(b, b_prime), d) / dd, 0.0, 1.0);
  TaStep s;
  s.alpha = alpha;
  s.b2.resize(v.size());
  s.x2.resize(preimage.size());
  for (std::size_t i = 0; i < v.size(); ++i) s.b2[i] = (1.0 - alpha) * b_prime[i] + alpha * v[i];
  for (std::size_t i = 0; i < preimage.size(); ++i) s.x2[i] = (1.0 - alpha) * x_prime[i] + alpha * preimage[i];
  return s;
}

struct TaOptions {
  double epsilon = 1e-10;
  std::optional<double> epsilon_prime;  ///< defaults to epsilon
  std::size_t max_iters = 1000000;
  std::size_t recheck_every = 1000;    ///< recompute b' = A x' this often
  bool record_trace = true;
};

struct TaResult {
  Status status = Status::IterationCapReached;
  Vector x;
  Vector b_prime;             ///< A x as maintained by the iteration
  double rho = 0.0;
  double lower_bound = NAN;   ///< (b - b')^T b / ||c|| on Witness
  std::size_t iterations = 0;
  double gap_norm = 0.0;      ///< ||b - b'||
  double normal_gap_norm = 0.0;  ///< ||A^T (b - b')||
  bool rho_cap_hit = false;
  std::vector<TaTraceRow> trace;
};

namespace ta_detail {

/// Shared loop of the fixed and adaptive solvers.
template <LinearOperator Op>
TaResult run(const Op& a, std::span<const double> b, double rho, bool adaptive, double rho_cap,
             std::optional<Vector> x0, const TaOptions& opts, double normal_floor = -1.0) {
  require(b.size() == a.rows(), "ta: b length must equal A row count");
  require(opts.epsilon > 0.0, "ta: epsilon must be positive");
  const double eps = opts.epsilon;
  const double eps_p = opts.epsilon_prime.value_or(opts.epsilon);
  require(eps_p > 0.0, "ta: epsilon_prime must be positive");
  require(opts.recheck_every >= 1, "ta: recheck_every must be positive");

  const Stopwatch clock;
  TaResult res;
  Vector x = x0 ? std::move(*x0) : Vector(a.cols(), 0.0);
  require(x.size() == a.cols(), "ta: x0 length must equal A column count");
  Vector bp = matvec(a, x);
  bool fresh = true;  // bp was just recomputed as A x
  std::size_t iter = 0;

  auto record = [&](double g, double ng, TaEvent e) {
    if (opts.record_trace) res.trace.push_back({iter, rho, g, ng, e, clock.elapsed_ns()});
  };
  auto done = [&](Status s, double g, double ng) {
    res.status = s;
    res.x = std::move(x);
    res.b_prime = std::move(bp);
    res.rho = rho;
    res.iterations = iter;
    res.gap_norm = g;
    res.normal_gap_norm = ng;
    return res;
  };

  while (true) {
    const Vector gap = subtract(b, bp);
    const double g = norm2(gap);
    const Vector c = matvec_transpose(a, gap);
    const double cn = norm2(c);
    if (!std::isfinite(g) || !std::isfinite(cn)) return done(Status::NumericalFailure, g, cn);
    if (g <= eps) {
      if (!fresh) {
        bp = matvec(a, x);
        fresh = true;
        continue;
      }
      record(g, cn, TaEvent::Pivot);
      return done(Status::ApproxSolution, g, cn);
    }
    if (normal_floor >= 0.0 ? cn <= normal_floor : cn <= eps_p) {
      record(g, cn, TaEvent::Pivot);
      return done(Status::NormalEqSolution, g, cn);
    }
    if (iter >= opts.max_iters) {
      record(g, cn, TaEvent::Pivot);
      return done(Status::IterationCapReached, g, cn);
    }
    const double gb = dot(gap, b);
    if (!(rho * cn >= gb)) {
      const double bound = gb / cn;
      if (!adaptive) {
        record(g, cn, TaEvent::Witness);
        res.lower_bound = bound;
        return done(Status::Witness, g, cn);
      }
      const double next = std::max(2.0 * rho, bound);
      if (next > rho_cap) {
        record(g, cn, TaEvent::Witness);
        res.lower_bound = bound;
        res.rho_cap_hit = true;
        return done(Status::IterationCapReached, g, cn);
      }
      rho = next;
      record(g, cn, TaEvent::Expand);
      ++iter;
      continue;
    }
    record(g, cn, TaEvent::Pivot);
    const Vector pre = scaled(rho / cn, c);
    const Vector v = matvec(a, pre);
    if (dot(subtract(v, bp), subtract(v, bp)) == 0.0) return done(Status::Stagnated, g, cn);
    TaStep s = ta_step(bp, x, v, pre, b);
    if (s.alpha == 0.0) return done(Status::Stagnated, g, cn);
    x = std::move(s.x2);
    bp = std::move(s.b2);
    ++iter;
    fresh = false;
    if (iter % opts.recheck_every == 0) {
      bp = matvec(a, x);
      fresh = true;
    }
  }
}

} // namespace ta_detail

/// Fixed radius: approximate solution inside E_{A,rho}, or a witness that b
/// lies outside it. `x0` must satisfy ||x0|| <= rho.
template <LinearOperator Op>
TaResult ta_fixed_rho(const Op& a, std::span<const double> b, double rho, const TaOptions& opts = {},
                      std::optional<Vector> x0 = std::nullopt) {
  require(rho > 0.0, "ta_fixed_rho: rho must be positive");
  if (x0) require(norm2(*x0) <= rho * (1.0 + 1e-12), "ta_fixed_rho: warm start lies outside the ball");
  return ta_detail::run(a, b, rho, false, rho, std::move(x0), opts);
}

/// Adaptive radius: starts at rho0 (default 0) and on each witness raises
/// rho to max(2 rho, (b - b')^T b / ||c||). Gives up once rho would exceed
/// rho_cap (default 4 ||b||^2 / eps').
template <LinearOperator Op>
TaResult ta_adaptive(const Op& a, std::span<const double> b, const TaOptions& opts = {},
                     std::optional<double> rho_cap = std::nullopt, std::optional<Vector> x0 = std::nullopt,
                     double rho0 = 0.0) {
  const double eps_p = opts.epsilon_prime.value_or(opts.epsilon);
  const double nb = norm2(b);
  const double cap = rho_cap.value_or(4.0 * nb * nb / eps_p);
  require(cap > 0.0, "ta_adaptive: rho_cap must be positive");
  require(rho0 >= 0.0, "ta_adaptive: rho0 must be nonnegative");
  if (x0) {
    rho0 = std::max(rho0, norm2(*x0));
  }
  return ta_detail::run(a, b, rho0, true, cap, std::move(x0), opts);
}

struct MinNormResult {
  Status status = Status::MinNormSolution;
  Vector x;
  double rho_lower = 0.0;  ///< b is outside the open ellipsoid of this radius
  double rho_upper = 0.0;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  double residual_norm = 0.0;
  double normal_residual_norm = 0.0;
  std::vector<TaTraceRow> trace;  ///< inner rows, then one row per bisection decision
};

/// Bisection on [rho_lower, rho_upper] starting from [0, ||x_eps||]. Each
/// radius is tested with the fixed-radius solver warm-started from the last
/// witness. A success lowers rho_upper to the tested radius; a witness raises
/// rho_lower to its (b - b')^T b / ||c|| bound.
template <LinearOperator Op>
MinNormResult ta_min_norm(const Op& a, std::span<const double> b, double eps, std::span<const double> x_eps,
                          const TaOptions& inner = {}) {
  require(b.size() == a.rows() && x_eps.size() == a.cols(), "ta_min_norm: dimension mismatch");
  require(eps > 0.0, "ta_min_norm: eps must be positive");
  const double start_res = norm2(residual(a, x_eps, b));
  require(start_res <= eps, "ta_min_norm: x_eps must satisfy ||A x_eps - b|| <= eps");

  const Stopwatch clock;
  MinNormResult out;
  out.x.assign(x_eps.begin(), x_eps.end());
  out.rho_upper = norm2(x_eps);
  out.rho_lower = 0.0;
  const double c_floor = 1e-14 * a.frobenius_norm() * norm2(b);
  std::optional<Vector> warm;

  TaOptions opts = inner;
  opts.epsilon = eps;
  opts.epsilon_prime = std::max(c_floor, std::numeric_limits<double>::min());

  auto finish = [&](Status s) {
    out.status = s;
    out.rho_upper = std::min(out.rho_upper, norm2(out.x));
    out.rho_lower = std::min(out.rho_lower, out.rho_upper);
    const Vector r = residual(a, out.x, b);
    out.residual_norm = norm2(r);
    out.normal_residual_norm = norm2(matvec_transpose(a, r));
    return out;
  };

  while (out.rho_upper - out.rho_lower > eps) {
    const double rho = 0.5 * (out.rho_upper + out.rho_lower);
    std::optional<Vector> x0 = warm ? warm : std::optional<Vector>(Vector(a.cols(), 0.0));
    TaResult r = ta_detail::run(a, b, rho, false, rho, std::move(x0), opts, c_floor);
    ++out.outer_iterations;
    out.inner_iterations += r.iterations;
    if (opts.record_trace) {
      for (auto& row : r.trace) out.trace.push_back(row);
    }
    if (r.status == Status::ApproxSolution) {
      out.rho_upper = rho;
      out.x = std::move(r.x);
      if (opts.record_trace)
        out.trace.push_back({out.inner_iterations, rho, r.gap_norm, r.normal_gap_norm, TaEvent::Shrink,
                             clock.elapsed_ns()});
    } else if (r.status == Status::Witness) {
      out.rho_lower = std::max(out.rho_lower, std::min(r.lower_bound, out.rho_upper));
      warm = std::move(r.x);
      if (opts.record_trace)
        out.trace.push_back({out.inner_iterations, out.rho_lower, r.gap_norm, r.normal_gap_norm, TaEvent::Expand,
                             clock.elapsed_ns()});
    } else if (r.status == Status::NormalEqSolution) {
      out.x = std::move(r.x);
      return finish(Status::NormalEqSolution);
    } else {
      return finish(r.status);
    }
  }
  return finish(Status::MinNormSolution);
}

} // namespace tsolve
