#pragma once

/// @file lpfeas.hpp
/// @brief Feasibility of {x : Ax = b, x >= 0} by the adaptive Triangle
/// Algorithm with the pivot direction restricted to c+ = max(c, 0).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "outcome.hpp"
#include "ta.hpp"
#include "trace.hpp"

namespace tsolve {

inline Vector project_nonneg(std::span<const double> c) {
  Vector out(c.begin(), c.end());
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

/// v = rho A c+ / ||c+|| with preimage rho c+ / ||c+|| (nonnegative).
template <LinearOperator Op>
Pivot lp_pivot(const Op& a, std::span<const double> c_plus, double rho) {
  require(c_plus.size() == a.cols(), "lp_pivot: c+ must have length n");
  require(rho > 0.0, "lp_pivot: rho must be positive");
  const double cn = norm2(c_plus);
  require(cn > 0.0, "lp_pivot: c+ = 0, no ascent direction in the nonnegative orthant");
  Pivot p;
  p.preimage = scaled(rho / cn, c_plus);
  p.v = matvec(a, p.preimage);
  return p;
}

struct LpOptions {
  double epsilon = 1e-8;
  std::optional<double> rho_max;  ///< default: 10 n max(1, ||b|| / (||A||_F / sqrt(m)))
  std::size_t max_iters = 1000000;
  std::size_t recheck_every = 1000;
  bool record_trace = true;
};

struct LpResult {
  Status status = Status::Inconclusive;  ///< Feasible, Witness, Inconclusive or NumericalFailure
  Vector x;
  double rho = 0.0;
  double rho_max = 0.0;
  double lower_bound = NAN;
  /// c+ = 0 with (b - b')^T b > 0: y = b - b' satisfies A^T y <= 0 and
  /// y^T b > 0, which certifies that no x >= 0 solves Ax = b.
  bool farkas_certificate = false;
  Vector y;  ///< b - b' at exit
  std::size_t iterations = 0;
  double gap_norm = 0.0;
  double normal_gap_norm = 0.0;
  std::vector<TaTraceRow> trace;
};

template <LinearOperator Op>
double default_rho_max(const Op& a, std::span<const double> b) {
  const double m = static_cast<double>(a.rows());
  const double n = static_cast<double>(a.cols());
  const double sigma = a.frobenius_norm() / std::sqrt(m);
  const double ratio = sigma > 0.0 ? norm2(b) / sigma : 1.0;
  return 10.0 * n * std::max(1.0, ratio);
}

template <LinearOperator Op>
LpResult lp_feasibility(const Op& a, std::span<const double> b, const LpOptions& opts = {}) {
  require(b.size() == a.rows(), "lp_feasibility: b length must equal A row count");
  require(norm2(b) > 0.0, "lp_feasibility: b must be nonzero");
  require(opts.epsilon > 0.0, "lp_feasibility: epsilon must be positive");
  const double rho_max = opts.rho_max.value_or(default_rho_max(a, b));
  require(rho_max > 0.0, "lp_feasibility: rho_max must be positive");

  const Stopwatch clock;
  LpResult res;
  res.rho_max = rho_max;
  Vector x(a.cols(), 0.0);
  Vector bp(a.rows(), 0.0);
  double rho = 0.0;
  bool fresh = true;  // bp was just recomputed as A x
  std::size_t iter = 0;

  auto min_entry = [&] { return x.empty() ? 0.0 : *std::min_element(x.begin(), x.end()); };
  auto record = [&](double g, double ng, TaEvent e) {
    if (opts.record_trace) res.trace.push_back({iter, rho, g, ng, e, clock.elapsed_ns(), min_entry()});
  };
  auto done = [&](Status s, const Vector& gap, double g, double ng) {
    res.status = s;
    res.x = std::move(x);
    res.y = gap;
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
    const Vector cp = project_nonneg(c);
    const double cpn = norm2(cp);
    if (!std::isfinite(g) || !std::isfinite(cpn)) return done(Status::NumericalFailure, gap, g, cpn);
    if (g <= opts.epsilon) {
      if (!fresh) {
        bp = matvec(a, x);
        fresh = true;
        continue;
      }
      record(g, cpn, TaEvent::Pivot);
      return done(Status::Feasible, gap, g, cpn);
    }
    if (iter >= opts.max_iters) {
      record(g, cpn, TaEvent::Pivot);
      return done(Status::Inconclusive, gap, g, cpn);
    }
    const double gb = dot(gap, b);

    Vector v, pre;
    TaEvent event = TaEvent::Pivot;
    if (cpn == 0.0) {
      if (gb > 0.0) {
        record(g, cpn, TaEvent::Witness);
        res.farkas_certificate = true;
        return done(Status::Witness, gap, g, cpn);
      }
      // the origin is a strict pivot
      v.assign(a.rows(), 0.0);
      pre.assign(a.cols(), 0.0);
      event = TaEvent::Shrink;
    } else if (!(rho * cpn >= gb)) {
      const double bound = gb / cpn;
      const double next = std::max(2.0 * rho, bound);
      if (next > rho_max) {
        record(g, cpn, TaEvent::Witness);
        res.lower_bound = bound;
        return done(Status::Inconclusive, gap, g, cpn);
      }
      rho = next;
      record(g, cpn, TaEvent::Expand);
      ++iter;
      continue;
    } else {
      pre = scaled(rho / cpn, cp);
      v = matvec(a, pre);
    }
    record(g, cpn, event);
    const Vector d = subtract(v, bp);
    if (dot(d, d) == 0.0) return done(Status::Inconclusive, gap, g, cpn);
    TaStep s = ta_step(bp, x, v, pre, b);
    if (s.alpha == 0.0) return done(Status::Inconclusive, gap, g, cpn);
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

} // namespace tsolve
