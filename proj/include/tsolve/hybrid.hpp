#pragma once

/// @file hybrid.hpp
/// @brief CTA to a first tolerance, then the Triangle Algorithm: minimum-norm
/// bisection or adaptive TA on (A, b) when stage 1 found an approximate
/// solution, adaptive TA on the normal-equation pair (A^T A, A^T b) otherwise.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cta.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "outcome.hpp"
#include "ta.hpp"
#include "trace.hpp"

namespace tsolve {

struct HybridOptions {
  double eps_cta = 1e-8;
  double eps_ta = 1e-15;
  bool want_min_norm = false;
  std::size_t t_max = 5;
  HMode h_mode = HMode::GramAAT;
  std::size_t cta_max_iters = 100000;
  std::size_t ta_max_iters = 200000;
  /// r^T H r clause of stage 1; unset means eps_cta, 0 disables it.
  std::optional<double> cta_quadratic_epsilon;
  bool record_trace = true;
};

enum class HybridStage2 { None, MinNorm, AdaptiveOnA, AdaptiveOnNormal };

struct HybridResult {
  Status status = Status::IterationCapReached;
  Vector x;
  std::size_t iterations = 0;  ///< stage 1 plus stage 2
  double residual_norm = 0.0;
  double normal_residual_norm = 0.0;
  double rho_final = NAN;
  double rho_lower = NAN;     ///< min-norm stage only
  Status stage1_status = Status::IterationCapReached;
  Status stage2_status = Status::IterationCapReached;
  HybridStage2 stage2 = HybridStage2::None;
  std::size_t stage1_iterations = 0;
  double stage1_residual_norm = 0.0;
  double stage1_normal_residual_norm = 0.0;
  double stage2_initial_gap = NAN;  ///< first gap the TA stage saw
  std::vector<HybridTraceRow> trace;
};

template <LinearOperator Op>
HybridResult hybrid_solve(const Op& a, std::span<const double> b, const HybridOptions& opts = {}) {
  require(b.size() == a.rows(), "hybrid_solve: b length must equal A row count");
  require(opts.eps_cta > 0.0 && opts.eps_ta > 0.0, "hybrid_solve: tolerances must be positive");

  HybridResult out;
  if (norm2(b) == 0.0) {
    out.status = Status::ApproxSolution;
    out.stage1_status = Status::ApproxSolution;
    out.x.assign(a.cols(), 0.0);
    return out;
  }

  CtaOptions co;
  co.epsilon = opts.eps_cta;
  co.quadratic_epsilon = opts.cta_quadratic_epsilon;
  co.t_max = std::min(opts.t_max, a.rows());
  co.h_mode = opts.h_mode;
  co.max_iters = opts.cta_max_iters;
  co.record_trace = opts.record_trace;
  CtaResult s1 = cta_solve(a, b, co);

  out.stage1_status = s1.status;
  out.stage1_iterations = s1.iterations;
  out.stage1_residual_norm = s1.residual_norm;
  out.stage1_normal_residual_norm = s1.normal_residual_norm;
  for (const auto& row : s1.trace)
    out.trace.push_back({1, row.iter, row.t, NAN, row.residual_norm, row.normal_residual_norm, "cta", row.wall_ns});

  auto take_stage1 = [&] {
    out.x = s1.x;
    out.residual_norm = s1.residual_norm;
    out.normal_residual_norm = s1.normal_residual_norm;
  };
  auto adopt = [&](const Vector& x) {
    const Vector r = residual(a, x, b);
    const double rn = norm2(r);
    const double nrn = norm2(matvec_transpose(a, r));
    out.x = x;
    out.residual_norm = rn;
    out.normal_residual_norm = nrn;
  };
  auto ta_rows = [&](const std::vector<TaTraceRow>& rows, bool normal_pair) {
    const std::size_t base = s1.iterations;
    for (const auto& row : rows) {
      HybridTraceRow h{2, base + row.iter, 0, row.rho, NAN, NAN, std::string(to_string(row.event)), row.wall_ns};
      if (normal_pair) {
        h.normal_residual_norm = row.gap_norm;
      } else {
        h.residual_norm = row.gap_norm;
        h.normal_residual_norm = row.normal_gap_norm;
      }
      out.trace.push_back(std::move(h));
    }
    if (!rows.empty()) out.stage2_initial_gap = rows.front().gap_norm;
  };

  TaOptions to;
  to.epsilon = opts.eps_ta;
  to.max_iters = opts.ta_max_iters;
  to.record_trace = opts.record_trace;

  if (s1.status == Status::ApproxSolution && opts.want_min_norm) {
    out.stage2 = HybridStage2::MinNorm;
    const double eps = std::max(opts.eps_ta, s1.residual_norm);
    MinNormResult mn = ta_min_norm(a, b, eps, s1.x, to);
    ta_rows(mn.trace, false);
    out.stage2_status = mn.status;
    out.iterations = s1.iterations + mn.inner_iterations;
    out.rho_final = mn.rho_upper;
    out.rho_lower = mn.rho_lower;
    out.status = mn.status;
    adopt(mn.x);
    if (mn.status != Status::MinNormSolution && mn.status != Status::NormalEqSolution) {
      // bisection did not finish: stage 1 is still an approximate solution
      take_stage1();
      out.status = Status::ApproxSolution;
    }
    return out;
  }

  if (s1.status == Status::ApproxSolution) {
    out.stage2 = HybridStage2::AdaptiveOnA;
    TaResult t2 = ta_adaptive(a, b, to, std::nullopt, s1.x, norm2(s1.x));
    ta_rows(t2.trace, false);
    out.stage2_status = t2.status;
    out.iterations = s1.iterations + t2.iterations;
    out.rho_final = t2.rho;
    adopt(t2.x);
    out.status = t2.status;
    if (out.residual_norm > s1.residual_norm) {
      take_stage1();
      out.status = Status::ApproxSolution;
    }
    if (out.status != Status::ApproxSolution && out.residual_norm <= opts.eps_cta) out.status = Status::ApproxSolution;
    return out;
  }

  out.stage2 = HybridStage2::AdaptiveOnNormal;
  const NormalOperator<Op> ata(a);
  const Vector atb = matvec_transpose(a, b);
  TaResult t2 = ta_adaptive(ata, std::span<const double>(atb), to, std::nullopt, s1.x, norm2(s1.x));
  ta_rows(t2.trace, true);
  out.stage2_status = t2.status;
  out.iterations = s1.iterations + t2.iterations;
  out.rho_final = t2.rho;
  adopt(t2.x);
  if (out.normal_residual_norm > s1.normal_residual_norm) take_stage1();
  // on the normal pair, an approximate solution is a normal-equation solution of A x = b
  if (out.residual_norm <= opts.eps_ta)
    out.status = Status::ApproxSolution;
  else if (out.normal_residual_norm <= opts.eps_ta || t2.status == Status::ApproxSolution ||
           t2.status == Status::NormalEqSolution || s1.status == Status::NormalEqSolution)
    out.status = Status::NormalEqSolution;
  else
    out.status = t2.status;
  return out;
}

} // namespace tsolve
