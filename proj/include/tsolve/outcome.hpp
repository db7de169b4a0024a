#pragma once

#include <string_view>

namespace tsolve {

enum class Status {
  ApproxSolution,      ///< ||b - Ax|| <= eps
  NormalEqSolution,    ///< ||A^T(b - Ax)|| (or r^T H r) below tolerance
  Witness,             ///< b outside E_{A,rho}; carries a lower bound on ||x*||
  MinNormSolution,     ///< eps-approximate minimum-norm solution with certified bracket
  Feasible,            ///< LP feasibility: Ax ~ b with x >= 0
  Inconclusive,        ///< LP feasibility: radius cap reached without a decision
  IterationCapReached,
  NumericalFailure,    ///< NaN/Inf appeared in the iteration
  Stagnated            ///< no order of the step decreased the residual, even after a refresh
};

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::ApproxSolution: return "approx_solution";
    case Status::NormalEqSolution: return "normal_eq_solution";
    case Status::Witness: return "witness";
    case Status::MinNormSolution: return "min_norm_solution";
    case Status::Feasible: return "feasible";
    case Status::Inconclusive: return "inconclusive";
    case Status::IterationCapReached: return "iteration_cap_reached";
    case Status::NumericalFailure: return "numerical_failure";
    case Status::Stagnated: return "stagnated";
  }
  return "unknown";
}

/// Process exit status for the CLI. 1 is reserved for usage errors.
inline int exit_code(Status s) {
  switch (s) {
    case Status::ApproxSolution:
    case Status::NormalEqSolution:
    case Status::MinNormSolution:
    case Status::Feasible:
      return 0;
    case Status::Witness:
    case Status::Inconclusive:
      return 2;
    case Status::IterationCapReached:
    case Status::NumericalFailure:
    case Status::Stagnated:
      return 3;
  }
  return 3;
}

} // namespace tsolve
