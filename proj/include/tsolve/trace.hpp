#pragma once

/// @file trace.hpp
/// @brief Per-iteration trace rows and their CSV rendering.
///
/// Numbers are written in shortest round-trip form, so traces from two
/// identical runs are byte-identical apart from the wall_ns column.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tsolve {

/// Shortest decimal that parses back to the same double. NaN renders as an
/// empty field.
inline std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t elapsed_ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_)
        .count();
  }
  double elapsed_ms() const { return static_cast<double>(elapsed_ns()) * 1e-6; }

private:
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// CTA
// ---------------------------------------------------------------------------

/// One row per loop pass, recorded before the step. `t` is the order about to
/// be applied; the terminal row has t = 0.
struct CtaTraceRow {
  std::size_t iter = 0;
  std::size_t t = 0;
  double residual_norm = 0.0;
  double normal_residual_norm = 0.0;
  std::int64_t wall_ns = 0;
};

inline void write_cta_trace(std::ostream& os, const std::vector<CtaTraceRow>& rows) {
  os << "iter,t,residual_norm,normal_residual_norm,wall_ns\n";
  for (const auto& r : rows)
    os << r.iter << ',' << r.t << ',' << format_double(r.residual_norm) << ','
       << format_double(r.normal_residual_norm) << ',' << r.wall_ns << '\n';
}

// ---------------------------------------------------------------------------
// TA and LP feasibility
// ---------------------------------------------------------------------------

enum class TaEvent {
  Pivot,    ///< strict pivot found, step taken
  Witness,  ///< no strict pivot at the current radius
  Shrink,   ///< step toward the origin (LP, c+ = 0) or upper radius lowered (bisection)
  Expand    ///< radius raised
};

inline std::string_view to_string(TaEvent e) {
  switch (e) {
    case TaEvent::Pivot: return "pivot";
    case TaEvent::Witness: return "witness";
    case TaEvent::Shrink: return "shrink";
    case TaEvent::Expand: return "expand";
  }
  return "pivot";
}

struct TaTraceRow {
  std::size_t iter = 0;
  double rho = 0.0;
  double gap_norm = 0.0;
  double normal_gap_norm = 0.0;
  TaEvent event = TaEvent::Pivot;
  std::int64_t wall_ns = 0;
  double min_x_entry = NAN;  ///< LP feasibility only
};

/// `with_min_x` adds the LP column.
inline void write_ta_trace(std::ostream& os, const std::vector<TaTraceRow>& rows, bool with_min_x = false) {
  os << "iter,rho,gap_norm,normal_gap_norm,event,wall_ns";
  if (with_min_x) os << ",min_x_entry";
  os << '\n';
  for (const auto& r : rows) {
    os << r.iter << ',' << format_double(r.rho) << ',' << format_double(r.gap_norm) << ','
       << format_double(r.normal_gap_norm) << ',' << to_string(r.event) << ',' << r.wall_ns;
    if (with_min_x) os << ',' << format_double(r.min_x_entry);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Hybrid
// ---------------------------------------------------------------------------

struct HybridTraceRow {
  int stage = 1;
  std::size_t iter = 0;
  std::size_t t = 0;            ///< stage 1 only
  double rho = NAN;             ///< stage 2 only
  double residual_norm = NAN;   ///< empty when stage 2 runs on the normal-equation pair
  double normal_residual_norm = NAN;
  std::string event;
  std::int64_t wall_ns = 0;
};

inline void write_hybrid_trace(std::ostream& os, const std::vector<HybridTraceRow>& rows) {
  os << "stage,iter,t,rho,residual_norm,normal_residual_norm,event,wall_ns\n";
  for (const auto& r : rows)
    os << r.stage << ',' << r.iter << ',' << r.t << ',' << format_double(r.rho) << ','
       << format_double(r.residual_norm) << ',' << format_double(r.normal_residual_norm) << ','
       << r.event << ',' << r.wall_ns << '\n';
}

} // namespace tsolve
