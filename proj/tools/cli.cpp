#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsolve/tsolve.hpp"

namespace tsolve::cli {
namespace {

using json = nlohmann::ordered_json;

struct Problem {
  Matrix a;
  Vector b;
  std::string family;  // empty for --mtx input
};

Problem load_problem(const std::string& mtx, const std::string& gen, std::uint64_t seed) {
  Problem p;
  if (!mtx.empty()) {
    p.a = read_matrix_market_file(mtx);
  } else {
    const GeneratorSpec spec = parse_generator_spec(gen, seed);
    p.a = generate(spec);
    p.family = family_name(spec.family);
  }
  p.a = with_kernel_for_size(std::move(p.a));
  p.b = row_sum_rhs(p.a);
  return p;
}

struct SolveConfig {
  std::string algo = "cta";
  double eps = 1e-10;
  std::optional<double> eps_prime;
  std::optional<double> eps_quad;
  double eps_ta = 1e-15;
  bool relative = false;
  std::size_t t_max = 5;
  std::optional<std::size_t> max_iters;
  std::string h_mode = "aat";
  std::optional<double> rho_max;
  bool min_norm = false;
  bool enhanced = false;
  bool record_trace = true;
};

struct RunOutcome {
  Status status = Status::IterationCapReached;
  std::size_t iterations = 0;
  double residual = 0.0;
  double normal_residual = 0.0;
  std::optional<double> rho;
  std::optional<double> rho_lower;
  double wall_ms = 0.0;
  double eps_abs = 0.0;
  Vector x;
  std::string trace_csv;
};

RunOutcome execute(const Problem& p, const SolveConfig& cfg) {
  const double nb = norm2(p.b);
  const double scale = cfg.relative ? nb : 1.0;
  const double eps = cfg.eps * scale;
  const double eps_prime = cfg.eps_prime.value_or(cfg.eps) * scale;
  const HMode mode = cfg.h_mode == "a" ? HMode::SymmetricA : HMode::GramAAT;

  RunOutcome out;
  out.eps_abs = eps;
  std::ostringstream trace;
  const Stopwatch clock;

  if (cfg.algo == "cta") {
    CtaOptions o;
    o.epsilon = eps;
    o.quadratic_epsilon = cfg.eps_quad ? std::optional<double>(*cfg.eps_quad * scale * scale) : std::optional<double>(0.0);
    o.t_max = std::min(cfg.t_max, p.a.rows());
    o.h_mode = mode;
    o.enhanced = cfg.enhanced;
    o.max_iters = cfg.max_iters.value_or(100000);
    o.record_trace = cfg.record_trace;
    CtaResult r = cta_solve(p.a, p.b, o);
    out.status = r.status;
    out.iterations = r.iterations;
    out.x = std::move(r.x);
    if (cfg.record_trace) write_cta_trace(trace, r.trace);
  } else if (cfg.algo == "ta") {
    TaOptions o;
    o.epsilon = eps;
    o.epsilon_prime = eps_prime;
    o.max_iters = cfg.max_iters.value_or(1000000);
    o.record_trace = cfg.record_trace;
    TaResult r = ta_adaptive(p.a, p.b, o);
    out.status = r.status;
    out.iterations = r.iterations;
    out.rho = r.rho;
    std::vector<TaTraceRow> rows = std::move(r.trace);
    out.x = std::move(r.x);
    if (cfg.min_norm && r.status == Status::ApproxSolution) {
      MinNormResult mn = ta_min_norm(p.a, p.b, eps, out.x, o);
      out.status = mn.status;
      out.iterations += mn.inner_iterations;
      out.rho = mn.rho_upper;
      out.rho_lower = mn.rho_lower;
      out.x = std::move(mn.x);
      rows.insert(rows.end(), mn.trace.begin(), mn.trace.end());
    }
    if (cfg.record_trace) write_ta_trace(trace, rows);
  } else if (cfg.algo == "hybrid") {
    HybridOptions o;
    o.eps_cta = eps;
    o.eps_ta = cfg.eps_ta * scale;
    o.want_min_norm = cfg.min_norm;
    o.t_max = cfg.t_max;
    o.h_mode = mode;
    o.cta_quadratic_epsilon = cfg.eps_quad ? std::optional<double>(*cfg.eps_quad * scale * scale) : std::optional<double>(0.0);
    if (cfg.max_iters) o.cta_max_iters = o.ta_max_iters = *cfg.max_iters;
    o.record_trace = cfg.record_trace;
    HybridResult r = hybrid_solve(p.a, p.b, o);
    out.status = r.status;
    out.iterations = r.iterations;
    if (!std::isnan(r.rho_final)) out.rho = r.rho_final;
    if (!std::isnan(r.rho_lower)) out.rho_lower = r.rho_lower;
    out.x = std::move(r.x);
    if (cfg.record_trace) write_hybrid_trace(trace, r.trace);
  } else {
    LpOptions o;
    o.epsilon = eps;
    o.rho_max = cfg.rho_max;
    o.max_iters = cfg.max_iters.value_or(1000000);
    o.record_trace = cfg.record_trace;
    LpResult r = lp_feasibility(p.a, p.b, o);
    out.status = r.status;
    out.iterations = r.iterations;
    out.rho = r.rho;
    out.x = std::move(r.x);
    if (cfg.record_trace) write_ta_trace(trace, r.trace, true);
  }
  out.wall_ms = clock.elapsed_ms();
  const Vector res = residual(p.a, out.x, p.b);
  out.residual = norm2(res);
  out.normal_residual = norm2(matvec_transpose(p.a, res));
  out.trace_csv = trace.str();
  return out;
}

json summary_json(const Problem& p, const SolveConfig& cfg, const RunOutcome& r) {
  json j;
  j["outcome"] = std::string(to_string(r.status));
  j["iterations"] = r.iterations;
  j["final_residual_norm"] = r.residual;
  j["final_normal_residual_norm"] = r.normal_residual;
  if (r.rho) j["rho_final"] = *r.rho;
  if (r.rho_lower) j["rho_lower"] = *r.rho_lower;
  j["wall_ms"] = r.wall_ms;
  json m;
  m["m"] = p.a.rows();
  m["n"] = p.a.cols();
  m["nnz"] = p.a.nnz();
  if (!p.family.empty()) m["family"] = p.family;
  j["matrix"] = m;
  j["algorithm"] = cfg.algo;
  j["epsilon"] = r.eps_abs;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::string vector_text(const Vector& x) {
  std::string s;
  for (double v : x) {
    s += format_double(v);
    s += '\n';
  }
  return s;
}

void add_solver_flags(CLI::App* cmd, SolveConfig& cfg) {
  cmd->add_option("--algo", cfg.algo, "Solver")->check(CLI::IsMember({"cta", "ta", "hybrid", "lpfeas"}));
  cmd->add_option("--eps", cfg.eps, "Residual tolerance (absolute unless --relative)")
      ->check(CLI::Range(0.0, 1.0))
      ->check([](const std::string& s) { return std::stod(s) > 0.0 ? std::string() : "must be positive"; });
  cmd->add_option("--eps-prime", cfg.eps_prime, "TA normal-equation tolerance (default: --eps)")
      ->check(CLI::Range(0.0, 1.0))
      ->check([](const std::string& s) { return std::stod(s) > 0.0 ? std::string() : "must be positive"; });
  cmd->add_option("--eps-quad", cfg.eps_quad, "CTA r^T H r stopping tolerance (default: clause off)")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--eps-ta", cfg.eps_ta, "Hybrid second-stage tolerance")
      ->check(CLI::Range(0.0, 1.0))
      ->check([](const std::string& s) { return std::stod(s) > 0.0 ? std::string() : "must be positive"; });
  cmd->add_flag("--relative", cfg.relative, "Scale tolerances by ||b||");
  cmd->add_option("--t-max", cfg.t_max, "Maximum CTA order")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--h-mode", cfg.h_mode, "H = A (a) or A A^T (aat)")->check(CLI::IsMember({"a", "aat"}));
  cmd->add_option("--rho-max", cfg.rho_max, "LP feasibility radius cap")->check(CLI::PositiveNumber);
  cmd->add_flag("--min-norm", cfg.min_norm, "TA/hybrid: finish with minimum-norm bisection");
  cmd->add_flag("--enhanced", cfg.enhanced, "CTA: enable the x-hat normal-equation check");
}

std::size_t worker_count() {
  const char* env = std::getenv("TSOLVE_WORKERS");
  if (!env) return 1;
  try {
    const long v = std::stol(env);
    return v >= 1 ? static_cast<std::size_t>(v) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Triangle Algorithm and Centering Triangle Algorithm linear-system solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tsolve 0.1.0");

  // solve
  SolveConfig cfg;
  std::string mtx, gen, trace_path, summary_path, dump_x;
  std::uint64_t seed = 1;
  auto* solve = app.add_subcommand("solve", "Solve A x = b with b the row sums of A");
  auto* src = solve->add_option_group("source");
  src->add_option("--mtx", mtx, "Matrix Market file")->check(CLI::ExistingFile);
  src->add_option("--gen", gen, "Generator FAMILY:N[:PARAMS]");
  src->require_option(1);
  solve->add_option("--seed", seed, "Generator seed");
  add_solver_flags(solve, cfg);
  solve->add_option("--trace", trace_path, "Write the per-iteration trace CSV here");
  solve->add_option("--summary", summary_path, "Write the summary JSON here (default: stdout)");
  solve->add_option("--dump-x", dump_x, "Write the solution vector here, one value per line");

  // generate
  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 1;
  auto* generate_cmd = app.add_subcommand("generate", "Write a generated matrix in Matrix Market format");
  generate_cmd->add_option("--gen", gen_spec, "Generator FAMILY:N[:PARAMS]")->required();
  generate_cmd->add_option("--out", gen_out, "Output .mtx path")->required();
  generate_cmd->add_option("--seed", gen_seed, "Generator seed");

  // bench
  std::vector<std::string> bench_gens;
  std::vector<std::string> bench_algos{"cta"};
  std::size_t trials = 5;
  std::string bench_out;
  std::uint64_t bench_seed = 1;
  SolveConfig bench_cfg;
  auto* bench = app.add_subcommand("bench", "Run a suite of generated problems and print a CSV table");
  bench->add_option("--gen", bench_gens, "Generator FAMILY:N[:PARAMS] (repeatable)")->required();
  bench->add_option("--algo", bench_algos, "Solvers to run (repeatable)")
      ->check(CLI::IsMember({"cta", "ta", "hybrid", "lpfeas"}));
  bench->add_option("--trials", trials, "Timed repetitions per problem (median reported)")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Write the CSV here (default: stdout)");
  bench->add_option("--seed", bench_seed, "Generator seed");
  bench->add_option("--eps", bench_cfg.eps, "Residual tolerance")->check(CLI::Range(0.0, 1.0));
  bench->add_flag("--relative", bench_cfg.relative, "Scale tolerances by ||b||");
  bench->add_option("--t-max", bench_cfg.t_max, "Maximum CTA order")->check(CLI::PositiveNumber);
  bench->add_option("--max-iters", bench_cfg.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  bench->add_option("--h-mode", bench_cfg.h_mode, "H = A (a) or A A^T (aat)")->check(CLI::IsMember({"a", "aat"}));

  // dynamics
  std::vector<double> lambda{1.0, 3.0};
  std::size_t steps = 30, starts = 16;
  std::string svg_path = "portrait.svg", csv_path = "orbits.csv";
  auto* dyn = app.add_subcommand("dynamics", "Phase portrait of F1 orbits for H = diag(l1, l2)");
  dyn->add_option("--lambda", lambda, "Two positive eigenvalues, e.g. 1,3")->delimiter(',')->expected(2);
  dyn->add_option("--steps", steps, "F1 steps per orbit");
  dyn->add_option("--starts", starts, "Starting points on the unit circle")->check(CLI::PositiveNumber);
  dyn->add_option("--svg", svg_path, "SVG output path");
  dyn->add_option("--csv", csv_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) {
      const Problem p = load_problem(mtx, gen, seed);
      const RunOutcome r = execute(p, cfg);
      const json j = summary_json(p, cfg, r);
      if (summary_path.empty())
        out << j.dump(2) << '\n';
      else
        write_text(summary_path, j.dump(2) + "\n");
      if (!trace_path.empty()) write_text(trace_path, r.trace_csv);
      if (!dump_x.empty()) write_text(dump_x, vector_text(r.x));
      return exit_code(r.status);
    }

    if (generate_cmd->parsed()) {
      const GeneratorSpec spec = parse_generator_spec(gen_spec, gen_seed);
      const Matrix a = generate(spec);
      write_matrix_market_file(a, gen_out);
      out << family_name(spec.family) << ": " << a.rows() << " x " << a.cols() << ", nnz " << a.nnz() << " -> "
          << gen_out << '\n';
      return 0;
    }

    if (bench->parsed()) {
      struct Job {
        std::string gen, algo;
      };
      std::vector<Job> jobs;
      for (const auto& g : bench_gens)
        for (const auto& a : bench_algos) jobs.push_back({g, a});
      std::vector<std::string> rows(jobs.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
          const Job& job = jobs[k];
          std::ostringstream row;
          try {
            const Problem p = load_problem("", job.gen, bench_seed);
            SolveConfig c = bench_cfg;
            c.algo = job.algo;
            c.record_trace = false;
            std::vector<double> walls;
            RunOutcome first;
            for (std::size_t t = 0; t < trials; ++t) {
              RunOutcome r = execute(p, c);
              walls.push_back(r.wall_ms);
              if (t == 0) first = std::move(r);
            }
            std::sort(walls.begin(), walls.end());
            const double median = walls.size() % 2 ? walls[walls.size() / 2]
                                                   : 0.5 * (walls[walls.size() / 2 - 1] + walls[walls.size() / 2]);
            row << p.family << ',' << p.a.cols() << ',' << job.algo << ',' << first.iterations << ','
                << format_double(median) << ',' << format_double(first.residual) << ','
                << format_double(first.normal_residual) << ',' << to_string(first.status);
          } catch (const std::exception& e) {
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), ',', ';');
            row << job.gen.substr(0, job.gen.find(':')) << ",," << job.algo << ",,,,,error: " << msg;
          }
          rows[k] = row.str();
        }
      };
      const std::size_t nworkers = std::min(worker_count(), std::max<std::size_t>(jobs.size(), 1));
      std::vector<std::thread> pool;
      for (std::size_t w = 1; w < nworkers; ++w) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      std::ostringstream csv;
      csv << "family,n,algo,iterations,wall_ms,residual,normal_residual,outcome\n";
      for (const auto& r : rows) csv << r << '\n';
      if (bench_out.empty())
        out << csv.str();
      else
        write_text(bench_out, csv.str());
      return 0;
    }

    if (dyn->parsed()) {
      if (lambda.size() != 2 || !(lambda[0] > 0.0) || !(lambda[1] > 0.0)) {
        err << "dynamics: --lambda needs two positive values\n";
        return 1;
      }
      DenseMatrix h(2, 2);
      h(0, 0) = lambda[0];
      h(1, 1) = lambda[1];
      const PhasePortrait p = phase_portrait(h, starts, steps);
      std::ostringstream svg, csv;
      write_portrait_svg(p, svg);
      write_portrait_csv(p, csv);
      write_text(svg_path, svg.str());
      write_text(csv_path, csv.str());
      out << "wrote " << svg_path << " and " << csv_path << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

} // namespace tsolve::cli
