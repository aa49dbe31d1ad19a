// Command-line front end: ingest Matrix Market instances, precondition or
// solve them, benchmark across seeds, and emit versioned JSON reports.

#include "lad/lad.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string matrix_path;
  std::string rhs_path;
  std::string out = "-";
  double eps = 0.25;
  std::string method = "accelerated";
  std::string mode = "lewis";
  double c_sample = 4.0;
  std::uint64_t seed = 0;
  int max_lewis_iters = 30;
  double lewis_tol = 1e-4;
  bool oracle = false;
  bool trace = false;
  std::string x_out;
};

void add_io_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--matrix", o.matrix_path, "Matrix Market file (array or coordinate)")->required();
  cmd->add_option("--rhs", o.rhs_path, "right-hand side (one value per line, or one-column array)")->required();
  cmd->add_option("--out", o.out, "report path, '-' for stdout")->envname("LAD_OUT");
}

void add_precondition_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--eps", o.eps, "target relative accuracy, in (0, 0.5]")->envname("LAD_EPS");
  cmd->add_option("--mode", o.mode, "row sampling mode: lewis | uniform")->envname("LAD_MODE");
  cmd->add_option("--c-sample", o.c_sample, "oversampling constant")->envname("LAD_C_SAMPLE");
  cmd->add_option("--seed", o.seed, "random seed")->envname("LAD_SEED");
  cmd->add_option("--max-lewis-iters", o.max_lewis_iters, "weight fixed-point iteration cap")
      ->envname("LAD_MAX_LEWIS_ITERS");
  cmd->add_option("--lewis-tol", o.lewis_tol, "weight fixed-point tolerance")->envname("LAD_LEWIS_TOL");
}

void add_solve_flags(CLI::App* cmd, CommonOpts& o) {
  add_precondition_flags(cmd, o);
  cmd->add_option("--method", o.method, "descent method: sgd | accelerated")->envname("LAD_METHOD");
  cmd->add_flag("--trace", o.trace, "record per-stage objective trace in the report");
  cmd->add_option("--x-out", o.x_out, "also write the solution vector to this path");
}

lad::Method parse_method(const std::string& s) {
  if (s == "sgd") return lad::Method::sgd;
  if (s == "accelerated") return lad::Method::accelerated;
  throw lad::Error(lad::ErrorCode::invalid_argument, "unknown method '" + s + "' (expected sgd | accelerated)");
}

lad::PreconditionMode parse_mode(const std::string& s) {
  if (s == "lewis") return lad::PreconditionMode::lewis;
  if (s == "uniform") return lad::PreconditionMode::uniform;
  throw lad::Error(lad::ErrorCode::invalid_argument, "unknown mode '" + s + "' (expected lewis | uniform)");
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 0.5))
    throw lad::Error(lad::ErrorCode::invalid_argument,
                     "--eps must lie in (0, 0.5], got " + std::to_string(eps));
}

lad::SolveConfig make_config(const CommonOpts& o) {
  lad::SolveConfig cfg;
  cfg.mode = parse_mode(o.mode);
  cfg.c_sample = o.c_sample;
  cfg.seed = o.seed;
  cfg.max_lewis_iters = o.max_lewis_iters;
  cfg.lewis_tol = o.lewis_tol;
  cfg.record_trace = o.trace;
  return cfg;
}

void emit(const json& j, const std::string& out) {
  if (out == "-") std::cout << j.dump(2) << "\n";
  else lad::write_json(out, j);
}

// Oracle comparisons are only offered where exhaustive search is feasible;
// beyond that the field is omitted rather than estimated.
bool oracle_feasible(lad::Index n, lad::Index d) { return n <= 30 && d <= 4; }

double oracle_gap(const lad::ProblemInstance& inst, const lad::SolveReport& rep) {
  lad::OracleResult best = inst.sparse ? lad::exact_l1_small(inst.A_sparse.to_dense(), inst.b)
                                       : lad::exact_l1_small(inst.A_dense, inst.b);
  if (best.f_star > 0.0) return (rep.objective_l1 - best.f_star) / best.f_star;
  return rep.objective_l1 - best.f_star;
}

lad::SolveReport solve_instance(const lad::ProblemInstance& inst, const CommonOpts& o) {
  check_eps(o.eps);
  const lad::Method method = parse_method(o.method);
  const lad::SolveConfig cfg = make_config(o);
  return inst.sparse ? lad::solve_l1(inst.A_sparse, inst.b, o.eps, method, cfg)
                     : lad::solve_l1(inst.A_dense, inst.b, o.eps, method, cfg);
}

int run_solve(const CommonOpts& o, bool require_oracle) {
  lad::ProblemInstance inst = lad::ingest(o.matrix_path, o.rhs_path);
  if (require_oracle && !oracle_feasible(inst.rows(), inst.cols()))
    throw lad::Error(lad::ErrorCode::instance_too_large,
                     "oracle-check needs n <= 30 and d <= 4, got n = " + std::to_string(inst.rows()) +
                         ", d = " + std::to_string(inst.cols()));

  lad::SolveReport rep = solve_instance(inst, o);

  std::optional<double> gap;
  const bool want_oracle = require_oracle || o.oracle;
  if (want_oracle && oracle_feasible(inst.rows(), inst.cols())) gap = oracle_gap(inst, rep);
  else if (want_oracle)
    std::cerr << "note: oracle comparison skipped (needs n <= 30 and d <= 4)\n";

  if (!o.x_out.empty()) lad::write_vector(o.x_out, rep.x_hat);
  emit(lad::report_to_json(rep, gap), o.out);
  return 0;
}

int run_precondition(const CommonOpts& o) {
  check_eps(o.eps);
  lad::ProblemInstance inst = lad::ingest(o.matrix_path, o.rhs_path);

  lad::PreconditionConfig cfg;
  cfg.eps = o.eps;
  cfg.c_sample = o.c_sample;
  cfg.seed = o.seed;
  cfg.mode = parse_mode(o.mode);
  cfg.max_lewis_iters = o.max_lewis_iters;
  cfg.lewis_tol = o.lewis_tol;

  auto summarize = [&](const lad::PreconditionedProblem& P) {
    json j;
    j["schema_version"] = "v1";
    j["command"] = "precondition";
    j["n"] = P.n_original;
    j["d"] = P.d;
    j["N"] = P.N;
    j["unique_rows"] = P.unique_rows();
    j["mode"] = lad::mode_name(P.mode);
    j["eps"] = P.eps_embed;
    j["seed"] = P.seed;
    j["irb_row_bound"] = P.irb_row_bound;
    j["sampled_gram_condition"] = P.sampled_gram_condition;
    j["sampling_attempts"] = P.sampling_attempts;
    return j;
  };

  lad::PreconditionedProblem P =
      inst.sparse ? (cfg.mode == lad::PreconditionMode::lewis ? lad::precondition_lewis(inst.A_sparse, inst.b, cfg)
                                                              : lad::precondition_uniform(inst.A_sparse, inst.b, cfg))
                  : (cfg.mode == lad::PreconditionMode::lewis ? lad::precondition_lewis(inst.A_dense, inst.b, cfg)
                                                              : lad::precondition_uniform(inst.A_dense, inst.b, cfg));
  emit(summarize(P), o.out);
  return 0;
}

struct GenOpts {
  std::string kind = "gaussian";
  long n = 0;
  long d = 0;
  std::uint64_t seed = 0;
  double noise_scale = 0.01;
  double outlier_fraction = 0.001;
  double outlier_scale = 100.0;
  double student_t_dof = 2.0;
  std::string matrix_out;
  std::string rhs_out;
  std::string solution_out;
  std::string out = "-";
};

int run_gen(const GenOpts& g) {
  lad::GenSpec spec;
  spec.kind = lad::kind_from_string(g.kind);
  spec.n = g.n;
  spec.d = g.d;
  spec.seed = g.seed;
  spec.noise_scale = g.noise_scale;
  spec.outlier_fraction = g.outlier_fraction;
  spec.outlier_scale = g.outlier_scale;
  spec.student_t_dof = g.student_t_dof;

  lad::ProblemInstance inst = lad::generate(spec);
  if (inst.sparse) lad::write_matrix_market(g.matrix_out, inst.A_sparse);
  else lad::write_matrix_market(g.matrix_out, inst.A_dense);
  lad::write_vector(g.rhs_out, inst.b);
  if (!g.solution_out.empty()) {
    if (inst.planted_solution.empty())
      throw lad::Error(lad::ErrorCode::invalid_argument,
                       "kind '" + g.kind + "' has no planted solution to write");
    lad::Vector z(static_cast<lad::Index>(inst.planted_solution.size()));
    for (lad::Index i = 0; i < z.size(); ++i) z[i] = inst.planted_solution[static_cast<std::size_t>(i)];
    lad::write_vector(g.solution_out, z);
  }

  json j;
  j["schema_version"] = "v1";
  j["command"] = "gen";
  j["kind"] = lad::kind_name(spec.kind);
  j["n"] = inst.rows();
  j["d"] = inst.cols();
  j["nnz"] = inst.nnz();
  j["seed"] = g.seed;
  j["sparse"] = inst.sparse;
  j["matrix"] = g.matrix_out;
  j["rhs"] = g.rhs_out;
  emit(j, g.out);
  return 0;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

json quantile_block(const std::vector<double>& v) {
  return {{"min", quantile(v, 0.0)},    {"p25", quantile(v, 0.25)}, {"median", quantile(v, 0.5)},
          {"p75", quantile(v, 0.75)},   {"max", quantile(v, 1.0)}};
}

int run_bench(const CommonOpts& o, int seeds) {
  if (seeds < 1) throw lad::Error(lad::ErrorCode::invalid_argument, "--seeds must be positive");
  lad::ProblemInstance inst = lad::ingest(o.matrix_path, o.rhs_path);

  json records = json::array();
  std::vector<double> objectives, evals, walls;
  for (int s = 0; s < seeds; ++s) {
    CommonOpts per = o;
    per.seed = o.seed + static_cast<std::uint64_t>(s);
    lad::SolveReport rep = solve_instance(inst, per);
    records.push_back({{"seed", rep.seed},
                       {"objective_l1", rep.objective_l1},
                       {"grad_evals", rep.grad_evals},
                       {"wall_ms", rep.wall_ms},
                       {"N", rep.N},
                       {"exact_fit", rep.exact_fit}});
    objectives.push_back(rep.objective_l1);
    evals.push_back(static_cast<double>(rep.grad_evals));
    walls.push_back(rep.wall_ms);
  }

  json j;
  j["schema_version"] = "v1";
  j["command"] = "bench";
  j["count"] = seeds;
  j["n"] = inst.rows();
  j["d"] = inst.cols();
  j["eps"] = o.eps;
  j["method"] = o.method;
  j["mode"] = o.mode;
  j["base_seed"] = o.seed;
  j["records"] = records;
  j["quantiles"] = {{"objective_l1", quantile_block(objectives)},
                    {"grad_evals", quantile_block(evals)},
                    {"wall_ms", quantile_block(walls)}};
  emit(j, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-preconditioned stochastic solver for least absolute deviations"};
  app.require_subcommand(1);

  CommonOpts solve_opts;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve min_x |Ax - b|_1 and write a JSON report");
  add_io_flags(solve_cmd, solve_opts);
  add_solve_flags(solve_cmd, solve_opts);
  solve_cmd->add_flag("--oracle", solve_opts.oracle,
                      "include the exact-optimum gap when the instance is small enough");

  CommonOpts pre_opts;
  CLI::App* pre_cmd = app.add_subcommand("precondition", "sample + rotate only; report sketch statistics");
  add_io_flags(pre_cmd, pre_opts);
  add_precondition_flags(pre_cmd, pre_opts);

  GenOpts gen_opts;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic instance and write it to disk");
  gen_cmd->add_option("--kind", gen_opts.kind,
                      "gaussian | heavy-tail-outliers | near-isotropic-equal-rows | consistent | median-1d | incidence-like");
  gen_cmd->add_option("--n", gen_opts.n, "rows")->required();
  gen_cmd->add_option("--d", gen_opts.d, "columns")->required();
  gen_cmd->add_option("--seed", gen_opts.seed, "random seed")->envname("LAD_SEED");
  gen_cmd->add_option("--noise", gen_opts.noise_scale, "additive noise scale");
  gen_cmd->add_option("--outlier-fraction", gen_opts.outlier_fraction, "fraction of rows blown up");
  gen_cmd->add_option("--outlier-scale", gen_opts.outlier_scale, "outlier row magnification");
  gen_cmd->add_option("--dof", gen_opts.student_t_dof, "student-t degrees of freedom");
  gen_cmd->add_option("--matrix-out", gen_opts.matrix_out, "matrix output path")->required();
  gen_cmd->add_option("--rhs-out", gen_opts.rhs_out, "rhs output path")->required();
  gen_cmd->add_option("--solution-out", gen_opts.solution_out, "write the planted solution here");
  gen_cmd->add_option("--out", gen_opts.out, "metadata report path, '-' for stdout")->envname("LAD_OUT");

  CommonOpts bench_opts;
  int bench_seeds = 20;
  CLI::App* bench_cmd = app.add_subcommand("bench", "repeat a solve across seeds; report quantiles");
  add_io_flags(bench_cmd, bench_opts);
  add_solve_flags(bench_cmd, bench_opts);
  bench_cmd->add_option("--seeds", bench_seeds, "number of consecutive seeds to run");

  CommonOpts oracle_opts;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle-check", "solve a small instance and report the gap to the exact optimum");
  add_io_flags(oracle_cmd, oracle_opts);
  add_solve_flags(oracle_cmd, oracle_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << lad::error_to_json("usage", e.what()).dump(2) << "\n";
    return 2;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_opts, false);
    if (pre_cmd->parsed()) return run_precondition(pre_opts);
    if (gen_cmd->parsed()) return run_gen(gen_opts);
    if (bench_cmd->parsed()) return run_bench(bench_opts, bench_seeds);
    if (oracle_cmd->parsed()) return run_solve(oracle_opts, true);
  } catch (const lad::Error& e) {
    std::cerr << lad::error_to_json(e).dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << lad::error_to_json("internal", e.what()).dump(2) << "\n";
    return 3;
  }
  return 2;
}
