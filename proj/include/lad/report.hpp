#pragma once

#include "lad/solver.hpp"
#include "lad/types.hpp"

#include "json.hpp"

#include <fstream>
#include <optional>
#include <string>

namespace lad {

inline nlohmann::json report_to_json(const SolveReport& r,
                                     std::optional<double> oracle_gap = std::nullopt) {
  nlohmann::json j;
  j["schema_version"] = "v1";
  j["objective_l1"] = r.objective_l1;
  j["preconditioned_objective"] = r.preconditioned_objective;
  j["x_hat"] = std::vector<double>(r.x_hat.data(), r.x_hat.data() + r.x_hat.size());
  j["n"] = r.n;
  j["d"] = r.d;
  j["nnz"] = r.nnz;
  j["N"] = r.N;
  j["mode"] = mode_name(r.mode);
  j["method"] = method_name(r.method);
  j["eps"] = r.eps;
  j["seed"] = r.seed;
  j["f2"] = r.f2;
  j["guesses"] = r.guesses;
  j["best_guess"] = r.best_guess;
  j["stage_counts"] = (r.best_guess >= 0 && r.best_guess < static_cast<int>(r.guess_records.size()))
                          ? r.guess_records[r.best_guess].stage_counts
                          : std::vector<std::int64_t>{};
  j["grad_evals"] = r.grad_evals;
  j["wall_ms"] = r.wall_ms;
  j["exact_fit"] = r.exact_fit;
  j["irb_row_bound"] = r.irb_row_bound;
  j["sampling_attempts"] = r.sampling_attempts;

  nlohmann::json recs = nlohmann::json::array();
  for (const auto& g : r.guess_records) {
    recs.push_back({{"guess", g.guess},
                    {"objective", g.objective},
                    {"grad_evals", g.grad_evals},
                    {"stage_counts", g.stage_counts},
                    {"cap_hit", g.cap_hit}});
  }
  j["guess_records"] = recs;

  j["schedule"] = {{"G", r.schedule.G},     {"Delta", r.schedule.Delta}, {"Theta", r.schedule.Theta},
                   {"beta0", r.schedule.beta0}, {"sigma0", r.schedule.sigma0}, {"stages", r.schedule.stages}};

  if (oracle_gap.has_value()) j["oracle_gap"] = *oracle_gap;

  if (!r.trace.empty()) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& [evals, fval] : r.trace) tr.push_back({evals, fval});
    j["trace"] = tr;
  }
  return j;
}

inline nlohmann::json error_to_json(const Error& e) {
  return {{"error", {{"category", error_code_name(e.code())}, {"message", e.what()}}}};
}

inline nlohmann::json error_to_json(const std::string& category, const std::string& message) {
  return {{"error", {{"category", category}, {"message", message}}}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, path + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::io_error, path + ": write failed");
}

}  // namespace lad
