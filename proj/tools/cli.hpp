#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "diffreg/continuation.hpp"
#include "json.hpp"

namespace diffreg::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, solver_failure = 3 };

/// Every parameter reachable from the command line.
struct JobConfig {
  std::string command;
  std::string template_path;
  std::string reference_path;
  double alpha = 1e-2;
  double beta = 1e-4;  // 0 switches the divergence penalty off
  double eps_opt = 5e-2;
  double eps_det = 0.1;
  int nt = 4;
  int maxit = 50;
  std::string distance = "ssd";
  std::string precond = "h0";
  std::string interp = "cubic";
  std::string forcing = "superlinear";
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 0;
  std::string precision = "f64";

  void validate() const;
  RegConfig reg() const;
  KktOptions kkt() const;
  OptimizerConfig optimizer() const;
  SearchConfig search() const;
};

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const JobConfig& job);
nlohmann::json to_json(const IterationRecord& r);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const SearchResult& r);

/// trials.csv: one row per search trial.
std::string trials_csv(const SearchResult& r);

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diffreg::cli
