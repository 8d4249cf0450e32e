#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pxem/engine.hpp"
#include "pxem/robit_model.hpp"

namespace pxem::cli {

// Process exit codes. Stable contract.
enum ExitCode : int {
  kExitConverged = 0,
  kExitInputError = 1,
  kExitMaxIter = 2,
  kExitDivergence = 3,
  kExitRankDeficient = 4,
  kExitNoInteriorSolution = 5,
};

enum class ModelKind { kToy, kRobit };

struct ExperimentConfig {
  ModelKind model = ModelKind::kToy;
  std::vector<Schedule> schedules{Schedule::kEm};
  std::vector<ReductionVariant> reductions{ReductionVariant::kCorrect};
  double nu = 2.0;
  std::optional<std::uint64_t> x_obs;
  std::optional<double> pi;
  std::optional<std::filesystem::path> data;
  std::vector<double> start;  // empty: lambda = 1 (toy) or beta = 0 (robit)
  StopRule stop;
  std::optional<std::filesystem::path> out;
  std::vector<double> lambda_grid;  // surface only; empty means default
  std::vector<double> alpha_grid;
};

/// Runs one schedule for the configured model. Throws on invalid input.
FitTrace fit_trace(const ExperimentConfig& cfg, Schedule schedule,
                   ReductionVariant variant = ReductionVariant::kCorrect);

int cmd_fit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_surface(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_efficient_da(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pxem::cli
