#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wwlab/averages.hpp"
#include "wwlab/config.hpp"

namespace wwlab {

enum ExitCode : int { kExitOk = 0, kExitFail = 1, kExitConfig = 2, kExitViolation = 3 };

/// Command-line overrides; unset fields keep the config values.
struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string verdict;
  std::vector<std::filesystem::path> files;
};

void apply_overrides(ExperimentConfig& config, const RunOptions& options);

DynamicalSystem resolve_system(const ExperimentConfig& config);
const Observable& require_observable(const ExperimentConfig& config);
std::vector<WeightSequence> resolve_weights(const ExperimentConfig& config, const DynamicalSystem& sys,
                                            const Observable& f);
CheckpointSchedule resolve_schedule(const RunSection& run);
/// stride: ids floor(j C / P); random: P distinct ids drawn from the run seed, sorted; all; list.
std::vector<SampleCell> select_points(const DynamicalSystem& sys, const RunSection& run);

nlohmann::json spectral_json(const ExperimentConfig& config);
nlohmann::json egorov_json(const ExperimentConfig& config);
nlohmann::json vdc_json(const ExperimentConfig& config);
nlohmann::json maximal_json(const ExperimentConfig& config);

RunResult run_simulate(ExperimentConfig config, const RunOptions& options = {});
RunResult run_spectral(ExperimentConfig config, const RunOptions& options = {});
RunResult run_egorov(ExperimentConfig config, const RunOptions& options = {});
RunResult run_vdc(ExperimentConfig config, const RunOptions& options = {});
RunResult run_maximal(ExperimentConfig config, const RunOptions& options = {});

/// Dispatch by subcommand name: simulate | spectral | egorov | vdc | maximal.
RunResult run_command(const std::string& command, ExperimentConfig config, const RunOptions& options = {});

}  // namespace wwlab
