#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mutinv/learner.hpp"
#include "mutinv/mutation.hpp"
#include "mutinv/pipeline.hpp"
#include "mutinv/plant.hpp"
#include "mutinv/smc.hpp"

namespace mutinv {

// Exit code families used by the CLI.
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 2,        // bad flags / config
  kExitIo = 3,           // missing or unreadable files
  kExitDslRuntime = 4,   // controller runtime error during simulation
  kExitNoMutants = 5,    // zero distinct mutants survived screening
  kExitSingleClass = 6,  // dataset has a single class
  kExitUndecided = 7,    // SMC ran out of budget
};

struct ExperimentConfig {
  std::string plant_config_path;
  std::string controller_path;
  std::string out_dir = "out";

  std::vector<double> initial_levels_mm = {300.0, 500.0, 800.0};
  double duration_s = 1800.0;
  std::uint64_t seed = 1;

  std::vector<MutationOperator> mutation_ops = {
      MutationOperator::ABS, MutationOperator::AOR, MutationOperator::LCR,
      MutationOperator::ROR, MutationOperator::UOI};
  std::size_t mutation_limit = 20;

  double screen_epsilon_mm = 1e-6;
  double duplicate_epsilon_mm = 1.0;

  int stride_ticks = 1;
  Hyperparams hp;
  int k_folds = 5;
  bool individual_models = false;

  SprtConfig sprt_cfg;
  double chernoff_epsilon = 0.01;
  double chernoff_delta = 0.05;
  int validation_runs = 3;
  std::string smc_mode = "per_vector";  // or "per_run"

  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;

  // Hash over the semantic inputs (plant config, controller source,
  // simulation/mutation parameters), independent of output paths.
  std::string config_hash() const;

  PlantConfig plant() const;
  Program controller() const;
  PlantState initial_state(const PlantConfig& cfg, int state_id) const;
};

std::string fnv1a_hex(const std::string& data);

struct SimulateResult {
  std::vector<std::string> trace_files;
};
SimulateResult run_simulate(const ExperimentConfig& cfg);

struct MutateResult {
  int total = 0;
  int unexercised = 0;
  int equivalent = 0;
  int distinct = 0;
  std::vector<std::string> selected;  // distinct minus near-duplicates
  bool universe_exhausted = false;
};
MutateResult run_mutate(const ExperimentConfig& cfg);

struct TrainResult {
  CvReport report;
  std::string model_file;
  std::string invariant_text;
  long positive_vectors = 0;
  long negative_vectors = 0;
};
TrainResult run_train(const ExperimentConfig& cfg);

struct ValidateResult {
  SprtVerdict verdict;
  ChernoffEstimate estimate;
  std::vector<double> run_rates;
};
ValidateResult run_validate(const ExperimentConfig& cfg,
                            const std::string& model_path);

std::string run_report(const ExperimentConfig& cfg);

}  // namespace mutinv
