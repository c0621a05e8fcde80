#pragma once

#include <optional>

#include "palm/baselines.hpp"

namespace palm {

struct MissingFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransferSpec {
    std::string lamdp;
    std::string model_file;
    bool frozen = true;
};

struct ExperimentConfig {
    std::string variant;         // required
    std::string hierarchy_file;  // required for palm
    std::string algorithm = "palm";  // palm | rmax-flat | qlearning
    int episodes = 100;
    int trials = 20;
    std::uint64_t seed = 1;
    double gamma = 0.95;
    std::optional<int> m;  // default: 1 deterministic, 5 stochastic
    double vi_tolerance = 1e-6;
    bool gating = true;
    int episode_budget = 2000;
    int subtask_budget = 500;
    double alpha = 0.1;
    double epsilon = 0.1;
    std::optional<TransferSpec> transfer;
    std::string output_dir;
    bool save_models = true;  // trial 0's converged models, for export
    bool audit = false;
    int threads = 1;
};

// key = value lines, '#' comments; unknown keys rejected.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

struct TrialResult {
    std::vector<EpisodeRecord> episodes;
    std::vector<double> wall_ms;  // per episode
};

struct TrialOutput {
    TrialResult result;
    // Populated for model-based algorithms; lets tests inspect the converged
    // models, policies, and audit log.
    std::unique_ptr<ExecutionContext> ctx;
    std::unique_ptr<QTable> qtable;
};

// One seeded trial: fresh instance, fresh models (plus transfers), episodes
// run back-to-back with persistent models.
TrialOutput run_trial(const ExperimentConfig& cfg, int trial_index);

// Runs every trial and writes trial_<i>.csv (plus trial 0's model store)
// under cfg.output_dir. Returns the CSV paths.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

std::string episode_csv_header();
std::string episode_csv_rows(const TrialResult& t);

// Per-episode mean and 95% CI (mean ± 1.96·sd/√n, sample sd) of cumulative
// steps and cumulative reward across trial CSVs; returns aggregate CSV text.
std::string aggregate_csv(const std::vector<std::string>& csv_paths);

void export_model(const std::string& store_dir, const std::string& lamdp_name,
                  const std::string& out_path);

}  // namespace palm
