#pragma once

#include <unordered_map>

#include "palm/rmax.hpp"

namespace palm {

struct ValueTable {
    std::unordered_map<std::string, double> values;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // one entry per sweep
};

struct PlanState {
    std::string key;
    bool terminal = false;                 // in goal or fail set: value fixed at 0
    std::vector<std::string> action_keys;  // stable order
};

struct ViOptions {
    double gamma = 0.95;
    double tolerance = 1e-6;
    int max_iterations = 10000;
    // Reward assumed when a frozen model is queried on an unrecorded pair
    // (treated as a self-loop, never optimistic).
    double frozen_default_reward = 0.0;
};

// Value iteration over the discovered abstract state set plus the optimistic
// absorbing state implied by unknown pairs. Synchronous sweeps.
ValueTable solve(const TabularModel& model, const std::vector<PlanState>& states,
                 const ViOptions& opts);

// One-step greedy backup over `available`; ties go to the earliest action.
std::size_t greedy_action_index(const ValueTable& table, const TabularModel& model,
                                const std::string& state_key,
                                const std::vector<std::string>& available,
                                const ViOptions& opts);

// Persistent per-grounded-AMDP planning state: keeps the value table warm and
// refreshes only rows touched by model updates since the last solve.
class IncrementalPlanner {
public:
    explicit IncrementalPlanner(ViOptions opts) : opts_(opts) {}

    bool has_state(const std::string& key) const { return index_.count(key) > 0; }
    void add_state(const std::string& key, bool terminal, std::vector<std::string> action_keys);
    // Consume the model changelog and mark touched rows for rebuild.
    void sync(const TabularModel& model);
    // Rebuild dirty rows and sweep to tolerance (warm-started).
    void resolve(const TabularModel& model);

    double value(const std::string& key) const;
    double value_or_zero(int idx) const { return idx < 0 ? 0.0 : values_[idx]; }
    std::size_t greedy(const TabularModel& model, const std::string& state_key,
                       const std::vector<std::string>& available) const;

    bool last_converged() const { return converged_; }
    double last_residual() const { return last_residual_; }
    int iterations() const { return iterations_; }
    const std::vector<double>& residual_history() const { return residual_history_; }
    std::size_t state_count() const { return keys_.size(); }
    const ViOptions& options() const { return opts_; }

private:
    struct RowEntry {
        int idx = -1;  // -1: successor not yet discovered (value 0)
        double p = 0.0;
    };
    struct Row {
        std::string action_key;
        TabularModel::PredictionKind kind = TabularModel::PredictionKind::optimistic;
        double exp_reward = 0.0;
        std::vector<RowEntry> next;
        bool dirty = true;
    };

    void rebuild_row(const TabularModel& model, int sidx, int ridx);
    double backup_row(const TabularModel& model, const Row& row, int sidx,
                      const std::vector<double>& values) const;

    ViOptions opts_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> keys_;
    std::vector<char> terminal_;
    std::vector<double> values_;
    std::vector<std::vector<Row>> rows_;
    std::unordered_map<std::string, std::vector<std::pair<int, std::pair<int, int>>>>
        pending_;  // successor key -> (state, row, entry) references to patch
    std::uint64_t consumed_version_ = 0;
    std::vector<std::pair<int, int>> dirty_;
    bool converged_ = true;
    double last_residual_ = 0.0;
    int iterations_ = 0;
    std::vector<double> residual_history_;
};

}  // namespace palm
