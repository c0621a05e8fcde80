#pragma once

#include "palm/lamdp.hpp"
#include "palm/planner.hpp"

namespace palm {

enum class Outcome { goal, fail, budget_exhausted };

std::string outcome_name(Outcome o);

struct SubtaskReturn {
    GroundState ground_state;
    bool all_known = true;
    Outcome outcome = Outcome::goal;
};

struct ExecOptions {
    int episode_budget = 2000;   // ground steps per episode
    int subtask_budget = 500;    // abstract iterations per subtask call
    bool gating_enabled = true;
    int known_threshold = 1;     // R-MAX m
    double gamma = 0.95;
    double value_max = 20.0;     // optimistic value of the fictitious state
    double vi_tolerance = 1e-6;
    int vi_max_iterations = 10000;
    bool audit = false;
};

struct GroundStep {
    std::string action;
    double reward = 0.0;
};

// One abstract transition as observed by a subtask's model update.
struct AuditRecord {
    int depth = 0;
    std::string amdp_id;
    std::string state_key;
    std::string action_key;
    std::string next_key;
    double pseudo_reward = 0.0;
    bool was_known = false;
    bool child_known = false;
    bool counted = false;
};

struct EpisodeRecord {
    int steps = 0;
    double reward = 0.0;  // ground cumulative reward
    Outcome outcome = Outcome::budget_exhausted;
    std::int64_t unknown_total = 0;  // across all models, at episode end
    std::vector<GroundStep> trajectory;
};

// Owns the models, planners, and discovered abstract state sets for one
// trial. Episodes run sequentially; models persist across them.
class ExecutionContext {
public:
    ExecutionContext(Hierarchy hierarchy, std::shared_ptr<const Environment> env,
                     ExecOptions opts, Rng rng);
    // grounded_by_id_ points into grounded_; the context must stay put.
    ExecutionContext(const ExecutionContext&) = delete;
    ExecutionContext& operator=(const ExecutionContext&) = delete;

    // Installs an externally learned model for one subtask template.
    void attach_transferred_model(const std::string& lamdp_name, const TabularModel& model,
                                  bool frozen);

    // One full episode of Algorithm 1 from s0 via the root subtask.
    EpisodeRecord run_episode(const GroundState& s0);

    const Hierarchy& hierarchy() const { return hierarchy_; }
    const Environment& env() const { return *env_; }
    const ExecOptions& options() const { return opts_; }
    TabularModel& model(const std::string& lamdp_name);
    const std::map<std::string, TabularModel>& models() const { return models_; }
    std::int64_t unknown_total() const;
    const std::vector<AuditRecord>& audit_log() const { return audit_; }
    void clear_audit_log() { audit_.clear(); }
    const std::map<std::string, std::vector<GroundedAmdp>>& groundings() const {
        return grounded_;
    }
    // Greedy action keys for every discovered non-terminal state of one
    // grounded subtask (used by convergence checks against the oracle).
    std::map<std::string, std::string> greedy_policy(const GroundedAmdp& g);
    GroundedAmdp& grounding(const std::string& id);
    // Actions offered from a discovered abstract state, in planner row order.
    const std::vector<std::pair<std::string, Binding>>& available_actions(
        const GroundedAmdp& g, const std::string& abstract_key) const;
    bool is_primitive_action(const std::string& name) const { return is_ground_action(name); }
    const std::string& primitive_for(const std::string& name) const {
        return resolve_primitive(name);
    }

private:
    SubtaskReturn palm(GroundedAmdp& g, GroundState s, int depth);
    GroundState execute_primitive(const std::string& action_id, const GroundState& s);
    // Adds s̃ to the subtask's discovered set and the planner, classifying it
    // against tau/chi on first sight.
    void discover(GroundedAmdp& g, IncrementalPlanner& planner, const AbstractState& st,
                  const GroundState& rep);
    GroundedAmdp& grounded_child(const std::string& name, const Binding& binding);
    IncrementalPlanner& planner_for(const GroundedAmdp& g);
    bool is_ground_action(const std::string& name) const;
    // Single primitive behind a wrapper node, or the name itself.
    const std::string& resolve_primitive(const std::string& name) const;

    Hierarchy hierarchy_;
    std::shared_ptr<const Environment> env_;
    ExecOptions opts_;
    Rng rng_;
    std::map<std::string, TabularModel> models_;  // per L-AMDP
    std::map<std::string, std::vector<GroundedAmdp>> grounded_;
    std::unordered_map<std::string, GroundedAmdp*> grounded_by_id_;
    std::unordered_map<std::string, IncrementalPlanner> planners_;  // per grounded id
    // Available abstract actions per (grounded id, abstract key), fixed at
    // discovery so planner rows and greedy selection agree.
    std::unordered_map<std::string,
                       std::unordered_map<std::string, std::vector<std::pair<std::string, Binding>>>>
        actions_;
    int t_ = 0;  // ground steps this episode
    EpisodeRecord* episode_ = nullptr;
    std::vector<AuditRecord> audit_;
};

}  // namespace palm
