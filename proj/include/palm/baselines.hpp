#pragma once

#include "palm/exec.hpp"

namespace palm {

struct QTable {
    std::unordered_map<std::string, double> q;  // key: ground-state-key \x1f action-id
    double alpha = 0.1;
    double epsilon = 0.1;

    double value(const std::string& state_key, const std::string& action) const;
    double max_value(const std::string& state_key, const std::vector<Action>& actions) const;
};

// One episode of tabular epsilon-greedy Q-learning on the ground MDP.
EpisodeRecord qlearning_episode(const Environment& env, const GroundState& s0, QTable& table,
                                double gamma, Rng& rng, int budget);

// R-MAX on the ground MDP: the executor run on the degenerate one-node
// hierarchy (root over all primitives, identity abstraction).
class FlatRmaxAgent {
public:
    FlatRmaxAgent(std::shared_ptr<const Environment> env, ExecOptions opts, Rng rng);
    EpisodeRecord run_episode(const GroundState& s0) { return ctx_.run_episode(s0); }
    ExecutionContext& context() { return ctx_; }

private:
    ExecutionContext ctx_;
};

}  // namespace palm
