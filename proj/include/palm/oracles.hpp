#pragma once

#include "palm/exec.hpp"

namespace palm {
namespace oracle {

// Brute-force references used only by tests. Deliberately independent of the
// planner's backup loop: policy iteration with linear-system evaluation.

struct Transition {
    int next = -1;
    double p = 0.0;
    double r = 0.0;
};

struct EnumeratedMdp {
    std::vector<std::string> state_keys;
    std::vector<GroundState> states;
    std::vector<std::string> actions;  // global list; per-state availability is
                                       // "transition list non-empty"
    // transitions[s][a]: outcome distribution, or empty when a is unavailable
    // from s. Non-empty rows sum to 1.
    std::vector<std::vector<std::vector<Transition>>> transitions;
    std::vector<char> terminal;
    std::unordered_map<std::string, int> index;

    int state_of(const std::string& key) const;
};

// Exhaustive BFS over the reachable ground MDP, expanding declared outcome
// distributions (never sampling).
EnumeratedMdp enumerate(const Environment& env, const GroundState& start,
                        std::size_t guard = 100000);

struct Solution {
    std::vector<double> values;
    std::vector<int> policy;  // action index; -1 for terminal states
};

Solution exact_solve(const EnumeratedMdp& mdp, double gamma);

// Expected steps to reach a terminal state under a fixed policy.
double expected_steps(const EnumeratedMdp& mdp, const std::vector<int>& policy, int start);

// The exact abstract MDP of one grounded subtask, built by running each
// child's current greedy policy to termination from every discovered
// representative state. Deterministic domains only; refuses when the
// simulation escapes the discovered abstract state set (non-converged run).
EnumeratedMdp true_abstract_mdp(ExecutionContext& ctx, const GroundedAmdp& g);

}  // namespace oracle
}  // namespace palm
