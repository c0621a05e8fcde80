#include "palm/oracles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <deque>

namespace palm {
namespace oracle {

int EnumeratedMdp::state_of(const std::string& key) const {
    auto it = index.find(key);
    if (it == index.end()) throw DomainError("state not in enumeration: " + key);
    return it->second;
}

EnumeratedMdp enumerate(const Environment& env, const GroundState& start, std::size_t guard) {
    EnumeratedMdp mdp;
    for (const auto& a : env.primitive_actions()) mdp.actions.push_back(a.id);

    auto intern = [&](const GroundState& s) -> int {
        std::string key = canonical_key(s);
        auto it = mdp.index.find(key);
        if (it != mdp.index.end()) return it->second;
        if (mdp.states.size() >= guard)
            throw DomainError("state enumeration exceeds guard of " + std::to_string(guard));
        int idx = static_cast<int>(mdp.states.size());
        mdp.index.emplace(key, idx);
        mdp.state_keys.push_back(std::move(key));
        mdp.states.push_back(s);
        mdp.terminal.push_back(env.terminal_status(s) != Terminal::none ? 1 : 0);
        mdp.transitions.emplace_back(mdp.actions.size());
        return idx;
    };

    std::deque<int> frontier;
    frontier.push_back(intern(start));
    std::size_t visited = 0;
    while (!frontier.empty()) {
        int s = frontier.front();
        frontier.pop_front();
        if (static_cast<std::size_t>(s) < visited) continue;
        visited = static_cast<std::size_t>(s) + 1;
        if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
        GroundState state = mdp.states[static_cast<std::size_t>(s)];  // copy: intern reallocates
        for (std::size_t a = 0; a < mdp.actions.size(); ++a) {
            auto outs = env.outcomes(state, mdp.actions[a]);
            // Merge branches landing on the same successor.
            std::map<int, std::pair<double, double>> merged;  // idx -> (p, p·r)
            for (const auto& [p, out] : outs) {
                std::size_t before = mdp.states.size();
                int next = intern(out.next_state);
                if (static_cast<std::size_t>(next) == before) frontier.push_back(next);
                auto& slot = merged[next];
                slot.first += p;
                slot.second += p * out.reward;
            }
            auto& row = mdp.transitions[static_cast<std::size_t>(s)][a];
            for (const auto& [next, pr] : merged)
                row.push_back({next, pr.first, pr.second / pr.first});
        }
    }
    return mdp;
}

namespace {

// Exact policy evaluation: solve (I − γ·T_π) v = r_π.
std::vector<double> evaluate(const EnumeratedMdp& mdp, const std::vector<int>& policy,
                             double gamma) {
    int n = static_cast<int>(mdp.states.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        trip.emplace_back(s, s, 1.0);
        if (mdp.terminal[static_cast<std::size_t>(s)] || policy[static_cast<std::size_t>(s)] < 0)
            continue;
        const auto& row =
            mdp.transitions[static_cast<std::size_t>(s)]
                           [static_cast<std::size_t>(policy[static_cast<std::size_t>(s)])];
        double exp_r = 0.0;
        for (const auto& t : row) {
            exp_r += t.p * t.r;
            // setFromTriplets sums duplicates, folding this into the diagonal
            // when t.next == s.
            trip.emplace_back(s, t.next, -gamma * t.p);
        }
        rhs[s] = exp_r;
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw DomainError("policy evaluation system is singular");
    Eigen::VectorXd v = lu.solve(rhs);
    return std::vector<double>(v.data(), v.data() + n);
}

int greedy_of(const EnumeratedMdp& mdp, const std::vector<double>& values, double gamma, int s) {
    int best = -1;
    double best_q = 0.0;
    const auto& rows = mdp.transitions[static_cast<std::size_t>(s)];
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].empty()) continue;
        double q = 0.0;
        for (const auto& t : rows[a])
            q += t.p * (t.r + (mdp.terminal[static_cast<std::size_t>(t.next)]
                                   ? 0.0
                                   : gamma * values[static_cast<std::size_t>(t.next)]));
        if (best < 0 || q > best_q + 1e-12) {
            best = static_cast<int>(a);
            best_q = q;
        }
    }
    return best;
}

}  // namespace

Solution exact_solve(const EnumeratedMdp& mdp, double gamma) {
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("discount must be in (0, 1)");
    int n = static_cast<int>(mdp.states.size());
    Solution sol;
    sol.policy.assign(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
        if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
        const auto& rows = mdp.transitions[static_cast<std::size_t>(s)];
        for (std::size_t a = 0; a < rows.size(); ++a) {
            if (!rows[a].empty()) {
                sol.policy[static_cast<std::size_t>(s)] = static_cast<int>(a);
                break;
            }
        }
    }
    for (int iter = 0; iter < 10000; ++iter) {
        sol.values = evaluate(mdp, sol.policy, gamma);
        bool changed = false;
        for (int s = 0; s < n; ++s) {
            if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
            int g = greedy_of(mdp, sol.values, gamma, s);
            if (g >= 0 && g != sol.policy[static_cast<std::size_t>(s)]) {
                sol.policy[static_cast<std::size_t>(s)] = g;
                changed = true;
            }
        }
        if (!changed) return sol;
    }
    throw DomainError("policy iteration failed to converge");
}

double expected_steps(const EnumeratedMdp& mdp, const std::vector<int>& policy, int start) {
    // Solve n(s) = 1 + Σ T(s'|s,π) n(s'), n(terminal) = 0.
    int n = static_cast<int>(mdp.states.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        double diag = 1.0;
        if (!mdp.terminal[static_cast<std::size_t>(s)] &&
            policy[static_cast<std::size_t>(s)] >= 0) {
            const auto& row =
                mdp.transitions[static_cast<std::size_t>(s)]
                               [static_cast<std::size_t>(policy[static_cast<std::size_t>(s)])];
            rhs[s] = 1.0;
            for (const auto& t : row) {
                if (t.next == s)
                    diag -= t.p;
                else
                    trip.emplace_back(s, t.next, -t.p);
            }
        }
        trip.emplace_back(s, s, diag);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw DomainError("expected-steps system is singular (policy may not reach a terminal)");
    Eigen::VectorXd v = lu.solve(rhs);
    return v[start];
}

namespace {

GroundState deterministic_step(const Environment& env, const GroundState& s,
                               const std::string& action) {
    auto outs = env.outcomes(s, action);
    if (outs.size() != 1)
        throw DomainError("true_abstract_mdp requires a deterministic domain");
    return outs.front().second.next_state;
}

struct ChildSimulator {
    ExecutionContext& ctx;
    std::map<std::string, std::map<std::string, std::string>> policies;  // id -> key -> akey

    const std::map<std::string, std::string>& policy_of(GroundedAmdp& g) {
        auto it = policies.find(g.id);
        if (it != policies.end()) return it->second;
        return policies.emplace(g.id, ctx.greedy_policy(g)).first->second;
    }

    // Runs (child, binding) from s to the child's termination under the
    // current greedy policies, depth-first through the hierarchy.
    GroundState run(const std::string& name, const Binding& binding, GroundState s) {
        if (ctx.is_primitive_action(name))
            return deterministic_step(ctx.env(), s, ctx.primitive_for(name));
        GroundedAmdp& g = ctx.grounding(action_key(name, binding));
        const LAmdp& node = ctx.hierarchy().node(name);
        const auto& pol = policy_of(g);
        for (int guard = 0; guard < 100000; ++guard) {
            AbstractState st = abstract_state(node, g.binding, ctx.env(), s);
            if (g.goal_set.count(st.key) || g.fail_set.count(st.key)) return s;
            if (eval_goal(ctx.hierarchy(), g, st) || eval_fail(ctx.hierarchy(), g, st)) return s;
            if (ctx.env().terminal_status(s) != Terminal::none) return s;
            auto pit = pol.find(st.key);
            if (pit == pol.end())
                throw DomainError("child " + g.id + " reached undiscovered abstract state " +
                                  st.key + " (run not converged)");
            const auto& avail = ctx.available_actions(g, st.key);
            const std::pair<std::string, Binding>* chosen = nullptr;
            for (const auto& a : avail)
                if (action_key(a.first, a.second) == pit->second) {
                    chosen = &a;
                    break;
                }
            if (chosen == nullptr) throw DomainError("greedy action missing from action set");
            s = run(chosen->first, chosen->second, std::move(s));
        }
        throw DomainError("child simulation did not terminate: " + g.id);
    }
};

}  // namespace

EnumeratedMdp true_abstract_mdp(ExecutionContext& ctx, const GroundedAmdp& g_in) {
    GroundedAmdp& g = ctx.grounding(g_in.id);
    const LAmdp& node = ctx.hierarchy().node(g.lamdp_name);
    EnumeratedMdp mdp;

    std::vector<std::string> keys;
    keys.reserve(g.discovered.size());
    for (const auto& [k, _] : g.discovered) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
        int idx = static_cast<int>(mdp.state_keys.size());
        mdp.index.emplace(k, idx);
        mdp.state_keys.push_back(k);
        mdp.states.push_back(g.discovered.at(k));
        mdp.terminal.push_back(g.goal_set.count(k) || g.fail_set.count(k) ? 1 : 0);
    }
    std::map<std::string, std::size_t> action_index;
    for (const auto& k : keys) {
        if (mdp.terminal[static_cast<std::size_t>(mdp.state_of(k))]) continue;
        for (const auto& [c, b] : ctx.available_actions(g, k)) {
            std::string ak = action_key(c, b);
            if (!action_index.count(ak)) {
                action_index.emplace(ak, mdp.actions.size());
                mdp.actions.push_back(ak);
            }
        }
    }
    mdp.transitions.assign(mdp.states.size(),
                           std::vector<std::vector<Transition>>(mdp.actions.size()));

    ChildSimulator sim{ctx, {}};
    for (const auto& k : keys) {
        int s = mdp.state_of(k);
        if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
        const GroundState& rep = g.discovered.at(k);
        AbstractState st = abstract_state(node, g.binding, ctx.env(), rep);
        for (const auto& [c, b] : ctx.available_actions(g, k)) {
            GroundState s2 = sim.run(c, b, rep);
            AbstractState st2 = abstract_state(node, g.binding, ctx.env(), s2);
            auto nit = mdp.index.find(st2.key);
            if (nit == mdp.index.end())
                throw DomainError("abstract successor " + st2.key + " undiscovered by " + g.id +
                                  " (run not converged)");
            double r = pseudo_reward(ctx.hierarchy(), g, st, action_key(c, b), st2);
            mdp.transitions[static_cast<std::size_t>(s)][action_index.at(action_key(c, b))] = {
                {nit->second, 1.0, r}};
        }
    }
    return mdp;
}

}  // namespace oracle
}  // namespace palm
