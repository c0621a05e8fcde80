#include "palm/baselines.hpp"

namespace palm {

namespace {
std::string qkey(const std::string& state_key, const std::string& action) {
    return state_key + '\x1f' + action;
}
}  // namespace

double QTable::value(const std::string& state_key, const std::string& action) const {
    auto it = q.find(qkey(state_key, action));
    return it == q.end() ? 0.0 : it->second;
}

double QTable::max_value(const std::string& state_key, const std::vector<Action>& actions) const {
    double best = value(state_key, actions.front().id);
    for (std::size_t i = 1; i < actions.size(); ++i) {
        double v = value(state_key, actions[i].id);
        if (v > best) best = v;
    }
    return best;
}

EpisodeRecord qlearning_episode(const Environment& env, const GroundState& s0, QTable& table,
                                double gamma, Rng& rng, int budget) {
    if (table.alpha <= 0.0 || table.alpha > 1.0) throw ConfigError("alpha must be in (0, 1]");
    if (table.epsilon < 0.0 || table.epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
    const auto& actions = env.primitive_actions();
    EpisodeRecord rec;
    GroundState s = s0;
    std::string skey = canonical_key(s);
    while (true) {
        Terminal term = env.terminal_status(s);
        if (term != Terminal::none) {
            rec.outcome = term == Terminal::goal ? Outcome::goal : Outcome::fail;
            return rec;
        }
        if (rec.steps >= budget) break;
        std::size_t choice;
        if (rng.next_double() < table.epsilon) {
            choice = static_cast<std::size_t>(rng.next_int(static_cast<int>(actions.size())));
        } else {
            choice = 0;
            double best = table.value(skey, actions[0].id);
            for (std::size_t i = 1; i < actions.size(); ++i) {
                double v = table.value(skey, actions[i].id);
                if (v > best) {
                    best = v;
                    choice = i;
                }
            }
        }
        const std::string& a = actions[choice].id;
        StepOutcome out = env.step(s, a, rng);
        ++rec.steps;
        rec.reward += out.reward;
        rec.trajectory.push_back({a, out.reward});
        std::string s2key = canonical_key(out.next_state);
        double target = out.reward;
        if (env.terminal_status(out.next_state) == Terminal::none)
            target += gamma * table.max_value(s2key, actions);
        double& qv = table.q[qkey(skey, a)];
        qv += table.alpha * (target - qv);
        s = std::move(out.next_state);
        skey = std::move(s2key);
    }
    rec.outcome = Outcome::budget_exhausted;
    return rec;
}

FlatRmaxAgent::FlatRmaxAgent(std::shared_ptr<const Environment> env, ExecOptions opts, Rng rng)
    : ctx_(flat_hierarchy(), std::move(env), opts, rng) {}

}  // namespace palm
