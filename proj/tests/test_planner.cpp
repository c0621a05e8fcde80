#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "palm/planner.hpp"

using namespace palm;

namespace {

TabularModel chain_model(int n, double gamma) {
    // s0 -a-> s1 -a-> ... -a-> goal, reward 1 on the final hop, else 0.
    TabularModel m("chain", "sig", 1, gamma, 20.0);
    for (int i = 0; i < n; ++i) {
        std::string s = "s" + std::to_string(i);
        std::string s2 = i + 1 == n ? "goal" : "s" + std::to_string(i + 1);
        m.observe(s, "a", s2, i + 1 == n ? 1.0 : 0.0, true);
    }
    return m;
}

std::vector<PlanState> chain_states(int n) {
    std::vector<PlanState> states;
    for (int i = 0; i < n; ++i) states.push_back({"s" + std::to_string(i), false, {"a"}});
    states.push_back({"goal", true, {}});
    return states;
}

}  // namespace

TEST_CASE("deterministic chain values are discounted hop counts") {
    const double gamma = 0.9;
    TabularModel m = chain_model(5, gamma);
    ViOptions opts;
    opts.gamma = gamma;
    opts.tolerance = 1e-12;
    ValueTable v = solve(m, chain_states(5), opts);
    CHECK(v.converged);
    for (int i = 0; i < 5; ++i)
        CHECK(v.values.at("s" + std::to_string(i)) ==
              doctest::Approx(std::pow(gamma, 4 - i)).epsilon(1e-9));
    CHECK(v.values.at("goal") == 0.0);  // terminal values are pinned
}

TEST_CASE("untried pairs back up optimistically to gamma * vmax") {
    TabularModel m("opt", "sig", 1, 0.95, 20.0);
    ViOptions opts;
    ValueTable v = solve(m, {{"s", false, {"a"}}}, opts);
    CHECK(v.values.at("s") == doctest::Approx(0.95 * 20.0));

    // And greedy prefers the unexplored action over a known mediocre one.
    m.observe("s", "known", "s", 0.0, true);
    ValueTable v2 = solve(m, {{"s", false, {"known", "try_me"}}}, opts);
    CHECK(greedy_action_index(v2, m, "s", {"known", "try_me"}, opts) == 1);
}

TEST_CASE("frozen unseen pairs self-loop at the default reward") {
    TabularModel m("f", "sig", 1, 0.95, 20.0);
    m.freeze();
    ViOptions opts;
    opts.frozen_default_reward = 0.0;
    ValueTable v = solve(m, {{"s", false, {"a"}}}, opts);
    CHECK(v.values.at("s") == doctest::Approx(0.0));  // no optimism once frozen
}

TEST_CASE("stochastic two-armed state mixes rewards and successor values") {
    const double gamma = 0.5;
    TabularModel m("b", "sig", 2, gamma, 20.0);
    // risky: half the time straight to goal (r=2), half back to s (r=0).
    m.observe("s", "risky", "goal", 2.0, true);
    m.observe("s", "risky", "s", 0.0, true);
    // safe: always to goal, r=0.5.
    m.observe("s", "safe", "goal", 0.5, true);
    m.observe("s", "safe", "goal", 0.5, true);
    ViOptions opts;
    opts.gamma = gamma;
    opts.tolerance = 1e-12;
    ValueTable v = solve(m, {{"s", false, {"risky", "safe"}}, {"goal", true, {}}}, opts);
    // V = max(1 + 0.25 V, 0.5) => V = 4/3 via the risky arm.
    CHECK(v.values.at("s") == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(greedy_action_index(v, m, "s", {"risky", "safe"}, opts) == 0);
    CHECK(greedy_action_index(v, m, "s", {"safe", "risky"}, opts) == 1);
}

TEST_CASE("incremental planner tracks model updates between resolves") {
    const double gamma = 0.9;
    TabularModel m("inc", "sig", 1, gamma, 20.0);
    ViOptions opts;
    opts.gamma = gamma;
    opts.tolerance = 1e-12;
    IncrementalPlanner planner(opts);
    planner.add_state("s0", false, {"a"});
    planner.add_state("goal", true, {});
    planner.sync(m);
    planner.resolve(m);
    CHECK(planner.value("s0") == doctest::Approx(gamma * 20.0));  // still optimistic

    m.observe("s0", "a", "goal", 1.0, true);
    planner.sync(m);
    planner.resolve(m);
    CHECK(planner.value("s0") == doctest::Approx(1.0));

    // A successor recorded before its discovery is patched in on add_state.
    m.observe("s0", "a", "mid", 0.0, true);  // s0 -a-> {goal, mid} now 50/50
    planner.sync(m);
    planner.resolve(m);
    double before = planner.value("s0");
    CHECK(before == doctest::Approx(0.5 * 1.0));  // mid valued 0 while undiscovered
    m.observe("mid", "a", "goal", 1.0, true);
    planner.add_state("mid", false, {"a"});
    planner.sync(m);
    planner.resolve(m);
    CHECK(planner.value("mid") == doctest::Approx(1.0));
    CHECK(planner.value("s0") == doctest::Approx(0.5 + 0.5 * gamma));
    CHECK(planner.last_converged());

    // add_state is idempotent: re-adding with different flags changes nothing.
    planner.add_state("mid", true, {});
    CHECK(planner.state_count() == 3);
    planner.resolve(m);
    CHECK(planner.value("mid") == doctest::Approx(1.0));
}

TEST_CASE("greedy requires at least one available action") {
    TabularModel m("g", "sig", 1, 0.95, 20.0);
    ViOptions opts;
    IncrementalPlanner planner(opts);
    CHECK_THROWS_AS(planner.greedy(m, "s", {}), DomainError);
}
