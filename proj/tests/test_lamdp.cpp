#include <doctest.h>

#include <string>

#include "palm/lamdp.hpp"
#include "palm/taxi.hpp"

using namespace palm;

namespace {

std::string hier_path(const std::string& name) {
    return std::string(PALM_HIERARCHY_DIR) + "/" + name;
}

const char* kMiniTaxi = R"(version 1
domain taxi
node Root
root
goal all_delivered
phi all_delivered carried_code delivered_code
children Navigate pickup putdown
node Navigate
param loc depot
goal taxi_at(loc)
phi taxi_at(loc) nav_dx(loc) nav_dy(loc)
children north south east west
)";

}  // namespace

TEST_CASE("parser reports origin and line number") {
    try {
        parse_hierarchy_text("version 1\nbogus-directive x\n", "test.hier");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("test.hier:2:") == 0);
    }
    CHECK_THROWS_AS(parse_hierarchy_text("goal foo\n", "t"), ConfigError);  // before any node
    CHECK_THROWS_AS(parse_hierarchy_text("node X\nphi broken(\n", "t"), ConfigError);
}

TEST_CASE("parser handles comments, literals, and reward overrides") {
    TaskGraphSpec spec = parse_hierarchy_text(
        "version 1\ndomain taxi\n"
        "node A  # trailing comment\nroot\nshielded\n"
        "goal in_taxi(p) !delivered(p)\n"
        "param p passenger\n"
        "reward goal 2.5 fail -3 default -0.25\n"
        "phi in_taxi(p)\nchildren north\n",
        "t");
    REQUIRE(spec.nodes.size() == 1);
    const LAmdp& a = spec.nodes[0];
    CHECK(a.is_root);
    CHECK(a.shielded);
    REQUIRE(a.goal.size() == 2);
    CHECK(!a.goal[0].negated);
    CHECK(a.goal[1].negated);
    CHECK(a.goal[0].feature.name == "in_taxi");
    CHECK(a.goal[0].feature.args == std::vector<std::string>{"p"});
    CHECK(a.pseudo.goal == 2.5);
    CHECK(a.pseudo.fail == -3.0);
    CHECK(a.pseudo.default_reward == -0.25);
}

TEST_CASE("build_hierarchy rejects malformed task graphs") {
    auto build = [](const std::string& text) {
        return build_hierarchy(parse_hierarchy_text(text, "t"));
    };
    CHECK_THROWS_WITH_AS(build("node A\nroot\nchildren north\nnode A\nchildren south\n"),
                         doctest::Contains("duplicate subtask name"), ConfigError);
    CHECK_THROWS_WITH_AS(
        build("node A\nroot\nchildren B\nnode B\nchildren A\n"),
        doctest::Contains("cycle in task graph"), ConfigError);
    // Direct self-reference surfaces through the cycle detector.
    CHECK_THROWS_WITH_AS(build("node A\nroot\nchildren A\n"),
                         doctest::Contains("cycle in task graph"), ConfigError);
    CHECK_THROWS_WITH_AS(build("node A\nroot\n"), doctest::Contains("has no children"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(build("node A\nchildren north\n"),
                         doctest::Contains("no root subtask"), ConfigError);
    CHECK_THROWS_WITH_AS(build("node A\nroot\nchildren north\nnode B\nroot\nchildren south\n"),
                         doctest::Contains("more than one root"), ConfigError);
}

TEST_CASE("primitive leaves are auto-wrapped") {
    Hierarchy h = build_hierarchy(parse_hierarchy_text(kMiniTaxi, "t"));
    CHECK(h.root == "Root");
    for (const char* p : {"north", "south", "east", "west", "pickup", "putdown"}) {
        CHECK(h.primitive_wrappers.count(p) == 1);
        const LAmdp& w = h.node(p);
        CHECK(w.primitive_wrapper);
        CHECK(w.children == std::vector<std::string>{p});
    }
    CHECK_THROWS_WITH_AS(h.node("Missing"), doctest::Contains("no such subtask"), ConfigError);
}

TEST_CASE("expert taxi hierarchy loads and validates cleanly") {
    Hierarchy h = load_hierarchy(hier_path("et.hier"));
    CHECK(h.domain == "taxi");
    CHECK(h.root == "Root");
    CHECK(h.node("Navigate").params ==
          std::vector<std::pair<std::string, std::string>>{{"loc", "depot"}});
    Rng rng(4);
    TaskInstance t = make_task("taxi-classic", rng);
    CHECK(validate_hierarchy(h, t.env.get()).empty());
    CHECK_THROWS_AS(load_hierarchy("/nonexistent/x.hier"), ConfigError);
}

TEST_CASE("validate_hierarchy flags feature and phi problems") {
    Hierarchy h = build_hierarchy(parse_hierarchy_text(
        "version 1\ndomain taxi\n"
        "node Root\nroot\ngoal all_delivered\nphi carried_code\nchildren Nav\n"
        "node Nav\nparam loc depot\ngoal taxi_at(loc)\n"
        "phi no_such_feature taxi_at(loc,loc) taxi_x\nchildren north\n",
        "t"));
    Rng rng(4);
    TaskInstance t = make_task("taxi-small", rng);
    auto issues = validate_hierarchy(h, t.env.get());
    auto has = [&](const std::string& frag) {
        for (const auto& i : issues)
            if (i.find(frag) != std::string::npos) return true;
        return false;
    };
    CHECK(has("unknown feature no_such_feature"));
    CHECK(has("arity mismatch"));
    CHECK(has("phi must include all predicate features"));
    CHECK(has("Root: phi must include all predicate features (all_delivered)"));
}

TEST_CASE("grounding instantiates one AMDP per binding") {
    Hierarchy h = build_hierarchy(parse_hierarchy_text(kMiniTaxi, "t"));
    Rng rng(8);
    TaskInstance t = make_task("taxi-classic", rng);
    auto g = ground(h, *t.env, 0.95);
    CHECK(g.at("Root").size() == 1);
    CHECK(g.at("Navigate").size() == t.env->param_domain("depot").size());
    for (const auto& nav : g.at("Navigate")) {
        CHECK(nav.binding.count("loc") == 1);
        CHECK(nav.id == "Navigate" + binding_suffix(nav.binding));
    }
}

TEST_CASE("abstract state, goal evaluation, and pseudo-rewards") {
    Hierarchy h = build_hierarchy(parse_hierarchy_text(kMiniTaxi, "t"));
    Rng rng(8);
    TaskInstance t = make_task("taxi-classic", rng);
    auto g = ground(h, *t.env, 0.95);
    const GroundedAmdp& nav = g.at("Navigate").front();
    const LAmdp& node = h.node("Navigate");

    AbstractState st = abstract_state(node, nav.binding, *t.env, t.start);
    CHECK(st.values.size() == node.phi.size());
    CHECK(!st.key.empty());

    // Move the taxi onto the bound depot: tau holds, transition pays +1.
    auto* env = dynamic_cast<const TaxiEnv*>(t.env.get());
    REQUIRE(env != nullptr);
    const Depot& d = env->depot(nav.binding.at("loc"));
    GroundState at = t.start;
    at.set("taxi", "x", d.x);
    at.set("taxi", "y", d.y);
    AbstractState st2 = abstract_state(node, nav.binding, *t.env, at);
    CHECK(st2.key != st.key);
    CHECK(std::get<bool>(st2.value_of("taxi_at(loc)")));

    if (!eval_goal(h, nav, st)) {
        CHECK(eval_goal(h, nav, st2));
        std::string a = action_key("north", {});
        CHECK(pseudo_reward(h, nav, st, a, st2) == doctest::Approx(node.pseudo.goal));
        CHECK(pseudo_reward(h, nav, st, a, st) == doctest::Approx(node.pseudo.default_reward));
    }
}

TEST_CASE("phi signatures are stable and phi-sensitive") {
    Hierarchy a = build_hierarchy(parse_hierarchy_text(kMiniTaxi, "t"));
    Hierarchy b = build_hierarchy(parse_hierarchy_text(kMiniTaxi, "t"));
    CHECK(phi_signature(a.node("Navigate")) == phi_signature(b.node("Navigate")));
    LAmdp mutated = a.node("Navigate");
    mutated.phi.push_back(FeatureRef{"taxi_x", {}});
    CHECK(phi_signature(mutated) != phi_signature(a.node("Navigate")));
}

TEST_CASE("add_subtask and prune_subtask round-trip") {
    Hierarchy h = load_hierarchy(hier_path("et.hier"));
    LAmdp noop;
    noop.name = "NoOp";
    noop.goal = {Literal{FeatureRef{"always", {}}, false}};
    noop.phi = {FeatureRef{"always", {}}};
    noop.children = {"north"};

    Hierarchy extended = add_subtask(h, noop, "Root");
    CHECK(extended.nodes.count("NoOp") == 1);
    const auto& kids = extended.node("Root").children;
    CHECK(std::find(kids.begin(), kids.end(), "NoOp") != kids.end());

    CHECK_THROWS_AS(add_subtask(extended, noop, "Root"), ConfigError);  // duplicate
    LAmdp orphan = noop;
    orphan.name = "Orphan";
    CHECK_THROWS_AS(add_subtask(h, orphan, "NoSuchParent"), ConfigError);

    Hierarchy pruned = prune_subtask(extended, "NoOp");
    CHECK(pruned.nodes.count("NoOp") == 0);
    CHECK(pruned.nodes.size() == h.nodes.size());
    for (const auto& [name, n] : h.nodes)
        CHECK(phi_signature(pruned.node(name)) == phi_signature(n));
    CHECK_THROWS_WITH_AS(prune_subtask(h, "Root"), doctest::Contains("cannot prune the root"),
                         ConfigError);
}

TEST_CASE("flat hierarchy exposes every primitive under an identity root") {
    Hierarchy flat = flat_hierarchy();
    CHECK(flat.domain == "any");
    Rng rng(2);
    TaskInstance t = make_task("cleanup-small", rng);
    auto g = ground(flat, *t.env, 0.95);
    REQUIRE(g.at(flat.root).size() == 1);
    const GroundedAmdp& root = g.at(flat.root).front();
    CHECK(root.abstract_actions.size() == t.env->primitive_actions().size());
    // Identity abstraction: distinct ground states get distinct abstract keys.
    const LAmdp& node = flat.node(flat.root);
    GroundState s2 = t.start;
    s2.set("agent", "facing", std::string("east"));
    CHECK(abstract_state(node, {}, *t.env, t.start).key !=
          abstract_state(node, {}, *t.env, s2).key);
}
