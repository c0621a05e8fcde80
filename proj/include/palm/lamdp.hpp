#pragma once

#include <set>
#include <unordered_map>

#include "palm/features.hpp"

namespace palm {

using Binding = std::map<std::string, std::string>;

std::string binding_suffix(const Binding& b);  // "[loc=R]" or ""

// Reference to a registered feature extractor. Args are either subtask
// parameter names (resolved through the binding) or literal values.
struct FeatureRef {
    std::string name;
    std::vector<std::string> args;
    std::string display() const;
    bool operator==(const FeatureRef&) const = default;
};

// One conjunct of a goal/failure predicate: a boolean feature, possibly negated.
struct Literal {
    FeatureRef feature;
    bool negated = false;
};

struct PseudoRewardConfig {
    double goal = 1.0;
    double fail = -1.0;
    double default_reward = 0.0;
};

struct LAmdp {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;  // (name, kind)
    std::vector<Literal> goal;                                 // tau, conjunction
    std::vector<Literal> fail;                                 // chi, conjunction
    std::vector<FeatureRef> phi;
    std::vector<std::string> children;  // node names, primitives, or "@primitives"
    PseudoRewardConfig pseudo;
    bool is_root = false;
    bool shielded = false;
    bool primitive_wrapper = false;
};

// Parsed task-graph spec: the declarative input of hierarchy construction.
struct TaskGraphSpec {
    std::string domain = "any";  // taxi | cleanup | any
    int version = 1;
    std::vector<LAmdp> nodes;    // file order; leaves referenced but not declared
                                 // are primitive actions
};

struct Hierarchy {
    std::string domain = "any";
    std::map<std::string, LAmdp> nodes;
    std::string root;
    std::set<std::string> primitive_wrappers;

    const LAmdp& node(const std::string& name) const;
};

struct AbstractState {
    std::vector<std::pair<std::string, Value>> values;  // phi order, display names
    std::string key;

    const Value& value_of(const std::string& display_name) const;
};

// An L-AMDP instantiated against one parameter binding on a concrete task.
struct GroundedAmdp {
    std::string lamdp_name;
    Binding binding;
    std::string id;  // lamdp_name + binding_suffix
    double discount = 0.95;
    // Full grounded abstract action set, stable order. First element of a pair
    // names either a child node or a primitive action.
    std::vector<std::pair<std::string, Binding>> abstract_actions;
    // Lazily discovered sets, owned by the episode loop.
    std::unordered_map<std::string, GroundState> discovered;  // key -> representative
    std::set<std::string> goal_set, fail_set;
};

Hierarchy build_hierarchy(const TaskGraphSpec& spec);

// One GroundedAmdp per binding, per node, keyed by node name.
std::map<std::string, std::vector<GroundedAmdp>> ground(const Hierarchy& h,
                                                        const Environment& env,
                                                        double discount);

AbstractState abstract_state(const LAmdp& lamdp, const Binding& binding, const Environment& env,
                             const GroundState& s);

bool eval_goal(const Hierarchy& h, const GroundedAmdp& g, const AbstractState& s);
bool eval_fail(const Hierarchy& h, const GroundedAmdp& g, const AbstractState& s);
double pseudo_reward(const Hierarchy& h, const GroundedAmdp& g, const AbstractState& s,
                     const std::string& action_key, const AbstractState& s2);

// Available abstract actions from s. For shielded nodes, bindings whose
// grounded execution provably self-transitions from `rep` are excluded.
std::vector<std::pair<std::string, Binding>> child_actions(const Hierarchy& h,
                                                           const GroundedAmdp& g,
                                                           const Environment& env,
                                                           const GroundState& rep);

Hierarchy add_subtask(const Hierarchy& h, const LAmdp& node, const std::string& parent);
Hierarchy prune_subtask(const Hierarchy& h, const std::string& name);

TaskGraphSpec parse_hierarchy_text(const std::string& text, const std::string& origin);
Hierarchy load_hierarchy(const std::string& path);
std::vector<std::string> validate_hierarchy(const Hierarchy& h, const Environment* env);

std::string phi_signature(const LAmdp& lamdp);
std::string action_key(const std::string& child, const Binding& binding);

// The degenerate flat hierarchy: a root over all primitives with identity
// abstraction.
Hierarchy flat_hierarchy();

}  // namespace palm
