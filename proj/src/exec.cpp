#include "palm/exec.hpp"

namespace palm {

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::goal: return "goal";
        case Outcome::fail: return "fail";
        case Outcome::budget_exhausted: return "budget_exhausted";
    }
    return "?";
}

ExecutionContext::ExecutionContext(Hierarchy hierarchy, std::shared_ptr<const Environment> env,
                                   ExecOptions opts, Rng rng)
    : hierarchy_(std::move(hierarchy)), env_(std::move(env)), opts_(opts), rng_(rng) {
    if (hierarchy_.domain != "any" && hierarchy_.domain != env_->domain_name())
        throw ConfigError("hierarchy is for domain '" + hierarchy_.domain +
                          "' but the task is '" + env_->domain_name() + "'");
    grounded_ = ground(hierarchy_, *env_, opts_.gamma);
    for (auto& [name, gs] : grounded_)
        for (auto& g : gs) grounded_by_id_[g.id] = &g;
    for (const auto& [name, n] : hierarchy_.nodes) {
        if (n.primitive_wrapper) continue;
        models_.emplace(name, TabularModel(name, phi_signature(n), opts_.known_threshold,
                                           opts_.gamma, opts_.value_max));
    }
    auto root = grounded_.find(hierarchy_.root);
    if (root == grounded_.end() || root->second.size() != 1)
        throw ConfigError("root subtask must ground to exactly one instance");
}

TabularModel& ExecutionContext::model(const std::string& lamdp_name) {
    auto it = models_.find(lamdp_name);
    if (it == models_.end()) throw ConfigError("no model for subtask " + lamdp_name);
    return it->second;
}

std::int64_t ExecutionContext::unknown_total() const {
    std::int64_t c = 0;
    for (const auto& [_, m] : models_) c += m.unknown_pair_count();
    return c;
}

void ExecutionContext::attach_transferred_model(const std::string& lamdp_name,
                                                const TabularModel& model, bool frozen) {
    auto it = models_.find(lamdp_name);
    if (it == models_.end())
        throw ConfigError("transfer target subtask not in hierarchy: " + lamdp_name);
    std::string expect = phi_signature(hierarchy_.node(lamdp_name));
    if (model.phi_sig() != expect)
        throw ConfigError("transferred model for " + lamdp_name +
                          " has phi signature " + model.phi_sig() + ", hierarchy expects " +
                          expect);
    it->second = model;
    if (frozen) it->second.freeze();

    // Seed the planners of every grounding with the transferred support so a
    // value gradient toward goal entries exists before any state has been
    // visited on this task. Without this, a frozen model never explores and
    // the greedy policy is stuck on zero-value ties. States that only appear
    // as successors have no recorded actions and are pinned terminal; the
    // executor still classifies visited states against tau/chi itself.
    std::map<std::string, std::vector<std::string>> by_state;
    std::set<std::string> successors;
    for (const auto& [k, pair] : it->second.table()) {
        auto sep = k.find('\x1f');
        by_state[k.substr(0, sep)].push_back(k.substr(sep + 1));
        for (const auto& [nk, o] : pair.next) successors.insert(nk);
    }
    for (auto& [s, acts] : by_state) std::sort(acts.begin(), acts.end());
    for (auto& g : grounded_.at(lamdp_name)) {
        IncrementalPlanner& planner = planner_for(g);
        for (const auto& [s, acts] : by_state) planner.add_state(s, false, acts);
        for (const auto& s : successors)
            if (!by_state.count(s)) planner.add_state(s, true, {});
    }
}

bool ExecutionContext::is_ground_action(const std::string& name) const {
    return env_->has_action(name) || hierarchy_.primitive_wrappers.count(name) > 0;
}

const std::string& ExecutionContext::resolve_primitive(const std::string& name) const {
    if (hierarchy_.primitive_wrappers.count(name))
        return hierarchy_.node(name).children.front();
    return name;
}

GroundedAmdp& ExecutionContext::grounded_child(const std::string& name, const Binding& binding) {
    auto it = grounded_by_id_.find(action_key(name, binding));
    if (it == grounded_by_id_.end())
        throw ConfigError("no grounding for abstract action " + action_key(name, binding));
    return *it->second;
}

IncrementalPlanner& ExecutionContext::planner_for(const GroundedAmdp& g) {
    auto it = planners_.find(g.id);
    if (it != planners_.end()) return it->second;
    ViOptions vi;
    vi.gamma = opts_.gamma;
    vi.tolerance = opts_.vi_tolerance;
    vi.max_iterations = opts_.vi_max_iterations;
    return planners_.emplace(g.id, IncrementalPlanner(vi)).first->second;
}

void ExecutionContext::discover(GroundedAmdp& g, IncrementalPlanner& planner,
                                const AbstractState& st, const GroundState& rep) {
    if (g.discovered.count(st.key)) return;
    g.discovered.emplace(st.key, rep);
    bool goal = eval_goal(hierarchy_, g, st);
    bool fail = !goal && eval_fail(hierarchy_, g, st);
    if (goal) g.goal_set.insert(st.key);
    if (fail) g.fail_set.insert(st.key);
    std::vector<std::pair<std::string, Binding>> acts;
    if (!goal && !fail) acts = child_actions(hierarchy_, g, *env_, rep);
    std::vector<std::string> akeys;
    akeys.reserve(acts.size());
    for (const auto& [c, b] : acts) akeys.push_back(action_key(c, b));
    actions_[g.id][st.key] = std::move(acts);
    planner.add_state(st.key, goal || fail, std::move(akeys));
}

GroundState ExecutionContext::execute_primitive(const std::string& action_id,
                                                const GroundState& s) {
    StepOutcome out = env_->step(s, action_id, rng_);
    ++t_;
    if (episode_ != nullptr) {
        episode_->reward += out.reward;
        episode_->trajectory.push_back({action_id, out.reward});
    }
    return std::move(out.next_state);
}

SubtaskReturn ExecutionContext::palm(GroundedAmdp& g, GroundState s, int depth) {
    const LAmdp& node = hierarchy_.node(g.lamdp_name);
    TabularModel& model = models_.at(g.lamdp_name);
    IncrementalPlanner& planner = planner_for(g);
    bool all_known = true;
    AbstractState st = abstract_state(node, g.binding, *env_, s);
    int iters = 0;

    while (true) {
        discover(g, planner, st, s);
        if (g.goal_set.count(st.key)) return {std::move(s), all_known, Outcome::goal};
        if (g.fail_set.count(st.key)) return {std::move(s), all_known, Outcome::fail};
        // The environment ended but this subtask's tau doesn't hold: the
        // subtask cannot make further progress, so it reports failure.
        if (env_->terminal_status(s) != Terminal::none)
            return {std::move(s), all_known, Outcome::fail};
        if (t_ >= opts_.episode_budget || iters >= opts_.subtask_budget)
            return {std::move(s), all_known, Outcome::budget_exhausted};
        ++iters;

        const auto& avail = actions_.at(g.id).at(st.key);
        if (avail.empty()) return {std::move(s), all_known, Outcome::fail};
        std::vector<std::string> akeys;
        akeys.reserve(avail.size());
        for (const auto& [c, b] : avail) akeys.push_back(action_key(c, b));

        planner.sync(model);
        planner.resolve(model);
        std::size_t choice = planner.greedy(model, st.key, akeys);
        const auto& [child_name, child_binding] = avail[choice];

        GroundState s2;
        bool child_known = true;
        if (is_ground_action(child_name)) {
            s2 = execute_primitive(resolve_primitive(child_name), s);
        } else {
            SubtaskReturn r = palm(grounded_child(child_name, child_binding), s, depth + 1);
            s2 = std::move(r.ground_state);
            child_known = r.all_known;
            if (r.outcome == Outcome::budget_exhausted) {
                if (t_ >= opts_.episode_budget)
                    return {std::move(s2), all_known, Outcome::budget_exhausted};
                // Subtask-budget exhaustion is a partial execution, not a
                // sample of run-to-termination dynamics: never count it.
                child_known = false;
            }
        }

        AbstractState st2 = abstract_state(node, g.binding, *env_, s2);
        double r = pseudo_reward(hierarchy_, g, st, akeys[choice], st2);
        bool counted_known = opts_.gating_enabled ? child_known : true;
        bool was_known = model.observe(st.key, akeys[choice], st2.key, r, counted_known);
        all_known = all_known && was_known;
        if (opts_.audit)
            audit_.push_back({depth, g.id, st.key, akeys[choice], st2.key, r, was_known,
                              child_known, counted_known});

        s = std::move(s2);
        st = std::move(st2);
    }
}

EpisodeRecord ExecutionContext::run_episode(const GroundState& s0) {
    EpisodeRecord rec;
    t_ = 0;
    episode_ = &rec;
    GroundedAmdp& root = grounded_.at(hierarchy_.root).front();
    SubtaskReturn r = palm(root, s0, 0);
    episode_ = nullptr;
    rec.steps = t_;
    rec.outcome = r.outcome;
    rec.unknown_total = unknown_total();
    return rec;
}

GroundedAmdp& ExecutionContext::grounding(const std::string& id) {
    auto it = grounded_by_id_.find(id);
    if (it == grounded_by_id_.end()) throw ConfigError("no grounding with id " + id);
    return *it->second;
}

const std::vector<std::pair<std::string, Binding>>& ExecutionContext::available_actions(
    const GroundedAmdp& g, const std::string& abstract_key) const {
    auto git = actions_.find(g.id);
    if (git == actions_.end()) throw ConfigError("no discovered states for " + g.id);
    auto it = git->second.find(abstract_key);
    if (it == git->second.end())
        throw ConfigError("abstract state not discovered by " + g.id + ": " + abstract_key);
    return it->second;
}

std::map<std::string, std::string> ExecutionContext::greedy_policy(const GroundedAmdp& g) {
    TabularModel& model = models_.at(g.lamdp_name);
    IncrementalPlanner& planner = planner_for(g);
    planner.sync(model);
    planner.resolve(model);
    std::map<std::string, std::string> out;
    for (const auto& [key, rep] : g.discovered) {
        if (g.goal_set.count(key) || g.fail_set.count(key)) continue;
        const auto& avail = actions_.at(g.id).at(key);
        if (avail.empty()) continue;
        std::vector<std::string> akeys;
        akeys.reserve(avail.size());
        for (const auto& [c, b] : avail) akeys.push_back(action_key(c, b));
        out[key] = akeys[planner.greedy(model, key, akeys)];
    }
    return out;
}

}  // namespace palm
