#include "palm/lamdp.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace palm {

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

FeatureRef parse_feature_ref(const std::string& tok, const std::string& where) {
    FeatureRef ref;
    auto open = tok.find('(');
    if (open == std::string::npos) {
        ref.name = tok;
        return ref;
    }
    if (tok.back() != ')') throw ConfigError("malformed feature reference '" + tok + "' " + where);
    ref.name = tok.substr(0, open);
    std::string args = tok.substr(open + 1, tok.size() - open - 2);
    std::string cur;
    // Cell literals contain commas, so args are separated by ';' when a value
    // itself has a comma; plain ',' works for the common case.
    for (std::size_t i = 0; i <= args.size(); ++i) {
        if (i == args.size() || args[i] == ',') {
            if (!cur.empty()) ref.args.push_back(cur);
            cur.clear();
        } else {
            cur += args[i];
        }
    }
    return ref;
}

Literal parse_literal(std::string tok, const std::string& where) {
    Literal lit;
    if (!tok.empty() && tok[0] == '!') {
        lit.negated = true;
        tok = tok.substr(1);
    }
    lit.feature = parse_feature_ref(tok, where);
    return lit;
}

}  // namespace

std::string FeatureRef::display() const {
    if (args.empty()) return name;
    std::string out = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += args[i];
    }
    return out + ")";
}

std::string binding_suffix(const Binding& b) {
    if (b.empty()) return "";
    std::string out = "[";
    bool first = true;
    for (const auto& [k, v] : b) {
        if (!first) out += ",";
        out += k + "=" + v;
        first = false;
    }
    return out + "]";
}

std::string action_key(const std::string& child, const Binding& binding) {
    return child + binding_suffix(binding);
}

const LAmdp& Hierarchy::node(const std::string& name) const {
    auto it = nodes.find(name);
    if (it == nodes.end()) throw ConfigError("no such subtask: " + name);
    return it->second;
}

const Value& AbstractState::value_of(const std::string& display_name) const {
    for (const auto& [n, v] : values)
        if (n == display_name) return v;
    throw ConfigError("feature " + display_name + " not in abstract state");
}

// -------- parsing --------

TaskGraphSpec parse_hierarchy_text(const std::string& text, const std::string& origin) {
    TaskGraphSpec spec;
    LAmdp* cur = nullptr;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& kw = toks[0];
        std::string where = "(line " + std::to_string(lineno) + ")";
        if (kw == "version") {
            if (toks.size() != 2) fail("version expects one value");
            spec.version = std::stoi(toks[1]);
        } else if (kw == "domain") {
            if (toks.size() != 2) fail("domain expects one value");
            spec.domain = toks[1];
        } else if (kw == "node") {
            if (toks.size() != 2) fail("node expects a name");
            spec.nodes.push_back(LAmdp{});
            cur = &spec.nodes.back();
            cur->name = toks[1];
        } else if (cur == nullptr) {
            fail("directive '" + kw + "' before any node");
        } else if (kw == "param") {
            if (toks.size() != 3) fail("param expects name and kind");
            cur->params.push_back({toks[1], toks[2]});
        } else if (kw == "goal") {
            for (std::size_t i = 1; i < toks.size(); ++i)
                cur->goal.push_back(parse_literal(toks[i], where));
        } else if (kw == "fail") {
            for (std::size_t i = 1; i < toks.size(); ++i)
                cur->fail.push_back(parse_literal(toks[i], where));
        } else if (kw == "phi") {
            for (std::size_t i = 1; i < toks.size(); ++i)
                cur->phi.push_back(parse_feature_ref(toks[i], where));
        } else if (kw == "children") {
            for (std::size_t i = 1; i < toks.size(); ++i) cur->children.push_back(toks[i]);
        } else if (kw == "root") {
            cur->is_root = true;
        } else if (kw == "shielded") {
            cur->shielded = true;
        } else if (kw == "reward") {
            for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
                if (toks[i] == "goal") cur->pseudo.goal = std::stod(toks[i + 1]);
                else if (toks[i] == "fail") cur->pseudo.fail = std::stod(toks[i + 1]);
                else if (toks[i] == "default") cur->pseudo.default_reward = std::stod(toks[i + 1]);
                else fail("unknown reward field " + toks[i]);
            }
        } else {
            fail("unknown directive '" + kw + "'");
        }
    }
    return spec;
}

// -------- construction --------

Hierarchy build_hierarchy(const TaskGraphSpec& spec) {
    Hierarchy h;
    h.domain = spec.domain;
    std::map<std::string, const LAmdp*> declared;
    for (const auto& n : spec.nodes) {
        if (declared.count(n.name)) throw ConfigError("duplicate subtask name: " + n.name);
        declared[n.name] = &n;
    }
    // Cycle check over declared nodes.
    std::map<std::string, int> mark;  // 0 unvisited, 1 on stack, 2 done
    std::vector<std::string> order;   // reverse topological: children first
    std::function<void(const std::string&)> visit = [&](const std::string& name) {
        auto it = declared.find(name);
        if (it == declared.end()) return;  // primitive leaf
        int& m = mark[name];
        if (m == 1) throw ConfigError("cycle in task graph at " + name);
        if (m == 2) return;
        m = 1;
        for (const auto& c : it->second->children) visit(c);
        m = 2;
        order.push_back(name);
    };
    for (const auto& n : spec.nodes) visit(n.name);

    // Wrap primitive leaves first, then build composites children-before-parents.
    for (const auto& name : order) {
        const LAmdp& n = *declared.at(name);
        if (n.children.empty()) throw ConfigError("subtask " + n.name + " has no children");
        for (const auto& c : n.children) {
            if (c == n.name) throw ConfigError("subtask " + n.name + " references itself");
            if (c == "@primitives" || declared.count(c)) continue;
            if (!h.primitive_wrappers.count(c)) {
                LAmdp w;
                w.name = c;
                w.primitive_wrapper = true;
                w.children = {c};
                h.nodes[c] = w;
                h.primitive_wrappers.insert(c);
            }
        }
        h.nodes[name] = n;
        if (n.is_root) {
            if (!h.root.empty()) throw ConfigError("more than one root subtask");
            h.root = name;
        }
    }
    if (h.root.empty()) throw ConfigError("no root subtask declared");
    return h;
}

Hierarchy flat_hierarchy() {
    TaskGraphSpec spec;
    spec.domain = "any";
    LAmdp root;
    root.name = "Root";
    root.is_root = true;
    root.goal = {Literal{FeatureRef{"env_goal", {}}, false}};
    root.phi = {FeatureRef{"env_goal", {}}, FeatureRef{"ground_key", {}}};
    root.children = {"@primitives"};
    spec.nodes.push_back(root);
    return build_hierarchy(spec);
}

Hierarchy load_hierarchy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open hierarchy file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return build_hierarchy(parse_hierarchy_text(ss.str(), path));
}

// -------- grounding --------

namespace {

std::vector<Binding> enumerate_bindings(const LAmdp& n, const Environment& env,
                                        const Binding& inherited) {
    std::vector<Binding> out = {Binding{}};
    for (const auto& [pname, kind] : n.params) {
        std::vector<std::string> values;
        auto it = inherited.find(pname);
        if (it != inherited.end()) {
            values = {it->second};
        } else {
            values = env.param_domain(kind);
            if (values.empty())
                throw ConfigError("empty parameter domain '" + kind + "' for subtask " + n.name);
        }
        std::vector<Binding> next;
        for (const auto& b : out) {
            for (const auto& v : values) {
                Binding nb = b;
                nb[pname] = v;
                next.push_back(std::move(nb));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<std::pair<std::string, Binding>> grounded_actions(const Hierarchy& h, const LAmdp& n,
                                                              const Binding& binding,
                                                              const Environment& env) {
    std::vector<std::pair<std::string, Binding>> out;
    for (const auto& c : n.children) {
        if (c == "@primitives") {
            for (const auto& a : env.primitive_actions()) out.push_back({a.id, {}});
            continue;
        }
        auto it = h.nodes.find(c);
        if (it == h.nodes.end() || it->second.primitive_wrapper) {
            out.push_back({c, {}});
            continue;
        }
        for (auto& b : enumerate_bindings(it->second, env, binding)) out.push_back({c, b});
    }
    return out;
}

}  // namespace

std::map<std::string, std::vector<GroundedAmdp>> ground(const Hierarchy& h, const Environment& env,
                                                        double discount) {
    std::map<std::string, std::vector<GroundedAmdp>> out;
    for (const auto& [name, n] : h.nodes) {
        if (n.primitive_wrapper) continue;
        for (auto& b : enumerate_bindings(n, env, {})) {
            GroundedAmdp g;
            g.lamdp_name = name;
            g.binding = b;
            g.id = action_key(name, b);
            g.discount = discount;
            g.abstract_actions = grounded_actions(h, n, b, env);
            out[name].push_back(std::move(g));
        }
    }
    return out;
}

// -------- abstraction and predicates --------

AbstractState abstract_state(const LAmdp& lamdp, const Binding& binding, const Environment& env,
                             const GroundState& s) {
    const FeatureRegistry& reg = FeatureRegistry::for_domain(env.domain_name());
    AbstractState out;
    out.values.reserve(lamdp.phi.size());
    std::string key;
    key.reserve(64);
    std::vector<std::string> resolved;
    for (const auto& ref : lamdp.phi) {
        resolved.clear();
        for (const auto& a : ref.args) {
            auto it = binding.find(a);
            resolved.push_back(it == binding.end() ? a : it->second);
        }
        Value v = reg.eval(ref.name, resolved, env, s);
        key += ref.display();
        key += '=';
        key += value_to_string(v);
        key += '|';
        out.values.push_back({ref.display(), std::move(v)});
    }
    out.key = std::move(key);
    return out;
}

namespace {
bool eval_conjunction(const std::vector<Literal>& lits, const AbstractState& s) {
    if (lits.empty()) return false;
    for (const auto& lit : lits) {
        const Value& v = s.value_of(lit.feature.display());
        if (!std::holds_alternative<bool>(v))
            throw ConfigError("predicate feature " + lit.feature.display() + " is not boolean");
        if (std::get<bool>(v) == lit.negated) return false;
    }
    return true;
}
}  // namespace

bool eval_goal(const Hierarchy& h, const GroundedAmdp& g, const AbstractState& s) {
    return eval_conjunction(h.node(g.lamdp_name).goal, s);
}
bool eval_fail(const Hierarchy& h, const GroundedAmdp& g, const AbstractState& s) {
    return eval_conjunction(h.node(g.lamdp_name).fail, s);
}

double pseudo_reward(const Hierarchy& h, const GroundedAmdp& g, const AbstractState&,
                     const std::string&, const AbstractState& s2) {
    const LAmdp& n = h.node(g.lamdp_name);
    if (eval_conjunction(n.goal, s2)) return n.pseudo.goal;
    if (eval_conjunction(n.fail, s2)) return n.pseudo.fail;
    return n.pseudo.default_reward;
}

std::vector<std::pair<std::string, Binding>> child_actions(const Hierarchy& h,
                                                           const GroundedAmdp& g,
                                                           const Environment& env,
                                                           const GroundState& rep) {
    const LAmdp& n = h.node(g.lamdp_name);
    if (!n.shielded) return g.abstract_actions;
    const ShieldFn* shield = shield_for_domain(env.domain_name());
    if (shield == nullptr) return g.abstract_actions;
    std::vector<std::pair<std::string, Binding>> out;
    for (const auto& a : g.abstract_actions)
        if ((*shield)(env, rep, a.first, a.second)) out.push_back(a);
    return out;
}

// -------- editing --------

Hierarchy add_subtask(const Hierarchy& h, const LAmdp& node, const std::string& parent) {
    if (h.nodes.count(node.name))
        throw ConfigError("subtask " + node.name + " already exists (would create a cycle)");
    Hierarchy out = h;
    out.node(parent);  // must exist
    for (const auto& c : node.children) {
        if (c == "@primitives") continue;
        if (!out.nodes.count(c)) throw ConfigError("child " + c + " of new subtask not in hierarchy");
    }
    out.nodes[node.name] = node;
    out.nodes[parent].children.push_back(node.name);
    return out;
}

Hierarchy prune_subtask(const Hierarchy& h, const std::string& name) {
    if (name == h.root) throw ConfigError("cannot prune the root subtask");
    h.node(name);
    Hierarchy out = h;
    out.nodes.erase(name);
    for (auto& [_, n] : out.nodes)
        n.children.erase(std::remove(n.children.begin(), n.children.end(), name),
                         n.children.end());
    // Drop anything no longer reachable from the root.
    std::set<std::string> live;
    std::function<void(const std::string&)> visit = [&](const std::string& nm) {
        if (!out.nodes.count(nm) || live.count(nm)) return;
        live.insert(nm);
        for (const auto& c : out.nodes[nm].children) visit(c);
    };
    visit(out.root);
    for (auto it = out.nodes.begin(); it != out.nodes.end();) {
        if (!live.count(it->first)) {
            out.primitive_wrappers.erase(it->first);
            it = out.nodes.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

// -------- validation --------

std::vector<std::string> validate_hierarchy(const Hierarchy& h, const Environment* env) {
    std::vector<std::string> out;
    if (h.root.empty() || !h.nodes.count(h.root)) {
        out.push_back("hierarchy has no root subtask");
        return out;
    }
    std::string domain = h.domain;
    if (domain == "any" && env != nullptr) domain = env->domain_name();
    const FeatureRegistry* reg =
        (domain == "any") ? nullptr : &FeatureRegistry::for_domain(domain);

    for (const auto& [name, n] : h.nodes) {
        if (n.primitive_wrapper) continue;
        if (n.children.empty()) out.push_back(name + ": no children");
        std::set<std::string> phi_names;
        for (const auto& f : n.phi) {
            phi_names.insert(f.display());
            if (reg != nullptr) {
                if (!reg->has(f.name)) {
                    out.push_back(name + ": unknown feature " + f.name);
                } else if (reg->def(f.name).arity != static_cast<int>(f.args.size())) {
                    out.push_back(name + ": feature " + f.name + " arity mismatch");
                }
            }
        }
        for (const auto* lits : {&n.goal, &n.fail})
            for (const auto& lit : *lits)
                if (!phi_names.count(lit.feature.display()))
                    out.push_back(name + ": phi must include all predicate features (" +
                                  lit.feature.display() + ")");
        for (const auto& [pname, kind] : n.params) {
            bool used = false;
            for (const auto& f : n.phi)
                for (const auto& a : f.args) used = used || a == pname;
            if (!used)
                out.push_back(name + ": phi must include a feature over parameter " + pname);
            (void)kind;
        }
        for (const auto& c : n.children)
            if (c == name) out.push_back(name + ": references itself");
    }

    if (env != nullptr && out.empty()) {
        // Sampled semantic checks: root terminal equivalence and tau/chi
        // exclusivity along a random walk.
        auto grounded = ground(h, *env, 0.95);
        Rng rng(0xC0FFEE);
        GroundState s = env->initial_state();
        const auto& acts = env->primitive_actions();
        for (int step = 0; step < 300; ++step) {
            for (const auto& [name, gs] : grounded) {
                for (const auto& g : gs) {
                    AbstractState as = abstract_state(h.node(name), g.binding, *env, s);
                    bool tau = eval_goal(h, g, as);
                    bool chi = eval_fail(h, g, as);
                    if (tau && chi) {
                        out.push_back(name + ": tau and chi both hold on a sampled state");
                        return out;
                    }
                    if (name == h.root && tau != (env->terminal_status(s) == Terminal::goal)) {
                        out.push_back("root terminal conditions differ from the task MDP");
                        return out;
                    }
                }
            }
            if (env->terminal_status(s) != Terminal::none) break;
            s = env->step(s, acts[static_cast<std::size_t>(rng.next_int(
                                 static_cast<int>(acts.size())))].id,
                          rng)
                    .next_state;
        }
    }
    return out;
}

std::string phi_signature(const LAmdp& lamdp) {
    std::uint64_t hash = fnv1a(lamdp.name);
    for (const auto& [p, k] : lamdp.params) hash = fnv1a(p + ":" + k + ";", hash);
    for (const auto& f : lamdp.phi) hash = fnv1a(f.display() + ";", hash);
    return hex64(hash);
}

}  // namespace palm
