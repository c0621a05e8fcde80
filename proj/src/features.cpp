#include "palm/features.hpp"

#include "palm/cleanup.hpp"
#include "palm/taxi.hpp"

namespace palm {

const FeatureDef& FeatureRegistry::def(const std::string& name) const {
    auto it = features_.find(name);
    if (it == features_.end()) throw ConfigError("unknown feature extractor: " + name);
    return it->second;
}

Value FeatureRegistry::eval(const std::string& name, const std::vector<std::string>& args,
                            const Environment& env, const GroundState& s) const {
    const FeatureDef& d = def(name);
    if (static_cast<int>(args.size()) != d.arity)
        throw ConfigError("feature " + name + " expects " + std::to_string(d.arity) + " args");
    return d.fn(env, args, s);
}

namespace {

void add_generic(FeatureRegistry& r) {
    r.add("ground_key", 0,
          [](const Environment&, const auto&, const GroundState& s) -> Value {
              return canonical_key(s);
          });
    r.add("env_goal", 0, [](const Environment& env, const auto&, const GroundState& s) -> Value {
        return env.terminal_status(s) == Terminal::goal;
    });
    r.add("always", 0, [](const Environment&, const auto&, const GroundState&) -> Value {
        return true;
    });
    // Bound parameter value as a state constant. Include it in phi when two
    // bindings would otherwise alias the same abstract key onto different
    // dynamics (models are shared per subtask template).
    r.add("tag", 1, [](const Environment&, const auto& args, const GroundState&) -> Value {
        return args[0];
    });
}

std::vector<std::string> taxi_passengers(const Environment& env) {
    return env.param_domain("passenger");
}

bool taxi_delivered(const TaxiEnv& env, const GroundState& s, const std::string& p) {
    if (s.get_bool(p, "in_taxi")) return false;
    const Depot& d = env.depot(s.get_str(p, "goal"));
    return s.get_int(p, "x") == d.x && s.get_int(p, "y") == d.y;
}

FeatureRegistry make_taxi_registry() {
    FeatureRegistry r;
    add_generic(r);
    r.add("taxi_x", 0, [](const Environment&, const auto&, const GroundState& s) -> Value {
        return s.get_int("taxi", "x");
    });
    r.add("taxi_y", 0, [](const Environment&, const auto&, const GroundState& s) -> Value {
        return s.get_int("taxi", "y");
    });
    r.add("taxi_at", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              const Depot& d = static_cast<const TaxiEnv&>(env).depot(args[0]);
              return s.get_int("taxi", "x") == d.x && s.get_int("taxi", "y") == d.y;
          });
    r.add("taxi_depot", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              int x = s.get_int("taxi", "x"), y = s.get_int("taxi", "y");
              for (const auto& d : static_cast<const TaxiEnv&>(env).variant().depots)
                  if (d.x == x && d.y == y) return d.id;
              return std::string("-");
          });
    r.add("nav_dx", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              const Depot& d = static_cast<const TaxiEnv&>(env).depot(args[0]);
              return d.x - s.get_int("taxi", "x");
          });
    r.add("nav_dy", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              const Depot& d = static_cast<const TaxiEnv&>(env).depot(args[0]);
              return d.y - s.get_int("taxi", "y");
          });
    r.add("in_taxi", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_bool(args[0], "in_taxi");
    });
    r.add("fresh", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_bool(args[0], "fresh");
    });
    r.add("pass_depot", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              if (s.get_bool(args[0], "in_taxi")) return std::string("taxi");
              int x = s.get_int(args[0], "x"), y = s.get_int(args[0], "y");
              for (const auto& d : static_cast<const TaxiEnv&>(env).variant().depots)
                  if (d.x == x && d.y == y) return d.id;
              return std::string("-");
          });
    r.add("pass_x", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_int(args[0], "x");
    });
    r.add("pass_y", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_int(args[0], "y");
    });
    r.add("goal_depot", 1,
          [](const Environment&, const auto& args, const GroundState& s) -> Value {
              return s.get_str(args[0], "goal");
          });
    r.add("delivered", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              return taxi_delivered(static_cast<const TaxiEnv&>(env), s, args[0]);
          });
    r.add("all_delivered", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              for (const auto& p : taxi_passengers(env))
                  if (!taxi_delivered(static_cast<const TaxiEnv&>(env), s, p)) return false;
              return true;
          });
    r.add("stale_dest", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              // A carried passenger whose goal depot differs from the current
              // navigation target invalidates the trip (fickle switch).
              for (const auto& p : taxi_passengers(env))
                  if (s.get_bool(p, "in_taxi") && s.get_str(p, "goal") != args[0]) return true;
              return false;
          });
    r.add("carried_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              int code = 0, bit = 1;
              for (const auto& p : taxi_passengers(env)) {
                  if (s.get_bool(p, "in_taxi")) code |= bit;
                  bit <<= 1;
              }
              return code;
          });
    r.add("delivered_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              int code = 0, bit = 1;
              for (const auto& p : taxi_passengers(env)) {
                  if (taxi_delivered(static_cast<const TaxiEnv&>(env), s, p)) code |= bit;
                  bit <<= 1;
              }
              return code;
          });
    return r;
}

std::pair<int, int> parse_cell(const std::string& cell) {
    auto comma = cell.find(',');
    if (comma == std::string::npos) throw ConfigError("bad cell value: " + cell);
    return {std::stoi(cell.substr(0, comma)), std::stoi(cell.substr(comma + 1))};
}

bool cleanup_next_to(const GroundState& s, const std::string& b) {
    int ax = s.get_int("agent", "x"), ay = s.get_int("agent", "y");
    int bx = s.get_int(b, "x"), by = s.get_int(b, "y");
    return std::abs(ax - bx) + std::abs(ay - by) == 1;
}

FeatureRegistry make_cleanup_registry() {
    FeatureRegistry r;
    add_generic(r);
    r.add("agent_x", 0, [](const Environment&, const auto&, const GroundState& s) -> Value {
        return s.get_int("agent", "x");
    });
    r.add("agent_y", 0, [](const Environment&, const auto&, const GroundState& s) -> Value {
        return s.get_int("agent", "y");
    });
    r.add("facing", 0, [](const Environment&, const auto&, const GroundState& s) -> Value {
        return s.get_str("agent", "facing");
    });
    r.add("facing_is", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_str("agent", "facing") == args[0];
    });
    r.add("agent_at", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        auto [x, y] = parse_cell(args[0]);
        return s.get_int("agent", "x") == x && s.get_int("agent", "y") == y;
    });
    r.add("rel_dx", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        auto [x, y] = parse_cell(args[0]);
        (void)y;
        return x - s.get_int("agent", "x");
    });
    r.add("rel_dy", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        auto [x, y] = parse_cell(args[0]);
        (void)x;
        return y - s.get_int("agent", "y");
    });
    r.add("block_x", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_int(args[0], "x");
    });
    r.add("block_y", 1, [](const Environment&, const auto& args, const GroundState& s) -> Value {
        return s.get_int(args[0], "y");
    });
    r.add("agent_next_to", 1,
          [](const Environment&, const auto& args, const GroundState& s) -> Value {
              return cleanup_next_to(s, args[0]);
          });
    r.add("block_in_room", 2,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              const auto& l = static_cast<const CleanupEnv&>(env).layout();
              char room = l.room_of(s.get_int(args[0], "x"), s.get_int(args[0], "y"));
              return room != '\0' && std::string(1, room) == args[1];
          });
    r.add("block_room", 1,
          [](const Environment& env, const auto& args, const GroundState& s) -> Value {
              const auto& l = static_cast<const CleanupEnv&>(env).layout();
              char room = l.room_of(s.get_int(args[0], "x"), s.get_int(args[0], "y"));
              return room == '\0' ? std::string("-") : std::string(1, room);
          });
    r.add("blocks_rooms_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              const auto& ce = static_cast<const CleanupEnv&>(env);
              std::string code;
              for (const auto& b : ce.block_ids()) {
                  char room = ce.layout().room_of(s.get_int(b, "x"), s.get_int(b, "y"));
                  code += (room == '\0') ? '-' : room;
              }
              return code;
          });
    r.add("blocks_pos_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              const auto& ce = static_cast<const CleanupEnv&>(env);
              std::string code;
              for (const auto& b : ce.block_ids()) {
                  code += std::to_string(s.get_int(b, "x")) + "," +
                          std::to_string(s.get_int(b, "y")) + ";";
              }
              return code;
          });
    r.add("adjacency_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              const auto& ce = static_cast<const CleanupEnv&>(env);
              int code = 0, bit = 1;
              for (const auto& b : ce.block_ids()) {
                  if (cleanup_next_to(s, b)) code |= bit;
                  bit <<= 1;
              }
              return code;
          });
    r.add("pull_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              // Which block the agent currently faces with a free cell behind
              // it to step back into -- exactly what pull's outcome depends on.
              const auto& ce = static_cast<const CleanupEnv&>(env);
              int ax = s.get_int("agent", "x"), ay = s.get_int("agent", "y");
              const std::string& f = s.get_str("agent", "facing");
              int fx = f == "east" ? 1 : f == "west" ? -1 : 0;
              int fy = f == "north" ? 1 : f == "south" ? -1 : 0;
              int kx = ax - fx, ky = ay - fy;
              if (ce.layout().wall(kx, ky) || ce.occupied_by_block(s, kx, ky)) return 0;
              int code = 0, bit = 1;
              for (const auto& b : ce.block_ids()) {
                  if (s.get_int(b, "x") == ax + fx && s.get_int(b, "y") == ay + fy) code |= bit;
                  bit <<= 1;
              }
              return code;
          });
    r.add("targets_done", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              return env.terminal_status(s) == Terminal::goal;
          });
    r.add("targets_code", 0,
          [](const Environment& env, const auto&, const GroundState& s) -> Value {
              const auto& ce = static_cast<const CleanupEnv&>(env);
              int code = 0, bit = 1;
              for (const auto& b : ce.layout().blocks) {
                  char room = ce.layout().room_of(s.get_int(b.id, "x"), s.get_int(b.id, "y"));
                  bool done = room != '\0' && ce.layout().room_colors.at(room) == b.color;
                  if (b.target && done) code |= bit;
                  bit <<= 1;
              }
              return code;
          });
    return r;
}

// Shield for the wrapped-primitive Cleanup hierarchy: offer only actions whose
// grounded execution provably changes the state.
bool cleanup_shield(const Environment& env, const GroundState& s, const std::string& child,
                    const std::map<std::string, std::string>& binding) {
    auto advance = [&](const GroundState& from, const std::string& act) {
        return env.outcomes(from, act)[0].second.next_state;
    };
    auto dir_of_go = [&](const std::string& name) -> std::string {
        if (name == "GoNorth") return "north";
        if (name == "GoSouth") return "south";
        if (name == "GoEast") return "east";
        if (name == "GoWest") return "west";
        return "";
    };
    std::string dir = dir_of_go(child);
    if (!dir.empty()) {
        auto it = binding.find("dest");
        if (it == binding.end()) return true;
        auto comma = it->second.find(',');
        int dx = std::stoi(it->second.substr(0, comma));
        int dy = std::stoi(it->second.substr(comma + 1));
        int ax = s.get_int("agent", "x"), ay = s.get_int("agent", "y");
        // A wrapped move is offered only toward the cell one legal step away
        // (a push counts: the agent ends in the pushed block's old cell).
        // Anything farther is a chain of these, so the root's abstract steps
        // coincide with ground steps and its optimum is the ground optimum.
        GroundState one = advance(s, dir);
        if (one == s) return false;
        return one.get_int("agent", "x") == dx && one.get_int("agent", "y") == dy;
    }
    if (child == "Look") {
        auto it = binding.find("dir");
        if (it == binding.end()) return true;
        if (s.get_str("agent", "facing") == it->second) return false;
        // The facing change must be achievable by one step from here.
        return !(advance(s, it->second) == s);
    }
    if (env.has_action(child)) {  // wrapped primitive, e.g. pull
        return !(advance(s, child) == s);
    }
    return true;
}

}  // namespace

const FeatureRegistry& FeatureRegistry::for_domain(const std::string& domain) {
    static const FeatureRegistry taxi = make_taxi_registry();
    static const FeatureRegistry cleanup = make_cleanup_registry();
    if (domain == "taxi") return taxi;
    if (domain == "cleanup") return cleanup;
    throw ConfigError("no feature registry for domain: " + domain);
}

const ShieldFn* shield_for_domain(const std::string& domain) {
    static const ShieldFn cleanup = cleanup_shield;
    if (domain == "cleanup") return &cleanup;
    return nullptr;
}

}  // namespace palm
