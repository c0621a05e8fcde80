#include "palm/taxi.hpp"

#include <algorithm>

namespace palm {

namespace {

const std::vector<Action> kTaxiActions = {
    {"north", Action::Kind::primitive}, {"south", Action::Kind::primitive},
    {"east", Action::Kind::primitive},  {"west", Action::Kind::primitive},
    {"pickup", Action::Kind::primitive}, {"putdown", Action::Kind::primitive},
};

struct Dir {
    int dx, dy;
};
Dir direction(const std::string& a) {
    if (a == "north") return {0, 1};
    if (a == "south") return {0, -1};
    if (a == "east") return {1, 0};
    return {-1, 0};
}
std::pair<Dir, Dir> perpendicular(const std::string& a) {
    if (a == "north" || a == "south") return {{1, 0}, {-1, 0}};
    return {{0, 1}, {0, -1}};
}

void add_wall(TaxiVariant& v, int x1, int y1, int x2, int y2) {
    v.walls.insert({{x1, y1}, {x2, y2}});
    v.walls.insert({{x2, y2}, {x1, y1}});
}

std::vector<std::string> passenger_ids(const GroundState& s) {
    std::vector<std::string> out;
    for (const auto& o : s.objects())
        if (o.id.size() > 1 && o.id[0] == 'p' && std::isdigit(static_cast<unsigned char>(o.id[1])))
            out.push_back(o.id);
    return out;
}

}  // namespace

TaxiVariant taxi_variant(const std::string& name) {
    TaxiVariant v;
    v.name = name;
    if (name == "taxi-small") {
        v.width = 1;
        v.height = 5;
        v.depots = {{"R", 0, 4}, {"G", 0, 3}, {"B", 0, 1}, {"Y", 0, 0}};
    } else if (name == "taxi-classic" || name == "taxi-classic-2p") {
        v.width = 5;
        v.height = 5;
        v.passengers = (name == "taxi-classic-2p") ? 2 : 1;
        v.movement_noise = 0.2;
        v.fickle_probability = 0.3;
        v.depots = {{"R", 0, 4}, {"G", 4, 4}, {"Y", 0, 0}, {"B", 3, 0}};
        add_wall(v, 1, 4, 2, 4);
        add_wall(v, 1, 3, 2, 3);
        add_wall(v, 0, 1, 1, 1);
        add_wall(v, 0, 0, 1, 0);
        add_wall(v, 2, 1, 3, 1);
        add_wall(v, 2, 0, 3, 0);
    } else if (name == "taxi-large") {
        v.width = 20;
        v.height = 20;
        v.depots = {{"R", 0, 19}, {"G", 19, 19}, {"Y", 0, 0}, {"B", 19, 0}};
    } else {
        throw ConfigError("unknown taxi variant: " + name);
    }
    return v;
}

TaxiEnv::TaxiEnv(TaxiVariant variant, GroundState start)
    : variant_(std::move(variant)), start_(std::move(start)) {}

const std::vector<Action>& TaxiEnv::primitive_actions() const { return kTaxiActions; }

const Depot& TaxiEnv::depot(const std::string& id) const {
    for (const auto& d : variant_.depots)
        if (d.id == id) return d;
    throw DomainError("unknown depot: " + id);
}

bool TaxiEnv::blocked(int x, int y, int dx, int dy) const {
    int nx = x + dx, ny = y + dy;
    if (nx < 0 || nx >= variant_.width || ny < 0 || ny >= variant_.height) return true;
    return variant_.walls.count({{x, y}, {nx, ny}}) > 0;
}

Terminal TaxiEnv::terminal_status(const GroundState& s) const {
    for (const auto& p : passenger_ids(s)) {
        if (s.get_bool(p, "in_taxi")) return Terminal::none;
        const Depot& d = depot(s.get_str(p, "goal"));
        if (s.get_int(p, "x") != d.x || s.get_int(p, "y") != d.y) return Terminal::none;
    }
    return Terminal::goal;
}

std::vector<std::pair<double, StepOutcome>> TaxiEnv::outcomes(const GroundState& s,
                                                              const std::string& a) const {
    if (!has_action(a)) throw DomainError("invalid action: " + a);
    std::vector<std::pair<double, StepOutcome>> out;
    auto pids = passenger_ids(s);

    auto carried = [&]() -> std::string {
        for (const auto& p : pids)
            if (s.get_bool(p, "in_taxi")) return p;
        return "";
    };

    if (a == "pickup") {
        StepOutcome o;
        o.next_state = s;
        o.reward = -10.0;
        int tx = s.get_int("taxi", "x"), ty = s.get_int("taxi", "y");
        if (carried().empty()) {
            for (const auto& p : pids) {
                if (!s.get_bool(p, "in_taxi") && s.get_int(p, "x") == tx &&
                    s.get_int(p, "y") == ty) {
                    o.next_state.set(p, "in_taxi", true);
                    o.next_state.set(p, "fresh", true);
                    o.reward = -1.0;
                    break;
                }
            }
        }
        o.terminal = terminal_status(o.next_state);
        out.push_back({1.0, std::move(o)});
        return out;
    }
    if (a == "putdown") {
        StepOutcome o;
        o.next_state = s;
        o.reward = -10.0;
        int tx = s.get_int("taxi", "x"), ty = s.get_int("taxi", "y");
        std::string c = carried();
        bool at_depot = false;
        for (const auto& d : variant_.depots) at_depot = at_depot || (d.x == tx && d.y == ty);
        if (!c.empty() && at_depot) {
            o.next_state.set(c, "in_taxi", false);
            o.next_state.set(c, "fresh", false);
            o.next_state.set(c, "x", tx);
            o.next_state.set(c, "y", ty);
            o.reward = -1.0;
        }
        o.terminal = terminal_status(o.next_state);
        if (o.terminal == Terminal::goal) o.reward = 20.0;
        out.push_back({1.0, std::move(o)});
        return out;
    }

    // Movement. Realized direction may slip perpendicular; a carried,
    // freshly-picked passenger may change destination (fickle).
    int tx = s.get_int("taxi", "x"), ty = s.get_int("taxi", "y");
    std::vector<std::pair<double, Dir>> dirs;
    double noise = variant_.movement_noise;
    dirs.push_back({1.0 - noise, direction(a)});
    if (noise > 0.0) {
        auto [l, r] = perpendicular(a);
        dirs.push_back({noise / 2.0, l});
        dirs.push_back({noise / 2.0, r});
    }

    std::string c = carried();
    bool fickle_now = !c.empty() && s.get_bool(c, "fresh") && variant_.fickle_probability > 0.0 &&
                      variant_.depots.size() > 1;

    std::vector<std::pair<double, std::string>> goals;  // (prob, goal depot)
    if (fickle_now) {
        const std::string cur = s.get_str(c, "goal");
        double f = variant_.fickle_probability;
        goals.push_back({1.0 - f, cur});
        double each = f / static_cast<double>(variant_.depots.size() - 1);
        for (const auto& d : variant_.depots)
            if (d.id != cur) goals.push_back({each, d.id});
    } else {
        goals.push_back({1.0, ""});
    }

    for (const auto& [pd, dir] : dirs) {
        GroundState moved = s;
        if (!blocked(tx, ty, dir.dx, dir.dy)) {
            moved.set("taxi", "x", tx + dir.dx);
            moved.set("taxi", "y", ty + dir.dy);
            if (!c.empty()) {
                moved.set(c, "x", tx + dir.dx);
                moved.set(c, "y", ty + dir.dy);
            }
        }
        if (!c.empty()) moved.set(c, "fresh", false);
        for (const auto& [pg, goal] : goals) {
            StepOutcome o;
            o.next_state = moved;
            if (!goal.empty()) o.next_state.set(c, "goal", goal);
            o.reward = -1.0;
            o.terminal = terminal_status(o.next_state);
            out.push_back({pd * pg, std::move(o)});
        }
    }
    return out;
}

std::vector<std::string> TaxiEnv::param_domain(const std::string& kind) const {
    std::vector<std::string> out;
    if (kind == "depot") {
        for (const auto& d : variant_.depots) out.push_back(d.id);
    } else if (kind == "passenger") {
        for (int i = 1; i <= variant_.passengers; ++i) out.push_back("p" + std::to_string(i));
    }
    return out;
}

TaskInstance make_taxi_task(const TaxiVariant& variant, Rng& rng) {
    if (variant.passengers < 1 || variant.width < 1 || variant.height < 1)
        throw ConfigError("taxi variant needs positive grid and at least one passenger");
    if (static_cast<std::size_t>(variant.passengers) > variant.depots.size())
        throw ConfigError("more passengers than depots");
    GroundState s;
    s.set("taxi", "x", rng.next_int(variant.width));
    s.set("taxi", "y", rng.next_int(variant.height));
    int nd = static_cast<int>(variant.depots.size());
    for (int i = 1; i <= variant.passengers; ++i) {
        std::string pid = "p" + std::to_string(i);
        const Depot& at = variant.depots[rng.next_int(nd)];
        const Depot* goal = nullptr;
        do {
            goal = &variant.depots[rng.next_int(nd)];
        } while (goal->id == at.id);
        s.set(pid, "x", at.x);
        s.set(pid, "y", at.y);
        s.set(pid, "in_taxi", false);
        s.set(pid, "fresh", false);
        s.set(pid, "goal", goal->id);
    }
    auto env = std::make_shared<TaxiEnv>(variant, s);
    return {env, std::move(s)};
}

}  // namespace palm
