#include "palm/cleanup.hpp"

#include <set>

#include <algorithm>

namespace palm {

namespace {

const std::vector<Action> kCleanupActions = {
    {"north", Action::Kind::primitive}, {"south", Action::Kind::primitive},
    {"east", Action::Kind::primitive},  {"west", Action::Kind::primitive},
    {"pull", Action::Kind::primitive},
};

struct Dir {
    int dx, dy;
};
Dir direction(const std::string& d) {
    if (d == "north") return {0, 1};
    if (d == "south") return {0, -1};
    if (d == "east") return {1, 0};
    return {-1, 0};
}

CleanupLayout build(const std::string& name, std::vector<std::string> rows,
                    std::vector<CleanupLayout::Block> blocks) {
    CleanupLayout l;
    l.name = name;
    l.rows = std::move(rows);
    l.height = static_cast<int>(l.rows.size());
    l.width = static_cast<int>(l.rows[0].size());
    l.blocks = std::move(blocks);
    l.room_colors = {{'r', "red"}, {'b', "blue"}, {'g', "green"}, {'y', "yellow"}};
    for (const auto& row : l.rows)
        if (static_cast<int>(row.size()) != l.width)
            throw ConfigError("ragged cleanup layout: " + name);
    // Every door must sit between exactly two distinct rooms.
    for (int y = 0; y < l.height; ++y) {
        for (int x = 0; x < l.width; ++x) {
            if (l.cell(x, y) != 'D') continue;
            std::set<char> adj;
            for (auto [dx, dy] : {std::pair{0, 1}, {0, -1}, {1, 0}, {-1, 0}}) {
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= l.width || ny < 0 || ny >= l.height) continue;
                char r = l.room_of(nx, ny);
                if (r != '\0') adj.insert(r);
            }
            if (adj.size() != 2) throw ConfigError("door at bad position in layout " + name);
        }
    }
    return l;
}

}  // namespace

CleanupLayout cleanup_layout(const std::string& name) {
    if (name == "cleanup-small") {
        return build(name,
                     {"bbb",
                      "bbb",
                      "#D#",
                      "rrr",
                      "rrr"},
                     {{"b1", "red", 1, 3, true}});
    }
    if (name == "cleanup-2r2b1t-5x5") {
        return build(name,
                     {"bbbbb",
                      "bbbbb",
                      "##D##",
                      "rrrrr",
                      "rrrrr"},
                     {{"b1", "red", 1, 3, true}, {"b2", "blue", 3, 1, false}});
    }
    if (name == "cleanup-2r2b2t-5x5") {
        return build(name,
                     {"bbbbb",
                      "bbbbb",
                      "##D##",
                      "rrrrr",
                      "rrrrr"},
                     {{"b1", "red", 1, 3, true}, {"b2", "blue", 3, 1, true}});
    }
    if (name == "cleanup-3r1b-5x7") {
        return build(name,
                     {"bb#gg",
                      "bb#gg",
                      "bb#gg",
                      "#D#D#",
                      "rrrrr",
                      "rrrrr",
                      "rrrrr"},
                     {{"b1", "green", 1, 5, true}});
    }
    if (name == "cleanup-3r1b-7x7") {
        return build(name,
                     {"bbb#ggg",
                      "bbb#ggg",
                      "bbb#ggg",
                      "#D###D#",
                      "rrrrrrr",
                      "rrrrrrr",
                      "rrrrrrr"},
                     {{"b1", "green", 1, 5, true}});
    }
    throw ConfigError("unknown cleanup layout: " + name);
}

CleanupEnv::CleanupEnv(CleanupLayout layout, GroundState start)
    : layout_(std::move(layout)), start_(std::move(start)) {}

const std::vector<Action>& CleanupEnv::primitive_actions() const { return kCleanupActions; }

const CleanupLayout::Block& CleanupEnv::block(const std::string& id) const {
    for (const auto& b : layout_.blocks)
        if (b.id == id) return b;
    throw DomainError("unknown block: " + id);
}

std::vector<std::string> CleanupEnv::block_ids() const {
    std::vector<std::string> out;
    for (const auto& b : layout_.blocks) out.push_back(b.id);
    return out;
}

bool CleanupEnv::occupied_by_block(const GroundState& s, int x, int y) const {
    for (const auto& b : layout_.blocks)
        if (s.get_int(b.id, "x") == x && s.get_int(b.id, "y") == y) return true;
    return false;
}

Terminal CleanupEnv::terminal_status(const GroundState& s) const {
    for (const auto& b : layout_.blocks) {
        if (!b.target) continue;
        char room = layout_.room_of(s.get_int(b.id, "x"), s.get_int(b.id, "y"));
        if (room == '\0' || layout_.room_colors.at(room) != b.color) return Terminal::none;
    }
    return Terminal::goal;
}

std::vector<std::pair<double, StepOutcome>> CleanupEnv::outcomes(const GroundState& s,
                                                                 const std::string& a) const {
    if (!has_action(a)) throw DomainError("invalid action: " + a);
    StepOutcome o;
    o.next_state = s;
    int ax = s.get_int("agent", "x"), ay = s.get_int("agent", "y");
    const std::string facing = s.get_str("agent", "facing");

    auto block_at = [&](int x, int y) -> const CleanupLayout::Block* {
        for (const auto& b : layout_.blocks)
            if (s.get_int(b.id, "x") == x && s.get_int(b.id, "y") == y) return &b;
        return nullptr;
    };
    auto free_cell = [&](int x, int y) {
        return !layout_.wall(x, y) && block_at(x, y) == nullptr;
    };

    if (a == "pull") {
        Dir f = direction(facing);
        int bx = ax + f.dx, by = ay + f.dy;   // faced cell, must hold a block
        int kx = ax - f.dx, ky = ay - f.dy;   // backward cell, must be free
        const CleanupLayout::Block* b = block_at(bx, by);
        if (b != nullptr && free_cell(kx, ky)) {
            o.next_state.set("agent", "x", kx);
            o.next_state.set("agent", "y", ky);
            o.next_state.set(b->id, "x", ax);
            o.next_state.set(b->id, "y", ay);
        }
    } else {
        Dir d = direction(a);
        int nx = ax + d.dx, ny = ay + d.dy;
        if (!layout_.wall(nx, ny)) {
            const CleanupLayout::Block* b = block_at(nx, ny);
            if (b == nullptr) {
                o.next_state.set("agent", "x", nx);
                o.next_state.set("agent", "y", ny);
                o.next_state.set("agent", "facing", a);
            } else if (free_cell(nx + d.dx, ny + d.dy)) {
                o.next_state.set(b->id, "x", nx + d.dx);
                o.next_state.set(b->id, "y", ny + d.dy);
                o.next_state.set("agent", "x", nx);
                o.next_state.set("agent", "y", ny);
                o.next_state.set("agent", "facing", a);
            }
        }
    }

    bool was_goal = terminal_status(s) == Terminal::goal;
    o.terminal = terminal_status(o.next_state);
    o.reward = (o.terminal == Terminal::goal && !was_goal) ? 1.0 : 0.0;
    return {{1.0, std::move(o)}};
}

std::vector<std::string> CleanupEnv::param_domain(const std::string& kind) const {
    std::vector<std::string> out;
    if (kind == "block") {
        return block_ids();
    }
    if (kind == "room") {
        std::set<char> rooms;
        for (int y = 0; y < layout_.height; ++y)
            for (int x = 0; x < layout_.width; ++x)
                if (char r = layout_.room_of(x, y); r != '\0') rooms.insert(r);
        for (char r : rooms) out.push_back(std::string(1, r));
        return out;
    }
    if (kind == "cell") {
        for (int y = 0; y < layout_.height; ++y)
            for (int x = 0; x < layout_.width; ++x)
                if (!layout_.wall(x, y))
                    out.push_back(std::to_string(x) + "," + std::to_string(y));
        return out;
    }
    if (kind == "direction") return {"north", "south", "east", "west"};
    return out;
}

TaskInstance make_cleanup_task(const CleanupLayout& layout, Rng& rng) {
    GroundState s;
    for (const auto& b : layout.blocks) {
        if (layout.wall(b.x, b.y)) throw ConfigError("block on wall in layout " + layout.name);
        s.set(b.id, "x", b.x);
        s.set(b.id, "y", b.y);
    }
    // Agent starts at a random free cell, facing north.
    std::vector<std::pair<int, int>> free;
    for (int y = 0; y < layout.height; ++y) {
        for (int x = 0; x < layout.width; ++x) {
            if (layout.wall(x, y)) continue;
            bool blocked = false;
            for (const auto& b : layout.blocks) blocked = blocked || (b.x == x && b.y == y);
            if (!blocked) free.push_back({x, y});
        }
    }
    auto [ax, ay] = free[static_cast<std::size_t>(rng.next_int(static_cast<int>(free.size())))];
    s.set("agent", "x", ax);
    s.set("agent", "y", ay);
    s.set("agent", "facing", std::string("north"));
    auto env = std::make_shared<CleanupEnv>(layout, s);
    return {env, std::move(s)};
}

}  // namespace palm
