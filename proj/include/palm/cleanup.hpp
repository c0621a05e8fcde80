#pragma once

#include "palm/core.hpp"

namespace palm {

struct CleanupLayout {
    std::string name;
    int width = 0, height = 0;
    // cell(x, y): '#' wall, 'D' door, or a room letter. Row 0 of `rows` is the
    // top of the grid (y = height-1).
    std::vector<std::string> rows;
    struct Block {
        std::string id;
        std::string color;  // matches a room color
        int x, y;
        bool target;
    };
    std::vector<Block> blocks;
    std::map<char, std::string> room_colors;

    char cell(int x, int y) const { return rows[height - 1 - y][x]; }
    bool wall(int x, int y) const {
        return x < 0 || x >= width || y < 0 || y >= height || cell(x, y) == '#';
    }
    // Room letter of a cell; '\0' for doors (doors belong to no room).
    char room_of(int x, int y) const {
        char c = cell(x, y);
        return (c == '#' || c == 'D') ? '\0' : c;
    }
};

CleanupLayout cleanup_layout(const std::string& name);

class CleanupEnv final : public Environment {
public:
    CleanupEnv(CleanupLayout layout, GroundState start);

    std::string domain_name() const override { return "cleanup"; }
    const std::vector<Action>& primitive_actions() const override;
    GroundState initial_state() const override { return start_; }
    Terminal terminal_status(const GroundState& s) const override;
    std::vector<std::pair<double, StepOutcome>> outcomes(
        const GroundState& s, const std::string& action_id) const override;
    std::vector<std::string> param_domain(const std::string& kind) const override;

    const CleanupLayout& layout() const { return layout_; }
    const CleanupLayout::Block& block(const std::string& id) const;
    std::vector<std::string> block_ids() const;
    bool occupied_by_block(const GroundState& s, int x, int y) const;

private:
    CleanupLayout layout_;
    GroundState start_;
};

TaskInstance make_cleanup_task(const CleanupLayout& layout, Rng& rng);

}  // namespace palm
