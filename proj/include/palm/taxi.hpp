#pragma once

#include <set>

#include "palm/core.hpp"

namespace palm {

struct Depot {
    std::string id;
    int x, y;
};

struct TaxiVariant {
    std::string name;
    int width = 5, height = 5;
    int passengers = 1;
    double movement_noise = 0.0;    // probability of a perpendicular slip (half each side)
    double fickle_probability = 0.0;
    std::vector<Depot> depots;
    // Blocked edges stored as ordered cell pairs; a-b blocked implies b-a blocked.
    std::set<std::pair<std::pair<int, int>, std::pair<int, int>>> walls;
};

TaxiVariant taxi_variant(const std::string& name);

class TaxiEnv final : public Environment {
public:
    TaxiEnv(TaxiVariant variant, GroundState start);

    std::string domain_name() const override { return "taxi"; }
    const std::vector<Action>& primitive_actions() const override;
    GroundState initial_state() const override { return start_; }
    Terminal terminal_status(const GroundState& s) const override;
    std::vector<std::pair<double, StepOutcome>> outcomes(
        const GroundState& s, const std::string& action_id) const override;
    std::vector<std::string> param_domain(const std::string& kind) const override;

    const TaxiVariant& variant() const { return variant_; }
    const Depot& depot(const std::string& id) const;
    bool blocked(int x, int y, int dx, int dy) const;

private:
    TaxiVariant variant_;
    GroundState start_;
};

// Samples a task instance: passenger starts/goals and taxi position.
TaskInstance make_taxi_task(const TaxiVariant& variant, Rng& rng);

}  // namespace palm
