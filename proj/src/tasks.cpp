#include "palm/cleanup.hpp"
#include "palm/core.hpp"
#include "palm/taxi.hpp"

namespace palm {

TaskInstance make_task(const std::string& variant, Rng& rng) {
    if (variant.rfind("taxi", 0) == 0) return make_taxi_task(taxi_variant(variant), rng);
    if (variant.rfind("cleanup", 0) == 0) return make_cleanup_task(cleanup_layout(variant), rng);
    throw ConfigError("unknown task variant: " + variant);
}

bool is_deterministic_variant(const std::string& variant) {
    if (variant.rfind("cleanup", 0) == 0) return true;
    TaxiVariant v = taxi_variant(variant);
    return v.movement_noise == 0.0 && v.fickle_probability == 0.0;
}

}  // namespace palm
