#pragma once

#include <functional>
#include <unordered_map>

#include "palm/core.hpp"

namespace palm {

// A feature extractor projects a ground state onto one abstract value. Args
// are bound subtask parameter values (depot ids, block ids, cells, ...).
using FeatureFn = std::function<Value(const Environment&, const std::vector<std::string>& args,
                                      const GroundState&)>;

struct FeatureDef {
    int arity = 0;
    FeatureFn fn;
};

class FeatureRegistry {
public:
    static const FeatureRegistry& for_domain(const std::string& domain);

    bool has(const std::string& name) const { return features_.count(name) > 0; }
    const FeatureDef& def(const std::string& name) const;
    Value eval(const std::string& name, const std::vector<std::string>& args,
               const Environment& env, const GroundState& s) const;

    void add(const std::string& name, int arity, FeatureFn fn) {
        features_[name] = FeatureDef{arity, std::move(fn)};
    }

private:
    std::unordered_map<std::string, FeatureDef> features_;
};

// Shield hook: whether a (child, binding) abstract action should be offered
// from a concrete state. Only registered for domains that define one.
using ShieldFn = std::function<bool(const Environment&, const GroundState&,
                                    const std::string& child,
                                    const std::map<std::string, std::string>& binding)>;
const ShieldFn* shield_for_domain(const std::string& domain);

}  // namespace palm
