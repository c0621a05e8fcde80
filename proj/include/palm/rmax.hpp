#pragma once

#include <unordered_map>

#include "palm/core.hpp"

namespace palm {

// Per-L-AMDP tabular R-MAX model: visit counts, empirical transition and
// reward sums, known/unknown classification, freezing, serialization.
class TabularModel {
public:
    struct Outcome {
        std::int64_t n = 0;
        double reward_sum = 0.0;
    };
    struct Pair {
        std::int64_t n = 0;
        std::map<std::string, Outcome> next;  // sorted for serialization
    };
    enum class PredictionKind { known, optimistic, frozen_unseen };
    struct Transition {
        std::string next_key;
        double probability;
        double mean_reward;
    };
    struct Prediction {
        PredictionKind kind;
        std::vector<Transition> transitions;  // only for known
    };

    TabularModel() = default;
    TabularModel(std::string lamdp_name, std::string phi_sig, int m, double gamma,
                 double value_max);

    // Records one abstract transition. Counts are gated on the executed
    // child's known signal; returns whether (s, a) was known before this call.
    bool observe(const std::string& s, const std::string& a, const std::string& s2, double r,
                 bool child_known);
    bool is_known(const std::string& s, const std::string& a) const;
    Prediction predicted(const std::string& s, const std::string& a) const;

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    int known_threshold() const { return m_; }
    double value_max() const { return value_max_; }
    double gamma() const { return gamma_; }
    const std::string& lamdp_name() const { return lamdp_name_; }
    const std::string& phi_sig() const { return phi_sig_; }

    // Pairs recorded but not yet known (the exploration frontier size).
    std::int64_t unknown_pair_count() const;
    std::int64_t pair_count() const { return static_cast<std::int64_t>(table_.size()); }

    // Counted-update changelog, consumed incrementally by planner caches.
    std::uint64_t version() const { return changelog_.size(); }
    const std::vector<std::pair<std::string, std::string>>& changelog() const {
        return changelog_;
    }

    std::string serialize() const;
    static TabularModel deserialize(const std::string& bytes);

    bool operator==(const TabularModel& o) const {
        return table_ == o.table_ && m_ == o.m_ && frozen_ == o.frozen_;
    }

    const std::unordered_map<std::string, Pair>& table() const { return table_; }

private:
    static std::string sa_key(const std::string& s, const std::string& a) {
        return s + '\x1f' + a;
    }

    std::string lamdp_name_;
    std::string phi_sig_;
    int m_ = 1;
    double gamma_ = 0.95;
    double value_max_ = 20.0;
    bool frozen_ = false;
    std::unordered_map<std::string, Pair> table_;  // key: s \x1f a
    std::vector<std::pair<std::string, std::string>> changelog_;
};

inline bool operator==(const TabularModel::Outcome& a, const TabularModel::Outcome& b) {
    return a.n == b.n && a.reward_sum == b.reward_sum;
}
inline bool operator==(const TabularModel::Pair& a, const TabularModel::Pair& b) {
    return a.n == b.n && a.next == b.next;
}

}  // namespace palm
