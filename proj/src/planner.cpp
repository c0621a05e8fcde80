#include "palm/planner.hpp"

#include <cmath>
#include <functional>

namespace palm {

namespace {

double action_backup(const TabularModel& model, const std::string& state_key,
                     const std::string& action_key, const ViOptions& opts,
                     const std::function<double(const std::string&)>& value_of,
                     double self_value) {
    auto pred = model.predicted(state_key, action_key);
    switch (pred.kind) {
        case TabularModel::PredictionKind::optimistic:
            return opts.gamma * model.value_max();
        case TabularModel::PredictionKind::frozen_unseen:
            return opts.frozen_default_reward + opts.gamma * self_value;
        case TabularModel::PredictionKind::known: {
            double v = 0.0;
            for (const auto& t : pred.transitions)
                v += t.probability * (t.mean_reward + opts.gamma * value_of(t.next_key));
            return v;
        }
    }
    return 0.0;
}

}  // namespace

void IncrementalPlanner::add_state(const std::string& key, bool terminal,
                                   std::vector<std::string> action_keys) {
    if (index_.count(key)) return;
    int idx = static_cast<int>(keys_.size());
    index_[key] = idx;
    keys_.push_back(key);
    terminal_.push_back(terminal ? 1 : 0);
    values_.push_back(0.0);
    rows_.emplace_back();
    auto& rows = rows_.back();
    rows.reserve(action_keys.size());
    for (auto& a : action_keys) {
        Row r;
        r.action_key = std::move(a);
        rows.push_back(std::move(r));
        dirty_.push_back({idx, static_cast<int>(rows.size()) - 1});
    }
    // Patch rows that referenced this state before it was discovered.
    auto pend = pending_.find(key);
    if (pend != pending_.end()) {
        for (const auto& [sidx, loc] : pend->second)
            rows_[static_cast<std::size_t>(sidx)][static_cast<std::size_t>(loc.first)]
                .next[static_cast<std::size_t>(loc.second)]
                .idx = idx;
        pending_.erase(pend);
    }
}

void IncrementalPlanner::sync(const TabularModel& model) {
    const auto& log = model.changelog();
    for (std::uint64_t i = consumed_version_; i < log.size(); ++i) {
        auto it = index_.find(log[i].first);
        if (it == index_.end()) continue;
        auto& rows = rows_[static_cast<std::size_t>(it->second)];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].action_key == log[i].second && !rows[r].dirty) {
                rows[r].dirty = true;
                dirty_.push_back({it->second, static_cast<int>(r)});
            }
        }
    }
    consumed_version_ = log.size();
}

void IncrementalPlanner::rebuild_row(const TabularModel& model, int sidx, int ridx) {
    Row& row = rows_[static_cast<std::size_t>(sidx)][static_cast<std::size_t>(ridx)];
    row.dirty = false;
    row.next.clear();
    auto pred = model.predicted(keys_[static_cast<std::size_t>(sidx)], row.action_key);
    row.kind = pred.kind;
    row.exp_reward = 0.0;
    if (pred.kind != TabularModel::PredictionKind::known) return;
    for (std::size_t e = 0; e < pred.transitions.size(); ++e) {
        const auto& t = pred.transitions[e];
        row.exp_reward += t.probability * t.mean_reward;
        RowEntry entry;
        entry.p = t.probability;
        auto it = index_.find(t.next_key);
        if (it != index_.end()) {
            entry.idx = it->second;
        } else {
            entry.idx = -1;
            pending_[t.next_key].push_back({sidx, {ridx, static_cast<int>(e)}});
        }
        row.next.push_back(entry);
    }
}

double IncrementalPlanner::backup_row(const TabularModel& model, const Row& row, int sidx,
                                      const std::vector<double>& values) const {
    switch (row.kind) {
        case TabularModel::PredictionKind::optimistic:
            return opts_.gamma * model.value_max();
        case TabularModel::PredictionKind::frozen_unseen:
            return opts_.frozen_default_reward +
                   opts_.gamma * values[static_cast<std::size_t>(sidx)];
        case TabularModel::PredictionKind::known: {
            double v = row.exp_reward;
            for (const auto& e : row.next)
                if (e.idx >= 0) v += opts_.gamma * e.p * values[static_cast<std::size_t>(e.idx)];
            return v;
        }
    }
    return 0.0;
}

void IncrementalPlanner::resolve(const TabularModel& model) {
    for (auto [sidx, ridx] : dirty_) {
        if (rows_[static_cast<std::size_t>(sidx)][static_cast<std::size_t>(ridx)].dirty)
            rebuild_row(model, sidx, ridx);
    }
    dirty_.clear();

    std::vector<double> next_values(values_.size());
    double residual = 0.0;
    int iter = 0;
    converged_ = false;
    residual_history_.clear();
    for (; iter < opts_.max_iterations; ++iter) {
        residual = 0.0;
        for (std::size_t s = 0; s < values_.size(); ++s) {
            double v = 0.0;
            if (!terminal_[s] && !rows_[s].empty()) {
                v = backup_row(model, rows_[s][0], static_cast<int>(s), values_);
                for (std::size_t r = 1; r < rows_[s].size(); ++r) {
                    double b = backup_row(model, rows_[s][r], static_cast<int>(s), values_);
                    if (b > v) v = b;
                }
            }
            next_values[s] = v;
            double d = std::fabs(v - values_[s]);
            if (d > residual) residual = d;
        }
        values_.swap(next_values);
        residual_history_.push_back(residual);
        if (residual < opts_.tolerance) {
            converged_ = true;
            ++iter;
            break;
        }
    }
    last_residual_ = residual;
    iterations_ = iter;
}

double IncrementalPlanner::value(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? 0.0 : values_[static_cast<std::size_t>(it->second)];
}

std::size_t IncrementalPlanner::greedy(const TabularModel& model, const std::string& state_key,
                                       const std::vector<std::string>& available) const {
    if (available.empty()) throw DomainError("greedy action requested with no available actions");
    auto value_of = [this](const std::string& k) { return value(k); };
    double self = value(state_key);
    std::size_t best = 0;
    double best_v = action_backup(model, state_key, available[0], opts_, value_of, self);
    for (std::size_t i = 1; i < available.size(); ++i) {
        double v = action_backup(model, state_key, available[i], opts_, value_of, self);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

ValueTable solve(const TabularModel& model, const std::vector<PlanState>& states,
                 const ViOptions& opts) {
    IncrementalPlanner planner(opts);
    for (const auto& st : states) planner.add_state(st.key, st.terminal, st.action_keys);
    planner.resolve(model);

    ValueTable out;
    for (const auto& st : states) out.values[st.key] = planner.value(st.key);
    out.converged = planner.last_converged();
    out.residual = planner.last_residual();
    out.iterations = planner.iterations();
    out.residual_history = planner.residual_history();
    return out;
}

std::size_t greedy_action_index(const ValueTable& table, const TabularModel& model,
                                const std::string& state_key,
                                const std::vector<std::string>& available,
                                const ViOptions& opts) {
    if (available.empty()) throw DomainError("greedy action requested with no available actions");
    auto value_of = [&table](const std::string& k) {
        auto it = table.values.find(k);
        return it == table.values.end() ? 0.0 : it->second;
    };
    double self = value_of(state_key);
    std::size_t best = 0;
    double best_v = action_backup(model, state_key, available[0], opts, value_of, self);
    for (std::size_t i = 1; i < available.size(); ++i) {
        double v = action_backup(model, state_key, available[i], opts, value_of, self);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

}  // namespace palm
