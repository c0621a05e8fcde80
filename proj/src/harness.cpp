#include "palm/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace palm {

namespace fs = std::filesystem;

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config field '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': expected a number, got '" + v + "'");
    }
}

std::int64_t parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        std::int64_t i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::string fmt(double v) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    TransferSpec transfer;
    bool has_transfer = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::istringstream chk(line);
            std::string tok;
            if (chk >> tok)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");

        if (key == "variant") cfg.variant = val;
        else if (key == "hierarchy") cfg.hierarchy_file = val;
        else if (key == "algorithm") cfg.algorithm = val;
        else if (key == "episodes") cfg.episodes = static_cast<int>(parse_int(val, key));
        else if (key == "trials") cfg.trials = static_cast<int>(parse_int(val, key));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, key));
        else if (key == "gamma") cfg.gamma = parse_double(val, key);
        else if (key == "m") cfg.m = static_cast<int>(parse_int(val, key));
        else if (key == "vi_tolerance") cfg.vi_tolerance = parse_double(val, key);
        else if (key == "gating") cfg.gating = parse_bool(val, key);
        else if (key == "episode_budget") cfg.episode_budget = static_cast<int>(parse_int(val, key));
        else if (key == "subtask_budget") cfg.subtask_budget = static_cast<int>(parse_int(val, key));
        else if (key == "alpha") cfg.alpha = parse_double(val, key);
        else if (key == "epsilon") cfg.epsilon = parse_double(val, key);
        else if (key == "transfer_lamdp") { transfer.lamdp = val; has_transfer = true; }
        else if (key == "transfer_model") { transfer.model_file = val; has_transfer = true; }
        else if (key == "transfer_frozen") { transfer.frozen = parse_bool(val, key); has_transfer = true; }
        else if (key == "output_dir") cfg.output_dir = val;
        else if (key == "save_models") cfg.save_models = parse_bool(val, key);
        else if (key == "audit") cfg.audit = parse_bool(val, key);
        else if (key == "threads") cfg.threads = static_cast<int>(parse_int(val, key));
        else throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown config field '" + key + "'");
    }
    if (has_transfer) {
        if (transfer.lamdp.empty() || transfer.model_file.empty())
            throw ConfigError(origin + ": transfer needs both transfer_lamdp and transfer_model");
        cfg.transfer = transfer;
    }
    if (cfg.variant.empty()) throw ConfigError(origin + ": config field 'variant' is required");
    if (cfg.trials < 1) throw ConfigError("config field 'trials' must be >= 1");
    if (cfg.episodes < 1) throw ConfigError("config field 'episodes' must be >= 1");
    if (cfg.algorithm != "palm" && cfg.algorithm != "rmax-flat" && cfg.algorithm != "qlearning")
        throw ConfigError("config field 'algorithm' must be palm, rmax-flat, or qlearning");
    if (cfg.algorithm == "palm" && cfg.hierarchy_file.empty())
        throw ConfigError("config field 'hierarchy' is required for algorithm palm");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path), path);
}

TrialOutput run_trial(const ExperimentConfig& cfg, int trial_index) {
    TrialOutput out;
    Rng rng(cfg.seed + static_cast<std::uint64_t>(trial_index));
    TaskInstance task = make_task(cfg.variant, rng);

    ExecOptions opts;
    opts.episode_budget = cfg.episode_budget;
    opts.subtask_budget = cfg.subtask_budget;
    opts.gating_enabled = cfg.gating;
    opts.known_threshold = cfg.m.value_or(is_deterministic_variant(cfg.variant) ? 1 : 5);
    opts.gamma = cfg.gamma;
    opts.vi_tolerance = cfg.vi_tolerance;
    opts.audit = cfg.audit;

    auto run_episodes = [&](auto&& one_episode) {
        for (int e = 0; e < cfg.episodes; ++e) {
            auto t0 = std::chrono::steady_clock::now();
            out.result.episodes.push_back(one_episode());
            auto t1 = std::chrono::steady_clock::now();
            out.result.wall_ms.push_back(
                std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    };

    if (cfg.algorithm == "qlearning") {
        out.qtable = std::make_unique<QTable>();
        out.qtable->alpha = cfg.alpha;
        out.qtable->epsilon = cfg.epsilon;
        run_episodes([&] {
            return qlearning_episode(*task.env, task.start, *out.qtable, cfg.gamma, rng,
                                     cfg.episode_budget);
        });
        return out;
    }

    Hierarchy h = cfg.algorithm == "rmax-flat" ? flat_hierarchy()
                                               : load_hierarchy(cfg.hierarchy_file);
    out.ctx = std::make_unique<ExecutionContext>(std::move(h), task.env, opts, rng);
    if (cfg.transfer) {
        TabularModel m = TabularModel::deserialize(read_file(cfg.transfer->model_file));
        out.ctx->attach_transferred_model(cfg.transfer->lamdp, m, cfg.transfer->frozen);
    }
    run_episodes([&] { return out.ctx->run_episode(task.start); });
    return out;
}

std::string episode_csv_header() {
    return "episode,steps,cum_steps,reward,cum_reward,wall_ms,unknown_total,outcome\n";
}

std::string episode_csv_rows(const TrialResult& t) {
    std::string out;
    std::int64_t cum_steps = 0;
    double cum_reward = 0.0;
    for (std::size_t e = 0; e < t.episodes.size(); ++e) {
        const EpisodeRecord& r = t.episodes[e];
        cum_steps += r.steps;
        cum_reward += r.reward;
        out += std::to_string(e) + "," + std::to_string(r.steps) + "," +
               std::to_string(cum_steps) + "," + fmt(r.reward) + "," + fmt(cum_reward) + "," +
               fmt(t.wall_ms[e]) + "," + std::to_string(r.unknown_total) + "," +
               outcome_name(r.outcome) + "\n";
    }
    return out;
}

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.output_dir.empty()) throw ConfigError("config field 'output_dir' is required for run");
    if (!cfg.hierarchy_file.empty() && !fs::exists(cfg.hierarchy_file))
        throw MissingFileError("hierarchy file not found: " + cfg.hierarchy_file);
    if (cfg.transfer && !fs::exists(cfg.transfer->model_file))
        throw MissingFileError("transfer model file not found: " + cfg.transfer->model_file);
    fs::create_directories(cfg.output_dir);

    std::vector<std::string> paths(static_cast<std::size_t>(cfg.trials));
    auto worker = [&](int i) -> std::string {
        TrialOutput t = run_trial(cfg, i);
        std::string path =
            (fs::path(cfg.output_dir) / ("trial_" + std::to_string(i) + ".csv")).string();
        std::ofstream csv(path);
        csv << episode_csv_header() << episode_csv_rows(t.result);
        if (i == 0 && cfg.save_models && t.ctx != nullptr) {
            fs::path store = fs::path(cfg.output_dir) / "models";
            fs::create_directories(store);
            for (const auto& [name, model] : t.ctx->models()) {
                std::ofstream mf(store / (name + ".model"));
                mf << model.serialize();
            }
        }
        return path;
    };

    if (cfg.threads <= 1) {
        for (int i = 0; i < cfg.trials; ++i) paths[static_cast<std::size_t>(i)] = worker(i);
        return paths;
    }
    std::vector<std::future<std::string>> futs;
    futs.reserve(static_cast<std::size_t>(cfg.trials));
    for (int i = 0; i < cfg.trials; ++i)
        futs.push_back(std::async(std::launch::async, worker, i));
    for (int i = 0; i < cfg.trials; ++i) paths[static_cast<std::size_t>(i)] = futs[static_cast<std::size_t>(i)].get();
    return paths;
}

namespace {

struct TrialColumns {
    std::vector<double> cum_steps, cum_reward;
};

TrialColumns parse_trial_csv(const std::string& path) {
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "episode,steps,cum_steps,reward,cum_reward,wall_ms,unknown_total,outcome")
        throw ConfigError("aggregate: unexpected CSV schema in " + path);
    TrialColumns cols;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 8) throw ConfigError("aggregate: malformed row in " + path);
        cols.cum_steps.push_back(std::stod(f[2]));
        cols.cum_reward.push_back(std::stod(f[4]));
    }
    return cols;
}

std::pair<double, double> mean_ci(const std::vector<double>& xs) {
    double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    return {mean, 1.96 * sd / std::sqrt(n)};
}

}  // namespace

std::string aggregate_csv(const std::vector<std::string>& csv_paths) {
    if (csv_paths.empty()) throw ConfigError("aggregate: no input files");
    std::vector<TrialColumns> trials;
    trials.reserve(csv_paths.size());
    for (const auto& p : csv_paths) trials.push_back(parse_trial_csv(p));
    std::size_t episodes = trials.front().cum_steps.size();
    for (const auto& t : trials)
        if (t.cum_steps.size() != episodes)
            throw ConfigError("aggregate: trial CSVs have differing episode counts");

    std::string out = "episode,mean_cum_steps,ci_cum_steps,mean_cum_reward,ci_cum_reward\n";
    std::vector<double> col(trials.size());
    for (std::size_t e = 0; e < episodes; ++e) {
        for (std::size_t t = 0; t < trials.size(); ++t) col[t] = trials[t].cum_steps[e];
        auto [ms, cs] = mean_ci(col);
        for (std::size_t t = 0; t < trials.size(); ++t) col[t] = trials[t].cum_reward[e];
        auto [mr, cr] = mean_ci(col);
        out += std::to_string(e) + "," + fmt(ms) + "," + fmt(cs) + "," + fmt(mr) + "," +
               fmt(cr) + "\n";
    }
    return out;
}

void export_model(const std::string& store_dir, const std::string& lamdp_name,
                  const std::string& out_path) {
    fs::path src = fs::path(store_dir) / (lamdp_name + ".model");
    if (!fs::exists(store_dir)) throw MissingFileError("model store not found: " + store_dir);
    if (!fs::exists(src)) throw ConfigError("no model for subtask '" + lamdp_name + "' in " + store_dir);
    std::string bytes = read_file(src.string());
    TabularModel::deserialize(bytes);  // round-trip validation before export
    std::ofstream out(out_path);
    if (!out) throw MissingFileError("cannot write " + out_path);
    out << bytes;
}

}  // namespace palm
