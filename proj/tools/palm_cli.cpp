#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "palm/harness.hpp"

namespace fs = std::filesystem;

namespace {

// Expands a '*' pattern over one directory level; plain paths pass through.
std::vector<std::string> expand_glob(const std::string& pattern) {
    if (pattern.find('*') == std::string::npos) return {pattern};
    fs::path p(pattern);
    fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    std::string name = p.filename().string();
    auto star = name.find('*');
    std::string prefix = name.substr(0, star);
    std::string suffix = name.substr(star + 1);
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string f = entry.path().filename().string();
        if (f.size() >= prefix.size() + suffix.size() && f.compare(0, prefix.size(), prefix) == 0 &&
            f.compare(f.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical model-based RL engine: subtask hierarchies, "
                 "optimistic model learning, and benchmark experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("config", config_path, "experiment config file")->required();

    std::vector<std::string> agg_inputs;
    std::string agg_out;
    auto* agg = app.add_subcommand("aggregate", "Aggregate trial CSVs into mean/CI curves");
    agg->add_option("inputs", agg_inputs, "trial CSV files or a glob pattern")->required();
    agg->add_option("-o,--output", agg_out, "output CSV path")->required();

    std::string store, lamdp, model_out;
    auto* exp = app.add_subcommand("export-model", "Export one subtask model from a run's store");
    exp->add_option("store", store, "model store directory (run output)")->required();
    exp->add_option("name", lamdp, "subtask template name")->required();
    exp->add_option("-o,--output", model_out, "output model file")->required();

    std::string hier_path, domain_variant;
    auto* val = app.add_subcommand("validate", "Validate a hierarchy file against a task variant");
    val->add_option("hierarchy", hier_path, "hierarchy file")->required();
    val->add_option("variant", domain_variant, "task variant (e.g. taxi-classic)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            palm::ExperimentConfig cfg = palm::load_config(config_path);
            auto paths = palm::run_experiment(cfg);
            for (const auto& p : paths) std::cout << p << "\n";
        } else if (*agg) {
            std::vector<std::string> files;
            for (const auto& in : agg_inputs)
                for (auto& f : expand_glob(in)) files.push_back(std::move(f));
            if (files.empty()) throw palm::MissingFileError("aggregate: no files match the inputs");
            std::string csv = palm::aggregate_csv(files);
            std::ofstream out(agg_out);
            if (!out) throw palm::MissingFileError("cannot write " + agg_out);
            out << csv;
        } else if (*exp) {
            palm::export_model(store, lamdp, model_out);
        } else if (*val) {
            palm::Hierarchy h = palm::load_hierarchy(hier_path);
            palm::Rng rng(0);
            palm::TaskInstance task = palm::make_task(domain_variant, rng);
            auto issues = palm::validate_hierarchy(h, task.env.get());
            for (const auto& i : issues) std::cerr << i << "\n";
            if (!issues.empty()) return 2;
            std::cout << "ok\n";
        }
    } catch (const palm::MissingFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const palm::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
