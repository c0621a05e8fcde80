#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "palm/harness.hpp"
#include "palm/oracles.hpp"

namespace py = pybind11;

PYBIND11_MODULE(palmrl, m) {
    m.doc() = "Hierarchical model-based RL engine: subtask hierarchies, optimistic "
              "model learning, planning, and benchmark experiments";

    py::register_exception<palm::ConfigError>(m, "ConfigError");
    py::register_exception<palm::DomainError>(m, "DomainError");
    py::register_exception<palm::MissingFileError>(m, "MissingFileError");

    py::enum_<palm::Outcome>(m, "Outcome")
        .value("goal", palm::Outcome::goal)
        .value("fail", palm::Outcome::fail)
        .value("budget_exhausted", palm::Outcome::budget_exhausted);

    py::class_<palm::EpisodeRecord>(m, "EpisodeRecord")
        .def_readonly("steps", &palm::EpisodeRecord::steps)
        .def_readonly("reward", &palm::EpisodeRecord::reward)
        .def_readonly("outcome", &palm::EpisodeRecord::outcome)
        .def_readonly("unknown_total", &palm::EpisodeRecord::unknown_total);

    py::class_<palm::ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("variant", &palm::ExperimentConfig::variant)
        .def_readwrite("hierarchy_file", &palm::ExperimentConfig::hierarchy_file)
        .def_readwrite("algorithm", &palm::ExperimentConfig::algorithm)
        .def_readwrite("episodes", &palm::ExperimentConfig::episodes)
        .def_readwrite("trials", &palm::ExperimentConfig::trials)
        .def_readwrite("seed", &palm::ExperimentConfig::seed)
        .def_readwrite("gamma", &palm::ExperimentConfig::gamma)
        .def_readwrite("gating", &palm::ExperimentConfig::gating)
        .def_readwrite("episode_budget", &palm::ExperimentConfig::episode_budget)
        .def_readwrite("output_dir", &palm::ExperimentConfig::output_dir)
        .def_readwrite("threads", &palm::ExperimentConfig::threads);

    m.def("parse_config_text", &palm::parse_config_text, py::arg("text"),
          py::arg("origin") = "<string>");
    m.def("load_config", &palm::load_config);
    m.def(
        "run_trial",
        [](const palm::ExperimentConfig& cfg, int trial) {
            palm::TrialOutput out = palm::run_trial(cfg, trial);
            return out.result.episodes;
        },
        py::arg("config"), py::arg("trial_index") = 0,
        "Run one seeded trial and return its per-episode records");
    m.def("run_experiment", &palm::run_experiment,
          "Run all trials, writing per-trial CSVs; returns the CSV paths");
    m.def("aggregate_csv", &palm::aggregate_csv,
          "Mean and 95% CI curves across trial CSVs, as CSV text");
    m.def("export_model", &palm::export_model, py::arg("store_dir"), py::arg("lamdp_name"),
          py::arg("out_path"));
    m.def(
        "validate_hierarchy",
        [](const std::string& hier_path, const std::string& variant) {
            palm::Hierarchy h = palm::load_hierarchy(hier_path);
            palm::Rng rng(0);
            palm::TaskInstance task = palm::make_task(variant, rng);
            return palm::validate_hierarchy(h, task.env.get());
        },
        "Validate a hierarchy file against a task variant; returns the issue list");
}
