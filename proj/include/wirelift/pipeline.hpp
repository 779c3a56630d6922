#pragma once

#include "wirelift/evaluation.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace wirelift {

// Bad configuration (unknown key, wrong type, invalid value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A stage of run_pipeline failed; stage() names it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage))
    {
    }
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct GenerateConfig {
    int n = 200;
    std::uint64_t seed = 0;
    std::string families;
    bool allow_disconnected = false;
};

// Config document, version 1:
// {
//   "version": 1, "seed": 0, "jobs": 1, "out": "run",
//   "corpus": {"dir": "...", "generate": {"n", "seed", "families", "allow_disconnected"}},
//   "detector": {"parallel_angle_max", "perpendicular_angle_min", "planarity_from_faces",
//                "jlinkage": {"num_hypotheses", "consistency_threshold", "seed"},
//                "true2form": {"w_c", "sigma_alpha", "max_iters", "baseline_sigma"}},
//   "selector": {"eps_cons", "min_depth_ratio", "eps_qr", "qr_noise", "max_ls_iters"},
//   "solver": {"n_restarts", "init", "max_iters", "f_tol", "sat_tol", "root_tol", "method"},
//   "evaluation": {"sources", "inits", "restarts", "tau", "timing"}
// }
// Every key is optional; unknown keys are rejected.
struct PipelineConfig {
    int version = 1;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::filesystem::path out = "run";
    std::filesystem::path corpus_dir;
    std::optional<GenerateConfig> generate;
    EvalConfig eval;
    AblationGrid grid;
    bool timing = false;
};

// Throws ConfigError naming the offending key path (e.g. "solver.n_restart").
PipelineConfig parse_pipeline_config(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);

// generate (or read) the corpus, detect per source, solve and classify every
// grid cell, then write documents/, report.json, report.csv, histogram.csv
// under cfg.out. Throws StageError.
AblationReport run_pipeline(const PipelineConfig& cfg);

} // namespace wirelift
