#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beamforge/selection.hpp"
#include "beamforge/trainer.hpp"

namespace beamforge {

struct GridSpec {
    double lo_deg = -90.0;
    double hi_deg = 90.0;
    int n_points = 181;
};

struct TargetSpec {
    std::vector<AngleInterval> intervals;
    double level = 1.0;
};

/// Everything one run needs; maps one-to-one onto the JSON config format.
struct ExperimentConfig {
    std::string name;
    ArrayGeometry array;
    int n_rf = 1;
    int m_rf = 1;
    int m_t = 1;
    GridSpec grid;
    TargetSpec target;
    TrainPlan plan;
    std::string output_dir = "beamforge-out";
};

/// Parse and validate a JSON config file. Errors name the offending key.
ExperimentConfig load_config(const std::string& path);

/// Same, from in-memory JSON text.
ExperimentConfig load_config_text(const std::string& json_text, const std::string& origin = "<string>");

void validate(const ExperimentConfig& config);

/// Serialized config in the exact on-disk format; reloading it reproduces
/// the run.
std::string config_to_json(const ExperimentConfig& config);

HadProblem problem_from_config(const ExperimentConfig& config);

struct RunResult {
    ExperimentConfig config; // effective values after CLI overrides
    HardSelection rf_selection;
    HardSelection antenna_selection;
    Eigen::MatrixXd phases;      // final phase network
    Eigen::MatrixXcd precoder;   // final Q
    Eigen::VectorXd angles_deg;  // grid, length K
    Eigen::VectorXd desired;     // target powers
    Eigen::VectorXd achieved_soft; // closed-form powers with converged soft selectors
    Eigen::VectorXd achieved_hard; // closed-form powers with hardened selectors
    std::vector<StepRecord> history;
    HardnessReport rf_hardness;
    HardnessReport antenna_hardness;
    double final_pattern_error = 0.0; // beampattern error of achieved_hard
    double duration_seconds = 0.0;
};

/// Train per the config and assemble all reporting artifacts.
RunResult run_experiment(const ExperimentConfig& config);

/// Write beampattern.csv, history.csv, result.json, run_meta.json and
/// beampattern.svg into out_dir (created if missing).
void emit_outputs(const RunResult& result, const std::string& out_dir);

/// Peak-normalized dB values: 10*log10(p / max(p)), floored at -300 dB.
Eigen::VectorXd to_db_normalized(const Eigen::VectorXd& powers);

} // namespace beamforge
