#include "beamforge/presets.hpp"

namespace beamforge {

namespace {

// clang-format off
const char* kDesk = R"({
  "name": "desk",
  "array": {"n_antennas": 32, "spacing": 0.5},
  "rf": {"n_chains": 16},
  "select": {"m_rf": 8, "m_t": 32},
  "grid": {"lo_deg": -90.0, "hi_deg": 90.0, "n_points": 61},
  "target": {"intervals": [[-27.0, -23.0], [28.0, 32.0]], "level": 1.0},
  "plan": {
    "epochs": 400, "steps": 10, "lr": 0.04,
    "alpha_init": 3200.0, "alpha_final": 16000.0,
    "snapshots": 64, "seed": 1
  },
  "power_path": "empirical",
  "output_dir": "runs/desk"
})";

const char* kExperiment1Nrf64 = R"({
  "name": "experiment1-nrf64",
  "array": {"n_antennas": 128, "spacing": 0.5},
  "rf": {"n_chains": 64},
  "select": {"m_rf": 32, "m_t": 128},
  "grid": {"lo_deg": -90.0, "hi_deg": 90.0, "n_points": 181},
  "target": {"intervals": [[-27.0, -23.0], [28.0, 32.0]], "level": 1.0},
  "plan": {
    "epochs": 400, "steps": 10, "lr": 0.04,
    "alpha_init": 3200.0, "alpha_final": 16000.0,
    "snapshots": 256, "seed": 1
  },
  "power_path": "empirical",
  "output_dir": "runs/experiment1-nrf64"
})";

const char* kExperiment1Nrf128 = R"({
  "name": "experiment1-nrf128",
  "array": {"n_antennas": 128, "spacing": 0.5},
  "rf": {"n_chains": 128},
  "select": {"m_rf": 32, "m_t": 128},
  "grid": {"lo_deg": -90.0, "hi_deg": 90.0, "n_points": 181},
  "target": {"intervals": [[-27.0, -23.0], [28.0, 32.0]], "level": 1.0},
  "plan": {
    "epochs": 400, "steps": 10, "lr": 0.04,
    "alpha_init": 3200.0, "alpha_final": 16000.0,
    "snapshots": 256, "seed": 1
  },
  "power_path": "empirical",
  "output_dir": "runs/experiment1-nrf128"
})";

const char* kExperiment2RfOnly = R"({
  "name": "experiment2-rf-only",
  "array": {"n_antennas": 64, "spacing": 0.5},
  "rf": {"n_chains": 32},
  "select": {"m_rf": 16, "m_t": 64},
  "grid": {"lo_deg": -90.0, "hi_deg": 90.0, "n_points": 181},
  "target": {"intervals": [[-2.0, 2.0], [19.0, 23.0]], "level": 1.0},
  "plan": {
    "epochs": 400, "steps": 10, "lr": 0.02,
    "alpha_init": 320.0, "alpha_final": 1600.0,
    "snapshots": 128, "seed": 1
  },
  "power_path": "empirical",
  "output_dir": "runs/experiment2-rf-only"
})";

const char* kExperiment2AntennaOnly = R"({
  "name": "experiment2-antenna-only",
  "array": {"n_antennas": 64, "spacing": 0.5},
  "rf": {"n_chains": 32},
  "select": {"m_rf": 32, "m_t": 32},
  "grid": {"lo_deg": -90.0, "hi_deg": 90.0, "n_points": 181},
  "target": {"intervals": [[-2.0, 2.0], [19.0, 23.0]], "level": 1.0},
  "plan": {
    "epochs": 400, "steps": 10, "lr": 0.02,
    "alpha_init": 320.0, "alpha_final": 1600.0,
    "snapshots": 128, "seed": 1
  },
  "power_path": "empirical",
  "output_dir": "runs/experiment2-antenna-only"
})";

const char* kExperiment2Hybrid = R"({
  "name": "experiment2-hybrid",
  "array": {"n_antennas": 64, "spacing": 0.5},
  "rf": {"n_chains": 32},
  "select": {"m_rf": 16, "m_t": 32},
  "grid": {"lo_deg": -90.0, "hi_deg": 90.0, "n_points": 181},
  "target": {"intervals": [[-2.0, 2.0], [19.0, 23.0]], "level": 1.0},
  "plan": {
    "epochs": 400, "steps": 10, "lr": 0.02,
    "alpha_init": 320.0, "alpha_final": 1600.0,
    "snapshots": 128, "seed": 1
  },
  "power_path": "empirical",
  "output_dir": "runs/experiment2-hybrid"
})";
// clang-format on

} // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = {
        {"desk", "32 antennas, pick 8 of 16 RF chains; finishes in seconds", kDesk},
        {"experiment1-nrf64", "128 antennas, pick 32 of 64 RF chains", kExperiment1Nrf64},
        {"experiment1-nrf128", "128 antennas, pick 32 of 128 RF chains", kExperiment1Nrf128},
        {"experiment2-rf-only", "64 antennas, pick 16 of 32 RF chains, all antennas",
         kExperiment2RfOnly},
        {"experiment2-antenna-only", "pick 32 of 64 antennas, all 32 RF chains",
         kExperiment2AntennaOnly},
        {"experiment2-hybrid", "pick 16 of 32 RF chains and 32 of 64 antennas",
         kExperiment2Hybrid},
    };
    return all;
}

std::optional<std::string> preset_json(const std::string& name) {
    for (const Preset& p : presets())
        if (p.name == name)
            return p.json_text;
    return std::nullopt;
}

} // namespace beamforge
