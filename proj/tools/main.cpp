#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "beamforge/errors.hpp"
#include "beamforge/experiment.hpp"
#include "beamforge/presets.hpp"

namespace {

using namespace beamforge;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> epochs;
    std::optional<std::string> power_path;
};

ExperimentConfig resolve_config(const std::string& ref) {
    if (const auto json = preset_json(ref))
        return load_config_text(*json, "preset \"" + ref + "\"");
    return load_config(ref);
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const Overrides& ov) {
    if (ov.seed)
        cfg.plan.seed = *ov.seed;
    if (ov.out_dir)
        cfg.output_dir = *ov.out_dir;
    if (ov.epochs)
        cfg.plan.n_epochs = *ov.epochs;
    if (ov.power_path)
        cfg.plan.power_path =
            *ov.power_path == "closed-form" ? PowerPath::ClosedForm : PowerPath::Empirical;
    validate(cfg);
    return cfg;
}

void write_divergence_diagnostics(const ExperimentConfig& cfg, const DivergenceError& err) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec)
        return; // diagnostics are best effort
    nlohmann::ordered_json j;
    j["error"] = err.what();
    j["epoch"] = err.info().epoch;
    j["stage"] = err.info().stage;
    j["step"] = err.info().step;
    j["loss"] = err.info().loss;
    j["alpha_rf"] = err.info().alpha_rf;
    j["alpha_antenna"] = err.info().alpha_antenna;
    j["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
    std::ofstream out(fs::path(cfg.output_dir) / "diagnostics.json");
    out << j.dump(2) << "\n";
}

int run_one(const ExperimentConfig& cfg, std::string& log) {
    char buf[512];
    try {
        const RunResult result = run_experiment(cfg);
        emit_outputs(result, cfg.output_dir);
        std::snprintf(buf, sizeof(buf),
                      "%s: pattern error %.6g, hardness rf %.4f / antenna %.4f, %.1f s -> %s\n",
                      cfg.name.empty() ? "run" : cfg.name.c_str(), result.final_pattern_error,
                      result.rf_hardness.min_max_entry, result.antenna_hardness.min_max_entry,
                      result.duration_seconds, cfg.output_dir.c_str());
        log += buf;
        return kExitOk;
    } catch (const DivergenceError& e) {
        write_divergence_diagnostics(cfg, e);
        log += std::string("error: ") + e.what() + " (diagnostics.json written)\n";
        return kExitDivergence;
    } catch (const IoError& e) {
        log += std::string("error: ") + e.what() + "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        log += std::string("error: ") + e.what() + "\n";
        return kExitConfig;
    }
}

int cmd_run(const std::vector<std::string>& refs, const Overrides& ov, int jobs) {
    std::vector<ExperimentConfig> configs;
    try {
        if (ov.out_dir && refs.size() > 1)
            throw ConfigError("--out cannot be combined with multiple --config values");
        for (const auto& ref : refs)
            configs.push_back(apply_overrides(resolve_config(ref), ov));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }

    std::vector<int> codes(configs.size(), kExitOk);
    std::vector<std::string> logs(configs.size());
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            codes[i] = run_one(configs[i], logs[i]);
            std::fputs(logs[i].c_str(), codes[i] == kExitOk ? stdout : stderr);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < configs.size();
                     i = next.fetch_add(1))
                    codes[i] = run_one(configs[i], logs[i]);
            });
        }
        for (auto& t : pool)
            t.join();
        for (std::size_t i = 0; i < configs.size(); ++i)
            std::fputs(logs[i].c_str(), codes[i] == kExitOk ? stdout : stderr);
    }

    int worst = kExitOk;
    for (int code : codes)
        worst = std::max(worst, code);
    return worst;
}

int cmd_validate(const std::vector<std::string>& refs) {
    for (const auto& ref : refs) {
        try {
            const ExperimentConfig cfg = resolve_config(ref);
            std::printf("OK: %s (%d antennas, %d RF chains, select %d RF / %d antennas, "
                        "%d epochs x %d steps)\n",
                        ref.c_str(), cfg.array.n_antennas, cfg.n_rf, cfg.m_rf, cfg.m_t,
                        cfg.plan.n_epochs, cfg.plan.n_steps);
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kExitConfig;
        } catch (const IoError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kExitIo;
        }
    }
    return kExitOk;
}

int cmd_presets_list() {
    for (const Preset& p : presets())
        std::printf("%-26s %s\n", p.name.c_str(), p.summary.c_str());
    std::printf("\nRun one with: beamforge run --config <name>\n");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"beamforge - sparse hybrid-array beampattern design by learned selection"};
    app.require_subcommand(1);

    std::vector<std::string> config_refs;
    Overrides overrides;
    int jobs = 1;
    std::uint64_t seed_value = 0;
    std::string out_value, power_value;
    int epochs_value = 0;

    auto* run = app.add_subcommand("run", "Train a design and write its artifacts");
    run->add_option("--config", config_refs, "Config file path or preset name")
        ->required()
        ->take_all();
    auto* seed_opt = run->add_option("--seed", seed_value, "Override plan.seed");
    auto* out_opt = run->add_option("--out", out_value, "Override output_dir");
    auto* epochs_opt = run->add_option("--epochs", epochs_value, "Override plan.epochs");
    auto* power_opt = run->add_option("--power-path", power_value, "Override power path")
                          ->check(CLI::IsMember({"empirical", "closed-form"}));
    run->add_option("--jobs", jobs, "Parallel runs when several configs are given")
        ->check(CLI::PositiveNumber);

    auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
    validate_cmd->add_option("--config", config_refs, "Config file path or preset name")
        ->required()
        ->take_all();

    auto* presets_cmd = app.add_subcommand("presets", "Built-in experiment configurations");
    presets_cmd->require_subcommand(1);
    presets_cmd->add_subcommand("list", "List available presets");

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count())
        overrides.seed = seed_value;
    if (out_opt->count())
        overrides.out_dir = out_value;
    if (epochs_opt->count())
        overrides.epochs = epochs_value;
    if (power_opt->count())
        overrides.power_path = power_value;

    if (run->parsed())
        return cmd_run(config_refs, overrides, jobs);
    if (validate_cmd->parsed())
        return cmd_validate(config_refs);
    return cmd_presets_list();
}
