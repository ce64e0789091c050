#include "beamforge/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "beamforge/errors.hpp"

namespace beamforge {

namespace {

using nlohmann::ordered_json;

void expect_object(const ordered_json& j, const std::string& scope) {
    if (!j.is_object())
        throw ConfigError("config: \"" + scope + "\" must be an object");
}

void reject_unknown_keys(const ordered_json& j, const std::string& scope,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key)
                known = true;
        if (!known)
            throw ConfigError("config: unknown key \"" +
                              (scope.empty() ? item.key() : scope + "." + item.key()) + "\"");
    }
}

const ordered_json* find(const ordered_json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number())
        throw ConfigError("config: \"" + path + "\" must be a number");
    return j.get<double>();
}

int get_integer(const ordered_json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw ConfigError("config: \"" + path + "\" must be an integer");
    return j.get<int>();
}

std::string get_string(const ordered_json& j, const std::string& path) {
    if (!j.is_string())
        throw ConfigError("config: \"" + path + "\" must be a string");
    return j.get<std::string>();
}

bool get_boolean(const ordered_json& j, const std::string& path) {
    if (!j.is_boolean())
        throw ConfigError("config: \"" + path + "\" must be a boolean");
    return j.get<bool>();
}

AlphaSchedule parse_alpha_override(const ordered_json& j, const std::string& scope) {
    expect_object(j, scope);
    reject_unknown_keys(j, scope, {"init", "final"});
    const auto* init = find(j, "init");
    const auto* fin = find(j, "final");
    if (!init || !fin)
        throw ConfigError("config: \"" + scope + "\" needs both \"init\" and \"final\"");
    return AlphaSchedule{get_number(*init, scope + ".init"), get_number(*fin, scope + ".final")};
}

ExperimentConfig parse_config(const ordered_json& root, const std::string& origin) {
    expect_object(root, origin);
    reject_unknown_keys(root, "", {"name", "array", "rf", "select", "grid", "target", "plan",
                                   "power_path", "output_dir"});

    ExperimentConfig cfg;
    if (const auto* name = find(root, "name"))
        cfg.name = get_string(*name, "name");

    const auto* array = find(root, "array");
    if (!array)
        throw ConfigError("config: missing \"array\" section");
    expect_object(*array, "array");
    reject_unknown_keys(*array, "array", {"n_antennas", "spacing"});
    const auto* n_antennas = find(*array, "n_antennas");
    if (!n_antennas)
        throw ConfigError("config: missing \"array.n_antennas\"");
    cfg.array.n_antennas = get_integer(*n_antennas, "array.n_antennas");
    if (const auto* spacing = find(*array, "spacing"))
        cfg.array.spacing = get_number(*spacing, "array.spacing");

    const auto* rf = find(root, "rf");
    if (!rf)
        throw ConfigError("config: missing \"rf\" section");
    expect_object(*rf, "rf");
    reject_unknown_keys(*rf, "rf", {"n_chains"});
    const auto* n_chains = find(*rf, "n_chains");
    if (!n_chains)
        throw ConfigError("config: missing \"rf.n_chains\"");
    cfg.n_rf = get_integer(*n_chains, "rf.n_chains");

    const auto* select = find(root, "select");
    if (!select)
        throw ConfigError("config: missing \"select\" section");
    expect_object(*select, "select");
    reject_unknown_keys(*select, "select", {"m_rf", "m_t"});
    const auto* m_rf = find(*select, "m_rf");
    const auto* m_t = find(*select, "m_t");
    if (!m_rf)
        throw ConfigError("config: missing \"select.m_rf\"");
    if (!m_t)
        throw ConfigError("config: missing \"select.m_t\"");
    cfg.m_rf = get_integer(*m_rf, "select.m_rf");
    cfg.m_t = get_integer(*m_t, "select.m_t");

    if (const auto* grid = find(root, "grid")) {
        expect_object(*grid, "grid");
        reject_unknown_keys(*grid, "grid", {"lo_deg", "hi_deg", "n_points"});
        if (const auto* lo = find(*grid, "lo_deg"))
            cfg.grid.lo_deg = get_number(*lo, "grid.lo_deg");
        if (const auto* hi = find(*grid, "hi_deg"))
            cfg.grid.hi_deg = get_number(*hi, "grid.hi_deg");
        if (const auto* n = find(*grid, "n_points"))
            cfg.grid.n_points = get_integer(*n, "grid.n_points");
    }

    const auto* target = find(root, "target");
    if (!target)
        throw ConfigError("config: missing \"target\" section");
    expect_object(*target, "target");
    reject_unknown_keys(*target, "target", {"intervals", "level"});
    const auto* intervals = find(*target, "intervals");
    if (!intervals || !intervals->is_array())
        throw ConfigError("config: \"target.intervals\" must be an array of [lo, hi] pairs");
    for (std::size_t i = 0; i < intervals->size(); ++i) {
        const auto& pair = (*intervals)[i];
        const std::string path = "target.intervals[" + std::to_string(i) + "]";
        if (!pair.is_array() || pair.size() != 2)
            throw ConfigError("config: \"" + path + "\" must be a [lo, hi] pair");
        cfg.target.intervals.emplace_back(get_number(pair[0], path + "[0]"),
                                          get_number(pair[1], path + "[1]"));
    }
    if (const auto* level = find(*target, "level"))
        cfg.target.level = get_number(*level, "target.level");

    const auto* plan = find(root, "plan");
    if (!plan)
        throw ConfigError("config: missing \"plan\" section");
    expect_object(*plan, "plan");
    reject_unknown_keys(*plan, "plan",
                        {"epochs", "steps", "lr", "alpha_init", "alpha_final", "alpha1", "alpha2",
                         "snapshots", "seed", "adam", "resample_per_step"});
    if (const auto* epochs = find(*plan, "epochs"))
        cfg.plan.n_epochs = get_integer(*epochs, "plan.epochs");
    if (const auto* steps = find(*plan, "steps"))
        cfg.plan.n_steps = get_integer(*steps, "plan.steps");
    const auto* lr = find(*plan, "lr");
    if (!lr)
        throw ConfigError("config: missing \"plan.lr\"");
    cfg.plan.lr = get_number(*lr, "plan.lr");
    const auto* a0 = find(*plan, "alpha_init");
    const auto* a1 = find(*plan, "alpha_final");
    if (!a0 || !a1)
        throw ConfigError("config: missing \"plan.alpha_init\" or \"plan.alpha_final\"");
    cfg.plan.alpha = AlphaSchedule{get_number(*a0, "plan.alpha_init"),
                                   get_number(*a1, "plan.alpha_final")};
    if (const auto* rf_override = find(*plan, "alpha1"))
        cfg.plan.alpha_rf = parse_alpha_override(*rf_override, "plan.alpha1");
    if (const auto* ant_override = find(*plan, "alpha2"))
        cfg.plan.alpha_antenna = parse_alpha_override(*ant_override, "plan.alpha2");
    if (const auto* snapshots = find(*plan, "snapshots"))
        cfg.plan.snapshots = get_integer(*snapshots, "plan.snapshots");
    else
        cfg.plan.snapshots = 2 * std::max(cfg.m_rf, cfg.m_t);
    if (const auto* seed = find(*plan, "seed")) {
        if (!seed->is_number_integer())
            throw ConfigError("config: \"plan.seed\" must be an integer");
        cfg.plan.seed = seed->get<std::uint64_t>();
    }
    if (const auto* adam = find(*plan, "adam")) {
        expect_object(*adam, "plan.adam");
        reject_unknown_keys(*adam, "plan.adam", {"beta1", "beta2", "eps"});
        if (const auto* b1 = find(*adam, "beta1"))
            cfg.plan.adam.beta1 = get_number(*b1, "plan.adam.beta1");
        if (const auto* b2 = find(*adam, "beta2"))
            cfg.plan.adam.beta2 = get_number(*b2, "plan.adam.beta2");
        if (const auto* eps = find(*adam, "eps"))
            cfg.plan.adam.eps = get_number(*eps, "plan.adam.eps");
    }
    if (const auto* resample = find(*plan, "resample_per_step"))
        cfg.plan.resample_per_step = get_boolean(*resample, "plan.resample_per_step");

    if (const auto* path = find(root, "power_path")) {
        const std::string value = get_string(*path, "power_path");
        if (value == "empirical")
            cfg.plan.power_path = PowerPath::Empirical;
        else if (value == "closed-form")
            cfg.plan.power_path = PowerPath::ClosedForm;
        else
            throw ConfigError("config: \"power_path\" must be \"empirical\" or \"closed-form\"");
    }
    if (const auto* out = find(root, "output_dir"))
        cfg.output_dir = get_string(*out, "output_dir");

    validate(cfg);
    return cfg;
}

} // namespace

ExperimentConfig load_config_text(const std::string& json_text, const std::string& origin) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: failed to parse " + origin + ": " + e.what());
    }
    return parse_config(root, origin);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot read \"" + path + "\"");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_config_text(buffer.str(), path);
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.array.n_antennas < 1)
        throw ConfigError("config: \"array.n_antennas\" must be >= 1");
    if (!(cfg.array.spacing > 0.0))
        throw ConfigError("config: \"array.spacing\" must be > 0");
    if (cfg.n_rf < 1)
        throw ConfigError("config: \"rf.n_chains\" must be >= 1");
    if (cfg.m_rf < 1 || cfg.m_rf > cfg.n_rf)
        throw ConfigError("config: \"select.m_rf\" must be in [1, rf.n_chains]");
    if (cfg.m_t < 1 || cfg.m_t > cfg.array.n_antennas)
        throw ConfigError("config: \"select.m_t\" must be in [1, array.n_antennas]");
    if (cfg.grid.n_points < 1)
        throw ConfigError("config: \"grid.n_points\" must be >= 1");
    if (cfg.grid.n_points > 1 && !(cfg.grid.hi_deg > cfg.grid.lo_deg))
        throw ConfigError("config: \"grid.hi_deg\" must exceed \"grid.lo_deg\"");
    if (cfg.grid.lo_deg < -90.0 || cfg.grid.hi_deg > 90.0)
        throw ConfigError("config: \"grid\" must stay within [-90, 90] degrees");
    for (std::size_t i = 0; i < cfg.target.intervals.size(); ++i)
        if (!(cfg.target.intervals[i].first <= cfg.target.intervals[i].second))
            throw ConfigError("config: \"target.intervals[" + std::to_string(i) +
                              "]\" must satisfy lo <= hi");
    if (cfg.target.level < 0.0)
        throw ConfigError("config: \"target.level\" must be >= 0");
    if (cfg.plan.n_epochs < 1)
        throw ConfigError("config: \"plan.epochs\" must be >= 1");
    if (cfg.plan.n_steps < 1)
        throw ConfigError("config: \"plan.steps\" must be >= 1");
    if (!(cfg.plan.lr > 0.0))
        throw ConfigError("config: \"plan.lr\" must be > 0");
    const auto check_schedule = [](const AlphaSchedule& s, const std::string& key) {
        if (s.start < 0.0)
            throw ConfigError("config: \"" + key + "\" init must be >= 0");
        if (s.end < s.start)
            throw ConfigError("config: \"" + key + "\" final must be >= init");
    };
    check_schedule(cfg.plan.alpha, "plan.alpha_init/alpha_final");
    if (cfg.plan.alpha_rf)
        check_schedule(*cfg.plan.alpha_rf, "plan.alpha1");
    if (cfg.plan.alpha_antenna)
        check_schedule(*cfg.plan.alpha_antenna, "plan.alpha2");
    if (cfg.plan.power_path == PowerPath::Empirical &&
        cfg.plan.snapshots <= std::max(cfg.m_rf, cfg.m_t))
        throw ConfigError("config: \"plan.snapshots\" must exceed max(select.m_rf, select.m_t)");
    if (cfg.plan.adam.beta1 < 0.0 || cfg.plan.adam.beta1 >= 1.0 || cfg.plan.adam.beta2 < 0.0 ||
        cfg.plan.adam.beta2 >= 1.0)
        throw ConfigError("config: \"plan.adam\" betas must be in [0, 1)");
    if (!(cfg.plan.adam.eps > 0.0))
        throw ConfigError("config: \"plan.adam.eps\" must be > 0");
    if (cfg.output_dir.empty())
        throw ConfigError("config: \"output_dir\" must not be empty");
}

std::string config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["name"] = cfg.name;
    j["array"] = {{"n_antennas", cfg.array.n_antennas}, {"spacing", cfg.array.spacing}};
    j["rf"] = {{"n_chains", cfg.n_rf}};
    j["select"] = {{"m_rf", cfg.m_rf}, {"m_t", cfg.m_t}};
    j["grid"] = {{"lo_deg", cfg.grid.lo_deg},
                 {"hi_deg", cfg.grid.hi_deg},
                 {"n_points", cfg.grid.n_points}};
    ordered_json intervals = ordered_json::array();
    for (const auto& [lo, hi] : cfg.target.intervals)
        intervals.push_back({lo, hi});
    j["target"] = {{"intervals", intervals}, {"level", cfg.target.level}};
    ordered_json plan;
    plan["epochs"] = cfg.plan.n_epochs;
    plan["steps"] = cfg.plan.n_steps;
    plan["lr"] = cfg.plan.lr;
    plan["alpha_init"] = cfg.plan.alpha.start;
    plan["alpha_final"] = cfg.plan.alpha.end;
    if (cfg.plan.alpha_rf)
        plan["alpha1"] = {{"init", cfg.plan.alpha_rf->start}, {"final", cfg.plan.alpha_rf->end}};
    if (cfg.plan.alpha_antenna)
        plan["alpha2"] = {{"init", cfg.plan.alpha_antenna->start},
                          {"final", cfg.plan.alpha_antenna->end}};
    plan["snapshots"] = cfg.plan.snapshots;
    plan["seed"] = cfg.plan.seed;
    plan["adam"] = {{"beta1", cfg.plan.adam.beta1},
                    {"beta2", cfg.plan.adam.beta2},
                    {"eps", cfg.plan.adam.eps}};
    plan["resample_per_step"] = cfg.plan.resample_per_step;
    j["plan"] = plan;
    j["power_path"] = to_string(cfg.plan.power_path);
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

HadProblem problem_from_config(const ExperimentConfig& cfg) {
    AngleGrid grid = AngleGrid::uniform(cfg.grid.lo_deg, cfg.grid.hi_deg, cfg.grid.n_points);
    TargetPattern target = pattern_from_intervals(grid, cfg.target.intervals, cfg.target.level);
    return HadProblem::make(cfg.array, std::move(target), cfg.n_rf, cfg.m_rf, cfg.m_t);
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();

    HadProblem problem = problem_from_config(cfg);
    TrainResult trained = train(cfg.plan, problem);
    const ModelParams& params = trained.state.params;

    const Eigen::MatrixXcd f = params.phases.realized();
    const Eigen::MatrixXcd q = params.precoder.matrix();
    const Eigen::MatrixXd s1_hard = selection_matrix(trained.rf_selection, problem.n_rf);
    const Eigen::MatrixXd s2_hard =
        selection_matrix(trained.antenna_selection, problem.geometry.n_antennas);
    const Eigen::MatrixXd s1_soft = problem.rf_pinned()
                                        ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(problem.n_rf, problem.n_rf))
                                        : soft_matrix(params.rf_select);
    const Eigen::MatrixXd s2_soft =
        problem.antenna_pinned()
            ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(problem.geometry.n_antennas,
                                                        problem.geometry.n_antennas))
            : soft_matrix(params.antenna_select);

    RunResult result;
    result.config = cfg;
    result.rf_selection = trained.rf_selection;
    result.antenna_selection = trained.antenna_selection;
    result.phases = params.phases.phases;
    result.precoder = q;
    result.angles_deg = Eigen::Map<const Eigen::VectorXd>(problem.target.grid.angles_deg().data(),
                                                          problem.target.grid.size());
    result.desired = problem.target.desired_power;
    result.achieved_soft = closed_form_power(problem.steering, s1_soft, s2_soft, f, q);
    result.achieved_hard = closed_form_power(problem.steering, s1_hard, s2_hard, f, q);
    result.history = trained.state.history;
    result.rf_hardness = problem.rf_pinned() ? HardnessReport{1.0, 0.0}
                                             : hardness_report(params.rf_select);
    result.antenna_hardness = problem.antenna_pinned() ? HardnessReport{1.0, 0.0}
                                                       : hardness_report(params.antenna_select);
    result.final_pattern_error = beampattern_error(problem.target, result.achieved_hard);
    result.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace beamforge
