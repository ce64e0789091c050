#pragma once

// Shared finite-difference gradient harness; test-only code, kept independent
// of the analytic gradient path it checks.

#include <cmath>
#include <cstdint>
#include <random>

#include "beamforge/trainer.hpp"

namespace fd_support {

using namespace beamforge;

struct FdInstance {
    HadProblem problem;
    ModelParams params;
    SnapshotBatch batch;
    double alpha_rf = 0.7;
    double alpha_antenna = 1.3;
    PowerPath path = PowerPath::Empirical;
};

// randomized instance within the small-problem envelope:
// n_t <= 6, n_rf <= 4, K <= 7, T <= 10, both selectors trainable
inline FdInstance make_instance(std::uint64_t seed, PowerPath path) {
    std::mt19937_64 rng(seed);
    const auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    const int n_t = pick(3, 6);
    const int n_rf = pick(2, 4);
    const int m_rf = pick(1, n_rf - 1);
    const int m_t = pick(1, n_t - 1);
    const int k = pick(3, 7);
    const int t = pick(4, 10);

    const AngleGrid grid = AngleGrid::uniform(-80.0, 80.0, k);
    std::uniform_real_distribution<double> level(0.0, 2.0);
    std::uniform_real_distribution<double> weight(0.5, 1.5);
    Eigen::VectorXd desired(k), weights(k);
    for (int i = 0; i < k; ++i) {
        desired[i] = level(rng);
        weights[i] = weight(rng);
    }
    HadProblem problem = HadProblem::make({n_t, 0.5}, TargetPattern{grid, desired, weights},
                                          n_rf, m_rf, m_t);

    ModelParams params = init_params(problem, seed);
    // spread the biases so the softmax Jacobian is well exercised
    std::uniform_real_distribution<double> bias(-1.0, 1.0);
    for (auto* sel : {&params.rf_select, &params.antenna_select})
        for (Eigen::Index i = 0; i < sel->biases.size(); ++i)
            sel->biases.data()[i] = bias(rng);
    // keep the initial powers small so finite differences stay accurate
    params.precoder.q_real *= 0.5;
    params.precoder.q_imag *= 0.5;

    std::mt19937_64 snap_rng(seed ^ 0xabcdef);
    return FdInstance{std::move(problem), std::move(params), draw_snapshots(n_rf, t, snap_rng),
                      0.7, 1.3, path};
}

inline double loss_of(const FdInstance& inst, const ModelParams& params) {
    return evaluate_loss(inst.problem, params,
                         inst.path == PowerPath::Empirical ? &inst.batch : nullptr,
                         inst.alpha_rf, inst.alpha_antenna, inst.path)
        .total;
}

// central difference with h = 1e-5
inline double fd_entry(const FdInstance& inst, ModelParams& params, double* entry) {
    const double h = 1e-5;
    const double saved = *entry;
    *entry = saved + h;
    const double up = loss_of(inst, params);
    *entry = saved - h;
    const double down = loss_of(inst, params);
    *entry = saved;
    return (up - down) / (2.0 * h);
}

// relative error below 1e-4, absolute floor 1e-7 near zero
inline bool close_enough(double analytic, double fd) {
    const double tol = std::max(1e-7, 1e-4 * std::max(std::abs(analytic), std::abs(fd)));
    return std::abs(analytic - fd) <= tol;
}

// returns the number of entries whose analytic and FD gradients disagree
inline int check_group(const FdInstance& inst, ParamGroup group) {
    ModelParams params = inst.params;
    const Gradients grads =
        gradient(group, inst.problem, params,
                 inst.path == PowerPath::Empirical ? &inst.batch : nullptr, inst.alpha_rf,
                 inst.alpha_antenna, inst.path);

    int mismatches = 0;
    const auto compare = [&](const Eigen::MatrixXd& analytic, Eigen::MatrixXd& tensor) {
        if (analytic.rows() != tensor.rows() || analytic.cols() != tensor.cols())
            return ++mismatches, void();
        for (Eigen::Index i = 0; i < tensor.size(); ++i) {
            const double fd = fd_entry(inst, params, tensor.data() + i);
            if (!close_enough(analytic.data()[i], fd))
                ++mismatches;
        }
    };

    switch (group) {
    case ParamGroup::RfBias: compare(grads.rf_bias, params.rf_select.biases); break;
    case ParamGroup::AntennaBias: compare(grads.antenna_bias, params.antenna_select.biases); break;
    case ParamGroup::Phases: compare(grads.phases, params.phases.phases); break;
    case ParamGroup::Precoder:
        compare(grads.q_real, params.precoder.q_real);
        compare(grads.q_imag, params.precoder.q_imag);
        break;
    }
    return mismatches;
}

} // namespace fd_support
