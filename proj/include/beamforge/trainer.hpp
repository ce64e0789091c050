#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "beamforge/had_forward.hpp"
#include "beamforge/selection.hpp"

namespace beamforge {

/// Whether the pattern term of the loss is evaluated on snapshot-averaged
/// powers or on the closed-form expected powers.
enum class PowerPath { Empirical, ClosedForm };

enum class ParamGroup { RfBias, Phases, AntennaBias, Precoder };

const char* to_string(PowerPath path);
const char* to_string(ParamGroup group);

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Linear ramp from `start` at epoch 1 to `end` at the final epoch.
struct AlphaSchedule {
    double start = 0.0;
    double end = 0.0;
};

double alpha_at(const AlphaSchedule& schedule, int epoch, int n_epochs);

struct TrainPlan {
    int n_epochs = 400;
    int n_steps = 10;
    double lr = 0.01;
    AlphaSchedule alpha;                      // shared schedule for both penalties
    std::optional<AlphaSchedule> alpha_rf;    // per-selector overrides
    std::optional<AlphaSchedule> alpha_antenna;
    int snapshots = 0; // T, must exceed max(m_rf, m_t)
    std::uint64_t seed = 1;
    AdamParams adam;
    PowerPath power_path = PowerPath::Empirical;
    bool resample_per_step = true; // fresh batch each step vs one fixed batch
};

double alpha_at(const TrainPlan& plan, int epoch);

/// Shared-schedule value, or the override when one is set.
double alpha_rf_at(const TrainPlan& plan, int epoch);
double alpha_antenna_at(const TrainPlan& plan, int epoch);

/// Problem instance: geometry, target, and the selection sizes. A selector
/// whose row count equals its column count is pinned to the identity and
/// never trained.
struct HadProblem {
    ArrayGeometry geometry;
    TargetPattern target;
    int n_rf = 1;
    int m_rf = 1;
    int m_t = 1;
    Eigen::MatrixXcd steering; // cached over target.grid, n_antennas x K

    bool rf_pinned() const { return m_rf == n_rf; }
    bool antenna_pinned() const { return m_t == geometry.n_antennas; }

    static HadProblem make(const ArrayGeometry& geometry, TargetPattern target,
                           int n_rf, int m_rf, int m_t);
};

/// The four trainable parameter groups. Pinned selectors hold empty bias
/// matrices and evaluate as identity.
struct ModelParams {
    SoftSelector rf_select;
    SoftSelector antenna_select;
    PhaseNetwork phases;
    Precoder precoder;
};

ModelParams init_params(const HadProblem& problem, std::uint64_t seed);

struct LossTerms {
    double total = 0.0;
    double pattern = 0.0;    // weighted beampattern error
    double penalty_rf = 0.0; // unweighted orthonormality penalties
    double penalty_antenna = 0.0;
};

LossTerms evaluate_loss(const HadProblem& problem, const ModelParams& params,
                        const SnapshotBatch* batch, double alpha_rf, double alpha_antenna,
                        PowerPath path);

/// Analytic gradient of the total loss with respect to one parameter group,
/// all other groups held fixed. Only the fields belonging to the requested
/// group are filled.
struct Gradients {
    Eigen::MatrixXd rf_bias;
    Eigen::MatrixXd antenna_bias;
    Eigen::MatrixXd phases;
    Eigen::MatrixXd q_real;
    Eigen::MatrixXd q_imag;
};

Gradients gradient(ParamGroup group, const HadProblem& problem, const ModelParams& params,
                   const SnapshotBatch* batch, double alpha_rf, double alpha_antenna,
                   PowerPath path);

/// First/second moment buffers for one real parameter tensor.
struct AdamMoments {
    Eigen::ArrayXXd m;
    Eigen::ArrayXXd v;

    static AdamMoments zeros(Eigen::Index rows, Eigen::Index cols);
};

/// Bias-corrected Adam update. Returns the parameter delta (to be added to
/// the parameters) and advances the moment buffers in place. step_index is
/// 1-based and owned by the caller, one counter per parameter group.
Eigen::ArrayXXd adam_step(AdamMoments& moments, const Eigen::ArrayXXd& grad, double lr,
                          long step_index, const AdamParams& hp);

struct StepRecord {
    long step = 0; // global 1-based index over the whole run
    int epoch = 0;
    ParamGroup stage = ParamGroup::RfBias;
    LossTerms loss; // evaluated before the update of this step
    double alpha_rf = 0.0;
    double alpha_antenna = 0.0;
};

struct TrainState {
    ModelParams params;
    AdamMoments adam_rf_bias, adam_antenna_bias, adam_phases, adam_q_real, adam_q_imag;
    long steps_rf = 0, steps_antenna = 0, steps_phases = 0, steps_precoder = 0;
    int epoch = 1;
    long global_step = 0;
    std::vector<StepRecord> history;
    std::mt19937_64 snapshot_rng;
    std::optional<SnapshotBatch> fixed_batch; // set when resample_per_step is off
};

TrainState init_state(const HadProblem& problem, const TrainPlan& plan);

/// n_steps Adam updates on one parameter group; every other group is left
/// bit-identical. Uses state.epoch for the alpha schedule.
void run_stage(TrainState& state, ParamGroup group, int n_steps, const TrainPlan& plan,
               const HadProblem& problem);

struct TrainResult {
    TrainState state;
    HardSelection rf_selection;
    HardSelection antenna_selection;
};

/// The full alternating loop: per epoch, RF biases -> phases -> antenna
/// biases -> precoder, skipping pinned selectors. Deterministic for a fixed
/// plan and problem.
TrainResult train(const TrainPlan& plan, const HadProblem& problem);

} // namespace beamforge
