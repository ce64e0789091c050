#include "beamforge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "beamforge/errors.hpp"
#include "beamforge/linalg.hpp"
#include "beamforge/rng.hpp"

namespace beamforge {

const char* to_string(PowerPath path) {
    return path == PowerPath::Empirical ? "empirical" : "closed-form";
}

const char* to_string(ParamGroup group) {
    switch (group) {
    case ParamGroup::RfBias: return "rf_bias";
    case ParamGroup::Phases: return "phases";
    case ParamGroup::AntennaBias: return "antenna_bias";
    case ParamGroup::Precoder: return "precoder";
    }
    return "?";
}

double alpha_at(const AlphaSchedule& schedule, int epoch, int n_epochs) {
    if (epoch < 1 || epoch > n_epochs)
        throw std::domain_error("alpha_at: epoch " + std::to_string(epoch) +
                                " outside [1, " + std::to_string(n_epochs) + "]");
    if (n_epochs == 1)
        return schedule.start;
    const double frac = static_cast<double>(epoch - 1) / static_cast<double>(n_epochs - 1);
    return schedule.start + (schedule.end - schedule.start) * frac;
}

double alpha_at(const TrainPlan& plan, int epoch) { return alpha_at(plan.alpha, epoch, plan.n_epochs); }

double alpha_rf_at(const TrainPlan& plan, int epoch) {
    return alpha_at(plan.alpha_rf ? *plan.alpha_rf : plan.alpha, epoch, plan.n_epochs);
}

double alpha_antenna_at(const TrainPlan& plan, int epoch) {
    return alpha_at(plan.alpha_antenna ? *plan.alpha_antenna : plan.alpha, epoch, plan.n_epochs);
}

HadProblem HadProblem::make(const ArrayGeometry& geometry, TargetPattern target,
                            int n_rf, int m_rf, int m_t) {
    validate(geometry);
    validate(target);
    if (n_rf < 1)
        throw std::invalid_argument("HadProblem: n_rf must be >= 1");
    if (m_rf < 1 || m_rf > n_rf)
        throw std::invalid_argument("HadProblem: m_rf must be in [1, n_rf]");
    if (m_t < 1 || m_t > geometry.n_antennas)
        throw std::invalid_argument("HadProblem: m_t must be in [1, n_antennas]");
    Eigen::MatrixXcd steering = steering_matrix(geometry, target.grid);
    return HadProblem{geometry, std::move(target), n_rf, m_rf, m_t, std::move(steering)};
}

ModelParams init_params(const HadProblem& problem, std::uint64_t seed) {
    ModelParams params{
        problem.rf_pinned()
            ? SoftSelector{}
            : SoftSelector::init(problem.m_rf, problem.n_rf, derive_seed(seed, SeedStream::RfBias)),
        problem.antenna_pinned()
            ? SoftSelector{}
            : SoftSelector::init(problem.m_t, problem.geometry.n_antennas,
                                 derive_seed(seed, SeedStream::AntennaBias)),
        PhaseNetwork::init(problem.geometry.n_antennas, problem.n_rf,
                           derive_seed(seed, SeedStream::Phases)),
        Precoder::init(problem.n_rf, derive_seed(seed, SeedStream::Precoder)),
    };
    return params;
}

namespace {

struct EngineOutput {
    LossTerms loss;
    Gradients grads;
};

// Forward chain and, when `group` is set, the analytic gradient of the total
// loss with respect to that group. Selection matrices enter the chain twice
// (S^T S), so their gradient picks up both applications.
EngineOutput engine(const ParamGroup* group, const HadProblem& prob, const ModelParams& params,
                    const SnapshotBatch* batch, double alpha_rf, double alpha_antenna,
                    PowerPath path) {
    const bool s1_pinned = prob.rf_pinned();
    const bool s2_pinned = prob.antenna_pinned();
    if (alpha_rf < 0.0 || alpha_antenna < 0.0)
        throw std::invalid_argument("engine: alpha weights must be >= 0");
    if (group) {
        if (*group == ParamGroup::RfBias && s1_pinned)
            throw std::invalid_argument("gradient: RF selector is pinned to identity");
        if (*group == ParamGroup::AntennaBias && s2_pinned)
            throw std::invalid_argument("gradient: antenna selector is pinned to identity");
    }

    const Eigen::MatrixXd s1 = s1_pinned ? Eigen::MatrixXd() : soft_matrix(params.rf_select);
    const Eigen::MatrixXd s2 = s2_pinned ? Eigen::MatrixXd() : soft_matrix(params.antenna_select);
    const Eigen::MatrixXcd f = params.phases.realized();
    const Eigen::MatrixXcd q = params.precoder.matrix();
    const auto& a = prob.steering;

    if (!s1_pinned && (s1.rows() != prob.m_rf || s1.cols() != prob.n_rf))
        throw std::invalid_argument("engine: RF selector shape mismatch");
    if (!s2_pinned && (s2.rows() != prob.m_t || s2.cols() != prob.geometry.n_antennas))
        throw std::invalid_argument("engine: antenna selector shape mismatch");
    if (f.rows() != prob.geometry.n_antennas || f.cols() != prob.n_rf)
        throw std::invalid_argument("engine: phase network shape mismatch");
    if (q.rows() != prob.n_rf || q.cols() != prob.n_rf)
        throw std::invalid_argument("engine: precoder shape mismatch");

    // sa = S2 A, sf = S2 F, head = A^H S2^T S2 F
    const Eigen::MatrixXcd sa = s2_pinned ? a : real_times_complex(s2, a);
    const Eigen::MatrixXcd sf = s2_pinned ? f : real_times_complex(s2, f);
    const Eigen::MatrixXcd head = sa.adjoint() * sf; // K x n_rf

    // sq = S1 Q, t1 = head S1^T, w = A^H S2^T S2 F S1^T S1 Q
    const Eigen::MatrixXcd sq = s1_pinned ? q : real_times_complex(s1, q);
    const Eigen::MatrixXcd t1 = s1_pinned ? head : complex_times_real(head, s1.transpose());
    const Eigen::MatrixXcd w = s1_pinned ? Eigen::MatrixXcd(head * q) : Eigen::MatrixXcd(t1 * sq);

    Eigen::VectorXd power;
    Eigen::MatrixXcd outputs;
    if (path == PowerPath::Empirical) {
        if (!batch)
            throw std::invalid_argument("engine: empirical power path needs a snapshot batch");
        if (batch->samples.rows() != prob.n_rf)
            throw std::invalid_argument("engine: snapshot rows != n_rf");
        outputs = w * batch->samples;
        power = outputs.rowwise().squaredNorm() / static_cast<double>(batch->count());
    } else {
        power = w.rowwise().squaredNorm();
    }

    EngineOutput out;
    out.loss.pattern = beampattern_error(prob.target, power);
    out.loss.penalty_rf = s1_pinned ? 0.0 : orthonormality_penalty(s1);
    out.loss.penalty_antenna = s2_pinned ? 0.0 : orthonormality_penalty(s2);
    out.loss.total = out.loss.pattern + alpha_rf * out.loss.penalty_rf +
                     alpha_antenna * out.loss.penalty_antenna;
    if (!group)
        return out;

    // Conjugate-convention gradient of the pattern term w.r.t. w
    // (d/dRe + j d/dIm). Residual scaling: 2 gamma (power - p) through the
    // squared error, times 2 w through |.|^2.
    const Eigen::ArrayXd residual =
        prob.target.weights.array() * (power - prob.target.desired_power).array();
    Eigen::MatrixXcd grad_w;
    if (path == PowerPath::Empirical) {
        const double t_count = static_cast<double>(batch->count());
        const Eigen::MatrixXcd grad_y =
            (outputs.array().colwise() * (residual * (4.0 / t_count)).cast<std::complex<double>>())
                .matrix();
        grad_w = grad_y * batch->samples.adjoint();
    } else {
        grad_w = (w.array().colwise() * (residual * 4.0).cast<std::complex<double>>()).matrix();
    }

    switch (*group) {
    case ParamGroup::Precoder: {
        // w = C q with C = head S1^T S1; grad_q = C^H grad_w
        const Eigen::MatrixXcd chain = s1_pinned ? head : Eigen::MatrixXcd(complex_times_real(t1, s1));
        const Eigen::MatrixXcd grad_q = chain.adjoint() * grad_w;
        out.grads.q_real = grad_q.real();
        out.grads.q_imag = grad_q.imag();
        break;
    }
    case ParamGroup::Phases: {
        // w = (A^H S2^T S2) F (S1^T S1 q); grad_f = (S2^T S2 A) grad_w (q^H S1^T S1)
        const Eigen::MatrixXcd left = s2_pinned ? a : real_times_complex(s2.transpose(), sa);
        const Eigen::MatrixXcd right_head = sq.adjoint(); // q^H S1^T
        const Eigen::MatrixXcd right =
            s1_pinned ? Eigen::MatrixXcd(q.adjoint()) : Eigen::MatrixXcd(complex_times_real(right_head, s1));
        const Eigen::MatrixXcd grad_f = left * grad_w * right;
        // dRe(F)/dPhi = -Im(F), dIm(F)/dPhi = Re(F)
        out.grads.phases = (grad_f.array() * f.conjugate().array()).imag();
        break;
    }
    case ParamGroup::RfBias: {
        // w = head S1^T S1 q; z = head^H grad_w q^H
        const Eigen::MatrixXcd z = head.adjoint() * grad_w * q.adjoint();
        const Eigen::MatrixXd z_sym = z.real() + z.real().transpose();
        Eigen::MatrixXd grad_s1 = s1 * z_sym;
        if (alpha_rf != 0.0) {
            const Eigen::MatrixXd gram =
                s1 * s1.transpose() - Eigen::MatrixXd::Identity(prob.m_rf, prob.m_rf);
            grad_s1.noalias() += (4.0 * alpha_rf) * gram * s1;
        }
        // softmax backprop per row: s .* (g - <g, s>)
        out.grads.rf_bias.resize(s1.rows(), s1.cols());
        for (Eigen::Index m = 0; m < s1.rows(); ++m) {
            const double dot = grad_s1.row(m).dot(s1.row(m));
            out.grads.rf_bias.row(m) = s1.row(m).array() * (grad_s1.row(m).array() - dot);
        }
        break;
    }
    case ParamGroup::AntennaBias: {
        // w = A^H S2^T S2 m4 with m4 = F S1^T S1 q; z = A grad_w m4^H
        const Eigen::MatrixXcd m4 =
            s1_pinned ? Eigen::MatrixXcd(f * q) : Eigen::MatrixXcd(complex_times_real(f, s1.transpose()) * sq);
        const Eigen::MatrixXcd z = a * grad_w * m4.adjoint();
        const Eigen::MatrixXd z_sym = z.real() + z.real().transpose();
        Eigen::MatrixXd grad_s2 = s2 * z_sym;
        if (alpha_antenna != 0.0) {
            const Eigen::MatrixXd gram =
                s2 * s2.transpose() - Eigen::MatrixXd::Identity(prob.m_t, prob.m_t);
            grad_s2.noalias() += (4.0 * alpha_antenna) * gram * s2;
        }
        out.grads.antenna_bias.resize(s2.rows(), s2.cols());
        for (Eigen::Index m = 0; m < s2.rows(); ++m) {
            const double dot = grad_s2.row(m).dot(s2.row(m));
            out.grads.antenna_bias.row(m) = s2.row(m).array() * (grad_s2.row(m).array() - dot);
        }
        break;
    }
    }

    const Eigen::MatrixXd* tensors[] = {&out.grads.rf_bias, &out.grads.antenna_bias,
                                        &out.grads.phases, &out.grads.q_real, &out.grads.q_imag};
    for (const auto* t : tensors) {
        if (t->size() > 0 && !t->allFinite())
            throw DivergenceError(std::string("gradient: non-finite values in group ") +
                                      to_string(*group),
                                  DivergenceInfo{0, to_string(*group), 0, out.loss.total,
                                                 alpha_rf, alpha_antenna});
    }
    return out;
}

void validate_plan(const TrainPlan& plan, const HadProblem& prob) {
    if (plan.n_epochs < 1)
        throw ConfigError("plan.epochs: must be >= 1");
    if (plan.n_steps < 1)
        throw ConfigError("plan.steps: must be >= 1");
    if (!(plan.lr > 0.0))
        throw ConfigError("plan.lr: must be > 0");
    const auto check_schedule = [](const AlphaSchedule& s, const char* key) {
        if (s.start < 0.0 || s.end < s.start)
            throw ConfigError(std::string(key) + ": requires 0 <= init <= final");
    };
    check_schedule(plan.alpha, "plan.alpha");
    if (plan.alpha_rf)
        check_schedule(*plan.alpha_rf, "plan.alpha1");
    if (plan.alpha_antenna)
        check_schedule(*plan.alpha_antenna, "plan.alpha2");
    if (plan.power_path == PowerPath::Empirical && plan.snapshots <= std::max(prob.m_rf, prob.m_t))
        throw ConfigError("plan.snapshots: must exceed max(m_rf, m_t) = " +
                          std::to_string(std::max(prob.m_rf, prob.m_t)));
}

} // namespace

LossTerms evaluate_loss(const HadProblem& problem, const ModelParams& params,
                        const SnapshotBatch* batch, double alpha_rf, double alpha_antenna,
                        PowerPath path) {
    return engine(nullptr, problem, params, batch, alpha_rf, alpha_antenna, path).loss;
}

Gradients gradient(ParamGroup group, const HadProblem& problem, const ModelParams& params,
                   const SnapshotBatch* batch, double alpha_rf, double alpha_antenna,
                   PowerPath path) {
    return engine(&group, problem, params, batch, alpha_rf, alpha_antenna, path).grads;
}

AdamMoments AdamMoments::zeros(Eigen::Index rows, Eigen::Index cols) {
    return AdamMoments{Eigen::ArrayXXd::Zero(rows, cols), Eigen::ArrayXXd::Zero(rows, cols)};
}

Eigen::ArrayXXd adam_step(AdamMoments& moments, const Eigen::ArrayXXd& grad, double lr,
                          long step_index, const AdamParams& hp) {
    if (step_index < 1)
        throw std::invalid_argument("adam_step: step_index must be >= 1");
    if (moments.m.rows() != grad.rows() || moments.m.cols() != grad.cols())
        throw std::invalid_argument("adam_step: moment buffers must match gradient shape");
    moments.m = hp.beta1 * moments.m + (1.0 - hp.beta1) * grad;
    moments.v = hp.beta2 * moments.v + (1.0 - hp.beta2) * grad.square();
    const double m_corr = 1.0 - std::pow(hp.beta1, static_cast<double>(step_index));
    const double v_corr = 1.0 - std::pow(hp.beta2, static_cast<double>(step_index));
    return (-lr) * (moments.m / m_corr) / ((moments.v / v_corr).sqrt() + hp.eps);
}

TrainState init_state(const HadProblem& problem, const TrainPlan& plan) {
    TrainState st;
    st.params = init_params(problem, plan.seed);
    const auto& p = st.params;
    st.adam_rf_bias = AdamMoments::zeros(p.rf_select.biases.rows(), p.rf_select.biases.cols());
    st.adam_antenna_bias =
        AdamMoments::zeros(p.antenna_select.biases.rows(), p.antenna_select.biases.cols());
    st.adam_phases = AdamMoments::zeros(p.phases.phases.rows(), p.phases.phases.cols());
    st.adam_q_real = AdamMoments::zeros(p.precoder.q_real.rows(), p.precoder.q_real.cols());
    st.adam_q_imag = AdamMoments::zeros(p.precoder.q_imag.rows(), p.precoder.q_imag.cols());
    st.snapshot_rng.seed(derive_seed(plan.seed, SeedStream::Snapshots));
    if (plan.power_path == PowerPath::Empirical && !plan.resample_per_step)
        st.fixed_batch = draw_snapshots(problem.n_rf, plan.snapshots, st.snapshot_rng);
    return st;
}

void run_stage(TrainState& state, ParamGroup group, int n_steps, const TrainPlan& plan,
               const HadProblem& problem) {
    if (n_steps < 0)
        throw std::invalid_argument("run_stage: n_steps must be >= 0");
    if ((group == ParamGroup::RfBias && problem.rf_pinned()) ||
        (group == ParamGroup::AntennaBias && problem.antenna_pinned()))
        throw std::invalid_argument("run_stage: selector group is pinned to identity");

    const double a_rf = alpha_rf_at(plan, state.epoch);
    const double a_ant = alpha_antenna_at(plan, state.epoch);

    for (int s = 0; s < n_steps; ++s) {
        SnapshotBatch fresh;
        const SnapshotBatch* batch = nullptr;
        if (plan.power_path == PowerPath::Empirical) {
            if (plan.resample_per_step) {
                fresh = draw_snapshots(problem.n_rf, plan.snapshots, state.snapshot_rng);
                batch = &fresh;
            } else {
                if (!state.fixed_batch)
                    throw std::invalid_argument("run_stage: fixed-batch mode without a fixed batch");
                batch = &*state.fixed_batch;
            }
        }

        const EngineOutput eval = engine(&group, problem, state.params, batch, a_rf, a_ant,
                                         plan.power_path);
        if (!std::isfinite(eval.loss.total) || eval.loss.total > 1e12) {
            throw DivergenceError(
                "training diverged at epoch " + std::to_string(state.epoch) + ", stage " +
                    to_string(group) + ": loss = " + std::to_string(eval.loss.total),
                DivergenceInfo{state.epoch, to_string(group), state.global_step + 1,
                               eval.loss.total, a_rf, a_ant});
        }

        switch (group) {
        case ParamGroup::RfBias:
            state.params.rf_select.biases +=
                adam_step(state.adam_rf_bias, eval.grads.rf_bias.array(), plan.lr,
                          ++state.steps_rf, plan.adam)
                    .matrix();
            break;
        case ParamGroup::AntennaBias:
            state.params.antenna_select.biases +=
                adam_step(state.adam_antenna_bias, eval.grads.antenna_bias.array(), plan.lr,
                          ++state.steps_antenna, plan.adam)
                    .matrix();
            break;
        case ParamGroup::Phases:
            state.params.phases.phases +=
                adam_step(state.adam_phases, eval.grads.phases.array(), plan.lr,
                          ++state.steps_phases, plan.adam)
                    .matrix();
            break;
        case ParamGroup::Precoder:
            // one step counter for the group, two real tensors
            ++state.steps_precoder;
            state.params.precoder.q_real +=
                adam_step(state.adam_q_real, eval.grads.q_real.array(), plan.lr,
                          state.steps_precoder, plan.adam)
                    .matrix();
            state.params.precoder.q_imag +=
                adam_step(state.adam_q_imag, eval.grads.q_imag.array(), plan.lr,
                          state.steps_precoder, plan.adam)
                    .matrix();
            break;
        }

        ++state.global_step;
        state.history.push_back(StepRecord{state.global_step, state.epoch, group, eval.loss,
                                           a_rf, a_ant});
    }
}

TrainResult train(const TrainPlan& plan, const HadProblem& problem) {
    validate_plan(plan, problem);
    TrainState st = init_state(problem, plan);
    for (int epoch = 1; epoch <= plan.n_epochs; ++epoch) {
        st.epoch = epoch;
        if (!problem.rf_pinned())
            run_stage(st, ParamGroup::RfBias, plan.n_steps, plan, problem);
        run_stage(st, ParamGroup::Phases, plan.n_steps, plan, problem);
        if (!problem.antenna_pinned())
            run_stage(st, ParamGroup::AntennaBias, plan.n_steps, plan, problem);
        run_stage(st, ParamGroup::Precoder, plan.n_steps, plan, problem);
    }
    HardSelection rf = problem.rf_pinned() ? identity_selection(problem.n_rf)
                                           : harden(st.params.rf_select);
    HardSelection antenna = problem.antenna_pinned()
                                ? identity_selection(problem.geometry.n_antennas)
                                : harden(st.params.antenna_select);
    return TrainResult{std::move(st), std::move(rf), std::move(antenna)};
}

} // namespace beamforge
