#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "beamforge/errors.hpp"
#include "beamforge/trainer.hpp"
#include "fd_support.hpp"

using namespace beamforge;
using fd_support::FdInstance;
using fd_support::check_group;
using fd_support::make_instance;

namespace {

TrainPlan small_plan(std::uint64_t seed) {
    TrainPlan plan;
    plan.n_epochs = 4;
    plan.n_steps = 5;
    plan.lr = 0.05;
    plan.alpha = {1.0, 2.0};
    plan.snapshots = 12;
    plan.seed = seed;
    return plan;
}

HadProblem small_problem() {
    const AngleGrid grid = AngleGrid::uniform(-90, 90, 9);
    return HadProblem::make({5, 0.5}, pattern_from_intervals(grid, {{-30.0, -10.0}}, 1.0),
                            4, 2, 3);
}

} // namespace

TEST_CASE("alpha schedule hits both endpoints and stays monotone") {
    const AlphaSchedule paper{3200.0, 16000.0};
    CHECK(alpha_at(paper, 1, 400) == doctest::Approx(3200.0));
    CHECK(alpha_at(paper, 400, 400) == doctest::Approx(16000.0));

    const AlphaSchedule second{320.0, 1600.0};
    CHECK(alpha_at(second, 1, 400) == doctest::Approx(320.0));

    double previous = -1.0;
    for (int epoch = 1; epoch <= 400; ++epoch) {
        const double value = alpha_at(paper, epoch, 400);
        CHECK(value >= previous);
        previous = value;
    }

    CHECK(alpha_at(AlphaSchedule{5.0, 9.0}, 1, 1) == doctest::Approx(5.0));
    CHECK_THROWS_AS(alpha_at(paper, 0, 400), std::domain_error);
    CHECK_THROWS_AS(alpha_at(paper, 401, 400), std::domain_error);
}

TEST_CASE("per-selector alpha overrides") {
    TrainPlan plan;
    plan.n_epochs = 11;
    plan.alpha = {10.0, 20.0};
    CHECK(alpha_rf_at(plan, 6) == doctest::Approx(15.0));
    CHECK(alpha_antenna_at(plan, 6) == doctest::Approx(15.0));
    plan.alpha_rf = AlphaSchedule{0.0, 100.0};
    CHECK(alpha_rf_at(plan, 6) == doctest::Approx(50.0));
    CHECK(alpha_antenna_at(plan, 6) == doctest::Approx(15.0));
}

TEST_CASE("first adam step moves by about the learning rate") {
    AdamMoments moments = AdamMoments::zeros(1, 1);
    Eigen::ArrayXXd grad(1, 1);
    grad(0, 0) = 1.0;
    const auto delta = adam_step(moments, grad, 0.01, 1, AdamParams{});
    CHECK(std::abs(delta(0, 0) - (-0.01)) < 1e-6);
}

TEST_CASE("zero gradient with zero moments does not move") {
    AdamMoments moments = AdamMoments::zeros(2, 2);
    const auto delta = adam_step(moments, Eigen::ArrayXXd::Zero(2, 2), 0.05, 1, AdamParams{});
    CHECK((delta == 0.0).all());
}

TEST_CASE("equal gradient histories produce identical deltas") {
    AdamMoments moments = AdamMoments::zeros(1, 2);
    AdamParams hp;
    for (long step = 1; step <= 5; ++step) {
        Eigen::ArrayXXd grad(1, 2);
        const double value = 0.3 * static_cast<double>(step) - 0.8;
        grad << value, value;
        const auto delta = adam_step(moments, grad, 0.02, step, hp);
        CHECK(delta(0, 0) == delta(0, 1));
    }
    CHECK_THROWS_AS(adam_step(moments, Eigen::ArrayXXd::Zero(1, 2), 0.02, 0, hp),
                    std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
    int total_mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const PowerPath path = seed % 2 == 0 ? PowerPath::ClosedForm : PowerPath::Empirical;
        const FdInstance inst = make_instance(seed, path);
        for (ParamGroup group : {ParamGroup::RfBias, ParamGroup::AntennaBias, ParamGroup::Phases,
                                 ParamGroup::Precoder})
            total_mismatches += check_group(inst, group);
    }
    CHECK(total_mismatches == 0);
}

TEST_CASE("bias gradients are orthogonal to per-row constant shifts") {
    for (std::uint64_t seed = 31; seed <= 40; ++seed) {
        const FdInstance inst = make_instance(seed, PowerPath::Empirical);
        const Gradients grads = gradient(ParamGroup::RfBias, inst.problem, inst.params,
                                         &inst.batch, inst.alpha_rf, inst.alpha_antenna,
                                         inst.path);
        for (Eigen::Index m = 0; m < grads.rf_bias.rows(); ++m)
            CHECK(std::abs(grads.rf_bias.row(m).sum()) < 1e-9);
    }
}

TEST_CASE("gradient vanishes at a perfect fit with zero alphas") {
    FdInstance inst = make_instance(99, PowerPath::Empirical);
    inst.alpha_rf = 0.0;
    inst.alpha_antenna = 0.0;
    const LossTerms base = evaluate_loss(inst.problem, inst.params, &inst.batch, 0.0, 0.0,
                                         PowerPath::Empirical);
    CHECK(base.pattern > 0.0);

    // make the target exactly the achieved empirical power
    const Eigen::MatrixXd s1 = soft_matrix(inst.params.rf_select);
    const Eigen::MatrixXd s2 = soft_matrix(inst.params.antenna_select);
    inst.problem.target.desired_power = empirical_power(
        soft_forward(inst.problem.steering, s1, s2, inst.params.phases.realized(),
                     inst.params.precoder.matrix(), inst.batch));

    const LossTerms fitted = evaluate_loss(inst.problem, inst.params, &inst.batch, 0.0, 0.0,
                                           PowerPath::Empirical);
    CHECK(fitted.pattern == doctest::Approx(0.0).epsilon(1e-15));

    for (ParamGroup group : {ParamGroup::RfBias, ParamGroup::AntennaBias, ParamGroup::Phases,
                             ParamGroup::Precoder}) {
        const Gradients grads = gradient(group, inst.problem, inst.params, &inst.batch, 0.0, 0.0,
                                         inst.path);
        for (const auto* tensor : {&grads.rf_bias, &grads.antenna_bias, &grads.phases,
                                   &grads.q_real, &grads.q_imag}) {
            if (tensor->size() > 0)
                CHECK(tensor->cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("gradient refuses pinned selector groups") {
    const AngleGrid grid = AngleGrid::uniform(-90, 90, 5);
    HadProblem problem = HadProblem::make({4, 0.5},
                                          pattern_from_intervals(grid, {{-10.0, 10.0}}, 1.0),
                                          3, 3, 2); // RF selector pinned
    const ModelParams params = init_params(problem, 1);
    const SnapshotBatch batch = draw_snapshots(3, 8, std::uint64_t{1});
    CHECK_THROWS_AS(gradient(ParamGroup::RfBias, problem, params, &batch, 1.0, 1.0,
                             PowerPath::Empirical),
                    std::invalid_argument);
    CHECK_NOTHROW(gradient(ParamGroup::AntennaBias, problem, params, &batch, 1.0, 1.0,
                           PowerPath::Empirical));
}

TEST_CASE("a stage only touches its own parameter group") {
    const HadProblem problem = small_problem();
    const TrainPlan plan = small_plan(7);
    TrainState state = init_state(problem, plan);
    state.epoch = 1;
    const ModelParams before = state.params;

    SUBCASE("zero steps leave everything untouched") {
        run_stage(state, ParamGroup::Phases, 0, plan, problem);
        CHECK((state.params.phases.phases.array() == before.phases.phases.array()).all());
        CHECK(state.history.empty());
    }

    SUBCASE("rf bias stage freezes phases, precoder and antenna biases") {
        run_stage(state, ParamGroup::RfBias, plan.n_steps, plan, problem);
        CHECK((state.params.rf_select.biases.array() != before.rf_select.biases.array()).any());
        CHECK((state.params.antenna_select.biases.array() ==
               before.antenna_select.biases.array())
                  .all());
        CHECK((state.params.phases.phases.array() == before.phases.phases.array()).all());
        CHECK((state.params.precoder.q_real.array() == before.precoder.q_real.array()).all());
        CHECK((state.params.precoder.q_imag.array() == before.precoder.q_imag.array()).all());
        CHECK(state.history.size() == static_cast<std::size_t>(plan.n_steps));
        CHECK(state.steps_rf == plan.n_steps);
    }

    SUBCASE("precoder stage freezes the selectors and phases") {
        run_stage(state, ParamGroup::Precoder, plan.n_steps, plan, problem);
        CHECK((state.params.precoder.q_real.array() != before.precoder.q_real.array()).any());
        CHECK((state.params.rf_select.biases.array() == before.rf_select.biases.array()).all());
        CHECK((state.params.antenna_select.biases.array() ==
               before.antenna_select.biases.array())
                  .all());
        CHECK((state.params.phases.phases.array() == before.phases.phases.array()).all());
    }
}

TEST_CASE("stages descend on average") {
    const HadProblem problem = small_problem();
    int descended = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        TrainPlan plan = small_plan(seed);
        plan.n_steps = 10;
        TrainState state = init_state(problem, plan);
        state.epoch = 1;
        run_stage(state, ParamGroup::Precoder, plan.n_steps, plan, problem);
        const double before = state.history.front().loss.total;
        double mean = 0.0;
        for (const auto& rec : state.history)
            mean += rec.loss.total;
        mean /= static_cast<double>(state.history.size());
        if (mean <= before)
            ++descended;
    }
    CHECK(descended >= 45);
}

TEST_CASE("training is deterministic and follows the stage order") {
    const HadProblem problem = small_problem();
    const TrainPlan plan = small_plan(11);

    const TrainResult first = train(plan, problem);
    const TrainResult second = train(plan, problem);
    REQUIRE(first.state.history.size() == second.state.history.size());
    CHECK(first.state.history.size() ==
          static_cast<std::size_t>(plan.n_epochs * 4 * plan.n_steps));
    for (std::size_t i = 0; i < first.state.history.size(); ++i) {
        CHECK(first.state.history[i].loss.total == second.state.history[i].loss.total);
        CHECK(first.state.history[i].stage == second.state.history[i].stage);
    }
    CHECK(first.rf_selection.indices == second.rf_selection.indices);
    CHECK(first.antenna_selection.indices == second.antenna_selection.indices);

    // epoch stage order: rf bias -> phases -> antenna bias -> precoder
    CHECK(first.state.history[0].stage == ParamGroup::RfBias);
    CHECK(first.state.history[static_cast<std::size_t>(plan.n_steps)].stage ==
          ParamGroup::Phases);
    CHECK(first.state.history[static_cast<std::size_t>(2 * plan.n_steps)].stage ==
          ParamGroup::AntennaBias);
    CHECK(first.state.history[static_cast<std::size_t>(3 * plan.n_steps)].stage ==
          ParamGroup::Precoder);
}

TEST_CASE("degenerate single-element problem trains and selects index zero") {
    const AngleGrid grid = AngleGrid::uniform(-90, 90, 5);
    HadProblem problem = HadProblem::make({1, 0.5},
                                          pattern_from_intervals(grid, {{-5.0, 5.0}}, 1.0),
                                          1, 1, 1);
    TrainPlan plan = small_plan(3);
    plan.snapshots = 4;
    const TrainResult result = train(plan, problem);
    CHECK(result.rf_selection.indices == std::vector<int>{0});
    CHECK(result.antenna_selection.indices == std::vector<int>{0});
    // both selectors pinned, so only phases and precoder stages run
    CHECK(result.state.history.size() ==
          static_cast<std::size_t>(plan.n_epochs * 2 * plan.n_steps));
    for (const auto& rec : result.state.history)
        CHECK((rec.stage == ParamGroup::Phases || rec.stage == ParamGroup::Precoder));
}

TEST_CASE("an absurd learning rate trips the divergence guard") {
    const HadProblem problem = small_problem();
    TrainPlan plan = small_plan(5);
    plan.lr = 1e8;
    plan.n_epochs = 50;
    CHECK_THROWS_AS(train(plan, problem), DivergenceError);
}

TEST_CASE("plan validation consistency") {
    const HadProblem problem = small_problem();
    TrainPlan plan = small_plan(1);
    plan.snapshots = 3; // max(m_rf, m_t) = 3, so T must exceed it
    CHECK_THROWS_AS(train(plan, problem), ConfigError);
    plan.snapshots = 4;
    CHECK_NOTHROW(train(plan, problem));
    plan.lr = 0.0;
    CHECK_THROWS_AS(train(plan, problem), ConfigError);
    plan.lr = 0.05;
    plan.alpha = {5.0, 1.0};
    CHECK_THROWS_AS(train(plan, problem), ConfigError);
}

TEST_CASE("fixed-batch mode is deterministic") {
    const HadProblem problem = small_problem();
    TrainPlan plan = small_plan(13);
    plan.resample_per_step = false;
    const TrainResult first = train(plan, problem);
    const TrainResult second = train(plan, problem);
    REQUIRE(first.state.history.size() == second.state.history.size());
    for (std::size_t i = 0; i < first.state.history.size(); ++i)
        CHECK(first.state.history[i].loss.total == second.state.history[i].loss.total);
    CHECK(first.state.fixed_batch.has_value());
}

TEST_CASE("closed-form training runs without snapshots") {
    const HadProblem problem = small_problem();
    TrainPlan plan = small_plan(17);
    plan.power_path = PowerPath::ClosedForm;
    plan.n_epochs = 12;
    const TrainResult result = train(plan, problem);
    CHECK(result.state.history.size() ==
          static_cast<std::size_t>(plan.n_epochs * 4 * plan.n_steps));
    // the alpha ramp inflates the total between epochs; the fit itself improves
    CHECK(result.state.history.back().loss.pattern <
          result.state.history.front().loss.pattern);
}
