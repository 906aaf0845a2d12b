#include "stochdef/attacks.hpp"
#include "stochdef/dataset.hpp"
#include "stochdef/experiments.hpp"

#include <gtest/gtest.h>

using namespace stochdef;

namespace {

ImageTensor row(std::vector<double> v) {
    const int n = static_cast<int>(v.size());
    return ImageTensor({1, n, 1}, std::move(v));
}

struct Trained {
    SyntheticSplits data = generate_synthetic_dataset(1, {100, 5, 20});
    ClassifierParams params;
    Trained() {
        TrainConfig tc;
        tc.epochs = 15;
        tc.seed = 2;
        params = train(ClassifierParams::initialize({16, 16, 1}, 128, 10, 1), data.train, tc);
    }
};

const Trained& trained() {
    static const Trained t;
    return t;
}

} // namespace

TEST(PgdStep, LinfSignProjectAndClamp) {
    const ImageTensor x0 = row({0.5, 0.5, 0.98, 0.5});
    const ImageTensor x = row({0.5, 0.53, 0.98, 0.5});
    const ImageTensor g = row({1.0, 2.0, 3.0, 0.0});
    const ImageTensor next = pgd_step_linf(x, x0, g, 0.02, 0.04, 1);
    EXPECT_DOUBLE_EQ(next[0], 0.52);
    EXPECT_DOUBLE_EQ(next[1], 0.54);  // projected back to x0 + eps
    EXPECT_DOUBLE_EQ(next[2], 1.0);   // clamped
    EXPECT_DOUBLE_EQ(next[3], 0.5);   // sign(0) = 0
    const ImageTensor down = pgd_step_linf(x0, x0, g, 0.02, 0.04, -1);
    EXPECT_DOUBLE_EQ(down[0], 0.48);
}

TEST(PgdStep, L2NormalizedAndProjected) {
    const ImageTensor x0 = row({0.5, 0.5});
    const ImageTensor g = row({3.0, 4.0});
    const ImageTensor a = pgd_step_l2(x0, x0, g, 0.1, 1.0, 1);
    EXPECT_NEAR(a[0], 0.56, 1e-15);
    EXPECT_NEAR(a[1], 0.58, 1e-15);
    const ImageTensor b = pgd_step_l2(x0, x0, g, 0.5, 0.1, 1);
    EXPECT_NEAR(l2_norm(b - x0), 0.1, 1e-12);
    EXPECT_EQ(pgd_step_l2(a, x0, row({0.0, 0.0}), 0.1, 1.0, 1), a);
}

TEST(AttackConfig, StrengthAndValidation) {
    AttackConfig c;
    c.pgd_steps = 10;
    c.eot_samples = 5;
    EXPECT_EQ(c.strength(), 50);
    c.mode = AttackMode::targeted;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.target_label = 9;
    EXPECT_NO_THROW(c.validate());
    c.epsilon = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_EQ(norm_from_string("l2"), Norm::l2);
    EXPECT_THROW(norm_from_string("l1"), std::invalid_argument);
    EXPECT_EQ(attack_mode_from_string(to_string(AttackMode::targeted)), AttackMode::targeted);
}

TEST(Eot, IdentityDefenseGivesTheExactGradient) {
    const auto& t = trained();
    const ImageTensor& x = t.data.test.images[0];
    SeededRng rng(1, 0);
    const EotEstimate est = eot_gradient(PreprocessorSpec::identity(), t.params, x, 3, 4, rng);
    const LossAndGrad lg = loss_and_input_grad(t.params, x, 3);
    EXPECT_LE(max_abs_diff(est.grad, lg.grad), 1e-15);
    EXPECT_NEAR(est.mean_loss, lg.loss, 1e-12);
}

TEST(Eot, AveragesIndividualDrawsInOrder) {
    const auto& t = trained();
    const auto spec = PreprocessorSpec::gaussian(0.2);
    const ImageTensor& x = t.data.test.images[5];
    SeededRng a(2, 0);
    const EotEstimate est = eot_gradient(spec, t.params, x, 1, 3, a);
    SeededRng b(2, 0);
    ImageTensor sum(x.shape());
    for (int j = 0; j < 3; ++j) {
        const ThetaDraw d = sample(spec, x.shape(), b);
        sum += backward(spec, d, x, loss_and_input_grad(t.params, apply(spec, d, x), 1).grad);
    }
    EXPECT_LE(max_abs_diff(est.grad, (1.0 / 3.0) * sum), 1e-15);
}

TEST(RunAttack, StaysInBudgetAndCountsQueries) {
    const auto& t = trained();
    for (Norm norm : {Norm::linf, Norm::l2}) {
        AttackConfig c;
        c.norm = norm;
        c.epsilon = norm == Norm::linf ? 0.1 : 1.0;
        c.alpha = norm == Norm::linf ? 0.02 : 0.25;
        c.pgd_steps = 7;
        c.eot_samples = 3;
        c.seed = 5;
        const ImageTensor& x0 = t.data.test.images[2];
        const AttackTrace tr = run_attack(PreprocessorSpec::gaussian(0.1), t.params, x0, t.data.test.labels[2], c);
        EXPECT_EQ(tr.gradient_queries, c.strength());
        EXPECT_EQ(tr.step_loss.size(), 7u);
        EXPECT_TRUE(within_unit_range(tr.adversarial));
        if (norm == Norm::linf) {
            EXPECT_LE(linf_norm(tr.adversarial - x0), c.epsilon + 1e-12);
        } else {
            EXPECT_LE(l2_norm(tr.adversarial - x0), c.epsilon + 1e-12);
        }
        const AttackTrace again = run_attack(PreprocessorSpec::gaussian(0.1), t.params, x0, t.data.test.labels[2], c);
        EXPECT_EQ(again.adversarial, tr.adversarial);
    }
}

TEST(RunAttack, TargetedDescendsTowardTheTarget) {
    const auto& t = trained();
    AttackConfig c;
    c.epsilon = 0.1;
    c.alpha = 0.01;
    c.pgd_steps = 20;
    c.mode = AttackMode::targeted;
    c.target_label = 9;
    const ImageTensor& x0 = t.data.test.images[0];
    const AttackTrace tr = run_attack(PreprocessorSpec::identity(), t.params, x0, t.data.test.labels[0], c);
    EXPECT_LT(loss_and_input_grad(t.params, tr.adversarial, 9).loss, loss_and_input_grad(t.params, x0, 9).loss);
}

TEST(RunAttack, UndefendedSuccessIsNearTotal) {
    // The experiment pipeline's base model on its 200 test images.
    const ExperimentConfig config = default_experiment_config(ExperimentKind::e1);
    const ExperimentData data = load_experiment_data(config.dataset);
    const ClassifierParams params = base_model(config, data.train);
    AttackConfig c;
    c.epsilon = config.attack.epsilon;
    c.alpha = 2.0 / 255.0;
    c.pgd_steps = 50;
    int eligible = 0;
    int fooled = 0;
    for (std::size_t i = 0; i < data.test.size(); ++i) {
        const int y = data.test.labels[i];
        if (predict(params, data.test.images[i]) != y) {
            continue;
        }
        ++eligible;
        const AttackTrace tr = run_attack(PreprocessorSpec::identity(), params, data.test.images[i], y, c, i);
        fooled += predict(params, tr.adversarial) != y;
    }
    ASSERT_EQ(data.test.size(), 200u);
    ASSERT_GT(eligible, 190);
    EXPECT_GE(fooled, 0.95 * eligible);
}

TEST(RunAttack, RejectsInputsOutsideUnitRange) {
    const auto& t = trained();
    ImageTensor bad = t.data.test.images[0];
    bad[0] = 1.5;
    EXPECT_THROW(run_attack(PreprocessorSpec::identity(), t.params, bad, 0, AttackConfig{}), std::invalid_argument);
}
