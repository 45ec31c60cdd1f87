#include <gtest/gtest.h>

#include <cmath>

#include "pgsom/policy.hpp"

using namespace pgsom;

namespace {

const PolicySpec kLinear{PolicyKind::SoftmaxLinear, 4, 3, 0};
const PolicySpec kMlp{PolicyKind::Mlp1h, 3, 3, 5};

Vec random_vec(int n, Rng& gen, double scale = 1.0) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(gen, -scale, scale);
    return v;
}

// err relative to the larger magnitude, absolute when both are small
double mixed_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double fd_of_value(const PolicySpec& spec, Vec theta, const Vec& obs, int action, int i,
                   double step = 1e-5) {
    theta[i] += step;
    const double plus = log_prob(spec, theta, obs, action);
    theta[i] -= 2 * step;
    const double minus = log_prob(spec, theta, obs, action);
    return (plus - minus) / (2 * step);
}

double fd_of_grad(const PolicySpec& spec, Vec theta, const Vec& obs, int action, int i,
                  double step = 1e-5) {
    theta[i] += step;
    const double plus = log_prob_grad(spec, theta, obs, action).grad[i];
    theta[i] -= 2 * step;
    const double minus = log_prob_grad(spec, theta, obs, action).grad[i];
    return (plus - minus) / (2 * step);
}

}  // namespace

TEST(ActionDistribution, ZeroThetaIsUniform) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(1);
        const Vec theta = Vec::Zero(spec.param_count());
        const Vec obs = random_vec(spec.obs_dim, gen);
        const Vec p = action_distribution(spec, theta, obs);
        for (int a = 0; a < spec.n_actions; ++a) EXPECT_NEAR(p[a], 1.0 / spec.n_actions, 1e-15);
    }
}

TEST(ActionDistribution, SoftmaxShiftInvariance) {
    Rng gen(2);
    Vec theta = random_vec(kLinear.param_count(), gen);
    const Vec obs = random_vec(kLinear.obs_dim, gen);
    const Vec p0 = action_distribution(kLinear, theta, obs);
    // add the same row vector to every action's weight row: logits shift by a
    // common constant, the distribution must not move
    const Vec shift = random_vec(kLinear.obs_dim, gen);
    for (int a = 0; a < kLinear.n_actions; ++a)
        for (int i = 0; i < kLinear.obs_dim; ++i) theta[a * kLinear.obs_dim + i] += shift[i];
    const Vec p1 = action_distribution(kLinear, theta, obs);
    for (int a = 0; a < kLinear.n_actions; ++a) EXPECT_NEAR(p0[a], p1[a], 1e-12);
}

TEST(ActionDistribution, SimplexInvariant) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(3);
        for (int k = 0; k < 50; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen, 2.0);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const Vec p = action_distribution(spec, theta, obs);
            EXPECT_NEAR(p.sum(), 1.0, 1e-12);
            for (int a = 0; a < spec.n_actions; ++a) EXPECT_GT(p[a], 0.0);
        }
    }
}

TEST(ActionDistribution, DimensionMismatchThrows) {
    const Vec theta = Vec::Zero(kLinear.param_count());
    EXPECT_THROW(action_distribution(kLinear, theta, Vec::Zero(2)), std::invalid_argument);
    EXPECT_THROW(action_distribution(kLinear, Vec::Zero(3), Vec::Zero(4)),
                 std::invalid_argument);
}

TEST(SampleAction, PointMassAlwaysSampled) {
    const PolicySpec spec{PolicyKind::SoftmaxLinear, 1, 2, 0};
    Vec theta(2);
    theta << 40.0, -40.0;  // p ~ (1, 4e-35)
    Vec obs(1);
    obs << 1.0;
    Rng gen(4);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_action(spec, theta, obs, gen), 0);
}

TEST(SampleAction, UniformFrequencyWithinBinomialBound) {
    const PolicySpec spec{PolicyKind::SoftmaxLinear, 1, 2, 0};
    const Vec theta = Vec::Zero(2);
    Vec obs(1);
    obs << 1.0;
    Rng gen(5);
    int zeros = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) zeros += sample_action(spec, theta, obs, gen) == 0;
    EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 0.01);
}

TEST(SampleAction, SeedReproducible) {
    Rng setup(6);
    const Vec theta = random_vec(kLinear.param_count(), setup);
    const Vec obs = random_vec(kLinear.obs_dim, setup);
    Rng a(8), b(8);
    for (int k = 0; k < 100; ++k)
        EXPECT_EQ(sample_action(kLinear, theta, obs, a), sample_action(kLinear, theta, obs, b));
}

// Hand-derived softmax-linear case: theta = 0, one-hot observation e_s.
// grad[(a*, s)] = 1 - 1/A, grad[(a', s)] = -1/A, all other coordinates 0.
TEST(LogProbDerivatives, ZeroThetaOneHotClosedForm) {
    const PolicySpec spec{PolicyKind::SoftmaxLinear, 3, 3, 0};
    const Vec theta = Vec::Zero(9);
    Vec obs = Vec::Zero(3);
    const int s = 1, action = 2;
    obs[s] = 1.0;
    const auto d = log_prob_derivatives(spec, theta, obs, action);
    const double inv_a = 1.0 / 3.0;
    for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 3; ++i) {
            const double want = i != s ? 0.0 : (a == action ? 1.0 - inv_a : -inv_a);
            EXPECT_NEAR(d.grad[a * 3 + i], want, 1e-15);
        }
    EXPECT_NEAR(d.value, std::log(inv_a), 1e-15);
}

TEST(LogProbDerivatives, ExpectedScoreIsZero) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(7);
        for (int k = 0; k < 20; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const Vec p = action_distribution(spec, theta, obs);
            Vec sum = Vec::Zero(spec.param_count());
            for (int a = 0; a < spec.n_actions; ++a)
                sum += p[a] * log_prob_derivatives(spec, theta, obs, a).grad;
            EXPECT_LT(sum.cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

// diag of E[grad^2 ln pi + score outer product] vanishes: for every (theta,
// obs), sum_a pi(a) * (hess_diag(a) + grad(a) .* grad(a)) = 0.
TEST(LogProbDerivatives, HessianDiagIdentity) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(8);
        for (int k = 0; k < 20; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const Vec p = action_distribution(spec, theta, obs);
            Vec sum = Vec::Zero(spec.param_count());
            for (int a = 0; a < spec.n_actions; ++a) {
                const auto d = log_prob_derivatives(spec, theta, obs, a);
                sum += p[a] * (d.hess_diag + d.grad.cwiseProduct(d.grad));
            }
            EXPECT_LT(sum.cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(LogProbDerivatives, GradMatchesFiniteDifferences) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(9);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const int action = k % spec.n_actions;
            const auto d = log_prob_grad(spec, theta, obs, action);
            const int i = static_cast<int>(uniform01(gen) * spec.param_count());
            worst = std::max(worst, mixed_err(d.grad[i], fd_of_value(spec, theta, obs, action, i)));
        }
        EXPECT_LT(worst, 1e-6);
    }
}

TEST(LogProbDerivatives, HessDiagMatchesFiniteDifferencesOfGrad) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(10);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const int action = k % spec.n_actions;
            const auto d = log_prob_derivatives(spec, theta, obs, action);
            const int i = static_cast<int>(uniform01(gen) * spec.param_count());
            worst = std::max(worst,
                             mixed_err(d.hess_diag[i], fd_of_grad(spec, theta, obs, action, i)));
        }
        EXPECT_LT(worst, 1e-5);
    }
}

TEST(Entropy, UniformTwoActionsIsLn2) {
    const PolicySpec spec{PolicyKind::SoftmaxLinear, 1, 2, 0};
    Vec obs(1);
    obs << 1.0;
    EXPECT_NEAR(entropy(spec, Vec::Zero(2), obs), std::log(2.0), 1e-12);
}

TEST(Entropy, PointMassLimitIsZero) {
    const PolicySpec spec{PolicyKind::SoftmaxLinear, 1, 2, 0};
    Vec theta(2);
    theta << 60.0, -60.0;
    Vec obs(1);
    obs << 1.0;
    EXPECT_NEAR(entropy(spec, theta, obs), 0.0, 1e-10);
}

TEST(Entropy, BoundedByLogActionCount) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(11);
        for (int k = 0; k < 50; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen, 3.0);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const double h = entropy(spec, theta, obs);
            EXPECT_GE(h, -1e-12);
            EXPECT_LE(h, std::log(static_cast<double>(spec.n_actions)) + 1e-12);
        }
    }
}

TEST(EntropyGrad, ZeroAtUniformStationaryPoint) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(12);
        const Vec obs = random_vec(spec.obs_dim, gen);
        const Vec g = entropy_grad(spec, Vec::Zero(spec.param_count()), obs);
        EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(EntropyGrad, MatchesFiniteDifferences) {
    for (const auto& spec : {kLinear, kMlp}) {
        Rng gen(13);
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const Vec theta = random_vec(spec.param_count(), gen);
            const Vec obs = random_vec(spec.obs_dim, gen);
            const Vec g = entropy_grad(spec, theta, obs);
            const int i = static_cast<int>(uniform01(gen) * spec.param_count());
            Vec probe = theta;
            probe[i] += 1e-5;
            const double plus = entropy(spec, probe, obs);
            probe[i] -= 2e-5;
            const double minus = entropy(spec, probe, obs);
            worst = std::max(worst, mixed_err(g[i], (plus - minus) / 2e-5));
        }
        EXPECT_LT(worst, 1e-6);
    }
}

TEST(EntropyGrad, ZeroObservationGivesZeroGradient) {
    Rng gen(14);
    const Vec theta = random_vec(kLinear.param_count(), gen);
    const Vec g = entropy_grad(kLinear, theta, Vec::Zero(kLinear.obs_dim));
    EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

// With the hidden layer configured as an identity passthrough (W1 = I,
// b = 0, identity activation) and W2 set to the linear policy's weights,
// Mlp1h reproduces SoftmaxLinear exactly, including the W2-block derivatives.
TEST(Mlp1h, IdentityPassthroughMatchesSoftmaxLinear) {
    const int n_obs = 3, n_act = 3;
    const PolicySpec lin{PolicyKind::SoftmaxLinear, n_obs, n_act, 0};
    PolicySpec mlp{PolicyKind::Mlp1h, n_obs, n_act, n_obs};
    mlp.activation = HiddenActivation::Identity;

    Rng gen(15);
    const Vec w = random_vec(lin.param_count(), gen);
    Vec theta_mlp = Vec::Zero(mlp.param_count());
    for (int j = 0; j < n_obs; ++j) theta_mlp[j * n_obs + j] = 1.0;  // W1 = I
    const int w2_off = n_obs * n_obs + n_obs;
    for (int k = 0; k < n_act * n_obs; ++k) theta_mlp[w2_off + k] = w[k];  // W2 = W

    for (int k = 0; k < 20; ++k) {
        const Vec obs = random_vec(n_obs, gen);
        const Vec p_lin = action_distribution(lin, w, obs);
        const Vec p_mlp = action_distribution(mlp, theta_mlp, obs);
        for (int a = 0; a < n_act; ++a) EXPECT_NEAR(p_lin[a], p_mlp[a], 1e-14);
        EXPECT_NEAR(entropy(lin, w, obs), entropy(mlp, theta_mlp, obs), 1e-13);

        const int action = k % n_act;
        const auto d_lin = log_prob_derivatives(lin, w, obs, action);
        const auto d_mlp = log_prob_derivatives(mlp, theta_mlp, obs, action);
        EXPECT_NEAR(d_lin.value, d_mlp.value, 1e-13);
        for (int i = 0; i < lin.param_count(); ++i) {
            EXPECT_NEAR(d_lin.grad[i], d_mlp.grad[w2_off + i], 1e-13);
            EXPECT_NEAR(d_lin.hess_diag[i], d_mlp.hess_diag[w2_off + i], 1e-12);
        }
    }
}

TEST(ParamVector, JsonRoundTripIsExact) {
    Rng gen(16);
    const Vec theta = random_vec(37, gen, 5.0);
    const nlohmann::json j = params_to_json(theta);
    const std::string text = j.dump();
    const Vec back = params_from_json(nlohmann::json::parse(text));
    ASSERT_EQ(back.size(), theta.size());
    for (int i = 0; i < theta.size(); ++i) EXPECT_EQ(back[i], theta[i]);
}

TEST(InitParams, WithinRangeAndSeeded) {
    Rng a(20), b(20);
    const Vec ta = init_params(kMlp, a);
    const Vec tb = init_params(kMlp, b);
    for (int i = 0; i < ta.size(); ++i) {
        EXPECT_LE(std::abs(ta[i]), 0.01);
        EXPECT_EQ(ta[i], tb[i]);
    }
}
