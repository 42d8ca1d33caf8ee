#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stosc/errors.hpp"
#include "stosc/integrators.hpp"
#include "support.hpp"

using namespace stosc;
using testing_support::make_spec;
using testing_support::SpectrumKind;

namespace {

constexpr double kPi = std::numbers::pi;

// Var of component i after n + 1 LL steps: h sum_{r=0..n} sum_l ((M^r Q)_{il})^2,
// with M from the Taylor exponential.
std::vector<double> brute_force_ll_variance(const CoupledOscillatorSpec& spec, const Mat& q, double h,
                                            Eigen::Index i, std::size_t n) {
    const oracle::Matrix m = oracle::taylor_exp(oracle::drift(spec.lambda().matrix()) * h);
    oracle::Matrix mr_q = q;
    std::vector<double> out;
    double acc = 0.0;
    for (std::size_t r = 0; r <= n; ++r) {
        acc += h * mr_q.row(i).squaredNorm();
        out.push_back(acc);
        mr_q = m * mr_q;
    }
    return out;
}

}  // namespace

TEST(LLStepper, Threshold) {
    const CoupledOscillatorSpec spec = testing_support::reference_d2();
    const double lmax = (3.0 + std::sqrt(2.0)) / 2.0;
    EXPECT_NEAR(ll_threshold(spec), kPi / lmax, 1e-14);
    EXPECT_TRUE(LLStepper(spec, 0.9 * kPi / lmax).below_threshold());
    EXPECT_FALSE(LLStepper(spec, 1.5 * kPi / lmax).below_threshold());
}

TEST(LLStepper, QuarterTurn) {
    const LLStepper stepper(testing_support::scalar_spec(1.0, 1.0), kPi / 2.0);
    Vec s(2);
    s << 1.0, 0.0;
    const Vec next = ll_step(stepper, s, Vec::Zero(1));
    EXPECT_NEAR(next(0), 0.0, 1e-15);
    EXPECT_NEAR(next(1), -1.0, 1e-15);
}

TEST(LLStepper, RejectsBadInputs) {
    const CoupledOscillatorSpec spec = testing_support::reference_d2();
    EXPECT_THROW(LLStepper(spec, 0.0), PreconditionError);
    EXPECT_THROW(LLStepper(spec, 0.1, Mat::Zero(3, 2)), ValidationError);
}

TEST(LLStepper, IterationIsGroupProperty) {
    std::mt19937_64 gen(101);
    for (int trial = 0; trial < 20; ++trial) {
        const CoupledOscillatorSpec spec =
            testing_support::random_spec(1 + trial % 4, 2, static_cast<SpectrumKind>(trial % 3), gen);
        const double h = 0.05 + 0.03 * trial;
        const LLStepper stepper(spec, h);
        Vec s = spec.initial_state();
        const std::size_t r = 25;
        for (std::size_t k = 0; k < r; ++k) s = stepper.step(s, Vec::Zero(2));
        const oracle::Matrix mr = oracle::taylor_exp(oracle::drift(spec.lambda().matrix()) * (h * r));
        EXPECT_LE((s - mr * spec.initial_state()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(LLStepper, PropagatorMatchesAugmentedForm) {
    std::mt19937_64 gen(102);
    const CoupledOscillatorSpec spec = testing_support::reference_d2().with_initial(Vec::Constant(2, 0.7), Vec::Constant(2, -0.3));
    const double h = 0.2;
    const Mat c = ll_augmented_matrix(spec, spec.initial_state());
    const Mat e = augmented_exp(c, h);
    const Vec u = e.col(4).head(4);
    const oracle::Matrix eah = oracle::taylor_exp(oracle::drift(spec.lambda().matrix()) * h);
    EXPECT_LE((u - (eah - oracle::Matrix::Identity(4, 4)) * spec.initial_state()).cwiseAbs().maxCoeff(), 1e-10);

    const LLStepper stepper(spec, h);
    RngStream rng(4, 0);
    const Vec dw = rng.normals(2, h);
    EXPECT_LE((stepper.step(spec.initial_state(), dw) -
               ll_step_augmented(spec, h, spec.initial_state(), dw, stepper.q()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
    EXPECT_LE((stepper.propagator() - eah).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LLIntegrate, NoiselessIsExactRotation) {
    const CoupledOscillatorSpec spec =
        testing_support::reference_d2().with_pi(Mat::Zero(2, 2)).with_initial(Vec::Ones(2), Vec::Zero(2));
    RngStream rng(1, 1);
    const TrajectoryGrid g = ll_integrate(spec, 0.1, 100, rng);
    ASSERT_TRUE(g.below_threshold.has_value());
    EXPECT_TRUE(*g.below_threshold);
    const oracle::Matrix m = oracle::taylor_exp(oracle::drift(spec.lambda().matrix()) * 10.0);
    EXPECT_LE((g.states.row(100).transpose() - m * spec.initial_state()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(g.provenance.scheme, Scheme::ll);
}

TEST(LLIntegrate, AboveThresholdRunsAndFlags) {
    const CoupledOscillatorSpec spec = testing_support::reference_d2();
    RngStream rng(1, 2);
    const TrajectoryGrid g = ll_integrate(spec, 1.5 * ll_threshold(spec), 50, rng);
    EXPECT_EQ(g.states.rows(), 51);
    EXPECT_FALSE(*g.below_threshold);
    EXPECT_TRUE(g.states.allFinite());
}

TEST(LLIntegrate, IncrementsMatchStreamDraws) {
    const CoupledOscillatorSpec spec = testing_support::reference_d2();
    RngStream a(3, 3), b(3, 3);
    const TrajectoryGrid g = ll_integrate(spec, 0.1, 30, a);
    Mat inc(30, 2);
    for (Eigen::Index n = 0; n < 30; ++n) inc.row(n) = b.normals(2, 0.1).transpose();
    const TrajectoryGrid h = ll_integrate_increments(LLStepper(spec, 0.1), inc);
    EXPECT_EQ((g.states - h.states).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LLCoefficients, ScalarVelocityNoise) {
    const LLCoefficients c = ll_coefficients(testing_support::scalar_spec(2.0, 3.0), 0);
    EXPECT_EQ(c.e(0, 0), 0.0);
    EXPECT_NEAR(c.f(0, 0), 1.5, 1e-15);
    EXPECT_NEAR(c.phase(0), kPi / 2.0, 0.0);
    EXPECT_NEAR(c.amplitude(0), 1.5, 1e-15);
}

TEST(LLCoefficients, PhaseFollowsCaseSplit) {
    const CoupledOscillatorSpec spec = testing_support::scalar_spec(2.0, 1.0);
    Mat q(2, 1);
    q << 0.5, 3.0;
    const LLCoefficients c = ll_coefficients(spec, 0, q);
    EXPECT_NEAR(c.e(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(c.f(0, 0), 1.5, 1e-15);
    EXPECT_NEAR(c.phase(0), std::atan(3.0), 1e-15);
}

TEST(LLCoefficients, AmplitudesAreNonNegativeAndVanishOnlyWithBothSums) {
    std::mt19937_64 gen(103);
    for (int trial = 0; trial < 20; ++trial) {
        const CoupledOscillatorSpec spec = testing_support::random_spec(3, 2, SpectrumKind::generic, gen);
        std::normal_distribution<double> n01;
        Mat q(6, 2);
        for (Eigen::Index r = 0; r < 6; ++r)
            for (Eigen::Index c = 0; c < 2; ++c) q(r, c) = n01(gen);
        if (trial % 4 == 0) q.setZero();
        for (Eigen::Index i = 0; i < 3; ++i) {
            const LLCoefficients c = ll_coefficients(spec, i, q);
            for (Eigen::Index j = 0; j < 3; ++j) {
                EXPECT_GE(c.amplitude(j), 0.0);
                const bool zero_sums = c.e.row(j).sum() == 0.0 && c.f.row(j).sum() == 0.0;
                EXPECT_EQ(c.amplitude(j) == 0.0, zero_sums);
            }
        }
    }
}

TEST(LLCoefficients, DegenerateMergeKeepsVariance) {
    const CoupledOscillatorSpec spec = make_spec(oracle::Matrix::Identity(2, 2), oracle::Matrix::Identity(2, 2));
    Mat q(4, 2);
    q << 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0;
    const LLCoefficients c = ll_coefficients(spec, 0, q);
    EXPECT_EQ(c.groups(), 1);
    const double h = 0.3;
    const std::vector<double> want = brute_force_ll_variance(spec, q, h, 0, 40);
    const std::vector<double> got = ll_s_n_sq_series(c, h, 40);
    for (std::size_t n = 0; n <= 40; ++n) EXPECT_NEAR(got[n], want[n], 1e-12 * want[n]);
}

TEST(LLSigma, DirectSubstitution) {
    const LLCoefficients c = ll_coefficients(testing_support::scalar_spec(1.0, 1.0), 0);
    EXPECT_NEAR(ll_sigma_nr_sq(c, kPi / 2.0, 1), kPi / 2.0, 1e-15);
}

TEST(LLSigma, TelescopingAndBruteForce) {
    std::mt19937_64 gen(104);
    for (int trial = 0; trial < 6; ++trial) {
        const CoupledOscillatorSpec spec =
            testing_support::random_spec(2 + trial % 2, 2, static_cast<SpectrumKind>(trial % 3), gen);
        const double h = 0.5 * ll_threshold(spec);
        for (Eigen::Index i = 0; i < spec.dim(); ++i) {
            const LLCoefficients c = ll_coefficients(spec, i);
            const std::vector<double> want = brute_force_ll_variance(spec, as_linear_system(spec).diffusion, h, i, 200);
            for (const std::size_t n : {0u, 1u, 7u, 200u}) {
                EXPECT_NEAR(ll_s_n_sq(c, h, n), want[n], 1e-10 * want[n]);
                if (n > 0) {
                    EXPECT_NEAR(ll_s_n_sq(c, h, n) - ll_s_n_sq(c, h, n - 1), ll_sigma_nr_sq(c, h, n),
                                1e-12 * want[n]);
                }
            }
        }
    }
}

TEST(LLSlope, AsymptoticRatioWithinTwoPercent) {
    std::mt19937_64 gen(105);
    for (int trial = 0; trial < 6; ++trial) {
        const CoupledOscillatorSpec spec =
            testing_support::random_spec(2 + trial % 2, 1 + trial % 2, static_cast<SpectrumKind>(trial % 3), gen);
        const double h = 0.9 * ll_threshold(spec);
        for (Eigen::Index i = 0; i < spec.dim(); ++i) {
            const LLCoefficients c = ll_coefficients(spec, i);
            const LLSlope slope = ll_slope(c, h);
            EXPECT_TRUE(slope.below_threshold);
            ASSERT_GT(slope.value, 0.0);
            const double sn = brute_force_ll_variance(spec, as_linear_system(spec).diffusion, h, i, 10000).back();
            EXPECT_LE(std::abs(sn / 10000.0 - slope.value), 0.02 * slope.value);
        }
    }
}

TEST(LLSlope, SingleChannelMatchesAmplitudeFormula) {
    std::mt19937_64 gen(106);
    const CoupledOscillatorSpec spec = testing_support::random_spec(3, 1, SpectrumKind::generic, gen);
    const double h = 0.4 * ll_threshold(spec);
    const LLCoefficients c = ll_coefficients(spec, 2);
    EXPECT_NEAR(ll_slope(c, h).value, 0.5 * h * c.amplitude.squaredNorm(), 1e-14);
}

TEST(LLSlope, ResonantStepIsFlagged) {
    const LLCoefficients c = ll_coefficients(testing_support::scalar_spec(1.0, 1.0), 0);
    const double h = 2.0 * kPi;
    EXPECT_FALSE(ll_slope(c, h).below_threshold);
    // theta = 0 mod 2 pi: every r contributes the same term, sin(r lambda h) = 0.
    for (std::size_t r = 1; r < 5; ++r) EXPECT_NEAR(ll_sigma_nr_sq(c, h, r), 0.0, 1e-20);
}

TEST(EulerMaruyama, OneStepFormula) {
    const CoupledOscillatorSpec spec = testing_support::scalar_spec(1.0, 0.0, 1.0, 0.0);
    const TrajectoryGrid g = em_integrate_increments(spec, 0.1, Mat::Zero(1, 1));
    EXPECT_NEAR(g.x(1, 0), 1.0, 1e-15);
    EXPECT_NEAR(g.y(1, 0), -0.1, 1e-15);
}

TEST(EulerMaruyama, NoiselessSpiralsOutward) {
    const CoupledOscillatorSpec spec = testing_support::scalar_spec(1.0, 0.0, 1.0, 0.0);
    RngStream rng(0, 0);
    const TrajectoryGrid g = em_integrate(spec, 0.05, 500, rng);
    for (Eigen::Index n = 1; n <= 500; ++n) ASSERT_GT(g.states.row(n).norm(), g.states.row(n - 1).norm());
}

TEST(EulerMaruyama, PendulumDoesNotDiverge) {
    const NonlinearDriftSpec spec = make_pendulum_spec(PendulumPairSpec{});
    RngStream rng(7, 0);
    const TrajectoryGrid g = em_integrate(spec, 1e-3, 50000, rng);
    EXPECT_FALSE(g.diverged_at.has_value());
    EXPECT_TRUE(g.states.allFinite());
    EXPECT_EQ(g.provenance.scheme, Scheme::em);
}

TEST(EulerMaruyama, DivergenceIsFlagged) {
    NonlinearDriftSpec spec;
    spec.d = 1;
    spec.drift = [](const Vec& x, const Vec&) { return Vec(-1e150 * x); };
    spec.pi = Mat::Zero(1, 1);
    spec.x0 = Vec::Ones(1);
    spec.y0 = Vec::Zero(1);
    RngStream rng(0, 0);
    const TrajectoryGrid g = em_integrate(spec, 0.1, 100, rng);
    ASSERT_TRUE(g.diverged_at.has_value());
    EXPECT_LT(*g.diverged_at, 100u);
    EXPECT_TRUE(std::isnan(g.x(100, 0)));
    EXPECT_TRUE(g.states.topRows(static_cast<Eigen::Index>(*g.diverged_at)).allFinite());
}

TEST(LogLogSlope, ExactPowerLaw) {
    const std::vector<double> x{0.1, 0.05, 0.025};
    std::vector<double> y;
    for (const double v : x) y.push_back(3.0 * v * v);
    EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
    EXPECT_THROW((void)loglog_slope({1.0}, {1.0}), PreconditionError);
}

TEST(ConvergenceStudy, NoiselessLLIsExact) {
    ConvergenceOptions opts;
    opts.paths = 4;
    const CoupledOscillatorSpec spec =
        testing_support::reference_d2().with_pi(Mat::Zero(2, 2)).with_initial(Vec::Ones(2), Vec::Zero(2));
    const ConvergenceStudy study = convergence_study(spec, opts);
    for (const ConvergenceRow& row : study.rows) {
        if (row.scheme == Scheme::ll) EXPECT_LE(row.strong_error, 1e-12);
        if (row.scheme == Scheme::em) EXPECT_GT(row.strong_error, 1e-3);
    }
}

TEST(ConvergenceStudy, OrderOneAndEmWorse) {
    ConvergenceOptions opts;
    opts.paths = 300;
    opts.root_seed = 11;
    const ConvergenceStudy study = convergence_study(testing_support::reference_d2(), opts);
    EXPECT_GE(study.ll_order, 0.7);
    EXPECT_LE(study.ll_order, 1.3);
    ASSERT_TRUE(study.em_order.has_value());
    EXPECT_GE(*study.em_order, 0.7);
    EXPECT_LE(*study.em_order, 1.3);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(study.rows[k].strong_error, study.rows[k + 3].strong_error);
}

TEST(ConvergenceStudy, ThreadCountDoesNotChangeResult) {
    ConvergenceOptions opts;
    opts.paths = 40;
    opts.root_seed = 5;
    const ConvergenceStudy one = convergence_study(testing_support::reference_d2(), opts);
    opts.threads = 4;
    const ConvergenceStudy four = convergence_study(testing_support::reference_d2(), opts);
    for (std::size_t k = 0; k < one.rows.size(); ++k) EXPECT_EQ(one.rows[k].strong_error, four.rows[k].strong_error);
}

TEST(ConvergenceStudy, RejectsIncommensurateSteps) {
    ConvergenceOptions opts;
    opts.paths = 4;
    opts.steps = {0.1, 0.03};
    EXPECT_THROW((void)convergence_study(testing_support::reference_d2(), opts), PreconditionError);
    opts.steps = {0.1};
    EXPECT_THROW((void)convergence_study(testing_support::reference_d2(), opts), PreconditionError);
}
