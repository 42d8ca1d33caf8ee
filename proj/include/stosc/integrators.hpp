#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stosc/models.hpp"
#include "stosc/rng.hpp"
#include "stosc/trajectory.hpp"
#include "stosc/types.hpp"

namespace stosc {

/// pi / max|lambda|: below this stepsize the LL iterate provably keeps
/// infinitely many sign changes in every component.
[[nodiscard]] double ll_threshold(const CoupledOscillatorSpec& spec);

/// Locally Linearized integrator for the linear oscillator, in closed form:
///   x_{n+1} = M(h) x_n + Q dw_n,  M(h) = e^{A h}.
/// Q defaults to the diffusion B = [0; Pi].
class LLStepper {
public:
    LLStepper(CoupledOscillatorSpec spec, double h, std::optional<Mat> q = std::nullopt);

    [[nodiscard]] const CoupledOscillatorSpec& spec() const { return spec_; }
    [[nodiscard]] double step_size() const { return h_; }
    [[nodiscard]] const Mat& propagator() const { return m_; }
    [[nodiscard]] const Mat& q() const { return q_; }
    [[nodiscard]] double threshold() const { return threshold_; }
    [[nodiscard]] bool below_threshold() const { return h_ < threshold_; }

    [[nodiscard]] Vec step(const Vec& state, const Vec& dw) const { return m_ * state + q_ * dw; }

private:
    CoupledOscillatorSpec spec_;
    double h_;
    Mat m_;
    Mat q_;
    double threshold_;
};

[[nodiscard]] inline Vec ll_step(const LLStepper& stepper, const Vec& state, const Vec& dw) {
    return stepper.step(state, dw);
}

/// C_n = [0 I y_n; -Lambda^2 0 -Lambda^2 x_n; 0 0 0], size (2d+1) x (2d+1).
[[nodiscard]] Mat ll_augmented_matrix(const CoupledOscillatorSpec& spec, const Vec& state);

/// The defining form x_n + L e^{C_n h} r + Q dw, with L = [I 0] and r = e_{2d+1}.
[[nodiscard]] Vec ll_step_augmented(const CoupledOscillatorSpec& spec, double h, const Vec& state,
                                    const Vec& dw, const Mat& q);

/// LL path with dw_n ~ N(0, h I_m) drawn from `rng`; the grid records the
/// threshold flag. Stepsizes above the threshold are simulated, not refused.
[[nodiscard]] TrajectoryGrid ll_integrate(const CoupledOscillatorSpec& spec, double h,
                                          std::size_t steps, RngStream& rng,
                                          std::optional<Mat> q = std::nullopt);

/// LL path driven by given increments (one row per step).
[[nodiscard]] TrajectoryGrid ll_integrate_increments(const LLStepper& stepper, const Mat& increments,
                                                     Provenance provenance = {0, 0, Scheme::ll});

/// Component i of the LL noise term,
///   V_nr = sum_l sum_j (e(j,l) cos(r lambda_j h) + f(j,l) sin(r lambda_j h)) dw^l_{n-r},
///   e(j,l) = P_ij <P_j, Q1_l>,  f(j,l) = P_ij lambda_j^{-1} <P_j, Q2_l>.
struct LLCoefficients {
    Eigen::Index component = 0;
    Vec lambdas;
    Mat e;  // d x m
    Mat f;  // d x m
    /// amplitude_j^2 = (sum_l e(j,l))^2 + (sum_l f(j,l))^2
    Vec amplitude;
    /// atan(sum_l f / sum_l e), or pi/2 when sum_l e == 0
    Vec phase;
    Vec group_values;
    std::vector<Eigen::Index> group;
    Mat merged_e;  // plain sums over equal |lambda|
    Mat merged_f;  // sign(lambda)-weighted sums

    [[nodiscard]] Eigen::Index groups() const { return group_values.size(); }
};

/// `q` defaults to [0; Pi].
[[nodiscard]] LLCoefficients ll_coefficients(const CoupledOscillatorSpec& spec, Eigen::Index i,
                                             std::optional<Mat> q = std::nullopt);

/// Variance of V_nr (independent of n): h sum_l (sum_j e cos + f sin)^2.
[[nodiscard]] double ll_sigma_nr_sq(const LLCoefficients& coeffs, double h, std::size_t r);
/// s_n^2 = sum_{r=0..n} sigma_r^2, exact finite sum.
[[nodiscard]] double ll_s_n_sq(const LLCoefficients& coeffs, double h, std::size_t n);
/// s_0^2 .. s_n^2 in one pass.
[[nodiscard]] std::vector<double> ll_s_n_sq_series(const LLCoefficients& coeffs, double h,
                                                   std::size_t n);

struct LLSlope {
    double value = 0.0;            // (h/2) sum_{j,l} (merged_e^2 + merged_f^2)
    bool below_threshold = false;  // the limit is only guaranteed when true
};

[[nodiscard]] LLSlope ll_slope(const LLCoefficients& coeffs, double h);

/// Explicit Euler-Maruyama, linear model: x + h A x + B dw.
[[nodiscard]] TrajectoryGrid em_integrate(const CoupledOscillatorSpec& spec, double h,
                                          std::size_t steps, RngStream& rng);
/// Explicit Euler-Maruyama, nonlinear model: x += h y, y += -h f(x, y) + Pi dw.
/// A non-finite state stops the run and sets diverged_at; later rows are NaN.
[[nodiscard]] TrajectoryGrid em_integrate(const NonlinearDriftSpec& spec, double h,
                                          std::size_t steps, RngStream& rng);
[[nodiscard]] TrajectoryGrid em_integrate_increments(const CoupledOscillatorSpec& spec, double h,
                                                     const Mat& increments,
                                                     Provenance provenance = {0, 0, Scheme::em});

/// Strong-error study on the linear model. Each path draws one fine Brownian
/// path at h_min / 2^refine_power; coarse schemes consume summed fine
/// increments and are compared at the horizon with the LL solution on the
/// fine grid.
struct ConvergenceRow {
    Scheme scheme = Scheme::ll;
    double h = 0.0;
    double strong_error = 0.0;  // mean Euclidean state error at the horizon
    double standard_error = 0.0;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double ll_order = 0.0;  // least-squares slope of log error vs log h
    std::optional<double> em_order;
};

struct ConvergenceOptions {
    std::vector<double> steps{0.1, 0.05, 0.025};
    double horizon = 1.0;
    std::size_t paths = 1000;
    int refine_power = 6;
    std::uint64_t root_seed = 0;
    bool include_em = true;
    unsigned threads = 1;
};

/// Every step must divide the horizon and the smallest step; throws
/// PreconditionError otherwise.
[[nodiscard]] ConvergenceStudy convergence_study(const CoupledOscillatorSpec& spec,
                                                 const ConvergenceOptions& options);

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stosc
