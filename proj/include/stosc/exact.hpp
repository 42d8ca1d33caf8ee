#pragma once

#include <cstddef>
#include <vector>

#include "stosc/models.hpp"
#include "stosc/rng.hpp"
#include "stosc/trajectory.hpp"
#include "stosc/types.hpp"

namespace stosc {

/// One-step Gaussian law of the linear oscillator over a lag `step`:
///   state(t + step) = mean_map * state(t) + N(0, covariance),
/// with factor * factor^T = covariance.
struct TransitionKernel {
    double step = 0.0;
    Mat mean_map;
    Mat covariance;
    Mat factor;
};

/// Closed-form noise covariance C(t) = int_0^t e^{Au} B B^T e^{A^T u} du,
/// evaluated mode by mode in the eigenbasis of Lambda.
[[nodiscard]] Mat noise_covariance(const CoupledOscillatorSpec& spec, double t);

/// Throws PreconditionError for step <= 0.
[[nodiscard]] TransitionKernel transition_kernel(const CoupledOscillatorSpec& spec, double step);

/// Symmetric PSD square-root-style factor of a covariance matrix. Eigenvalues
/// in [-1e-12 trace, 0) are clamped to zero; anything more negative throws
/// NumericError.
[[nodiscard]] Mat covariance_factor(const Mat& cov);

/// Exact path on t_n = t0 + n * step, n = 0..steps.
[[nodiscard]] TrajectoryGrid sample_exact_path(const CoupledOscillatorSpec& spec, double step,
                                               std::size_t steps, RngStream& rng);

/// Noise-free part of component i (0-based) at time t:
///   D(t) = sum_k P_ik (cos(lambda_k tau) <P_k, x0> + lambda_k^{-1} sin(lambda_k tau) <P_k, y0>).
[[nodiscard]] double deterministic_part(const CoupledOscillatorSpec& spec, Eigen::Index i,
                                        double t);

/// Uniform bound |D(t)| <= |P|^2 (|x0| + |y0| max_k |lambda_k|^{-1}), |P| Frobenius.
[[nodiscard]] double deterministic_bound(const CoupledOscillatorSpec& spec);

/// Coefficients of the noise part of component i:
///   V(t) = sum_l int sum_k c(k, l) sin(lambda_k (t - s)) dw_l(s),
///   c(k, l) = P_ik lambda_k^{-1} <P_k, Pi_l>.
/// Equal |lambda| are merged into groups; merged(j, l) carries the
/// sign(lambda_k)-weighted sum over group j.
struct ComponentCoefficients {
    Eigen::Index component = 0;
    Vec lambdas;                      // signed eigenvalues, as in the decomposition
    Mat c;                            // d x m
    Vec group_values;                 // distinct |lambda|, descending
    std::vector<Eigen::Index> group;  // group index of each eigenvalue
    Mat merged;                       // d* x m

    [[nodiscard]] Eigen::Index groups() const { return group_values.size(); }
};

[[nodiscard]] ComponentCoefficients component_coefficients(const CoupledOscillatorSpec& spec,
                                                           Eigen::Index i);

/// Variance of the r-th increment of S_n = V(t_n) (1 <= r <= n), by exact
/// trigonometric integration.
[[nodiscard]] double sigma_nr_sq(const ComponentCoefficients& coeffs, double step, std::size_t n,
                                 std::size_t r);
/// s_n^2 = sum_{r=1..n} sigma_nr^2 = Var V(t_n).
[[nodiscard]] double s_n_sq(const ComponentCoefficients& coeffs, double step, std::size_t n);
/// lim s_n^2 / n = (step / 2) sum_{j,l} merged(j, l)^2.
[[nodiscard]] double s_n_slope(const ComponentCoefficients& coeffs, double step);

/// Closed-form int_a^b cos(w u) du and int_a^b sin(w u) du. `resonance` is the
/// |w| below which the w -> 0 limit is used.
[[nodiscard]] double cos_integral(double w, double a, double b, double resonance);
[[nodiscard]] double sin_integral(double w, double a, double b, double resonance);

// ---------------------------------------------------------------------------
// Scalar oscillator dx = y dt, dy = -alpha^2 x dt + sqrt(rho) dW  (rho is the
// total noise variance rate, sum_j sigma_j^2).

/// Which system's x-y covariance to use. `oscillator` is the system above
/// (Cov(x, y) = +rho sin^2(alpha t) / (2 alpha^2)); `auxiliary` is its mirror
/// y -> -y with drift [0 -1; alpha^2 0], whose cross term is negative.
enum class CrossSign { oscillator, auxiliary };

/// 2 x 2 covariance of (x(t), y(t)) started from the origin.
[[nodiscard]] Mat simple_oscillator_covariance(double alpha, double rho, double t,
                                               CrossSign sign = CrossSign::oscillator);

/// Transition density p(t, x, y) from the origin; Throws PreconditionError for
/// t <= 0 or rho <= 0.
[[nodiscard]] double density_simple_oscillator(double alpha, double rho, double t, double x,
                                               double y, CrossSign sign = CrossSign::oscillator);

/// int_0^{t_cut} p(s, x, y) ds by adaptive Gauss-Kronrod in log-time. The
/// untruncated integral diverges logarithmically, so this is a probe only.
/// Returns +inf at the origin.
[[nodiscard]] double lyapunov_v(double alpha, double rho, double x, double y, double t_cut);

}  // namespace stosc
