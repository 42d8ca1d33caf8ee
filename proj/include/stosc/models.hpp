#pragma once

#include <functional>

#include "stosc/linalg.hpp"
#include "stosc/types.hpp"

namespace stosc {

/// Linear coupled oscillator  dx = y dt,  dy = -Lambda^2 x dt + Pi dw.
///
/// Lambda must be symmetric and nonsingular; its spectral decomposition is
/// computed once at construction and shared by every closed form downstream.
class CoupledOscillatorSpec {
public:
    CoupledOscillatorSpec(SymMatrix lambda, Mat pi, Vec x0, Vec y0, double t0 = 0.0);

    [[nodiscard]] Eigen::Index dim() const { return lambda_.dim(); }
    [[nodiscard]] Eigen::Index noise_dim() const { return pi_.cols(); }
    [[nodiscard]] const SymMatrix& lambda() const { return lambda_; }
    [[nodiscard]] const Mat& pi() const { return pi_; }
    [[nodiscard]] const Vec& x0() const { return x0_; }
    [[nodiscard]] const Vec& y0() const { return y0_; }
    [[nodiscard]] double t0() const { return t0_; }
    [[nodiscard]] const SpectralDecomposition& spectrum() const { return spectrum_; }
    /// (x0; y0)
    [[nodiscard]] Vec initial_state() const;

    /// Same model with a different noise matrix / initial condition.
    [[nodiscard]] CoupledOscillatorSpec with_pi(Mat pi) const;
    [[nodiscard]] CoupledOscillatorSpec with_initial(Vec x0, Vec y0) const;

private:
    SymMatrix lambda_;
    Mat pi_;
    Vec x0_;
    Vec y0_;
    double t0_;
    SpectralDecomposition spectrum_;
};

/// Drift A = [0 I; -Lambda^2 0] and diffusion B = [0; Pi].
struct LinearSystem {
    Mat drift;
    Mat diffusion;
};

[[nodiscard]] LinearSystem as_linear_system(const CoupledOscillatorSpec& spec);

/// Two identical pendulums joined by a weak spring, independent additive
/// noise on each velocity.
struct PendulumPairSpec {
    double alpha = 1.0;
    double beta = 0.1;
    double sigma1 = 0.5;
    double sigma2 = 0.5;
    Vec x0 = Vec::Zero(2);
    Vec y0 = Vec::Zero(2);
    double t0 = 0.0;

    /// Throws ValidationError unless all four parameters are strictly positive
    /// and the initial state is two-dimensional.
    void validate() const;
};

/// The restoring force f(x, y); the velocity equation is dy = -f dt + Pi dw.
/// |f| <= alpha + 2 beta for every input.
[[nodiscard]] Vec pendulum_drift(const PendulumPairSpec& s, const Vec& x, const Vec& y);

using DriftFn = std::function<Vec(const Vec& x, const Vec& y)>;

/// Generic nonlinear oscillator  dx = y dt,  dy = -f(x, y) dt + Pi dw.
/// The drift evaluator must be pure.
struct NonlinearDriftSpec {
    Eigen::Index d = 1;
    DriftFn drift;
    Mat pi;
    double growth_constant = 1.0;  // K1 in |f(x,y)| <= K1 (1 + |x| + |y|)
    Vec x0;
    Vec y0;
    double t0 = 0.0;

    [[nodiscard]] Eigen::Index noise_dim() const { return pi.cols(); }
    /// Shape checks only; the growth condition is checked by growth_bound_check.
    void validate() const;
};

/// Pendulum pair as a nonlinear spec with Pi = diag(sigma1, sigma2) and
/// K1 = alpha + 2 beta.
[[nodiscard]] NonlinearDriftSpec make_pendulum_spec(const PendulumPairSpec& s);

struct GrowthCheck {
    bool pass = false;
    double worst_ratio = 0.0;  // max |f| / (1 + |x| + |y|) over the sample
    Vec worst_x;
    Vec worst_y;
};

/// Sampled falsification of the linear-growth condition: evaluates the ratio
/// on `samples` Halton points filling the box [-radius, radius]^{2d}.
[[nodiscard]] GrowthCheck growth_bound_check(const NonlinearDriftSpec& spec,
                                             int samples = 10000, double radius = 1e3);

}  // namespace stosc
