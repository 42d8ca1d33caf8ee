#include "stosc/models.hpp"

#include <cmath>
#include <cstdint>
#include <iterator>
#include <string>

#include "stosc/errors.hpp"

namespace stosc {

namespace {

SpectralDecomposition checked_spectrum(const SymMatrix& lambda) {
    SpectralDecomposition dec = eigh_symmetric(lambda);
    if (!dec.nonsingular()) {
        throw ValidationError("CoupledOscillatorSpec: Lambda is singular (min|lambda| = " +
                              std::to_string(dec.min_abs_eigenvalue()) + ")");
    }
    return dec;
}

// Radical inverse of i in the given prime base.
double halton(std::uint64_t i, std::uint64_t base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr std::uint64_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                     37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                                     83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

}  // namespace

CoupledOscillatorSpec::CoupledOscillatorSpec(SymMatrix lambda, Mat pi, Vec x0, Vec y0, double t0)
    : lambda_(std::move(lambda)),
      pi_(std::move(pi)),
      x0_(std::move(x0)),
      y0_(std::move(y0)),
      t0_(t0),
      spectrum_(checked_spectrum(lambda_)) {
    const Eigen::Index d = lambda_.dim();
    if (pi_.rows() != d || pi_.cols() < 1) {
        throw ValidationError("CoupledOscillatorSpec: Pi must be d x m with m >= 1");
    }
    if (x0_.size() != d || y0_.size() != d) {
        throw ValidationError("CoupledOscillatorSpec: x0 and y0 must have length d");
    }
    if (!pi_.allFinite() || !x0_.allFinite() || !y0_.allFinite()) {
        throw ValidationError("CoupledOscillatorSpec: non-finite entry");
    }
    if (!(t0_ >= 0.0) || !std::isfinite(t0_)) {
        throw ValidationError("CoupledOscillatorSpec: t0 must be finite and >= 0");
    }
}

Vec CoupledOscillatorSpec::initial_state() const {
    Vec s(2 * dim());
    s << x0_, y0_;
    return s;
}

CoupledOscillatorSpec CoupledOscillatorSpec::with_pi(Mat pi) const {
    return CoupledOscillatorSpec(lambda_, std::move(pi), x0_, y0_, t0_);
}

CoupledOscillatorSpec CoupledOscillatorSpec::with_initial(Vec x0, Vec y0) const {
    return CoupledOscillatorSpec(lambda_, pi_, std::move(x0), std::move(y0), t0_);
}

LinearSystem as_linear_system(const CoupledOscillatorSpec& spec) {
    const Eigen::Index d = spec.dim();
    const Eigen::Index m = spec.noise_dim();
    const Mat& lam = spec.lambda().matrix();
    LinearSystem sys{Mat::Zero(2 * d, 2 * d), Mat::Zero(2 * d, m)};
    sys.drift.topRightCorner(d, d) = Mat::Identity(d, d);
    sys.drift.bottomLeftCorner(d, d) = -(lam * lam);
    sys.diffusion.bottomRows(d) = spec.pi();
    return sys;
}

void PendulumPairSpec::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw ValidationError("PendulumPairSpec: alpha, beta, sigma1, sigma2 must be > 0");
    }
    if (x0.size() != 2 || y0.size() != 2) {
        throw ValidationError("PendulumPairSpec: initial state must be (x1, x2), (y1, y2)");
    }
    if (!(t0 >= 0.0)) throw ValidationError("PendulumPairSpec: t0 must be >= 0");
}

Vec pendulum_drift(const PendulumPairSpec& s, const Vec& x, const Vec& /*y*/) {
    const double s1 = std::sin(x(0));
    const double s2 = std::sin(x(1));
    const double spring = s.beta * (s1 - s2);
    Vec f(2);
    f(0) = s.alpha * s1 + spring * std::cos(x(0));
    f(1) = s.alpha * s2 - spring * std::cos(x(1));
    return f;
}

void NonlinearDriftSpec::validate() const {
    if (d < 1) throw ValidationError("NonlinearDriftSpec: d must be >= 1");
    if (!drift) throw ValidationError("NonlinearDriftSpec: missing drift evaluator");
    if (pi.rows() != d || pi.cols() < 1) {
        throw ValidationError("NonlinearDriftSpec: Pi must be d x m with m >= 1");
    }
    if (x0.size() != d || y0.size() != d) {
        throw ValidationError("NonlinearDriftSpec: x0 and y0 must have length d");
    }
    if (!(growth_constant > 0.0)) {
        throw ValidationError("NonlinearDriftSpec: growth constant must be > 0");
    }
}

NonlinearDriftSpec make_pendulum_spec(const PendulumPairSpec& s) {
    s.validate();
    NonlinearDriftSpec out;
    out.d = 2;
    out.drift = [s](const Vec& x, const Vec& y) { return pendulum_drift(s, x, y); };
    out.pi = Mat::Zero(2, 2);
    out.pi(0, 0) = s.sigma1;
    out.pi(1, 1) = s.sigma2;
    out.growth_constant = s.alpha + 2.0 * s.beta;
    out.x0 = s.x0;
    out.y0 = s.y0;
    out.t0 = s.t0;
    return out;
}

GrowthCheck growth_bound_check(const NonlinearDriftSpec& spec, int samples, double radius) {
    spec.validate();
    const Eigen::Index d = spec.d;
    if (2 * d > static_cast<Eigen::Index>(std::size(kPrimes))) {
        throw ValidationError("growth_bound_check: dimension too large for the Halton table");
    }
    GrowthCheck out;
    out.worst_x = Vec::Zero(d);
    out.worst_y = Vec::Zero(d);
    Vec x(d), y(d);
    const Vec origin = Vec::Zero(d);
    out.worst_ratio = spec.drift(origin, origin).norm();
    // Index 0 of every Halton sequence maps to the box corner; start at 1.
    for (int s = 1; s <= samples; ++s) {
        for (Eigen::Index k = 0; k < d; ++k) {
            x(k) = radius * (2.0 * halton(static_cast<std::uint64_t>(s), kPrimes[k]) - 1.0);
            y(k) = radius * (2.0 * halton(static_cast<std::uint64_t>(s), kPrimes[d + k]) - 1.0);
        }
        const double ratio = spec.drift(x, y).norm() / (1.0 + x.norm() + y.norm());
        if (ratio > out.worst_ratio) {
            out.worst_ratio = ratio;
            out.worst_x = x;
            out.worst_y = y;
        }
    }
    out.pass = out.worst_ratio <= spec.growth_constant;
    return out;
}

}  // namespace stosc
