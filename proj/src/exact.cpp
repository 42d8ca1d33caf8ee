#include "stosc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stosc/errors.hpp"

namespace stosc {

double cos_integral(double w, double a, double b, double resonance) {
    if (std::abs(w) <= resonance) return b - a;
    return 2.0 * std::cos(0.5 * w * (a + b)) * std::sin(0.5 * w * (b - a)) / w;
}

double sin_integral(double w, double a, double b, double resonance) {
    if (std::abs(w) <= resonance) return 0.0;
    return 2.0 * std::sin(0.5 * w * (a + b)) * std::sin(0.5 * w * (b - a)) / w;
}

namespace {

double resonance_tol(const Vec& lambdas) {
    return kEigenvalueMergeTol * lambdas.cwiseAbs().maxCoeff();
}

// int_a^b (sum_k c_k sin(lambda_k u)) (sum_j c'_j sin(lambda_j u)) du, summed over
// noise channels, i.e. the columns of c.
double sine_sum_energy(const Vec& lambdas, const Mat& c, double a, double b) {
    const double tol = resonance_tol(lambdas);
    const Eigen::Index d = lambdas.size();
    double total = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double w = 0.5 * (cos_integral(lambdas(k) - lambdas(j), a, b, tol) -
                                    cos_integral(lambdas(k) + lambdas(j), a, b, tol));
            total += c.row(k).dot(c.row(j)) * w;
        }
    }
    return total;
}

}  // namespace

Mat noise_covariance(const CoupledOscillatorSpec& spec, double t) {
    const SpectralDecomposition& dec = spec.spectrum();
    const Eigen::Index d = spec.dim();
    const Vec& lam = dec.eigenvalues;
    const double tol = resonance_tol(lam);
    const Mat& p = dec.vectors;
    const Mat pi_modal = p.transpose() * spec.pi();
    const Mat noise = pi_modal * pi_modal.transpose();

    // Modal blocks: x-mode k responds with sin(lambda_k u) / lambda_k, y-mode
    // with cos(lambda_k u).
    Mat xx(d, d), xy(d, d), yy(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double diff = lam(k) - lam(j);
            const double sum = lam(k) + lam(j);
            const double ss = 0.5 * (cos_integral(diff, 0.0, t, tol) - cos_integral(sum, 0.0, t, tol));
            const double sc = 0.5 * (sin_integral(sum, 0.0, t, tol) + sin_integral(diff, 0.0, t, tol));
            const double cc = 0.5 * (cos_integral(diff, 0.0, t, tol) + cos_integral(sum, 0.0, t, tol));
            xx(k, j) = noise(k, j) * ss / (lam(k) * lam(j));
            xy(k, j) = noise(k, j) * sc / lam(k);
            yy(k, j) = noise(k, j) * cc;
        }
    }
    Mat cov(2 * d, 2 * d);
    cov.topLeftCorner(d, d) = p * xx * p.transpose();
    cov.topRightCorner(d, d) = p * xy * p.transpose();
    cov.bottomLeftCorner(d, d) = cov.topRightCorner(d, d).transpose();
    cov.bottomRightCorner(d, d) = p * yy * p.transpose();
    return 0.5 * (cov + cov.transpose());
}

Mat covariance_factor(const Mat& cov) {
    const double trace = cov.trace();
    const Eigen::Index n = cov.rows();
    if (trace == 0.0 && cov.cwiseAbs().maxCoeff() == 0.0) return Mat::Zero(n, n);
    const SpectralDecomposition dec = eigh_symmetric(SymMatrix(0.5 * (cov + cov.transpose())));
    const double floor = -1e-12 * std::abs(trace);
    Vec root(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double ev = dec.eigenvalues(k);
        if (ev < floor) {
            throw NumericError("covariance_factor: eigenvalue " + std::to_string(ev) +
                               " is below -1e-12 * trace");
        }
        root(k) = ev > 0.0 ? std::sqrt(ev) : 0.0;
    }
    return dec.vectors * root.asDiagonal();
}

TransitionKernel transition_kernel(const CoupledOscillatorSpec& spec, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw PreconditionError("transition_kernel: step must be positive and finite");
    }
    spec.spectrum().require_nonsingular();
    TransitionKernel k;
    k.step = step;
    k.mean_map = rotation_matrix(spec.spectrum(), step);
    k.covariance = noise_covariance(spec, step);
    k.factor = covariance_factor(k.covariance);
    return k;
}

TrajectoryGrid sample_exact_path(const CoupledOscillatorSpec& spec, double step, std::size_t steps,
                                 RngStream& rng) {
    const TransitionKernel kernel = transition_kernel(spec, step);
    TrajectoryGrid grid = make_grid(spec.initial_state(), spec.t0(), step, steps,
                                    {rng.root_seed(), rng.stream_id(), Scheme::exact});
    const Eigen::Index dim = kernel.factor.cols();
    Vec state = spec.initial_state();
    for (std::size_t n = 1; n <= steps; ++n) {
        state = kernel.mean_map * state + kernel.factor * rng.normals(dim);
        grid.states.row(static_cast<Eigen::Index>(n)) = state.transpose();
    }
    return grid;
}

double deterministic_part(const CoupledOscillatorSpec& spec, Eigen::Index i, double t) {
    const SpectralDecomposition& dec = spec.spectrum();
    const double tau = t - spec.t0();
    double out = 0.0;
    for (Eigen::Index k = 0; k < dec.dim(); ++k) {
        const double lam = dec.eigenvalues(k);
        const auto pk = dec.vectors.col(k);
        out += dec.vectors(i, k) * (std::cos(lam * tau) * pk.dot(spec.x0()) +
                                    std::sin(lam * tau) / lam * pk.dot(spec.y0()));
    }
    return out;
}

double deterministic_bound(const CoupledOscillatorSpec& spec) {
    const SpectralDecomposition& dec = spec.spectrum();
    const double p2 = dec.vectors.squaredNorm();
    return p2 * (spec.x0().norm() + spec.y0().norm() / dec.min_abs_eigenvalue());
}

ComponentCoefficients component_coefficients(const CoupledOscillatorSpec& spec, Eigen::Index i) {
    const SpectralDecomposition& dec = spec.spectrum();
    const Eigen::Index d = spec.dim();
    if (i < 0 || i >= d) throw PreconditionError("component_coefficients: component out of range");
    const Mat pi_modal = dec.vectors.transpose() * spec.pi();

    ComponentCoefficients out;
    out.component = i;
    out.lambdas = dec.eigenvalues;
    out.c.resize(d, spec.noise_dim());
    for (Eigen::Index k = 0; k < d; ++k) {
        out.c.row(k) = dec.vectors(i, k) / dec.eigenvalues(k) * pi_modal.row(k);
    }

    // Group equal magnitudes, scanning |lambda| in descending order.
    const double tol = resonance_tol(dec.eigenvalues);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(dec.eigenvalues(a)) > std::abs(dec.eigenvalues(b));
    });
    out.group.assign(static_cast<std::size_t>(d), 0);
    std::vector<double> values;
    std::vector<int> members;
    for (const Eigen::Index k : order) {
        const double mag = std::abs(dec.eigenvalues(k));
        if (values.empty() || std::abs(values.back() / members.back() - mag) > tol) {
            values.push_back(mag);
            members.push_back(1);
        } else {
            values.back() += mag;
            members.back() += 1;
        }
        out.group[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(values.size() - 1);
    }
    const auto groups = static_cast<Eigen::Index>(values.size());
    out.group_values.resize(groups);
    for (Eigen::Index j = 0; j < groups; ++j) {
        out.group_values(j) = values[static_cast<std::size_t>(j)] / members[static_cast<std::size_t>(j)];
    }
    out.merged = Mat::Zero(groups, spec.noise_dim());
    for (Eigen::Index k = 0; k < d; ++k) {
        const double sign = dec.eigenvalues(k) > 0.0 ? 1.0 : -1.0;
        out.merged.row(out.group[static_cast<std::size_t>(k)]) += sign * out.c.row(k);
    }
    return out;
}

double sigma_nr_sq(const ComponentCoefficients& coeffs, double step, std::size_t n, std::size_t r) {
    if (r < 1 || r > n) throw PreconditionError("sigma_nr_sq: requires 1 <= r <= n");
    const double a = static_cast<double>(n - r) * step;
    return sine_sum_energy(coeffs.lambdas, coeffs.c, a, a + step);
}

double s_n_sq(const ComponentCoefficients& coeffs, double step, std::size_t n) {
    return sine_sum_energy(coeffs.lambdas, coeffs.c, 0.0, static_cast<double>(n) * step);
}

double s_n_slope(const ComponentCoefficients& coeffs, double step) {
    return 0.5 * step * coeffs.merged.squaredNorm();
}

namespace {

void check_scalar_args(double alpha, double rho, double t) {
    if (!(t > 0.0)) throw PreconditionError("simple oscillator: t must be > 0");
    if (!(rho > 0.0)) throw PreconditionError("simple oscillator: rho must be > 0");
    if (alpha == 0.0) throw PreconditionError("simple oscillator: alpha must be nonzero");
}

// (a t)^2 - sin^2(a t), accurate for small arguments.
double det_kernel(double at) {
    const double z = std::abs(at);
    if (z < 1e-2) {
        const double z3 = z * z * z;
        const double minus = z3 / 6.0 - z3 * z * z / 120.0 + z3 * z3 * z / 5040.0;
        return minus * (z + std::sin(z));
    }
    const double s = std::sin(z);
    return (z - s) * (z + s);
}

}  // namespace

Mat simple_oscillator_covariance(double alpha, double rho, double t, CrossSign sign) {
    check_scalar_args(alpha, rho, t);
    const double a = alpha;
    const double s = std::sin(a * t);
    const double s2 = std::sin(2.0 * a * t);
    Mat cov(2, 2);
    cov(0, 0) = rho * (2.0 * a * t - s2) / (4.0 * a * a * a);
    cov(1, 1) = rho * (2.0 * a * t + s2) / (4.0 * a);
    const double cross = rho * s * s / (2.0 * a * a);
    cov(0, 1) = cov(1, 0) = sign == CrossSign::oscillator ? cross : -cross;
    return cov;
}

double density_simple_oscillator(double alpha, double rho, double t, double x, double y,
                                 CrossSign sign) {
    const Mat cov = simple_oscillator_covariance(alpha, rho, t, sign);
    const double a2 = alpha * alpha;
    const double det = rho * rho * det_kernel(alpha * t) / (4.0 * a2 * a2);
    const double quad = (cov(1, 1) * x * x - 2.0 * cov(0, 1) * x * y + cov(0, 0) * y * y) / det;
    return std::exp(-0.5 * quad) / (2.0 * std::acos(-1.0) * std::sqrt(det));
}

double lyapunov_v(double alpha, double rho, double x, double y, double t_cut) {
    if (!(t_cut > 0.0) || !std::isfinite(t_cut)) {
        throw PreconditionError("lyapunov_v: t_cut must be positive and finite");
    }
    check_scalar_args(alpha, rho, t_cut);
    if (x == 0.0 && y == 0.0) return std::numeric_limits<double>::infinity();
    // s = e^u; the integrand vanishes faster than any power as s -> 0.
    auto integrand = [&](double u) {
        const double s = std::exp(u);
        return s * density_simple_oscillator(alpha, rho, s, x, y);
    };
    const double hi = std::log(t_cut);
    const double lo = hi - 60.0;
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 25,
                                                                         1e-12, &error);
}

}  // namespace stosc
