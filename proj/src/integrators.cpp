#include "stosc/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "stosc/errors.hpp"
#include "stosc/parallel.hpp"

namespace stosc {

namespace {

void require_positive_step(double h, const char* who) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw PreconditionError(std::string(who) + ": stepsize must be positive and finite");
    }
}

Mat default_q(const CoupledOscillatorSpec& spec) { return as_linear_system(spec).diffusion; }

Mat checked_q(const CoupledOscillatorSpec& spec, std::optional<Mat> q) {
    Mat out = q ? std::move(*q) : default_q(spec);
    if (out.rows() != 2 * spec.dim() || out.cols() < 1) {
        throw ValidationError("LL: Q must be 2d x m");
    }
    return out;
}

}  // namespace

double ll_threshold(const CoupledOscillatorSpec& spec) {
    return std::numbers::pi / spec.spectrum().max_abs_eigenvalue();
}

LLStepper::LLStepper(CoupledOscillatorSpec spec, double h, std::optional<Mat> q)
    : spec_(std::move(spec)), h_(h), threshold_(ll_threshold(spec_)) {
    require_positive_step(h, "LLStepper");
    m_ = rotation_matrix(spec_.spectrum(), h_);
    q_ = checked_q(spec_, std::move(q));
}

Mat ll_augmented_matrix(const CoupledOscillatorSpec& spec, const Vec& state) {
    const Eigen::Index d = spec.dim();
    const Mat& lam = spec.lambda().matrix();
    const Mat lam2 = lam * lam;
    Mat c = Mat::Zero(2 * d + 1, 2 * d + 1);
    c.block(0, d, d, d) = Mat::Identity(d, d);
    c.block(d, 0, d, d) = -lam2;
    c.block(0, 2 * d, d, 1) = state.tail(d);
    c.block(d, 2 * d, d, 1) = -lam2 * state.head(d);
    return c;
}

Vec ll_step_augmented(const CoupledOscillatorSpec& spec, double h, const Vec& state, const Vec& dw,
                      const Mat& q) {
    const Eigen::Index n = 2 * spec.dim();
    const Mat e = augmented_exp(ll_augmented_matrix(spec, state), h);
    // L e^{C h} r is the first 2d entries of the last column.
    return state + e.col(n).head(n) + q * dw;
}

TrajectoryGrid ll_integrate_increments(const LLStepper& stepper, const Mat& increments,
                                       Provenance provenance) {
    const CoupledOscillatorSpec& spec = stepper.spec();
    const auto steps = static_cast<std::size_t>(increments.rows());
    provenance.scheme = Scheme::ll;
    TrajectoryGrid grid =
        make_grid(spec.initial_state(), spec.t0(), stepper.step_size(), steps, provenance);
    grid.below_threshold = stepper.below_threshold();
    Vec state = spec.initial_state();
    for (std::size_t n = 0; n < steps; ++n) {
        const auto row = static_cast<Eigen::Index>(n);
        state = stepper.step(state, increments.row(row).transpose());
        grid.states.row(row + 1) = state.transpose();
    }
    return grid;
}

TrajectoryGrid ll_integrate(const CoupledOscillatorSpec& spec, double h, std::size_t steps,
                            RngStream& rng, std::optional<Mat> q) {
    const LLStepper stepper(spec, h, std::move(q));
    const Eigen::Index m = stepper.q().cols();
    TrajectoryGrid grid = make_grid(spec.initial_state(), spec.t0(), h, steps,
                                    {rng.root_seed(), rng.stream_id(), Scheme::ll});
    grid.below_threshold = stepper.below_threshold();
    Vec state = spec.initial_state();
    for (std::size_t n = 1; n <= steps; ++n) {
        state = stepper.step(state, rng.normals(m, h));
        grid.states.row(static_cast<Eigen::Index>(n)) = state.transpose();
    }
    return grid;
}

LLCoefficients ll_coefficients(const CoupledOscillatorSpec& spec, Eigen::Index i,
                               std::optional<Mat> q) {
    const Eigen::Index d = spec.dim();
    if (i < 0 || i >= d) throw PreconditionError("ll_coefficients: component out of range");
    const Mat qm = checked_q(spec, std::move(q));
    const SpectralDecomposition& dec = spec.spectrum();
    const Mat& p = dec.vectors;
    const Mat q1 = p.transpose() * qm.topRows(d);
    const Mat q2 = p.transpose() * qm.bottomRows(d);
    const Eigen::Index m = qm.cols();

    LLCoefficients out;
    out.component = i;
    out.lambdas = dec.eigenvalues;
    out.e.resize(d, m);
    out.f.resize(d, m);
    out.amplitude.resize(d);
    out.phase.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        out.e.row(j) = p(i, j) * q1.row(j);
        out.f.row(j) = p(i, j) / dec.eigenvalues(j) * q2.row(j);
        const double se = out.e.row(j).sum();
        const double sf = out.f.row(j).sum();
        out.amplitude(j) = std::hypot(se, sf);
        out.phase(j) = se != 0.0 ? std::atan(sf / se) : std::numbers::pi / 2.0;
    }

    const double tol = kEigenvalueMergeTol * dec.max_abs_eigenvalue();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(dec.eigenvalues(a)) > std::abs(dec.eigenvalues(b));
    });
    out.group.assign(static_cast<std::size_t>(d), 0);
    std::vector<double> firsts;
    for (const Eigen::Index k : order) {
        const double mag = std::abs(dec.eigenvalues(k));
        if (firsts.empty() || std::abs(firsts.back() - mag) > tol) firsts.push_back(mag);
        out.group[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(firsts.size() - 1);
    }
    const auto groups = static_cast<Eigen::Index>(firsts.size());
    out.group_values = Eigen::Map<const Vec>(firsts.data(), groups);
    out.merged_e = Mat::Zero(groups, m);
    out.merged_f = Mat::Zero(groups, m);
    for (Eigen::Index k = 0; k < d; ++k) {
        const Eigen::Index g = out.group[static_cast<std::size_t>(k)];
        out.merged_e.row(g) += out.e.row(k);
        out.merged_f.row(g) += (dec.eigenvalues(k) > 0.0 ? 1.0 : -1.0) * out.f.row(k);
    }
    return out;
}

double ll_sigma_nr_sq(const LLCoefficients& coeffs, double h, std::size_t r) {
    const double rh = static_cast<double>(r) * h;
    const Eigen::Index d = coeffs.lambdas.size();
    double total = 0.0;
    for (Eigen::Index l = 0; l < coeffs.e.cols(); ++l) {
        double amp = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double arg = rh * coeffs.lambdas(j);
            amp += coeffs.e(j, l) * std::cos(arg) + coeffs.f(j, l) * std::sin(arg);
        }
        total += amp * amp;
    }
    return h * total;
}

std::vector<double> ll_s_n_sq_series(const LLCoefficients& coeffs, double h, std::size_t n) {
    std::vector<double> out(n + 1);
    double acc = 0.0;
    for (std::size_t r = 0; r <= n; ++r) {
        acc += ll_sigma_nr_sq(coeffs, h, r);
        out[r] = acc;
    }
    return out;
}

double ll_s_n_sq(const LLCoefficients& coeffs, double h, std::size_t n) {
    double acc = 0.0;
    for (std::size_t r = 0; r <= n; ++r) acc += ll_sigma_nr_sq(coeffs, h, r);
    return acc;
}

LLSlope ll_slope(const LLCoefficients& coeffs, double h) {
    require_positive_step(h, "ll_slope");
    LLSlope out;
    out.value = 0.5 * h * (coeffs.merged_e.squaredNorm() + coeffs.merged_f.squaredNorm());
    out.below_threshold = h < std::numbers::pi / coeffs.lambdas.cwiseAbs().maxCoeff();
    return out;
}

TrajectoryGrid em_integrate_increments(const CoupledOscillatorSpec& spec, double h,
                                       const Mat& increments, Provenance provenance) {
    require_positive_step(h, "em_integrate");
    const LinearSystem sys = as_linear_system(spec);
    const Mat step_map = Mat::Identity(sys.drift.rows(), sys.drift.cols()) + h * sys.drift;
    const auto steps = static_cast<std::size_t>(increments.rows());
    provenance.scheme = Scheme::em;
    TrajectoryGrid grid = make_grid(spec.initial_state(), spec.t0(), h, steps, provenance);
    Vec state = spec.initial_state();
    for (std::size_t n = 0; n < steps; ++n) {
        const auto row = static_cast<Eigen::Index>(n);
        state = step_map * state + sys.diffusion * increments.row(row).transpose();
        if (!state.allFinite() && !grid.diverged_at) grid.diverged_at = n + 1;
        grid.states.row(row + 1) = state.transpose();
    }
    return grid;
}

TrajectoryGrid em_integrate(const CoupledOscillatorSpec& spec, double h, std::size_t steps,
                            RngStream& rng) {
    require_positive_step(h, "em_integrate");
    const Eigen::Index m = spec.noise_dim();
    Mat increments(static_cast<Eigen::Index>(steps), m);
    for (Eigen::Index n = 0; n < increments.rows(); ++n) {
        increments.row(n) = rng.normals(m, h).transpose();
    }
    return em_integrate_increments(spec, h, increments,
                                   {rng.root_seed(), rng.stream_id(), Scheme::em});
}

TrajectoryGrid em_integrate(const NonlinearDriftSpec& spec, double h, std::size_t steps,
                            RngStream& rng) {
    require_positive_step(h, "em_integrate");
    spec.validate();
    const Eigen::Index d = spec.d;
    const Eigen::Index m = spec.noise_dim();
    Vec initial(2 * d);
    initial << spec.x0, spec.y0;
    TrajectoryGrid grid =
        make_grid(initial, spec.t0, h, steps, {rng.root_seed(), rng.stream_id(), Scheme::em});
    Vec x = spec.x0;
    Vec y = spec.y0;
    for (std::size_t n = 1; n <= steps; ++n) {
        const Vec f = spec.drift(x, y);
        const Vec dw = rng.normals(m, h);
        x += h * y;
        y += -h * f + spec.pi * dw;
        const auto row = static_cast<Eigen::Index>(n);
        if (!x.allFinite() || !y.allFinite()) {
            grid.diverged_at = n;
            grid.states.bottomRows(grid.states.rows() - row)
                .setConstant(std::numeric_limits<double>::quiet_NaN());
            break;
        }
        grid.states.row(row).head(d) = x.transpose();
        grid.states.row(row).tail(d) = y.transpose();
    }
    return grid;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw PreconditionError("loglog_slope: need at least two matching points");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

std::size_t exact_ratio(double num, double den, const char* what) {
    const double r = num / den;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) {
        throw PreconditionError(std::string("convergence_study: ") + what +
                                " is not an integer multiple");
    }
    return static_cast<std::size_t>(rounded);
}

}  // namespace

ConvergenceStudy convergence_study(const CoupledOscillatorSpec& spec,
                                   const ConvergenceOptions& options) {
    if (options.steps.size() < 2) throw PreconditionError("convergence_study: need >= 2 steps");
    if (options.paths < 2) throw PreconditionError("convergence_study: need >= 2 paths");
    const double h_min = *std::min_element(options.steps.begin(), options.steps.end());
    const double h_fine = std::ldexp(h_min, -options.refine_power);
    const std::size_t fine_steps = exact_ratio(options.horizon, h_fine, "horizon");
    std::vector<std::size_t> blocks;
    std::vector<LLStepper> steppers;
    for (const double h : options.steps) {
        blocks.push_back(exact_ratio(h, h_fine, "step"));
        exact_ratio(options.horizon, h, "horizon");
        steppers.emplace_back(spec, h);
    }
    const LLStepper fine(spec, h_fine);
    const LinearSystem sys = as_linear_system(spec);
    const Eigen::Index m = spec.noise_dim();
    const std::size_t nh = options.steps.size();

    // errors[path][h][scheme]
    std::vector<std::vector<std::array<double, 2>>> errors(
        options.paths, std::vector<std::array<double, 2>>(nh, {0.0, 0.0}));
    parallel_for(options.paths, options.threads, [&](std::size_t path) {
        RngStream rng(options.root_seed, path);
        Mat dw(static_cast<Eigen::Index>(fine_steps), m);
        for (Eigen::Index n = 0; n < dw.rows(); ++n) dw.row(n) = rng.normals(m, h_fine).transpose();

        Vec reference = spec.initial_state();
        for (Eigen::Index n = 0; n < dw.rows(); ++n) {
            reference = fine.step(reference, dw.row(n).transpose());
        }
        for (std::size_t k = 0; k < nh; ++k) {
            const double h = options.steps[k];
            const auto block = static_cast<Eigen::Index>(blocks[k]);
            const Mat em_map = Mat::Identity(2 * spec.dim(), 2 * spec.dim()) + h * sys.drift;
            Vec ll = spec.initial_state();
            Vec em = spec.initial_state();
            for (Eigen::Index start = 0; start < dw.rows(); start += block) {
                const Vec inc = dw.middleRows(start, block).colwise().sum().transpose();
                ll = steppers[k].step(ll, inc);
                em = em_map * em + sys.diffusion * inc;
            }
            errors[path][k] = {(ll - reference).norm(), (em - reference).norm()};
        }
    });

    ConvergenceStudy study;
    const auto paths = static_cast<double>(options.paths);
    std::vector<double> ll_err, em_err;
    for (int scheme = 0; scheme < (options.include_em ? 2 : 1); ++scheme) {
        for (std::size_t k = 0; k < nh; ++k) {
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t p = 0; p < options.paths; ++p) {
                const double e = errors[p][k][static_cast<std::size_t>(scheme)];
                sum += e;
                sum_sq += e * e;
            }
            const double mean = sum / paths;
            const double var = std::max(0.0, (sum_sq - paths * mean * mean) / (paths - 1.0));
            study.rows.push_back(
                {scheme == 0 ? Scheme::ll : Scheme::em, options.steps[k], mean, std::sqrt(var / paths)});
            (scheme == 0 ? ll_err : em_err).push_back(mean);
        }
    }
    study.ll_order = loglog_slope(options.steps, ll_err);
    if (options.include_em) study.em_order = loglog_slope(options.steps, em_err);
    return study;
}

}  // namespace stosc
