#include "stosc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stosc/errors.hpp"

namespace stosc {

SignChangeReport count_sign_changes(const TrajectoryGrid& traj, Eigen::Index i,
                                    std::optional<std::size_t> last) {
    if (traj.states.rows() == 0) throw PreconditionError("count_sign_changes: empty trajectory");
    if (i < 0 || i >= traj.dim()) throw PreconditionError("count_sign_changes: bad component");
    const std::size_t end = std::min(last.value_or(traj.steps()), traj.steps());

    SignChangeReport rep;
    rep.component = i;
    std::optional<std::size_t> prev;  // last sample with nonzero x_i
    for (std::size_t n = 0; n <= end; ++n) {
        const double xn = traj.x(n, i);
        if (xn == 0.0 || std::isnan(xn)) continue;
        if (prev && (traj.x(*prev, i) < 0.0) != (xn < 0.0)) {
            const std::size_t a = *prev;
            const double xa = traj.x(a, i);
            const double w = std::abs(xa) / (std::abs(xa) + std::abs(xn));
            const double ta = traj.times(static_cast<Eigen::Index>(a));
            const double tb = traj.times(static_cast<Eigen::Index>(n));
            const double ya = traj.y(a, i);
            const double yb = traj.y(n, i);
            rep.left_index.push_back(a);
            rep.right_index.push_back(n);
            rep.time.push_back(ta + w * (tb - ta));
            rep.abs_y.push_back(std::abs(ya + w * (yb - ya)));
        }
        prev = n;
    }
    rep.count = rep.time.size();
    return rep;
}

std::vector<double> noise_part(const TrajectoryGrid& traj, const CoupledOscillatorSpec& spec,
                               Eigen::Index i) {
    const Scheme scheme = traj.provenance.scheme;
    if (scheme != Scheme::exact && scheme != Scheme::ll) {
        throw PreconditionError("noise_part: the noise-free part is only known for exact and LL paths");
    }
    if (traj.dim() != spec.dim()) throw PreconditionError("noise_part: dimension mismatch");
    std::vector<double> out(traj.steps() + 1);
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = traj.x(n, i) - deterministic_part(spec, i, traj.times(static_cast<Eigen::Index>(n)));
    }
    return out;
}

std::vector<double> exact_noise_variance(const CoupledOscillatorSpec& spec, double step,
                                         Eigen::Index i, std::size_t steps) {
    const ComponentCoefficients coeffs = component_coefficients(spec, i);
    std::vector<double> out(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) out[n] = s_n_sq(coeffs, step, n);
    return out;
}

std::vector<double> ll_noise_variance(const LLCoefficients& coeffs, double h, std::size_t steps) {
    std::vector<double> out(steps + 1, 0.0);
    if (steps == 0) return out;
    const std::vector<double> s2 = ll_s_n_sq_series(coeffs, h, steps - 1);
    std::copy(s2.begin(), s2.end(), out.begin() + 1);
    return out;
}

std::vector<std::size_t> geometric_checkpoints(std::size_t n_max, double ratio) {
    if (!(ratio > 1.0)) throw PreconditionError("geometric_checkpoints: ratio must exceed 1");
    std::vector<std::size_t> out;
    for (double v = 1.0; std::ceil(v) < static_cast<double>(n_max); v *= ratio) {
        const auto n = static_cast<std::size_t>(std::ceil(v));
        if (out.empty() || out.back() != n) out.push_back(n);
    }
    if (out.empty() || out.back() != n_max) out.push_back(n_max);
    return out;
}

std::optional<double> LILReport::max_z() const {
    return running_max.empty() ? std::nullopt : running_max.back();
}

std::optional<double> LILReport::min_z() const {
    return running_min.empty() ? std::nullopt : running_min.back();
}

LILReport lil_envelope(std::span<const double> s, std::span<const double> s2, double epsilon,
                       std::span<const std::size_t> checkpoints) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw PreconditionError("lil_envelope: epsilon must lie in (0, 1)");
    }
    if (s.size() != s2.size()) throw PreconditionError("lil_envelope: series length mismatch");

    LILReport rep;
    rep.epsilon = epsilon;
    if (checkpoints.empty()) {
        rep.checkpoints.resize(s.size());
        for (std::size_t n = 0; n < s.size(); ++n) rep.checkpoints[n] = n;
    } else {
        rep.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    }
    const double level = 1.0 - epsilon;
    std::optional<double> hi, lo;
    for (const std::size_t n : rep.checkpoints) {
        if (n >= s.size()) throw PreconditionError("lil_envelope: checkpoint beyond series");
        rep.s.push_back(s[n]);
        rep.s2.push_back(s2[n]);
        std::optional<double> z;
        if (s2[n] > std::numbers::e) {
            z = s[n] / std::sqrt(2.0 * s2[n] * std::log(std::log(s2[n])));
            hi = hi ? std::max(*hi, *z) : *z;
            lo = lo ? std::min(*lo, *z) : *z;
            if (*z > level && !rep.first_above) rep.first_above = n;
            if (*z < -level && !rep.first_below) rep.first_below = n;
        } else {
            ++rep.undefined;
        }
        rep.z.push_back(z);
        rep.running_max.push_back(hi);
        rep.running_min.push_back(lo);
    }
    return rep;
}

SimpleZeroTable simple_zero_diagnostic(std::span<const SignChangeReport> reports,
                                       std::span<const double> deltas) {
    std::vector<double> abs_y;
    for (const auto& r : reports) abs_y.insert(abs_y.end(), r.abs_y.begin(), r.abs_y.end());
    std::sort(abs_y.begin(), abs_y.end());

    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    SimpleZeroTable table;
    for (const double delta : sorted) {
        SimpleZeroRow row;
        row.delta = delta;
        row.total = abs_y.size();
        row.below = static_cast<std::size_t>(
            std::lower_bound(abs_y.begin(), abs_y.end(), delta) - abs_y.begin());
        row.fraction = row.total ? static_cast<double>(row.below) / static_cast<double>(row.total) : 0.0;
        if (!table.rows.empty() && row.fraction > table.rows.back().fraction) table.monotone = false;
        table.rows.push_back(row);
    }
    if (!table.rows.empty()) {
        const double widest = table.rows.front().fraction;
        const double narrowest = table.rows.back().fraction;
        table.nonvanishing = narrowest > 0.0 && narrowest >= 0.5 * widest;
    }
    return table;
}

}  // namespace stosc
