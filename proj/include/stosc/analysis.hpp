#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stosc/exact.hpp"
#include "stosc/integrators.hpp"
#include "stosc/models.hpp"
#include "stosc/trajectory.hpp"

namespace stosc {

/// Strict sign changes of x_i along a sampled path. A sample that is exactly
/// zero is skipped: the crossing is decided by the next nonzero sample.
struct SignChangeReport {
    Eigen::Index component = 0;
    std::size_t count = 0;
    std::vector<std::size_t> left_index;  // last nonzero sample before each crossing
    std::vector<std::size_t> right_index;
    std::vector<double> time;   // linear interpolation of the zero
    std::vector<double> abs_y;  // |y_i| linearly interpolated at that time
};

/// Counts over samples 0..last (default: the whole path).
[[nodiscard]] SignChangeReport count_sign_changes(const TrajectoryGrid& traj, Eigen::Index i,
                                                  std::optional<std::size_t> last = std::nullopt);

/// S_n = x_i(t_n) - D(t_n) for exact and LL trajectories. Throws
/// PreconditionError for other schemes, where D is not the noise-free part.
[[nodiscard]] std::vector<double> noise_part(const TrajectoryGrid& traj,
                                             const CoupledOscillatorSpec& spec, Eigen::Index i);

/// Var S_n at every grid index 0..steps for the exact sampler.
[[nodiscard]] std::vector<double> exact_noise_variance(const CoupledOscillatorSpec& spec,
                                                       double step, Eigen::Index i,
                                                       std::size_t steps);
/// Var S_n at every grid index for the LL scheme: the state after n steps
/// carries s_{n-1}^2 (zero at n = 0).
[[nodiscard]] std::vector<double> ll_noise_variance(const LLCoefficients& coeffs, double h,
                                                    std::size_t steps);

/// n = ceil(ratio^k), k = 0, 1, ..., deduplicated and capped at n_max (always
/// included).
[[nodiscard]] std::vector<std::size_t> geometric_checkpoints(std::size_t n_max, double ratio = 1.2);

/// Envelope statistic Z_n = S_n / sqrt(2 s_n^2 log log s_n^2). Undefined where
/// s_n^2 <= e; such checkpoints are kept and flagged.
struct LILReport {
    double epsilon = 0.2;
    std::vector<std::size_t> checkpoints;
    std::vector<double> s;
    std::vector<double> s2;
    std::vector<std::optional<double>> z;
    std::vector<std::optional<double>> running_max;
    std::vector<std::optional<double>> running_min;
    std::optional<std::size_t> first_above;  // first n with Z_n > 1 - eps
    std::optional<std::size_t> first_below;  // first n with Z_n < -(1 - eps)
    std::size_t undefined = 0;

    [[nodiscard]] std::optional<double> max_z() const;
    [[nodiscard]] std::optional<double> min_z() const;
    [[nodiscard]] bool two_sided_pass() const { return first_above && first_below; }
};

/// `s` and `s2` are aligned series indexed by n. An empty checkpoint list means
/// every index. Throws PreconditionError for eps outside (0, 1) or mismatched
/// series.
[[nodiscard]] LILReport lil_envelope(std::span<const double> s, std::span<const double> s2,
                                     double epsilon,
                                     std::span<const std::size_t> checkpoints = {});

struct SimpleZeroRow {
    double delta = 0.0;
    std::size_t below = 0;  // crossings with interpolated |y| < delta
    std::size_t total = 0;
    double fraction = 0.0;
};

struct SimpleZeroTable {
    std::vector<SimpleZeroRow> rows;  // sorted by delta, descending
    bool monotone = true;             // fraction non-increasing as delta shrinks
    /// The smallest delta still captures at least half the crossings caught by
    /// the largest one: the |y| distribution has an atom at zero (a touching,
    /// non-simple zero).
    bool nonvanishing = false;
};

/// Pools the crossings of all reports.
[[nodiscard]] SimpleZeroTable simple_zero_diagnostic(std::span<const SignChangeReport> reports,
                                                     std::span<const double> deltas);

}  // namespace stosc
