#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "stosc/types.hpp"

namespace stosc {

enum class Scheme { exact, ll, em };

[[nodiscard]] std::string_view scheme_name(Scheme s);
/// Throws ValidationError on an unknown name.
[[nodiscard]] Scheme parse_scheme(std::string_view name);

struct Provenance {
    std::uint64_t root_seed = 0;
    std::uint64_t stream_id = 0;
    Scheme scheme = Scheme::exact;
};

/// Uniform-grid path: row n of `states` is (x(t_n); y(t_n)), t_n = t0 + n * step.
struct TrajectoryGrid {
    Vec times;
    Mat states;
    double step = 0.0;
    Provenance provenance;
    std::optional<bool> below_threshold;     // LL runs: h < pi / max|lambda|
    std::optional<std::size_t> diverged_at;  // EM runs: first non-finite step

    [[nodiscard]] Eigen::Index dim() const { return states.cols() / 2; }
    [[nodiscard]] std::size_t steps() const {
        return states.rows() == 0 ? 0 : static_cast<std::size_t>(states.rows() - 1);
    }
    [[nodiscard]] double x(std::size_t n, Eigen::Index i) const {
        return states(static_cast<Eigen::Index>(n), i);
    }
    [[nodiscard]] double y(std::size_t n, Eigen::Index i) const {
        return states(static_cast<Eigen::Index>(n), dim() + i);
    }
};

/// Allocates the grid and writes the initial row.
[[nodiscard]] TrajectoryGrid make_grid(const Vec& initial, double t0, double step, std::size_t n,
                                       Provenance provenance);

}  // namespace stosc
