#include "stosc/trajectory.hpp"

#include <string>

#include "stosc/errors.hpp"

namespace stosc {

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::exact: return "exact";
        case Scheme::ll: return "ll";
        case Scheme::em: return "em";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "exact") return Scheme::exact;
    if (name == "ll") return Scheme::ll;
    if (name == "em") return Scheme::em;
    throw ValidationError("unknown scheme '" + std::string(name) + "' (expected exact, ll or em)");
}

TrajectoryGrid make_grid(const Vec& initial, double t0, double step, std::size_t n,
                         Provenance provenance) {
    TrajectoryGrid g;
    const auto rows = static_cast<Eigen::Index>(n + 1);
    g.times.resize(rows);
    for (Eigen::Index k = 0; k < rows; ++k) g.times(k) = t0 + static_cast<double>(k) * step;
    g.states.resize(rows, initial.size());
    g.states.row(0) = initial.transpose();
    g.step = step;
    g.provenance = provenance;
    return g;
}

}  // namespace stosc
