#pragma once

#include <cstdint>
#include <random>

#include "stosc/types.hpp"

namespace stosc {

/// SplitMix64 finalizer; a bijective 64-bit mix.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x);

/// Independent normal stream derived from (root seed, stream id) by hashing the
/// counter, so path i of an experiment draws the same numbers regardless of
/// which thread simulates it. Move-only: a stream has a single consumer.
class RngStream {
public:
    RngStream(std::uint64_t root_seed, std::uint64_t stream_id);
    RngStream(const RngStream&) = delete;
    RngStream& operator=(const RngStream&) = delete;
    RngStream(RngStream&&) = default;
    RngStream& operator=(RngStream&&) = default;

    [[nodiscard]] std::uint64_t root_seed() const { return root_seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }
    /// Seed actually fed to the engine.
    [[nodiscard]] std::uint64_t engine_seed() const { return engine_seed_; }

    double normal() { return normal_(engine_); }
    /// n i.i.d. N(0, variance) draws.
    Vec normals(Eigen::Index n, double variance = 1.0);

private:
    std::uint64_t root_seed_;
    std::uint64_t stream_id_;
    std::uint64_t engine_seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace stosc
