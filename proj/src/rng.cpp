#include "stosc/rng.hpp"

#include <cmath>

namespace stosc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
    : root_seed_(root_seed),
      stream_id_(stream_id),
      engine_seed_(splitmix64(splitmix64(root_seed) ^ splitmix64(~stream_id))),
      engine_(engine_seed_) {}

Vec RngStream::normals(Eigen::Index n, double variance) {
    const double sd = std::sqrt(variance);
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = sd * normal_(engine_);
    return out;
}

}  // namespace stosc
