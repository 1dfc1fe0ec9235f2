#pragma once

#include <cstdint>

#include "bts/normal.hpp"

#include <random>

namespace bts {

// Seeded random stream. Uniform doubles are built directly from the raw
// 64-bit output of mt19937_64 so sequences are identical across standard
// library implementations; normals go through the inverse normal cdf.
//
// Not thread safe: one stream per thread. Monte Carlo replicas split the
// master seed as seed + replica_index.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Strictly inside (0,1).
    double uniform01() {
        const std::uint64_t bits = engine_() >> 11;  // top 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double normal(double mean = 0.0, double sd = 1.0) {
        return mean + sd * normal_quantile(uniform01());
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

inline std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica_index) {
    return master_seed + replica_index;
}

}  // namespace bts
