#pragma once

#include <cstdint>
#include <random>

namespace certify {

/// Seeded pseudo-random stream. Identical (seed, stream) pairs reproduce
/// identical draw sequences; distinct streams are decorrelated through the
/// seed sequence.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();

    /// Independent child stream, deterministic in (seed, stream, index).
    Rng substream(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace certify
