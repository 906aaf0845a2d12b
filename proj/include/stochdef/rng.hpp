#pragma once

#include <cstdint>

namespace stochdef {

/// Counter-based 64-bit generator. The i-th output is a pure function of
/// (seed, stream_id, i), so draws are identical across runs and platforms.
/// Real-valued draws (uniform, normal) are computed here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer on the closed range [lo, hi].
    int uniform_int(int lo, int hi);
    double normal();
    double normal(double mean, double stddev);
    bool bernoulli(double p);

    /// Independent child stream; the parent is not advanced.
    SeededRng derive(std::uint64_t sub_stream) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);

} // namespace stochdef
