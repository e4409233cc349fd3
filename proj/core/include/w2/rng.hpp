#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace w2 {

/// Identifies one reproducible random stream: a root seed plus a stream id.
/// Distinct stream ids under the same root seed give statistically
/// independent sequences (they select different Philox keys).
struct SeedSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    [[nodiscard]] SeedSpec substream(std::uint64_t offset) const {
        return SeedSpec{seed, stream + offset};
    }
};

/// Philox 4x64 with 10 rounds. Counter-based: the output block is a pure
/// function of (key, counter), so a fixed SeedSpec always reproduces the
/// same sequence and streams can be split without coordination.
/// Output order matches numpy.random.Philox(counter=0, key=[seed, stream]).
class Philox {
public:
    explicit Philox(SeedSpec s) : key_{s.seed, s.stream} {}

    std::uint64_t next_u64() {
        if (idx_ == 4) {
            block();
            idx_ = 0;
        }
        return out_[idx_++];
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_double_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal pair via Box-Muller (fixed consumption: 2 uint64).
    std::array<double, 2> next_normal_pair();

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t next_below(std::uint64_t bound);

    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }
    result_type operator()() { return next_u64(); }

private:
    void block();

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> out_{};
    int idx_ = 4;
};

}  // namespace w2
