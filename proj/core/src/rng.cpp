#include "w2/rng.hpp"

#include <cmath>
#include <numbers>

namespace w2 {

namespace {

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
    const unsigned __int128 p =
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

void Philox::block() {
    std::array<std::uint64_t, 4> c = ctr_;
    std::array<std::uint64_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMult0, c[0], hi0, lo0);
        mulhilo(kMult1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    out_ = c;
    // 256-bit counter increment
    for (int i = 0; i < 4; ++i) {
        if (++ctr_[i] != 0) break;
    }
}

std::array<double, 2> Philox::next_normal_pair() {
    const double u1 = next_double_pos();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

std::uint64_t Philox::next_below(std::uint64_t bound) {
    // rejection from the top of the range keeps the draw unbiased
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

}  // namespace w2
