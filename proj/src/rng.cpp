#include "tailtilt/rng.hpp"

#include <cmath>

namespace tailtilt {

namespace {

// Philox 4x32 round constants (Salmon et al., SC'11).
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    return static_cast<std::uint32_t>(p >> 32);
}

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) noexcept {
    std::uint32_t lo0, lo1;
    const std::uint32_t hi0 = mulhi(kPhiloxM0, ctr[0], lo0);
    const std::uint32_t hi1 = mulhi(kPhiloxM1, ctr[2], lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

StreamRng::StreamRng(SeedSpec seed) noexcept {
    key_ = {static_cast<std::uint32_t>(seed.masterSeed),
            static_cast<std::uint32_t>(seed.masterSeed >> 32)};
    // streamId occupies the counter's high half; the low half counts blocks.
    counter_ = {0u, 0u, static_cast<std::uint32_t>(seed.streamId),
                static_cast<std::uint32_t>(seed.streamId >> 32)};
}

void StreamRng::refill() noexcept {
    std::array<std::uint32_t, 4> block = counter_;
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        philox_round(block, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    buffer_[0] = (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
    buffer_[1] = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
    available_ = 2;
    if (++counter_[0] == 0) ++counter_[1];
}

StreamRng::result_type StreamRng::operator()() noexcept {
    if (available_ == 0) refill();
    return buffer_[--available_];
}

double StreamRng::uniform01() noexcept {
    const std::uint64_t bits = (*this)() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double StreamRng::normal() noexcept {
    if (hasCachedNormal_) {
        hasCachedNormal_ = false;
        return cachedNormal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    cachedNormal_ = v * factor;
    hasCachedNormal_ = true;
    return u * factor;
}

std::uint64_t StreamRng::uniform_below(std::uint64_t bound) noexcept {
    const auto word = (*this)();
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(word) * bound) >> 64);
}

}  // namespace tailtilt
