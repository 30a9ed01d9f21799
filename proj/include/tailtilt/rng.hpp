#pragma once

#include <array>
#include <cstdint>

namespace tailtilt {

/// Identifies one reproducible random stream. Replication harnesses use
/// the replication index as streamId, so any stream can be regenerated
/// in isolation: identical (masterSeed, streamId) always produces the
/// identical sequence, independent of thread scheduling.
struct SeedSpec {
    std::uint64_t masterSeed = 0;
    std::uint64_t streamId = 0;
};

/// Counter-based generator (Philox 4x32-10). The keyed block cipher maps
/// a 128-bit counter to 128 random bits, so the stream is a pure function
/// of (masterSeed, streamId, draw index) with no sequential seed-up.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(SeedSpec seed) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<result_type>(0); }

    result_type operator()() noexcept;

    /// Uniform double in the open interval (0, 1): 53-bit mantissa plus a
    /// half-ulp offset, so quantile transforms never see 0 or 1 exactly.
    double uniform01() noexcept;

    /// Standard normal deviate (Marsaglia polar method, pair-cached).
    double normal() noexcept;

    /// Uniform integer in [0, bound) without modulo bias (128-bit scaling).
    std::uint64_t uniform_below(std::uint64_t bound) noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
    double cachedNormal_ = 0.0;
    bool hasCachedNormal_ = false;
};

}  // namespace tailtilt
