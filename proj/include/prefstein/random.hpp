#pragma once

#include <array>
#include <cstdint>

namespace prefstein {

// Philox4x32-10 (Salmon et al. 2011): a keyed bijection on 128-bit counters.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Random stream addressed by (seed, trial, step). Draw j of a stream is a
// pure function of those indices, so trials can run in any order or thread.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t step)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, step, static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)} {}

    std::uint32_t next_u32() {
        if (used_ == 4) refill();
        return block_[used_++];
    }
    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Uniform on {0, ..., n-1}; the multiply-shift bias is below 2^-32 for n < 2^32.
    std::uint64_t below(std::uint64_t n) {
        __extension__ using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
    }
    // One 32-bit draw; resolution 2^-32 in p.
    bool bernoulli(double p) {
        if (p >= 1.0) {
            next_u32();
            return true;
        }
        return static_cast<double>(next_u32()) < p * 0x1.0p32;
    }

private:
    void refill() {
        block_ = philox4x32(ctr_, key_);
        ++ctr_[0];
        used_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

}  // namespace prefstein
