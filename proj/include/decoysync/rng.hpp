#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace decoysync {

//! SplitMix64 step. Used for seeding and for deriving substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t &state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Derives an independent 64-bit seed from a base seed and a path of indices,
//! e.g. derive_seed(base, {grid_index, trial_index}). The result depends only
//! on the arguments, never on call order, so parallel sweeps that look up
//! their substream by index reproduce serial output exactly.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  for (const auto index : path) {
    state = out ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    out = splitmix64(state);
  }
  return out;
}

//! xoshiro256** 1.0 (Blackman & Vigna). Portable: every draw is defined in
//! terms of the raw 64-bit output below, no std:: distributions involved.
class Xoshiro256 {
public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto &word : s_)
      word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  //! Equivalent to 2^128 calls of operator(); yields non-overlapping
  //! sequences for up to 2^128 parallel streams.
  constexpr void jump() noexcept {
    constexpr std::array<std::uint64_t, 4> kJump = {
        0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL, 0xa9582618e03fc9aaULL,
        0x39abdc4529b1661cULL};
    std::array<std::uint64_t, 4> acc{};
    for (const auto word : kJump) {
      for (int b = 0; b < 64; ++b) {
        if (word & (std::uint64_t{1} << b)) {
          for (std::size_t i = 0; i < 4; ++i)
            acc[i] ^= s_[i];
        }
        (*this)();
      }
    }
    s_ = acc;
  }

  //! Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

  //! Uniform integer in [lo, hi] (inclusive) by Lemire's nearly-divisionless
  //! rejection method.
  constexpr std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) // full 64-bit range
      return static_cast<std::int64_t>((*this)());
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * span;
    auto low = static_cast<std::uint64_t>(m);
    if (low < span) {
      const std::uint64_t threshold = (0 - span) % span;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * span;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::int64_t>(m >> 64);
  }

  const std::array<std::uint64_t, 4> &state() const noexcept { return s_; }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

} // namespace decoysync
