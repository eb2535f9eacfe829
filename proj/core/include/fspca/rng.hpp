#pragma once

// Deterministic random streams ("fspca-rng/1").
//
// Every random draw in the project goes through Stream, which wraps
// std::mt19937_64 but implements its own uniform/normal transforms so that
// sequences do not depend on the standard library's distribution
// implementations. Substream seeds are derived with SplitMix64 over
// (base_seed, tag, index); Monte-Carlo harnesses use one substream per
// replication, which makes parallel runs reproducible and order-independent.

#include <cmath>
#include <cstdint>
#include <random>

namespace fspca::rng {

inline constexpr const char* kGeneratorName = "fspca-rng/1";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for substream (tag, index) of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
  h = splitmix64(h ^ (0xc2b2ae3d27d4eb4fULL * (index + 1)));
  return h;
}

// Substream tags used across the project. Recorded here so any output file
// can be regenerated from (base_seed, rep) alone.
enum StreamTag : std::uint64_t {
  kTagModel = 1,
  kTagData = 2,
  kTagHeldOut = 3,
  kTagCvFolds = 4,
  kTagViMembers = 5,
};

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the sine draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Unbiased uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
    std::uint64_t v = engine_();
    while (v < threshold) v = engine_();
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Stream substream(std::uint64_t base, std::uint64_t tag,
                        std::uint64_t index = 0) {
  return Stream(derive_seed(base, tag, index));
}

}  // namespace fspca::rng
