#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace ddmb {

/// Hashes an ordered list of words into a 64-bit stream key. Used to derive
/// independent per-replicate (and per-run) streams from a master seed, so
/// results never depend on the order in which streams are consumed.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts);

/// xoshiro256** generator seeded through splitmix64. Satisfies
/// UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t key() const { return key_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t key_;
};

/// Stream for the given master seed and coordinates.
inline Stream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t key = seed;
  for (auto c : coords) key = derive_key({key, c});
  return Stream(key);
}

}  // namespace ddmb
