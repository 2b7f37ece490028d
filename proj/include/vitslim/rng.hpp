#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vitslim {

// Deterministic random source. Distributions are implemented here on top of
// the raw mt19937_64 stream (whose output sequence the standard fixes) so
// that sampled values do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream keyed by (seed, tags...), e.g. (seed, epoch).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound), rejection sampled.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();
  // Normal(0, stddev) resampled until |x| <= bound_in_stddevs * stddev.
  double truncated_normal(double stddev, double bound_in_stddevs = 2.0);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

 private:
  Rng() = default;
  std::mt19937_64 engine_;
};

}  // namespace vitslim
