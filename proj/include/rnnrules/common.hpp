#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnnrules {

/// Caller-supplied data is invalid: bad symbol, malformed file, id out of range.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Optimization produced a non-finite loss or parameter value.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, long iteration, long batch_index)
      : std::runtime_error(what), iteration(iteration), batch_index(batch_index) {}
  long iteration;
  long batch_index;
};

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// Deterministic RNG. Engine words are mapped to numbers in-library; no
// std:: distributions are used, so streams are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // Independent substream for (seed, stream); used to decorrelate the
  // per-component generators derived from one experiment seed.
  static Rng derive(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x632be59bd9b4e019ULL * (stream + 1));
    uint64_t mixed = splitmix64(s);
    return Rng(mixed);
  }

  uint64_t next() { return eng_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, unbiased.
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    uint64_t threshold = (~uint64_t{0} - n + 1) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform integer in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool coin() { return (next() >> 63) != 0; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rnnrules
