#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace survkit {

// Deterministic random draws on top of std::mt19937_64. The engine sequence is
// fully specified by the standard; the double conversions below are hand-rolled
// so that streams do not depend on the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; each call consumes two uniforms.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Uniform integer in [0, n), n >= 1. Modulo bias is irrelevant at the sizes
  // used here and keeps the draw sequence trivially reproducible.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derived stream seed for (seed, task, fold); keeps parallel fold execution
// independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& task_id, std::uint64_t fold) {
  return splitmix64(seed ^ splitmix64(hash_string(task_id)) ^ splitmix64(fold + 0x51ed2701));
}

// Fisher-Yates permutation of 0..n-1.
inline std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    std::size_t j = rng.below(static_cast<std::size_t>(i) + 1);
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace survkit
