#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace motifbench {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// Every random stream in the tool is keyed off one root seed through this.
// Same (root, tag) always gives the same stream.
inline uint64_t derive_seed(uint64_t root, std::string_view tag) {
  return splitmix64(root ^ fnv1a64(tag));
}

inline uint64_t derive_seed(uint64_t root, uint64_t lane) {
  return splitmix64(root ^ splitmix64(lane + 0x9e3779b97f4a7c15ULL));
}

// Small sequential generator. Results never depend on platform or stdlib.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0xa5a5a5a55a5a5a5aULL)) {}

  uint64_t next() {
    state_ = splitmix64(state_);
    return state_;
  }

  // [0, 1)
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double nonzero_unit() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  // [0, n)
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  // Box-Muller; always consumes exactly two draws.
  double gaussian() {
    double u1 = nonzero_unit();
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }

private:
  uint64_t state_;
};

// Sampling from {1..n} with p(k) proportional to k^-exponent, by inverse CDF.
class ZipfSampler {
public:
  ZipfSampler(size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (size_t k = 1; k <= n; ++k) total += 1.0 / std::pow(double(k), exponent);
    double acc = 0.0;
    for (size_t k = 1; k <= n; ++k) {
      acc += 1.0 / std::pow(double(k), exponent) / total;
      cdf_[k - 1] = acc;
    }
    cdf_[n - 1] = 1.0;
  }

  // 0-based rank
  size_t sample(Rng& rng) const {
    double u = rng.unit();
    size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

private:
  std::vector<double> cdf_;
};

// Choose k distinct indices out of n (partial Fisher-Yates), returned sorted
// so that gathering preserves input order.
std::vector<uint64_t> choose_indices(uint64_t n, uint64_t k, uint64_t seed);

}  // namespace motifbench
