#ifndef CURVECAST_RNG_HPP
#define CURVECAST_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace curvecast {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, tag, index). Used everywhere a
// sub-computation needs its own stream, so adding one stream never perturbs another.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the tag
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::uint64_t s = seed ^ h;
  std::uint64_t out = splitmix64_next(s);
  s = out ^ (index * 0xff51afd7ed558ccdull + 0x9e3779b97f4a7c15ull);
  return splitmix64_next(s);
}

// Seeded generator with explicitly implemented transforms (uniform, Poisson by
// inversion, Box-Muller normal) so that output sequences are identical on every
// platform. std:: distributions are not portable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), n > 0
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Poisson count by CDF inversion; means above 30 are split into independent
  // Poisson(30) chunks so the inversion loop stays short and exp() stays in range.
  std::int64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    std::int64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::int64_t poisson_small(double mean) {
    double p = std::exp(-mean);
    double cdf = p;
    double u = uniform();
    std::int64_t k = 0;
    while (u > cdf && k < 400) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::mt19937_64 engine_;
};

}  // namespace curvecast

#endif  // CURVECAST_RNG_HPP
