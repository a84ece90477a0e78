#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ami {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-streams so that, for example, the DP noise of trial i does not
// depend on how many normals the crafting step consumed.
enum class Stream : std::uint64_t {
  Data = 1,
  Coin = 2,
  Craft = 3,
  Dp = 4,
  Reference = 5,
  Bounds = 6,
  SelfTest = 7,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream s) {
  return derive_seed(derive_seed(master, index), static_cast<std::uint64_t>(s));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal() { return normal_(eng_); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }
  bool coin() { return below(2) == 1; }
  // Laplace(0, scale) by inverse CDF.
  double laplace(double scale) {
    double u = uniform() - 0.5;
    double s = u < 0 ? -1.0 : 1.0;
    return -scale * s * std::log1p(-2.0 * std::abs(u));
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ami
