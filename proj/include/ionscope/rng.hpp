#ifndef IONSCOPE_RNG_HPP
#define IONSCOPE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace ionscope {

// Seedable, splittable random stream. All stochastic operations in the
// library take an explicit Rng handle; there is no global generator.
// Child streams are derived as child_seed = mix(parent_seed, stream_index),
// so parallel consumers (one stream per pixel, per run, ...) draw from
// independent, reproducible sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Derived stream for index i; deterministic in (seed, i).
  Rng child(std::uint64_t stream_index) const {
    return Rng(mix(seed_, stream_index));
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (fixed two-draw consumption per value).
  double gauss() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double gauss(double mean, double std) { return mean + std * gauss(); }

  // Knuth product method; chunked so the exp() guard never underflows.
  std::uint64_t poisson(double lambda) {
    if (!(lambda > 0.0)) {
      if (lambda == 0.0) return 0;
      throw std::invalid_argument("poisson: lambda must be >= 0");
    }
    std::uint64_t total = 0;
    while (lambda > 500.0) {
      total += poisson_small(500.0);
      lambda -= 500.0;
    }
    return total + poisson_small(lambda);
  }

  // Binomial(n, p) by direct Bernoulli thinning; n is small in this domain.
  std::uint64_t binomial(std::uint64_t n, double p) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over seed advanced by the stream index
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t poisson_small(double lambda) {
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace ionscope

#endif  // IONSCOPE_RNG_HPP
