#ifndef IONSCOPE_SOURCE_HPP
#define IONSCOPE_SOURCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ionscope/rng.hpp"

namespace ionscope {

// Particle emission statistics per gated probe: an exact count, or a
// Poisson-distributed count with the given mean.
struct SourceSpec {
  enum class Kind { Deterministic, Poissonian };
  Kind kind = Kind::Deterministic;
  std::uint64_t n = 1;   // Deterministic
  double lambda = 1.0;   // Poissonian

  static SourceSpec deterministic(std::uint64_t n);
  static SourceSpec poissonian(double lambda);
};

struct DetectorSpec {
  double efficiency = 1.0;  // probability a transmitted particle is registered
  double dark_prob = 0.0;   // probability of one spurious count per gated probe
};

struct ProbeOutcome {
  std::uint64_t emitted = 0;
  std::uint64_t transmitted = 0;
  std::uint64_t detected = 0;
  int y = 0;  // 1 iff detected >= 1
};

// One gated probe: emit, transmit each particle with p_transmit, detect each
// transmitted particle with the detector efficiency, then add an optional
// dark count.
ProbeOutcome sample_probe(const SourceSpec& source, const DetectorSpec& det,
                          double p_transmit, Rng& rng);

// SNR (mean/std of the detected-count distribution) of a deterministic
// n-particle source through a detector of efficiency a: Binomial(n, a) gives
// sqrt(n a / (1-a)). Throws for a = 1 (zero std) and a = 0 (zero signal).
double snr_deterministic(std::uint64_t n, double a);

// Thinned Poisson keeps Poisson statistics: SNR = sqrt(lambda a).
double snr_poisson(double lambda, double a);

// Monotone map of [0, inf] onto [0, 1]: f / (f + 1).
double compactify(double f);

struct SnrRow {
  double n = 0.0;  // emitted count (deterministic) or mean count (Poissonian)
  double a = 1.0;
  std::string source_kind;
  double snr = 0.0;
  double snr_compactified = 0.0;
};

// SNR as a function of mean emitted count for each efficiency; rows ordered
// by (a, n).
std::vector<SnrRow> snr_curve(SourceSpec::Kind kind, const std::vector<double>& a_list,
                              std::uint64_t n_min, std::uint64_t n_max);

}  // namespace ionscope

#endif  // IONSCOPE_SOURCE_HPP
