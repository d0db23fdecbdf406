#include "ionscope/source.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ionscope {

SourceSpec SourceSpec::deterministic(std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("SourceSpec: n must be >= 1");
  SourceSpec s;
  s.kind = Kind::Deterministic;
  s.n = n;
  return s;
}

SourceSpec SourceSpec::poissonian(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("SourceSpec: lambda must be > 0");
  SourceSpec s;
  s.kind = Kind::Poissonian;
  s.lambda = lambda;
  return s;
}

ProbeOutcome sample_probe(const SourceSpec& source, const DetectorSpec& det,
                          double p_transmit, Rng& rng) {
  if (!(p_transmit >= 0.0 && p_transmit <= 1.0))
    throw std::invalid_argument("sample_probe: p_transmit must be in [0,1]");
  if (!(det.efficiency >= 0.0 && det.efficiency <= 1.0))
    throw std::invalid_argument("sample_probe: efficiency must be in [0,1]");
  if (!(det.dark_prob >= 0.0 && det.dark_prob < 1.0))
    throw std::invalid_argument("sample_probe: dark_prob must be in [0,1)");

  ProbeOutcome out;
  out.emitted = source.kind == SourceSpec::Kind::Deterministic ? source.n
                                                               : rng.poisson(source.lambda);
  for (std::uint64_t i = 0; i < out.emitted; ++i) {
    if (!rng.bernoulli(p_transmit)) continue;
    ++out.transmitted;
    if (rng.bernoulli(det.efficiency)) ++out.detected;
  }
  if (det.dark_prob > 0.0 && rng.bernoulli(det.dark_prob)) ++out.detected;
  out.y = out.detected >= 1 ? 1 : 0;
  return out;
}

double snr_deterministic(std::uint64_t n, double a) {
  if (n < 1) throw std::invalid_argument("snr_deterministic: n must be >= 1");
  if (a >= 1.0)
    throw std::domain_error("snr_deterministic: a = 1 gives zero variance (infinite SNR)");
  if (a <= 0.0) throw std::domain_error("snr_deterministic: a = 0 gives zero signal");
  return std::sqrt(static_cast<double>(n) * a / (1.0 - a));
}

double snr_poisson(double lambda, double a) {
  if (!(lambda > 0.0)) throw std::invalid_argument("snr_poisson: lambda must be > 0");
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("snr_poisson: a must be in (0,1]");
  return std::sqrt(lambda * a);
}

double compactify(double f) {
  if (std::isnan(f) || f < 0.0) throw std::invalid_argument("compactify: f must be >= 0");
  if (std::isinf(f)) return 1.0;
  return f / (f + 1.0);
}

std::vector<SnrRow> snr_curve(SourceSpec::Kind kind, const std::vector<double>& a_list,
                              std::uint64_t n_min, std::uint64_t n_max) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("snr_curve: bad n range");
  std::vector<SnrRow> rows;
  for (const double a : a_list) {
    for (std::uint64_t n = n_min; n <= n_max; ++n) {
      SnrRow r;
      r.n = static_cast<double>(n);
      r.a = a;
      if (kind == SourceSpec::Kind::Deterministic) {
        r.source_kind = "deterministic";
        r.snr = snr_deterministic(n, a);
      } else {
        r.source_kind = "poissonian";
        r.snr = snr_poisson(static_cast<double>(n), a);
      }
      r.snr_compactified = compactify(r.snr);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace ionscope
