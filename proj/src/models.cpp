#include "ionscope/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ionscope/grid.hpp"

namespace ionscope {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Regularized lower incomplete gamma P(s, x); series for x < s+1,
// Lentz continued fraction otherwise.
double gamma_p(double s, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(s);
  if (x < s + 1.0) {
    double ap = s;
    double term = 1.0 / s;
    double sum = term;
    for (int i = 0; i < 10000; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - lg);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int n = 1; n < 10000; ++n) {
    const double an = -n * (n - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 3e-16) break;
  }
  const double q = std::exp(-x + s * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace

double edge_likelihood(const EdgeParams& theta, double xi, int y) {
  if (!(theta.sigma > 0.0))
    throw std::invalid_argument("edge_likelihood: sigma must be > 0");
  if (!(theta.a >= 0.0 && theta.a <= 1.0))
    throw std::invalid_argument("edge_likelihood: a must be in [0,1]");
  if (y != 0 && y != 1) throw std::invalid_argument("outcome y must be 0 or 1");
  const double p1 = 0.5 * theta.a * std::erfc((xi - theta.x0) / (theta.sigma * kSqrt2));
  return y ? p1 : 1.0 - p1;
}

double disc_containment(double d, double R, double sigma) {
  if (!std::isfinite(d) || !std::isfinite(R) || !std::isfinite(sigma))
    throw std::invalid_argument("disc_containment: non-finite input");
  if (!(R > 0.0)) throw std::invalid_argument("disc_containment: R must be > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("disc_containment: sigma must be > 0");
  if (d < 0.0) throw std::invalid_argument("disc_containment: d must be >= 0");

  // Saturation clamps keyed on the rim distance.
  if ((R - d) / sigma > 40.0) return 1.0;
  if ((d - R) / sigma > 40.0) return 0.0;

  // Noncentral chi-square (2 dof) CDF:
  //   P = sum_k Pois(k; a) * P(Gamma(k+1) <= x),  a = d^2/(2s^2), x = R^2/(2s^2)
  const double a = d * d / (2.0 * sigma * sigma);
  const double x = R * R / (2.0 * sigma * sigma);
  if (a == 0.0) return -std::expm1(-x);

  const std::uint64_t k0 = static_cast<std::uint64_t>(a);
  const double lpois0 =
      -a + static_cast<double>(k0) * std::log(a) - std::lgamma(static_cast<double>(k0) + 1.0);
  const double p0 = std::exp(lpois0);
  double g0 = gamma_p(static_cast<double>(k0) + 1.0, x);
  const double lt0 =
      -x + static_cast<double>(k0) * std::log(x) - std::lgamma(static_cast<double>(k0) + 1.0);
  double t0 = lt0 > -745.0 ? std::exp(lt0) : 0.0;

  double total = p0 * g0;

  // upward from the Poisson mode
  {
    double p = p0, g = g0, t = t0;
    for (std::uint64_t k = k0 + 1; k < k0 + 100000; ++k) {
      p *= a / static_cast<double>(k);
      t *= x / static_cast<double>(k);
      g = std::max(0.0, g - t);
      total += p * g;
      if (p < 1e-18 || g < 1e-18) break;
    }
  }
  // downward to k = 0
  {
    double p = p0, g = g0, t = t0;
    for (std::uint64_t k = k0; k > 0; --k) {
      g = std::min(1.0, g + t);
      t *= static_cast<double>(k) / x;
      p *= static_cast<double>(k) / a;
      total += p * g;
      if (p < 1e-18) break;
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

double hole_likelihood(const HoleParams& theta, const BeamSpec& beam,
                       const Design& xi, int y) {
  if (!(theta.radius > 0.0))
    throw std::invalid_argument("hole_likelihood: radius must be > 0");
  if (y != 0 && y != 1) throw std::invalid_argument("outcome y must be 0 or 1");
  const double dx = xi.x() - theta.cx;
  const double dy = xi.y() - theta.cy;
  const double d = std::hypot(dx, dy);
  const double p1 = beam.a * disc_containment(d, theta.radius, beam.sigma);
  return y ? p1 : 1.0 - p1;
}

HoleModel::HoleModel(BeamSpec beam) : beam_(beam) {
  if (!(beam_.sigma > 0.0)) throw std::invalid_argument("HoleModel: beam sigma must be > 0");
  if (!(beam_.a >= 0.0 && beam_.a <= 1.0))
    throw std::invalid_argument("HoleModel: efficiency must be in [0,1]");
}

double mask_transmission(const Mask& mask, double x, double y) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EdgeMask>) {
          return x > m.x0 ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, DiscMask>) {
          const double dx = x - m.cx, dy = y - m.cy;
          return dx * dx + dy * dy <= m.radius * m.radius ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, RectMask>) {
          return (x >= m.x0 && x <= m.x1 && y >= m.y0 && y <= m.y1) ? 1.0 : 0.0;
        } else {
          const long i = std::lround(x / m.pitch);
          const long j = std::lround(y / m.pitch);
          if (i < 0 || i >= m.width || j < 0 || j >= m.height) return 0.0;
          const double lvl = m.levels[static_cast<std::size_t>(j) *
                                          static_cast<std::size_t>(m.width) +
                                      static_cast<std::size_t>(i)];
          return std::clamp(lvl / m.max_level, 0.0, 1.0);
        }
      },
      mask);
}

// ---------------------------------------------------------------------------
// Utility kernels
// ---------------------------------------------------------------------------

namespace {

// Exact fallback: evaluates the model at every node.
class GenericKernel final : public UtilityKernel {
 public:
  GenericKernel(const MeasurementModel& model, const ParameterGrid& grid)
      : model_(model), dim_(grid.dim()), coords_(grid.size() * grid.dim()) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid.node(i, {&coords_[i * dim_], static_cast<std::size_t>(dim_)});
  }

  UtilitySums accumulate(std::span<const double> u, std::span<const double> v,
                         const Design& xi) const override {
    UtilitySums s;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double p1 =
          std::clamp(model_.p_detect({&coords_[i * dim_], static_cast<std::size_t>(dim_)}, xi),
                     0.0, 1.0);
      s.ew1 += p1 * u[i];
      s.t11 += xlnx(p1) * u[i];
      s.t10 += xlnx(1.0 - p1) * u[i];
      s.t21 += p1 * v[i];
    }
    return s;
  }

 private:
  const MeasurementModel& model_;
  std::size_t dim_;
  std::vector<double> coords_;
};

// Edge model on a (x0, sigma, a) grid: the detection probability depends on
// the node only through z = (xi-x0)/sigma and the a value, so precompute
// per-z-sample rows of p1, p1 ln p1 and p0 ln p0 for every a node. One table
// lookup per (x0, sigma) plane then serves the whole contiguous a row.
class EdgeTableKernel final : public UtilityKernel {
 public:
  explicit EdgeTableKernel(const ParameterGrid& grid) {
    const auto& axes = grid.axes();
    if (axes.size() != 3)
      throw std::invalid_argument("EdgeModel: grid must have axes (x0, sigma, a)");
    if (!(axes[1].lo > 0.0))
      throw std::invalid_argument("EdgeModel: sigma axis must be positive");
    if (axes[2].lo < 0.0 || axes[2].hi > 1.0)
      throw std::invalid_argument("EdgeModel: efficiency axis must lie in [0,1]");

    na_ = axes[2].count;
    const std::size_t planes =
        static_cast<std::size_t>(axes[0].count) * static_cast<std::size_t>(axes[1].count);
    inv_sigma_.resize(planes);
    x0s_.resize(planes);
    std::size_t p = 0;
    for (int i0 = 0; i0 < axes[0].count; ++i0)
      for (int i1 = 0; i1 < axes[1].count; ++i1, ++p) {
        const double inv = 1.0 / (axes[1].node(i1) * kSqrt2);
        inv_sigma_[p] = inv;
        x0s_[p] = axes[0].node(i0) * inv;
      }

    p1t_.resize(static_cast<std::size_t>(kNz) * na_);
    t1t_.resize(p1t_.size());
    t0t_.resize(p1t_.size());
    for (int iz = 0; iz < kNz; ++iz) {
      const double z = kZlo + iz * (kZhi - kZlo) / (kNz - 1);
      const double phi = 0.5 * std::erfc(z);  // z already includes the sqrt(2)
      for (int k = 0; k < na_; ++k) {
        const double p1 = axes[2].node(k) * phi;
        const std::size_t at = static_cast<std::size_t>(iz) * na_ + k;
        p1t_[at] = p1;
        t1t_[at] = xlnx(p1);
        t0t_[at] = xlnx(1.0 - p1);
      }
    }
  }

  UtilitySums accumulate(std::span<const double> u, std::span<const double> v,
                         const Design& xi) const override {
    UtilitySums s;
    const double invh = (kNz - 1) / (kZhi - kZlo);
    const double x = xi.x();
    for (std::size_t p = 0; p < inv_sigma_.size(); ++p) {
      double z = x * inv_sigma_[p] - x0s_[p];
      double pos = (z - kZlo) * invh;
      pos = std::clamp(pos, 0.0, static_cast<double>(kNz) - 1.0000001);
      const auto idx = static_cast<std::size_t>(pos);
      const double f = pos - static_cast<double>(idx);
      const double* P0 = &p1t_[idx * na_];
      const double* P1 = P0 + na_;
      const double* A0 = &t1t_[idx * na_];
      const double* A1 = A0 + na_;
      const double* B0 = &t0t_[idx * na_];
      const double* B1 = B0 + na_;
      const std::size_t base = p * na_;
      for (int k = 0; k < na_; ++k) {
        const double p1 = P0[k] + f * (P1[k] - P0[k]);
        const double t1 = A0[k] + f * (A1[k] - A0[k]);
        const double t0 = B0[k] + f * (B1[k] - B0[k]);
        const double uu = u[base + k];
        s.ew1 += p1 * uu;
        s.t11 += t1 * uu;
        s.t10 += t0 * uu;
        s.t21 += p1 * v[base + k];
      }
    }
    return s;
  }

 private:
  static constexpr int kNz = 4096;
  static constexpr double kZlo = -8.5;  // in units of sigma*sqrt(2)
  static constexpr double kZhi = 8.5;

  int na_ = 0;
  std::vector<double> inv_sigma_, x0s_;      // per (x0, sigma) plane
  std::vector<double> p1t_, t1t_, t0t_;      // [z_index][a_index]
};

// Hole model on a (cx, cy, R) grid with fixed beam: detection depends on the
// node only through the center distance d and the R value. Rows are sampled
// on a d band around the R range; outside it the beam is fully inside or
// fully blocked and the kernels are constants.
class HoleTableKernel final : public UtilityKernel {
 public:
  HoleTableKernel(const ParameterGrid& grid, const BeamSpec& beam) {
    const auto& axes = grid.axes();
    if (axes.size() != 3)
      throw std::invalid_argument("HoleModel: grid must have axes (cx, cy, R)");
    if (!(axes[2].lo > 0.0))
      throw std::invalid_argument("HoleModel: radius axis must be positive");

    nr_ = axes[2].count;
    const std::size_t planes =
        static_cast<std::size_t>(axes[0].count) * static_cast<std::size_t>(axes[1].count);
    cx_.resize(planes);
    cy_.resize(planes);
    std::size_t p = 0;
    for (int i0 = 0; i0 < axes[0].count; ++i0)
      for (int i1 = 0; i1 < axes[1].count; ++i1, ++p) {
        cx_[p] = axes[0].node(i0);
        cy_[p] = axes[1].node(i1);
      }

    dlo_ = std::max(0.0, axes[2].lo - 10.0 * beam.sigma);
    dhi_ = axes[2].hi + 10.0 * beam.sigma;
    a_ = beam.a;
    t1_in_ = xlnx(a_);
    t0_in_ = xlnx(1.0 - a_);

    p1t_.resize(static_cast<std::size_t>(kNd) * nr_);
    t1t_.resize(p1t_.size());
    t0t_.resize(p1t_.size());
    for (int id = 0; id < kNd; ++id) {
      const double d = dlo_ + id * (dhi_ - dlo_) / (kNd - 1);
      for (int k = 0; k < nr_; ++k) {
        const double p1 = a_ * disc_containment(d, axes[2].node(k), beam.sigma);
        const std::size_t at = static_cast<std::size_t>(id) * nr_ + k;
        p1t_[at] = p1;
        t1t_[at] = xlnx(p1);
        t0t_[at] = xlnx(1.0 - p1);
      }
    }
  }

  UtilitySums accumulate(std::span<const double> u, std::span<const double> v,
                         const Design& xi) const override {
    UtilitySums s;
    const double invh = (kNd - 1) / (dhi_ - dlo_);
    for (std::size_t p = 0; p < cx_.size(); ++p) {
      const double dx = xi.x() - cx_[p];
      const double dy = xi.y() - cy_[p];
      const double d = std::sqrt(dx * dx + dy * dy);
      const std::size_t base = p * nr_;
      if (d >= dhi_) continue;  // fully blocked: all four kernels vanish
      if (d <= dlo_) {          // beam fully inside for every R node
        double su = 0.0, sv = 0.0;
        for (int k = 0; k < nr_; ++k) {
          su += u[base + k];
          sv += v[base + k];
        }
        s.ew1 += a_ * su;
        s.t11 += t1_in_ * su;
        s.t10 += t0_in_ * su;
        s.t21 += a_ * sv;
        continue;
      }
      double pos = (d - dlo_) * invh;
      pos = std::min(pos, static_cast<double>(kNd) - 1.0000001);
      const auto idx = static_cast<std::size_t>(pos);
      const double f = pos - static_cast<double>(idx);
      const double* P0 = &p1t_[idx * nr_];
      const double* P1 = P0 + nr_;
      const double* A0 = &t1t_[idx * nr_];
      const double* A1 = A0 + nr_;
      const double* B0 = &t0t_[idx * nr_];
      const double* B1 = B0 + nr_;
      for (int k = 0; k < nr_; ++k) {
        const double p1 = P0[k] + f * (P1[k] - P0[k]);
        const double t1 = A0[k] + f * (A1[k] - A0[k]);
        const double t0 = B0[k] + f * (B1[k] - B0[k]);
        const double uu = u[base + k];
        s.ew1 += p1 * uu;
        s.t11 += t1 * uu;
        s.t10 += t0 * uu;
        s.t21 += p1 * v[base + k];
      }
    }
    return s;
  }

 private:
  static constexpr int kNd = 4096;

  int nr_ = 0;
  double dlo_ = 0.0, dhi_ = 0.0;
  double a_ = 1.0, t1_in_ = 0.0, t0_in_ = 0.0;
  std::vector<double> cx_, cy_;            // per (cx, cy) plane
  std::vector<double> p1t_, t1t_, t0t_;    // [d_index][R_index]
};

}  // namespace

std::unique_ptr<UtilityKernel> MeasurementModel::make_utility_kernel(
    const ParameterGrid& grid) const {
  return std::make_unique<GenericKernel>(*this, grid);
}

std::unique_ptr<UtilityKernel> EdgeModel::make_utility_kernel(const ParameterGrid& grid) const {
  return std::make_unique<EdgeTableKernel>(grid);
}

std::unique_ptr<UtilityKernel> HoleModel::make_utility_kernel(const ParameterGrid& grid) const {
  return std::make_unique<HoleTableKernel>(grid, beam_);
}

}  // namespace ionscope
