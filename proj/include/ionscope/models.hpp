#ifndef IONSCOPE_MODELS_HPP
#define IONSCOPE_MODELS_HPP

#include <functional>
#include <variant>
#include <vector>

#include "ionscope/model_base.hpp"

namespace ionscope {

// ---------------------------------------------------------------------------
// Edge profiling: an opaque blade at design position xi cuts a Gaussian beam
// centered at x0 with 1-sigma radius sigma; a is the detector efficiency.
// ---------------------------------------------------------------------------

struct EdgeParams {
  double x0 = 0.0;     // beam position, nm
  double sigma = 1.0;  // 1-sigma beam radius, nm
  double a = 1.0;      // detector efficiency
};

// p(y | theta, xi) with p(1) = (a/2) erfc((xi - x0) / (sigma sqrt(2))).
double edge_likelihood(const EdgeParams& theta, double xi, int y);

// ---------------------------------------------------------------------------
// Circular hole: transmission is the mass of the Gaussian beam falling
// inside a disc of radius R whose center is offset by d from the beam axis.
// ---------------------------------------------------------------------------

struct HoleParams {
  double cx = 0.0;      // hole center, nm
  double cy = 0.0;
  double radius = 1.0;  // hole radius R, nm
};

struct BeamSpec {
  double sigma = 1.0;  // 1-sigma beam radius, nm
  double a = 1.0;      // detector efficiency
};

// Mass of a symmetric 2D Gaussian (std sigma) centered at distance d from a
// disc of radius R:  int_0^R (r/sigma^2) exp(-(r^2+d^2)/(2 sigma^2))
// I0(r d / sigma^2) dr.  Evaluated by the noncentral chi-square series to
// absolute error well below 1e-8; reduces to the Rayleigh CDF at d = 0.
double disc_containment(double d, double R, double sigma);

// p(1) = a * disc_containment(||xi - center||, R, sigma).
double hole_likelihood(const HoleParams& theta, const BeamSpec& beam,
                       const Design& xi, int y);

// ---------------------------------------------------------------------------
// Grid-facing models (theta ordered as the grid axes)
// ---------------------------------------------------------------------------

// theta = (x0, sigma, a); xi is a scalar design.
class EdgeModel final : public MeasurementModel {
 public:
  int param_count() const override { return 3; }
  double p_detect(std::span<const double> theta, const Design& xi) const override {
    return edge_likelihood({theta[0], theta[1], theta[2]}, xi.x(), 1);
  }
  std::unique_ptr<UtilityKernel> make_utility_kernel(const ParameterGrid& grid) const override;
};

// theta = (cx, cy, R); beam sigma and detector efficiency are fixed nuisance
// values; xi is a 2D design.
class HoleModel final : public MeasurementModel {
 public:
  explicit HoleModel(BeamSpec beam);
  const BeamSpec& beam() const { return beam_; }

  int param_count() const override { return 3; }
  double p_detect(std::span<const double> theta, const Design& xi) const override {
    return hole_likelihood({theta[0], theta[1], theta[2]}, beam_, xi, 1);
  }
  std::unique_ptr<UtilityKernel> make_utility_kernel(const ParameterGrid& grid) const override;

 private:
  BeamSpec beam_;
};

// Arbitrary detection-probability function; handy for tests and for grids
// that bind a subset of the physical parameters.
class FunctionModel final : public MeasurementModel {
 public:
  using Fn = std::function<double(std::span<const double>, const Design&)>;
  FunctionModel(int param_count, Fn p1) : n_(param_count), p1_(std::move(p1)) {}

  int param_count() const override { return n_; }
  double p_detect(std::span<const double> theta, const Design& xi) const override {
    return p1_(theta, xi);
  }

 private:
  int n_;
  Fn p1_;
};

// ---------------------------------------------------------------------------
// Ideal transmission masks for raster imaging
// ---------------------------------------------------------------------------

struct EdgeMask {
  double x0 = 0.0;  // transmissive for x > x0
};

struct DiscMask {
  double cx = 0.0, cy = 0.0;
  double radius = 1.0;
};

struct RectMask {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

struct BitmapMask {
  int width = 1, height = 1;
  double pitch = 1.0;  // pixel pitch, nm; pixel (0,0) centered at the origin
  std::vector<double> levels;  // row-major gray levels, >= 0
  double max_level = 1.0;
};

using Mask = std::variant<EdgeMask, DiscMask, RectMask, BitmapMask>;

// Ideal (unconvolved) transmission of the mask at a point; gray levels scale
// to [0,1]; points outside a bitmap are opaque.
double mask_transmission(const Mask& mask, double x, double y);

}  // namespace ionscope

#endif  // IONSCOPE_MODELS_HPP
