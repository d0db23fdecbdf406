#ifndef IONSCOPE_GRID_HPP
#define IONSCOPE_GRID_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionscope/model_base.hpp"

namespace ionscope {

// One discretized parameter dimension: `count` equidistant nodes on [lo, hi].
struct ParameterAxis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;

  double step() const { return (hi - lo) / (count - 1); }
  double node(int j) const { return lo + step() * j; }
};

struct GaussianPrior {
  double mean = 0.0;
  double std = 1.0;
};

// Prior over the joint parameter space: uniform, or a product of per-axis
// Gaussians truncated to the axis ranges.
struct PriorSpec {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  std::vector<GaussianPrior> per_axis;  // one entry per axis when Gaussian

  static PriorSpec uniform() { return {}; }
  static PriorSpec gaussian(std::vector<GaussianPrior> g) {
    PriorSpec p;
    p.kind = Kind::Gaussian;
    p.per_axis = std::move(g);
    return p;
  }
};

struct AxisSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  double ci_lo = 0.0;  // central 95% credible interval
  double ci_hi = 0.0;
};

struct PosteriorSummary {
  std::vector<AxisSummary> axes;
};

// Joint PDF over 1-3 parameters, represented as density values on a regular
// grid. Integrals are trapezoidal: node i carries quadrature weight
// cell_volume x prod_axes(1/2 at an axis boundary, 1 inside), so a uniform
// density on total length L has weight 1/L at every node and integrates to 1.
// Instances are immutable; updates return new grids sharing the axis shape.
class ParameterGrid {
 public:
  // `weights` are density values; they must already integrate to 1 +- 1e-8.
  ParameterGrid(std::vector<ParameterAxis> axes, std::vector<double> weights);

  // Normalizes raw non-negative values into a density grid.
  static ParameterGrid from_unnormalized(std::vector<ParameterAxis> axes,
                                         std::vector<double> raw);

  const std::vector<ParameterAxis>& axes() const { return shape_->axes; }
  int dim() const { return static_cast<int>(shape_->axes.size()); }
  std::size_t size() const { return weights_.size(); }
  double cell_volume() const { return shape_->cell_volume; }

  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  // Trapezoid boundary factor of node i (product over axes).
  std::span<const double> quad_factors() const { return shape_->quad; }

  // Index of node i along `axis`.
  int axis_index(std::size_t i, int axis) const {
    return static_cast<int>(i / shape_->strides[axis]) % shape_->axes[axis].count;
  }

  double node_coord(std::size_t i, int axis) const {
    return shape_->axes[axis].node(axis_index(i, axis));
  }

  void node(std::size_t i, std::span<double> out) const {
    for (int a = 0; a < dim(); ++a) out[a] = node_coord(i, a);
  }

  // Trapezoidal integral of the stored density; 1 up to rounding.
  double integral() const;

  ParameterGrid with_weights(std::vector<double> w) const;

 private:
  struct Shape {
    std::vector<ParameterAxis> axes;
    std::vector<std::size_t> strides;  // last axis fastest (row-major)
    std::vector<double> quad;          // per-node trapezoid factor
    double cell_volume = 0.0;
  };

  ParameterGrid(std::shared_ptr<const Shape> shape, std::vector<double> w);

  std::shared_ptr<const Shape> shape_;
  std::vector<double> weights_;

  friend ParameterGrid bayes_update(const ParameterGrid&, const MeasurementModel&,
                                    const Design&, int);
};

ParameterGrid make_grid(std::vector<ParameterAxis> axes, const PriorSpec& prior);

// Posterior after observing outcome y at design xi. The input grid is not
// mutated. Throws DegenerateEvidenceError if the marginal evidence is below
// 1e-300.
ParameterGrid bayes_update(const ParameterGrid& grid, const MeasurementModel& model,
                           const Design& xi, int y);

// Marginal probability of outcome y at design xi under the current grid.
double marginal_evidence(const ParameterGrid& grid, const MeasurementModel& model,
                         const Design& xi, int y);

// Differential Shannon entropy of the grid density, in nats.
double entropy(const ParameterGrid& grid);

PosteriorSummary summarize(const ParameterGrid& grid);

// Grid snapshot <-> JSON: axes plus the flat weight array in row-major order.
nlohmann::json grid_to_json(const ParameterGrid& grid);
ParameterGrid grid_from_json(const nlohmann::json& j);

}  // namespace ionscope

#endif  // IONSCOPE_GRID_HPP
