#ifndef IONSCOPE_MODEL_BASE_HPP
#define IONSCOPE_MODEL_BASE_HPP

#include <array>
#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>

namespace ionscope {

class ParameterGrid;

// Probe position: a scalar edge position or a 2D beam position.
class Design {
 public:
  Design() = default;

  static Design scalar(double x) {
    Design d;
    d.dim_ = 1;
    d.c_ = {x, 0.0};
    return d;
  }

  static Design point(double x, double y) {
    Design d;
    d.dim_ = 2;
    d.c_ = {x, y};
    return d;
  }

  int dim() const { return dim_; }
  double x() const { return c_[0]; }
  double y() const { return c_[1]; }
  double coord(int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  // Lexicographic order; used for deterministic tie-breaking.
  friend auto operator<=>(const Design& a, const Design& b) = default;

 private:
  std::array<double, 2> c_{0.0, 0.0};
  int dim_ = 1;
};

// Node sums needed to assemble the expected information gain at one design.
//   ew1 = sum_i p1_i u_i            (u_i = quadrature weight x density)
//   t11 = sum_i (p1 ln p1)_i u_i
//   t10 = sum_i (p0 ln p0)_i u_i
//   t21 = sum_i p1_i v_i            (v_i = quadrature weight x density x ln density)
struct UtilitySums {
  double ew1 = 0.0;
  double t11 = 0.0;
  double t10 = 0.0;
  double t21 = 0.0;
};

// Evaluates UtilitySums over all grid nodes for one candidate design.
// Built once per (model, grid axes); the per-probe weight arrays are passed
// in per call, so one kernel serves a whole adaptive run. Implementations
// must be pure so candidates can be evaluated in parallel.
class UtilityKernel {
 public:
  virtual ~UtilityKernel() = default;
  virtual UtilitySums accumulate(std::span<const double> u,
                                 std::span<const double> v,
                                 const Design& xi) const = 0;
};

// Binary-outcome measurement model p(y | theta, xi). Implementations define
// the detection probability p(1); p(0) is its complement by construction.
class MeasurementModel {
 public:
  virtual ~MeasurementModel() = default;

  virtual int param_count() const = 0;

  // Probability that one probe particle is detected, given parameters theta
  // (ordered as the grid axes) and design xi.
  virtual double p_detect(std::span<const double> theta, const Design& xi) const = 0;

  double likelihood(std::span<const double> theta, const Design& xi, int y) const {
    const double p = p_detect(theta, xi);
    return y ? p : 1.0 - p;
  }

  // Fast utility-sum evaluator for this model on the given grid. The default
  // evaluates p_detect exactly at every node; models with structure
  // (edge, hole) override with tabulated kernels.
  virtual std::unique_ptr<UtilityKernel> make_utility_kernel(const ParameterGrid& grid) const;
};

// Raised when an observation has (numerically) zero marginal probability
// under every grid node.
class DegenerateEvidenceError : public std::runtime_error {
 public:
  DegenerateEvidenceError(const std::string& what, double evidence, int iteration = -1)
      : std::runtime_error(what), evidence_(evidence), iteration_(iteration) {}

  double evidence() const { return evidence_; }
  // Probe iteration the failure occurred on (1-based); -1 outside a run.
  int iteration() const { return iteration_; }

 private:
  double evidence_;
  int iteration_;
};

}  // namespace ionscope

#endif  // IONSCOPE_MODEL_BASE_HPP
