#include "ionscope/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ionscope {

namespace {

constexpr double kNormTol = 1e-8;
constexpr double kDegenerateEvidence = 1e-300;

void validate_axes(const std::vector<ParameterAxis>& axes) {
  if (axes.empty() || axes.size() > 3)
    throw std::invalid_argument("grid: 1 to 3 axes required");
  for (const auto& ax : axes) {
    if (!(ax.hi > ax.lo))
      throw std::invalid_argument("axis '" + ax.name + "': hi must exceed lo");
    if (ax.count < 2)
      throw std::invalid_argument("axis '" + ax.name + "': count must be >= 2");
    if (!std::isfinite(ax.lo) || !std::isfinite(ax.hi))
      throw std::invalid_argument("axis '" + ax.name + "': bounds must be finite");
  }
}

}  // namespace

ParameterGrid::ParameterGrid(std::shared_ptr<const Shape> shape, std::vector<double> w)
    : shape_(std::move(shape)), weights_(std::move(w)) {}

ParameterGrid::ParameterGrid(std::vector<ParameterAxis> axes, std::vector<double> weights) {
  validate_axes(axes);
  auto shape = std::make_shared<Shape>();
  shape->axes = std::move(axes);
  const int dim = static_cast<int>(shape->axes.size());

  std::size_t n = 1;
  shape->cell_volume = 1.0;
  for (const auto& ax : shape->axes) {
    n *= static_cast<std::size_t>(ax.count);
    shape->cell_volume *= ax.step();
  }
  shape->strides.assign(dim, 1);
  for (int a = dim - 2; a >= 0; --a)
    shape->strides[a] = shape->strides[a + 1] *
                        static_cast<std::size_t>(shape->axes[a + 1].count);

  if (weights.size() != n)
    throw std::invalid_argument("grid: weight array size does not match axes");

  shape->quad.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double q = 1.0;
    for (int a = 0; a < dim; ++a) {
      const int j = static_cast<int>(i / shape->strides[a]) % shape->axes[a].count;
      if (j == 0 || j == shape->axes[a].count - 1) q *= 0.5;
    }
    shape->quad[i] = q;
  }

  shape_ = std::move(shape);
  weights_ = std::move(weights);

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("grid: weights must be finite and >= 0");
    sum += shape_->quad[i] * w;
  }
  sum *= shape_->cell_volume;
  if (std::abs(sum - 1.0) > kNormTol)
    throw std::invalid_argument("grid: density must integrate to 1 (got " +
                                std::to_string(sum) + ")");
}

ParameterGrid ParameterGrid::from_unnormalized(std::vector<ParameterAxis> axes,
                                               std::vector<double> raw) {
  validate_axes(axes);
  std::size_t n = 1;
  double vol = 1.0;
  for (const auto& ax : axes) {
    n *= static_cast<std::size_t>(ax.count);
    vol *= ax.step();
  }
  if (raw.size() != n)
    throw std::invalid_argument("grid: weight array size does not match axes");

  // trapezoid factors recomputed locally; ctor rebuilds them anyway
  std::vector<std::size_t> strides(axes.size(), 1);
  for (int a = static_cast<int>(axes.size()) - 2; a >= 0; --a)
    strides[a] = strides[a + 1] * static_cast<std::size_t>(axes[a + 1].count);

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(raw[i]) || raw[i] < 0.0)
      throw std::invalid_argument("grid: weights must be finite and >= 0");
    double q = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const int j = static_cast<int>(i / strides[a]) % axes[a].count;
      if (j == 0 || j == axes[a].count - 1) q *= 0.5;
    }
    sum += q * raw[i];
  }
  sum *= vol;
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw std::invalid_argument("grid: cannot normalize all-zero density");
  for (auto& w : raw) w /= sum;
  return ParameterGrid(std::move(axes), std::move(raw));
}

double ParameterGrid::integral() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    sum += shape_->quad[i] * weights_[i];
  return sum * shape_->cell_volume;
}

ParameterGrid ParameterGrid::with_weights(std::vector<double> w) const {
  if (w.size() != weights_.size())
    throw std::invalid_argument("grid: weight array size does not match axes");
  return ParameterGrid(shape_, std::move(w));
}

ParameterGrid make_grid(std::vector<ParameterAxis> axes, const PriorSpec& prior) {
  validate_axes(axes);
  std::size_t n = 1;
  for (const auto& ax : axes) n *= static_cast<std::size_t>(ax.count);

  std::vector<double> w(n, 1.0);
  if (prior.kind == PriorSpec::Kind::Gaussian) {
    if (prior.per_axis.size() != axes.size())
      throw std::invalid_argument("prior: one (mean, std) pair per axis required");
    for (const auto& g : prior.per_axis)
      if (!(g.std > 0.0))
        throw std::invalid_argument("prior: Gaussian std must be > 0");

    std::vector<std::size_t> strides(axes.size(), 1);
    for (int a = static_cast<int>(axes.size()) - 2; a >= 0; --a)
      strides[a] = strides[a + 1] * static_cast<std::size_t>(axes[a + 1].count);

    for (std::size_t i = 0; i < n; ++i) {
      double lw = 0.0;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const int j = static_cast<int>(i / strides[a]) % axes[a].count;
        const double x = axes[a].node(j);
        const double z = (x - prior.per_axis[a].mean) / prior.per_axis[a].std;
        lw += -0.5 * z * z;
      }
      w[i] = std::exp(lw);
    }
  }
  return ParameterGrid::from_unnormalized(std::move(axes), std::move(w));
}

namespace {

// Evidence and the unnormalized posterior in one pass.
double evidence_and_posterior(const ParameterGrid& grid, const MeasurementModel& model,
                              const Design& xi, int y, std::vector<double>* posterior) {
  if (model.param_count() != grid.dim())
    throw std::invalid_argument("model parameter count does not match grid axes");
  if (y != 0 && y != 1) throw std::invalid_argument("outcome y must be 0 or 1");

  const std::size_t n = grid.size();
  const auto q = grid.quad_factors();
  const auto w = grid.weights();
  double theta[3];
  std::span<double> th(theta, static_cast<std::size_t>(grid.dim()));

  double sum = 0.0;
  if (posterior) posterior->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.node(i, th);
    const double p = model.likelihood(th, xi, y);
    const double nw = p * w[i];
    if (posterior) (*posterior)[i] = nw;
    sum += q[i] * nw;
  }
  return sum * grid.cell_volume();
}

}  // namespace

double marginal_evidence(const ParameterGrid& grid, const MeasurementModel& model,
                         const Design& xi, int y) {
  return evidence_and_posterior(grid, model, xi, y, nullptr);
}

ParameterGrid bayes_update(const ParameterGrid& grid, const MeasurementModel& model,
                           const Design& xi, int y) {
  std::vector<double> post;
  const double e = evidence_and_posterior(grid, model, xi, y, &post);
  if (!(e >= kDegenerateEvidence))
    throw DegenerateEvidenceError("bayes_update: marginal evidence below 1e-300", e);
  for (auto& v : post) v /= e;
  return ParameterGrid(grid.shape_, std::move(post));
}

double entropy(const ParameterGrid& grid) {
  const auto q = grid.quad_factors();
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s += q[i] * w[i] * std::log(w[i]);
  return -s * grid.cell_volume();
}

PosteriorSummary summarize(const ParameterGrid& grid) {
  PosteriorSummary out;
  const auto q = grid.quad_factors();
  const auto w = grid.weights();

  for (int a = 0; a < grid.dim(); ++a) {
    const ParameterAxis& ax = grid.axes()[a];
    // marginal node masses: everything but axis `a` integrated out
    std::vector<double> mass(static_cast<std::size_t>(ax.count), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
      mass[static_cast<std::size_t>(grid.axis_index(i, a))] +=
          q[i] * w[i] * grid.cell_volume();

    double mean = 0.0;
    for (int j = 0; j < ax.count; ++j) mean += mass[j] * ax.node(j);
    double var = 0.0;
    for (int j = 0; j < ax.count; ++j) {
      const double d = ax.node(j) - mean;
      var += mass[j] * d * d;
    }

    // quantiles from the piecewise-linear CDF anchored at node positions,
    // with each node's mass centered on it
    auto quantile = [&](double p) {
      double cum = 0.0;  // CDF at node j: cum + mass[j]/2
      double prev_f = mass[0] * 0.5;
      if (p <= prev_f) return ax.node(0);
      cum = mass[0];
      for (int j = 1; j < ax.count; ++j) {
        const double f = cum + mass[j] * 0.5;
        if (p <= f) {
          const double t = (f > prev_f) ? (p - prev_f) / (f - prev_f) : 0.0;
          return ax.node(j - 1) + t * ax.step();
        }
        prev_f = f;
        cum += mass[j];
      }
      return ax.node(ax.count - 1);
    };

    AxisSummary s;
    s.name = ax.name;
    s.mean = mean;
    s.std = std::sqrt(std::max(0.0, var));
    s.ci_lo = quantile(0.025);
    s.ci_hi = quantile(0.975);
    out.axes.push_back(std::move(s));
  }
  return out;
}

nlohmann::json grid_to_json(const ParameterGrid& grid) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& ax : grid.axes())
    axes.push_back({{"name", ax.name}, {"lo", ax.lo}, {"hi", ax.hi}, {"count", ax.count}});
  return {{"axes", axes},
          {"weights", std::vector<double>(grid.weights().begin(), grid.weights().end())}};
}

ParameterGrid grid_from_json(const nlohmann::json& j) {
  std::vector<ParameterAxis> axes;
  for (const auto& ja : j.at("axes"))
    axes.push_back({ja.at("name").get<std::string>(), ja.at("lo").get<double>(),
                    ja.at("hi").get<double>(), ja.at("count").get<int>()});
  return ParameterGrid(std::move(axes), j.at("weights").get<std::vector<double>>());
}

}  // namespace ionscope
