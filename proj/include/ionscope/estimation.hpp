#ifndef IONSCOPE_ESTIMATION_HPP
#define IONSCOPE_ESTIMATION_HPP

#include <array>
#include <span>
#include <vector>

#include "ionscope/grid.hpp"
#include "ionscope/model_base.hpp"

namespace ionscope {

struct Observation {
  Design xi;
  int y = 0;
};

using Dataset = std::vector<Observation>;

struct FitResult {
  std::vector<double> theta;
  std::vector<double> std_errors;   // from the inverse observed information
  bool std_errors_ok = false;       // false if the information matrix is singular
  double log_likelihood = 0.0;
  bool converged = false;
  std::vector<bool> at_bound;       // parameter pinned at a bound
  int evaluations = 0;
};

using Bounds = std::vector<std::array<double, 2>>;

// sum_i ln p(y_i | theta, xi_i); -inf if any observation has zero probability.
double log_likelihood(const Dataset& data, const MeasurementModel& model,
                      std::span<const double> theta);

// Maximum-likelihood fit by Nelder-Mead restarted from theta0 and five
// deterministic perturbations of it; standard errors from the inverse
// observed information (central finite differences, step 1e-4 x the bound
// width per parameter).
FitResult mle_fit(const Dataset& data, const MeasurementModel& model,
                  std::span<const double> theta0, const Bounds& bounds);

// Exact posterior from a whole recorded dataset in one step; likelihood
// products are accumulated in log space so long datasets cannot underflow.
ParameterGrid batch_posterior(const ParameterGrid& prior, const MeasurementModel& model,
                              const Dataset& data);

}  // namespace ionscope

#endif  // IONSCOPE_ESTIMATION_HPP
