#include "ionscope/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ionscope/rng.hpp"

namespace ionscope {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Identical (xi, y) pairs grouped with multiplicities, in a canonical order.
// Makes the log-likelihood exactly permutation invariant and lets repeated
// probe positions (raster-style datasets) evaluate in one term.
struct Bin {
  Design xi;
  int y = 0;
  double count = 0.0;
};

std::vector<Bin> bin_dataset(const Dataset& data) {
  std::map<std::tuple<int, int, double, double>, double> acc;
  for (const auto& obs : data) {
    const double second = obs.xi.dim() > 1 ? obs.xi.y() : 0.0;
    acc[{obs.y, obs.xi.dim(), obs.xi.x(), second}] += 1.0;
  }
  std::vector<Bin> bins;
  bins.reserve(acc.size());
  for (const auto& [key, count] : acc) {
    const auto& [y, dim, x, second] = key;
    bins.push_back({dim > 1 ? Design::point(x, second) : Design::scalar(x), y, count});
  }
  return bins;
}

double binned_log_likelihood(const std::vector<Bin>& bins, const MeasurementModel& model,
                             std::span<const double> theta) {
  double ll = 0.0;
  for (const auto& b : bins) {
    const double p = model.likelihood(theta, b.xi, b.y);
    if (!(p > 0.0)) return kNegInf;
    ll += b.count * std::log(p);
  }
  return ll;
}

bool inside(std::span<const double> th, const Bounds& b) {
  for (std::size_t i = 0; i < th.size(); ++i)
    if (th[i] < b[i][0] || th[i] > b[i][1]) return false;
  return true;
}

// Nelder-Mead on -log_likelihood; returns {best vertex, best value, converged}.
struct SimplexResult {
  std::vector<double> x;
  double f = kNegInf;
  bool converged = false;
  int evals = 0;
};

template <typename F>
SimplexResult nelder_mead(F&& objective, std::span<const double> start, const Bounds& bounds,
                          int max_evals) {
  const std::size_t n = start.size();
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) scale[i] = bounds[i][1] - bounds[i][0];

  // initial simplex: start plus one 5%-of-scale step per dimension
  std::vector<std::vector<double>> verts(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) {
    double step = 0.05 * scale[i];
    if (verts[i + 1][i] + step > bounds[i][1]) step = -step;
    verts[i + 1][i] += step;
  }

  SimplexResult res;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = objective(verts[i]);
    ++res.evals;
  }

  auto order = [&]() {
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j)
        if (fv[j] < fv[i]) {
          std::swap(fv[i], fv[j]);
          std::swap(verts[i], verts[j]);
        }
  };

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (res.evals < max_evals) {
    order();

    bool small = true;
    for (std::size_t i = 1; i <= n && small; ++i)
      for (std::size_t d = 0; d < n; ++d)
        if (std::abs(verts[i][d] - verts[0][d]) > 1e-8 * scale[d]) {
          small = false;
          break;
        }
    if (small) {
      res.converged = true;
      break;
    }

    for (std::size_t d = 0; d < n; ++d) {
      centroid[d] = 0.0;
      for (std::size_t i = 0; i < n; ++i) centroid[d] += verts[i][d];
      centroid[d] /= static_cast<double>(n);
    }

    for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + (centroid[d] - verts[n][d]);
    const double fr = objective(xr);
    ++res.evals;

    if (fr < fv[0]) {
      for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + 2.0 * (centroid[d] - verts[n][d]);
      const double fe = objective(xe);
      ++res.evals;
      if (fe < fr) {
        verts[n] = xe;
        fv[n] = fe;
      } else {
        verts[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      verts[n] = xr;
      fv[n] = fr;
    } else {
      const bool outer = fr < fv[n];
      const auto& ref = outer ? xr : verts[n];
      const double fref = outer ? fr : fv[n];
      for (std::size_t d = 0; d < n; ++d) xc[d] = centroid[d] + 0.5 * (ref[d] - centroid[d]);
      const double fc = objective(xc);
      ++res.evals;
      if (fc < fref) {
        verts[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t d = 0; d < n; ++d)
            verts[i][d] = verts[0][d] + 0.5 * (verts[i][d] - verts[0][d]);
          fv[i] = objective(verts[i]);
          ++res.evals;
        }
      }
    }
  }
  order();
  res.x = verts[0];
  res.f = fv[0];
  return res;
}

}  // namespace

double log_likelihood(const Dataset& data, const MeasurementModel& model,
                      std::span<const double> theta) {
  if (data.empty()) throw std::invalid_argument("log_likelihood: empty dataset");
  double ll = 0.0;
  for (const auto& obs : data) {
    const double p = model.likelihood(theta, obs.xi, obs.y);
    if (!(p > 0.0)) return kNegInf;
    ll += std::log(p);
  }
  return ll;
}

FitResult mle_fit(const Dataset& data, const MeasurementModel& model,
                  std::span<const double> theta0, const Bounds& bounds) {
  const std::size_t n = theta0.size();
  if (bounds.size() != n) throw std::invalid_argument("mle_fit: bounds/theta0 size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(bounds[i][1] > bounds[i][0]))
      throw std::invalid_argument("mle_fit: degenerate bounds");
  if (!inside(theta0, bounds)) throw std::invalid_argument("mle_fit: theta0 outside bounds");
  if (static_cast<int>(n) != model.param_count())
    throw std::invalid_argument("mle_fit: theta0 size does not match model");

  auto objective = [&](std::span<const double> th) -> double {
    if (!inside(th, bounds)) return std::numeric_limits<double>::infinity();
    return -log_likelihood(data, model, th);
  };

  // theta0 plus five deterministic perturbations (fixed pattern, so fits are
  // reproducible without an RNG handle)
  std::vector<std::vector<double>> starts;
  starts.emplace_back(theta0.begin(), theta0.end());
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> st(theta0.begin(), theta0.end());
    for (std::size_t i = 0; i < n; ++i) {
      h = Rng::mix(h, i + 1);
      const double frac = (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5) * 0.2;
      st[i] = std::clamp(st[i] + frac * (bounds[i][1] - bounds[i][0]), bounds[i][0],
                         bounds[i][1]);
    }
    starts.push_back(std::move(st));
  }

  FitResult best;
  best.log_likelihood = kNegInf;
  bool any = false;
  for (const auto& st : starts) {
    const auto r = nelder_mead(objective, st, bounds, 4000);
    const double ll = -r.f;
    if (!any || (r.converged && !best.converged) ||
        (r.converged == best.converged && ll > best.log_likelihood)) {
      best.theta = r.x;
      best.log_likelihood = ll;
      best.converged = r.converged;
      any = true;
    }
    best.evaluations += r.evals;
  }

  best.at_bound.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double tol = 1e-6 * (bounds[i][1] - bounds[i][0]);
    if (best.theta[i] - bounds[i][0] < tol || bounds[i][1] - best.theta[i] < tol)
      best.at_bound[i] = true;
  }

  // observed information from the central-difference Hessian of the
  // log-likelihood at the optimum
  best.std_errors.assign(n, std::numeric_limits<double>::quiet_NaN());
  best.std_errors_ok = false;
  if (best.converged && std::isfinite(best.log_likelihood)) {
    std::vector<double> h_step(n);
    for (std::size_t i = 0; i < n; ++i) h_step[i] = 1e-4 * (bounds[i][1] - bounds[i][0]);

    auto ll_at = [&](std::vector<double> th) -> double {
      for (std::size_t i = 0; i < n; ++i)
        th[i] = std::clamp(th[i], bounds[i][0], bounds[i][1]);
      return log_likelihood(data, model, th);
    };

    std::vector<std::vector<double>> info(n, std::vector<double>(n, 0.0));
    const double f0 = best.log_likelihood;
    bool finite = true;
    for (std::size_t i = 0; i < n && finite; ++i) {
      auto tp = best.theta, tm = best.theta;
      tp[i] += h_step[i];
      tm[i] -= h_step[i];
      const double fp = ll_at(tp), fm = ll_at(tm);
      info[i][i] = -(fp - 2.0 * f0 + fm) / (h_step[i] * h_step[i]);
      finite = std::isfinite(info[i][i]);
      for (std::size_t j = i + 1; j < n && finite; ++j) {
        auto tpp = best.theta, tpm = best.theta, tmp = best.theta, tmm = best.theta;
        tpp[i] += h_step[i];
        tpp[j] += h_step[j];
        tpm[i] += h_step[i];
        tpm[j] -= h_step[j];
        tmp[i] -= h_step[i];
        tmp[j] += h_step[j];
        tmm[i] -= h_step[i];
        tmm[j] -= h_step[j];
        info[i][j] = info[j][i] =
            -(ll_at(tpp) - ll_at(tpm) - ll_at(tmp) + ll_at(tmm)) /
            (4.0 * h_step[i] * h_step[j]);
        finite = std::isfinite(info[i][j]);
      }
    }

    if (finite) {
      // invert by Gauss-Jordan with partial pivoting
      std::vector<std::vector<double>> a = info;
      std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
      bool singular = false;
      for (std::size_t c = 0; c < n && !singular; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
          if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-14) {
          singular = true;
          break;
        }
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        const double d = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
          a[c][k] /= d;
          inv[c][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
          if (r == c) continue;
          const double m = a[r][c];
          for (std::size_t k = 0; k < n; ++k) {
            a[r][k] -= m * a[c][k];
            inv[r][k] -= m * inv[c][k];
          }
        }
      }
      if (!singular) {
        best.std_errors_ok = true;
        for (std::size_t i = 0; i < n; ++i) {
          if (inv[i][i] > 0.0)
            best.std_errors[i] = std::sqrt(inv[i][i]);
          else
            best.std_errors_ok = false;
        }
      }
    }
  }
  return best;
}

ParameterGrid batch_posterior(const ParameterGrid& prior, const MeasurementModel& model,
                              const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("batch_posterior: empty dataset");
  if (model.param_count() != prior.dim())
    throw std::invalid_argument("batch_posterior: model does not match grid");

  const std::size_t n = prior.size();
  std::vector<double> loglik(n, 0.0);
  double theta[3];
  std::span<double> th(theta, static_cast<std::size_t>(prior.dim()));
  for (std::size_t i = 0; i < n; ++i) {
    prior.node(i, th);
    double s = 0.0;
    for (const auto& obs : data) {
      const double p = model.likelihood(th, obs.xi, obs.y);
      if (!(p > 0.0)) {
        s = kNegInf;
        break;
      }
      s += std::log(p);
    }
    loglik[i] = s;
  }

  double lmax = kNegInf;
  const auto w = prior.weights();
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0.0 && loglik[i] > lmax) lmax = loglik[i];
  if (!std::isfinite(lmax))
    throw DegenerateEvidenceError("batch_posterior: dataset impossible under every node", 0.0);

  std::vector<double> post(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0.0 && std::isfinite(loglik[i]))
      post[i] = w[i] * std::exp(loglik[i] - lmax);
  return ParameterGrid::from_unnormalized(
      std::vector<ParameterAxis>(prior.axes()), std::move(post));
}

}  // namespace ionscope
