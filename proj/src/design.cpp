#include "ionscope/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace ionscope {

DesignWindow DesignWindow::interval(double lo, double hi, int k, int levels) {
  DesignWindow w;
  w.dims = {{lo, hi}};
  w.candidates_per_level = k;
  w.levels = levels;
  return w;
}

DesignWindow DesignWindow::rect(double xlo, double xhi, double ylo, double yhi,
                                int k, int levels) {
  DesignWindow w;
  w.dims = {{xlo, xhi}, {ylo, yhi}};
  w.candidates_per_level = k;
  w.levels = levels;
  return w;
}

NodeWeights::NodeWeights(const ParameterGrid& grid)
    : u(grid.size()), v(grid.size()), vol(grid.cell_volume()) {
  const auto q = grid.quad_factors();
  const auto w = grid.weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    u[i] = q[i] * w[i];
    v[i] = w[i] > 0.0 ? u[i] * std::log(w[i]) : 0.0;
  }
  w2 = 0.0;
  for (const double x : v) w2 += x;
}

namespace {

constexpr double kEvidenceFloor = 1e-15;

double utility_from_sums(const UtilitySums& s, const NodeWeights& nw) {
  const double e1 = s.ew1 * nw.vol;
  const double e0 = 1.0 - e1;
  const double h_prior = -nw.vol * nw.w2;

  double util = 0.0;
  bool any = false;
  if (e1 >= kEvidenceFloor) {
    const double h1 = -(nw.vol / e1) * (s.t11 + s.t21) + std::log(e1);
    util += e1 * (h_prior - h1);
    any = true;
  }
  if (e0 >= kEvidenceFloor) {
    const double h0 = -(nw.vol / e0) * (s.t10 + (nw.w2 - s.t21)) + std::log(e0);
    util += e0 * (h_prior - h0);
    any = true;
  }
  if (!any)
    throw DegenerateEvidenceError("utility: both outcomes have vanishing evidence",
                                  std::max(e0, e1));
  return util;
}

struct Candidate {
  Design xi;
  double u = -std::numeric_limits<double>::infinity();
};

std::vector<Design> lattice(const std::vector<std::array<double, 2>>& dims, int k) {
  std::vector<Design> out;
  if (dims.size() == 1) {
    out.reserve(k);
    const double step = (dims[0][1] - dims[0][0]) / (k - 1);
    for (int i = 0; i < k; ++i) out.push_back(Design::scalar(dims[0][0] + i * step));
  } else {
    out.reserve(static_cast<std::size_t>(k) * k);
    const double sx = (dims[0][1] - dims[0][0]) / (k - 1);
    const double sy = (dims[1][1] - dims[1][0]) / (k - 1);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        out.push_back(Design::point(dims[0][0] + i * sx, dims[1][0] + j * sy));
  }
  return out;
}

void evaluate_candidates(const NodeWeights& nw, const UtilityKernel& kernel,
                         const std::vector<Design>& xs, int threads,
                         std::vector<double>& us) {
  us.resize(xs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      us[i] = utility_from_sums(kernel.accumulate(nw.u, nw.v, xs[i]), nw);
  };
  if (threads <= 1 || xs.size() < 2) {
    work(0, xs.size());
    return;
  }
  const std::size_t nt = std::min<std::size_t>(threads, xs.size());
  std::vector<std::thread> pool;
  const std::size_t chunk = (xs.size() + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(xs.size(), b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

double utility(const NodeWeights& nw, const UtilityKernel& kernel, const Design& xi) {
  return utility_from_sums(kernel.accumulate(nw.u, nw.v, xi), nw);
}

double utility(const ParameterGrid& grid, const MeasurementModel& model, const Design& xi) {
  const auto kernel = model.make_utility_kernel(grid);
  const NodeWeights nw(grid);
  return utility(nw, *kernel, xi);
}

std::pair<Design, double> optimize_design(const ParameterGrid& grid,
                                          const MeasurementModel& model,
                                          const DesignWindow& window,
                                          const UtilityKernel* kernel) {
  const std::size_t nd = window.dims.size();
  if (nd < 1 || nd > 2)
    throw std::invalid_argument("optimize_design: window must be 1D or 2D");
  for (const auto& d : window.dims)
    if (!(d[1] > d[0]))
      throw std::invalid_argument("optimize_design: degenerate window interval");
  if (window.candidates_per_level < 3)
    throw std::invalid_argument("optimize_design: need at least 3 candidates per level");
  if (window.levels < 1) throw std::invalid_argument("optimize_design: levels must be >= 1");

  std::unique_ptr<UtilityKernel> own;
  if (!kernel) {
    own = model.make_utility_kernel(grid);
    kernel = own.get();
  }
  const NodeWeights nw(grid);

  const int k = window.candidates_per_level;
  auto dims = window.dims;
  Candidate best;
  bool have_best = false;

  std::vector<double> us;
  for (int level = 0; level < window.levels; ++level) {
    const auto xs = lattice(dims, k);
    evaluate_candidates(nw, *kernel, xs, window.threads, us);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!have_best || us[i] > best.u || (us[i] == best.u && xs[i] < best.xi)) {
        best = {xs[i], us[i]};
        have_best = true;
      }
    }
    // shrink to twice the current spacing around the incumbent
    for (std::size_t d = 0; d < nd; ++d) {
      const double spacing = (dims[d][1] - dims[d][0]) / (k - 1);
      dims[d][0] = std::max(window.dims[d][0], best.xi.coord(static_cast<int>(d)) - spacing);
      dims[d][1] = std::min(window.dims[d][1], best.xi.coord(static_cast<int>(d)) + spacing);
    }
  }
  return {best.xi, best.u};
}

std::pair<ParameterGrid, RunLog> run_experiment(const ParameterGrid& prior,
                                                const MeasurementModel& model,
                                                const DesignWindow& window,
                                                const StopRule& stop,
                                                const TruthFn& truth,
                                                std::uint64_t seed,
                                                nlohmann::json header) {
  if (stop.max_probes < 1)
    throw std::invalid_argument("run_experiment: max_probes must be >= 1");
  for (const auto& [name, thr] : stop.target_std) {
    if (!(thr > 0.0))
      throw std::invalid_argument("run_experiment: target_std must be > 0 (axis '" + name + "')");
    const auto& axes = prior.axes();
    if (std::none_of(axes.begin(), axes.end(),
                     [&](const ParameterAxis& a) { return a.name == name; }))
      throw std::invalid_argument("run_experiment: target_std names unknown axis '" + name + "'");
  }

  RunLog log;
  log.header = std::move(header);
  log.header["seed"] = seed;

  Rng rng(seed);
  ParameterGrid grid = prior;
  const auto kernel = model.make_utility_kernel(prior);

  for (int it = 1; it <= stop.max_probes; ++it) {
    const auto [xi, u] = optimize_design(grid, model, window, kernel.get());
    const int y = truth(xi, rng);
    if (y != 0 && y != 1)
      throw std::invalid_argument("run_experiment: truth callback must return 0 or 1");

    try {
      grid = bayes_update(grid, model, xi, y);
    } catch (const DegenerateEvidenceError& e) {
      throw DegenerateEvidenceError(std::string(e.what()) + " (iteration " +
                                        std::to_string(it) + ")",
                                    e.evidence(), it);
    }

    const PosteriorSummary s = summarize(grid);
    RunRecord rec;
    rec.iteration = it;
    rec.xi = xi;
    rec.utility = u;
    rec.y = y;
    for (const auto& ax : s.axes) {
      rec.mean.push_back(ax.mean);
      rec.std.push_back(ax.std);
    }
    log.records.push_back(std::move(rec));

    if (!stop.target_std.empty()) {
      bool all_reached = true;
      for (const auto& ax : s.axes) {
        const auto it_thr = stop.target_std.find(ax.name);
        if (it_thr != stop.target_std.end() && ax.std > it_thr->second) {
          all_reached = false;
          break;
        }
      }
      if (all_reached) break;
    }
  }
  return {std::move(grid), std::move(log)};
}

void RunLog::write_jsonl(std::ostream& os) const {
  os << header.dump() << '\n';
  for (const auto& r : records) {
    nlohmann::json j;
    j["i"] = r.iteration;
    j["xi"] = std::vector<double>(r.xi.coords().begin(), r.xi.coords().end());
    j["u"] = r.utility;
    j["y"] = r.y;
    j["mean"] = r.mean;
    j["std"] = r.std;
    os << j.dump() << '\n';
  }
}

std::string RunLog::to_jsonl() const {
  std::ostringstream ss;
  write_jsonl(ss);
  return ss.str();
}

}  // namespace ionscope
