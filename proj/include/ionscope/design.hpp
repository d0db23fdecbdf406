#ifndef IONSCOPE_DESIGN_HPP
#define IONSCOPE_DESIGN_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ionscope/grid.hpp"
#include "ionscope/model_base.hpp"
#include "ionscope/rng.hpp"

namespace ionscope {

// Search region for the next probe: one interval per design dimension,
// K equally spaced candidates per level, recursively refined.
struct DesignWindow {
  std::vector<std::array<double, 2>> dims;  // [lo, hi] per dimension
  int candidates_per_level = 21;
  int levels = 5;
  int threads = 1;  // parallel candidate evaluation; results match threads=1

  static DesignWindow interval(double lo, double hi, int k = 21, int levels = 5);
  static DesignWindow rect(double xlo, double xhi, double ylo, double yhi,
                           int k = 21, int levels = 5);
};

struct StopRule {
  int max_probes = 1;
  // optional per-axis posterior-std targets, keyed by axis name
  std::map<std::string, double> target_std;
};

struct RunRecord {
  int iteration = 0;  // 1-based
  Design xi;
  double utility = 0.0;
  int y = 0;
  std::vector<double> mean;
  std::vector<double> std;
};

struct RunLog {
  nlohmann::json header;  // config echo, seed, stop rule
  std::vector<RunRecord> records;

  // JSON Lines: header first, then one record per probe.
  void write_jsonl(std::ostream& os) const;
  std::string to_jsonl() const;
};

// Per-probe node arrays consumed by UtilityKernel::accumulate.
struct NodeWeights {
  std::vector<double> u;  // quad factor x density
  std::vector<double> v;  // quad factor x density x ln(density)
  double vol = 0.0;
  double w2 = 0.0;  // sum of v

  explicit NodeWeights(const ParameterGrid& grid);
};

// Expected information gain (nats) of probing at xi: the entropy difference
// between prior and posterior, averaged over both outcomes. Outcomes with
// marginal probability below 1e-15 are skipped.
double utility(const ParameterGrid& grid, const MeasurementModel& model, const Design& xi);

// As above but with a prebuilt kernel and per-probe weights; used by the
// optimizer so tables are built once per run.
double utility(const NodeWeights& nw, const UtilityKernel& kernel, const Design& xi);

// Recursive grid search: K candidates per dimension per level, re-centered
// on the incumbent and shrunk to twice the current spacing each level,
// clamped to the original window. Ties break toward the lexicographically
// smallest design. Returns the best candidate and its utility.
std::pair<Design, double> optimize_design(const ParameterGrid& grid,
                                          const MeasurementModel& model,
                                          const DesignWindow& window,
                                          const UtilityKernel* kernel = nullptr);

// Produces the measurement outcome for a probe at xi (hardware or simulation).
using TruthFn = std::function<int(const Design&, Rng&)>;

// The adaptive loop: optimize -> probe -> update, until the stop rule fires.
// Fully reproducible from the seed; the truth callback is the only stochastic
// element. `header` is echoed into the RunLog.
std::pair<ParameterGrid, RunLog> run_experiment(const ParameterGrid& prior,
                                                const MeasurementModel& model,
                                                const DesignWindow& window,
                                                const StopRule& stop,
                                                const TruthFn& truth,
                                                std::uint64_t seed,
                                                nlohmann::json header = {});

}  // namespace ionscope

#endif  // IONSCOPE_DESIGN_HPP
