#ifndef IONSCOPE_CONFIG_HPP
#define IONSCOPE_CONFIG_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "ionscope/design.hpp"
#include "ionscope/grid.hpp"
#include "ionscope/imaging.hpp"
#include "ionscope/models.hpp"
#include "ionscope/source.hpp"

namespace ionscope {

enum class RunMode { ProfileEdge, LocateHole, Raster, Snr, Fit };

RunMode mode_from_string(const std::string& s);
std::string mode_to_string(RunMode m);

struct Violation {
  std::string path;     // dotted field path, e.g. "prior.axes[0].count"
  std::string message;
};

// Full schema and cross-field validation; returns every violation found.
std::vector<Violation> validate_config(const nlohmann::json& cfg);

// Applies `--set dotted.path=value` overrides in order. Values parse as JSON
// when possible, else as strings; numeric path segments index arrays.
void apply_overrides(nlohmann::json& cfg, const std::vector<std::string>& sets);

// Typed extraction; call only on a validated config.
std::vector<ParameterAxis> axes_from_json(const nlohmann::json& prior);
PriorSpec prior_from_json(const nlohmann::json& prior);
DesignWindow window_from_json(const nlohmann::json& design);
StopRule stop_from_json(const nlohmann::json& stop);
SourceSpec source_from_json(const nlohmann::json& j);
DetectorSpec detector_from_json(const nlohmann::json& j);
BeamSpec beam_from_json(const nlohmann::json& j);
Mask mask_from_json(const nlohmann::json& j);
ScanConfig scan_from_json(const nlohmann::json& j);

}  // namespace ionscope

#endif  // IONSCOPE_CONFIG_HPP
