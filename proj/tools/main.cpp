#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ionscope/config.hpp"
#include "ionscope/design.hpp"
#include "ionscope/estimation.hpp"
#include "ionscope/grid.hpp"
#include "ionscope/imaging.hpp"
#include "ionscope/models.hpp"
#include "ionscope/source.hpp"

namespace {

using nlohmann::json;
using namespace ionscope;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;  // overrides config/output_dir and IONSCOPE_OUTDIR
};

json load_config(const CommonArgs& args, const std::string& mode) {
  std::ifstream is(args.config_path);
  if (!is) throw std::invalid_argument("cannot read config file: " + args.config_path);
  json cfg = json::parse(is);  // throws with a position on malformed JSON
  cfg["mode"] = mode;
  apply_overrides(cfg, args.sets);
  return cfg;
}

int config_error(const std::vector<Violation>& violations) {
  json items = json::array();
  for (const auto& v : violations) items.push_back({{"path", v.path}, {"message", v.message}});
  json err = {{"error", {{"kind", "config"}, {"violations", items}}}};
  std::cerr << err.dump() << '\n';
  return kExitConfig;
}

std::filesystem::path resolve_out_dir(const json& cfg, const CommonArgs& args) {
  std::string dir;
  if (!args.out_dir.empty())
    dir = args.out_dir;
  else if (cfg.contains("output_dir"))
    dir = cfg.at("output_dir").get<std::string>();
  else if (const char* env = std::getenv("IONSCOPE_OUTDIR"))
    dir = env;
  else
    dir = ".";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << text;
  if (!os.good()) throw std::runtime_error("write failed: " + path.string());
}

json summary_json(const json& cfg, const PosteriorSummary& s, std::size_t probes) {
  json per_axis = json::array();
  for (const auto& ax : s.axes)
    per_axis.push_back({{"name", ax.name},
                        {"mean", ax.mean},
                        {"std", ax.std},
                        {"ci95", {ax.ci_lo, ax.ci_hi}}});
  return {{"mode", cfg.at("mode")},
          {"seed", cfg.at("seed")},
          {"probes", probes},
          {"posterior", per_axis},
          {"credible_interval_method", "linear CDF interpolation, central 95%"}};
}

int run_adaptive(const json& cfg, const CommonArgs& args, bool hole) {
  const auto axes = axes_from_json(cfg.at("prior"));
  const ParameterGrid prior = make_grid(axes, prior_from_json(cfg.at("prior")));
  const DesignWindow window = window_from_json(cfg.at("design"));
  const StopRule stop = stop_from_json(cfg.at("stop"));
  const DetectorSpec det = detector_from_json(cfg.at("detector"));
  const SourceSpec source = cfg.contains("source") ? source_from_json(cfg.at("source"))
                                                   : SourceSpec::deterministic(1);
  const auto seed = cfg.at("seed").get<std::uint64_t>();

  std::unique_ptr<MeasurementModel> model;
  TruthFn truth;
  if (hole) {
    const BeamSpec beam = beam_from_json(cfg.at("beam"));
    const auto& t = cfg.at("truth");
    const HoleParams tp{t.at("cx").get<double>(), t.at("cy").get<double>(),
                        t.at("radius").get<double>()};
    model = std::make_unique<HoleModel>(beam);
    truth = [tp, beam, source, det](const Design& xi, Rng& rng) {
      const double d = std::hypot(xi.x() - tp.cx, xi.y() - tp.cy);
      const double p_t = disc_containment(d, tp.radius, beam.sigma);
      return sample_probe(source, det, p_t, rng).y;
    };
  } else {
    const auto& t = cfg.at("truth");
    const EdgeParams tp{t.at("x0").get<double>(), t.at("sigma").get<double>(), 1.0};
    model = std::make_unique<EdgeModel>();
    truth = [tp, source, det](const Design& xi, Rng& rng) {
      const double p_t = edge_likelihood(tp, xi.x(), 1);  // geometric part, a = 1
      return sample_probe(source, det, p_t, rng).y;
    };
  }

  auto [posterior, log] = run_experiment(prior, *model, window, stop, truth, seed,
                                         json{{"config", cfg}});

  const auto dir = resolve_out_dir(cfg, args);
  write_text(dir / "runlog.jsonl", log.to_jsonl());
  write_text(dir / "posterior.json", grid_to_json(posterior).dump());
  write_text(dir / "summary.json",
             summary_json(cfg, summarize(posterior), log.records.size()).dump(2) + "\n");
  return kExitOk;
}

int run_raster(const json& cfg, const CommonArgs& args) {
  const Mask mask = mask_from_json(cfg.at("mask"));
  const ScanConfig scan = scan_from_json(cfg.at("scan"));
  const SourceSpec source = source_from_json(cfg.at("source"));
  const DetectorSpec det = detector_from_json(cfg.at("detector"));
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const std::string fmt_s = cfg.value("image_format", "pgm");
  const ImageFormat fmt = fmt_s == "csv" ? ImageFormat::CSV : ImageFormat::PGM;

  const auto t0 = std::chrono::steady_clock::now();
  const Image img = raster_scan(mask, scan, source, det, Rng(seed));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto dir = resolve_out_dir(cfg, args);
  const std::string name = fmt == ImageFormat::CSV ? "image.csv" : "image.pgm";
  write_image_file(img, fmt, (dir / name).string());
  const json meta = {{"config", cfg}, {"seed", seed}, {"wall_time_s", wall}};
  write_text(dir / "image_meta.json", meta.dump(2) + "\n");
  return kExitOk;
}

int run_snr(const json& cfg, const CommonArgs& args) {
  const auto& s = cfg.at("snr");
  const auto kind = s.at("kind").get<std::string>() == "deterministic"
                        ? SourceSpec::Kind::Deterministic
                        : SourceSpec::Kind::Poissonian;
  const auto rows = snr_curve(kind, s.at("efficiencies").get<std::vector<double>>(),
                              s.at("n_min").get<std::uint64_t>(),
                              s.at("n_max").get<std::uint64_t>());
  std::ostringstream csv;
  csv << "n,a,source_kind,snr,snr_compactified\n";
  csv.precision(17);
  for (const auto& r : rows)
    csv << r.n << ',' << r.a << ',' << r.source_kind << ',' << r.snr << ','
        << r.snr_compactified << '\n';
  write_text(resolve_out_dir(cfg, args) / "snr.csv", csv.str());
  return kExitOk;
}

int run_fit(const json& cfg, const CommonArgs& args) {
  const auto& f = cfg.at("fit");
  std::ifstream is(f.at("input").get<std::string>());
  if (!is) throw std::runtime_error("cannot read runlog: " + f.at("input").get<std::string>());

  Dataset data;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("xi") || !j.contains("y")) continue;
    const auto xi = j.at("xi").get<std::vector<double>>();
    data.push_back({xi.size() == 1 ? Design::scalar(xi[0]) : Design::point(xi[0], xi[1]),
                    j.at("y").get<int>()});
  }
  if (data.empty()) throw std::runtime_error("runlog contains no probe records");

  std::unique_ptr<MeasurementModel> model;
  if (f.at("model").get<std::string>() == "edge")
    model = std::make_unique<EdgeModel>();
  else
    model = std::make_unique<HoleModel>(beam_from_json(f.at("beam")));

  const auto theta0 = f.at("theta0").get<std::vector<double>>();
  Bounds bounds;
  for (const auto& b : f.at("bounds"))
    bounds.push_back({b[0].get<double>(), b[1].get<double>()});

  const FitResult r = mle_fit(data, *model, theta0, bounds);
  json out = {{"theta", r.theta},
              {"std_errors", r.std_errors_ok ? json(r.std_errors) : json(nullptr)},
              {"std_errors_ok", r.std_errors_ok},
              {"log_likelihood", r.log_likelihood},
              {"converged", r.converged},
              {"at_bound", r.at_bound},
              {"evaluations", r.evaluations},
              {"observations", data.size()}};
  write_text(resolve_out_dir(cfg, args) / "fit.json", out.dump(2) + "\n");
  return kExitOk;
}

int run_mode(const std::string& mode, const CommonArgs& args) {
  json cfg;
  try {
    cfg = load_config(args, mode);
  } catch (const std::exception& e) {
    return config_error({{"config", e.what()}});
  }
  const auto violations = validate_config(cfg);
  if (!violations.empty()) return config_error(violations);

  try {
    if (mode == "profile-edge") return run_adaptive(cfg, args, false);
    if (mode == "locate-hole") return run_adaptive(cfg, args, true);
    if (mode == "raster") return run_raster(cfg, args);
    if (mode == "snr") return run_snr(cfg, args);
    return run_fit(cfg, args);
  } catch (const std::exception& e) {
    json err = {{"error", {{"kind", "runtime"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return kExitRuntime;
  }
}

int run_validate(const CommonArgs& args) {
  json cfg;
  try {
    std::ifstream is(args.config_path);
    if (!is) throw std::invalid_argument("cannot read config file: " + args.config_path);
    cfg = json::parse(is);
    apply_overrides(cfg, args.sets);
  } catch (const std::exception& e) {
    std::cout << json{{"valid", false},
                      {"violations", json::array({{{"path", "config"}, {"message", e.what()}}})}}
                     .dump(2)
              << '\n';
    return kExitConfig;
  }
  const auto violations = validate_config(cfg);
  json items = json::array();
  for (const auto& v : violations) items.push_back({{"path", v.path}, {"message", v.message}});
  std::cout << json{{"valid", violations.empty()}, {"violations", items}}.dump(2) << '\n';
  return violations.empty() ? kExitOk : kExitConfig;
}

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "JSON run configuration")->required();
  sub->add_option("--set", args.sets,
                  "override a config field by dotted path, e.g. --set design.levels=5");
  sub->add_option("-o,--out", args.out_dir,
                  "output directory (default: config output_dir, then $IONSCOPE_OUTDIR, then .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ionscope: single-ion transmission microscopy simulator with "
               "Bayes-optimal probing"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* profile = app.add_subcommand(
      "profile-edge",
      "Adaptive knife-edge beam profiling.\nConfig fields: seed, output_dir, "
      "truth{x0,sigma}, prior{axes[name,lo,hi,count],kind,gaussian[mean,std]}, "
      "design{window,candidates,levels,threads}, stop{max_probes,target_std}, "
      "source{kind,n,lambda}, detector{efficiency,dark_prob}");
  auto* hole = app.add_subcommand(
      "locate-hole",
      "Adaptive localization of a circular hole.\nConfig fields: seed, output_dir, "
      "truth{cx,cy,radius}, beam{sigma,a}, prior{axes[name,lo,hi,count],kind,gaussian}, "
      "design{window,candidates,levels,threads}, stop{max_probes,target_std}, "
      "source{kind,n,lambda}, detector{efficiency,dark_prob}");
  auto* raster = app.add_subcommand(
      "raster",
      "Raster-scan transmission image of a mask.\nConfig fields: seed, output_dir, "
      "mask{kind,...}, scan{origin,pixel,shape,ions_per_pixel,beam_sigma,mc_offsets}, "
      "source{kind,n,lambda}, detector{efficiency,dark_prob}, image_format");
  auto* snr = app.add_subcommand(
      "snr",
      "Analytic SNR curves as CSV.\nConfig fields: output_dir, "
      "snr{kind,efficiencies,n_min,n_max}");
  auto* fit = app.add_subcommand(
      "fit",
      "Maximum-likelihood fit of a recorded run log.\nConfig fields: output_dir, "
      "fit{input,model,theta0,bounds,beam{sigma,a}}");
  auto* validate = app.add_subcommand(
      "validate", "Validate a config file without executing; reports all violations.");

  for (auto* sub : {profile, hole, raster, snr, fit, validate}) add_common(sub, args);

  CLI11_PARSE(app, argc, argv);

  if (profile->parsed()) return run_mode("profile-edge", args);
  if (hole->parsed()) return run_mode("locate-hole", args);
  if (raster->parsed()) return run_mode("raster", args);
  if (snr->parsed()) return run_mode("snr", args);
  if (fit->parsed()) return run_mode("fit", args);
  return run_validate(args);
}
