#include "ionscope/config.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace ionscope {

RunMode mode_from_string(const std::string& s) {
  if (s == "profile-edge") return RunMode::ProfileEdge;
  if (s == "locate-hole") return RunMode::LocateHole;
  if (s == "raster") return RunMode::Raster;
  if (s == "snr") return RunMode::Snr;
  if (s == "fit") return RunMode::Fit;
  throw std::invalid_argument("unknown mode: " + s);
}

std::string mode_to_string(RunMode m) {
  switch (m) {
    case RunMode::ProfileEdge: return "profile-edge";
    case RunMode::LocateHole: return "locate-hole";
    case RunMode::Raster: return "raster";
    case RunMode::Snr: return "snr";
    case RunMode::Fit: return "fit";
  }
  return "?";
}

namespace {

using nlohmann::json;

class Checker {
 public:
  explicit Checker(std::vector<Violation>& out) : out_(out) {}

  void fail(const std::string& path, const std::string& msg) { out_.push_back({path, msg}); }

  const json* object(const json& j, const std::string& path, const std::string& key,
                     bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(join(path, key), "required field is missing");
      return nullptr;
    }
    if (!j.at(key).is_object()) {
      fail(join(path, key), "must be an object");
      return nullptr;
    }
    return &j.at(key);
  }

  const json* array(const json& j, const std::string& path, const std::string& key,
                    bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(join(path, key), "required field is missing");
      return nullptr;
    }
    if (!j.at(key).is_array()) {
      fail(join(path, key), "must be an array");
      return nullptr;
    }
    return &j.at(key);
  }

  bool number(const json& j, const std::string& path, const std::string& key, double* out,
              bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(join(path, key), "required field is missing");
      return false;
    }
    if (!j.at(key).is_number()) {
      fail(join(path, key), "must be a number");
      return false;
    }
    if (out) *out = j.at(key).get<double>();
    return true;
  }

  bool integer(const json& j, const std::string& path, const std::string& key, long long* out,
               bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(join(path, key), "required field is missing");
      return false;
    }
    if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned()) {
      fail(join(path, key), "must be an integer");
      return false;
    }
    if (out) *out = j.at(key).get<long long>();
    return true;
  }

  bool string(const json& j, const std::string& path, const std::string& key, std::string* out,
              bool required = true) {
    if (!j.contains(key)) {
      if (required) fail(join(path, key), "required field is missing");
      return false;
    }
    if (!j.at(key).is_string()) {
      fail(join(path, key), "must be a string");
      return false;
    }
    if (out) *out = j.at(key).get<std::string>();
    return true;
  }

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

 private:
  std::vector<Violation>& out_;
};

void check_axes(Checker& c, const json& prior, const std::string& base,
                std::vector<json>* axes_out) {
  const json* axes = c.array(prior, base, "axes");
  if (!axes) return;
  if (axes->empty() || axes->size() > 3)
    c.fail(base + ".axes", "1 to 3 axes required");
  int idx = 0;
  for (const auto& ax : *axes) {
    const std::string p = base + ".axes[" + std::to_string(idx++) + "]";
    if (!ax.is_object()) {
      c.fail(p, "must be an object");
      continue;
    }
    c.string(ax, p, "name", nullptr);
    double lo = 0, hi = 0;
    const bool has_lo = c.number(ax, p, "lo", &lo);
    const bool has_hi = c.number(ax, p, "hi", &hi);
    if (has_lo && has_hi && !(hi > lo)) c.fail(p, "hi must exceed lo");
    long long count = 0;
    if (c.integer(ax, p, "count", &count) && count < 2) c.fail(p + ".count", "count must be >= 2");
    if (axes_out) axes_out->push_back(ax);
  }
}

void check_prior(Checker& c, const json& cfg, std::vector<json>* axes_out) {
  const json* prior = c.object(cfg, "", "prior");
  if (!prior) return;
  check_axes(c, *prior, "prior", axes_out);
  std::string kind;
  if (c.string(*prior, "prior", "kind", &kind)) {
    if (kind != "uniform" && kind != "gaussian")
      c.fail("prior.kind", "must be 'uniform' or 'gaussian'");
    if (kind == "gaussian") {
      const json* g = c.array(*prior, "prior", "gaussian");
      if (g) {
        if (prior->contains("axes") && prior->at("axes").is_array() &&
            g->size() != prior->at("axes").size())
          c.fail("prior.gaussian", "needs one {mean, std} entry per axis");
        int idx = 0;
        for (const auto& e : *g) {
          const std::string p = "prior.gaussian[" + std::to_string(idx++) + "]";
          if (!e.is_object()) {
            c.fail(p, "must be an object");
            continue;
          }
          c.number(e, p, "mean", nullptr);
          double sd = 0;
          if (c.number(e, p, "std", &sd) && !(sd > 0.0)) c.fail(p + ".std", "must be > 0");
        }
      }
    }
  }
}

void check_design(Checker& c, const json& cfg, std::size_t expect_dims,
                  const std::vector<json>& axes) {
  const json* d = c.object(cfg, "", "design");
  if (!d) return;
  const json* w = c.array(*d, "design", "window");
  if (w) {
    if (w->size() != expect_dims)
      c.fail("design.window", "expected " + std::to_string(expect_dims) + " interval(s)");
    int idx = 0;
    for (const auto& iv : *w) {
      const std::string p = "design.window[" + std::to_string(idx) + "]";
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
        c.fail(p, "must be [lo, hi]");
      } else {
        const double lo = iv[0].get<double>(), hi = iv[1].get<double>();
        if (!(hi > lo)) c.fail(p, "hi must exceed lo");
        // cross-field: the probe window must stay inside the position prior
        if (idx < static_cast<int>(axes.size()) && axes[idx].is_object() &&
            axes[idx].contains("lo") && axes[idx].contains("hi") &&
            axes[idx]["lo"].is_number() && axes[idx]["hi"].is_number()) {
          const double alo = axes[idx]["lo"].get<double>();
          const double ahi = axes[idx]["hi"].get<double>();
          if (lo < alo || hi > ahi)
            c.fail(p, "window must lie inside the position prior support [" +
                           std::to_string(alo) + ", " + std::to_string(ahi) + "]");
        }
      }
      ++idx;
    }
  }
  long long k = 0;
  if (c.integer(*d, "design", "candidates", &k, false) && k < 3)
    c.fail("design.candidates", "must be >= 3");
  long long lv = 0;
  if (c.integer(*d, "design", "levels", &lv, false) && lv < 1)
    c.fail("design.levels", "must be >= 1");
  long long th = 0;
  if (c.integer(*d, "design", "threads", &th, false) && th < 1)
    c.fail("design.threads", "must be >= 1");
}

void check_stop(Checker& c, const json& cfg, const std::vector<json>& axes) {
  const json* s = c.object(cfg, "", "stop");
  if (!s) return;
  long long mp = 0;
  if (c.integer(*s, "stop", "max_probes", &mp) && mp < 1)
    c.fail("stop.max_probes", "must be >= 1");
  if (s->contains("target_std")) {
    if (!s->at("target_std").is_object()) {
      c.fail("stop.target_std", "must be an object of axis-name: threshold");
    } else {
      for (const auto& [name, v] : s->at("target_std").items()) {
        const std::string p = "stop.target_std." + name;
        if (!v.is_number() || !(v.get<double>() > 0.0)) c.fail(p, "must be a number > 0");
        bool known = false;
        for (const auto& ax : axes)
          if (ax.is_object() && ax.value("name", "") == name) known = true;
        if (!known) c.fail(p, "does not name a prior axis");
      }
    }
  }
}

void check_source(Checker& c, const json& cfg, bool required) {
  const json* s = c.object(cfg, "", "source", required);
  if (!s) return;
  std::string kind;
  if (c.string(*s, "source", "kind", &kind)) {
    if (kind == "deterministic") {
      long long n = 0;
      if (c.integer(*s, "source", "n", &n) && n < 1) c.fail("source.n", "must be >= 1");
    } else if (kind == "poissonian") {
      double lam = 0;
      if (c.number(*s, "source", "lambda", &lam) && !(lam > 0.0))
        c.fail("source.lambda", "must be > 0");
    } else {
      c.fail("source.kind", "must be 'deterministic' or 'poissonian'");
    }
  }
}

void check_detector(Checker& c, const json& cfg, bool required) {
  const json* d = c.object(cfg, "", "detector", required);
  if (!d) return;
  double a = 0;
  if (c.number(*d, "detector", "efficiency", &a) && !(a >= 0.0 && a <= 1.0))
    c.fail("detector.efficiency", "must be in [0,1]");
  double dark = 0;
  if (c.number(*d, "detector", "dark_prob", &dark, false) && !(dark >= 0.0 && dark < 1.0))
    c.fail("detector.dark_prob", "must be in [0,1)");
}

void check_seed(Checker& c, const json& cfg) {
  if (!cfg.contains("seed")) {
    c.fail("seed", "required for stochastic modes");
    return;
  }
  if (!cfg.at("seed").is_number_unsigned() && !cfg.at("seed").is_number_integer())
    c.fail("seed", "must be a non-negative integer");
  else if (cfg.at("seed").is_number_integer() && cfg.at("seed").get<long long>() < 0)
    c.fail("seed", "must be a non-negative integer");
}

void check_mask(Checker& c, const json& cfg) {
  const json* m = c.object(cfg, "", "mask");
  if (!m) return;
  std::string kind;
  if (!c.string(*m, "mask", "kind", &kind)) return;
  if (kind == "edge") {
    c.number(*m, "mask", "x0", nullptr);
  } else if (kind == "disc") {
    c.number(*m, "mask", "cx", nullptr);
    c.number(*m, "mask", "cy", nullptr);
    double r = 0;
    if (c.number(*m, "mask", "radius", &r) && !(r > 0.0)) c.fail("mask.radius", "must be > 0");
  } else if (kind == "rect") {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    const bool hx0 = c.number(*m, "mask", "x0", &x0);
    const bool hx1 = c.number(*m, "mask", "x1", &x1);
    const bool hy0 = c.number(*m, "mask", "y0", &y0);
    const bool hy1 = c.number(*m, "mask", "y1", &y1);
    if (hx0 && hx1 && !(x1 > x0)) c.fail("mask.x1", "must exceed x0");
    if (hy0 && hy1 && !(y1 > y0)) c.fail("mask.y1", "must exceed y0");
  } else if (kind == "bitmap") {
    long long w = 0, h = 0;
    if (c.integer(*m, "mask", "width", &w) && w < 1) c.fail("mask.width", "must be >= 1");
    if (c.integer(*m, "mask", "height", &h) && h < 1) c.fail("mask.height", "must be >= 1");
    double pitch = 0;
    if (c.number(*m, "mask", "pitch", &pitch) && !(pitch > 0.0))
      c.fail("mask.pitch", "must be > 0");
    const json* lv = c.array(*m, "mask", "levels");
    if (lv && w >= 1 && h >= 1 &&
        lv->size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
      c.fail("mask.levels", "must hold width*height values");
    double ml = 0;
    if (c.number(*m, "mask", "max_level", &ml) && !(ml > 0.0))
      c.fail("mask.max_level", "must be > 0");
  } else {
    c.fail("mask.kind", "must be one of edge, disc, rect, bitmap");
  }
}

void check_scan(Checker& c, const json& cfg) {
  const json* s = c.object(cfg, "", "scan");
  if (!s) return;
  const json* origin = c.array(*s, "scan", "origin");
  if (origin && origin->size() != 2) c.fail("scan.origin", "must be [x, y]");
  const json* pixel = c.array(*s, "scan", "pixel");
  if (pixel) {
    if (pixel->size() != 2)
      c.fail("scan.pixel", "must be [dx, dy]");
    else if (!(*pixel)[0].is_number() || !(*pixel)[1].is_number() ||
             !((*pixel)[0].get<double>() > 0.0) || !((*pixel)[1].get<double>() > 0.0))
      c.fail("scan.pixel", "pixel sizes must be > 0");
  }
  const json* shape = c.array(*s, "scan", "shape");
  if (shape) {
    if (shape->size() != 2)
      c.fail("scan.shape", "must be [nx, ny]");
    else if (!(*shape)[0].is_number_integer() || !(*shape)[1].is_number_integer() ||
             (*shape)[0].get<long long>() < 1 || (*shape)[1].get<long long>() < 1)
      c.fail("scan.shape", "pixel counts must be >= 1");
  }
  long long ipp = 0;
  if (c.integer(*s, "scan", "ions_per_pixel", &ipp, false) && ipp < 1)
    c.fail("scan.ions_per_pixel", "must be >= 1");
  double bs = 0;
  if (c.number(*s, "scan", "beam_sigma", &bs, false) && bs < 0.0)
    c.fail("scan.beam_sigma", "must be >= 0");
  long long mc = 0;
  if (c.integer(*s, "scan", "mc_offsets", &mc, false) && mc < 1)
    c.fail("scan.mc_offsets", "must be >= 1");
}

}  // namespace

std::vector<Violation> validate_config(const nlohmann::json& cfg) {
  std::vector<Violation> out;
  Checker c(out);

  if (!cfg.is_object()) {
    c.fail("", "config must be a JSON object");
    return out;
  }

  std::string mode_s;
  if (!c.string(cfg, "", "mode", &mode_s)) return out;
  RunMode mode;
  try {
    mode = mode_from_string(mode_s);
  } catch (const std::exception&) {
    c.fail("mode", "must be one of profile-edge, locate-hole, raster, snr, fit");
    return out;
  }

  if (cfg.contains("output_dir") && !cfg.at("output_dir").is_string())
    c.fail("output_dir", "must be a string");

  switch (mode) {
    case RunMode::ProfileEdge: {
      check_seed(c, cfg);
      const json* t = c.object(cfg, "", "truth");
      if (t) {
        c.number(*t, "truth", "x0", nullptr);
        double sg = 0;
        if (c.number(*t, "truth", "sigma", &sg) && !(sg > 0.0))
          c.fail("truth.sigma", "must be > 0");
      }
      std::vector<json> axes;
      check_prior(c, cfg, &axes);
      if (axes.size() == 3) {
        if (axes[1].contains("lo") && axes[1]["lo"].is_number() &&
            !(axes[1]["lo"].get<double>() > 0.0))
          c.fail("prior.axes[1].lo", "sigma axis must be positive");
        if (axes[2].contains("lo") && axes[2].contains("hi") && axes[2]["lo"].is_number() &&
            axes[2]["hi"].is_number() &&
            (axes[2]["lo"].get<double>() < 0.0 || axes[2]["hi"].get<double>() > 1.0))
          c.fail("prior.axes[2]", "efficiency axis must lie in [0,1]");
      } else if (cfg.contains("prior") && cfg.at("prior").is_object() &&
                 cfg.at("prior").contains("axes") && cfg.at("prior").at("axes").is_array()) {
        c.fail("prior.axes", "profile-edge needs axes (x0, sigma, a)");
      }
      check_design(c, cfg, 1, axes);
      check_stop(c, cfg, axes);
      check_source(c, cfg, false);
      check_detector(c, cfg, true);
      break;
    }
    case RunMode::LocateHole: {
      check_seed(c, cfg);
      const json* t = c.object(cfg, "", "truth");
      if (t) {
        c.number(*t, "truth", "cx", nullptr);
        c.number(*t, "truth", "cy", nullptr);
        double r = 0;
        if (c.number(*t, "truth", "radius", &r) && !(r > 0.0))
          c.fail("truth.radius", "must be > 0");
      }
      const json* b = c.object(cfg, "", "beam");
      if (b) {
        double sg = 0;
        if (c.number(*b, "beam", "sigma", &sg) && !(sg > 0.0))
          c.fail("beam.sigma", "must be > 0");
        double a = 0;
        if (c.number(*b, "beam", "a", &a) && !(a >= 0.0 && a <= 1.0))
          c.fail("beam.a", "must be in [0,1]");
      }
      std::vector<json> axes;
      check_prior(c, cfg, &axes);
      if (axes.size() == 3) {
        if (axes[2].contains("lo") && axes[2]["lo"].is_number() &&
            !(axes[2]["lo"].get<double>() > 0.0))
          c.fail("prior.axes[2].lo", "radius axis must be positive");
      } else if (cfg.contains("prior") && cfg.at("prior").is_object() &&
                 cfg.at("prior").contains("axes") && cfg.at("prior").at("axes").is_array()) {
        c.fail("prior.axes", "locate-hole needs axes (cx, cy, R)");
      }
      check_design(c, cfg, 2, axes);
      check_stop(c, cfg, axes);
      check_source(c, cfg, false);
      check_detector(c, cfg, true);
      break;
    }
    case RunMode::Raster: {
      check_seed(c, cfg);
      check_mask(c, cfg);
      check_scan(c, cfg);
      check_source(c, cfg, true);
      check_detector(c, cfg, true);
      if (cfg.contains("image_format")) {
        const auto& f = cfg.at("image_format");
        if (!f.is_string() || (f.get<std::string>() != "csv" && f.get<std::string>() != "pgm"))
          c.fail("image_format", "must be 'csv' or 'pgm'");
      }
      break;
    }
    case RunMode::Snr: {
      const json* s = c.object(cfg, "", "snr");
      if (!s) break;
      std::string kind;
      if (c.string(*s, "snr", "kind", &kind) && kind != "deterministic" &&
          kind != "poissonian")
        c.fail("snr.kind", "must be 'deterministic' or 'poissonian'");
      const json* eff = c.array(*s, "snr", "efficiencies");
      if (eff) {
        if (eff->empty()) c.fail("snr.efficiencies", "must not be empty");
        int idx = 0;
        for (const auto& e : *eff) {
          const std::string p = "snr.efficiencies[" + std::to_string(idx++) + "]";
          if (!e.is_number()) {
            c.fail(p, "must be a number");
            continue;
          }
          const double a = e.get<double>();
          if (kind == "deterministic" && !(a > 0.0 && a < 1.0))
            c.fail(p, "deterministic SNR needs 0 < a < 1");
          if (kind == "poissonian" && !(a > 0.0 && a <= 1.0))
            c.fail(p, "poissonian SNR needs 0 < a <= 1");
        }
      }
      long long nmin = 0, nmax = 0;
      const bool h1 = c.integer(*s, "snr", "n_min", &nmin);
      const bool h2 = c.integer(*s, "snr", "n_max", &nmax);
      if (h1 && nmin < 1) c.fail("snr.n_min", "must be >= 1");
      if (h1 && h2 && nmax < nmin) c.fail("snr.n_max", "must be >= n_min");
      break;
    }
    case RunMode::Fit: {
      const json* f = c.object(cfg, "", "fit");
      if (!f) break;
      std::string input;
      if (c.string(*f, "fit", "input", &input) && input.empty())
        c.fail("fit.input", "must not be empty");
      std::string model;
      if (c.string(*f, "fit", "model", &model) && model != "edge" && model != "hole")
        c.fail("fit.model", "must be 'edge' or 'hole'");
      if (model == "hole") {
        const json* b = c.object(*f, "fit", "beam");
        if (b) {
          double sg = 0;
          if (c.number(*b, "fit.beam", "sigma", &sg) && !(sg > 0.0))
            c.fail("fit.beam.sigma", "must be > 0");
          double a = 0;
          if (c.number(*b, "fit.beam", "a", &a) && !(a >= 0.0 && a <= 1.0))
            c.fail("fit.beam.a", "must be in [0,1]");
        }
      }
      const json* th0 = c.array(*f, "fit", "theta0");
      const json* bd = c.array(*f, "fit", "bounds");
      if (th0 && th0->size() != 3) c.fail("fit.theta0", "must have 3 entries");
      if (bd) {
        if (bd->size() != 3) c.fail("fit.bounds", "must have 3 entries");
        int idx = 0;
        for (const auto& b2 : *bd) {
          const std::string p = "fit.bounds[" + std::to_string(idx) + "]";
          if (!b2.is_array() || b2.size() != 2 || !b2[0].is_number() || !b2[1].is_number())
            c.fail(p, "must be [lo, hi]");
          else if (!(b2[1].get<double>() > b2[0].get<double>()))
            c.fail(p, "hi must exceed lo");
          else if (th0 && idx < static_cast<int>(th0->size()) && (*th0)[idx].is_number()) {
            const double t = (*th0)[idx].get<double>();
            if (t < b2[0].get<double>() || t > b2[1].get<double>())
              c.fail("fit.theta0[" + std::to_string(idx) + "]", "outside fit.bounds");
          }
          ++idx;
        }
      }
      break;
    }
  }
  return out;
}

void apply_overrides(nlohmann::json& cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must look like path.to.field=value: " + s);
    const std::string path = s.substr(0, eq);
    const std::string raw = s.substr(eq + 1);

    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // plain string

    nlohmann::json* node = &cfg;
    std::size_t begin = 0;
    while (begin <= path.size()) {
      const std::size_t dot = path.find('.', begin);
      const std::string key =
          path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
      if (key.empty()) throw std::invalid_argument("bad override path: " + path);
      const bool last = dot == std::string::npos;

      int idx = -1;
      const auto first = key.data();
      const auto end = key.data() + key.size();
      if (auto [p, ec] = std::from_chars(first, end, idx); ec == std::errc() && p == end) {
        if (!node->is_array() || idx < 0 || static_cast<std::size_t>(idx) >= node->size())
          throw std::invalid_argument("override index out of range: " + path);
        node = &(*node)[static_cast<std::size_t>(idx)];
      } else {
        if (!node->is_object()) throw std::invalid_argument("override path not an object: " + path);
        node = &(*node)[key];
      }
      if (last) {
        *node = value;
        break;
      }
      begin = dot + 1;
    }
  }
}

std::vector<ParameterAxis> axes_from_json(const nlohmann::json& prior) {
  std::vector<ParameterAxis> axes;
  for (const auto& a : prior.at("axes"))
    axes.push_back({a.at("name").get<std::string>(), a.at("lo").get<double>(),
                    a.at("hi").get<double>(), a.at("count").get<int>()});
  return axes;
}

PriorSpec prior_from_json(const nlohmann::json& prior) {
  if (prior.at("kind").get<std::string>() == "uniform") return PriorSpec::uniform();
  std::vector<GaussianPrior> g;
  for (const auto& e : prior.at("gaussian"))
    g.push_back({e.at("mean").get<double>(), e.at("std").get<double>()});
  return PriorSpec::gaussian(std::move(g));
}

DesignWindow window_from_json(const nlohmann::json& design) {
  DesignWindow w;
  for (const auto& iv : design.at("window"))
    w.dims.push_back({iv[0].get<double>(), iv[1].get<double>()});
  w.candidates_per_level = design.value("candidates", 21);
  w.levels = design.value("levels", 5);
  w.threads = design.value("threads", 1);
  return w;
}

StopRule stop_from_json(const nlohmann::json& stop) {
  StopRule s;
  s.max_probes = stop.at("max_probes").get<int>();
  if (stop.contains("target_std"))
    for (const auto& [k, v] : stop.at("target_std").items())
      s.target_std[k] = v.get<double>();
  return s;
}

SourceSpec source_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() == "deterministic")
    return SourceSpec::deterministic(j.at("n").get<std::uint64_t>());
  return SourceSpec::poissonian(j.at("lambda").get<double>());
}

DetectorSpec detector_from_json(const nlohmann::json& j) {
  return {j.at("efficiency").get<double>(), j.value("dark_prob", 0.0)};
}

BeamSpec beam_from_json(const nlohmann::json& j) {
  return {j.at("sigma").get<double>(), j.at("a").get<double>()};
}

Mask mask_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "edge") return EdgeMask{j.at("x0").get<double>()};
  if (kind == "disc")
    return DiscMask{j.at("cx").get<double>(), j.at("cy").get<double>(),
                    j.at("radius").get<double>()};
  if (kind == "rect")
    return RectMask{j.at("x0").get<double>(), j.at("y0").get<double>(),
                    j.at("x1").get<double>(), j.at("y1").get<double>()};
  BitmapMask b;
  b.width = j.at("width").get<int>();
  b.height = j.at("height").get<int>();
  b.pitch = j.at("pitch").get<double>();
  b.levels = j.at("levels").get<std::vector<double>>();
  b.max_level = j.at("max_level").get<double>();
  return b;
}

ScanConfig scan_from_json(const nlohmann::json& j) {
  ScanConfig s;
  s.origin_x = j.at("origin")[0].get<double>();
  s.origin_y = j.at("origin")[1].get<double>();
  s.dx = j.at("pixel")[0].get<double>();
  s.dy = j.at("pixel")[1].get<double>();
  s.nx = j.at("shape")[0].get<int>();
  s.ny = j.at("shape")[1].get<int>();
  s.ions_per_pixel = j.value("ions_per_pixel", 1);
  s.beam_sigma = j.value("beam_sigma", 0.0);
  s.mc_offsets = j.value("mc_offsets", 64);
  return s;
}

}  // namespace ionscope
