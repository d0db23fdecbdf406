#include "ionscope/imaging.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ionscope {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double gauss_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

void validate_scan(const ScanConfig& s) {
  if (!(s.dx > 0.0) || !(s.dy > 0.0))
    throw std::invalid_argument("scan: pixel size must be > 0");
  if (s.nx < 1 || s.ny < 1) throw std::invalid_argument("scan: pixel counts must be >= 1");
  if (s.ions_per_pixel < 1)
    throw std::invalid_argument("scan: ions_per_pixel must be >= 1");
  if (s.beam_sigma < 0.0) throw std::invalid_argument("scan: beam sigma must be >= 0");
  if (s.mc_offsets < 1) throw std::invalid_argument("scan: mc_offsets must be >= 1");
}

}  // namespace

double beam_transmission(const Mask& mask, double x, double y, double sigma,
                         int mc_offsets, Rng& rng) {
  if (sigma == 0.0) return mask_transmission(mask, x, y);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EdgeMask>) {
          // open for x > x0: P(X > x0), X ~ N(x, sigma^2)
          return 0.5 * std::erfc((m.x0 - x) / (sigma * kSqrt2));
        } else if constexpr (std::is_same_v<T, DiscMask>) {
          return disc_containment(std::hypot(x - m.cx, y - m.cy), m.radius, sigma);
        } else if constexpr (std::is_same_v<T, RectMask>) {
          const double px = gauss_cdf((m.x1 - x) / sigma) - gauss_cdf((m.x0 - x) / sigma);
          const double py = gauss_cdf((m.y1 - y) / sigma) - gauss_cdf((m.y0 - y) / sigma);
          return px * py;
        } else {
          double sum = 0.0;
          for (int i = 0; i < mc_offsets; ++i)
            sum += mask_transmission(mask, x + sigma * rng.gauss(), y + sigma * rng.gauss());
          return sum / mc_offsets;
        }
      },
      mask);
}

Image raster_scan(const Mask& mask, const ScanConfig& scan, const SourceSpec& source,
                  const DetectorSpec& det, const Rng& rng) {
  validate_scan(scan);

  Image img;
  img.nx = scan.nx;
  img.ny = scan.ny;
  img.counts.assign(static_cast<std::size_t>(scan.nx) * scan.ny, 0);

  const bool bitmap = std::holds_alternative<BitmapMask>(mask);
  for (int iy = 0; iy < scan.ny; ++iy) {
    for (int ix = 0; ix < scan.nx; ++ix) {
      const std::size_t pix = static_cast<std::size_t>(iy) * scan.nx + ix;
      Rng stream = rng.child(pix);
      const double x = scan.origin_x + ix * scan.dx;
      const double y = scan.origin_y + iy * scan.dy;

      double p_t = 0.0;
      if (!bitmap || scan.beam_sigma == 0.0)
        p_t = beam_transmission(mask, x, y, scan.beam_sigma, scan.mc_offsets, stream);

      int detected = 0;
      for (int rep = 0; rep < scan.ions_per_pixel; ++rep) {
        if (bitmap && scan.beam_sigma > 0.0)
          p_t = beam_transmission(mask, x, y, scan.beam_sigma, scan.mc_offsets, stream);
        const ProbeOutcome o = sample_probe(source, det, p_t, stream);
        detected += static_cast<int>(o.detected);
      }
      img.counts[pix] = detected;
    }
  }

  img.meta = {{"seed", rng.seed()},
              {"scan",
               {{"origin", {scan.origin_x, scan.origin_y}},
                {"pixel", {scan.dx, scan.dy}},
                {"shape", {scan.nx, scan.ny}},
                {"ions_per_pixel", scan.ions_per_pixel},
                {"beam_sigma", scan.beam_sigma},
                {"mc_offsets", scan.mc_offsets}}}};
  return img;
}

SnrEstimate empirical_snr(const std::vector<Image>& frames,
                          const std::vector<std::size_t>& region) {
  if (frames.size() < 2) throw std::invalid_argument("empirical_snr: need >= 2 frames");
  if (region.empty()) throw std::invalid_argument("empirical_snr: region is empty");
  for (const auto& f : frames) {
    if (f.nx != frames[0].nx || f.ny != frames[0].ny ||
        f.meta.value("scan", nlohmann::json()) !=
            frames[0].meta.value("scan", nlohmann::json()))
      throw std::invalid_argument("empirical_snr: frames have mismatched configs");
    for (const std::size_t i : region)
      if (i >= f.counts.size())
        throw std::invalid_argument("empirical_snr: region index out of range");
  }

  double sum = 0.0, sum2 = 0.0;
  const double n = static_cast<double>(frames.size()) * static_cast<double>(region.size());
  for (const auto& f : frames)
    for (const std::size_t i : region) {
      const double c = f.counts[i];
      sum += c;
      sum2 += c * c;
    }
  SnrEstimate e;
  e.mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * e.mean * e.mean) / (n - 1.0));
  e.std = std::sqrt(var);
  e.snr = e.std > 0.0 ? e.mean / e.std : std::numeric_limits<double>::infinity();
  return e;
}

std::vector<std::size_t> rect_region(const Image& img, int x0, int y0, int x1, int y1) {
  std::vector<std::size_t> out;
  for (int iy = y0; iy <= y1; ++iy)
    for (int ix = x0; ix <= x1; ++ix)
      out.push_back(static_cast<std::size_t>(iy) * img.nx + ix);
  return out;
}

void write_image(const Image& img, ImageFormat fmt, std::ostream& os) {
  if (fmt == ImageFormat::CSV) {
    for (int iy = 0; iy < img.ny; ++iy) {
      for (int ix = 0; ix < img.nx; ++ix) {
        if (ix) os << ',';
        os << img.at(ix, iy);
      }
      os << '\n';
    }
    return;
  }
  int maxval = 1;
  for (const int c : img.counts) maxval = std::max(maxval, c);
  os << "P2\n";
  os << "# " << img.meta.dump() << '\n';
  os << img.nx << ' ' << img.ny << '\n' << maxval << '\n';
  for (int iy = 0; iy < img.ny; ++iy) {
    for (int ix = 0; ix < img.nx; ++ix) {
      if (ix) os << ' ';
      os << img.at(ix, iy);
    }
    os << '\n';
  }
}

void write_image_file(const Image& img, ImageFormat fmt, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_image(img, fmt, os);
  if (!os.good()) throw std::runtime_error("write failed: " + path);
}

Image read_image(ImageFormat fmt, std::istream& is) {
  Image img;
  if (fmt == ImageFormat::CSV) {
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      int nx = 0;
      while (std::getline(ss, cell, ',')) {
        img.counts.push_back(std::stoi(cell));
        ++nx;
      }
      if (img.nx == 0)
        img.nx = nx;
      else if (nx != img.nx)
        throw std::runtime_error("csv image: ragged rows");
      ++img.ny;
    }
    return img;
  }

  std::string magic;
  is >> magic;
  if (magic != "P2") throw std::runtime_error("pgm image: expected P2 header");
  auto next_token = [&]() -> std::string {
    std::string tok;
    while (is >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        if (img.meta.is_null()) {
          const auto parsed = nlohmann::json::parse(rest, nullptr, false);
          if (!parsed.is_discarded()) img.meta = parsed;
        }
        continue;
      }
      return tok;
    }
    throw std::runtime_error("pgm image: truncated file");
  };
  img.nx = std::stoi(next_token());
  img.ny = std::stoi(next_token());
  (void)std::stoi(next_token());  // maxval
  const std::size_t n = static_cast<std::size_t>(img.nx) * img.ny;
  for (std::size_t i = 0; i < n; ++i) img.counts.push_back(std::stoi(next_token()));
  return img;
}

Image read_image_file(ImageFormat fmt, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_image(fmt, is);
}

}  // namespace ionscope
