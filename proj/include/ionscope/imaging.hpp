#ifndef IONSCOPE_IMAGING_HPP
#define IONSCOPE_IMAGING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionscope/models.hpp"
#include "ionscope/rng.hpp"
#include "ionscope/source.hpp"

namespace ionscope {

struct ScanConfig {
  double origin_x = 0.0, origin_y = 0.0;  // center of pixel (0,0), nm
  double dx = 1.0, dy = 1.0;              // pixel size, nm
  int nx = 1, ny = 1;
  int ions_per_pixel = 1;
  double beam_sigma = 0.0;  // 0 = point beam
  int mc_offsets = 64;      // beam-offset samples per particle (bitmap masks)

  bool operator==(const ScanConfig&) const = default;
};

// Detected counts per pixel from one raster scan, row-major from the origin.
struct Image {
  int nx = 0, ny = 0;
  std::vector<int> counts;
  nlohmann::json meta;  // scan config echo + seed; not part of equality

  int at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * nx + ix]; }
  int& at(int ix, int iy) { return counts[static_cast<std::size_t>(iy) * nx + ix]; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.nx == b.nx && a.ny == b.ny && a.counts == b.counts;
  }
};

// Per-particle transmission probability of the beam-convolved mask at (x, y).
// Analytic for edge / disc / rect masks; bitmap masks are estimated by
// averaging `mc_offsets` Gaussian beam offsets drawn from `rng`.
double beam_transmission(const Mask& mask, double x, double y, double sigma,
                         int mc_offsets, Rng& rng);

// Raster scan over the mask. Each pixel consumes its own derived random
// stream (stream index = pixel index), so parallel and sequential execution
// agree and any pixel can be reproduced in isolation.
Image raster_scan(const Mask& mask, const ScanConfig& scan, const SourceSpec& source,
                  const DetectorSpec& det, const Rng& rng);

struct SnrEstimate {
  double mean = 0.0;
  double std = 0.0;
  double snr = 0.0;  // +inf when std == 0
};

// Pooled mean/std/SNR of the counts in `region` (flat pixel indices) across
// frames. All frames must share nx/ny and scan config metadata.
SnrEstimate empirical_snr(const std::vector<Image>& frames,
                          const std::vector<std::size_t>& region);

// All pixel indices of a rectangular block [x0,x1] x [y0,y1] (inclusive).
std::vector<std::size_t> rect_region(const Image& img, int x0, int y0, int x1, int y1);

enum class ImageFormat { CSV, PGM };

// CSV: ny rows of nx comma-separated integers. PGM: plain P2 with the
// metadata JSON in a comment line and maxval = max(count, 1).
void write_image(const Image& img, ImageFormat fmt, std::ostream& os);
void write_image_file(const Image& img, ImageFormat fmt, const std::string& path);
Image read_image(ImageFormat fmt, std::istream& is);
Image read_image_file(ImageFormat fmt, const std::string& path);

}  // namespace ionscope

#endif  // IONSCOPE_IMAGING_HPP
