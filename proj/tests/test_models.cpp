#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ionscope/models.hpp"
#include "ionscope/rng.hpp"

using namespace ionscope;

namespace {

// Monte-Carlo disc containment: fraction of Gaussian beam samples landing
// inside the disc. Returns (estimate, standard error).
std::pair<double, double> mc_containment(double d, double R, double sigma, std::size_t n,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d + sigma * rng.gauss();
    const double y = sigma * rng.gauss();
    if (x * x + y * y <= R * R) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
  return {p, se};
}

// Simpson integration of the standard normal density on [0, z].
double normal_mass(double z, int n = 2000) {
  const double h = z / n;
  auto f = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  double acc = f(0.0) + f(z);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("edge likelihood pinned values") {
  CHECK(edge_likelihood({0.0, 10.0, 0.95}, 0.0, 1) == doctest::Approx(0.475).epsilon(1e-12));
  CHECK(edge_likelihood({0.0, 10.0, 0.95}, -1e6, 1) ==
        doctest::Approx(0.95).epsilon(1e-12));
  // 1 - Phi(1), oracle via numeric integration of the normal density
  const double expect = 0.5 - normal_mass(1.0);
  CHECK(std::abs(expect - 0.158655) < 1e-6);
  CHECK(edge_likelihood({0.0, 10.0, 1.0}, 10.0, 1) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("edge likelihood symmetry, complement and monotonicity") {
  const EdgeParams th{2.0, 7.0, 0.85};
  for (const double t : {0.1, 0.5, 1.0, 3.0, 8.0, 20.0}) {
    const double up = edge_likelihood(th, th.x0 + t, 1);
    const double dn = edge_likelihood(th, th.x0 - t, 1);
    CHECK(std::abs(up + dn - th.a) < 1e-10);
  }
  double prev = 2.0;
  for (double xi = -30.0; xi <= 30.0; xi += 0.5) {
    const double p1 = edge_likelihood(th, xi, 1);
    CHECK(p1 <= prev + 1e-15);
    CHECK(p1 >= 0.0);
    CHECK(p1 <= th.a);
    CHECK(edge_likelihood(th, xi, 0) == 1.0 - p1);  // exact complement
    prev = p1;
  }
  CHECK_THROWS_AS(edge_likelihood({0.0, -1.0, 0.5}, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(edge_likelihood({0.0, 1.0, 1.5}, 0.0, 1), std::invalid_argument);
}

TEST_CASE("disc containment closed forms at d = 0") {
  // Rayleigh CDF: 1 - exp(-R^2 / 2 sigma^2)
  CHECK(disc_containment(0.0, 1.0, 1.0) ==
        doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-10));
  CHECK(std::abs(disc_containment(0.0, 1.0, 1.0) - 0.393469) < 1e-6);
  CHECK(disc_containment(0.0, 100.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  for (const double r : {0.3, 0.8, 1.7, 4.0})
    CHECK(disc_containment(0.0, r, 1.3) ==
          doctest::Approx(-std::expm1(-r * r / (2.0 * 1.3 * 1.3))).epsilon(1e-12));
}

TEST_CASE("disc containment agrees with a Monte-Carlo oracle") {
  const auto [p, se] = mc_containment(2.0, 1.0, 1.0, 10'000'000, 12345);
  const double analytic = disc_containment(2.0, 1.0, 1.0);
  CHECK(std::abs(analytic - p) <= 3.0 * se);
}

TEST_CASE("disc containment monotonicity and range") {
  double prev = -1.0;
  for (double R = 0.1; R < 8.0; R += 0.1) {
    const double c = disc_containment(1.5, R, 1.0);
    CHECK(c >= prev - 1e-14);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    prev = c;
  }
  prev = 2.0;
  for (double d = 0.0; d < 10.0; d += 0.1) {
    const double c = disc_containment(d, 2.0, 1.0);
    CHECK(c <= prev + 1e-14);
    prev = c;
  }
  CHECK_THROWS_AS(disc_containment(-1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(disc_containment(0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(disc_containment(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(disc_containment(std::nan(""), 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("deep saturation clamps") {
  CHECK(disc_containment(0.0, 50.0, 1.0) == 1.0);
  CHECK(disc_containment(100.0, 2.0, 1.0) == 0.0);
  // large-argument regime still finite and sane just inside the clamps
  const double c = disc_containment(850.0, 814.1, 25.0);
  CHECK(c > 0.0);
  CHECK(c < 0.5);
}

TEST_CASE("hole likelihood limits and rim value") {
  const BeamSpec beam{25.0, 0.95};
  const HoleParams hole{0.0, 0.0, 250.0};  // R = 10 sigma
  CHECK(hole_likelihood(hole, beam, Design::point(0, 0), 1) ==
        doctest::Approx(0.95).epsilon(1e-10));

  const HoleParams small{0.0, 0.0, 25.0};
  CHECK(hole_likelihood(small, beam, Design::point(25.0 + 250.0, 0.0), 1) <= 1e-8);

  // the Fig.-5-scale hole probed exactly on the rim, vs Monte Carlo
  const HoleParams paper{0.0, 0.0, 814.1};
  const double p1 = hole_likelihood(paper, beam, Design::point(814.1, 0.0), 1);
  const auto [mc, se] = mc_containment(814.1, 814.1, 25.0, 1'000'000, 99);
  CHECK(std::abs(p1 - 0.95 * mc) <= 3.0 * 0.95 * se);
  CHECK(p1 < 0.95 * 0.5);   // slightly under a/2: rim curvature
  CHECK(p1 > 0.95 * 0.45);
}

TEST_CASE("hole likelihood depends on the probe only through distance") {
  const BeamSpec beam{10.0, 0.9};
  const HoleParams hole{5.0, -3.0, 40.0};
  const double d = 31.0;
  const double ref = hole_likelihood(hole, beam, Design::point(5.0 + d, -3.0), 1);
  for (const double ang : {0.3, 1.1, 2.0, 3.9, 5.5}) {
    const Design xi = Design::point(5.0 + d * std::cos(ang), -3.0 + d * std::sin(ang));
    CHECK(hole_likelihood(hole, beam, xi, 1) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(hole_likelihood(hole, beam, Design::point(0, 0), 0) ==
        1.0 - hole_likelihood(hole, beam, Design::point(0, 0), 1));
}

TEST_CASE("mask transmission") {
  const Mask edge = EdgeMask{0.0};
  CHECK(mask_transmission(edge, -1.0, 0.0) == 0.0);
  CHECK(mask_transmission(edge, 1.0, 0.0) == 1.0);

  const Mask disc = DiscMask{0.0, 0.0, 5.0};
  CHECK(mask_transmission(disc, 3.0, 0.0) == 1.0);
  CHECK(mask_transmission(disc, 5.1, 0.0) == 0.0);

  const Mask rect = RectMask{0.0, 0.0, 2.0, 1.0};
  CHECK(mask_transmission(rect, 1.0, 0.5) == 1.0);
  CHECK(mask_transmission(rect, 3.0, 0.5) == 0.0);

  BitmapMask bmp;
  bmp.width = 2;
  bmp.height = 2;
  bmp.pitch = 10.0;
  bmp.levels = {0.0, 255.0, 255.0, 0.0};
  bmp.max_level = 255.0;
  const Mask m = bmp;
  CHECK(mask_transmission(m, 0.0, 0.0) == 0.0);
  CHECK(mask_transmission(m, 10.0, 0.0) == 1.0);
  CHECK(mask_transmission(m, 0.0, 10.0) == 1.0);
  CHECK(mask_transmission(m, 10.0, 10.0) == 0.0);
  CHECK(mask_transmission(m, -20.0, 0.0) == 0.0);  // outside: opaque
  CHECK(mask_transmission(m, 0.0, 35.0) == 0.0);
}
