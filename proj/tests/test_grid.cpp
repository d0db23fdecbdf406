#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ionscope/grid.hpp"
#include "ionscope/models.hpp"

using namespace ionscope;

namespace {

ParameterGrid two_node_grid() {
  return make_grid({{"t", 0.0, 1.0, 2}}, PriorSpec::uniform());
}

// independent truncated-normal density (true normalization via erf)
double truncnorm_pdf(double x, double mu, double sd, double lo, double hi) {
  const auto cdf = [&](double t) { return 0.5 * std::erfc(-(t - mu) / (sd * std::sqrt(2.0))); };
  const double z = cdf(hi) - cdf(lo);
  const double u = (x - mu) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * 3.14159265358979323846) * z);
}

FunctionModel constant_model(double p) {
  return FunctionModel(1, [p](std::span<const double>, const Design&) { return p; });
}

}  // namespace

TEST_CASE("uniform prior on unit length has unit density") {
  const auto g = make_grid({{"x", 0.0, 1.0, 11}}, PriorSpec::uniform());
  for (const double w : g.weights()) CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g.integral() - 1.0) < 1e-12);
}

TEST_CASE("near-flat Gaussian prior approaches the uniform limit") {
  const auto g = make_grid({{"x", 0.0, 1.0, 11}}, PriorSpec::gaussian({{0.5, 1e6}}));
  double wmin = 1e300, wmax = 0.0;
  for (const double w : g.weights()) {
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }
  CHECK((wmax - wmin) / wmax < 1e-6);
}

TEST_CASE("2D Gaussian prior peaks at its center node") {
  const std::vector<ParameterAxis> axes{{"x", 0.0, 1.0, 11}, {"y", 0.0, 1.0, 11}};
  const auto g = make_grid(axes, PriorSpec::gaussian({{0.5, 0.1}, {0.5, 0.1}}));

  // oracle: evaluate the product density at every node independently
  std::size_t want = 0;
  double best = -1.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      const double p = truncnorm_pdf(axes[0].node(i), 0.5, 0.1, 0, 1) *
                       truncnorm_pdf(axes[1].node(j), 0.5, 0.1, 0, 1);
      if (p > best) {
        best = p;
        want = static_cast<std::size_t>(i) * 11 + j;
      }
    }
  std::size_t got = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g.weight(i) > g.weight(got)) got = i;
  CHECK(got == want);
  CHECK(g.node_coord(got, 0) == doctest::Approx(0.5));
  CHECK(g.node_coord(got, 1) == doctest::Approx(0.5));
}

TEST_CASE("make_grid rejects invalid axes and priors") {
  CHECK_THROWS_AS(make_grid({{"x", 1.0, 0.0, 5}}, PriorSpec::uniform()), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{"x", 0.0, 1.0, 1}}, PriorSpec::uniform()), std::invalid_argument);
  CHECK_THROWS_AS(make_grid({{"x", 0.0, 1.0, 5}}, PriorSpec::gaussian({{0.5, 0.0}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_grid({}, PriorSpec::uniform()), std::invalid_argument);
}

TEST_CASE("bayes update on two nodes follows the likelihood ratio") {
  const auto g = two_node_grid();
  const FunctionModel m(1, [](std::span<const double> th, const Design&) {
    return th[0] < 0.5 ? 0.8 : 0.4;
  });
  const auto post = bayes_update(g, m, Design::scalar(0.0), 1);
  CHECK(post.weight(0) / post.weight(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(post.integral() - 1.0) < 1e-12);
  // input grid untouched
  CHECK(g.weight(0) == doctest::Approx(1.0));
}

TEST_CASE("constant likelihood leaves the grid unchanged") {
  const auto g = make_grid({{"x", -3.0, 7.0, 41}}, PriorSpec::gaussian({{1.0, 2.0}}));
  const auto post = bayes_update(g, constant_model(0.37), Design::scalar(1.0), 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(post.weight(i) == doctest::Approx(g.weight(i)).epsilon(1e-12));
}

TEST_CASE("edge update far below x0 matches per-node arithmetic") {
  const std::vector<ParameterAxis> axes{
      {"x0", 0.0, 20.0, 5}, {"sigma", 5.0, 15.0, 3}, {"a", 0.5, 1.0, 5}};
  const auto g = make_grid(axes, PriorSpec::uniform());
  const EdgeModel m;
  const Design xi = Design::scalar(-1e5);

  const auto post = bayes_update(g, m, xi, 1);

  // oracle: explicit per-node products, normalized with the same quadrature
  std::vector<double> expected(g.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double th[3];
    g.node(i, th);
    expected[i] = edge_likelihood({th[0], th[1], th[2]}, xi.x(), 1) * g.weight(i);
    norm += g.quad_factors()[i] * expected[i];
  }
  norm *= g.cell_volume();
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(post.weight(i) == doctest::Approx(expected[i] / norm).epsilon(1e-12));

  // likelihood = a exactly this far out, so the x0 marginal cannot move
  const auto s_prior = summarize(g);
  const auto s_post = summarize(post);
  CHECK(s_post.axes[0].mean == doctest::Approx(s_prior.axes[0].mean).epsilon(1e-12));
  CHECK(s_post.axes[2].mean > s_prior.axes[2].mean);  // detection favors high a
}

TEST_CASE("all-zero likelihood raises degenerate evidence") {
  const auto g = two_node_grid();
  const auto m = constant_model(0.0);
  CHECK_THROWS_AS(bayes_update(g, m, Design::scalar(0.0), 1), DegenerateEvidenceError);
  CHECK(g.weight(0) == doctest::Approx(1.0));  // unchanged
}

TEST_CASE("marginal evidence basics") {
  const auto g = two_node_grid();
  CHECK(marginal_evidence(g, constant_model(0.3), Design::scalar(0), 1) ==
        doctest::Approx(0.3).epsilon(1e-12));

  const FunctionModel split(1, [](std::span<const double> th, const Design&) {
    return th[0] < 0.5 ? 1.0 : 0.0;
  });
  CHECK(marginal_evidence(g, split, Design::scalar(0), 1) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("marginal evidence matches an explicit 3-term sum") {
  const std::vector<ParameterAxis> axes{{"sigma", 5.0, 15.0, 3}};
  const auto g = make_grid(axes, PriorSpec::uniform());
  const double xi = 3.0, a = 0.9;
  const FunctionModel m(1, [a](std::span<const double> th, const Design& d) {
    return 0.5 * a * std::erfc(d.x() / (th[0] * std::sqrt(2.0)));
  });

  auto p = [&](double sigma) { return 0.5 * a * std::erfc(xi / (sigma * std::sqrt(2.0))); };
  const double w = 0.1, vol = 5.0;  // uniform density 1/10, step 5
  const double hand = vol * w * (0.5 * p(5.0) + p(10.0) + 0.5 * p(15.0));

  const double e1 = marginal_evidence(g, m, Design::scalar(xi), 1);
  CHECK(e1 == doctest::Approx(hand).epsilon(1e-14));
  const double e0 = marginal_evidence(g, m, Design::scalar(xi), 0);
  CHECK(std::abs(e0 + e1 - 1.0) < 1e-10);
}

TEST_CASE("entropy of uniform grids equals log length") {
  const auto g1 = make_grid({{"x", 0.0, 1.0, 11}}, PriorSpec::uniform());
  CHECK(std::abs(entropy(g1)) < 1e-9);
  const auto g2 = make_grid({{"x", 0.0, 2.0, 11}}, PriorSpec::uniform());
  CHECK(entropy(g2) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  const auto g3 = make_grid({{"x", 0.0, 2.0, 7}, {"y", -1.0, 1.0, 9}}, PriorSpec::uniform());
  CHECK(entropy(g3) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("entropy of a truncated Gaussian matches fine quadrature") {
  const auto g = make_grid({{"x", 0.0, 1.0, 201}}, PriorSpec::gaussian({{0.5, 0.1}}));

  // oracle: trapezoid of -p ln p at 10x the grid resolution, true density
  const int n = 2001;
  const double h = 1.0 / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    const double p = truncnorm_pdf(x, 0.5, 0.1, 0.0, 1.0);
    const double f = p > 0 ? -p * std::log(p) : 0.0;
    acc += (i == 0 || i == n - 1) ? 0.5 * f : f;
  }
  acc *= h;
  CHECK(entropy(g) == doctest::Approx(acc).epsilon(1e-3));
}

TEST_CASE("summary of symmetric and concentrated grids") {
  const auto g = make_grid({{"x", -4.0, 10.0, 29}}, PriorSpec::gaussian({{3.0, 2.0}}));
  const auto s = summarize(g);
  CHECK(std::abs(s.axes[0].mean - 3.0) < g.axes()[0].step() / 100.0);
  CHECK(s.axes[0].ci_lo <= s.axes[0].mean);
  CHECK(s.axes[0].mean <= s.axes[0].ci_hi);

  // delta-like grid: all mass on one interior node
  const std::vector<ParameterAxis> ax{{"x", 0.0, 1.0, 11}};
  std::vector<double> w(11, 0.0);
  w[5] = 1.0;
  const auto d = ParameterGrid::from_unnormalized(ax, std::move(w));
  const auto sd = summarize(d);
  CHECK(sd.axes[0].mean == doctest::Approx(0.5));
  CHECK(sd.axes[0].std <= ax[0].step());
}

TEST_CASE("summary moments of a truncated Gaussian match quadrature") {
  const auto g = make_grid({{"x", 0.0, 1.0, 201}}, PriorSpec::gaussian({{0.5, 0.1}}));
  const auto s = summarize(g);

  // oracle: fine-quadrature moments of the true density
  const int n = 4001;
  const double h = 1.0 / (n - 1);
  double m0 = 0, m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    const double p = truncnorm_pdf(x, 0.5, 0.1, 0.0, 1.0);
    const double f = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    m0 += f * p;
    m1 += f * p * x;
    m2 += f * p * x * x;
  }
  m0 *= h;
  m1 *= h;
  m2 *= h;
  const double mean = m1 / m0;
  const double std = std::sqrt(m2 / m0 - mean * mean);

  CHECK(std::abs(s.axes[0].mean - mean) < 1e-3);
  CHECK(std::abs(s.axes[0].std - std) < 2e-3);
  CHECK(std::abs(s.axes[0].mean - 0.5) < 1e-3);
  CHECK(std::abs(s.axes[0].std - 0.1) < 2e-3);
}

TEST_CASE("update order does not matter") {
  const auto g = make_grid({{"x0", -5.0, 5.0, 15}, {"sigma", 1.0, 9.0, 9}, {"a", 0.5, 1.0, 7}},
                           PriorSpec::uniform());
  const EdgeModel m;
  const Design xi1 = Design::scalar(-1.0), xi2 = Design::scalar(2.5);

  const auto ab = bayes_update(bayes_update(g, m, xi1, 1), m, xi2, 0);
  const auto ba = bayes_update(bayes_update(g, m, xi2, 0), m, xi1, 1);
  for (std::size_t i = 0; i < ab.size(); ++i)
    CHECK(std::abs(ab.weight(i) - ba.weight(i)) < 1e-10);
}

TEST_CASE("normalization and positivity survive long random update chains") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto g = make_grid({{"x0", -20.0, 20.0, 17}, {"sigma", 2.0, 12.0, 9}, {"a", 0.6, 1.0, 5}},
                     PriorSpec::uniform());
  const EdgeModel m;
  for (int it = 0; it < 200; ++it) {
    const Design xi = Design::scalar(-25.0 + 50.0 * uni(eng));
    const int y = uni(eng) < 0.5 ? 1 : 0;
    g = bayes_update(g, m, xi, y);
    REQUIRE(std::abs(g.integral() - 1.0) <= 1e-10);
    for (const double w : g.weights()) {
      REQUIRE(std::isfinite(w));
      REQUIRE(w >= 0.0);
    }
  }
}

TEST_CASE("grid snapshots round-trip through JSON") {
  auto g = make_grid({{"x0", -5.0, 5.0, 7}, {"sigma", 1.0, 3.0, 5}}, PriorSpec::uniform());
  const FunctionModel m(2, [](std::span<const double> th, const Design& xi) {
    return 1.0 / (1.0 + std::exp(-(th[0] + th[1] - xi.x())));
  });
  g = bayes_update(g, m, Design::scalar(0.7), 1);

  const auto j = grid_to_json(g);
  const auto g2 = grid_from_json(j);
  REQUIRE(g2.size() == g.size());
  CHECK(g2.axes()[0].name == "x0");
  CHECK(g2.axes()[1].count == 5);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g2.weight(i) == g.weight(i));
}
