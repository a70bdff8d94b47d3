#include "imc/seminorm.hpp"
#include "imc/graph_patch.hpp"
#include "imc/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

using Catch::Approx;

namespace {

imc::GridFunction sampled(int m, double delta, int grid_count,
                          const std::function<double(const Eigen::VectorXd&)>& f) {
  imc::DiscGrid grid(m, delta, delta / grid_count);
  std::vector<double> values(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) values[i] = f(grid.position(i));
  return {std::move(grid), 1, std::move(values), imc::GridFunction::Kind::Function};
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const auto simpson = [](double fa, double fm, double fb, double w) {
    return w / 6.0 * (fa + 4.0 * fm + fb);
  };
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double m, double b, double fa, double fm, double fb,
          int depth) -> double {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = simpson(fa, fm, fb, b - a);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(a, lm, m, fa, flm, fm, depth - 1) +
           rec(m, rm, b, fm, frm, fb, depth - 1);
  };
  const double m = 0.5 * (a + b);
  return rec(a, m, b, f(a), f(m), f(b), 24);
}

}  // namespace

TEST_CASE("gagliardo seminorm basics") {
  const auto constant = sampled(1, 1.0, 50, [](const Eigen::VectorXd&) { return 3.7; });
  CHECK(imc::gagliardo_seminorm(constant, 0.5, 2.0) == 0.0);

  // Sign symmetry and degree-p homogeneity in the values.
  const auto g = sampled(1, 1.0, 40, [](const Eigen::VectorXd& x) {
    return std::sin(3.0 * x[0]);
  });
  imc::DiscGrid grid(1, 1.0, 1.0 / 40);
  std::vector<double> neg(g.values()), twice(g.values());
  for (double& v : neg) v = -v;
  for (double& v : twice) v *= 2.0;
  const imc::GridFunction gneg(grid, 1, neg, imc::GridFunction::Kind::Function);
  const imc::GridFunction g2(grid, 1, twice, imc::GridFunction::Kind::Function);
  const double base = imc::gagliardo_seminorm(g, 0.5, 3.0);
  CHECK(imc::gagliardo_seminorm(gneg, 0.5, 3.0) == Approx(base));
  CHECK(imc::gagliardo_seminorm(g2, 0.5, 3.0) == Approx(8.0 * base).epsilon(1e-12));

  CHECK_THROWS_AS(imc::gagliardo_seminorm(g, 1.2, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(imc::gagliardo_seminorm(g, 0.5, 0.5), std::invalid_argument);

  // Translating the values leaves both seminorms unchanged.
  std::vector<double> shifted(g.values());
  for (double& v : shifted) v += 2.75;
  const imc::GridFunction gshift(grid, 1, shifted, imc::GridFunction::Kind::Function);
  CHECK(imc::gagliardo_seminorm(gshift, 0.5, 3.0) == Approx(base).epsilon(1e-9));
  CHECK(imc::besov_second_difference(gshift, 1.2, 3.0) ==
        Approx(imc::besov_second_difference(g, 1.2, 3.0)).epsilon(1e-9).margin(1e-300));
}

TEST_CASE("gagliardo of identity matches the continuum quadrature") {
  // g(x) = x, m = 1, s = 0.5, p = 2: integrand |x-y|^2 / |x-y|^2 = 1; the
  // continuum double integral reduces to int_0^{2d} u^0 2(2d - u) du = (2d)^2.
  const double delta = 1.0;
  const auto g = sampled(1, delta, 100, [](const Eigen::VectorXd& x) { return x[0]; });
  const double oracle = adaptive_simpson(
      [&](double u) { return 2.0 * (2.0 * delta - u); }, 0.0, 2.0 * delta, 1e-10);
  CHECK(oracle == Approx(4.0).epsilon(1e-9));
  CHECK(imc::gagliardo_seminorm(g, 0.5, 2.0) == Approx(oracle).epsilon(0.01));
}

TEST_CASE("besov second difference basics") {
  // Dyadic spacing and coefficients: the second differences cancel exactly.
  const auto affine = sampled(1, 1.0, 64, [](const Eigen::VectorXd& x) {
    return 0.25 * x[0] + 0.5;
  });
  CHECK(imc::besov_second_difference(affine, 1.5, 2.0) == 0.0);

  const auto affine2 = sampled(2, 1.0, 16, [](const Eigen::VectorXd& x) {
    return 0.25 * x[0] - 0.125 * x[1];
  });
  CHECK(imc::besov_second_difference(affine2, 1.5, 2.0) == 0.0);

  CHECK_THROWS_AS(imc::besov_second_difference(affine, 2.5, 2.0),
                  std::invalid_argument);
}

TEST_CASE("besov of x^2 matches the parity-weighted closed form") {
  // u(x) = x^2: second difference (x-y)^2/2; integrand 2^{-p}|x-y|^{2p-1-sp}.
  // Equal-parity pairs carry half of the 1-d pair measure, so the discrete
  // value converges to 1/2 the continuum integral.
  const double delta = 1.0, p = 2.0, sigma = 1.5;
  const double q = 2.0 * p - 1.0 - sigma * p;  // = 0
  const auto u = sampled(1, delta, 200, [](const Eigen::VectorXd& x) {
    return x[0] * x[0];
  });
  const double continuum = adaptive_simpson(
      [&](double w) { return std::pow(w, q) * 2.0 * (2.0 * delta - w); }, 0.0,
      2.0 * delta, 1e-10);
  const double oracle = 0.5 * std::pow(2.0, -p) * continuum;
  CHECK(imc::besov_second_difference(u, sigma, p) == Approx(oracle).epsilon(0.01));
}

TEST_CASE("exponent bookkeeping") {
  const imc::EnergySpec a(1, 2, 3, 4.0);
  CHECK(imc::sobolev_exponent(a) == Approx(0.5));
  CHECK(imc::besov_exponent(a) == Approx(1.5));
  const imc::EnergySpec b(2, 3, 4, 12.0);
  CHECK(imc::sobolev_exponent(b) == Approx(0.5));
  CHECK_FALSE(imc::exponent_near_degenerate(b));
  const imc::EnergySpec c(1, 2, 2, 1.0001);
  CHECK(imc::sobolev_exponent(c) == Approx(1.0 - 1.0 / 1.0001));
  CHECK(imc::exponent_near_degenerate(c));
  CHECK_THROWS_AS(imc::EnergySpec(1, 2, 2, 1.0), std::invalid_argument);
}

TEST_CASE("alpha membership threshold") {
  CHECK(imc::alpha_membership_threshold(1, 0.75, 8.0) == Approx(1.625));
  CHECK(imc::alpha_membership_threshold(2, 0.5, 16.0) == Approx(1.375));
  // s -> 0, p -> infinity: threshold -> 1.
  CHECK(imc::alpha_membership_threshold(1, 1e-4, 1e7) == Approx(1.0).margin(1e-3));
  CHECK_THROWS_AS(imc::alpha_membership_threshold(2, 0.5, 1.5),
                  std::invalid_argument);
}

TEST_CASE("refinement study separates the alpha family at the threshold") {
  // m = 1, k = 3, p = 8: s = 0.75, alpha* = 1.625.
  const imc::EnergySpec spec(1, 2, 3, 8.0);
  const double alpha_star = imc::alpha_membership_threshold(1, spec.s, spec.p);
  CHECK(alpha_star == Approx(1.625));

  const std::vector<int> grids{16, 32, 64, 128};
  // Evaluate on the inner disc where the cutoff is 1: the membership question
  // is local and the pure cusp dominates every scale there.
  auto values_for = [&](double alpha) {
    std::vector<double> out;
    for (int res : grids) {
      const auto patch = imc::make_patch(imc::alpha_cusp_profile(alpha, 1.0),
                                         1, 2, 0.5, res);
      out.push_back(
          imc::gagliardo_seminorm(imc::patch_derivative(patch), spec.s, spec.p));
    }
    return out;
  };

  const auto below = values_for(1.375);
  for (std::size_t i = 1; i < below.size(); ++i)
    REQUIRE(below[i] >= 1.2 * below[i - 1]);

  const auto above = values_for(1.875);
  CHECK(above.back() <= 1.2 * above[above.size() - 2]);
}

TEST_CASE("grid function round trip and parse errors") {
  const auto patch = imc::graph_alpha_patch(1.5, 1.0, 1, 2, 32);
  const auto g = imc::patch_derivative(patch);
  const std::string path =
      (std::filesystem::temp_directory_path() / "imc_grid.csv").string();
  imc::save_grid_function(g, path);
  const auto loaded = imc::load_grid_function(path);
  REQUIRE(loaded.grid().node_count() == g.grid().node_count());
  REQUIRE(loaded.components() == g.components());
  CHECK(loaded.kind() == imc::GridFunction::Kind::Gradient);
  for (std::size_t i = 0; i < g.values().size(); ++i)
    REQUIRE(loaded.values()[i] == g.values()[i]);
  std::remove(path.c_str());

  {
    std::ofstream out(path, std::ios::binary);
    out << "x0,v0\n0,1\n";
  }
  CHECK_THROWS_AS(imc::load_grid_function(path), imc::ParseError);  // no sidecar
  std::remove(path.c_str());
}

TEST_CASE("grid function invariants") {
  imc::DiscGrid grid(1, 1.0, 0.25);
  std::vector<double> bad(static_cast<std::size_t>(grid.node_count()),
                          std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(
      imc::GridFunction(grid, 1, bad, imc::GridFunction::Kind::Function),
      std::invalid_argument);
  CHECK_THROWS_AS(imc::GridFunction(grid, 2, {1.0}, imc::GridFunction::Kind::Function),
                  std::invalid_argument);
}
