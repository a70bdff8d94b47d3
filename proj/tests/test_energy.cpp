#include "imc/energy.hpp"
#include "imc/geometry.hpp"
#include "imc/graph_patch.hpp"
#include "imc/manifold.hpp"
#include "imc/rng.hpp"
#include "imc/seminorm.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using Catch::Approx;

namespace {

// Axis-aligned dyadic coordinates: every simplex volume cancels exactly, so
// flat fixtures give energies that are 0.0 bitwise.
imc::SampledManifold dyadic_segment(int count) {
  std::vector<double> pts, ws;
  for (int i = 0; i < count; ++i) {
    pts.push_back(0.25 * i);
    pts.push_back(0.0);
    ws.push_back(0.25);
  }
  return {1, 2, std::move(pts), std::move(ws), "segment"};
}

imc::SampledManifold dyadic_plane(int side) {
  std::vector<double> pts, ws;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      pts.push_back(0.5 * i);
      pts.push_back(0.5 * j);
      pts.push_back(0.0);
      ws.push_back(0.25);
    }
  return {2, 3, std::move(pts), std::move(ws), "plane"};
}

}  // namespace

TEST_CASE("sup_curvature basics") {
  const auto circle = imc::generate_circle(1.0, 12);
  const imc::EnergySpec spec(1, 2, 3, 8.0);  // k = m+2: no supremum
  const std::vector<int> triple{0, 4, 8};
  const double direct = imc::discrete_curvature(circle.tuple(triple));
  CHECK(imc::sup_curvature(circle, triple, spec) == Approx(direct));

  // k = 2: brute force over all completions is the oracle.
  const imc::EnergySpec spec2(1, 2, 2, 3.0);
  const std::vector<int> pair{0, 5};
  double brute = 0.0;
  for (int a = 0; a < circle.size(); ++a) {
    const std::vector<int> full{0, 5, a};
    brute = std::max(brute, imc::discrete_curvature(circle.tuple(full)));
  }
  CHECK(imc::sup_curvature(circle, pair, spec2) == Approx(brute));

  // Affine data: flat simplices everywhere.
  const auto segment = dyadic_segment(16);
  CHECK(imc::sup_curvature(segment, pair, spec2) == 0.0);

  CHECK_THROWS_AS(imc::sup_curvature(circle, pair, spec),  // size != k
                  std::invalid_argument);
}

TEST_CASE("sup monotonicity in the candidate set") {
  const auto knot = imc::generate_torus_knot(2, 3, 2.0, 0.5, 300);
  const imc::EnergySpec spec(1, 3, 2, 4.0);
  imc::RngStream rng(3, 0);
  for (int t = 0; t < 20; ++t) {
    const int i = static_cast<int>(rng.index(knot.size()));
    const int j = static_cast<int>(rng.index(knot.size()));
    if (i == j) continue;
    const std::vector<int> pair{i, j};
    imc::EstimatorConfig small, medium, all;
    small.sup_candidates = imc::SupCandidates::subsample(8);
    medium.sup_candidates = imc::SupCandidates::subsample(64);
    all.sup_candidates = imc::SupCandidates::all();
    const double s = imc::sup_curvature(knot, pair, spec, small);
    const double m = imc::sup_curvature(knot, pair, spec, medium);
    const double a = imc::sup_curvature(knot, pair, spec, all);
    REQUIRE(s <= m + 1e-15);
    REQUIRE(m <= a + 1e-15);
  }
}

TEST_CASE("exhaustive energy on flat fixtures is exactly zero") {
  const imc::EnergySpec spec(1, 2, 2, 3.0);
  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;
  const auto seg = imc::energy_exhaustive(dyadic_segment(20), spec, config);
  CHECK(seg.value == 0.0);
  CHECK(seg.std_error == 0.0);

  const imc::EnergySpec spec2(2, 3, 4, 12.0);
  const auto plane = imc::energy_exhaustive(dyadic_plane(5), spec2, config);
  CHECK(plane.value == 0.0);
}

TEST_CASE("curve energies on the unit circle") {
  const auto circle = imc::generate_circle(1.0, 200);
  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;

  for (double p : {2.0, 8.0}) {
    const auto mp = imc::curve_energy(circle, imc::CurveVariant::Mp, p, config);
    const double expected = std::pow(2.0 * std::numbers::pi, 3);
    CHECK(mp.value == Approx(expected).epsilon(0.02));
    CHECK(std::isnan(mp.spec.s));
    CHECK(mp.spec.k == 3);
  }

  const auto up = imc::curve_energy(circle, imc::CurveVariant::Up, 4.0, config);
  CHECK(up.value == Approx(2.0 * std::numbers::pi).epsilon(0.01));

  const auto ip = imc::curve_energy(circle, imc::CurveVariant::Ip, 4.0, config);
  CHECK(ip.value ==
        Approx(std::pow(2.0 * std::numbers::pi, 2) * (1.0 - 1.0 / 200)).epsilon(1e-6));
}

TEST_CASE("curve energies reject surfaces and vanish on segments") {
  const auto sphere = imc::generate_sphere(1.0, 50);
  CHECK_THROWS_AS(imc::curve_energy(sphere, imc::CurveVariant::Mp, 2.0),
                  std::invalid_argument);
  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;
  const auto segment = dyadic_segment(12);
  for (auto variant : {imc::CurveVariant::Up, imc::CurveVariant::Ip,
                       imc::CurveVariant::Mp})
    CHECK(imc::curve_energy(segment, variant, 3.0, config).value == 0.0);
}

TEST_CASE("energy homogeneity under scaling") {
  struct Case {
    int m, n, k;
    double p;
  };
  for (const Case& c : {Case{1, 2, 2, 3.0}, Case{1, 2, 3, 8.0}}) {
    const auto circle = imc::generate_circle(1.0, 40);
    const imc::EnergySpec spec(c.m, c.n, c.k, c.p);
    imc::EstimatorConfig config;
    config.method = imc::EstimatorConfig::Method::Exhaustive;
    const double base = imc::energy_exhaustive(circle, spec, config).value;
    REQUIRE(base > 0.0);
    for (double lambda : {0.5, 2.0, 10.0}) {
      const double scaled =
          imc::energy_exhaustive(circle.scaled(lambda), spec, config).value;
      const double expected = std::pow(lambda, c.m * c.k - c.p) * base;
      REQUIRE(scaled == Approx(expected).epsilon(1e-10));
    }
  }
  // Surface case.
  const auto sphere = imc::generate_sphere(1.0, 40);
  const imc::EnergySpec spec(2, 3, 4, 12.0);
  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;
  const double base = imc::energy_exhaustive(sphere, spec, config).value;
  for (double lambda : {0.5, 2.0, 10.0}) {
    const double scaled =
        imc::energy_exhaustive(sphere.scaled(lambda), spec, config).value;
    CHECK(scaled == Approx(std::pow(lambda, 2 * 4 - 12.0) * base).epsilon(1e-10));
  }
}

TEST_CASE("exhaustive budget guard") {
  const auto circle = imc::generate_circle(1.0, 200);
  const imc::EnergySpec spec(1, 2, 3, 8.0);
  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;
  config.budget = 1e5;  // 200^3 = 8e6 exceeds this
  try {
    imc::energy_exhaustive(circle, spec, config);
    FAIL("expected budget refusal");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("monte_carlo") != std::string::npos);
  }
}

TEST_CASE("diameter split consistency") {
  const auto circle = imc::generate_circle(1.0, 60);
  const imc::EnergySpec spec(1, 2, 2, 3.0);
  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;
  config.lambda = 0.8;
  const auto est = imc::energy_exhaustive(circle, spec, config);
  REQUIRE(est.below_lambda.has_value());
  REQUIRE(est.above_lambda.has_value());
  CHECK(est.value == *est.below_lambda + *est.above_lambda);
  CHECK(*est.below_lambda >= 0.0);
  CHECK(*est.above_lambda >= 0.0);
  // DC_k <= 1/diam <= 1/lambda on the far part.
  const double cap = std::pow(0.8, -spec.p) *
                     std::pow(circle.total_weight(), spec.k);
  CHECK(*est.above_lambda <= cap);

  // Monte Carlo split adds up exactly as well.
  imc::EstimatorConfig mc;
  mc.method = imc::EstimatorConfig::Method::MonteCarlo;
  mc.lambda = 0.8;
  mc.samples = 20000;
  mc.seed = 9;
  const auto mc_est = imc::energy_monte_carlo(circle, spec, mc);
  CHECK(mc_est.value == *mc_est.below_lambda + *mc_est.above_lambda);
}

TEST_CASE("DC times diameter stays below one") {
  imc::RngStream rng(17, 0);
  const auto sphere = imc::generate_sphere(1.0, 300);
  for (int t = 0; t < 2000; ++t) {
    std::vector<int> idx(4);
    for (int& i : idx) i = static_cast<int>(rng.index(sphere.size()));
    const imc::PointTuple tuple = sphere.tuple(idx);
    const double dc = imc::discrete_curvature(tuple);
    REQUIRE(dc * imc::diameter(tuple) <= 1.0 + 1e-12);
  }
}

TEST_CASE("monte carlo agrees with exhaustive and is deterministic") {
  const auto circle = imc::generate_circle(1.0, 25);
  const imc::EnergySpec spec(1, 2, 2, 3.0);
  imc::EstimatorConfig exact;
  exact.method = imc::EstimatorConfig::Method::Exhaustive;
  const double reference = imc::energy_exhaustive(circle, spec, exact).value;

  imc::EstimatorConfig mc;
  mc.method = imc::EstimatorConfig::Method::MonteCarlo;
  mc.samples = 100000;
  mc.seed = 42;
  const auto est = imc::energy_monte_carlo(circle, spec, mc);
  CHECK(std::abs(est.value - reference) <= 3.0 * est.std_error);
  CHECK(est.std_error > 0.0);

  // Bit-identical across worker counts.
  for (int workers : {1, 2, 8}) {
    mc.workers = workers;
    const auto again = imc::energy_monte_carlo(circle, spec, mc);
    REQUIRE(again.value == est.value);
    REQUIRE(again.std_error == est.std_error);
  }

  // Affine data: 0 +- 0.
  const auto segment = dyadic_segment(25);
  mc.samples = 5000;
  const auto flat = imc::energy_monte_carlo(segment, spec, mc);
  CHECK(flat.value == 0.0);
  CHECK(flat.std_error == 0.0);
}

TEST_CASE("monte carlo is unbiased across pooled seeds") {
  const auto circle = imc::generate_circle(1.0, 25);
  const imc::EnergySpec spec(1, 2, 2, 3.0);
  imc::EstimatorConfig exact;
  exact.method = imc::EstimatorConfig::Method::Exhaustive;
  const double reference = imc::energy_exhaustive(circle, spec, exact).value;

  imc::EstimatorConfig mc;
  mc.method = imc::EstimatorConfig::Method::MonteCarlo;
  mc.samples = 10000;
  double sum = 0.0, sum_var = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    mc.seed = 1000 + s;
    const auto est = imc::energy_monte_carlo(circle, spec, mc);
    sum += est.value;
    sum_var += est.std_error * est.std_error;
  }
  const double pooled_mean = sum / seeds;
  const double pooled_se = std::sqrt(sum_var) / seeds;
  CHECK(std::abs(pooled_mean - reference) <= 3.0 * pooled_se);
}

TEST_CASE("second difference functional") {
  // Affine graphs have vanishing second differences.
  imc::ScalarProfile affine{"affine",
                            [](const Eigen::VectorXd& x) { return 0.25 + 0.5 * x[0]; },
                            [](const Eigen::VectorXd& x) {
                              Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
                              g[0] = 0.5;
                              return g;
                            }};
  const imc::EnergySpec spec(1, 2, 3, 8.0);
  const auto flat_patch = imc::make_patch(affine, 1, 2, 1.0, 32);
  CHECK(imc::second_difference_functional(flat_patch, spec) == 0.0);

  // f(x) = x^2/2 on m = 1: the integrand collapses to |w|^{k-2}; for k = 3 the
  // continuum value over the admissible (y, w) region is 2 delta^3 / 3,
  // independently of p.
  imc::ScalarProfile quad{"quad",
                          [](const Eigen::VectorXd& x) { return 0.5 * x[0] * x[0]; },
                          [](const Eigen::VectorXd& x) {
                            Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
                            g[0] = x[0];
                            return g;
                          }};
  const auto quad_patch = imc::make_patch(quad, 1, 2, 1.0, 256, /*normalize=*/false);
  const double value = imc::second_difference_functional(quad_patch, spec);
  CHECK(value == Approx(2.0 / 3.0).epsilon(0.01));
  const imc::EnergySpec spec_p2(1, 2, 3, 2.5);
  CHECK(imc::second_difference_functional(quad_patch, spec_p2) ==
        Approx(2.0 / 3.0).epsilon(0.01));

  // Exact pair bijection with the Besov form: besov(sigma~) equals
  // 2^{-(m + sigma~ p)} times the functional on the same grid.
  const auto cusp = imc::graph_alpha_patch(1.9, 1.0, 1, 2, 48);
  const double sigma = imc::besov_exponent(spec);
  const double besov =
      imc::besov_second_difference(imc::patch_values(cusp), sigma, spec.p);
  const double functional = imc::second_difference_functional(cusp, spec);
  CHECK(besov == Approx(std::pow(2.0, -(1.0 + sigma * spec.p)) * functional)
                     .epsilon(1e-12));
}

TEST_CASE("second difference functional diverges below the threshold") {
  // alpha = 1.3 < alpha* = 1.625 on the pure-cusp window: the functional
  // grows without bound as h -> 0, in step with the Gagliardo divergence.
  const imc::EnergySpec spec(1, 2, 3, 8.0);
  double prev = 0.0;
  for (int res : {16, 32, 64, 128}) {
    const auto patch = imc::make_patch(imc::alpha_cusp_profile(1.3, 1.0), 1, 2,
                                       0.5, res);
    const double value = imc::second_difference_functional(patch, spec);
    if (prev > 0.0) REQUIRE(value >= 1.5 * prev);
    prev = value;
  }
}

TEST_CASE("omega sampler") {
  Eigen::VectorXd w1(1);
  w1 << 1.0;
  CHECK(imc::omega_sampler(w1, 2, 10, 0).value == 1.0);

  // m = 1, k = 3 closed form: measure is |w1|.
  for (double r : {0.5, 1.0, 2.0}) {
    Eigen::VectorXd w(1);
    w << r;
    const auto est = imc::omega_sampler(w, 3, 200000, 7);
    CHECK(est.value == Approx(r).epsilon(0.05));
    CHECK(est.std_error > 0.0);
  }

  // Scaling in |w1|: factor 2^{m(k-2)} between radii 1 and 2 (m = 2, k = 3).
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 2.0;
  const auto at1 = imc::omega_sampler(a, 3, 200000, 11);
  const auto at2 = imc::omega_sampler(b, 3, 200000, 12);
  CHECK(at2.value == Approx(4.0 * at1.value).epsilon(0.05));

  // Determinism.
  const auto again = imc::omega_sampler(a, 3, 200000, 11);
  CHECK(again.value == at1.value);
}

TEST_CASE("estimator config validation") {
  imc::EstimatorConfig bad;
  bad.lambda = 2.0;
  bad.rho = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  imc::EstimatorConfig bad2;
  bad2.samples = 0;
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  imc::EstimatorConfig ok;
  ok.lambda = 0.5;
  ok.rho = 1.0;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("estimate JSON has the contract fields") {
  const auto circle = imc::generate_circle(1.0, 20);
  const imc::EnergySpec spec(1, 2, 2, 3.0);
  imc::EstimatorConfig mc;
  mc.samples = 2000;
  mc.seed = 5;
  mc.lambda = 0.5;
  mc.rho = 1.0;
  const auto est = imc::energy_monte_carlo(circle, spec, mc);
  const auto j = imc::to_json(est);
  for (const char* key : {"value", "stderr", "tuple_count", "below_lambda",
                          "above_lambda", "spec", "config"})
    REQUIRE(j.contains(key));
  for (const char* key : {"m", "n", "k", "p", "s"}) REQUIRE(j["spec"].contains(key));
  for (const char* key : {"method", "samples", "seed", "lambda", "rho",
                          "sup_candidates"})
    REQUIRE(j["config"].contains(key));
  CHECK(j["config"]["method"] == "monte_carlo");
  CHECK(j["spec"]["s"].get<double>() == Approx(2.0 / 3.0));
}
