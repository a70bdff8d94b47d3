// Acceptance suite: one criterion per entry, one PASS/FAIL line each.
// Exit code 0 iff every criterion holds. An optional argv[1] substring
// filters which criteria run.

#include "imc/beta.hpp"
#include "imc/energy.hpp"
#include "imc/experiment.hpp"
#include "imc/geometry.hpp"
#include "imc/graph_patch.hpp"
#include "imc/manifold.hpp"
#include "imc/rng.hpp"
#include "imc/seminorm.hpp"
#include "support/orientation_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Checker {
  std::vector<std::string> failures;
  std::string notes;

  void require(bool cond, const std::string& msg) {
    if (!cond) failures.push_back(msg);
  }
  void note(const std::string& text) {
    if (!notes.empty()) notes += "; ";
    notes += text;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

imc::PointTuple random_simplex(imc::RngStream& rng, int count, int n) {
  std::vector<double> flat(static_cast<std::size_t>(count) * n);
  for (double& c : flat) c = rng.uniform(-1.0, 1.0);
  return {std::move(flat), count, n};
}

// Conditioning filter: the 1e-8 agreement contract applies to nondegenerate
// simplices (Hadamard ratio above 1e-3).
bool nondegerate_enough(const imc::PointTuple& t) {
  double edge_product = 1.0;
  for (int i = 1; i < t.count(); ++i)
    edge_product *= (t.point(i) - t.point(0)).norm();
  double fact = 1.0;
  for (int i = 2; i <= t.count() - 1; ++i) fact *= i;
  return imc::simplex_volume(t) > 1e-3 * edge_product / fact;
}

imc::SampledManifold dyadic_segment(int count) {
  std::vector<double> pts, ws;
  for (int i = 0; i < count; ++i) {
    pts.push_back(0.25 * i);
    pts.push_back(0.0);
    ws.push_back(0.25);
  }
  return {1, 2, std::move(pts), std::move(ws), "segment"};
}

// ---------------------------------------------------------------------------

void criterion_geometry_oracle(Checker& check) {
  imc::RngStream rng(101, 0);
  int done = 0;
  double worst = 0.0;
  while (done < 10000) {
    const int d = 1 + static_cast<int>(rng.index(5));          // d <= 5
    const int n = d + static_cast<int>(rng.index(static_cast<std::size_t>(9 - d)));
    const auto t = random_simplex(rng, d + 1, n);
    if (!nondegerate_enough(t)) continue;
    ++done;
    const double gram = imc::simplex_volume(t);
    const double cm = imc::cayley_menger_volume(t);
    const double rel = std::abs(gram - cm) / std::max(gram, cm);
    worst = std::max(worst, rel);
    if (rel > 1e-8) {
      check.require(false, "relative error " + fmt(rel) + " > 1e-8");
      return;
    }
  }
  check.note("worst relative error " + fmt(worst) + " over 10^4 simplices");
}

void criterion_circle_identity(Checker& check) {
  const auto circle = imc::generate_circle(1.0, 200);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i)
    for (int j = i + 1; j < 200; ++j)
      for (int l = j + 1; l < 200; ++l)
        worst = std::max(worst,
                         std::abs(imc::menger_curvature(circle.point(i),
                                                        circle.point(j),
                                                        circle.point(l)) -
                                  1.0));
  check.require(worst <= 1e-9, "triple curvature deviation " + fmt(worst));
  check.note("max |c - 1| = " + fmt(worst));

  imc::EstimatorConfig config;
  config.method = imc::EstimatorConfig::Method::Exhaustive;
  const double expected = std::pow(2.0 * std::numbers::pi, 3);
  for (double p : {2.0, 8.0}) {
    const double mp =
        imc::curve_energy(circle, imc::CurveVariant::Mp, p, config).value;
    const double rel = std::abs(mp - expected) / expected;
    check.require(rel <= 0.02, "M_p at p=" + fmt(p) + " off by " + fmt(rel));
    check.note("M_" + fmt(p) + " = " + fmt(mp) + " (target " + fmt(expected) + ")");
  }
}

void criterion_comparison(Checker& check) {
  imc::RngStream rng(103, 0);
  for (long t = 0; t < 1000000; ++t) {
    const int n = 2 + static_cast<int>(rng.index(7));
    const auto triple = random_simplex(rng, 3, n);
    const double dc = imc::discrete_curvature(triple);
    const double c = imc::menger_curvature(triple.point(0), triple.point(1),
                                           triple.point(2));
    if (4.0 * dc > c + 1e-12) {
      check.require(false, "4 DC = " + fmt(4.0 * dc) + " > c = " + fmt(c));
      return;
    }
  }
  Eigen::VectorXd a(2), b(2), c(2);
  a << 0.0, 0.0;
  b << 1.0, 0.0;
  c << 0.5, std::sqrt(3.0) / 2.0;
  const double dc = imc::discrete_curvature(imc::PointTuple({a, b, c}));
  const double mc = imc::menger_curvature(a, b, c);
  check.require(std::abs(4.0 * dc - mc) <= 1e-12,
                "equilateral gap " + fmt(std::abs(4.0 * dc - mc)));
}

void criterion_homogeneity(Checker& check) {
  struct Case {
    int m, n, k;
    double p;
  };
  for (const Case& cs :
       {Case{1, 2, 2, 3.0}, Case{1, 2, 3, 8.0}, Case{2, 3, 4, 12.0}}) {
    const imc::SampledManifold base = cs.m == 1 ? imc::generate_circle(1.0, 40)
                                                : imc::generate_sphere(1.0, 40);
    const imc::EnergySpec spec(cs.m, cs.n, cs.k, cs.p);
    imc::EstimatorConfig config;
    config.method = imc::EstimatorConfig::Method::Exhaustive;
    const double reference = imc::energy_exhaustive(base, spec, config).value;
    for (double lambda : {0.5, 2.0, 10.0}) {
      const double scaled =
          imc::energy_exhaustive(base.scaled(lambda), spec, config).value;
      const double expected = std::pow(lambda, cs.m * cs.k - cs.p) * reference;
      const double rel = std::abs(scaled - expected) / std::abs(expected);
      check.require(rel <= 1e-10,
                    "(m,k,p)=(" + fmt(cs.m) + "," + fmt(cs.k) + "," + fmt(cs.p) +
                        ") lambda=" + fmt(lambda) + ": rel error " + fmt(rel));
    }
  }
}

void criterion_omega_scaling(Checker& check) {
  for (double r : {0.5, 1.0, 2.0}) {
    Eigen::VectorXd w(1);
    w << r;
    const auto est = imc::omega_sampler(w, 3, 200000, 105);
    const double rel = std::abs(est.value - r) / r;
    check.require(rel <= 0.05,
                  "closed form at |w1|=" + fmt(r) + ": rel error " + fmt(rel));
  }
  for (const auto& [m, k] : std::vector<std::pair<int, int>>{{1, 3}, {2, 3}}) {
    std::vector<double> logr, logv;
    for (double r : {0.5, 1.0, 2.0}) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
      w[0] = r;
      const auto est = imc::omega_sampler(w, k, 200000, 106);
      logr.push_back(std::log(r));
      logv.push_back(std::log(est.value));
    }
    const double mx = (logr[0] + logr[1] + logr[2]) / 3.0;
    const double my = (logv[0] + logv[1] + logv[2]) / 3.0;
    double cov = 0.0, var = 0.0;
    for (int i = 0; i < 3; ++i) {
      cov += (logr[i] - mx) * (logv[i] - my);
      var += (logr[i] - mx) * (logr[i] - mx);
    }
    const double slope = cov / var;
    const double target = static_cast<double>(m) * (k - 2);
    check.require(std::abs(slope - target) <= 0.2,
                  "omega exponent m=" + fmt(m) + ": slope " + fmt(slope));
    check.note("omega exponent m=" + fmt(m) + " k=" + fmt(k) + ": " + fmt(slope));
  }
}

void criterion_beta_suite(Checker& check) {
  // Affine data: beta is exactly zero.
  const auto segment = dyadic_segment(32);
  const auto affine_beta = imc::beta_minmax(segment, segment.point(10), 2.0);
  check.require(affine_beta.beta == 0.0,
                "affine beta = " + fmt(affine_beta.beta) + " != 0");

  // minmax <= pca on 10^3 queries.
  const auto sphere = imc::generate_sphere(1.0, 600);
  imc::RngStream rng(107, 0);
  for (int q = 0; q < 1000; ++q) {
    const Eigen::VectorXd x =
        sphere.point(static_cast<int>(rng.index(sphere.size())));
    const double r = rng.uniform(0.05, 1.2);
    const double mm = imc::beta_minmax(sphere, x, r).beta;
    const double pca = imc::beta_pca_bound(sphere, x, r).beta;
    if (mm > pca + 1e-9) {
      check.require(false, "minmax " + fmt(mm) + " > pca " + fmt(pca));
      return;
    }
  }

  // Dense-orientation oracle agreement on 100 queries across n <= 3 fixtures.
  const auto circle = imc::generate_circle(1.0, 400);
  const auto knot = imc::generate_torus_knot(2, 3, 2.0, 0.5, 400);
  double worst = 0.0;
  for (int q = 0; q < 100; ++q) {
    const imc::SampledManifold* fixture = nullptr;
    switch (q % 3) {
      case 0: fixture = &circle; break;
      case 1: fixture = &sphere; break;
      default: fixture = &knot; break;
    }
    const Eigen::VectorXd x =
        fixture->point(static_cast<int>(rng.index(fixture->size())));
    const double r = rng.uniform(0.2, 1.0);
    const double mine = imc::beta_minmax(*fixture, x, r).beta;
    const double oracle = imc_test::oracle_beta(*fixture, x, r);
    worst = std::max(worst, std::abs(mine - oracle));
    if (std::abs(mine - oracle) > 1e-3) {
      check.require(false, "oracle gap " + fmt(std::abs(mine - oracle)) +
                               " on fixture " + fixture->label());
      return;
    }
  }
  check.note("max |minmax - oracle| = " + fmt(worst));
}

void criterion_simplex_beta_bound(Checker& check) {
  imc::ExperimentConfig config;
  config.experiment = "dc_beta";
  config.m = 1;
  config.n = 2;
  config.k = 3;
  config.p = 8.0;
  config.sphere_count = 800;
  config.graph_resolution = 64;
  config.tuples = 5000;  // per fixture: 10^4 tuples total
  config.chain_tuples = 200;
  config.estimator.seed = 109;
  const auto report = imc::run_inequality_suite(config);
  check.require(report.passed(), "inequality suite failed");
  for (const auto& row : report.table) {
    if (row.quantity == "simplex_beta_max_ratio") {
      check.require(row.value < 1e3,
                    row.group + " empirical C = " + fmt(row.value) + " >= 1e3");
      check.note(row.group + " simplex/beta C = " + fmt(row.value));
    }
    if (row.quantity == "simplex_beta_violations")
      check.require(row.value == 0.0, row.group + " has violations");
    if (row.quantity == "curvature_beta_chain_max_ratio")
      check.note(row.group + " chain C = " + fmt(row.value));
  }
}

void criterion_lower_bound(Checker& check) {
  imc::ExperimentConfig config;
  config.experiment = "lower_bound";
  config.m = 1;
  config.n = 2;
  config.k = 3;
  config.p = 8.0;
  config.graph_resolution = 64;
  config.estimator.method = imc::EstimatorConfig::Method::Exhaustive;
  const auto report = imc::run_experiment(config);
  check.require(report.passed(), "lower bound suite failed");
  for (const auto& v : report.verdicts) check.note(v.rule);
}

void criterion_characterization(Checker& check) {
  {
    imc::ExperimentConfig config;
    config.experiment = "characterization";
    config.m = 1;
    config.n = 2;
    config.k = 3;
    config.p = 8.0;
    config.alphas = {1.3, 1.9};
    config.resolutions = {25, 50, 100, 200};
    config.estimator.method = imc::EstimatorConfig::Method::Exhaustive;
    const auto report = imc::run_characterization(config);
    check.require(report.passed(), "m=1 characterization failed");
    for (const auto& e : report.exponents)
      check.note("m=1 " + e.group + " " + e.quantity + " slope " + fmt(e.slope));
  }
  {
    imc::ExperimentConfig config;
    config.experiment = "characterization";
    config.m = 2;
    config.n = 3;
    config.k = 4;
    config.p = 16.0;
    config.alphas = {1.2, 1.8};
    config.resolutions = {6, 8, 10, 12};
    config.estimator.method = imc::EstimatorConfig::Method::Exhaustive;
    config.estimator.budget = 5e10;  // N^4 for these grids; enumerated as C(N,4)
    const auto report = imc::run_characterization(config);
    check.require(report.passed(), "m=2 characterization failed");
    for (const auto& e : report.exponents)
      check.note("m=2 " + e.group + " " + e.quantity + " slope " + fmt(e.slope));
  }
}

void criterion_equivalence(Checker& check) {
  imc::ExperimentConfig config;
  config.experiment = "equivalence";
  config.m = 1;
  config.n = 2;
  config.k = 3;
  config.p = 8.0;
  config.alphas = {1.3, 1.9};
  config.smooth_count = 3;
  config.resolutions = {32, 64, 128};
  const auto report = imc::run_equivalence(config);
  check.require(report.passed(), "equivalence classification disagreed");
  for (const auto& e : report.exponents)
    check.note(e.group + " " + e.quantity + ": " + e.classification);
}

void criterion_mc_consistency(Checker& check) {
  imc::ExperimentConfig config;
  config.experiment = "mc_consistency";
  config.m = 1;
  config.n = 2;
  config.k = 2;
  config.p = 3.0;
  config.curve_count = 25;
  config.seeds = 20;
  config.estimator.samples = 100000;
  config.estimator.seed = 7;
  const auto report = imc::run_mc_consistency(config);
  check.require(report.passed(), "MC consistency failed");
  for (const auto& v : report.verdicts) check.note(v.name + ": " + v.rule);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  struct Entry {
    const char* name;
    void (*run)(Checker&);
  };
  const std::vector<Entry> entries{
      {"1. geometry-oracle", criterion_geometry_oracle},
      {"2. circle-identity", criterion_circle_identity},
      {"3. comparison-inequality", criterion_comparison},
      {"4. homogeneity", criterion_homogeneity},
      {"5. omega-scaling", criterion_omega_scaling},
      {"6. beta-suite", criterion_beta_suite},
      {"7. simplex-beta-bound", criterion_simplex_beta_bound},
      {"8. lower-bound", criterion_lower_bound},
      {"9. characterization", criterion_characterization},
      {"10. equivalence", criterion_equivalence},
      {"11. mc-consistency", criterion_mc_consistency},
  };
  int failed = 0;
  for (const auto& entry : entries) {
    if (!filter.empty() && std::string(entry.name).find(filter) == std::string::npos)
      continue;
    Checker check;
    const auto start = std::chrono::steady_clock::now();
    try {
      entry.run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (check.failures.empty()) {
      std::printf("[PASS] %s (%.1f s)%s%s\n", entry.name, seconds,
                  check.notes.empty() ? "" : " -- ", check.notes.c_str());
    } else {
      ++failed;
      std::printf("[FAIL] %s (%.1f s)\n", entry.name, seconds);
      for (const auto& f : check.failures)
        std::printf("       %s\n", f.c_str());
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
