#pragma once

// Experiment orchestration: the refinement study behind the finite-energy /
// Sobolev-graph characterization, the inequality suites with recorded
// empirical constants, scaling checks, seminorm equivalence classification,
// and Monte Carlo consistency. Reports carry the fully resolved config and a
// verdict list where every verdict cites the numeric rule it applied.

#include "imc/beta.hpp"
#include "imc/energy.hpp"
#include "imc/geometry.hpp"
#include "imc/graph_patch.hpp"
#include "imc/manifold.hpp"
#include "imc/rng.hpp"
#include "imc/seminorm.hpp"
#include "imc/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace imc {

// Growth-exponent thresholds: least-squares slope of log(value) against
// log(1/h). Near-threshold fixtures converge too slowly for a binary call,
// so the gap band is reported as inconclusive rather than guessed.
inline constexpr double kStableSlope = 0.3;
inline constexpr double kDivergentSlope = 0.8;

inline double fit_loglog_slope(const std::vector<double>& h,
                               const std::vector<double>& values) {
  if (h.size() != values.size() || h.size() < 2)
    throw std::invalid_argument("fit_loglog_slope: need matching series, >= 2 points");
  const std::size_t count = h.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> xs(count), ys(count);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = std::log(1.0 / h[i]);
    ys[i] = std::log(std::max(values[i], 1e-300));
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    var += (xs[i] - mx) * (xs[i] - mx);
  }
  return cov / var;
}

inline std::string classify_slope(double slope) {
  if (std::abs(slope) < kStableSlope) return "stable";
  if (slope > kDivergentSlope) return "divergent";
  return "inconclusive";
}

struct ExperimentConfig {
  std::string experiment;

  // Energy parameters (EnergySpec is built on demand).
  int m = 1;
  int n = 2;
  int k = 3;
  double p = 8.0;

  // Fixture parameters.
  std::string shape = "graph_alpha";
  std::vector<double> alphas;
  double delta = 1.0;
  std::vector<int> resolutions;  // grid counts, h = delta / resolution
  double margin = 0.15;
  int smooth_count = 3;
  int sphere_count = 1000;
  int graph_resolution = 64;
  int curve_count = 25;
  long tuples = 10000;
  long chain_tuples = 300;
  int seeds = 20;
  std::vector<double> scale_factors{0.5, 2.0, 10.0};
  std::vector<std::pair<int, int>> omega_mk{{1, 3}, {2, 3}};
  std::vector<double> omega_radii{0.5, 1.0, 2.0};
  long omega_samples = 200000;

  EstimatorConfig estimator;
  std::string output;

  EnergySpec energy_spec() const { return {m, n, k, p}; }

  void require_resolutions(std::size_t minimum = 3) const {
    if (resolutions.size() < minimum)
      throw std::invalid_argument("config: need at least " +
                                  std::to_string(minimum) + " resolutions");
    for (std::size_t i = 0; i < resolutions.size(); ++i)
      if (resolutions[i] < 1 ||
          (i > 0 && resolutions[i] <= resolutions[i - 1]))
        throw std::invalid_argument(
            "config: resolutions must be strictly increasing node counts");
  }
};

struct TableRow {
  std::string group;     // fixture member, e.g. "alpha=1.3" or "sphere"
  double h = 0.0;        // 0 when not a refinement row
  std::string quantity;
  double value = 0.0;
  double std_error = 0.0;
};

struct ExponentFit {
  std::string group;
  std::string quantity;
  double slope = 0.0;
  std::string classification;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string rule;  // the numeric rule this verdict applied
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config_echo;
  std::vector<TableRow> table;
  std::vector<ExponentFit> exponents;
  std::vector<Verdict> verdicts;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::string timestamp;

  bool passed() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Config and report JSON.

inline std::string sup_candidates_name(const SupCandidates& sc) {
  switch (sc.mode) {
    case SupCandidates::Mode::All: return "all";
    case SupCandidates::Mode::Subsample:
      return "subsample(" + std::to_string(sc.count) + ")";
    case SupCandidates::Mode::Auto: return "auto";
  }
  return "auto";
}

inline SupCandidates sup_candidates_from_name(const std::string& name) {
  if (name == "all") return SupCandidates::all();
  if (name == "auto" || name.empty()) return {};
  if (name.rfind("subsample(", 0) == 0 && name.back() == ')')
    return SupCandidates::subsample(std::stoi(name.substr(10)));
  throw std::invalid_argument("unknown sup_candidates '" + name + "'");
}

inline nlohmann::json estimator_to_json(const EstimatorConfig& c) {
  nlohmann::json j;
  j["method"] = c.method == EstimatorConfig::Method::Exhaustive ? "exhaustive"
                                                                : "monte_carlo";
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["lambda"] = c.lambda ? nlohmann::json(*c.lambda) : nlohmann::json(nullptr);
  j["rho"] = c.rho ? nlohmann::json(*c.rho) : nlohmann::json(nullptr);
  j["sup_candidates"] = sup_candidates_name(c.sup_candidates);
  j["workers"] = c.workers;
  j["budget"] = c.budget;
  return j;
}

inline EstimatorConfig estimator_from_json(const nlohmann::json& j) {
  EstimatorConfig c;
  const std::string method = j.value("method", "monte_carlo");
  if (method == "exhaustive")
    c.method = EstimatorConfig::Method::Exhaustive;
  else if (method == "monte_carlo" || method == "mc")
    c.method = EstimatorConfig::Method::MonteCarlo;
  else
    throw std::invalid_argument("unknown estimator method '" + method + "'");
  c.samples = j.value("samples", c.samples);
  c.seed = j.value("seed", c.seed);
  if (j.contains("lambda") && !j["lambda"].is_null())
    c.lambda = j["lambda"].get<double>();
  if (j.contains("rho") && !j["rho"].is_null()) c.rho = j["rho"].get<double>();
  c.sup_candidates = sup_candidates_from_name(j.value("sup_candidates", "auto"));
  c.workers = j.value("workers", c.workers);
  c.budget = j.value("budget", c.budget);
  c.validate();
  return c;
}

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  j["spec"] = {{"m", c.m}, {"n", c.n}, {"k", c.k}, {"p", c.p}};
  nlohmann::json fixture;
  fixture["shape"] = c.shape;
  fixture["alphas"] = c.alphas;
  fixture["delta"] = c.delta;
  fixture["resolutions"] = c.resolutions;
  fixture["margin"] = c.margin;
  fixture["smooth_count"] = c.smooth_count;
  fixture["sphere_count"] = c.sphere_count;
  fixture["graph_resolution"] = c.graph_resolution;
  fixture["curve_count"] = c.curve_count;
  fixture["tuples"] = c.tuples;
  fixture["chain_tuples"] = c.chain_tuples;
  fixture["seeds"] = c.seeds;
  fixture["scale_factors"] = c.scale_factors;
  fixture["omega_mk"] = c.omega_mk;
  fixture["omega_radii"] = c.omega_radii;
  fixture["omega_samples"] = c.omega_samples;
  j["fixture"] = fixture;
  j["estimator"] = estimator_to_json(c.estimator);
  j["output"] = c.output;
  return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = j.value("experiment", "");
  if (j.contains("spec")) {
    const auto& s = j["spec"];
    c.m = s.value("m", c.m);
    c.n = s.value("n", c.n);
    c.k = s.value("k", c.k);
    c.p = s.value("p", c.p);
  }
  if (j.contains("fixture")) {
    const auto& f = j["fixture"];
    c.shape = f.value("shape", c.shape);
    c.alphas = f.value("alphas", c.alphas);
    c.delta = f.value("delta", c.delta);
    c.resolutions = f.value("resolutions", c.resolutions);
    c.margin = f.value("margin", c.margin);
    c.smooth_count = f.value("smooth_count", c.smooth_count);
    c.sphere_count = f.value("sphere_count", c.sphere_count);
    c.graph_resolution = f.value("graph_resolution", c.graph_resolution);
    c.curve_count = f.value("curve_count", c.curve_count);
    c.tuples = f.value("tuples", c.tuples);
    c.chain_tuples = f.value("chain_tuples", c.chain_tuples);
    c.seeds = f.value("seeds", c.seeds);
    c.scale_factors = f.value("scale_factors", c.scale_factors);
    if (f.contains("omega_mk")) {
      c.omega_mk.clear();
      for (const auto& pair : f["omega_mk"])
        c.omega_mk.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
    c.omega_radii = f.value("omega_radii", c.omega_radii);
    c.omega_samples = f.value("omega_samples", c.omega_samples);
  }
  if (j.contains("estimator")) c.estimator = estimator_from_json(j["estimator"]);
  c.output = j.value("output", c.output);
  return c;
}

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["config"] = r.config_echo;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : r.table)
    table.push_back({{"group", row.group},
                     {"h", row.h},
                     {"quantity", row.quantity},
                     {"value", row.value},
                     {"stderr", row.std_error}});
  j["table"] = table;
  nlohmann::json exps = nlohmann::json::array();
  for (const auto& e : r.exponents)
    exps.push_back({{"group", e.group},
                    {"quantity", e.quantity},
                    {"slope", e.slope},
                    {"classification", e.classification}});
  j["exponents"] = exps;
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"rule", v.rule}});
  j["verdicts"] = verdicts;
  j["environment"] = {{"seed", r.seed},
                      {"version", r.version},
                      {"timestamp", r.timestamp}};
  return j;
}

/// Tidy CSV of the per-resolution table: one row per (group, h, quantity).
inline std::string report_to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "group,h,quantity,value,stderr\n";
  for (const auto& row : r.table)
    out << row.group << "," << detail::format_double(row.h) << ","
        << row.quantity << "," << detail::format_double(row.value) << ","
        << detail::format_double(row.std_error) << "\n";
  return out.str();
}

namespace detail {

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ExperimentReport new_report(const ExperimentConfig& config) {
  ExperimentReport report;
  report.experiment = config.experiment;
  report.config_echo = experiment_config_to_json(config);
  report.seed = config.estimator.seed;
  report.timestamp = iso_timestamp();
  return report;
}

inline std::string group_of_alpha(double alpha) {
  std::ostringstream os;
  os << "alpha=" << alpha;
  return os.str();
}

inline EnergyEstimate estimate_energy(const SampledManifold& manifold,
                                      const EnergySpec& spec,
                                      const EstimatorConfig& config) {
  if (config.method == EstimatorConfig::Method::Exhaustive)
    return energy_exhaustive(manifold, spec, config);
  return energy_monte_carlo(manifold, spec, config);
}

// Distinct random indices from one stream; coincident points are a null set
// but distinct tuples keep the fixtures informative.
inline std::vector<int> draw_distinct(RngStream& rng, int count, int total) {
  std::vector<int> idx;
  idx.reserve(count);
  while (static_cast<int>(idx.size()) < count) {
    const int cand = static_cast<int>(rng.index(static_cast<std::size_t>(total)));
    if (std::find(idx.begin(), idx.end(), cand) == idx.end())
      idx.push_back(cand);
  }
  return idx;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Characterization: refinement study of E_p^k and the Gagliardo seminorm of
// Df across the f_alpha family straddling alpha*.

inline ExperimentReport run_characterization(const ExperimentConfig& config) {
  const EnergySpec spec = config.energy_spec();
  config.require_resolutions();
  if (config.shape != "graph_alpha")
    throw std::invalid_argument("characterization: fixture must be graph_alpha");
  const double alpha_star = alpha_membership_threshold(spec.m, spec.s, spec.p);
  bool has_low = false, has_high = false;
  for (double a : config.alphas) {
    if (a < alpha_star - config.margin) has_low = true;
    if (a > alpha_star + config.margin) has_high = true;
  }
  if (!has_low || !has_high)
    throw std::invalid_argument(
        "characterization: alpha list must straddle alpha* = " +
        std::to_string(alpha_star) + " by margin " + std::to_string(config.margin));

  ExperimentReport report = detail::new_report(config);
  bool all_pass = true;
  // Membership at the cusp is local: evaluate on the inner disc D_{delta/2},
  // where the cutoff is identically 1. The cutoff annulus otherwise
  // contributes an h-stable bulk that masks the local divergence.
  const double eval_delta = config.delta / 2.0;
  for (double alpha : config.alphas) {
    const std::string group = detail::group_of_alpha(alpha);
    std::vector<double> hs, energies, seminorms;
    for (int res : config.resolutions) {
      const GraphPatch patch = make_patch(alpha_cusp_profile(alpha, config.delta),
                                          spec.m, spec.n, eval_delta, res);
      const SampledManifold manifold = graph_embed(patch);
      const EnergyEstimate energy =
          detail::estimate_energy(manifold, spec, config.estimator);
      const double gag = gagliardo_seminorm(patch_derivative(patch), spec.s,
                                            spec.p, config.estimator.workers);
      const double h = patch.spacing();
      hs.push_back(h);
      energies.push_back(energy.value);
      seminorms.push_back(gag);
      report.table.push_back({group, h, "energy", energy.value, energy.std_error});
      report.table.push_back({group, h, "gagliardo", gag, 0.0});
    }
    const double slope_e = fit_loglog_slope(hs, energies);
    const double slope_g = fit_loglog_slope(hs, seminorms);
    report.exponents.push_back({group, "energy", slope_e, classify_slope(slope_e)});
    report.exponents.push_back({group, "gagliardo", slope_g, classify_slope(slope_g)});

    std::ostringstream rule;
    if (alpha > alpha_star + config.margin) {
      const bool ok = classify_slope(slope_e) == "stable" &&
                      classify_slope(slope_g) == "stable";
      rule << "alpha=" << alpha << " > alpha*+margin=" << alpha_star + config.margin
           << ": require |slope| < " << kStableSlope
           << " for energy and gagliardo; got " << slope_e << ", " << slope_g;
      report.verdicts.push_back({group + " stable", ok, rule.str()});
      all_pass = all_pass && ok;
    } else if (alpha < alpha_star - config.margin) {
      const bool ok = classify_slope(slope_e) == "divergent" &&
                      classify_slope(slope_g) == "divergent";
      rule << "alpha=" << alpha << " < alpha*-margin=" << alpha_star - config.margin
           << ": require slope > " << kDivergentSlope
           << " for energy and gagliardo; got " << slope_e << ", " << slope_g;
      report.verdicts.push_back({group + " divergent", ok, rule.str()});
      all_pass = all_pass && ok;
    }
    // Alphas inside the margin band carry exponents only: inconclusive zone.
  }
  std::ostringstream rule;
  rule << "all out-of-band alphas classified correctly around alpha* = "
       << alpha_star << " (margin " << config.margin << ")";
  report.verdicts.push_back({"overall", all_pass, rule.str()});
  return report;
}

// ---------------------------------------------------------------------------
// Equivalence: Besov(f, 1+s) and Gagliardo(Df, s) refinement classifications
// must agree across the f_alpha family and smooth profiles.

inline ExperimentReport run_equivalence(const ExperimentConfig& config) {
  const EnergySpec spec = config.energy_spec();
  config.require_resolutions();
  const double sigma = besov_exponent(spec);

  struct Member {
    std::string name;
    ScalarProfile profile;
  };
  std::vector<Member> members;
  for (double alpha : config.alphas)
    members.push_back({detail::group_of_alpha(alpha),
                       alpha_cusp_profile(alpha, config.delta)});
  auto smooth = smooth_profiles(spec.m);
  const int smooth_take =
      std::min<int>(config.smooth_count, static_cast<int>(smooth.size()));
  for (int i = 0; i < smooth_take; ++i)
    members.push_back({smooth[i].name, smooth[i]});
  if (members.empty())
    throw std::invalid_argument("equivalence: empty test family");

  ExperimentReport report = detail::new_report(config);
  bool all_agree = true;
  // Same inner-disc evaluation window as the characterization study.
  const double eval_delta = config.delta / 2.0;
  for (const auto& member : members) {
    std::vector<double> hs, besov, gagliardo;
    for (int res : config.resolutions) {
      const GraphPatch patch =
          make_patch(member.profile, spec.m, spec.n, eval_delta, res);
      const double b = besov_second_difference(patch_values(patch), sigma,
                                               spec.p, config.estimator.workers);
      const double g = gagliardo_seminorm(patch_derivative(patch), spec.s,
                                          spec.p, config.estimator.workers);
      hs.push_back(patch.spacing());
      besov.push_back(b);
      gagliardo.push_back(g);
      report.table.push_back({member.name, patch.spacing(), "besov", b, 0.0});
      report.table.push_back({member.name, patch.spacing(), "gagliardo", g, 0.0});
    }
    const double slope_b = fit_loglog_slope(hs, besov);
    const double slope_g = fit_loglog_slope(hs, gagliardo);
    const std::string class_b = classify_slope(slope_b);
    const std::string class_g = classify_slope(slope_g);
    report.exponents.push_back({member.name, "besov", slope_b, class_b});
    report.exponents.push_back({member.name, "gagliardo", slope_g, class_g});
    const bool agree = class_b == class_g;
    std::ostringstream rule;
    rule << "classification agreement (stable |slope| < " << kStableSlope
         << ", divergent slope > " << kDivergentSlope << "): besov=" << class_b
         << " vs gagliardo=" << class_g;
    report.verdicts.push_back({member.name + " agreement", agree, rule.str()});
    all_agree = all_agree && agree;
  }
  report.verdicts.push_back(
      {"overall", all_agree,
       "Besov(1+s) and Gagliardo(Df, s) classifications agree on every member"});
  return report;
}

// ---------------------------------------------------------------------------
// Inequality suites with recorded empirical constants.

namespace detail {

struct RatioStats {
  double max_ratio = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  long violations = 0;  // lhs > tolerance while rhs == 0
  long counted = 0;
};

// H^{m+1}(simp T) <= C beta(x_0, diam T) diam^{m+1} over random tuples.
inline RatioStats simplex_beta_stats(const SampledManifold& manifold,
                                      long tuples, std::uint64_t seed) {
  RatioStats stats;
  RngStream rng(seed, 0x11);
  const int count = manifold.m() + 2;
  for (long t = 0; t < tuples; ++t) {
    const auto idx = draw_distinct(rng, count, manifold.size());
    const PointTuple tuple = manifold.tuple(idx);
    const double diam = diameter(tuple);
    if (diam == 0.0) continue;
    const double vol = simplex_volume(tuple);
    const double beta =
        beta_minmax(manifold, manifold.point(idx[0]), diam).beta;
    const double rhs = beta * pow_p(diam, manifold.m() + 1);
    ++stats.counted;
    if (rhs == 0.0) {
      if (vol > 1e-12 * pow_p(diam, manifold.m() + 1)) ++stats.violations;
      continue;
    }
    const double ratio = vol / rhs;
    stats.max_ratio = std::max(stats.max_ratio, ratio);
    stats.min_ratio = std::min(stats.min_ratio, ratio);
  }
  return stats;
}

// sup_curvature(T_k) <= C sup_{diam <= r <= 4rho} beta(x_0, r)/r.
inline RatioStats curvature_beta_chain_stats(const SampledManifold& manifold,
                                     const EnergySpec& spec,
                                     const EstimatorConfig& est, long tuples,
                                     std::uint64_t seed) {
  RatioStats stats;
  RngStream rng(seed, 0x22);
  const double rho = est.rho ? *est.rho : default_rho(manifold);
  for (long t = 0; t < tuples; ++t) {
    const auto idx = draw_distinct(rng, spec.k, manifold.size());
    const double lhs = sup_curvature(manifold, idx, spec, est);
    const PointTuple tuple = manifold.tuple(idx);
    double diam = diameter(tuple);
    if (diam == 0.0) continue;
    diam = std::min(diam, 4.0 * rho);
    std::vector<double> radii;
    for (double r = diam; r < 4.0 * rho; r *= 2.0) radii.push_back(r);
    radii.push_back(4.0 * rho);
    const auto profile = beta_profile(manifold, manifold.point(idx[0]), radii);
    const double rhs = profile.sup_ratio.back();
    ++stats.counted;
    if (rhs == 0.0) {
      if (lhs > 1e-12) ++stats.violations;
      continue;
    }
    const double ratio = lhs / rhs;
    stats.max_ratio = std::max(stats.max_ratio, ratio);
    stats.min_ratio = std::min(stats.min_ratio, ratio);
  }
  return stats;
}

}  // namespace detail

/// dc_beta: the simplex-volume/beta bound plus the sup-ratio chain on sphere
/// and smooth-graph fixtures. lower_bound: discrete E_p^k of embedded smooth
/// patches against the second-difference functional.
inline ExperimentReport run_inequality_suite(const ExperimentConfig& config) {
  ExperimentReport report = detail::new_report(config);
  const std::uint64_t seed = config.estimator.seed;

  if (config.experiment == "lower_bound") {
    const EnergySpec spec = config.energy_spec();
    auto profiles = smooth_profiles(spec.m);
    double min_ratio = std::numeric_limits<double>::infinity();
    long violations = 0;
    for (const auto& profile : profiles) {
      const GraphPatch patch = make_patch(profile, spec.m, spec.n, config.delta,
                                          config.graph_resolution);
      const SampledManifold manifold = graph_embed(patch);
      const EnergyEstimate energy =
          detail::estimate_energy(manifold, spec, config.estimator);
      const double functional =
          second_difference_functional(patch, spec, config.estimator.workers);
      report.table.push_back(
          {profile.name, patch.spacing(), "energy", energy.value, energy.std_error});
      report.table.push_back(
          {profile.name, patch.spacing(), "second_difference", functional, 0.0});
      if (functional > 0.0) {
        const double ratio = energy.value / functional;
        min_ratio = std::min(min_ratio, ratio);
        report.table.push_back({profile.name, patch.spacing(), "ratio", ratio, 0.0});
        if (!(ratio > 0.0)) ++violations;
      } else if (energy.value < 0.0) {
        ++violations;
      }
    }
    const bool ok = violations == 0 && min_ratio > 0.0 &&
                    std::isfinite(min_ratio);
    std::ostringstream rule;
    rule << "require min over smooth patches of E_p^k / second_difference > 0; "
            "recorded c~ = "
         << min_ratio << ", violations = " << violations;
    report.verdicts.push_back({"lower_bound", ok, rule.str()});
    return report;
  }

  // dc_beta: both fixtures, both inequalities.
  struct Fixture {
    std::string name;
    SampledManifold manifold;
    EnergySpec spec;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({"sphere", generate_sphere(1.0, config.sphere_count),
                      EnergySpec(2, 3, std::min(config.k, 4), std::max(config.p, 9.0))});
  {
    const auto smooth = smooth_profiles(config.m);
    const GraphPatch patch = make_patch(smooth[0], config.m, config.n,
                                        config.delta, config.graph_resolution);
    fixtures.push_back({"graph:" + smooth[0].name, graph_embed(patch),
                        config.energy_spec()});
  }

  bool all_ok = true;
  for (const auto& fixture : fixtures) {
    const auto simplex = detail::simplex_beta_stats(fixture.manifold,
                                                   config.tuples, seed);
    report.table.push_back(
        {fixture.name, 0.0, "simplex_beta_max_ratio", simplex.max_ratio, 0.0});
    report.table.push_back({fixture.name, 0.0, "simplex_beta_violations",
                            static_cast<double>(simplex.violations), 0.0});
    const bool simplex_ok = simplex.violations == 0 && simplex.max_ratio < 1e3;
    std::ostringstream simplex_rule;
    simplex_rule << "simplex volume <= C beta(x0,diam) diam^{m+1} on "
               << simplex.counted << " tuples: max ratio " << simplex.max_ratio
               << " < 1e3, violations " << simplex.violations << " == 0";
    report.verdicts.push_back(
        {fixture.name + " simplex_beta_bound", simplex_ok, simplex_rule.str()});

    const auto chain = detail::curvature_beta_chain_stats(
        fixture.manifold, fixture.spec, config.estimator, config.chain_tuples,
        seed);
    report.table.push_back(
        {fixture.name, 0.0, "curvature_beta_chain_max_ratio", chain.max_ratio, 0.0});
    const bool chain_ok = chain.violations == 0 && chain.max_ratio < 1e3;
    std::ostringstream chain_rule;
    chain_rule << "sup_curvature(T_k) <= C sup beta(x0,r)/r on " << chain.counted
               << " tuples: max ratio " << chain.max_ratio
               << " < 1e3, violations " << chain.violations << " == 0";
    report.verdicts.push_back(
        {fixture.name + " curvature_beta_chain", chain_ok, chain_rule.str()});
    all_ok = all_ok && simplex_ok && chain_ok;
  }
  report.verdicts.push_back({"overall", all_ok,
                             "all inequality checks hold with finite recorded constants"});
  return report;
}

// ---------------------------------------------------------------------------
// Scaling suite: exact energy homogeneity, DC homogeneity, Omega regression.

inline ExperimentReport run_scaling_suite(const ExperimentConfig& config) {
  ExperimentReport report = detail::new_report(config);
  bool all_ok = true;
  const bool omega_only = config.experiment == "omega_scaling";

  if (!omega_only) {
    const EnergySpec spec = config.energy_spec();
    SampledManifold base = [&]() -> SampledManifold {
      if (config.shape == "circle")
        return generate_circle(1.0, config.curve_count);
      if (config.shape == "sphere")
        return generate_sphere(1.0, config.sphere_count);
      const auto smooth = smooth_profiles(spec.m);
      return graph_embed(make_patch(smooth[0], spec.m, spec.n, config.delta,
                                    config.graph_resolution));
    }();
    const EnergyEstimate base_energy =
        detail::estimate_energy(base, spec, config.estimator);
    report.table.push_back({"base", 0.0, "energy", base_energy.value,
                            base_energy.std_error});
    const double expo = spec.m * spec.k - spec.p;
    for (double lambda : config.scale_factors) {
      const EnergyEstimate scaled =
          detail::estimate_energy(base.scaled(lambda), spec, config.estimator);
      const double expected = std::pow(lambda, expo) * base_energy.value;
      const double rel =
          expected == 0.0 ? std::abs(scaled.value)
                          : std::abs(scaled.value - expected) / std::abs(expected);
      report.table.push_back({"lambda=" + std::to_string(lambda), 0.0,
                              "energy_rel_error", rel, 0.0});
      const bool ok = rel <= 1e-10;
      std::ostringstream rule;
      rule << "E(lambda Sigma) = lambda^{mk-p} E(Sigma) with mk-p = " << expo
           << ": relative error " << rel << " <= 1e-10";
      report.verdicts.push_back(
          {"energy scaling lambda=" + std::to_string(lambda), ok, rule.str()});
      all_ok = all_ok && ok;
    }

    // DC homogeneity on random tuples: DC(lambda T) = DC(T) / lambda.
    RngStream rng(config.estimator.seed, 0x33);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const auto idx = detail::draw_distinct(rng, spec.m + 2, base.size());
      const PointTuple tuple = base.tuple(idx);
      const double dc = discrete_curvature(tuple);
      if (dc == 0.0) continue;
      for (double lambda : config.scale_factors) {
        const double scaled_dc = discrete_curvature(tuple.scaled(lambda));
        worst = std::max(worst, std::abs(scaled_dc * lambda - dc) / dc);
      }
    }
    report.table.push_back({"dc", 0.0, "dc_homogeneity_rel_error", worst, 0.0});
    const bool dc_ok = worst <= 1e-12;
    std::ostringstream dc_rule;
    dc_rule << "DC(lambda T) = lambda^{-1} DC(T): worst relative error " << worst
            << " <= 1e-12";
    report.verdicts.push_back({"dc scaling", dc_ok, dc_rule.str()});
    all_ok = all_ok && dc_ok;
  }

  if (config.k == 2 && omega_only) {
    report.verdicts.push_back(
        {"omega", true,
         "k = 2: Omega is the empty product (measure 1); regression skipped"});
    return report;
  }

  for (const auto& [om, ok_] : config.omega_mk) {
    const int k = ok_;
    if (k == 2) {
      report.verdicts.push_back(
          {"omega m=" + std::to_string(om), true,
           "k = 2: Omega is the empty product (measure 1); skipped"});
      continue;
    }
    std::vector<double> logr, logv;
    for (double r : config.omega_radii) {
      Eigen::VectorXd w1 = Eigen::VectorXd::Zero(om);
      w1[0] = r;
      const OmegaEstimate est = omega_sampler(w1, k, config.omega_samples,
                                              config.estimator.seed,
                                              config.estimator.workers);
      report.table.push_back({"omega m=" + std::to_string(om) +
                                  " k=" + std::to_string(k),
                              r, "omega_measure", est.value, est.std_error});
      logr.push_back(std::log(r));
      logv.push_back(std::log(std::max(est.value, 1e-300)));
      if (om == 1 && k == 3) {
        // Closed form: two intervals of total length |w1|.
        const double rel = std::abs(est.value - r) / r;
        const bool ok = rel <= 0.05;
        std::ostringstream rule;
        rule << "m=1,k=3 closed form H(Omega) = |w1|: MC value " << est.value
             << " vs " << r << ", relative error " << rel << " <= 0.05";
        report.verdicts.push_back(
            {"omega closed form |w1|=" + std::to_string(r), ok, rule.str()});
        all_ok = all_ok && ok;
      }
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < logr.size(); ++i) {
      mx += logr[i];
      my += logv[i];
    }
    mx /= logr.size();
    my /= logr.size();
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < logr.size(); ++i) {
      cov += (logr[i] - mx) * (logv[i] - my);
      var += (logr[i] - mx) * (logr[i] - mx);
    }
    const double slope = cov / var;
    const double target = static_cast<double>(om) * (k - 2);
    report.exponents.push_back({"omega m=" + std::to_string(om) +
                                    " k=" + std::to_string(k),
                                "omega_measure", slope, ""});
    const bool ok = std::abs(slope - target) <= 0.2;
    std::ostringstream rule;
    rule << "regression exponent " << slope << " within 0.2 of m(k-2) = "
         << target;
    report.verdicts.push_back(
        {"omega exponent m=" + std::to_string(om) + " k=" + std::to_string(k),
         ok, rule.str()});
    all_ok = all_ok && ok;
  }
  report.verdicts.push_back({"overall", all_ok, "all scaling checks hold"});
  return report;
}

// ---------------------------------------------------------------------------
// Monte Carlo consistency: agreement with the exhaustive sum within 3 sigma
// per seed, and bit-identical results across worker counts.

inline ExperimentReport run_mc_consistency(const ExperimentConfig& config) {
  const EnergySpec spec = config.energy_spec();
  ExperimentReport report = detail::new_report(config);

  const SampledManifold curve = generate_circle(1.0, config.curve_count);
  EstimatorConfig exact = config.estimator;
  exact.method = EstimatorConfig::Method::Exhaustive;
  const EnergyEstimate reference = energy_exhaustive(curve, spec, exact);
  report.table.push_back({"exhaustive", 0.0, "energy", reference.value, 0.0});

  bool all_within = true;
  double worst_z = 0.0;
  for (int s = 0; s < config.seeds; ++s) {
    EstimatorConfig mc = config.estimator;
    mc.method = EstimatorConfig::Method::MonteCarlo;
    mc.seed = config.estimator.seed + static_cast<std::uint64_t>(s);
    const EnergyEstimate est = energy_monte_carlo(curve, spec, mc);
    const double z = est.std_error > 0.0
                         ? std::abs(est.value - reference.value) / est.std_error
                         : (est.value == reference.value ? 0.0 : 1e300);
    worst_z = std::max(worst_z, z);
    report.table.push_back({"seed=" + std::to_string(mc.seed), 0.0, "energy",
                            est.value, est.std_error});
    all_within = all_within && z <= 3.0;
  }
  std::ostringstream mc_rule;
  mc_rule << config.seeds << " seeds x " << config.estimator.samples
          << " draws: every |MC - exhaustive| <= 3 stderr; worst z = " << worst_z;
  report.verdicts.push_back({"mc within 3 sigma", all_within, mc_rule.str()});

  bool identical = true;
  EstimatorConfig mc = config.estimator;
  mc.method = EstimatorConfig::Method::MonteCarlo;
  mc.workers = 1;
  const EnergyEstimate one = energy_monte_carlo(curve, spec, mc);
  for (int workers : {2, 8}) {
    mc.workers = workers;
    const EnergyEstimate est = energy_monte_carlo(curve, spec, mc);
    identical = identical && est.value == one.value &&
                est.std_error == one.std_error;
  }
  report.verdicts.push_back(
      {"determinism", identical,
       "same seed across 1/2/8 workers produces bit-identical value and stderr"});
  report.verdicts.push_back({"overall", all_within && identical,
                             "MC consistency and determinism both hold"});
  return report;
}

/// Dispatch on config.experiment.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.experiment == "characterization") return run_characterization(config);
  if (config.experiment == "equivalence") return run_equivalence(config);
  if (config.experiment == "dc_beta" || config.experiment == "lower_bound")
    return run_inequality_suite(config);
  if (config.experiment == "scaling" || config.experiment == "omega_scaling")
    return run_scaling_suite(config);
  if (config.experiment == "mc_consistency") return run_mc_consistency(config);
  throw std::invalid_argument("unknown experiment '" + config.experiment + "'");
}

}  // namespace imc
