#pragma once

// Command-line front end. Subcommands: generate, compute-energy, beta,
// seminorm, verify, report. Exit codes: 0 success, 1 verdict FAIL,
// 2 usage/config error.

#include "imc/beta.hpp"
#include "imc/energy.hpp"
#include "imc/experiment.hpp"
#include "imc/manifold.hpp"
#include "imc/point_cloud_io.hpp"
#include "imc/seminorm.hpp"
#include "imc/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace imc {

namespace detail {

inline void emit_json(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << j.dump(2) << "\n";
}

inline Eigen::VectorXd parse_vector(const std::string& text) {
  const auto cells = split_csv(text);
  Eigen::VectorXd v(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = parse_double(cells[i], "--center");
  return v;
}

// "auto" resolves to the documented default; otherwise a positive number.
inline std::optional<double> parse_auto_scale(
    const std::string& text, const SampledManifold& manifold,
    double (*default_fn)(const SampledManifold&)) {
  if (text.empty()) return std::nullopt;
  if (text == "auto") return default_fn(manifold);
  return parse_double(text, "scale option");
}

inline int print_verdicts(const nlohmann::json& report) {
  bool all_pass = true;
  for (const auto& v : report.at("verdicts")) {
    const bool pass = v.at("pass").get<bool>();
    all_pass = all_pass && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << v.at("name").get<std::string>()
              << " :: " << v.at("rule").get<std::string>() << "\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"integral Menger curvature toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // generate ----------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "generate a sampled fixture");
  std::string gen_shape = "circle";
  double gen_R = 1.0, gen_r = 0.5, gen_alpha = 2.0, gen_delta = 1.0;
  int gen_p = 2, gen_q = 3, gen_m = 1, gen_n = 2, gen_res = 200;
  std::string gen_out, gen_grid_out, gen_deriv_out;
  gen->add_option("--shape", gen_shape, "circle|sphere|torus|torus_knot|graph_alpha")
      ->required();
  gen->add_option("--R", gen_R, "radius / major radius");
  gen->add_option("--r", gen_r, "minor radius");
  gen->add_option("--p", gen_p, "torus knot p");
  gen->add_option("--q", gen_q, "torus knot q");
  gen->add_option("--alpha", gen_alpha, "cusp exponent");
  gen->add_option("--delta", gen_delta, "graph disc radius");
  gen->add_option("--m", gen_m, "intrinsic dimension (graph_alpha)");
  gen->add_option("--n", gen_n, "ambient dimension (graph_alpha)");
  gen->add_option("--res", gen_res, "node count / grid count")->required();
  gen->add_option("--out", gen_out, "point cloud CSV path")->required();
  gen->add_option("--grid-out", gen_grid_out, "also write f as a grid CSV (graph_alpha)");
  gen->add_option("--deriv-out", gen_deriv_out, "also write Df as a grid CSV (graph_alpha)");

  // compute-energy ------------------------------------------------------------
  auto* energy = app.add_subcommand("compute-energy", "discrete energy of a point cloud");
  std::string en_input, en_method = "mc", en_lambda, en_rho, en_sup = "auto";
  std::string en_curve, en_out;
  int en_m = 0, en_k = 3, en_workers = 0;
  double en_p = 8.0, en_budget = 1e8;
  long en_samples = 100000;
  std::uint64_t en_seed = 0;
  energy->add_option("--input", en_input, "point cloud CSV")->required();
  energy->add_option("--m", en_m, "intrinsic dimension (overrides sidecar)");
  energy->add_option("--k", en_k, "tuple order");
  energy->add_option("--p", en_p, "exponent")->required();
  energy->add_option("--method", en_method, "exhaustive|mc");
  energy->add_option("--samples", en_samples, "Monte Carlo draws");
  energy->add_option("--seed", en_seed, "RNG seed");
  energy->add_option("--lambda", en_lambda, "diameter split (number or 'auto')");
  energy->add_option("--rho", en_rho, "locality radius (number or 'auto')");
  energy->add_option("--sup-candidates", en_sup, "all|auto|subsample(j)");
  energy->add_option("--workers", en_workers, "worker threads (0 = hardware)");
  energy->add_option("--budget", en_budget, "exhaustive tuple budget");
  energy->add_option("--curve", en_curve, "curve energy variant Up|Ip|Mp (m = 1)");
  energy->add_option("--out", en_out, "result JSON path (default stdout)");

  // beta ----------------------------------------------------------------------
  auto* beta_cmd = app.add_subcommand("beta", "Jones beta number at a center/radius");
  std::string beta_input, beta_center, beta_method = "minmax", beta_out;
  double beta_radius = 0.0;
  int beta_m = 0;
  beta_cmd->add_option("--input", beta_input, "point cloud CSV")->required();
  beta_cmd->add_option("--center", beta_center, "comma-separated coordinates")->required();
  beta_cmd->add_option("--radius", beta_radius, "ball radius")->required();
  beta_cmd->add_option("--method", beta_method, "minmax|pca");
  beta_cmd->add_option("--m", beta_m, "intrinsic dimension (overrides sidecar)");
  beta_cmd->add_option("--out", beta_out, "result JSON path (default stdout)");

  // seminorm --------------------------------------------------------------------
  auto* semi = app.add_subcommand("seminorm", "fractional seminorm of a grid function");
  std::string semi_grid, semi_out;
  int semi_order = 1, semi_workers = 0;
  double semi_sigma = 0.5, semi_p = 2.0;
  semi->add_option("--grid", semi_grid, "grid function CSV")->required();
  semi->add_option("--order", semi_order, "1 = Gagliardo, 2 = Besov second difference")
      ->required();
  semi->add_option("--sigma", semi_sigma, "order s in (0,1) or sigma in (0,2)")
      ->required();
  semi->add_option("--p", semi_p, "exponent p >= 1")->required();
  semi->add_option("--workers", semi_workers, "worker threads");
  semi->add_option("--out", semi_out, "result JSON path (default stdout)");

  // verify ------------------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run an experiment and report verdicts");
  std::string verify_experiment, verify_config, verify_out, verify_csv;
  verify->add_option("--experiment", verify_experiment,
                     "characterization|dc_beta|scaling|omega_scaling|lower_bound|"
                     "mc_consistency|equivalence");
  verify->add_option("--config", verify_config, "experiment config JSON")->required();
  verify->add_option("--out", verify_out, "report JSON path");
  verify->add_option("--csv", verify_csv, "tidy CSV path for the table");

  // report --------------------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "render a saved report");
  std::string rep_input, rep_csv;
  rep->add_option("--input", rep_input, "report JSON")->required();
  rep->add_option("--csv", rep_csv, "tidy CSV path for the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      Shape shape = CircleShape{gen_R};
      if (gen_shape == "circle") {
        shape = CircleShape{gen_R};
      } else if (gen_shape == "sphere") {
        shape = SphereShape{gen_R};
      } else if (gen_shape == "torus") {
        shape = TorusShape{gen_R, gen_r};
      } else if (gen_shape == "torus_knot") {
        shape = TorusKnotShape{gen_p, gen_q, gen_R, gen_r};
      } else if (gen_shape == "graph_alpha") {
        shape = GraphAlphaShape{gen_alpha, gen_delta, gen_m, gen_n};
      } else {
        throw std::invalid_argument("unknown shape '" + gen_shape + "'");
      }
      const SampledManifold manifold = generate(shape, gen_res);
      save_point_cloud(manifold, gen_out);
      if (!gen_grid_out.empty() || !gen_deriv_out.empty()) {
        if (gen_shape != "graph_alpha")
          throw std::invalid_argument("--grid-out/--deriv-out need graph_alpha");
        const GraphPatch patch =
            graph_alpha_patch(gen_alpha, gen_delta, gen_m, gen_n, gen_res);
        if (!gen_grid_out.empty())
          save_grid_function(patch_values(patch), gen_grid_out);
        if (!gen_deriv_out.empty())
          save_grid_function(patch_derivative(patch), gen_deriv_out);
      }
      std::cout << "wrote " << manifold.size() << " samples to " << gen_out << "\n";
      return 0;
    }

    if (energy->parsed()) {
      const SampledManifold manifold = load_point_cloud(en_input, en_m);
      EstimatorConfig config;
      config.method = (en_method == "exhaustive")
                          ? EstimatorConfig::Method::Exhaustive
                          : EstimatorConfig::Method::MonteCarlo;
      if (en_method != "exhaustive" && en_method != "mc" &&
          en_method != "monte_carlo")
        throw std::invalid_argument("unknown method '" + en_method + "'");
      config.samples = en_samples;
      config.seed = en_seed;
      config.workers = en_workers;
      config.budget = en_budget;
      config.lambda = detail::parse_auto_scale(en_lambda, manifold, &default_lambda);
      config.rho = detail::parse_auto_scale(en_rho, manifold, &default_rho);
      config.sup_candidates = sup_candidates_from_name(en_sup);

      EnergyEstimate estimate;
      if (!en_curve.empty()) {
        CurveVariant variant;
        if (en_curve == "Up") variant = CurveVariant::Up;
        else if (en_curve == "Ip") variant = CurveVariant::Ip;
        else if (en_curve == "Mp") variant = CurveVariant::Mp;
        else throw std::invalid_argument("unknown curve variant '" + en_curve + "'");
        estimate = curve_energy(manifold, variant, en_p, config);
      } else {
        const EnergySpec spec(manifold.m(), manifold.n(), en_k, en_p);
        if (exponent_near_degenerate(spec))
          std::cerr << "warning: s = " << spec.s
                    << " is near-degenerate; classification is unreliable\n";
        estimate = (config.method == EstimatorConfig::Method::Exhaustive)
                       ? energy_exhaustive(manifold, spec, config)
                       : energy_monte_carlo(manifold, spec, config);
      }
      detail::emit_json(to_json(estimate), en_out);
      return 0;
    }

    if (beta_cmd->parsed()) {
      const SampledManifold manifold = load_point_cloud(beta_input, beta_m);
      const Eigen::VectorXd center = detail::parse_vector(beta_center);
      BetaResult result;
      if (beta_method == "minmax")
        result = beta_minmax(manifold, center, beta_radius);
      else if (beta_method == "pca")
        result = beta_pca_bound(manifold, center, beta_radius);
      else
        throw std::invalid_argument("unknown beta method '" + beta_method + "'");
      nlohmann::json j;
      j["beta"] = result.beta;
      j["radius"] = result.radius;
      j["residual"] = result.residual;
      j["method"] = result.method;
      j["center"] = std::vector<double>(result.center.data(),
                                        result.center.data() + result.center.size());
      nlohmann::json basis = nlohmann::json::array();
      for (int c = 0; c < result.plane_basis.cols(); ++c)
        basis.push_back(std::vector<double>(
            result.plane_basis.col(c).data(),
            result.plane_basis.col(c).data() + result.plane_basis.rows()));
      j["plane_basis"] = basis;
      detail::emit_json(j, beta_out);
      return 0;
    }

    if (semi->parsed()) {
      const GridFunction g = load_grid_function(semi_grid);
      double value;
      if (semi_order == 1)
        value = gagliardo_seminorm(g, semi_sigma, semi_p, semi_workers);
      else if (semi_order == 2)
        value = besov_second_difference(g, semi_sigma, semi_p, semi_workers);
      else
        throw std::invalid_argument("--order must be 1 or 2");
      nlohmann::json j;
      j["seminorm_p"] = value;
      j["order"] = semi_order;
      j["sigma"] = semi_sigma;
      j["p"] = semi_p;
      detail::emit_json(j, semi_out);
      return 0;
    }

    if (verify->parsed()) {
      std::ifstream in(verify_config, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + verify_config);
      nlohmann::json cfg_json = nlohmann::json::parse(in);
      ExperimentConfig config = experiment_config_from_json(cfg_json);
      if (!verify_experiment.empty()) config.experiment = verify_experiment;
      if (config.experiment.empty())
        throw std::invalid_argument("no experiment given (flag or config)");
      const ExperimentReport report = run_experiment(config);
      const nlohmann::json rj = report_to_json(report);
      const std::string out_path =
          !verify_out.empty() ? verify_out : config.output;
      if (!out_path.empty()) detail::emit_json(rj, out_path);
      if (!verify_csv.empty()) {
        std::ofstream csv(verify_csv, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot open " + verify_csv);
        csv << report_to_csv(report);
      }
      return detail::print_verdicts(rj);
    }

    if (rep->parsed()) {
      std::ifstream in(rep_input, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + rep_input);
      nlohmann::json rj = nlohmann::json::parse(in);
      if (!rep_csv.empty()) {
        std::ofstream csv(rep_csv, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot open " + rep_csv);
        csv << "group,h,quantity,value,stderr\n";
        for (const auto& row : rj.at("table"))
          csv << row.at("group").get<std::string>() << ","
              << detail::format_double(row.at("h").get<double>()) << ","
              << row.at("quantity").get<std::string>() << ","
              << detail::format_double(row.at("value").get<double>()) << ","
              << detail::format_double(row.at("stderr").get<double>()) << "\n";
      }
      return detail::print_verdicts(rj);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace imc
