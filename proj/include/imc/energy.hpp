#pragma once

// Discrete and Monte Carlo estimators of the intermediate integral Menger
// curvature E_p^k, the full E_p, and the curve energies U_p / I_p / M_p, plus
// the second-difference lower-bound functional and the Omega_{w_1}^k measure
// sampler.
//
// Estimator semantics: the product measure is approximated by ordered
// k-tuples of distinct sample indices with product weights. Monte Carlo draws
// indices i.i.d. proportionally to weights and is importance-free; tuples are
// processed in fixed-size chunks with one RNG stream per chunk, and chunk
// partials are reduced in chunk order, so results do not depend on the worker
// count.

#include "imc/geometry.hpp"
#include "imc/graph_patch.hpp"
#include "imc/manifold.hpp"
#include "imc/parallel.hpp"
#include "imc/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imc {

struct SupCandidates {
  enum class Mode { Auto, All, Subsample };
  Mode mode = Mode::Auto;
  int count = 256;

  static SupCandidates all() { return {Mode::All, 0}; }
  static SupCandidates subsample(int j) {
    if (j < 1) throw std::invalid_argument("SupCandidates: j < 1");
    return {Mode::Subsample, j};
  }
};

struct EstimatorConfig {
  enum class Method { Exhaustive, MonteCarlo };

  Method method = Method::MonteCarlo;
  long samples = 100000;
  std::uint64_t seed = 0;
  std::optional<double> lambda;  // diameter split threshold
  std::optional<double> rho;     // locality radius (consumed by experiments)
  SupCandidates sup_candidates;
  int workers = 0;       // 0 = hardware concurrency
  double budget = 1e8;   // refusal guard on the ordered tuple count N^k

  void validate() const {
    if (samples < 1) throw std::invalid_argument("EstimatorConfig: samples < 1");
    if (lambda && !(*lambda > 0.0))
      throw std::invalid_argument("EstimatorConfig: lambda <= 0");
    if (rho && !(*rho > 0.0))
      throw std::invalid_argument("EstimatorConfig: rho <= 0");
    if (lambda && rho && !(*lambda < *rho))
      throw std::invalid_argument("EstimatorConfig: need lambda < rho");
  }
};

/// Default diameter-split threshold: 10 x median nearest-neighbor spacing.
inline double default_lambda(const SampledManifold& manifold) {
  return 10.0 * median_nn_spacing(manifold);
}

/// Default locality radius: a quarter of the sample diameter.
inline double default_rho(const SampledManifold& manifold) {
  return manifold_diameter(manifold) / 4.0;
}

struct SpecEcho {
  int m = 0, n = 0, k = 0;
  double p = 0.0;
  double s = std::numeric_limits<double>::quiet_NaN();  // NaN for curve energies
};

struct ConfigEcho {
  std::string method;
  long samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  std::optional<double> rho;
  std::string sup_candidates;
};

struct EnergyEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exhaustive
  long long tuple_count = 0;
  std::optional<double> below_lambda;
  std::optional<double> above_lambda;  // diam >= lambda part
  SpecEcho spec;
  ConfigEcho config;
};

inline nlohmann::json to_json(const EnergyEstimate& e) {
  nlohmann::json j;
  j["value"] = e.value;
  j["stderr"] = e.std_error;
  j["tuple_count"] = e.tuple_count;
  j["below_lambda"] = e.below_lambda ? nlohmann::json(*e.below_lambda)
                                     : nlohmann::json(nullptr);
  j["above_lambda"] = e.above_lambda ? nlohmann::json(*e.above_lambda)
                                     : nlohmann::json(nullptr);
  j["spec"] = {{"m", e.spec.m}, {"n", e.spec.n}, {"k", e.spec.k}, {"p", e.spec.p},
               {"s", std::isnan(e.spec.s) ? nlohmann::json(nullptr)
                                          : nlohmann::json(e.spec.s)}};
  j["config"] = {{"method", e.config.method},
                 {"samples", e.config.samples},
                 {"seed", e.config.seed},
                 {"lambda", e.config.lambda ? nlohmann::json(*e.config.lambda)
                                            : nlohmann::json(nullptr)},
                 {"rho", e.config.rho ? nlohmann::json(*e.config.rho)
                                      : nlohmann::json(nullptr)},
                 {"sup_candidates", e.config.sup_candidates}};
  return j;
}

namespace detail {

inline double pow_p(double base, double p) {
  const double fl = std::floor(p);
  if (fl == p && p >= 0.0 && p <= 64.0) {
    int e = static_cast<int>(p);
    double r = 1.0, b = base;
    while (e > 0) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }
  return std::pow(base, p);
}

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// Deterministic farthest-point-first subsample: start from the point
// farthest from the centroid, then repeatedly take the point maximizing the
// distance to the selected set (ties resolved by lowest index).
inline std::vector<int> farthest_point_subsample(const SampledManifold& manifold,
                                                 int count) {
  const int total = manifold.size();
  count = std::min(count, total);
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(manifold.n());
  for (int i = 0; i < total; ++i) centroid += manifold.point(i);
  centroid /= total;
  int first = 0;
  double best = -1.0;
  for (int i = 0; i < total; ++i) {
    const double d = (manifold.point(i) - centroid).norm();
    if (d > best) {
      best = d;
      first = i;
    }
  }
  std::vector<int> chosen{first};
  std::vector<double> min_dist(total);
  for (int i = 0; i < total; ++i)
    min_dist[i] = dist(manifold.point_ptr(i), manifold.point_ptr(first),
                       manifold.n());
  while (static_cast<int>(chosen.size()) < count) {
    int next = 0;
    double far = -1.0;
    for (int i = 0; i < total; ++i)
      if (min_dist[i] > far) {
        far = min_dist[i];
        next = i;
      }
    chosen.push_back(next);
    for (int i = 0; i < total; ++i)
      min_dist[i] = std::min(min_dist[i],
                             dist(manifold.point_ptr(i),
                                  manifold.point_ptr(next), manifold.n()));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline std::vector<int> resolve_candidates(const SampledManifold& manifold,
                                           const SupCandidates& sc) {
  switch (sc.mode) {
    case SupCandidates::Mode::All:
      break;
    case SupCandidates::Mode::Subsample:
      if (manifold.size() > sc.count)
        return farthest_point_subsample(manifold, sc.count);
      break;
    case SupCandidates::Mode::Auto:
      if (manifold.size() > 2000)
        return farthest_point_subsample(manifold, 256);
      break;
  }
  std::vector<int> all(manifold.size());
  for (int i = 0; i < manifold.size(); ++i) all[i] = i;
  return all;
}

inline std::string describe_candidates(const SampledManifold& manifold,
                                       const SupCandidates& sc) {
  const auto resolved = [&](int j) { return "subsample(" + std::to_string(j) + ")"; };
  switch (sc.mode) {
    case SupCandidates::Mode::All:
      return "all";
    case SupCandidates::Mode::Subsample:
      return manifold.size() > sc.count ? resolved(sc.count) : "all";
    case SupCandidates::Mode::Auto:
      return manifold.size() > 2000 ? resolved(256) : "all";
  }
  return "all";
}

// sup of DC over completions of the first k tuple points by m+2-k candidate
// points; for k = m+2 this is DC itself (no supremum).
class SupCurvatureKernel {
public:
  SupCurvatureKernel(const SampledManifold& manifold, const EnergySpec& spec,
                     std::vector<int> candidates)
      : manifold_(&manifold), n_(manifold.n()), k_(spec.k),
        rows_(spec.m + 2), candidates_(std::move(candidates)) {}

  double operator()(const int* tuple_idx) const {
    double buf[(kMaxDim + 2) * kMaxDim];
    for (int i = 0; i < k_; ++i) {
      const double* p = manifold_->point_ptr(tuple_idx[i]);
      for (int c = 0; c < n_; ++c) buf[i * n_ + c] = p[c];
    }
    const int free = rows_ - k_;
    if (free == 0) return discrete_curvature_flat(buf, rows_, n_);
    double best = 0.0;
    std::array<std::size_t, kMaxDim> slot{};
    for (int t = 0; t < free; ++t) slot[t] = 0;
    for (;;) {
      for (int t = 0; t < free; ++t) {
        const double* p = manifold_->point_ptr(candidates_[slot[t]]);
        for (int c = 0; c < n_; ++c) buf[(k_ + t) * n_ + c] = p[c];
      }
      best = std::max(best, discrete_curvature_flat(buf, rows_, n_));
      int t = free - 1;
      while (t >= 0 && ++slot[t] == candidates_.size()) slot[t--] = 0;
      if (t < 0) break;
    }
    return best;
  }

  const std::vector<int>& candidates() const { return candidates_; }

private:
  const SampledManifold* manifold_;
  int n_, k_, rows_;
  std::vector<int> candidates_;
};

struct TupleSums {
  KahanSum total;       // used when no lambda split is requested
  KahanSum below;       // diam < lambda
  KahanSum above;       // diam >= lambda
  KahanSum square;      // sum of f^2 (Monte Carlo variance)
  long long count = 0;
};

// Exhaustive: ordered distinct k-tuples enumerated as combinations times k!
// (the integrand is permutation invariant, weights commute). Chunked by the
// smallest index; reduction over chunks is ordered.
template <typename Eval>
TupleSums exhaustive_sums(const SampledManifold& manifold, int j,
                          const Eval& eval, std::optional<double> lambda,
                          int workers) {
  const int count = manifold.size();
  const double fact = factorial(j);
  std::function<TupleSums(std::size_t)> chunk_fn = [&](std::size_t first) {
    TupleSums sums;
    std::vector<int> idx(j);
    idx[0] = static_cast<int>(first);
    const auto visit = [&](const int* tuple) {
      double w = fact;
      for (int t = 0; t < j; ++t) w *= manifold.weight(tuple[t]);
      const double term = eval(tuple) * w;
      ++sums.count;
      if (lambda) {
        double diam = 0.0;
        for (int a = 0; a < j; ++a)
          for (int b = a + 1; b < j; ++b)
            diam = std::max(diam, dist(manifold.point_ptr(tuple[a]),
                                       manifold.point_ptr(tuple[b]),
                                       manifold.n()));
        (diam < *lambda ? sums.below : sums.above).add(term);
      } else {
        sums.total.add(term);
      }
    };
    const auto rec = [&](auto&& self, int pos) -> void {
      if (pos == j) {
        visit(idx.data());
        return;
      }
      for (int v = idx[pos - 1] + 1; v < count; ++v) {
        idx[pos] = v;
        self(self, pos + 1);
      }
    };
    rec(rec, 1);
    return sums;
  };
  auto chunks = chunked_map<TupleSums>(static_cast<std::size_t>(count), workers,
                                       chunk_fn);
  TupleSums out;
  for (const auto& c : chunks) {
    out.total.add(c.total.sum);
    out.below.add(c.below.sum);
    out.above.add(c.above.sum);
    out.count += c.count;
  }
  return out;
}

inline constexpr long kMcChunk = 4096;

// Monte Carlo: k i.i.d. weight-proportional indices per draw; value estimate
// is mean(f) * (total weight)^k.
template <typename Eval>
TupleSums monte_carlo_sums(const SampledManifold& manifold, int j,
                           const Eval& eval, std::optional<double> lambda,
                           long samples, std::uint64_t seed, int workers) {
  const int count = manifold.size();
  std::vector<double> cum(count);
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    acc += manifold.weight(i);
    cum[i] = acc;
  }
  const double total_weight = acc;
  const std::size_t num_chunks =
      static_cast<std::size_t>((samples + kMcChunk - 1) / kMcChunk);
  std::function<TupleSums(std::size_t)> chunk_fn = [&](std::size_t chunk) {
    TupleSums sums;
    RngStream rng(seed, chunk);
    const long begin = static_cast<long>(chunk) * kMcChunk;
    const long end = std::min(samples, begin + kMcChunk);
    std::vector<int> idx(j);
    for (long s = begin; s < end; ++s) {
      for (int t = 0; t < j; ++t) {
        const double u = rng.uniform() * total_weight;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        idx[t] = static_cast<int>(std::min<std::ptrdiff_t>(
            it - cum.begin(), count - 1));
      }
      const double f = eval(idx.data());
      ++sums.count;
      sums.square.add(f * f);
      if (lambda) {
        double diam = 0.0;
        for (int a = 0; a < j; ++a)
          for (int b = a + 1; b < j; ++b)
            diam = std::max(diam, dist(manifold.point_ptr(idx[a]),
                                       manifold.point_ptr(idx[b]),
                                       manifold.n()));
        (diam < *lambda ? sums.below : sums.above).add(f);
      } else {
        sums.total.add(f);
      }
    }
    return sums;
  };
  auto chunks = chunked_map<TupleSums>(num_chunks, workers, chunk_fn);
  TupleSums out;
  for (const auto& c : chunks) {
    out.total.add(c.total.sum);
    out.below.add(c.below.sum);
    out.above.add(c.above.sum);
    out.square.add(c.square.sum);
    out.count += c.count;
  }
  return out;
}

template <typename Eval>
EnergyEstimate run_estimator(const SampledManifold& manifold, int j,
                             const Eval& eval, const SpecEcho& spec,
                             const EstimatorConfig& config,
                             const std::string& sup_desc) {
  config.validate();
  EnergyEstimate est;
  est.spec = spec;
  est.config.samples = config.samples;
  est.config.seed = config.seed;
  est.config.lambda = config.lambda;
  est.config.rho = config.rho;
  est.config.sup_candidates = sup_desc;

  if (config.method == EstimatorConfig::Method::Exhaustive) {
    est.config.method = "exhaustive";
    const double ordered = std::pow(static_cast<double>(manifold.size()), j);
    if (ordered > config.budget)
      throw std::invalid_argument(
          "energy_exhaustive: N^k = " + std::to_string(ordered) +
          " exceeds the tuple budget " + std::to_string(config.budget) +
          "; use the monte_carlo method (or raise the budget knowingly)");
    auto sums = exhaustive_sums(manifold, j, eval, config.lambda,
                                config.workers);
    long long ordered_count = 1;
    for (int t = 0; t < j; ++t) ordered_count *= (manifold.size() - t);
    est.tuple_count = std::max<long long>(ordered_count, 0);
    est.std_error = 0.0;
    if (config.lambda) {
      est.below_lambda = sums.below.sum;
      est.above_lambda = sums.above.sum;
      est.value = *est.below_lambda + *est.above_lambda;
    } else {
      est.value = sums.total.sum;
    }
    return est;
  }

  est.config.method = "monte_carlo";
  auto sums = monte_carlo_sums(manifold, j, eval, config.lambda, config.samples,
                               config.seed, config.workers);
  const double w_power = pow_p(manifold.total_weight(), j);
  const double s_count = static_cast<double>(sums.count);
  est.tuple_count = sums.count;
  double mean;
  if (config.lambda) {
    est.below_lambda = sums.below.sum / s_count * w_power;
    est.above_lambda = sums.above.sum / s_count * w_power;
    est.value = *est.below_lambda + *est.above_lambda;
    mean = (sums.below.sum + sums.above.sum) / s_count;
  } else {
    est.value = sums.total.sum / s_count * w_power;
    mean = sums.total.sum / s_count;
  }
  if (sums.count > 1) {
    const double var =
        std::max(0.0, (sums.square.sum - s_count * mean * mean) / (s_count - 1.0));
    est.std_error = std::sqrt(var / s_count) * w_power;
  }
  return est;
}

}  // namespace detail

/// sup over completions x_k, ..., x_{m+1} (drawn from the configured
/// candidate set) of the discrete curvature of the completed tuple. For
/// k = m+2 there is no supremum and this is DC of the tuple itself.
inline double sup_curvature(const SampledManifold& manifold,
                            std::span<const int> tuple_indices,
                            const EnergySpec& spec,
                            const EstimatorConfig& config = {}) {
  if (static_cast<int>(tuple_indices.size()) != spec.k)
    throw std::invalid_argument("sup_curvature: tuple size != k");
  if (manifold.m() != spec.m || manifold.n() != spec.n)
    throw std::invalid_argument("sup_curvature: spec does not match manifold");
  detail::SupCurvatureKernel kernel(
      manifold, spec, detail::resolve_candidates(manifold, config.sup_candidates));
  std::vector<int> idx(tuple_indices.begin(), tuple_indices.end());
  return kernel(idx.data());
}

/// Deterministic weighted sum of sup_curvature^p over all ordered k-tuples of
/// distinct sample indices. Refuses when N^k exceeds the configured budget.
inline EnergyEstimate energy_exhaustive(const SampledManifold& manifold,
                                        const EnergySpec& spec,
                                        EstimatorConfig config = {}) {
  if (manifold.m() != spec.m || manifold.n() != spec.n)
    throw std::invalid_argument("energy_exhaustive: spec does not match manifold");
  config.method = EstimatorConfig::Method::Exhaustive;
  detail::SupCurvatureKernel kernel(
      manifold, spec, detail::resolve_candidates(manifold, config.sup_candidates));
  const double p = spec.p;
  const auto eval = [&](const int* idx) {
    return detail::pow_p(kernel(idx), p);
  };
  return detail::run_estimator(
      manifold, spec.k, eval, SpecEcho{spec.m, spec.n, spec.k, spec.p, spec.s},
      config, detail::describe_candidates(manifold, config.sup_candidates));
}

/// Monte Carlo estimate of the same weighted sum, with standard error from
/// the sample variance and an optional diameter stratification at lambda.
inline EnergyEstimate energy_monte_carlo(const SampledManifold& manifold,
                                         const EnergySpec& spec,
                                         EstimatorConfig config = {}) {
  if (manifold.m() != spec.m || manifold.n() != spec.n)
    throw std::invalid_argument("energy_monte_carlo: spec does not match manifold");
  config.method = EstimatorConfig::Method::MonteCarlo;
  detail::SupCurvatureKernel kernel(
      manifold, spec, detail::resolve_candidates(manifold, config.sup_candidates));
  const double p = spec.p;
  const auto eval = [&](const int* idx) {
    return detail::pow_p(kernel(idx), p);
  };
  return detail::run_estimator(
      manifold, spec.k, eval, SpecEcho{spec.m, spec.n, spec.k, spec.p, spec.s},
      config, detail::describe_candidates(manifold, config.sup_candidates));
}

enum class CurveVariant { Up, Ip, Mp };

inline const char* curve_variant_name(CurveVariant v) {
  switch (v) {
    case CurveVariant::Up: return "Up";
    case CurveVariant::Ip: return "Ip";
    case CurveVariant::Mp: return "Mp";
  }
  return "?";
}

/// Curve energies with Menger curvature c in place of DC: the sup of c over
/// the remaining points, raised to p, integrated over one (U_p), two (I_p) or
/// three (M_p) curve variables with length weights.
inline EnergyEstimate curve_energy(const SampledManifold& manifold,
                                   CurveVariant variant, double p,
                                   EstimatorConfig config = {}) {
  if (manifold.m() != 1)
    throw std::invalid_argument("curve_energy: manifold must have m = 1");
  if (!(p > 0.0)) throw std::invalid_argument("curve_energy: p <= 0");
  const int j = variant == CurveVariant::Up ? 1 : variant == CurveVariant::Ip ? 2 : 3;
  const auto candidates =
      detail::resolve_candidates(manifold, config.sup_candidates);
  const int n = manifold.n();
  const auto eval = [&](const int* idx) {
    double best = 0.0;
    switch (variant) {
      case CurveVariant::Mp:
        best = detail::menger_curvature_flat(manifold.point_ptr(idx[0]),
                                             manifold.point_ptr(idx[1]),
                                             manifold.point_ptr(idx[2]), n);
        break;
      case CurveVariant::Ip:
        for (int a : candidates)
          best = std::max(best, detail::menger_curvature_flat(
                                    manifold.point_ptr(idx[0]),
                                    manifold.point_ptr(idx[1]),
                                    manifold.point_ptr(a), n));
        break;
      case CurveVariant::Up:
        for (int a : candidates)
          for (int b : candidates)
            best = std::max(best, detail::menger_curvature_flat(
                                      manifold.point_ptr(idx[0]),
                                      manifold.point_ptr(a),
                                      manifold.point_ptr(b), n));
        break;
    }
    return detail::pow_p(best, p);
  };
  SpecEcho spec{manifold.m(), manifold.n(), j, p,
                std::numeric_limits<double>::quiet_NaN()};
  return detail::run_estimator(
      manifold, j, eval, spec, config,
      detail::describe_candidates(manifold, config.sup_candidates));
}

/// Grid quadrature of the second-difference functional
///   integral over (y, w) of |f(y+w) - 2 f(y) + f(y-w)|^p / |w|^{2p - m(k-2)},
/// over pairs with y, y+w, y-w all grid nodes and w != 0.
inline double second_difference_functional(const GraphPatch& patch,
                                           const EnergySpec& spec,
                                           int workers = 0) {
  if (patch.m() != spec.m)
    throw std::invalid_argument("second_difference_functional: m mismatch");
  const DiscGrid& grid = patch.grid();
  const int g = grid.node_count();
  const int m = patch.m();
  const int d = patch.codim();
  const double q = 2.0 * spec.p - static_cast<double>(spec.m) * (spec.k - 2);
  const double h = grid.spacing();
  const double cell = detail::pow_p(h, 2 * m);
  const double p = spec.p;
  std::function<detail::KahanSum(std::size_t)> chunk_fn =
      [&](std::size_t yi) {
        detail::KahanSum sum;
        const int* y_idx = grid.node_index(static_cast<int>(yi));
        const double* fy =
            patch.raw_values().data() + static_cast<std::size_t>(yi) * d;
        std::vector<int> plus(m), minus(m);
        for (int wi = 0; wi < g; ++wi) {
          const int* w_idx = grid.node_index(wi);
          double w2 = 0.0;
          for (int c = 0; c < m; ++c) {
            plus[c] = y_idx[c] + w_idx[c];
            minus[c] = y_idx[c] - w_idx[c];
            w2 += static_cast<double>(w_idx[c]) * w_idx[c];
          }
          if (w2 == 0.0) continue;
          const int ip = grid.find(plus.data());
          if (ip < 0) continue;
          const int im = grid.find(minus.data());
          if (im < 0) continue;
          const double* fp =
              patch.raw_values().data() + static_cast<std::size_t>(ip) * d;
          const double* fm =
              patch.raw_values().data() + static_cast<std::size_t>(im) * d;
          double dd2 = 0.0;
          for (int c = 0; c < d; ++c) {
            const double diff = fp[c] - 2.0 * fy[c] + fm[c];
            dd2 += diff * diff;
          }
          const double w_norm = std::sqrt(w2) * h;
          sum.add(detail::pow_p(std::sqrt(dd2), p) / std::pow(w_norm, q));
        }
        return sum;
      };
  auto chunks = chunked_map<detail::KahanSum>(static_cast<std::size_t>(g),
                                              workers, chunk_fn);
  detail::KahanSum total;
  for (const auto& c : chunks) total.add(c.sum);
  return cell * total.sum;
}

struct OmegaEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long accepted = 0;
  long count = 0;
};

/// Monte Carlo estimate of H^{m(k-2)} of
///   Omega_{w_1}^k = { (w_2,...,w_{k-1}) : |w_i| <= |w_1|,
///                     |w_2 ^ ... ^ w_{k-1}| >= |w_1|^{k-2} / 2 },
/// by uniform sampling in the product of balls of radius |w_1|. For k = 2 the
/// set is the empty product and the measure is 1 by convention.
inline OmegaEstimate omega_sampler(const Eigen::VectorXd& w1, int k, long count,
                                   std::uint64_t seed, int workers = 0) {
  if (k < 2) throw std::invalid_argument("omega_sampler: k < 2");
  if (k == 2) return {1.0, 0.0, 0, 0};
  if (count < 1) throw std::invalid_argument("omega_sampler: count < 1");
  const int m = static_cast<int>(w1.size());
  const double radius = w1.norm();
  if (!(radius > 0.0)) throw std::invalid_argument("omega_sampler: |w1| = 0");
  const int t = k - 2;
  const double threshold = 0.5 * detail::pow_p(radius, t);
  const double box_volume =
      detail::pow_p(unit_ball_volume(m) * detail::pow_p(radius, m), t);

  const std::size_t num_chunks =
      static_cast<std::size_t>((count + detail::kMcChunk - 1) / detail::kMcChunk);
  std::function<long(std::size_t)> chunk_fn = [&](std::size_t chunk) {
    RngStream rng(seed, chunk);
    const long begin = static_cast<long>(chunk) * detail::kMcChunk;
    const long end = std::min(count, begin + detail::kMcChunk);
    std::vector<double> vecs(static_cast<std::size_t>(t) * m);
    long accepted = 0;
    for (long s = begin; s < end; ++s) {
      for (int v = 0; v < t; ++v) {
        double norm2 = 0.0;
        for (int c = 0; c < m; ++c) {
          const double z = rng.normal();
          vecs[static_cast<std::size_t>(v) * m + c] = z;
          norm2 += z * z;
        }
        const double norm = std::sqrt(norm2);
        const double r = radius * std::pow(rng.uniform(), 1.0 / m);
        const double f = norm > 0.0 ? r / norm : 0.0;
        for (int c = 0; c < m; ++c) vecs[static_cast<std::size_t>(v) * m + c] *= f;
      }
      if (detail::wedge_norm_flat(vecs.data(), t, m) >= threshold) ++accepted;
    }
    return accepted;
  };
  auto chunks = chunked_map<long>(num_chunks, workers, chunk_fn);
  long accepted = 0;
  for (long c : chunks) accepted += c;
  OmegaEstimate est;
  est.accepted = accepted;
  est.count = count;
  const double rate = static_cast<double>(accepted) / static_cast<double>(count);
  est.value = box_volume * rate;
  est.std_error =
      box_volume * std::sqrt(std::max(0.0, rate * (1.0 - rate) /
                                               static_cast<double>(count)));
  return est;
}

}  // namespace imc
