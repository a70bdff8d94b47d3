#pragma once

// Fractional seminorms on grid functions over the disc: the Gagliardo
// (first-difference) form of order s in (0,1) and the Besov second-difference
// form of order sigma in (0,2), plus the exponent bookkeeping of the
// energy-to-smoothness dictionary.
//
// Both functions return the seminorm RAISED TO p (no p-th root): that is the
// object the estimates consume, and the CLI labels it seminorm_p.

#include "imc/energy.hpp"
#include "imc/geometry.hpp"
#include "imc/graph_patch.hpp"
#include "imc/grid.hpp"
#include "imc/parallel.hpp"
#include "imc/point_cloud_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace imc {

class GridFunction {
public:
  enum class Kind { Function, Gradient };

  GridFunction(DiscGrid grid, int components, std::vector<double> values,
               Kind kind)
      : grid_(std::move(grid)), d_(components), values_(std::move(values)),
        kind_(kind) {
    if (d_ < 1) throw std::invalid_argument("GridFunction: components < 1");
    if (values_.size() !=
        static_cast<std::size_t>(grid_.node_count()) * static_cast<std::size_t>(d_))
      throw std::invalid_argument("GridFunction: value size mismatch");
    for (double v : values_)
      if (!std::isfinite(v))
        throw std::invalid_argument("GridFunction: non-finite value");
  }

  const DiscGrid& grid() const { return grid_; }
  int components() const { return d_; }
  Kind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }

  const double* value_ptr(int node) const {
    return values_.data() + static_cast<std::size_t>(node) * d_;
  }

private:
  DiscGrid grid_;
  int d_;
  std::vector<double> values_;
  Kind kind_;
};

/// Sampled f of a patch as a grid function.
inline GridFunction patch_values(const GraphPatch& patch) {
  return {patch.grid(), patch.codim(), patch.raw_values(),
          GridFunction::Kind::Function};
}

/// Sampled Df of a patch, flattened to (n-m)*m components per node.
inline GridFunction patch_derivative(const GraphPatch& patch) {
  return {patch.grid(), patch.codim() * patch.m(), patch.raw_derivs(),
          GridFunction::Kind::Gradient};
}

namespace detail {

template <typename PairTerm>
double pair_sum(const DiscGrid& grid, int workers, const PairTerm& term) {
  const int g = grid.node_count();
  std::function<KahanSum(std::size_t)> chunk_fn = [&](std::size_t xi) {
    KahanSum sum;
    for (int yi = static_cast<int>(xi) + 1; yi < g; ++yi)
      term(static_cast<int>(xi), yi, sum);
    return sum;
  };
  auto chunks = chunked_map<KahanSum>(static_cast<std::size_t>(g), workers, chunk_fn);
  KahanSum total;
  for (const auto& c : chunks) total.add(c.sum);
  // Unordered pairs doubled to match the ordered double integral.
  return 2.0 * total.sum;
}

}  // namespace detail

/// Gagliardo seminorm^p of order s in (0,1):
///   h^{2m} sum over ordered grid pairs x != y of |g(x)-g(y)|^p / |x-y|^{m+sp}.
inline double gagliardo_seminorm(const GridFunction& g, double s, double p,
                                 int workers = 0) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("gagliardo_seminorm: need s in (0,1)");
  if (!(p >= 1.0)) throw std::invalid_argument("gagliardo_seminorm: need p >= 1");
  const DiscGrid& grid = g.grid();
  const int m = grid.m();
  const int d = g.components();
  const double h = grid.spacing();
  const double expo = m + s * p;
  const double sum = detail::pair_sum(
      grid, workers, [&](int xi, int yi, detail::KahanSum& acc) {
        const int* a = grid.node_index(xi);
        const int* b = grid.node_index(yi);
        double r2 = 0.0;
        for (int c = 0; c < m; ++c) {
          const double diff = static_cast<double>(a[c] - b[c]);
          r2 += diff * diff;
        }
        const double* va = g.value_ptr(xi);
        const double* vb = g.value_ptr(yi);
        double dv2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double diff = va[c] - vb[c];
          dv2 += diff * diff;
        }
        acc.add(detail::pow_p(std::sqrt(dv2), p) /
                std::pow(std::sqrt(r2) * h, expo));
      });
  return detail::pow_p(h, 2 * m) * sum;
}

/// Besov second-difference seminorm^p of order sigma in (0,2):
///   h^{2m} sum over ordered equal-parity pairs (x, y), x != y, whose grid
///   midpoint lies in the domain, of
///   |g(x) - 2 g((x+y)/2) + g(y)|^p / |x-y|^{m+sigma p}.
inline double besov_second_difference(const GridFunction& g, double sigma,
                                      double p, int workers = 0) {
  if (!(sigma > 0.0 && sigma < 2.0))
    throw std::invalid_argument("besov_second_difference: need sigma in (0,2)");
  if (!(p >= 1.0))
    throw std::invalid_argument("besov_second_difference: need p >= 1");
  const DiscGrid& grid = g.grid();
  const int m = grid.m();
  const int d = g.components();
  const double h = grid.spacing();
  const double expo = m + sigma * p;
  const double sum = detail::pair_sum(
      grid, workers, [&](int xi, int yi, detail::KahanSum& acc) {
        const int* a = grid.node_index(xi);
        const int* b = grid.node_index(yi);
        double r2 = 0.0;
        for (int c = 0; c < m; ++c) {
          const int diff = a[c] - b[c];
          if ((diff & 1) != 0) return;  // midpoint off-lattice
          r2 += static_cast<double>(diff) * diff;
        }
        int mid[detail::kMaxDim];
        for (int c = 0; c < m; ++c) mid[c] = (a[c] + b[c]) / 2;
        const int mi = grid.find(mid);
        if (mi < 0) return;
        const double* va = g.value_ptr(xi);
        const double* vb = g.value_ptr(yi);
        const double* vm = g.value_ptr(mi);
        double dv2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double diff = va[c] - 2.0 * vm[c] + vb[c];
          dv2 += diff * diff;
        }
        acc.add(detail::pow_p(std::sqrt(dv2), p) /
                std::pow(std::sqrt(r2) * h, expo));
      });
  return detail::pow_p(h, 2 * m) * sum;
}

/// s = 1 - m(k-1)/p from the energy parameters.
inline double sobolev_exponent(const EnergySpec& spec) { return spec.s; }

/// sigma~ = 1 + s = 2 - m(k-1)/p; checks the dictionary identities
/// sigma~ = 1+s and m + sigma~ p = 2p - m(k-2) hold to machine precision.
inline double besov_exponent(const EnergySpec& spec) {
  const double sigma = 2.0 - static_cast<double>(spec.m) * (spec.k - 1) / spec.p;
  if (std::abs(sigma - (1.0 + spec.s)) > 1e-12)
    throw NumericalError("besov_exponent: sigma != 1 + s");
  const double lhs = spec.m + sigma * spec.p;
  const double rhs = 2.0 * spec.p - static_cast<double>(spec.m) * (spec.k - 2);
  if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(rhs)))
    throw NumericalError("besov_exponent: m + sigma p != 2p - m(k-2)");
  return sigma;
}

/// Near-degenerate smoothness (s close to 0 or 1) deserves a warning in
/// user-facing paths: refinement classification becomes unreliable there.
inline bool exponent_near_degenerate(const EnergySpec& spec) {
  return spec.s < 0.01 || spec.s > 0.99;
}

/// Membership threshold of the |x|^alpha family: f_alpha is locally W^{1+s,p}
/// for alpha > alpha* = 1 + s - m/p and fails to be for alpha < alpha*
/// (alpha not an even integer).
inline double alpha_membership_threshold(int m, double s, double p) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("alpha_membership_threshold: need s in (0,1)");
  if (!(p > static_cast<double>(m)))
    throw std::invalid_argument("alpha_membership_threshold: need p > m");
  return 1.0 + s - static_cast<double>(m) / p;
}

// ---------------------------------------------------------------------------
// Grid function CSV + metadata sidecar.
// CSV header: x0,...,x{m-1},v0,...,v{d-1}; sidecar {m, d, h, delta, kind}.

inline void save_grid_function(const GridFunction& g, const std::string& path) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw std::runtime_error("save_grid_function: cannot open " + path);
  const DiscGrid& grid = g.grid();
  for (int c = 0; c < grid.m(); ++c) csv << "x" << c << ",";
  for (int c = 0; c < g.components(); ++c)
    csv << "v" << c << (c + 1 == g.components() ? "\n" : ",");
  for (int i = 0; i < grid.node_count(); ++i) {
    const Eigen::VectorXd x = grid.position(i);
    for (int c = 0; c < grid.m(); ++c)
      csv << detail::format_double(x[c]) << ",";
    const double* v = g.value_ptr(i);
    for (int c = 0; c < g.components(); ++c)
      csv << detail::format_double(v[c]) << (c + 1 == g.components() ? "\n" : ",");
  }
  nlohmann::json meta;
  meta["m"] = grid.m();
  meta["d"] = g.components();
  meta["h"] = grid.spacing();
  meta["delta"] = grid.delta();
  meta["kind"] = g.kind() == GridFunction::Kind::Function ? "function" : "gradient";
  std::ofstream side(sidecar_path(path), std::ios::binary);
  side << meta.dump(2) << "\n";
}

inline GridFunction load_grid_function(const std::string& path) {
  std::ifstream side(sidecar_path(path), std::ios::binary);
  if (!side)
    throw ParseError(path + ": missing sidecar " + sidecar_path(path));
  nlohmann::json meta = nlohmann::json::parse(side, nullptr, false);
  if (meta.is_discarded())
    throw ParseError(sidecar_path(path) + ": invalid JSON");
  const int m = meta.value("m", 0);
  const int d = meta.value("d", 0);
  const double h = meta.value("h", 0.0);
  const double delta = meta.value("delta", 0.0);
  const std::string kind_name = meta.value("kind", "function");
  if (m < 1 || d < 1 || !(h > 0.0) || !(delta > 0.0))
    throw ParseError(sidecar_path(path) + ": incomplete metadata");

  DiscGrid grid(m, delta, h);
  std::vector<double> values(
      static_cast<std::size_t>(grid.node_count()) * d,
      std::numeric_limits<double>::quiet_NaN());

  std::ifstream csv(path, std::ios::binary);
  if (!csv) throw std::runtime_error("load_grid_function: cannot open " + path);
  std::string line;
  if (!std::getline(csv, line)) throw ParseError(path + ": empty file");
  int lineno = 1;
  std::vector<int> idx(m);
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string context = path + ":line " + std::to_string(lineno);
    const auto cells = detail::split_csv(line);
    if (static_cast<int>(cells.size()) != m + d)
      throw ParseError(context + ": expected " + std::to_string(m + d) +
                       " columns, got " + std::to_string(cells.size()));
    for (int c = 0; c < m; ++c) {
      const double x = detail::parse_double(cells[c], context);
      const double cell = x / h;
      idx[c] = static_cast<int>(std::lround(cell));
      if (std::abs(cell - idx[c]) > 1e-6)
        throw ParseError(context + ": coordinate off the lattice");
    }
    const int node = grid.find(idx.data());
    if (node < 0) throw ParseError(context + ": node outside the disc");
    for (int c = 0; c < d; ++c)
      values[static_cast<std::size_t>(node) * d + c] =
          detail::parse_double(cells[m + c], context);
  }
  for (double v : values)
    if (std::isnan(v)) throw ParseError(path + ": grid not fully covered");
  return {std::move(grid), d, std::move(values),
          kind_name == "gradient" ? GridFunction::Kind::Gradient
                                  : GridFunction::Kind::Function};
}

}  // namespace imc
