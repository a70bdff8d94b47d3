#pragma once

// Jones beta-numbers on sampled manifolds: scale-normalized min-max distance
// of the samples in a ball B(x, r) from the best affine m-plane through x.
// The min-max fit is a Chebyshev problem over the Grassmannian; we start from
// the PCA plane through x and refine by direct search over Givens rotations,
// which is robust to the nonsmooth sup and agnostic to (m, n).

#include "imc/graph_patch.hpp"
#include "imc/manifold.hpp"
#include "imc/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace imc {

struct BetaResult {
  double beta = 0.0;
  Eigen::MatrixXd plane_basis;  // n x m, orthonormal columns
  Eigen::VectorXd center;
  double radius = 0.0;
  std::string method;  // minmax | pca_bound | graph_bound
  double residual = 0.0;  // beta * radius
};

struct BetaOptions {
  int max_sweeps = 200;     // direct-search sweep budget per start
  double step_init = 0.25;  // initial rotation angle
  double step_min = 1e-7;   // angle resolution, beta tolerance ~1e-6
  int extra_starts = 4;     // deterministic perturbed restarts of the search
};

namespace detail {

// Rows of `diffs` are y_i - x. Returns the full orthonormal frame whose first
// m columns span the least-squares plane through x.
inline Eigen::MatrixXd pca_frame(const Eigen::MatrixXd& diffs, int n) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs, Eigen::ComputeFullV);
  Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(n, n);
  const int rank = static_cast<int>(svd.matrixV().cols());
  frame.leftCols(rank) = svd.matrixV();
  // Guard against a rank-deficient SVD frame (fewer rows than n).
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
  Eigen::MatrixXd q = qr.householderQ();
  for (int c = 0; c < n; ++c)
    if (q.col(c).dot(frame.col(c)) < 0.0) q.col(c) *= -1.0;
  return q;
}

// Max distance to the plane spanned by the orthonormal columns of basis,
// computed by direct projection (no squared-norm cancellation).
inline double sup_plane_distance(const Eigen::MatrixXd& diffs,
                                 const Eigen::MatrixXd& basis) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diffs.rows(); ++i) {
    const Eigen::VectorXd d = diffs.row(i).transpose();
    worst = std::max(worst, (d - basis * (basis.transpose() * d)).norm());
  }
  return worst;
}

struct MinmaxFit {
  Eigen::MatrixXd basis;
  double residual = 0.0;
};

// One pattern-search descent from the given start frame. Moves are Givens
// rotations in the tangent coordinates (a < m, b >= m) plus same-angle pairs
// of them; the paired moves matter because the sup objective has ridges on
// which single-coordinate moves stall.
inline MinmaxFit minmax_descend(const Eigen::MatrixXd& diffs, int m, int n,
                                Eigen::MatrixXd frame, const BetaOptions& opts) {
  const Eigen::Index rows = diffs.rows();
  Eigen::MatrixXd proj = diffs * frame;
  const Eigen::VectorXd sq = diffs.rowwise().squaredNorm();

  struct Coord {
    int a, b;
  };
  std::vector<Coord> coords;
  for (int a = 0; a < m; ++a)
    for (int b = m; b < n; ++b) coords.push_back({a, b});
  const bool pair_moves = coords.size() >= 2 && coords.size() <= 6;

  Eigen::VectorXd rowbase(rows);
  const auto refresh_rowbase = [&] {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double r2 = sq[i];
      for (int a = 0; a < m; ++a) r2 -= proj(i, a) * proj(i, a);
      rowbase[i] = r2;
    }
  };
  refresh_rowbase();
  double best2 = std::max(0.0, rowbase.maxCoeff());

  const auto apply = [&](const Coord& c, double angle) {
    const double cs = std::cos(angle), sn = std::sin(angle);
    const Eigen::VectorXd fa = frame.col(c.a), fb = frame.col(c.b);
    frame.col(c.a) = cs * fa + sn * fb;
    frame.col(c.b) = -sn * fa + cs * fb;
    const Eigen::VectorXd pa = proj.col(c.a), pb = proj.col(c.b);
    proj.col(c.a) = cs * pa + sn * pb;
    proj.col(c.b) = -sn * pa + cs * pb;
  };

  double step = opts.step_init;
  for (int sweep = 0; sweep < opts.max_sweeps && step >= opts.step_min; ++sweep) {
    bool improved = false;
    const double cs = std::cos(step), sn = std::sin(step);
    // Single-coordinate moves.
    for (const Coord& c : coords) {
      for (double sign : {1.0, -1.0}) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double pa = proj(i, c.a), pb = proj(i, c.b);
          const double rot = cs * pa + sign * sn * pb;
          worst = std::max(worst, rowbase[i] + pa * pa - rot * rot);
        }
        if (worst < best2) {
          best2 = worst;
          apply(c, sign * step);
          refresh_rowbase();
          improved = true;
        }
      }
    }
    if (pair_moves) {
      for (std::size_t u = 0; u < coords.size(); ++u)
        for (std::size_t v = u + 1; v < coords.size(); ++v) {
          const Coord& c1 = coords[u];
          const Coord& c2 = coords[v];
          if (c1.a == c2.a || c1.b == c2.b) continue;
          for (double s1 : {1.0, -1.0})
            for (double s2 : {1.0, -1.0}) {
              double worst = 0.0;
              for (Eigen::Index i = 0; i < rows; ++i) {
                const double p1 = proj(i, c1.a), q1 = proj(i, c1.b);
                const double p2 = proj(i, c2.a), q2 = proj(i, c2.b);
                const double r1 = cs * p1 + s1 * sn * q1;
                const double r2 = cs * p2 + s2 * sn * q2;
                worst = std::max(worst, rowbase[i] + p1 * p1 - r1 * r1 +
                                            p2 * p2 - r2 * r2);
              }
              if (worst < best2) {
                best2 = worst;
                apply(c1, s1 * step);
                apply(c2, s2 * step);
                refresh_rowbase();
                improved = true;
              }
            }
        }
    }
    if (!improved) step *= 0.5;
  }
  MinmaxFit fit;
  fit.basis = frame.leftCols(m);
  fit.residual = sup_plane_distance(diffs, fit.basis);
  return fit;
}

inline MinmaxFit minmax_plane(const Eigen::MatrixXd& diffs, int m, int n,
                              const BetaOptions& opts) {
  const Eigen::MatrixXd pca = pca_frame(diffs, n);
  MinmaxFit best = minmax_descend(diffs, m, n, pca, opts);
  // Deterministic perturbed restarts guard against ridge stalls.
  RngStream rng(0xb37a, static_cast<std::uint64_t>(n * 16 + m));
  for (int start = 0; start < opts.extra_starts && best.residual > 0.0; ++start) {
    Eigen::MatrixXd frame = pca;
    for (int a = 0; a < m; ++a)
      for (int b = m; b < n; ++b) {
        const double angle = rng.uniform(-0.6, 0.6);
        const double cs = std::cos(angle), sn = std::sin(angle);
        const Eigen::VectorXd fa = frame.col(a), fb = frame.col(b);
        frame.col(a) = cs * fa + sn * fb;
        frame.col(b) = -sn * fa + cs * fb;
      }
    const MinmaxFit cand = minmax_descend(diffs, m, n, frame, opts);
    if (cand.residual < best.residual) best = cand;
  }
  return best;
}

inline BetaResult empty_beta(const Eigen::VectorXd& x, double r, int m,
                             const char* method) {
  BetaResult res;
  res.beta = 0.0;
  res.plane_basis = Eigen::MatrixXd::Identity(x.size(), m);
  res.center = x;
  res.radius = r;
  res.method = method;
  res.residual = 0.0;
  return res;
}

inline Eigen::MatrixXd centered_diffs(const SampledManifold& manifold,
                                      const std::vector<int>& idx,
                                      const Eigen::VectorXd& x) {
  Eigen::MatrixXd diffs(idx.size(), manifold.n());
  for (std::size_t i = 0; i < idx.size(); ++i)
    diffs.row(i) = manifold.point(idx[i]).transpose() - x.transpose();
  return diffs;
}

}  // namespace detail

/// beta(x, r): min over affine m-planes through x of the sup distance of the
/// samples in the closed ball B(x, r), normalized by r. Empty ball gives 0.
inline BetaResult beta_minmax(const SampledManifold& manifold,
                              const Eigen::VectorXd& x, double r,
                              const BetaOptions& opts = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("beta_minmax: radius <= 0");
  const auto idx = manifold.ball_indices(x, r, /*strict=*/false);
  if (idx.empty()) return detail::empty_beta(x, r, manifold.m(), "minmax");
  const Eigen::MatrixXd diffs = detail::centered_diffs(manifold, idx, x);
  const auto fit = detail::minmax_plane(diffs, manifold.m(), manifold.n(), opts);
  BetaResult res;
  res.beta = fit.residual / r;
  res.plane_basis = fit.basis;
  res.center = x;
  res.radius = r;
  res.method = "minmax";
  res.residual = fit.residual;
  return res;
}

/// Upper bound from the plane spanned by the top-m right singular directions
/// of the centered sample matrix; also the initializer of the min-max search.
inline BetaResult beta_pca_bound(const SampledManifold& manifold,
                                 const Eigen::VectorXd& x, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("beta_pca_bound: radius <= 0");
  const auto idx = manifold.ball_indices(x, r, /*strict=*/false);
  if (idx.empty()) return detail::empty_beta(x, r, manifold.m(), "pca_bound");
  const Eigen::MatrixXd diffs = detail::centered_diffs(manifold, idx, x);
  const Eigen::MatrixXd frame = detail::pca_frame(diffs, manifold.n());
  const Eigen::MatrixXd basis = frame.leftCols(manifold.m());
  const double worst = detail::sup_plane_distance(diffs, basis);
  BetaResult res;
  res.beta = worst / r;
  res.plane_basis = basis;
  res.center = x;
  res.radius = r;
  res.method = "pca_bound";
  res.residual = worst;
  return res;
}

/// Tangent-plane bound for graph patches at a grid node:
/// r^{-1} sup { |f(z) - f(x) - Df(x)(z - x)| : z on the grid, |z - x| <= 2r }.
inline double beta_graph_bound(const GraphPatch& patch, int node, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("beta_graph_bound: radius <= 0");
  if (node < 0 || node >= patch.grid().node_count())
    throw std::invalid_argument("beta_graph_bound: bad node");
  const Eigen::VectorXd x = patch.grid().position(node);
  const Eigen::VectorXd fx = patch.value(node);
  const Eigen::MatrixXd dfx = patch.derivative(node);
  double worst = 0.0;
  const int g = patch.grid().node_count();
  for (int z = 0; z < g; ++z) {
    const Eigen::VectorXd dz = patch.grid().position(z) - x;
    if (dz.norm() > 2.0 * r) continue;
    const Eigen::VectorXd dev = patch.value(z) - fx - dfx * dz;
    worst = std::max(worst, dev.norm());
  }
  return worst / r;
}

struct BetaProfile {
  std::vector<BetaResult> results;
  std::vector<double> sup_ratio;  // running sup of beta(x, r)/r
};

/// Per-radius beta values plus the running sup of beta(x, r)/r, the quantity
/// the energy bound consumes.
inline BetaProfile beta_profile(const SampledManifold& manifold,
                                const Eigen::VectorXd& x,
                                const std::vector<double>& radii,
                                const BetaOptions& opts = {}) {
  if (radii.empty()) throw std::invalid_argument("beta_profile: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw std::invalid_argument("beta_profile: radii must be positive and increasing");
  }
  BetaProfile profile;
  double running = 0.0;
  for (double r : radii) {
    profile.results.push_back(beta_minmax(manifold, x, r, opts));
    running = std::max(running, profile.results.back().beta / r);
    profile.sup_ratio.push_back(running);
  }
  return profile;
}

}  // namespace imc
