#pragma once

// Weighted point samples of m-dimensional sets in R^n with H^m quadrature
// weights: fixture generators (circle, sphere, torus, torus knots, embedded
// graph patches), ball queries with a kd-tree above the brute-force regime,
// and uniform scaling.

#include "imc/geometry.hpp"
#include "imc/graph_patch.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace imc {

namespace detail {

// Static kd-tree over row-major points; median split, cycling axes.
class KdTree {
public:
  KdTree(const std::vector<double>& pts, int n) : pts_(pts), n_(n) {
    const int count = static_cast<int>(pts.size()) / n;
    order_.resize(count);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * count / kLeafSize + 2);
    root_ = build(0, count, 0);
  }

  // Indices with dist(center, p) < r (strict = true) or <= r.
  void query_ball(const double* center, double radius, bool strict,
                  std::vector<int>& out) const {
    query(root_, center, radius, strict, out);
    std::sort(out.begin(), out.end());
  }

private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int axis = -1;          // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end, int depth) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    const int axis = depth % n_;
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       return coord(a, axis) < coord(b, axis);
                     });
    node.axis = axis;
    node.split = coord(order_[mid], axis);
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  double coord(int i, int axis) const {
    return pts_[static_cast<std::size_t>(i) * n_ + axis];
  }

  void query(int node_id, const double* center, double radius, bool strict,
             std::vector<int>& out) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const double d = dist(pts_.data() + static_cast<std::size_t>(idx) * n_,
                              center, n_);
        if (strict ? d < radius : d <= radius) out.push_back(idx);
      }
      return;
    }
    const double delta = center[node.axis] - node.split;
    if (delta < radius) query(node.left, center, radius, strict, out);
    if (-delta <= radius) query(node.right, center, radius, strict, out);
  }

  const std::vector<double>& pts_;
  int n_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = 0;
};

}  // namespace detail

class SampledManifold {
public:
  // Above this sample count, ball queries go through the kd-tree.
  static constexpr int kBruteForceLimit = 10000;

  SampledManifold(int m, int n, std::vector<double> points,
                  std::vector<double> weights, std::string label,
                  std::string shape_params_json = "{}")
      : m_(m), n_(n), points_(std::move(points)), weights_(std::move(weights)),
        label_(std::move(label)), shape_params_(std::move(shape_params_json)) {
    if (m_ < 1 || m_ >= n_)
      throw std::invalid_argument("SampledManifold: need 1 <= m < n");
    if (weights_.empty() ||
        points_.size() != weights_.size() * static_cast<std::size_t>(n_))
      throw std::invalid_argument("SampledManifold: size mismatch or empty");
    for (double w : weights_)
      if (!(w > 0.0))
        throw std::invalid_argument("SampledManifold: nonpositive weight");
    for (double c : points_)
      if (!std::isfinite(c))
        throw std::invalid_argument("SampledManifold: non-finite coordinate");
    if (size() > kBruteForceLimit)
      tree_ = std::make_shared<detail::KdTree>(points_, n_);
  }

  int m() const { return m_; }
  int n() const { return n_; }
  int size() const { return static_cast<int>(weights_.size()); }
  const std::string& label() const { return label_; }
  const std::string& shape_params() const { return shape_params_; }
  const std::vector<double>& raw_points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }

  const double* point_ptr(int i) const {
    return points_.data() + static_cast<std::size_t>(i) * n_;
  }

  Eigen::Map<const Eigen::VectorXd> point(int i) const {
    return {point_ptr(i), static_cast<Eigen::Index>(n_)};
  }

  double total_weight() const {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
  }

  PointTuple tuple(std::span<const int> indices) const {
    std::vector<double> flat;
    flat.reserve(indices.size() * n_);
    for (int i : indices)
      flat.insert(flat.end(), point_ptr(i), point_ptr(i) + n_);
    return {std::move(flat), static_cast<int>(indices.size()), n_};
  }

  // lambda * Sigma: points scale by lambda, H^m weights by lambda^m.
  SampledManifold scaled(double lambda) const {
    if (!(lambda > 0.0))
      throw std::invalid_argument("SampledManifold::scaled: lambda <= 0");
    std::vector<double> pts(points_);
    for (double& c : pts) c *= lambda;
    std::vector<double> ws(weights_);
    const double wf = std::pow(lambda, m_);
    for (double& w : ws) w *= wf;
    return {m_, n_, std::move(pts), std::move(ws), label_, shape_params_};
  }

  // Sample indices in the ball around center; strict = open ball.
  std::vector<int> ball_indices(const Eigen::VectorXd& center, double radius,
                                bool strict) const {
    if (center.size() != n_)
      throw std::invalid_argument("ball_indices: center dimension mismatch");
    std::vector<int> out;
    if (tree_) {
      tree_->query_ball(center.data(), radius, strict, out);
      return out;
    }
    for (int i = 0; i < size(); ++i) {
      const double d = detail::dist(point_ptr(i), center.data(), n_);
      if (strict ? d < radius : d <= radius) out.push_back(i);
    }
    return out;
  }

private:
  int m_;
  int n_;
  std::vector<double> points_;
  std::vector<double> weights_;
  std::string label_;
  std::string shape_params_;
  std::shared_ptr<const detail::KdTree> tree_;
};

/// Indices of samples in the open ball B(center, radius).
inline std::vector<int> neighborhood(const SampledManifold& manifold,
                                     const Eigen::VectorXd& center,
                                     double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("neighborhood: radius <= 0");
  return manifold.ball_indices(center, radius, /*strict=*/true);
}

/// Max pairwise sample distance. O(N^2); fixture sizes keep this cheap.
inline double manifold_diameter(const SampledManifold& manifold) {
  return detail::diameter_flat(manifold.raw_points().data(), manifold.size(),
                               manifold.n());
}

/// Median nearest-neighbor spacing, the scale behind the default diameter
/// split lambda = 10 x median.
inline double median_nn_spacing(const SampledManifold& manifold) {
  const int count = manifold.size();
  if (count < 2) return 0.0;
  std::vector<double> nn(count, std::numeric_limits<double>::infinity());
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j) {
      const double d =
          detail::dist(manifold.point_ptr(i), manifold.point_ptr(j), manifold.n());
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  std::nth_element(nn.begin(), nn.begin() + count / 2, nn.end());
  return nn[count / 2];
}

// ---------------------------------------------------------------------------
// Generators. All fixtures are deterministic: uniform parameter grids with
// Jacobian weights, Fibonacci sampling for the sphere.

inline SampledManifold generate_circle(double radius, int count) {
  if (!(radius > 0.0) || count < 1)
    throw std::invalid_argument("generate_circle: bad parameters");
  std::vector<double> pts(static_cast<std::size_t>(count) * 2);
  std::vector<double> ws(count, 2.0 * std::numbers::pi * radius / count);
  for (int i = 0; i < count; ++i) {
    const double t = 2.0 * std::numbers::pi * i / count;
    pts[2 * i] = radius * std::cos(t);
    pts[2 * i + 1] = radius * std::sin(t);
  }
  return {1, 2, std::move(pts), std::move(ws), "circle",
          "{\"R\":" + std::to_string(radius) + "}"};
}

inline SampledManifold generate_sphere(double radius, int count) {
  if (!(radius > 0.0) || count < 1)
    throw std::invalid_argument("generate_sphere: bad parameters");
  std::vector<double> pts(static_cast<std::size_t>(count) * 3);
  std::vector<double> ws(count, 4.0 * std::numbers::pi * radius * radius / count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts[3 * i] = radius * rho * std::cos(phi);
    pts[3 * i + 1] = radius * rho * std::sin(phi);
    pts[3 * i + 2] = radius * z;
  }
  return {2, 3, std::move(pts), std::move(ws), "sphere",
          "{\"R\":" + std::to_string(radius) + "}"};
}

inline SampledManifold generate_torus(double major, double minor,
                                      int count_per_axis) {
  if (!(major > minor) || !(minor > 0.0) || count_per_axis < 1)
    throw std::invalid_argument("generate_torus: bad parameters");
  const int cu = count_per_axis, cv = count_per_axis;
  std::vector<double> pts;
  std::vector<double> ws;
  pts.reserve(static_cast<std::size_t>(cu) * cv * 3);
  ws.reserve(static_cast<std::size_t>(cu) * cv);
  const double du = 2.0 * std::numbers::pi / cu;
  const double dv = 2.0 * std::numbers::pi / cv;
  for (int i = 0; i < cu; ++i)
    for (int j = 0; j < cv; ++j) {
      const double u = i * du, v = j * dv;
      const double ring = major + minor * std::cos(v);
      pts.push_back(ring * std::cos(u));
      pts.push_back(ring * std::sin(u));
      pts.push_back(minor * std::sin(v));
      ws.push_back(minor * ring * du * dv);
    }
  return {2, 3, std::move(pts), std::move(ws), "torus",
          "{\"R\":" + std::to_string(major) + ",\"r\":" + std::to_string(minor) + "}"};
}

inline SampledManifold generate_torus_knot(int p, int q, double major,
                                           double minor, int count) {
  if (p < 1 || q < 1 || !(major > minor) || !(minor > 0.0) || count < 1)
    throw std::invalid_argument("generate_torus_knot: bad parameters");
  std::vector<double> pts(static_cast<std::size_t>(count) * 3);
  std::vector<double> ws(count);
  const double dt = 2.0 * std::numbers::pi / count;
  for (int i = 0; i < count; ++i) {
    const double t = i * dt;
    const double ring = major + minor * std::cos(q * t);
    pts[3 * i] = ring * std::cos(p * t);
    pts[3 * i + 1] = ring * std::sin(p * t);
    pts[3 * i + 2] = minor * std::sin(q * t);
    // |gamma'(t)|
    const double dring = -minor * q * std::sin(q * t);
    const double dx = dring * std::cos(p * t) - ring * p * std::sin(p * t);
    const double dy = dring * std::sin(p * t) + ring * p * std::cos(p * t);
    const double dz = minor * q * std::cos(q * t);
    ws[i] = std::sqrt(dx * dx + dy * dy + dz * dz) * dt;
  }
  return {1, 3, std::move(pts), std::move(ws), "torus_knot",
          "{\"p\":" + std::to_string(p) + ",\"q\":" + std::to_string(q) +
              ",\"R\":" + std::to_string(major) + ",\"r\":" + std::to_string(minor) + "}"};
}

/// Embeds a graph patch as the sampled set {(x, f(x))} with cell weights
/// h^m |JF(x)|, |JF| = sqrt(det(I + Df^T Df)). With Lipschitz bound <= 1 the
/// Jacobian obeys |JF| <= 2^{m/2}.
inline SampledManifold graph_embed(const GraphPatch& patch) {
  const int m = patch.m(), n = patch.n();
  const int g = patch.grid().node_count();
  const double cell = std::pow(patch.spacing(), m);
  std::vector<double> pts(static_cast<std::size_t>(g) * n);
  std::vector<double> ws(g);
  const double jf_cap = std::pow(2.0, 0.5 * m) * (1.0 + 1e-12);
  for (int i = 0; i < g; ++i) {
    const Eigen::VectorXd x = patch.grid().position(i);
    const auto f = patch.value(i);
    for (int c = 0; c < m; ++c) pts[static_cast<std::size_t>(i) * n + c] = x[c];
    for (int c = 0; c < n - m; ++c)
      pts[static_cast<std::size_t>(i) * n + m + c] = f[c];
    Eigen::MatrixXd df = patch.derivative(i);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(m, m) + df.transpose() * df;
    const double jf = std::sqrt(gram.determinant());
    if (patch.lipschitz_bound() <= 1.0 && jf > jf_cap)
      throw NumericalError("graph_embed: Jacobian exceeds 2^{m/2} with L <= 1");
    ws[i] = cell * jf;
  }
  return {m, n, std::move(pts), std::move(ws), "graph:" + patch.label()};
}

// ---------------------------------------------------------------------------
// Shape dispatch used by the CLI and experiment configs.

struct CircleShape { double radius = 1.0; };
struct SphereShape { double radius = 1.0; };
struct TorusShape { double major = 2.0; double minor = 0.5; };
struct TorusKnotShape { int p = 2; int q = 3; double major = 2.0; double minor = 0.5; };
struct GraphAlphaShape { double alpha = 2.0; double delta = 1.0; int m = 1; int n = 2; };

using Shape = std::variant<CircleShape, SphereShape, TorusShape, TorusKnotShape,
                           GraphAlphaShape>;

inline SampledManifold generate(const Shape& shape, int resolution) {
  if (resolution < 1) throw std::invalid_argument("generate: resolution < 1");
  return std::visit(
      [&](const auto& s) -> SampledManifold {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CircleShape>)
          return generate_circle(s.radius, resolution);
        else if constexpr (std::is_same_v<T, SphereShape>)
          return generate_sphere(s.radius, resolution);
        else if constexpr (std::is_same_v<T, TorusShape>)
          return generate_torus(s.major, s.minor, resolution);
        else if constexpr (std::is_same_v<T, TorusKnotShape>)
          return generate_torus_knot(s.p, s.q, s.major, s.minor, resolution);
        else
          return graph_embed(
              graph_alpha_patch(s.alpha, s.delta, s.m, s.n, resolution));
      },
      shape);
}

}  // namespace imc
