#pragma once

// Finite-dimensional geometric kernels: parallelotope (wedge) norms, simplex
// volumes, tuple diameters, Menger curvature c and its higher-dimensional
// substitute DC, plus a Cayley-Menger determinant route kept as an
// independent cross-check for the Gram-determinant route.

#include <Eigen/Dense>

#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imc {

class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Dimensions stay tiny (simplices on at most m+2 <= n+1 points), so all
// kernels run on fixed-capacity Eigen matrices; no heap traffic in hot loops.
inline constexpr int kMaxDim = 16;

using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// det(W W^T) for the l x n row matrix W, clamped to zero when roundoff
// drives it slightly negative (the Gram matrix is PSD by construction).
// Cofactor expansions for l <= 3: unlike LU they cancel exactly on exact
// rank-deficient input, so flat fixtures yield volumes that are 0.0 bitwise.
inline double gram_det(const double* vecs, int l, int n) {
  SmallMatrix g(l, l);
  for (int i = 0; i < l; ++i) {
    const double* vi = vecs + static_cast<std::ptrdiff_t>(i) * n;
    for (int j = i; j < l; ++j) {
      const double* vj = vecs + static_cast<std::ptrdiff_t>(j) * n;
      double dot = 0.0;
      for (int c = 0; c < n; ++c) dot += vi[c] * vj[c];
      g(i, j) = dot;
      g(j, i) = dot;
    }
  }
  double det;
  if (l == 1) {
    det = g(0, 0);
  } else if (l == 2) {
    det = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
  } else if (l == 3) {
    det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) -
          g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
          g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
  } else {
    det = g.determinant();
  }
  if (det < 0.0) {
    double scale = 1.0;
    for (int i = 0; i < l; ++i) scale *= g(i, i);
    if (-det < 1e-14 * std::max(scale, std::numeric_limits<double>::min()))
      return 0.0;
    return 0.0;  // PSD up to roundoff; larger negatives are still noise
  }
  return det;
}

inline double wedge_norm_flat(const double* vecs, int l, int n) {
  return std::sqrt(gram_det(vecs, l, n));
}

inline double dist(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int c = 0; c < n; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double diameter_flat(const double* pts, int count, int n) {
  double best = 0.0;
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j)
      best = std::max(best, dist(pts + static_cast<std::ptrdiff_t>(i) * n,
                                 pts + static_cast<std::ptrdiff_t>(j) * n, n));
  return best;
}

inline double factorial(int d) {
  double f = 1.0;
  for (int i = 2; i <= d; ++i) f *= i;
  return f;
}

// d-volume of the simplex on count = d+1 points (rows of pts).
inline double simplex_volume_flat(const double* pts, int count, int n) {
  const int d = count - 1;
  if (d == 0) return 1.0;
  double edges[kMaxDim * kMaxDim];
  for (int i = 1; i < count; ++i) {
    const double* p = pts + static_cast<std::ptrdiff_t>(i) * n;
    for (int c = 0; c < n; ++c) edges[(i - 1) * n + c] = p[c] - pts[c];
  }
  return wedge_norm_flat(edges, d, n) / factorial(d);
}

// DC on count = m+2 points; zero by convention on degenerate tuples.
inline double discrete_curvature_flat(const double* pts, int count, int n) {
  const double diam = diameter_flat(pts, count, n);
  if (diam == 0.0) return 0.0;
  const double vol = simplex_volume_flat(pts, count, n);
  double denom = diam;
  for (int i = 1; i < count; ++i) denom *= diam;  // diam^{m+2}
  return vol / denom;
}

inline double menger_curvature_flat(const double* x, const double* y,
                                    const double* z, int n) {
  const double a = dist(x, y, n), b = dist(y, z, n), c = dist(z, x, n);
  if (a == 0.0 || b == 0.0 || c == 0.0) return 0.0;
  double edges[2 * kMaxDim];
  for (int i = 0; i < n; ++i) {
    edges[i] = y[i] - x[i];
    edges[n + i] = z[i] - x[i];
  }
  const double area = 0.5 * wedge_norm_flat(edges, 2, n);
  return 4.0 * area / (a * b * c);
}

}  // namespace detail

/// Ordered tuple of k points in R^n, stored row-major.
class PointTuple {
public:
  PointTuple(std::vector<double> flat, int k, int n)
      : flat_(std::move(flat)), k_(k), n_(n) {
    if (k_ < 1 || n_ < 1)
      throw std::invalid_argument("PointTuple: need k >= 1 and n >= 1");
    if (static_cast<int>(flat_.size()) != k_ * n_)
      throw std::invalid_argument("PointTuple: flat size != k*n");
    for (double v : flat_)
      if (!std::isfinite(v))
        throw std::invalid_argument("PointTuple: non-finite coordinate");
  }

  explicit PointTuple(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) throw std::invalid_argument("PointTuple: empty");
    k_ = static_cast<int>(points.size());
    n_ = static_cast<int>(points[0].size());
    flat_.reserve(static_cast<size_t>(k_) * n_);
    for (const auto& p : points) {
      if (p.size() != n_)
        throw std::invalid_argument("PointTuple: mixed ambient dimensions");
      for (int c = 0; c < n_; ++c) {
        if (!std::isfinite(p[c]))
          throw std::invalid_argument("PointTuple: non-finite coordinate");
        flat_.push_back(p[c]);
      }
    }
  }

  int count() const { return k_; }
  int dim() const { return n_; }
  const double* data() const { return flat_.data(); }

  Eigen::Map<const Eigen::VectorXd> point(int i) const {
    return {flat_.data() + static_cast<std::ptrdiff_t>(i) * n_,
            static_cast<Eigen::Index>(n_)};
  }

  PointTuple scaled(double lambda) const {
    std::vector<double> flat(flat_);
    for (double& v : flat) v *= lambda;
    return {std::move(flat), k_, n_};
  }

private:
  std::vector<double> flat_;
  int k_ = 0;
  int n_ = 0;
};

/// Parameter block (m, n, k, p) of the intermediate energy, with the derived
/// smoothness s = 1 - m(k-1)/p.
struct EnergySpec {
  int m;
  int n;
  int k;
  double p;
  double s;

  EnergySpec(int m_, int n_, int k_, double p_) : m(m_), n(n_), k(k_), p(p_) {
    if (m < 1 || n < 1 || m >= n)
      throw std::invalid_argument("EnergySpec: need 1 <= m < n");
    if (k < 2 || k > m + 2)
      throw std::invalid_argument("EnergySpec: need 2 <= k <= m+2");
    if (!(p > static_cast<double>(m) * (k - 1)))
      throw std::invalid_argument("EnergySpec: need p > m(k-1)");
    s = 1.0 - static_cast<double>(m) * (k - 1) / p;
  }
};

/// l-dimensional volume of the parallelotope spanned by the given vectors,
/// i.e. the Euclidean norm of their outer product. Computed as
/// sqrt(det(W^T W)), which equals the root-sum-of-squares of all l-minors.
inline double wedge_norm(std::span<const Eigen::VectorXd> vectors) {
  const int l = static_cast<int>(vectors.size());
  if (l < 1) throw std::invalid_argument("wedge_norm: no vectors");
  const int n = static_cast<int>(vectors[0].size());
  if (l > n) throw std::invalid_argument("wedge_norm: more vectors than dims");
  std::vector<double> flat(static_cast<size_t>(l) * n);
  for (int i = 0; i < l; ++i) {
    if (vectors[i].size() != n)
      throw std::invalid_argument("wedge_norm: dimension mismatch");
    for (int c = 0; c < n; ++c) flat[static_cast<size_t>(i) * n + c] = vectors[i][c];
  }
  return detail::wedge_norm_flat(flat.data(), l, n);
}

inline double wedge_norm(std::initializer_list<Eigen::VectorXd> vectors) {
  std::vector<Eigen::VectorXd> v(vectors);
  return wedge_norm(std::span<const Eigen::VectorXd>(v));
}

/// H^d measure of the convex hull of d+1 points: wedge norm of the edge
/// vectors out of vertex 0 divided by d!. Affinely dependent input gives 0.
inline double simplex_volume(const PointTuple& t) {
  const int d = t.count() - 1;
  if (d > t.dim())
    throw std::invalid_argument("simplex_volume: more than n+1 points");
  return detail::simplex_volume_flat(t.data(), t.count(), t.dim());
}

/// Same volume via the Cayley-Menger determinant of pairwise squared
/// distances; independent of the Gram route and used to cross-check it.
inline double cayley_menger_volume(const PointTuple& t) {
  const int count = t.count();
  const int d = count - 1;
  if (d > t.dim())
    throw std::invalid_argument("cayley_menger_volume: more than n+1 points");
  if (d == 0) return 1.0;

  detail::SmallMatrix cm(count + 1, count + 1);
  cm(0, 0) = 0.0;
  for (int i = 0; i < count; ++i) {
    cm(0, i + 1) = 1.0;
    cm(i + 1, 0) = 1.0;
  }
  double max_d2 = 0.0;
  for (int i = 0; i < count; ++i) {
    cm(i + 1, i + 1) = 0.0;
    for (int j = i + 1; j < count; ++j) {
      const double dij = detail::dist(t.data() + static_cast<std::ptrdiff_t>(i) * t.dim(),
                                      t.data() + static_cast<std::ptrdiff_t>(j) * t.dim(),
                                      t.dim());
      const double d2 = dij * dij;
      cm(i + 1, j + 1) = d2;
      cm(j + 1, i + 1) = d2;
      max_d2 = std::max(max_d2, d2);
    }
  }
  const double det = cm.determinant();
  const double fact = detail::factorial(d);
  const double norm = std::pow(2.0, d) * fact * fact;
  double v2 = ((d + 1) % 2 == 0 ? det : -det) / norm;
  if (v2 < 0.0) {
    double scale2 = 1.0;
    for (int i = 0; i < d; ++i) scale2 *= max_d2;
    scale2 = std::max(scale2 / norm, std::numeric_limits<double>::min());
    if (-v2 > 1e-9 * scale2)
      throw NumericalError("cayley_menger_volume: negative squared volume " +
                           std::to_string(v2));
    v2 = 0.0;
  }
  return std::sqrt(v2);
}

/// Max pairwise distance; 0 for a single point.
inline double diameter(const PointTuple& t) {
  return detail::diameter_flat(t.data(), t.count(), t.dim());
}

/// Menger curvature c(x,y,z) = 4 Area / (|x-y||y-z||z-x|); equals the
/// reciprocal circumradius. Zero on collinear or coincident triples.
inline double menger_curvature(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& z) {
  const int n = static_cast<int>(x.size());
  if (y.size() != n || z.size() != n)
    throw std::invalid_argument("menger_curvature: dimension mismatch");
  return detail::menger_curvature_flat(x.data(), y.data(), z.data(), n);
}

/// DC on m+2 points: H^{m+1}(simplex) / diam^{m+2}. Scales like 1/length.
/// Zero by convention when the tuple degenerates (diam = 0).
inline double discrete_curvature(const PointTuple& t) {
  if (t.count() < 2)
    throw std::invalid_argument("discrete_curvature: need at least 2 points");
  if (t.count() - 1 > t.dim())
    throw std::invalid_argument("discrete_curvature: simplex dim exceeds n");
  return detail::discrete_curvature_flat(t.data(), t.count(), t.dim());
}

/// Volume of the d-dimensional unit ball, pi^{d/2} / Gamma(d/2 + 1).
inline double unit_ball_volume(int d) {
  if (d < 0) throw std::invalid_argument("unit_ball_volume: d < 0");
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

}  // namespace imc
