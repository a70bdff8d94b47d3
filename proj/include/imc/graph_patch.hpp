#pragma once

// Local graph representations: f : D_delta subset R^m -> R^{n-m} sampled on a
// symmetric disc grid together with Df, normalized so the sampled Lipschitz
// constant is at most 1. Includes the |x|^alpha cusp family used to probe the
// W^{1+s,p} membership threshold, and a small family of smooth profiles.

#include "imc/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace imc {

// Scalar profile g(x) with analytic gradient; the patch embeds it as the
// first codomain component.
struct ScalarProfile {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

namespace detail {

// C-infinity transition psi: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
inline double bump_phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double bump_psi(double t) {
  const double a = bump_phi(t);
  const double b = bump_phi(1.0 - t);
  return a / (a + b);
}

inline double bump_psi_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = bump_phi(t);
  const double b = bump_phi(1.0 - t);
  const double ap = a / (t * t);
  const double bp = -b / ((1.0 - t) * (1.0 - t));
  const double denom = (a + b) * (a + b);
  return (ap * (a + b) - a * (ap + bp)) / denom;
}

}  // namespace detail

// Radial cutoff equal to 1 on |x| <= delta/2 and 0 at |x| >= delta.
inline double bump_cutoff(double r, double delta) {
  return detail::bump_psi((delta - r) / (0.5 * delta));
}

inline double bump_cutoff_prime(double r, double delta) {
  return detail::bump_psi_prime((delta - r) / (0.5 * delta)) * (-2.0 / delta);
}

class GraphPatch {
public:
  GraphPatch(int m, int n, DiscGrid grid, std::vector<double> values,
             std::vector<double> derivs, std::string label)
      : m_(m), n_(n), grid_(std::move(grid)), values_(std::move(values)),
        derivs_(std::move(derivs)), label_(std::move(label)) {
    if (m_ >= n_) throw std::invalid_argument("GraphPatch: need m < n");
    const std::size_t g = static_cast<std::size_t>(grid_.node_count());
    if (values_.size() != g * codim() || derivs_.size() != g * codim() * m_)
      throw std::invalid_argument("GraphPatch: value/derivative size mismatch");
    lipschitz_bound_ = measure_lipschitz();
  }

  int m() const { return m_; }
  int n() const { return n_; }
  int codim() const { return n_ - m_; }
  double delta() const { return grid_.delta(); }
  double spacing() const { return grid_.spacing(); }
  const DiscGrid& grid() const { return grid_; }
  const std::string& label() const { return label_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  const std::vector<double>& raw_values() const { return values_; }
  const std::vector<double>& raw_derivs() const { return derivs_; }

  Eigen::Map<const Eigen::VectorXd> value(int node) const {
    return {values_.data() + static_cast<std::ptrdiff_t>(node) * codim(),
            static_cast<Eigen::Index>(codim())};
  }

  // Df at a node as a (n-m) x m matrix (row-major storage).
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
  derivative(int node) const {
    return {derivs_.data() + static_cast<std::ptrdiff_t>(node) * codim() * m_,
            static_cast<Eigen::Index>(codim()), static_cast<Eigen::Index>(m_)};
  }

  // Rescales values and derivatives so the sampled Lipschitz constant is <= 1.
  // Harmless for membership questions: a constant factor scales seminorms and
  // energies by known powers.
  void normalize_lipschitz() {
    if (lipschitz_bound_ <= 1.0) return;
    const double factor = 1.0 / (lipschitz_bound_ * (1.0 + 1e-12));
    for (double& v : values_) v *= factor;
    for (double& d : derivs_) d *= factor;
    lipschitz_bound_ = measure_lipschitz();
  }

private:
  double measure_lipschitz() const {
    const int g = grid_.node_count();
    const int d = codim();
    double best = 0.0;
    // Sampled pairwise quotients.
    for (int i = 0; i < g; ++i) {
      const int* ii = grid_.node_index(i);
      const double* vi = values_.data() + static_cast<std::ptrdiff_t>(i) * d;
      for (int j = i + 1; j < g; ++j) {
        const int* jj = grid_.node_index(j);
        double dx2 = 0.0;
        for (int c = 0; c < m_; ++c) {
          const double diff = static_cast<double>(ii[c] - jj[c]) * grid_.spacing();
          dx2 += diff * diff;
        }
        const double* vj = values_.data() + static_cast<std::ptrdiff_t>(j) * d;
        double dv2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double diff = vi[c] - vj[c];
          dv2 += diff * diff;
        }
        if (dv2 > best * best * dx2) best = std::sqrt(dv2 / dx2);
      }
    }
    // Operator norm of Df at nodes (rigorous bound for the embedding Jacobian).
    for (int i = 0; i < g; ++i) {
      Eigen::MatrixXd df = derivative(i);
      const double op = df.jacobiSvd().singularValues()(0);
      best = std::max(best, op);
    }
    return best;
  }

  int m_;
  int n_;
  DiscGrid grid_;
  std::vector<double> values_;
  std::vector<double> derivs_;
  std::string label_;
  double lipschitz_bound_ = 0.0;
};

/// Samples a scalar profile on the disc grid with grid count M (h = delta/M),
/// embedding it as the first of the n-m codomain components.
inline GraphPatch make_patch(const ScalarProfile& profile, int m, int n,
                             double delta, int grid_count,
                             bool normalize = true) {
  if (grid_count < 1) throw std::invalid_argument("make_patch: grid_count < 1");
  if (m >= n) throw std::invalid_argument("make_patch: need m < n");
  const double h = delta / grid_count;
  DiscGrid grid(m, delta, h);
  const int g = grid.node_count();
  const int d = n - m;
  std::vector<double> values(static_cast<std::size_t>(g) * d, 0.0);
  std::vector<double> derivs(static_cast<std::size_t>(g) * d * m, 0.0);
  for (int i = 0; i < g; ++i) {
    const Eigen::VectorXd x = grid.position(i);
    values[static_cast<std::size_t>(i) * d] = profile.value(x);
    const Eigen::VectorXd grad = profile.gradient(x);
    for (int c = 0; c < m; ++c)
      derivs[(static_cast<std::size_t>(i) * d) * m + c] = grad[c];
  }
  GraphPatch patch(m, n, std::move(grid), std::move(values), std::move(derivs),
                   profile.name);
  if (normalize) patch.normalize_lipschitz();
  return patch;
}

/// f_alpha(x) = |x|^alpha * eta(|x|) with eta the smooth cutoff that is 1 on
/// D_{delta/2} and 0 outside D_delta.
inline ScalarProfile alpha_cusp_profile(double alpha, double delta) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha_cusp_profile: alpha <= 0");
  ScalarProfile p;
  p.name = "graph_alpha(alpha=" + std::to_string(alpha) + ")";
  p.value = [alpha, delta](const Eigen::VectorXd& x) {
    const double r = x.norm();
    return std::pow(r, alpha) * bump_cutoff(r, delta);
  };
  p.gradient = [alpha, delta](const Eigen::VectorXd& x) {
    const double r = x.norm();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    if (r == 0.0) return g;  // alpha > 1 in every study; radial slope -> 0
    const double radial = alpha * std::pow(r, alpha - 1.0) * bump_cutoff(r, delta) +
                          std::pow(r, alpha) * bump_cutoff_prime(r, delta);
    g = (radial / r) * x;
    return g;
  };
  return p;
}

/// Five smooth profiles with Lipschitz constant < 1 on the unit disc; used as
/// the regular side of the test family.
inline std::vector<ScalarProfile> smooth_profiles(int m) {
  auto nth = [m](const Eigen::VectorXd& x, int c) {
    return c < m ? x[c] : 0.0;
  };
  std::vector<ScalarProfile> ps;
  ps.push_back({"smooth_sin",
                [nth](const Eigen::VectorXd& x) { return 0.3 * std::sin(2.0 * nth(x, 0)); },
                [nth, m](const Eigen::VectorXd& x) {
                  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
                  g[0] = 0.6 * std::cos(2.0 * nth(x, 0));
                  return g;
                }});
  ps.push_back({"smooth_quadratic",
                [](const Eigen::VectorXd& x) { return 0.25 * x.squaredNorm(); },
                [](const Eigen::VectorXd& x) { return Eigen::VectorXd(0.5 * x); }});
  ps.push_back({"smooth_gaussian",
                [](const Eigen::VectorXd& x) { return 0.3 * std::exp(-2.0 * x.squaredNorm()); },
                [](const Eigen::VectorXd& x) {
                  return Eigen::VectorXd(-1.2 * std::exp(-2.0 * x.squaredNorm()) * x);
                }});
  ps.push_back({"smooth_cos",
                [nth](const Eigen::VectorXd& x) { return 0.2 * std::cos(3.0 * nth(x, 0)); },
                [nth, m](const Eigen::VectorXd& x) {
                  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
                  g[0] = -0.6 * std::sin(3.0 * nth(x, 0));
                  return g;
                }});
  ps.push_back({"smooth_cubic",
                [nth](const Eigen::VectorXd& x) {
                  const double t = nth(x, 0);
                  return 0.15 * (t * t * t - t);
                },
                [nth, m](const Eigen::VectorXd& x) {
                  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
                  const double t = nth(x, 0);
                  g[0] = 0.15 * (3.0 * t * t - 1.0);
                  return g;
                }});
  return ps;
}

inline GraphPatch graph_alpha_patch(double alpha, double delta, int m, int n,
                                    int grid_count) {
  return make_patch(alpha_cusp_profile(alpha, delta), m, n, delta, grid_count);
}

inline std::vector<double> finite_difference_derivs(const DiscGrid& grid,
                                                    const std::vector<double>& values,
                                                    int codim);

/// Builds a patch from sampled values alone; Df comes from central
/// differences (fourth order where the stencil fits, one-sided at the rim).
inline GraphPatch make_patch_from_values(int m, int n, DiscGrid grid,
                                         std::vector<double> values,
                                         std::string label,
                                         bool normalize = true) {
  std::vector<double> derivs = finite_difference_derivs(grid, values, n - m);
  GraphPatch patch(m, n, std::move(grid), std::move(values), std::move(derivs),
                   std::move(label));
  if (normalize) patch.normalize_lipschitz();
  return patch;
}

/// Fills Df by differencing the sampled values: fourth-order central stencils
/// where they fit, one-sided second order at the disc boundary. Used when a
/// patch is built from raw values with no analytic gradient.
inline std::vector<double> finite_difference_derivs(const DiscGrid& grid,
                                                    const std::vector<double>& values,
                                                    int codim) {
  const int m = grid.m();
  const int g = grid.node_count();
  const double h = grid.spacing();
  std::vector<double> derivs(static_cast<std::size_t>(g) * codim * m, 0.0);
  std::vector<int> idx(m);
  auto value_at = [&](int node, int c) {
    return values[static_cast<std::size_t>(node) * codim + c];
  };
  for (int i = 0; i < g; ++i) {
    const int* base = grid.node_index(i);
    for (int axis = 0; axis < m; ++axis) {
      auto shifted = [&](int off) {
        for (int d = 0; d < m; ++d) idx[d] = base[d];
        idx[axis] += off;
        return grid.find(idx.data());
      };
      const int p1 = shifted(1), p2 = shifted(2);
      const int m1 = shifted(-1), m2 = shifted(-2);
      for (int c = 0; c < codim; ++c) {
        double* out = &derivs[(static_cast<std::size_t>(i) * codim + c) * m + axis];
        if (p1 >= 0 && p2 >= 0 && m1 >= 0 && m2 >= 0) {
          *out = (-value_at(p2, c) + 8.0 * value_at(p1, c) -
                  8.0 * value_at(m1, c) + value_at(m2, c)) /
                 (12.0 * h);
        } else if (p1 >= 0 && m1 >= 0) {
          *out = (value_at(p1, c) - value_at(m1, c)) / (2.0 * h);
        } else if (p1 >= 0 && p2 >= 0) {
          *out = (-3.0 * value_at(i, c) + 4.0 * value_at(p1, c) -
                  value_at(p2, c)) /
                 (2.0 * h);
        } else if (m1 >= 0 && m2 >= 0) {
          *out = (3.0 * value_at(i, c) - 4.0 * value_at(m1, c) +
                  value_at(m2, c)) /
                 (2.0 * h);
        } else if (p1 >= 0) {
          *out = (value_at(p1, c) - value_at(i, c)) / h;
        } else if (m1 >= 0) {
          *out = (value_at(i, c) - value_at(m1, c)) / h;
        }
      }
    }
  }
  return derivs;
}

}  // namespace imc
