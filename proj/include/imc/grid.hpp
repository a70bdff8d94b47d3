#pragma once

// Regular lattice on the disc D_delta in R^m, symmetric about the origin so
// that every node y has -y on the grid and second differences f(y+w) - 2f(y)
// + f(y-w) are evaluable on-grid.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace imc {

class DiscGrid {
public:
  DiscGrid(int m, double delta, double h) : m_(m), delta_(delta), h_(h) {
    if (m < 1 || m > 4)
      throw std::invalid_argument("DiscGrid: supported for 1 <= m <= 4");
    if (!(h > 0.0) || !(delta > 0.0))
      throw std::invalid_argument("DiscGrid: need delta, h > 0");
    half_span_ = static_cast<int>(std::floor(delta / h + 1e-9));
    side_ = 2 * half_span_ + 1;
    std::int64_t box = 1;
    for (int d = 0; d < m_; ++d) box *= side_;
    node_of_cell_.assign(static_cast<std::size_t>(box), -1);

    const double r2max = (delta / h) * (delta / h) * (1.0 + 1e-12);
    std::vector<int> idx(m_, -half_span_);
    for (;;) {
      double r2 = 0.0;
      for (int d = 0; d < m_; ++d) r2 += static_cast<double>(idx[d]) * idx[d];
      if (r2 <= r2max) {
        node_of_cell_[cell_of(idx.data())] = static_cast<int>(nodes_.size() / m_);
        for (int d = 0; d < m_; ++d) nodes_.push_back(idx[d]);
      }
      int d = m_ - 1;
      while (d >= 0 && idx[d] == half_span_) idx[d--] = -half_span_;
      if (d < 0) break;
      ++idx[d];
    }
  }

  int m() const { return m_; }
  double delta() const { return delta_; }
  double spacing() const { return h_; }
  int half_span() const { return half_span_; }
  int node_count() const { return static_cast<int>(nodes_.size()) / m_; }

  const int* node_index(int i) const { return nodes_.data() + static_cast<std::ptrdiff_t>(i) * m_; }

  Eigen::VectorXd position(int i) const {
    Eigen::VectorXd x(m_);
    const int* idx = node_index(i);
    for (int d = 0; d < m_; ++d) x[d] = idx[d] * h_;
    return x;
  }

  // Node id of the given lattice multi-index, or -1 when off the disc.
  int find(const int* idx) const {
    for (int d = 0; d < m_; ++d)
      if (idx[d] < -half_span_ || idx[d] > half_span_) return -1;
    return node_of_cell_[cell_of(idx)];
  }

  int origin() const {
    std::vector<int> zero(m_, 0);
    return find(zero.data());
  }

private:
  std::size_t cell_of(const int* idx) const {
    std::size_t cell = 0;
    for (int d = 0; d < m_; ++d)
      cell = cell * static_cast<std::size_t>(side_) +
             static_cast<std::size_t>(idx[d] + half_span_);
    return cell;
  }

  int m_;
  double delta_;
  double h_;
  int half_span_ = 0;
  int side_ = 0;
  std::vector<int> nodes_;          // node_count x m lattice indices
  std::vector<int> node_of_cell_;   // dense box -> node id or -1
};

}  // namespace imc
