#include <cmath>

#include "spdpool/kernels.hpp"

namespace spdpool::reference {

Eigen::MatrixXd row_inner_products(const RowMatrix& t) {
  const Eigen::Index d = t.rows();
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < t.cols(); ++i) s += t(j, i) * t(k, i);
      out(j, k) = out(k, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd row_rbf_sums(const RowMatrix& t, double gamma) {
  const Eigen::Index d = t.rows();
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < t.cols(); ++i) {
        const double diff = t(j, i) - t(k, i);
        s += std::exp(-gamma * diff * diff);
      }
      out(j, k) = out(k, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd symmetric_pairwise(std::size_t n, const PairFunction& f) {
  Eigen::MatrixXd out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out(i, j) = out(j, i) = f(i, j);
  return out;
}

Eigen::MatrixXd cross_pairwise(std::size_t rows, std::size_t cols, const PairFunction& f) {
  Eigen::MatrixXd out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = f(i, j);
  return out;
}

Eigen::MatrixXd mean_abs_diff(std::span<const Eigen::MatrixXd> frames) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(frames[0].rows(), frames[0].cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      double s = 0.0;
      for (std::size_t j = 1; j < frames.size(); ++j) s += std::abs(frames[j](r, c) - frames[j - 1](r, c));
      out(r, c) = s * (1.0 / static_cast<double>(frames.size() - 1));
    }
  }
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace spdpool::reference
