#pragma once

// Data-parallel inner loops of the library.
//
// spdpool::kernels holds the OpenMP versions used by the public API;
// spdpool::reference holds plain serial loops with the same signatures,
// kept for testing and benchmarking. Both evaluate every output entry with
// the same fixed summation order, so their results agree bit-for-bit
// regardless of the thread count.

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace spdpool {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PairFunction = std::function<double(std::size_t, std::size_t)>;

namespace kernels {

/// Rows-by-rows inner products: out(j,k) = sum_i t(j,i) t(k,i), frames summed in order.
Eigen::MatrixXd row_inner_products(const RowMatrix& t);

/// out(j,k) = sum_i exp(-gamma (t(j,i) - t(k,i))^2), frames summed in order.
Eigen::MatrixXd row_rbf_sums(const RowMatrix& t, double gamma);

/// Symmetric n-by-n matrix with out(i,j) = out(j,i) = f(i,j) for i <= j.
Eigen::MatrixXd symmetric_pairwise(std::size_t n, const PairFunction& f);

/// rows-by-cols matrix with out(i,j) = f(i,j).
Eigen::MatrixXd cross_pairwise(std::size_t rows, std::size_t cols, const PairFunction& f);

/// Pixelwise mean of |f[j] - f[j-1]| over consecutive frames; frames.size() >= 2.
Eigen::MatrixXd mean_abs_diff(std::span<const Eigen::MatrixXd> frames);

/// Calls fn(i) for every i in [0, n); calls must touch disjoint state.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace kernels

namespace reference {

Eigen::MatrixXd row_inner_products(const RowMatrix& t);
Eigen::MatrixXd row_rbf_sums(const RowMatrix& t, double gamma);
Eigen::MatrixXd symmetric_pairwise(std::size_t n, const PairFunction& f);
Eigen::MatrixXd cross_pairwise(std::size_t rows, std::size_t cols, const PairFunction& f);
Eigen::MatrixXd mean_abs_diff(std::span<const Eigen::MatrixXd> frames);
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace reference

/// Sets the OpenMP thread count used by kernels:: (no-op without OpenMP).
void set_num_threads(int threads);
int num_threads();

}  // namespace spdpool
