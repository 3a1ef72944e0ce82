#pragma once

// Shared fixtures and independent oracles for the test binaries. The oracles
// are deliberately naive restatements of the definitions; none of them call
// into the code under test except to obtain inputs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "spdpool/rng.hpp"
#include "spdpool/trajectory.hpp"

namespace spdpool::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = lo + (hi - lo) * rng.uniform();
  return m;
}

inline FeatureTrajectory random_trajectory(Eigen::Index d, Eigen::Index n, Rng& rng) {
  return FeatureTrajectory(random_matrix(d, n, rng), TrajectoryKind::Features);
}

/// A A^T + shift I with Gaussian A: well conditioned SPD.
inline Eigen::MatrixXd random_spd(Eigen::Index m, Rng& rng, double shift = 0.1) {
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) a(i, j) = rng.normal();
  return a * a.transpose() + shift * Eigen::MatrixXd::Identity(m, m);
}

/// sum_i t_ji t_ki by explicit triple loop.
inline Eigen::MatrixXd brute_tcp(const Eigen::MatrixXd& t) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(t.rows(), t.rows());
  for (Eigen::Index j = 0; j < t.rows(); ++j)
    for (Eigen::Index k = 0; k < t.rows(); ++k)
      for (Eigen::Index i = 0; i < t.cols(); ++i) c(j, k) += t(j, i) * t(k, i);
  return c;
}

inline Eigen::MatrixXd brute_kcp(const Eigen::MatrixXd& t, double gamma) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(t.rows(), t.rows());
  for (Eigen::Index j = 0; j < t.rows(); ++j)
    for (Eigen::Index k = 0; k < t.rows(); ++k)
      for (Eigen::Index i = 0; i < t.cols(); ++i) {
        const double diff = t(j, i) - t(k, i);
        c(j, k) += std::exp(-gamma * diff * diff);
      }
  return c;
}

/// Literal permutation-averaged block KCP: for every permutation, build the
/// dense matrix that holds KCP(a,c) when features a and c land in the same
/// block of the permuted order (and zero otherwise), average over the
/// permutations, then keep only the blocks of the identity partition.
inline Eigen::MatrixXd literal_bkcp(const Eigen::MatrixXd& t, double gamma, int p,
                                    const std::vector<std::vector<int>>& perms) {
  const Eigen::Index d = t.rows();
  const Eigen::MatrixXd full = brute_kcp(t, gamma);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (const auto& pi : perms) {
    std::vector<int> block_of(d);
    for (Eigen::Index pos = 0; pos < d; ++pos) block_of[pi[pos]] = static_cast<int>(pos) / p;
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index c = 0; c < d; ++c)
        if (block_of[a] == block_of[c]) acc(a, c) += full(a, c);
  }
  acc /= static_cast<double>(perms.size());
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index c = 0; c < d; ++c)
      if (a / p != c / p) acc(a, c) = 0.0;
  return acc;
}

/// Matrix log through Eigen's self-adjoint solver.
inline Eigen::MatrixXd eigen_log(const Eigen::MatrixXd& c) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() * es.eigenvectors().transpose();
}

inline double eigen_min_eig(const Eigen::MatrixXd& c) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const std::string name = "spdpool_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++);
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace spdpool::testing
