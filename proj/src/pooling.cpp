#include "spdpool/pooling.hpp"

#include <numeric>

#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"
#include "spdpool/rng.hpp"

namespace spdpool {

std::size_t BlockDescriptor::stored_size() const noexcept {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.stored_size();
  return total;
}

Eigen::MatrixXd BlockDescriptor::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total_dim, total_dim);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.block(offset, offset, b.dim(), b.dim()) = b.matrix;
    offset += b.dim();
  }
  return out;
}

BlockDescriptor BlockDescriptor::single(SpdDescriptor desc) {
  BlockDescriptor out;
  out.total_dim = static_cast<int>(desc.dim());
  out.config.block_len = out.total_dim;
  out.config.num_permutations = 1;
  out.blocks.push_back(std::move(desc));
  return out;
}

SpdDescriptor tcp(const Eigen::MatrixXd& t, TcpScale scale) {
  Eigen::MatrixXd c = kernels::row_inner_products(RowMatrix(t));
  const auto n = static_cast<int>(t.cols());
  if (scale == TcpScale::ByFrames) {
    const auto nd = static_cast<double>(n);
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, j) = c(i, j) / nd;
  }
  return {std::move(c), n};
}

SpdDescriptor tcp(const FeatureTrajectory& t, TcpScale scale) { return tcp(t.values(), scale); }

SpdDescriptor kcp(const FeatureTrajectory& t, const RbfParams& params) {
  if (!(params.gamma > 0.0)) throw InvalidArgument("kcp: gamma must be positive");
  return {kernels::row_rbf_sums(RowMatrix(t.values()), params.gamma), static_cast<int>(t.frames())};
}

std::vector<std::vector<int>> bkcp_permutations(int dim, const BkcpConfig& config) {
  std::vector<std::vector<int>> perms;
  std::vector<int> identity(dim);
  std::iota(identity.begin(), identity.end(), 0);
  perms.push_back(identity);
  Rng rng(config.seed);
  for (int k = 1; k < config.num_permutations; ++k) {
    std::vector<int> p = identity;
    rng.shuffle(p);
    perms.push_back(std::move(p));
  }
  return perms;
}

BlockDescriptor bkcp(const FeatureTrajectory& t, const RbfParams& params, const BkcpConfig& config) {
  const int d = static_cast<int>(t.channels());
  const int p = config.block_len;
  if (p < 2) throw InvalidArgument("bkcp: block_len must be >= 2");
  if (p > d) throw InvalidArgument("bkcp: block_len " + std::to_string(p) + " exceeds feature dimension " + std::to_string(d));
  if (config.num_permutations < 1) throw InvalidArgument("bkcp: num_permutations must be >= 1");
  if (!(params.gamma > 0.0)) throw InvalidArgument("bkcp: gamma must be positive");

  // Under permutation pi, original features a and c share a block iff their
  // permuted positions do. The per-permutation KCP entry for such a pair is
  // the plain KCP entry of rows a and c; pairs split by pi contribute zero.
  // Averaging over pi therefore scales each canonical-block entry by the
  // fraction of permutations that keep the pair together.
  const auto perms = bkcp_permutations(d, config);
  std::vector<std::vector<int>> position(perms.size(), std::vector<int>(d));
  for (std::size_t k = 0; k < perms.size(); ++k)
    for (int r = 0; r < d; ++r) position[k][perms[k][r]] = r;

  const RowMatrix values(t.values());
  const double inv_perms = 1.0 / static_cast<double>(perms.size());
  BlockDescriptor out;
  out.total_dim = d;
  out.config = config;
  for (int start = 0; start < d; start += p) {
    const int m = std::min(p, d - start);
    Eigen::MatrixXd block = kernels::row_rbf_sums(values.middleRows(start, m), params.gamma);
    if (perms.size() > 1) {
      for (int u = 0; u < m; ++u) {
        for (int v = 0; v < u; ++v) {
          int together = 0;
          for (const auto& pos : position) together += (pos[start + u] / p == pos[start + v] / p) ? 1 : 0;
          const double w = static_cast<double>(together) * inv_perms;
          block(u, v) *= w;
          block(v, u) *= w;
        }
      }
    }
    out.blocks.push_back({std::move(block), static_cast<int>(t.frames())});
  }
  return out;
}

}  // namespace spdpool
