#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdpool/trajectory.hpp"

namespace spdpool {

/// A symmetric positive (semi-)definite sequence descriptor.
struct SpdDescriptor {
  Eigen::MatrixXd matrix;
  int n_frames = 0;  // frames of the trajectory that produced it; 0 when unknown

  Eigen::Index dim() const noexcept { return matrix.rows(); }
  /// Entries in packed lower-triangle storage.
  std::size_t stored_size() const noexcept {
    const auto m = static_cast<std::size_t>(dim());
    return m * (m + 1) / 2;
  }
};

struct RbfParams {
  double gamma = 1.0;
};

struct BkcpConfig {
  int block_len = 16;
  int num_permutations = 3;
  std::uint64_t seed = 0;
};

/// Block-diagonal approximation of a KCP matrix. Block b covers the original
/// feature indices [b * block_len, b * block_len + blocks[b].dim()).
struct BlockDescriptor {
  std::vector<SpdDescriptor> blocks;
  int total_dim = 0;
  BkcpConfig config;

  std::size_t stored_size() const noexcept;
  /// Dense d-by-d matrix with zeros off the blocks.
  Eigen::MatrixXd to_dense() const;
  /// Wraps a full descriptor as a one-block descriptor.
  static BlockDescriptor single(SpdDescriptor desc);
};

enum class TcpScale { None, ByFrames };

/// T T^T of a (weighted) trajectory, optionally divided by the frame count.
SpdDescriptor tcp(const FeatureTrajectory& t, TcpScale scale = TcpScale::None);

/// Same as tcp() on a bare M-by-n matrix.
SpdDescriptor tcp(const Eigen::MatrixXd& t, TcpScale scale = TcpScale::None);

/// Entry (j,k) = sum_i exp(-gamma (t_ji - t_ki)^2); the diagonal is exactly n.
SpdDescriptor kcp(const FeatureTrajectory& t, const RbfParams& params = {});

/// Permutations used by bkcp(): the identity first, then seeded Fisher-Yates shuffles.
std::vector<std::vector<int>> bkcp_permutations(int dim, const BkcpConfig& config);

/// Block KCP averaged over config.num_permutations feature permutations,
/// expressed in the block partition of the identity permutation.
BlockDescriptor bkcp(const FeatureTrajectory& t, const RbfParams& params = {}, const BkcpConfig& config = {});

// ---------------------------------------------------------------------------
// SPD1 container: "SPD1", u32 block count, then per block u32 dim m and
// m(m+1)/2 little-endian doubles of the lower triangle, row-major.

std::string format_spd1(const BlockDescriptor& desc);
BlockDescriptor parse_spd1(const std::string& bytes);
void save_descriptor(const BlockDescriptor& desc, const std::filesystem::path& path);
BlockDescriptor load_descriptor(const std::filesystem::path& path);

}  // namespace spdpool
