#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "spdpool/pooling.hpp"

namespace spdpool {

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
struct SymEig {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int sweeps = 0;
};

struct JacobiOptions {
  int max_sweeps = 100;
  // Converged once the off-diagonal Frobenius norm is below tolerance * ||C||_F.
  double tolerance = 1e-12;
};

/// Cyclic Jacobi diagonalization. Throws InvalidArgument if c is not
/// symmetric to 1e-9 (relative) and NumericalError if the sweep limit is hit.
SymEig sym_eig(const Eigen::MatrixXd& c, const JacobiOptions& options = {});

/// Eigenvalues only (descending); skips the eigenvector accumulation.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& c, const JacobiOptions& options = {});

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& c);

/// True when the smallest eigenvalue is >= -tolerance * |trace|.
bool is_psd(const Eigen::MatrixXd& c, double tolerance = 1e-8);

inline constexpr double kDefaultClamp = 1e-10;

/// Matrix logarithm of a PSD matrix; eigenvalues are floored at
/// clamp * lambda_max first. Throws NumericalError on an indefinite input
/// (smallest eigenvalue below -1e-8 * trace) or a zero matrix.
Eigen::MatrixXd spd_log(const Eigen::MatrixXd& c, double clamp = kDefaultClamp);

/// Matrix exponential of a symmetric matrix.
Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s);

/// c + ridge * trace(c)/m * I. Throws InvalidArgument on a zero matrix.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& c, double ridge);
SpdDescriptor regularize(const SpdDescriptor& c, double ridge);

/// ||Log c1 - Log c2||_F.
double le_dist(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double clamp = kDefaultClamp);

/// exp(-xi * le_dist^2).
double le_kernel(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double xi, double clamp = kDefaultClamp);

/// log det via Cholesky; throws NumericalError unless c is strictly positive definite.
double logdet_spd(const Eigen::MatrixXd& c);

/// Jensen-Bregman log-det divergence logdet((c1+c2)/2) - logdet(c1 c2)/2.
double jbld(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2);

/// Bandwidth of the Stein kernel. The kernel is positive definite on m-by-m
/// matrices only for xi in {1/2, 1, ..., (m-1)/2} or xi >= m.
class SteinBandwidth {
 public:
  explicit SteinBandwidth(double xi);

  double value() const noexcept { return xi_; }
  bool admissible_for(Eigen::Index m) const noexcept;
  /// Throws InvalidArgument when not admissible for dimension m.
  void check(Eigen::Index m) const;

 private:
  double xi_;
};

/// exp(-xi * jbld(c1, c2)); the bandwidth is validated before anything is computed.
double stein_kernel(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, const SteinBandwidth& xi);

enum class CombineMode { Sum, Product };

/// Sum: a K1 + b K2 with a, b >= 0. Product: entrywise K1^a * K2^b with
/// positive integer exponents.
Eigen::MatrixXd combine_kernels(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2, double a, double b,
                                CombineMode mode);

/// Upper triangle of Log C, row-major, off-diagonals scaled by sqrt(2), so that
/// dot products of two vectors equal Frobenius inner products of the logs.
Eigen::VectorXd log_vectorize(const Eigen::MatrixXd& c, double clamp = kDefaultClamp);
/// Per-block log vectors, concatenated in block order.
Eigen::VectorXd log_vectorize(const BlockDescriptor& desc, double clamp = kDefaultClamp);

enum class GramMeasure { LeKernel, SteinKernel, LinearOnLogvec };

struct GramParams {
  double xi = 1.0;
  double clamp = kDefaultClamp;
};

/// Symmetric N-by-N kernel matrix over homogeneous descriptors. For block
/// descriptors the LE kernel sums per-block squared distances and the Stein
/// kernel sums per-block divergences (the bandwidth must suit every block).
Eigen::MatrixXd gram(std::span<const BlockDescriptor> descs, GramMeasure measure, const GramParams& params = {});

/// rows.size()-by-cols.size() kernel values between two descriptor sets.
Eigen::MatrixXd cross_gram(std::span<const BlockDescriptor> rows, std::span<const BlockDescriptor> cols,
                           GramMeasure measure, const GramParams& params = {});

// ---------------------------------------------------------------------------
// Kernel matrix files. GRM1: "GRM1", u32 N, N*N little-endian doubles
// row-major. CSV: one matrix row per line; '#' lines are comments.

std::string format_grm1(const Eigen::MatrixXd& g);
Eigen::MatrixXd parse_grm1(const std::string& bytes);
std::string format_matrix_csv(const Eigen::MatrixXd& g, const std::string& header_comment = {});
Eigen::MatrixXd parse_matrix_csv(const std::string& text);

/// Format chosen by extension: ".csv" is CSV, anything else GRM1 (square only).
void save_matrix(const Eigen::MatrixXd& g, const std::filesystem::path& path, const std::string& header_comment = {});
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

}  // namespace spdpool
