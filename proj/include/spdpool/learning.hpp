#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "spdpool/pooling.hpp"
#include "spdpool/trajectory.hpp"

namespace spdpool {

/// Diagonal ground-truth encoding of a class label: entry `label` is
/// 1/(1+(M-1)eps), every other diagonal entry eps/(1+(M-1)eps).
struct LabelMatrix {
  int dim = 0;
  int label = 0;  // 1-based
  double epsilon = 0.0;

  Eigen::MatrixXd matrix() const;
};

inline constexpr double kDefaultLabelEpsilon = 1e-5;

LabelMatrix encode_label(int label, int num_classes, double epsilon = kDefaultLabelEpsilon);

/// (1/n) T T^T; shares its code path with tcp(T, TcpScale::ByFrames).
SpdDescriptor cp_scaled(const Eigen::MatrixXd& t);

enum class LossKind { Jbld, Frobenius };

struct LossOptions {
  // Relative ridge added to CP inside the JBLD loss (times trace/M); keeps
  // logdet CP finite on clips shorter than M frames.
  double jbld_ridge = 1e-8;
};

/// JBLD between (ridged) cp_scaled(T) and Y. Throws NumericalError when CP is
/// singular, with a hint to regularize or use a longer clip.
double jbld_loss(const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options = {});

/// d jbld_loss / dT. Without ridge this is (2/n)[(CP+Y)^-1 - CP^-1/2] T; the
/// ridge's dependence on trace(CP) is differentiated exactly.
Eigen::MatrixXd jbld_loss_grad(const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options = {});

/// ||cp_scaled(T) - Y||_F^2.
double frob_loss(const Eigen::MatrixXd& t, const LabelMatrix& y);

/// Leading constant of the Frobenius gradient c/n (CP - Y) T. Differentiating
/// ||CP - Y||_F^2 gives 4; the value 2 corresponds to half the squared norm.
inline constexpr double kFrobGradConstant = 4.0;

Eigen::MatrixXd frob_loss_grad(const Eigen::MatrixXd& t, const LabelMatrix& y);

double loss_value(LossKind kind, const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options = {});
Eigen::MatrixXd loss_grad(LossKind kind, const Eigen::MatrixXd& t, const LabelMatrix& y,
                          const LossOptions& options = {});

struct GradCheckReport {
  double max_relative_error = 0.0;
  Eigen::MatrixXd relative_error;  // |a - b| / max(1, |a|, |b|) per entry
  Eigen::MatrixXd analytic;
  Eigen::MatrixXd numeric;
  double step = 0.0;
};

/// Central differences (f(T + hE) - f(T - hE)) / 2h against an analytic gradient.
GradCheckReport compare_gradients(const std::function<double(const Eigen::MatrixXd&)>& loss,
                                  const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& t, double h);

GradCheckReport fd_gradient(LossKind kind, const Eigen::MatrixXd& t, const LabelMatrix& y, double h,
                            const LossOptions& options = {});

/// M-by-d_in map applied to every frame; the stand-in for a CNN producing scores.
struct LinearMap {
  Eigen::MatrixXd weights;

  Eigen::Index input_dim() const noexcept { return weights.cols(); }
  Eigen::Index output_dim() const noexcept { return weights.rows(); }
};

struct TrainOptions {
  LossKind loss = LossKind::Frobenius;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  int iterations = 2000;
  int clip_len = 30;
  std::uint64_t seed = 0;
  double init_scale = 0.1;  // std-dev of the initial weights
  double epsilon = -1.0;    // label epsilon; negative picks 1e-5 for JBLD, 0 for Frobenius
  LossOptions loss_options;
};

struct TrainResult {
  LinearMap map;
  std::vector<double> loss_trace;  // summed loss before each update
};

/// Per-frame softmax of W X (columns are frames).
Eigen::MatrixXd softmax_scores(const LinearMap& map, const Eigen::MatrixXd& x);

/// Loss of one clip through the softmax and its gradient with respect to W.
double clip_loss_and_grad(const LinearMap& map, const Eigen::MatrixXd& x, const LabelMatrix& y, LossKind kind,
                          const LossOptions& options, Eigen::MatrixXd* grad_w);

/// Full-batch gradient descent with momentum on the summed loss over every
/// sequence's clip. Each sequence contributes one fixed clip of clip_len
/// frames whose start is drawn from the seed. Throws NumericalError when the
/// loss stops being finite.
TrainResult train_linear(const Dataset& data, const TrainOptions& options);

}  // namespace spdpool
