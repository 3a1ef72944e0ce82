#include "spdpool/learning.hpp"

#include <cmath>

#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/spd.hpp"

namespace spdpool {

Eigen::MatrixXd LabelMatrix::matrix() const {
  const double denom = 1.0 + static_cast<double>(dim - 1) * epsilon;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) y(j, j) = (j + 1 == label ? 1.0 : epsilon) / denom;
  return y;
}

LabelMatrix encode_label(int label, int num_classes, double epsilon) {
  if (num_classes < 1) throw InvalidArgument("encode_label: need at least one class");
  if (label < 1 || label > num_classes)
    throw InvalidArgument("encode_label: label " + std::to_string(label) + " outside [1, " +
                          std::to_string(num_classes) + "]");
  if (!(epsilon >= 0.0)) throw InvalidArgument("encode_label: epsilon must be nonnegative");
  return {num_classes, label, epsilon};
}

SpdDescriptor cp_scaled(const Eigen::MatrixXd& t) { return tcp(t, TcpScale::ByFrames); }

namespace {

void check_shapes(const Eigen::MatrixXd& t, const LabelMatrix& y) {
  if (t.rows() != y.dim)
    throw InvalidArgument("loss: trajectory has " + std::to_string(t.rows()) + " rows but the label matrix is " +
                          std::to_string(y.dim) + "x" + std::to_string(y.dim));
  if (t.cols() < 1) throw InvalidArgument("loss: trajectory has no frames");
}

struct JbldTerms {
  Eigen::MatrixXd cp;  // ridged
  Eigen::MatrixXd y;
  double shift_per_trace = 0.0;
};

JbldTerms jbld_terms(const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options) {
  check_shapes(t, y);
  if (!(y.epsilon > 0.0)) throw InvalidArgument("jbld loss: label matrix needs epsilon > 0 to be positive definite");
  if (!(options.jbld_ridge >= 0.0)) throw InvalidArgument("jbld loss: ridge must be nonnegative");
  JbldTerms out;
  out.cp = cp_scaled(t).matrix;
  out.shift_per_trace = options.jbld_ridge / static_cast<double>(y.dim);
  if (options.jbld_ridge > 0.0) out.cp.diagonal().array() += out.shift_per_trace * out.cp.trace();
  out.y = y.matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(out.cp);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0))
    throw NumericalError("jbld loss: CP(T) is rank-deficient (" + std::to_string(t.cols()) + " frames for " +
                         std::to_string(y.dim) + " classes); regularize CP or use a clip with more frames");
  return out;
}

}  // namespace

double jbld_loss(const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options) {
  const JbldTerms terms = jbld_terms(t, y, options);
  return jbld(terms.cp, terms.y);
}

Eigen::MatrixXd jbld_loss_grad(const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options) {
  const JbldTerms terms = jbld_terms(t, y, options);
  const Eigen::Index m = terms.cp.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd sum_inv = (terms.cp + terms.y).llt().solve(id);
  const Eigen::MatrixXd cp_inv = terms.cp.llt().solve(id);
  // Gradient with respect to the ridged CP, then pulled back through the
  // ridge (which depends on trace(CP)) and CP = T T^T / n.
  Eigen::MatrixXd g = sum_inv - 0.5 * cp_inv;
  g.diagonal().array() += terms.shift_per_trace * g.trace();
  return (2.0 / static_cast<double>(t.cols())) * g * t;
}

double frob_loss(const Eigen::MatrixXd& t, const LabelMatrix& y) {
  check_shapes(t, y);
  return (cp_scaled(t).matrix - y.matrix()).squaredNorm();
}

Eigen::MatrixXd frob_loss_grad(const Eigen::MatrixXd& t, const LabelMatrix& y) {
  check_shapes(t, y);
  return (kFrobGradConstant / static_cast<double>(t.cols())) * (cp_scaled(t).matrix - y.matrix()) * t;
}

double loss_value(LossKind kind, const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options) {
  return kind == LossKind::Jbld ? jbld_loss(t, y, options) : frob_loss(t, y);
}

Eigen::MatrixXd loss_grad(LossKind kind, const Eigen::MatrixXd& t, const LabelMatrix& y, const LossOptions& options) {
  return kind == LossKind::Jbld ? jbld_loss_grad(t, y, options) : frob_loss_grad(t, y);
}

GradCheckReport compare_gradients(const std::function<double(const Eigen::MatrixXd&)>& loss,
                                  const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& t, double h) {
  if (!(h > 0.0)) throw InvalidArgument("gradient check: step must be positive");
  if (analytic.rows() != t.rows() || analytic.cols() != t.cols())
    throw InvalidArgument("gradient check: analytic gradient has the wrong shape");
  GradCheckReport r;
  r.step = h;
  r.analytic = analytic;
  r.numeric.resize(t.rows(), t.cols());
  r.relative_error.resize(t.rows(), t.cols());
  Eigen::MatrixXd probe = t;
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      const double orig = probe(i, j);
      probe(i, j) = orig + h;
      const double up = loss(probe);
      probe(i, j) = orig - h;
      const double down = loss(probe);
      probe(i, j) = orig;
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic(i, j);
      r.numeric(i, j) = fd;
      r.relative_error(i, j) = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
    }
  }
  r.max_relative_error = r.relative_error.maxCoeff();
  return r;
}

GradCheckReport fd_gradient(LossKind kind, const Eigen::MatrixXd& t, const LabelMatrix& y, double h,
                            const LossOptions& options) {
  return compare_gradients([&](const Eigen::MatrixXd& x) { return loss_value(kind, x, y, options); },
                           loss_grad(kind, t, y, options), t, h);
}

Eigen::MatrixXd softmax_scores(const LinearMap& map, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = map.weights * x;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    auto col = z.col(i);
    col.array() = (col.array() - col.maxCoeff()).exp();
    col /= col.sum();
  }
  return z;
}

double clip_loss_and_grad(const LinearMap& map, const Eigen::MatrixXd& x, const LabelMatrix& y, LossKind kind,
                          const LossOptions& options, Eigen::MatrixXd* grad_w) {
  const Eigen::MatrixXd s = softmax_scores(map, x);
  const double loss = loss_value(kind, s, y, options);
  if (grad_w) {
    const Eigen::MatrixXd gs = loss_grad(kind, s, y, options);
    // Softmax Jacobian per frame: dz = s .* (g - s^T g).
    Eigen::MatrixXd gz(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.cols(); ++i) {
      const double inner = s.col(i).dot(gs.col(i));
      gz.col(i) = s.col(i).cwiseProduct(gs.col(i).array().matrix() - Eigen::VectorXd::Constant(s.rows(), inner));
    }
    *grad_w = gz * x.transpose();
  }
  return loss;
}

TrainResult train_linear(const Dataset& data, const TrainOptions& options) {
  data.validate();
  const Eigen::Index d_in = data.records.front().trajectory.channels();
  Eigen::Index shortest = data.records.front().trajectory.frames();
  for (const auto& r : data.records) {
    if (r.trajectory.channels() != d_in) throw InvalidArgument("train_linear: trajectories differ in input dimension");
    shortest = std::min(shortest, r.trajectory.frames());
  }
  if (options.clip_len < 1 || options.clip_len > shortest)
    throw InvalidArgument("train_linear: clip_len " + std::to_string(options.clip_len) +
                          " must lie in [1, shortest sequence length " + std::to_string(shortest) + "]");
  if (options.iterations < 0) throw InvalidArgument("train_linear: iterations must be >= 0");
  if (!(options.learning_rate >= 0.0) || !(options.momentum >= 0.0 && options.momentum < 1.0))
    throw InvalidArgument("train_linear: need learning_rate >= 0 and momentum in [0, 1)");

  const double eps = options.epsilon >= 0.0 ? options.epsilon
                                            : (options.loss == LossKind::Jbld ? kDefaultLabelEpsilon : 0.0);
  const int m = data.num_classes;

  Rng rng(options.seed);
  TrainResult out;
  out.map.weights.resize(m, d_in);
  for (Eigen::Index j = 0; j < d_in; ++j)
    for (Eigen::Index i = 0; i < m; ++i) out.map.weights(i, j) = options.init_scale * rng.normal();

  std::vector<Eigen::MatrixXd> clips;
  std::vector<LabelMatrix> targets;
  for (const auto& r : data.records) {
    const auto start = static_cast<Eigen::Index>(rng.below(r.trajectory.frames() - options.clip_len + 1));
    clips.push_back(r.trajectory.values().middleCols(start, options.clip_len));
    targets.push_back(encode_label(r.label, m, eps));
  }

  std::vector<double> losses(clips.size());
  std::vector<Eigen::MatrixXd> grads(clips.size());
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(m, d_in);
  out.loss_trace.reserve(options.iterations);
  for (int it = 0; it < options.iterations; ++it) {
    kernels::for_each_index(clips.size(), [&](std::size_t k) {
      losses[k] = clip_loss_and_grad(out.map, clips[k], targets[k], options.loss, options.loss_options, &grads[k]);
    });
    // Fixed summation order keeps the trace independent of the thread count.
    double total = 0.0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(m, d_in);
    for (std::size_t k = 0; k < clips.size(); ++k) {
      total += losses[k];
      grad += grads[k];
    }
    if (!std::isfinite(total) || !grad.allFinite())
      throw NumericalError("train_linear: loss diverged at iteration " + std::to_string(it));
    out.loss_trace.push_back(total);
    velocity = options.momentum * velocity - options.learning_rate * grad;
    out.map.weights += velocity;
  }
  return out;
}

}  // namespace spdpool
