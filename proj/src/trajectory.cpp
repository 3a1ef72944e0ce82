#include "spdpool/trajectory.hpp"

#include <cmath>
#include <string>

#include "spdpool/error.hpp"

namespace spdpool {

FeatureTrajectory::FeatureTrajectory(Eigen::MatrixXd values, TrajectoryKind kind, std::string sequence_id)
    : values_(std::move(values)), kind_(kind), sequence_id_(std::move(sequence_id)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw InvalidArgument("trajectory needs at least one channel and one frame");
  for (Eigen::Index c = 0; c < values_.cols(); ++c)
    for (Eigen::Index r = 0; r < values_.rows(); ++r)
      if (!std::isfinite(values_(r, c)))
        throw InvalidArgument("non-finite trajectory entry at channel " + std::to_string(r) + ", frame " +
                              std::to_string(c));
}

WeightProfile::WeightProfile(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InvalidArgument("empty weight profile");
  if ((weights_.array() < 0.0).any() || !weights_.allFinite())
    throw InvalidArgument("weights must be finite and nonnegative");
  for (Eigen::Index m = 0; m < weights_.rows(); ++m)
    if (std::abs(weights_.row(m).sum() - 1.0) > 1e-9)
      throw InvalidArgument("weight row " + std::to_string(m) + " does not sum to 1");
}

WeightProfile WeightProfile::uniform(Eigen::Index channels, Eigen::Index frames) {
  if (channels < 1 || frames < 1) throw InvalidArgument("weight profile needs positive dimensions");
  return WeightProfile(Eigen::MatrixXd::Constant(channels, frames, 1.0 / static_cast<double>(frames)));
}

void Dataset::validate() const {
  if (records.empty()) throw InvalidArgument("dataset is empty");
  if (num_classes < 1) throw InvalidArgument("dataset needs at least one class");
  for (const auto& r : records)
    if (r.label < 1 || r.label > num_classes)
      throw InvalidArgument("label " + std::to_string(r.label) + " of sequence '" + r.trajectory.sequence_id() +
                            "' outside [1, " + std::to_string(num_classes) + "]");
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

namespace {

void minmax_in_place(Eigen::Ref<Eigen::MatrixXd> block) {
  const double lo = block.minCoeff();
  const double range = block.maxCoeff() - lo;
  if (range > 0.0)
    block = (block.array() - lo) / range;
  else
    block.setZero();
}

}  // namespace

FeatureTrajectory normalize_scores(const FeatureTrajectory& t, NormalizeMode mode, NormalizeScope scope) {
  Eigen::MatrixXd v = t.values();
  const auto d = static_cast<double>(v.rows());
  switch (mode) {
    case NormalizeMode::Simplex:
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        auto col = v.col(c);
        // Shift only when negative scores are present, so nonnegative
        // columns are plain divide-by-sum.
        const double lo = col.minCoeff();
        if (lo < 0.0) col.array() -= lo;
        const double sum = col.sum();
        if (sum > 0.0)
          col /= sum;
        else
          col.setConstant(1.0 / d);
      }
      break;
    case NormalizeMode::MinMax:
      if (scope == NormalizeScope::PerSequence) {
        minmax_in_place(v);
      } else {
        for (Eigen::Index c = 0; c < v.cols(); ++c) minmax_in_place(v.col(c));
      }
      break;
    case NormalizeMode::Softmax:
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        auto col = v.col(c);
        col.array() = (col.array() - col.maxCoeff()).exp();
        col /= col.sum();
      }
      break;
  }
  return FeatureTrajectory(std::move(v), t.kind(), t.sequence_id());
}

FeatureTrajectory apply_weights(const FeatureTrajectory& t, const WeightProfile& w) {
  const auto& weights = w.weights();
  if (weights.rows() != t.channels() || weights.cols() != t.frames())
    throw InvalidArgument("weight profile is " + std::to_string(weights.rows()) + "x" +
                          std::to_string(weights.cols()) + " but trajectory is " + std::to_string(t.channels()) +
                          "x" + std::to_string(t.frames()));
  return FeatureTrajectory(t.values().cwiseProduct(weights), t.kind(), t.sequence_id());
}

Eigen::VectorXd average_pool(const FeatureTrajectory& t) { return t.values().rowwise().sum(); }

Eigen::VectorXd max_pool(const FeatureTrajectory& t) { return t.values().rowwise().maxCoeff(); }

}  // namespace spdpool
