#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdpool/spd.hpp"
#include "spdpool/trajectory.hpp"

namespace spdpool {

/// Concatenation of per-stream vectors in the given order.
Eigen::VectorXd fuse_concat(std::span<const Eigen::VectorXd> streams);

/// Which kernel produced the Gram the model was trained on. Informational:
/// prediction consumes precomputed kernel rows.
struct KernelDescriptor {
  enum class Tag : std::uint8_t { Precomputed = 0, LeKernel = 1, SteinKernel = 2, LinearOnLogvec = 3 };
  Tag tag = Tag::Precomputed;
  double xi = 1.0;
  double clamp = kDefaultClamp;

  static KernelDescriptor from(GramMeasure measure, const GramParams& params);
  bool operator==(const KernelDescriptor&) const = default;
};

/// One one-vs-rest machine: f(x) = sum_s coef_s K(x_s, x) + bias with
/// coef_s = y_s alpha_s, alpha_s in (0, C].
struct BinarySvm {
  std::vector<std::uint32_t> support;
  std::vector<double> coef;
  double bias = 0.0;
  // Training diagnostics; not serialized.
  double kkt_gap = 0.0;
  long iterations = 0;
  bool converged = true;

  bool operator==(const BinarySvm& o) const { return support == o.support && coef == o.coef && bias == o.bias; }
};

struct SvmModel {
  int num_classes = 0;
  std::uint32_t num_train = 0;
  double c = 1.0;
  std::vector<BinarySvm> machines;  // machines[k] separates class k+1 from the rest
  KernelDescriptor kernel;

  bool operator==(const SvmModel& o) const {
    return num_classes == o.num_classes && num_train == o.num_train && c == o.c && machines == o.machines &&
           kernel == o.kernel;
  }
};

struct SvmParams {
  double c = 1.0;
  double tol = 1e-3;
  int max_passes = 1000;  // iteration cap = max_passes * N per machine
  std::uint64_t seed = 0;
};

/// One-vs-rest SMO (second-order working-set selection) on a precomputed
/// Gram. Labels are 1-based; num_classes = 0 infers the maximum label.
/// Rejects Grams that are not symmetric or have min eigenvalue < -1e-6 trace.
SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels, const SvmParams& params = {},
                   int num_classes = 0);

struct SvmPrediction {
  Eigen::MatrixXd scores;   // test x classes
  std::vector<int> labels;  // 1-based argmax, ties to the lowest class
};

/// kernel_rows is test x train, built against the model's training set.
SvmPrediction svm_predict(const SvmModel& model, const Eigen::MatrixXd& kernel_rows);

std::string format_svm1(const SvmModel& model);
SvmModel parse_svm1(const std::string& bytes);
void save_svm(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm(const std::filesystem::path& path);

/// All-points AP: items sorted by descending score (ties by ascending index);
/// mean of the precision at each positive's rank.
double average_precision(std::span<const double> scores, const std::vector<bool>& positives);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified folds: each class is shuffled with the seed and dealt
/// round-robin, continuing the deal across classes.
std::vector<Fold> kfold(std::span<const int> labels, int k, std::uint64_t seed);
std::vector<Fold> kfold(const Dataset& data, int k, std::uint64_t seed);

struct EvalReport {
  int fold_id = -1;  // -1 for a pooled or whole-set report
  double accuracy = 0.0;
  std::vector<double> per_class_ap;  // NaN where a class has no positives
  double mean_ap = 0.0;              // over classes with positives
  Eigen::MatrixXi confusion;         // rows truth, columns prediction
};

/// scores: N x M one-vs-rest decision values; labels 1-based.
EvalReport evaluate(const Eigen::MatrixXd& scores, std::span<const int> predicted, std::span<const int> truth,
                    int fold_id = -1);

struct CrossValidation {
  std::vector<EvalReport> folds;
  EvalReport pooled;  // all test predictions of every fold together
};

/// k-fold protocol on a precomputed Gram over the whole set.
CrossValidation cross_validate(const Eigen::MatrixXd& gram, std::span<const int> labels, int k,
                               const SvmParams& params = {}, std::uint64_t fold_seed = 0, int num_classes = 0);

std::string format_eval_csv(const EvalReport& report);
std::string format_eval_text(const EvalReport& report);

/// Predictions file: header `id,label,score_1..score_M`.
std::string format_predictions_csv(const SvmPrediction& pred, std::span<const std::string> ids);
SvmPrediction parse_predictions_csv(const std::string& text, std::vector<std::string>* ids = nullptr);

}  // namespace spdpool
