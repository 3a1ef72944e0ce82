#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spdpool {

enum class TrajectoryKind : std::uint8_t { Scores = 0, Features = 1 };

/// Per-frame classifier scores or raw features of one sequence, stored as a
/// d-by-n matrix: row m is the trajectory of channel m, column i is frame i.
class FeatureTrajectory {
 public:
  /// Throws InvalidArgument on an empty matrix or non-finite entries.
  FeatureTrajectory(Eigen::MatrixXd values, TrajectoryKind kind, std::string sequence_id = {});

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  TrajectoryKind kind() const noexcept { return kind_; }
  const std::string& sequence_id() const noexcept { return sequence_id_; }
  Eigen::Index channels() const noexcept { return values_.rows(); }
  Eigen::Index frames() const noexcept { return values_.cols(); }

 private:
  Eigen::MatrixXd values_;
  TrajectoryKind kind_;
  std::string sequence_id_;
};

/// Temporal weights: row m holds alpha^m over the frames. Entries are
/// nonnegative and each row sums to one.
class WeightProfile {
 public:
  explicit WeightProfile(Eigen::MatrixXd weights);

  /// alpha^m_i = 1/n for every channel.
  static WeightProfile uniform(Eigen::Index channels, Eigen::Index frames);

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }

 private:
  Eigen::MatrixXd weights_;
};

struct SequenceRecord {
  FeatureTrajectory trajectory;
  int label;  // 1-based class index
};

struct Dataset {
  std::vector<SequenceRecord> records;
  int num_classes = 0;
  std::string provenance;

  /// Throws InvalidArgument when empty or a label lies outside [1, num_classes].
  void validate() const;
  std::vector<int> labels() const;
};

// ---------------------------------------------------------------------------
// File formats

enum class TrajectoryFormat { Csv, TrjBinary };

/// Picks the format from the extension: ".csv" is CSV, anything else TRJ1.
TrajectoryFormat format_from_path(const std::filesystem::path& path);

FeatureTrajectory load_trajectory(const std::filesystem::path& path, TrajectoryFormat format);
void save_trajectory(const FeatureTrajectory& t, const std::filesystem::path& path, TrajectoryFormat format);

// The in-memory variants back the file functions; sequence ids are left to the caller.
FeatureTrajectory parse_trajectory_csv(const std::string& text, const std::string& sequence_id = {});
std::string format_trajectory_csv(const FeatureTrajectory& t);
FeatureTrajectory parse_trajectory_trj(const std::string& bytes, const std::string& sequence_id = {});
std::string format_trajectory_trj(const FeatureTrajectory& t);

struct LabelEntry {
  std::string sequence_id;
  int label;
};

std::vector<LabelEntry> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<LabelEntry>& labels, const std::filesystem::path& path,
                 const std::string& header_comment = {});

/// A dataset directory holds one trajectory file per sequence plus labels.csv.
Dataset load_dataset(const std::filesystem::path& dir, int num_classes = 0);
void save_dataset(const Dataset& data, const std::filesystem::path& dir, const std::string& header_comment = {});

// ---------------------------------------------------------------------------
// Score processing

enum class NormalizeMode { Simplex, MinMax, Softmax };
/// Whether min-max rescaling is done per frame (column) or over the whole sequence.
enum class NormalizeScope { PerFrame, PerSequence };

FeatureTrajectory normalize_scores(const FeatureTrajectory& t, NormalizeMode mode,
                                   NormalizeScope scope = NormalizeScope::PerFrame);

/// Entrywise product with the weights; throws InvalidArgument on a shape mismatch.
FeatureTrajectory apply_weights(const FeatureTrajectory& t, const WeightProfile& w);

/// Row sums of an (already weighted) trajectory.
Eigen::VectorXd average_pool(const FeatureTrajectory& t);
Eigen::VectorXd max_pool(const FeatureTrajectory& t);

// ---------------------------------------------------------------------------
// Synthetic co-activation data

struct SynthParams {
  int num_classes = 4;
  int channels = 8;
  int pairs_per_class = 1;
  int seq_len = 40;
  int sequences_per_class = 100;
  double noise_sigma = 0.05;
  double activation_prob = 0.5;
  std::uint64_t seed = 9;
};

/// Channel pairs that fire together in one class.
struct ChannelPair {
  int first;
  int second;
};

/// Pairs assigned to each class, as drawn from params.seed.
std::vector<std::vector<ChannelPair>> coactivation_pairs(const SynthParams& params);

/// Sequences whose channels all fire with the same marginal probability in
/// every class, while each class couples its own channel pairs within a frame.
/// Values are clipped to [0, 1]; output is a deterministic function of params.
Dataset synth_coactivation(const SynthParams& params);

}  // namespace spdpool
