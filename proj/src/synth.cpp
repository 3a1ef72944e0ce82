#include <cstdio>
#include <numeric>

#include "spdpool/error.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/trajectory.hpp"

namespace spdpool {

namespace {

void check_params(const SynthParams& p) {
  if (p.num_classes < 1) throw InvalidArgument("synth: num_classes must be >= 1");
  if (p.channels < 2) throw InvalidArgument("synth: channels must be >= 2");
  if (p.pairs_per_class < 0) throw InvalidArgument("synth: pairs_per_class must be >= 0");
  if (p.pairs_per_class > p.channels * (p.channels - 1) / 2)
    throw InvalidArgument("synth: pairs_per_class exceeds the number of distinct channel pairs");
  if (p.seq_len < 1 || p.sequences_per_class < 1) throw InvalidArgument("synth: sizes must be positive");
  if (!(p.noise_sigma >= 0.0)) throw InvalidArgument("synth: noise_sigma must be >= 0");
  if (!(p.activation_prob >= 0.0 && p.activation_prob <= 1.0))
    throw InvalidArgument("synth: activation_prob must lie in [0, 1]");
}

// Channels linked through a class's pairs fire from one shared draw.
std::vector<int> coupled_groups(int channels, const std::vector<ChannelPair>& pairs) {
  std::vector<int> parent(channels);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& p : pairs) {
    const int a = find(p.first), b = find(p.second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> group(channels);
  for (int c = 0; c < channels; ++c) group[c] = find(c);
  return group;
}

}  // namespace

std::vector<std::vector<ChannelPair>> coactivation_pairs(const SynthParams& params) {
  check_params(params);
  std::vector<ChannelPair> all;
  for (int a = 0; a < params.channels; ++a)
    for (int b = a + 1; b < params.channels; ++b) all.push_back({a, b});

  Rng rng(params.seed);
  rng.shuffle(all);
  // Pairs are dealt without replacement, so classes get distinct pairs until
  // the pool runs out; only then is a fresh shuffle dealt.
  std::vector<std::vector<ChannelPair>> out(params.num_classes);
  std::size_t next = 0;
  for (auto& cls : out) {
    while (static_cast<int>(cls.size()) < params.pairs_per_class) {
      if (next == all.size()) {
        rng.shuffle(all);
        next = 0;
      }
      const auto candidate = all[next++];
      bool dup = false;
      for (const auto& q : cls) dup = dup || (q.first == candidate.first && q.second == candidate.second);
      if (!dup) cls.push_back(candidate);
    }
  }
  return out;
}

Dataset synth_coactivation(const SynthParams& params) {
  const auto pairs = coactivation_pairs(params);
  // Pair drawing consumed its own stream; the data stream is offset so the
  // two never overlap.
  Rng rng(params.seed ^ 0x9E3779B97F4A7C15ull);

  std::vector<std::vector<int>> groups;
  for (const auto& cls : pairs) groups.push_back(coupled_groups(params.channels, cls));

  Dataset data;
  data.num_classes = params.num_classes;
  data.provenance = "synth_coactivation seed=" + std::to_string(params.seed);
  std::vector<bool> fired(params.channels);
  int index = 0;
  for (int s = 0; s < params.sequences_per_class; ++s) {
    for (int c = 0; c < params.num_classes; ++c) {
      const auto& group = groups[c];
      Eigen::MatrixXd values(params.channels, params.seq_len);
      for (int i = 0; i < params.seq_len; ++i) {
        for (int ch = 0; ch < params.channels; ++ch)
          fired[ch] = group[ch] == ch ? rng.bernoulli(params.activation_prob) : fired[group[ch]];
        for (int ch = 0; ch < params.channels; ++ch) {
          double v = fired[ch] ? 1.0 : 0.0;
          if (params.noise_sigma > 0.0) v += params.noise_sigma * rng.normal();
          values(ch, i) = std::clamp(v, 0.0, 1.0);
        }
      }
      char id[32];
      std::snprintf(id, sizeof id, "seq_%05d", index++);
      data.records.push_back({FeatureTrajectory(std::move(values), TrajectoryKind::Features, id), c + 1});
    }
  }
  return data;
}

}  // namespace spdpool
