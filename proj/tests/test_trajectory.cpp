#include <doctest.h>

#include <cmath>
#include <set>

#include "spdpool/error.hpp"
#include "spdpool/trajectory.hpp"
#include "support.hpp"

using namespace spdpool;
using spdpool::testing::TempDir;

TEST_CASE("csv trajectory: rows are frames, stored features-by-frames") {
  const auto t = parse_trajectory_csv("# d=2 kind=scores\n1,0\n0,1\n");
  CHECK(t.channels() == 2);
  CHECK(t.frames() == 2);
  CHECK(t.kind() == TrajectoryKind::Scores);
  CHECK(t.values() == Eigen::Matrix2d::Identity());

  const auto u = parse_trajectory_csv("1,2,3\n4,5,6\n");
  CHECK(u.kind() == TrajectoryKind::Features);
  CHECK(u.channels() == 3);
  CHECK(u.values()(2, 1) == 6.0);
}

TEST_CASE("csv trajectory: errors name the offending location") {
  SUBCASE("ragged row") {
    try {
      parse_trajectory_csv("1,2\n3,4,5\n");
      FAIL("expected a ragged-row error");
    } catch (const FormatError& e) {
      CHECK(e.row() == 2);
      CHECK(std::string(e.what()).find("ragged") != std::string::npos);
    }
  }
  SUBCASE("non-numeric cell") {
    try {
      parse_trajectory_csv("1,2\n3,abc\n");
      FAIL("expected a parse error");
    } catch (const FormatError& e) {
      CHECK(e.row() == 2);
      CHECK(e.column() == 2);
    }
  }
  SUBCASE("non-finite value") { CHECK_THROWS_AS(parse_trajectory_csv("1,inf\n"), FormatError); }
  SUBCASE("declared width disagrees") { CHECK_THROWS_AS(parse_trajectory_csv("# d=3\n1,2\n"), FormatError); }
  SUBCASE("header after data") { CHECK_THROWS_AS(parse_trajectory_csv("1,2\n# d=2\n3,4\n"), FormatError); }
  SUBCASE("empty") { CHECK_THROWS_AS(parse_trajectory_csv("# just a comment\n"), FormatError); }
}

TEST_CASE("csv trajectory: 1x1 body and round trip") {
  const FeatureTrajectory one(Eigen::MatrixXd::Constant(1, 1, 0.5), TrajectoryKind::Features);
  const auto text = format_trajectory_csv(one);
  CHECK(text.substr(text.find('\n') + 1) == "0.5\n");

  Rng rng(7);
  const auto t = spdpool::testing::random_trajectory(2, 3, rng);
  const auto back = parse_trajectory_csv(format_trajectory_csv(t));
  CHECK((back.values() - t.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trj binary: bit-exact round trip and corruption detection") {
  Rng rng(11);
  const FeatureTrajectory t(spdpool::testing::random_matrix(5, 9, rng, -3, 3), TrajectoryKind::Scores, "x");
  const auto bytes = format_trajectory_trj(t);
  CHECK(bytes.size() == 4 + 4 + 4 + 1 + 8 * 45);
  const auto back = parse_trajectory_trj(bytes);
  CHECK(back.values() == t.values());
  CHECK(back.kind() == TrajectoryKind::Scores);

  CHECK_THROWS_AS(parse_trajectory_trj(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(parse_trajectory_trj("TRJ0" + bytes.substr(4)), FormatError);
  CHECK_THROWS_AS(parse_trajectory_trj(bytes + "x"), FormatError);
}

TEST_CASE("trajectory files pick the format from the extension") {
  TempDir dir("traj");
  Rng rng(3);
  const auto t = spdpool::testing::random_trajectory(3, 4, rng);
  save_trajectory(t, dir / "a.trj", TrajectoryFormat::TrjBinary);
  save_trajectory(t, dir / "b.csv", TrajectoryFormat::Csv);
  CHECK(format_from_path(dir / "b.csv") == TrajectoryFormat::Csv);
  const auto a = load_trajectory(dir / "a.trj", format_from_path(dir / "a.trj"));
  CHECK(a.values() == t.values());
  CHECK(a.sequence_id() == "a");
  CHECK_THROWS_AS(load_trajectory(dir / "missing.trj", TrajectoryFormat::TrjBinary), IoError);
}

TEST_CASE("constructor rejects empty and non-finite trajectories") {
  CHECK_THROWS_AS(FeatureTrajectory(Eigen::MatrixXd(0, 3), TrajectoryKind::Features), InvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(FeatureTrajectory(bad, TrajectoryKind::Features), InvalidArgument);
}

TEST_CASE("normalize_scores") {
  auto column = [](std::initializer_list<double> v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return FeatureTrajectory(m, TrajectoryKind::Scores);
  };
  SUBCASE("simplex") {
    const auto s = normalize_scores(column({1, 3}), NormalizeMode::Simplex).values();
    CHECK(s(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s(1, 0) == doctest::Approx(0.75).epsilon(1e-15));
    const auto neg = normalize_scores(column({-1, 1}), NormalizeMode::Simplex).values();
    CHECK(neg(0, 0) == 0.0);
    CHECK(neg(1, 0) == 1.0);
    const auto zero = normalize_scores(column({0, 0, 0, 0}), NormalizeMode::Simplex).values();
    CHECK((zero.array() == 0.25).all());
  }
  SUBCASE("minmax") {
    const auto m = normalize_scores(column({0, 1, 3}), NormalizeMode::MinMax).values();
    CHECK(m(0, 0) == 0.0);
    CHECK(m(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m(2, 0) == 1.0);
    CHECK((normalize_scores(column({2, 2}), NormalizeMode::MinMax).values().array() == 0.0).all());
  }
  SUBCASE("minmax scopes differ") {
    Eigen::MatrixXd v(2, 2);
    v << 0, 10, 1, 20;
    const FeatureTrajectory t(v, TrajectoryKind::Scores);
    const auto frame = normalize_scores(t, NormalizeMode::MinMax, NormalizeScope::PerFrame).values();
    const auto seq = normalize_scores(t, NormalizeMode::MinMax, NormalizeScope::PerSequence).values();
    CHECK(frame(1, 0) == 1.0);
    CHECK(seq(1, 0) == doctest::Approx(0.05));
    CHECK(seq(1, 1) == 1.0);
  }
  SUBCASE("softmax columns are distributions, stable for large inputs") {
    const auto s = normalize_scores(column({1000, 1001, 999}), NormalizeMode::Softmax).values();
    CHECK(s.sum() == doctest::Approx(1.0));
    CHECK(s(1, 0) > s(0, 0));
    CHECK(s.allFinite());
  }
  SUBCASE("every mode yields nonnegative columns") {
    Rng rng(1);
    const FeatureTrajectory t(spdpool::testing::random_matrix(4, 6, rng, -2, 2), TrajectoryKind::Scores);
    for (auto mode : {NormalizeMode::Simplex, NormalizeMode::MinMax, NormalizeMode::Softmax})
      CHECK((normalize_scores(t, mode).values().array() >= 0.0).all());
    const auto s = normalize_scores(t, NormalizeMode::Simplex).values();
    for (Eigen::Index c = 0; c < s.cols(); ++c) CHECK(s.col(c).sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("weights and first-order pooling") {
  Eigen::MatrixXd v(1, 2);
  v << 0.8, 0.4;
  const FeatureTrajectory t(v, TrajectoryKind::Scores);
  const auto w = apply_weights(t, WeightProfile::uniform(1, 2)).values();
  CHECK(w(0, 0) == doctest::Approx(0.4));
  CHECK(w(0, 1) == doctest::Approx(0.2));
  CHECK(average_pool(t)(0) == doctest::Approx(1.2));
  CHECK(max_pool(t)(0) == 0.8);

  CHECK_THROWS_AS(apply_weights(t, WeightProfile::uniform(2, 2)), InvalidArgument);
  Eigen::MatrixXd bad(1, 2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(WeightProfile{bad}, InvalidArgument);
  bad << 1.5, -0.5;
  CHECK_THROWS_AS(WeightProfile{bad}, InvalidArgument);
}

TEST_CASE("labels and datasets round trip through a directory") {
  TempDir dir("dataset");
  SynthParams p;
  p.sequences_per_class = 3;
  p.seq_len = 5;
  const auto data = synth_coactivation(p);
  save_dataset(data, dir.path(), "# generated\n");
  const auto back = load_dataset(dir.path());
  REQUIRE(back.records.size() == data.records.size());
  CHECK(back.num_classes == data.num_classes);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    CHECK(back.records[i].label == data.records[i].label);
    CHECK(back.records[i].trajectory.values() == data.records[i].trajectory.values());
    CHECK(back.records[i].trajectory.sequence_id() == data.records[i].trajectory.sequence_id());
  }
}

TEST_CASE("synth_coactivation") {
  SynthParams p;
  const auto data = synth_coactivation(p);
  const auto again = synth_coactivation(p);

  SUBCASE("shape, ids, interleaved labels") {
    REQUIRE(data.records.size() == 400u);
    CHECK(data.records[0].label == 1);
    CHECK(data.records[5].label == 2);
    CHECK(data.records[7].trajectory.sequence_id() == "seq_00007");
    for (const auto& r : data.records) {
      CHECK(r.trajectory.channels() == 8);
      CHECK(r.trajectory.frames() == 40);
      CHECK((r.trajectory.values().array() >= 0.0).all());
      CHECK((r.trajectory.values().array() <= 1.0).all());
    }
  }
  SUBCASE("deterministic in the seed") {
    for (std::size_t i = 0; i < data.records.size(); ++i)
      CHECK(data.records[i].trajectory.values() == again.records[i].trajectory.values());
    SynthParams q = p;
    q.seed = 10;
    CHECK(synth_coactivation(q).records[0].trajectory.values() != data.records[0].trajectory.values());
  }
  SUBCASE("classes get distinct pairs") {
    const auto pairs = coactivation_pairs(p);
    std::set<std::pair<int, int>> seen;
    for (const auto& cls : pairs) {
      REQUIRE(cls.size() == 1u);
      CHECK(cls[0].first < cls[0].second);
      seen.insert({cls[0].first, cls[0].second});
    }
    CHECK(seen.size() == 4u);
  }
  SUBCASE("coupled channels fire together; marginals are class-independent") {
    SynthParams clean = p;
    clean.noise_sigma = 0.0;
    const auto d = synth_coactivation(clean);
    const auto pairs = coactivation_pairs(clean);
    Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(clean.num_classes, clean.channels);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(clean.num_classes);
    for (const auto& r : d.records) {
      const auto& v = r.trajectory.values();
      const auto& pr = pairs[r.label - 1][0];
      CHECK(v.row(pr.first) == v.row(pr.second));
      rate.row(r.label - 1) += v.rowwise().mean().transpose();
      count(r.label - 1) += 1.0;
    }
    for (int c = 0; c < clean.num_classes; ++c) rate.row(c) /= count(c);
    // 4000 Bernoulli(0.5) draws per (class, channel): 5 sigma is about 0.04.
    CHECK((rate.array() - 0.5).abs().maxCoeff() < 0.04);
  }
  SUBCASE("invalid parameters") {
    SynthParams q = p;
    q.activation_prob = 1.5;
    CHECK_THROWS_AS(synth_coactivation(q), InvalidArgument);
    q = p;
    q.pairs_per_class = 29;
    CHECK_THROWS_AS(synth_coactivation(q), InvalidArgument);
  }
}
