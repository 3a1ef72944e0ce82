#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "spdpool/classify.hpp"
#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"
#include "spdpool/learning.hpp"
#include "spdpool/pooling.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/smaid.hpp"
#include "spdpool/spd.hpp"
#include "spdpool/trajectory.hpp"

namespace spdpool::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// "# spdpool-config: <sub> --flag=value ..." with every flag of the
// subcommand, defaults resolved, sorted by name. --threads is left out: it
// never changes results.
std::string config_header(const CLI::App& sub) {
  std::vector<std::pair<std::string, std::string>> flags;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "threads") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    flags.emplace_back(name, value);
  }
  std::sort(flags.begin(), flags.end());
  std::string out = "# spdpool-config: " + sub.get_name();
  for (const auto& [k, v] : flags) out += " --" + k + "=" + v;
  return out + "\n";
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SynthParams p;
};

int do_synth(const SynthArgs& a, const std::string& header, std::ostream& out) {
  const Dataset data = synth_coactivation(a.p);
  save_dataset(data, a.out, header);
  out << "wrote " << data.records.size() << " sequences to " << a.out << "\n";
  const auto pairs = coactivation_pairs(a.p);
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    out << "class " << c + 1 << ":";
    for (const auto& pr : pairs[c]) out << " (" << pr.first << "," << pr.second << ")";
    out << "\n";
  }
  return kExitOk;
}

struct PoolArgs {
  std::string method = "kcp";
  std::string in, out;
  double gamma = 1.0;
  int block = 16;
  int perms = 3;
  std::uint64_t seed = 0;
  std::string scale = "none";
  std::string normalize = "none";
  std::string minmax_scope = "frame";
  std::string weighting = "none";
  double ridge = 0.0;
};

FeatureTrajectory prepare(const FeatureTrajectory& t, const PoolArgs& a) {
  FeatureTrajectory x = t;
  if (a.normalize != "none") {
    const auto mode = a.normalize == "simplex" ? NormalizeMode::Simplex
                      : a.normalize == "minmax" ? NormalizeMode::MinMax
                                                : NormalizeMode::Softmax;
    x = normalize_scores(x, mode, a.minmax_scope == "sequence" ? NormalizeScope::PerSequence : NormalizeScope::PerFrame);
  }
  if (a.weighting == "uniform") x = apply_weights(x, WeightProfile::uniform(x.channels(), x.frames()));
  return x;
}

BlockDescriptor pool_one(const FeatureTrajectory& raw, const PoolArgs& a) {
  const FeatureTrajectory t = prepare(raw, a);
  if (a.method == "bkcp") {
    if (a.ridge > 0.0) throw UsageError("--ridge applies to tcp and kcp only");
    return bkcp(t, {a.gamma}, {a.block, a.perms, a.seed});
  }
  SpdDescriptor d = a.method == "tcp" ? tcp(t, a.scale == "frames" ? TcpScale::ByFrames : TcpScale::None)
                                      : kcp(t, {a.gamma});
  if (a.ridge > 0.0) d = regularize(d, a.ridge);
  return BlockDescriptor::single(std::move(d));
}

int do_pool(const PoolArgs& a, const std::string& header, std::ostream& out) {
  if (fs::is_directory(a.in)) {
    const Dataset data = load_dataset(a.in);
    fs::create_directories(a.out);
    std::vector<LabelEntry> labels;
    std::vector<BlockDescriptor> descs(data.records.size());
    kernels::for_each_index(data.records.size(),
                            [&](std::size_t i) { descs[i] = pool_one(data.records[i].trajectory, a); });
    for (std::size_t i = 0; i < descs.size(); ++i) {
      const auto& id = data.records[i].trajectory.sequence_id();
      save_descriptor(descs[i], fs::path(a.out) / (id + ".spd"));
      labels.push_back({id, data.records[i].label});
    }
    save_labels(labels, fs::path(a.out) / "labels.csv", header);
    out << "pooled " << descs.size() << " sequences (" << a.method << ") into " << a.out << "\n";
    return kExitOk;
  }
  const auto t = load_trajectory(a.in, format_from_path(a.in));
  const auto d = pool_one(t, a);
  save_descriptor(d, a.out);
  out << a.method << ": " << d.blocks.size() << " block(s), dim " << d.total_dim << ", " << d.stored_size()
      << " stored entries -> " << a.out << "\n";
  return kExitOk;
}

struct SmaidArgs {
  std::string frames, out;
  int zeta = 15, beta = 3, tau = 0;
};

int do_smaid(const SmaidArgs& a, std::ostream& out) {
  const auto frames = read_frame_directory(a.frames);
  const auto img = smaid(frames, {a.zeta, a.beta, a.tau});
  for (const auto& p : export_smaid(img, a.out)) out << "wrote " << p.string() << "\n";
  return kExitOk;
}

struct LocalizeArgs {
  std::string frames, out;
  LocalizeParams p;
};

int do_localize(const LocalizeArgs& a, const std::string& header, std::ostream& out) {
  const auto box = localize(read_frame_directory(a.frames), a.p);
  const std::string body = "x0,y0,x1,y1\n" + std::to_string(box.x0) + "," + std::to_string(box.y0) + "," +
                           std::to_string(box.x1) + "," + std::to_string(box.y1) + "\n";
  if (a.out.empty()) {
    out << body;
  } else {
    write_text(a.out, header + body);
  }
  return kExitOk;
}

struct GramArgs {
  std::string measure = "le";
  std::string in, against, out;
  double xi = 1.0;
  double clamp = kDefaultClamp;
};

GramMeasure parse_measure(const std::string& m) {
  if (m == "le") return GramMeasure::LeKernel;
  if (m == "stein") return GramMeasure::SteinKernel;
  return GramMeasure::LinearOnLogvec;
}

std::vector<BlockDescriptor> load_descriptor_dir(const fs::path& dir) {
  const auto labels = load_labels(dir / "labels.csv");
  std::vector<BlockDescriptor> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(load_descriptor(dir / (l.sequence_id + ".spd")));
  if (out.empty()) throw IoError("no descriptors listed in " + (dir / "labels.csv").string());
  return out;
}

int do_gram(const GramArgs& a, const std::string& header, std::ostream& out) {
  const auto rows = load_descriptor_dir(a.in);
  const GramParams params{a.xi, a.clamp};
  Eigen::MatrixXd g;
  if (a.against.empty()) {
    g = gram(rows, parse_measure(a.measure), params);
  } else {
    const auto cols = load_descriptor_dir(a.against);
    g = cross_gram(rows, cols, parse_measure(a.measure), params);
  }
  save_matrix(g, a.out, header);
  out << a.measure << " Gram " << g.rows() << "x" << g.cols() << " -> " << a.out << "\n";
  return kExitOk;
}

struct SvmArgs {
  SvmParams p;
  std::string kernel = "precomputed";
  double xi = 1.0;
  double clamp = kDefaultClamp;
};

void add_svm_options(CLI::App* sub, SvmArgs& a) {
  sub->add_option("--C", a.p.c, "SVM regularization")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--tol", a.p.tol, "SMO stopping tolerance on the KKT gap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-passes", a.p.max_passes, "SMO iteration cap, in multiples of the training-set size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", a.p.seed, "working-set scan order seed")->capture_default_str();
}

std::vector<int> label_values(const std::vector<LabelEntry>& entries) {
  std::vector<int> out;
  for (const auto& e : entries) out.push_back(e.label);
  return out;
}

struct TrainSvmArgs {
  std::string gram, labels, out;
  int classes = 0;
  SvmArgs svm;
};

KernelDescriptor kernel_descriptor(const SvmArgs& a) {
  if (a.kernel == "precomputed") return {};
  return KernelDescriptor::from(parse_measure(a.kernel), {a.xi, a.clamp});
}

int do_train_svm(const TrainSvmArgs& a, std::ostream& out) {
  const Eigen::MatrixXd g = load_matrix(a.gram);
  const auto y = label_values(load_labels(a.labels));
  SvmModel model = svm_train(g, y, a.svm.p, a.classes);
  model.kernel = kernel_descriptor(a.svm);
  save_svm(model, a.out);
  for (int k = 0; k < model.num_classes; ++k) {
    const auto& m = model.machines[k];
    out << "class " << k + 1 << ": " << m.support.size() << " support vectors, KKT gap " << m.kkt_gap << ", "
        << m.iterations << " iterations" << (m.converged ? "" : " (iteration cap reached)") << "\n";
  }
  return kExitOk;
}

struct PredictArgs {
  std::string model, rows, labels, out;
};

int do_predict(const PredictArgs& a, const std::string& header, std::ostream& out) {
  const auto model = load_svm(a.model);
  const auto pred = svm_predict(model, load_matrix(a.rows));
  std::vector<std::string> ids;
  if (!a.labels.empty()) {
    for (const auto& e : load_labels(a.labels)) ids.push_back(e.sequence_id);
    if (ids.size() != pred.labels.size())
      throw UsageError("--labels lists " + std::to_string(ids.size()) + " sequences but --rows has " +
                       std::to_string(pred.labels.size()) + " rows");
  } else {
    for (std::size_t i = 0; i < pred.labels.size(); ++i) ids.push_back("row_" + std::to_string(i + 1));
  }
  write_text(a.out, header + format_predictions_csv(pred, ids));
  out << "predicted " << ids.size() << " rows -> " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string gram, predictions, labels, out, text;
  int folds = 5;
  std::uint64_t fold_seed = 0;
  int classes = 0;
  SvmArgs svm;
};

int do_eval(const EvalArgs& a, const std::string& header, std::ostream& out) {
  if (a.gram.empty() == a.predictions.empty()) throw UsageError("eval needs exactly one of --gram or --predictions");
  const auto entries = load_labels(a.labels);
  std::string csv = header, text;
  if (!a.gram.empty()) {
    const auto cv = cross_validate(load_matrix(a.gram), label_values(entries), a.folds, a.svm.p, a.fold_seed, a.classes);
    csv += format_eval_csv(cv.pooled);
    text += format_eval_text(cv.pooled);
    for (const auto& f : cv.folds) {
      csv += format_eval_csv(f);
      text += format_eval_text(f);
    }
  } else {
    std::vector<std::string> ids;
    const auto pred = parse_predictions_csv(read_text(a.predictions), &ids);
    std::map<std::string, int> truth_by_id;
    for (const auto& e : entries) truth_by_id[e.sequence_id] = e.label;
    std::vector<int> truth;
    for (const auto& id : ids) {
      const auto it = truth_by_id.find(id);
      if (it == truth_by_id.end()) throw UsageError("--labels has no entry for predicted sequence '" + id + "'");
      truth.push_back(it->second);
    }
    const auto r = evaluate(pred.scores, pred.labels, truth);
    csv += format_eval_csv(r);
    text += format_eval_text(r);
  }
  if (!a.out.empty()) write_text(a.out, csv);
  if (!a.text.empty()) write_text(a.text, text);
  out << text;
  return kExitOk;
}

struct TrainE2eArgs {
  std::string data, out_map, trace;
  std::string loss = "frob";
  TrainOptions o;
};

int do_train_e2e(const TrainE2eArgs& a, const std::string& header, std::ostream& out) {
  TrainOptions o = a.o;
  o.loss = a.loss == "jbld" ? LossKind::Jbld : LossKind::Frobenius;
  const Dataset data = load_dataset(a.data);
  const auto result = train_linear(data, o);
  if (!a.out_map.empty())
    save_trajectory(FeatureTrajectory(result.map.weights, TrajectoryKind::Features, "linear_map"), a.out_map,
                    TrajectoryFormat::TrjBinary);
  if (!a.trace.empty()) {
    std::string csv = header + "iteration,loss\n";
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
      csv += std::to_string(i) + "," + fmt(result.loss_trace[i]) + "\n";
    write_text(a.trace, csv);
  }
  if (!result.loss_trace.empty()) {
    const double first = result.loss_trace.front(), last = result.loss_trace.back();
    out << "loss " << a.loss << ": initial " << fmt(first) << ", final " << fmt(last) << " (" << std::fixed
        << std::setprecision(1) << 100.0 * (1.0 - last / first) << "% reduction)\n";
  }
  return kExitOk;
}

struct GradcheckArgs {
  std::string loss = "jbld";
  int m = 3, n = 8;
  std::uint64_t seed = 5;
  double h = 1e-6;
  double epsilon = kDefaultLabelEpsilon;
  double ridge = LossOptions{}.jbld_ridge;
  double threshold = 1e-5;
};

int do_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  Rng rng(a.seed);
  Eigen::MatrixXd t(a.m, a.n);
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = 0.05 + 0.95 * rng.uniform();
  const int label = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(a.m)));
  const auto y = encode_label(label, a.m, a.epsilon);
  const auto kind = a.loss == "jbld" ? LossKind::Jbld : LossKind::Frobenius;
  const auto r = fd_gradient(kind, t, y, a.h, {a.ridge});
  const bool pass = r.max_relative_error < a.threshold;
  out << "loss " << a.loss << "  M=" << a.m << " n=" << a.n << " seed=" << a.seed << " label=" << label
      << " h=" << a.h << "\n";
  out << "max relative error " << std::scientific << std::setprecision(3) << r.max_relative_error << "\n";
  if (kind == LossKind::Frobenius)
    out << "gradient constant " << std::defaultfloat << kFrobGradConstant
        << " (differentiating ||CP - Y||_F^2; a constant of 2 would be off by a factor of two)\n";
  out << (pass ? "PASS" : "FAIL") << " (threshold " << std::scientific << a.threshold << ")\n";
  return pass ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Second-order pooling of feature trajectories on the SPD manifold", "spdpool"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker threads for parallel kernels (0 = runtime default)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "generate the synthetic co-activation dataset");
  s_synth->add_option("--out", synth.out, "output dataset directory")->required();
  s_synth->add_option("--classes", synth.p.num_classes, "number of classes")->capture_default_str();
  s_synth->add_option("--channels", synth.p.channels, "feature channels")->capture_default_str();
  s_synth->add_option("--pairs", synth.p.pairs_per_class, "co-activating channel pairs per class")
      ->capture_default_str();
  s_synth->add_option("--seq-len", synth.p.seq_len, "frames per sequence")->capture_default_str();
  s_synth->add_option("--per-class", synth.p.sequences_per_class, "sequences per class")->capture_default_str();
  s_synth->add_option("--noise", synth.p.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  s_synth->add_option("--prob", synth.p.activation_prob, "activation probability")->capture_default_str();
  s_synth->add_option("--seed", synth.p.seed, "generator seed")->capture_default_str();

  PoolArgs pool;
  auto* s_pool = app.add_subcommand("pool", "pool a trajectory (or a dataset directory) into SPD1 descriptors");
  s_pool->add_option("--method", pool.method, "pooling operator")
      ->capture_default_str()
      ->check(CLI::IsMember({"tcp", "kcp", "bkcp"}));
  s_pool->add_option("--in", pool.in, "trajectory file (.trj/.csv) or dataset directory")->required();
  s_pool->add_option("--out", pool.out, "descriptor file, or directory when --in is a directory")->required();
  s_pool->add_option("--gamma", pool.gamma, "RBF bandwidth for kcp/bkcp")->capture_default_str()->check(CLI::PositiveNumber);
  s_pool->add_option("--block", pool.block, "bkcp block length p")->capture_default_str();
  s_pool->add_option("--perms", pool.perms, "bkcp permutation count")->capture_default_str();
  s_pool->add_option("--seed", pool.seed, "bkcp permutation seed")->capture_default_str();
  s_pool->add_option("--scale", pool.scale, "tcp scaling")->capture_default_str()->check(CLI::IsMember({"none", "frames"}));
  s_pool->add_option("--normalize", pool.normalize, "score normalization before pooling")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "simplex", "minmax", "softmax"}));
  s_pool->add_option("--minmax-scope", pool.minmax_scope, "min-max range per frame or per sequence")
      ->capture_default_str()
      ->check(CLI::IsMember({"frame", "sequence"}));
  s_pool->add_option("--weighting", pool.weighting, "temporal weights applied before pooling")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "uniform"}));
  s_pool->add_option("--ridge", pool.ridge, "relative ridge added to tcp/kcp (times trace/d)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  SmaidArgs sm;
  auto* s_smaid = app.add_subcommand("smaid", "stacked mean-absolute-difference image from a frame directory");
  s_smaid->add_option("--frames", sm.frames, "directory of .pgm/.ppm frames")->required();
  s_smaid->add_option("--out", sm.out, "output image (.ppm for 3 channels, else <stem>_c<k>.pgm)")->required();
  s_smaid->add_option("--zeta", sm.zeta, "frames per channel")->capture_default_str();
  s_smaid->add_option("--beta", sm.beta, "channels")->capture_default_str();
  s_smaid->add_option("--tau", sm.tau, "frames skipped before the first window")->capture_default_str();

  LocalizeArgs loc;
  auto* s_loc = app.add_subcommand("localize", "action bounding box from frame differences");
  s_loc->add_option("--frames", loc.frames, "directory of .pgm/.ppm frames")->required();
  s_loc->add_option("--out", loc.out, "CSV output (stdout when omitted)")->capture_default_str();
  s_loc->add_option("--threshold", loc.p.diff_threshold, "absolute difference threshold (0-255)")->capture_default_str();
  s_loc->add_option("--radius", loc.p.dilate_radius, "dilation radius")->capture_default_str();
  s_loc->add_option("--iters", loc.p.dilate_iters, "dilation iterations")->capture_default_str();
  s_loc->add_option("--min-area", loc.p.min_component_area, "smallest kept component, in pixels")->capture_default_str();

  GramArgs gr;
  auto* s_gram = app.add_subcommand("gram", "kernel matrix over a descriptor directory");
  s_gram->add_option("--measure", gr.measure, "kernel")
      ->capture_default_str()
      ->check(CLI::IsMember({"le", "stein", "linear-logvec"}));
  s_gram->add_option("--in", gr.in, "descriptor directory (rows)")->required();
  s_gram->add_option("--against", gr.against, "training descriptor directory (columns); default: --in itself")
      ->capture_default_str();
  s_gram->add_option("--out", gr.out, "output matrix (.csv or .grm)")->required();
  s_gram->add_option("--xi", gr.xi, "kernel bandwidth")->capture_default_str()->check(CLI::PositiveNumber);
  s_gram->add_option("--clamp", gr.clamp, "eigenvalue floor for the matrix log, relative to the largest")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  TrainSvmArgs ts;
  auto* s_train = app.add_subcommand("train-svm", "one-vs-rest SVM on a precomputed Gram");
  s_train->add_option("--gram", ts.gram, "training Gram (.csv or .grm)")->required();
  s_train->add_option("--labels", ts.labels, "labels.csv in Gram row order")->required();
  s_train->add_option("--out", ts.out, "model file (SVM1)")->required();
  s_train->add_option("--classes", ts.classes, "class count (0 = largest label)")->capture_default_str();
  add_svm_options(s_train, ts.svm);
  s_train->add_option("--kernel", ts.svm.kernel, "kernel recorded in the model")
      ->capture_default_str()
      ->check(CLI::IsMember({"precomputed", "le", "stein", "linear-logvec"}));
  s_train->add_option("--xi", ts.svm.xi, "kernel bandwidth recorded in the model")->capture_default_str();
  s_train->add_option("--clamp", ts.svm.clamp, "eigenvalue floor recorded in the model")->capture_default_str();

  PredictArgs pr;
  auto* s_pred = app.add_subcommand("predict", "decision values and labels from kernel rows");
  s_pred->add_option("--model", pr.model, "SVM1 model")->required();
  s_pred->add_option("--rows", pr.rows, "test x train kernel rows (.csv or .grm)")->required();
  s_pred->add_option("--labels", pr.labels, "labels.csv naming the test sequences")->capture_default_str();
  s_pred->add_option("--out", pr.out, "predictions CSV")->required();

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "k-fold evaluation of a Gram, or scoring of a predictions file");
  s_eval->add_option("--gram", ev.gram, "Gram over the whole set (k-fold mode)")->capture_default_str();
  s_eval->add_option("--predictions", ev.predictions, "predictions CSV (scoring mode)")->capture_default_str();
  s_eval->add_option("--labels", ev.labels, "ground-truth labels.csv")->required();
  s_eval->add_option("--folds", ev.folds, "k for k-fold")->capture_default_str();
  s_eval->add_option("--fold-seed", ev.fold_seed, "fold assignment seed")->capture_default_str();
  s_eval->add_option("--classes", ev.classes, "class count (0 = largest label)")->capture_default_str();
  s_eval->add_option("--out", ev.out, "report CSV")->capture_default_str();
  s_eval->add_option("--text", ev.text, "human-readable report")->capture_default_str();
  add_svm_options(s_eval, ev.svm);

  TrainE2eArgs e2e;
  auto* s_e2e = app.add_subcommand("train-e2e", "train a linear per-frame map through a second-order loss");
  s_e2e->add_option("--data", e2e.data, "dataset directory")->required();
  s_e2e->add_option("--loss", e2e.loss, "loss")->capture_default_str()->check(CLI::IsMember({"frob", "jbld"}));
  s_e2e->add_option("--lr", e2e.o.learning_rate, "learning rate")->capture_default_str();
  s_e2e->add_option("--momentum", e2e.o.momentum, "momentum")->capture_default_str();
  s_e2e->add_option("--iters", e2e.o.iterations, "iterations")->capture_default_str();
  s_e2e->add_option("--clip-len", e2e.o.clip_len, "frames per training clip")->capture_default_str();
  s_e2e->add_option("--seed", e2e.o.seed, "initialization and clip seed")->capture_default_str();
  s_e2e->add_option("--init-scale", e2e.o.init_scale, "std-dev of the initial weights")->capture_default_str();
  s_e2e->add_option("--epsilon", e2e.o.epsilon, "label epsilon (negative: 1e-5 for jbld, 0 for frob)")
      ->capture_default_str();
  s_e2e->add_option("--ridge", e2e.o.loss_options.jbld_ridge, "relative ridge inside the jbld loss")
      ->capture_default_str();
  s_e2e->add_option("--out-map", e2e.out_map, "learned map (TRJ1)")->capture_default_str();
  s_e2e->add_option("--trace", e2e.trace, "loss trace CSV")->capture_default_str();

  GradcheckArgs gc;
  auto* s_gc = app.add_subcommand("gradcheck", "compare a loss gradient with central finite differences");
  s_gc->add_option("--loss", gc.loss, "loss")->capture_default_str()->check(CLI::IsMember({"frob", "jbld"}));
  s_gc->add_option("--M", gc.m, "classes (rows of T)")->capture_default_str()->check(CLI::PositiveNumber);
  s_gc->add_option("--n", gc.n, "frames (columns of T)")->capture_default_str()->check(CLI::PositiveNumber);
  s_gc->add_option("--seed", gc.seed, "seed for T and the label")->capture_default_str();
  s_gc->add_option("--step", gc.h, "finite-difference step")->capture_default_str()->check(CLI::PositiveNumber);
  s_gc->add_option("--epsilon", gc.epsilon, "label epsilon")->capture_default_str();
  s_gc->add_option("--ridge", gc.ridge, "relative ridge inside the jbld loss")->capture_default_str();
  s_gc->add_option("--threshold", gc.threshold, "pass threshold on the max relative error")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'spdpool --help' for the list of subcommands and flags\n";
    return kExitUsage;
  }

  if (threads > 0) set_num_threads(threads);
  const CLI::App* sub = app.get_subcommands().front();
  const std::string header = config_header(*sub);
  const std::string name = sub->get_name();
  try {
    if (name == "synth") return do_synth(synth, header, out);
    if (name == "pool") return do_pool(pool, header, out);
    if (name == "smaid") return do_smaid(sm, out);
    if (name == "localize") return do_localize(loc, header, out);
    if (name == "gram") return do_gram(gr, header, out);
    if (name == "train-svm") return do_train_svm(ts, out);
    if (name == "predict") return do_predict(pr, header, out);
    if (name == "eval") return do_eval(ev, header, out);
    if (name == "train-e2e") return do_train_e2e(e2e, header, out);
    if (name == "gradcheck") return do_gradcheck(gc, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << "usage error: unknown subcommand '" << name << "'\n";
  return kExitUsage;
}

}  // namespace spdpool::cli
