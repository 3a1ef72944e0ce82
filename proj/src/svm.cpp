#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "binary_io.hpp"
#include "spdpool/classify.hpp"
#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"
#include "spdpool/rng.hpp"

namespace spdpool {

KernelDescriptor KernelDescriptor::from(GramMeasure measure, const GramParams& params) {
  KernelDescriptor k;
  k.xi = params.xi;
  k.clamp = params.clamp;
  switch (measure) {
    case GramMeasure::LeKernel: k.tag = Tag::LeKernel; break;
    case GramMeasure::SteinKernel: k.tag = Tag::SteinKernel; break;
    case GramMeasure::LinearOnLogvec: k.tag = Tag::LinearOnLogvec; break;
  }
  return k;
}

Eigen::VectorXd fuse_concat(std::span<const Eigen::VectorXd> streams) {
  if (streams.empty()) throw InvalidArgument("fuse_concat: no streams");
  Eigen::Index total = 0;
  for (const auto& s : streams) total += s.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& s : streams) {
    out.segment(at, s.size()) = s;
    at += s.size();
  }
  return out;
}

namespace {

// Dual problem  min 1/2 a^T Q a - e^T a,  0 <= a <= C,  y^T a = 0,  with
// Q_ij = y_i y_j K_ij.  Working pairs by second-order selection; updates and
// the bias follow the classic libsvm solver.
class Smo {
 public:
  Smo(const Eigen::MatrixXd& k, std::vector<int> y, const SvmParams& p)
      : k_(k), y_(std::move(y)), c_(p.c), tol_(p.tol), n_(y_.size()) {
    alpha_.assign(n_, 0.0);
    grad_.assign(n_, -1.0);
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(p.seed);
    rng.shuffle(order_);
    max_iter_ = static_cast<long>(p.max_passes) * static_cast<long>(std::max<std::size_t>(n_, 1));
  }

  BinarySvm solve() {
    BinarySvm out;
    long it = 0;
    std::size_t i = 0, j = 0;
    while (true) {
      const double gap = select(i, j);
      out.kkt_gap = gap;
      if (gap < tol_) break;
      if (it >= max_iter_) {
        out.converged = false;
        break;
      }
      update(i, j);
      ++it;
    }
    out.iterations = it;
    out.bias = -rho();
    for (std::size_t s = 0; s < n_; ++s)
      if (alpha_[s] > 0.0) {
        out.support.push_back(static_cast<std::uint32_t>(s));
        out.coef.push_back(y_[s] * alpha_[s]);
      }
    return out;
  }

 private:
  double q(std::size_t a, std::size_t b) const { return y_[a] * y_[b] * k_(a, b); }
  bool up(std::size_t t) const { return y_[t] > 0 ? alpha_[t] < c_ : alpha_[t] > 0.0; }
  bool low(std::size_t t) const { return y_[t] > 0 ? alpha_[t] > 0.0 : alpha_[t] < c_; }

  // Returns the maximal violation m(a) - M(a); sets the working pair.
  double select(std::size_t& i_out, std::size_t& j_out) const {
    constexpr double kTau = 1e-12;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n_;
    for (std::size_t t : order_)
      if (up(t) && -y_[t] * grad_[t] > gmax) {
        gmax = -y_[t] * grad_[t];
        i = t;
      }
    if (i == n_) return 0.0;
    std::size_t j = n_;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t : order_) {
      if (!low(t)) continue;
      const double v = -y_[t] * grad_[t];
      gmin = std::min(gmin, v);
      const double b = gmax - v;
      if (b > 0.0) {
        double a = k_(i, i) + k_(t, t) - 2.0 * k_(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = t;
        }
      }
    }
    if (j == n_) return 0.0;
    i_out = i;
    j_out = j;
    return gmax - gmin;
  }

  void update(std::size_t i, std::size_t j) {
    constexpr double kTau = 1e-12;
    const double old_i = alpha_[i], old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c_) {
          ai = c_;
          aj = c_ - diff;
        }
      } else if (aj > c_) {
        aj = c_;
        ai = c_ + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) {
          ai = c_;
          aj = sum - c_;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) {
          aj = c_;
          ai = sum - c_;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < n_; ++t) grad_[t] += q(t, i) * di + q(t, j) * dj;
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0.0;
    int free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (alpha_[t] >= c_) {
        if (y_[t] < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (alpha_[t] <= 0.0) {
        if (y_[t] > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++free;
        sum += yg;
      }
    }
    if (free > 0) return sum / free;
    if (std::isinf(ub) || std::isinf(lb)) return std::isinf(ub) ? (std::isinf(lb) ? 0.0 : lb) : ub;
    return 0.5 * (ub + lb);
  }

  const Eigen::MatrixXd& k_;
  std::vector<int> y_;
  double c_, tol_;
  std::size_t n_;
  long max_iter_;
  std::vector<double> alpha_, grad_;
  std::vector<std::size_t> order_;
};

void check_gram(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw InvalidArgument("svm_train: Gram must be square and nonempty");
  if (!gram.allFinite()) throw InvalidArgument("svm_train: Gram has non-finite entries");
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw InvalidArgument("svm_train: Gram is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues()(0);
  const double trace = gram.trace();
  if (min_eig < -1e-6 * std::abs(trace))
    throw NumericalError("svm_train: Gram is not PSD (min eigenvalue " + std::to_string(min_eig) + " < -1e-6 * trace " +
                         std::to_string(trace) + "); check the kernel parameters, e.g. the Stein bandwidth");
}

}  // namespace

SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels, const SvmParams& params, int num_classes) {
  if (!(params.c > 0.0)) throw InvalidArgument("svm_train: C must be positive");
  if (!(params.tol > 0.0)) throw InvalidArgument("svm_train: tol must be positive");
  if (params.max_passes < 1) throw InvalidArgument("svm_train: max_passes must be >= 1");
  if (static_cast<Eigen::Index>(labels.size()) != gram.rows())
    throw InvalidArgument("svm_train: " + std::to_string(labels.size()) + " labels for a " +
                          std::to_string(gram.rows()) + "x" + std::to_string(gram.cols()) + " Gram");
  check_gram(gram);
  int inferred = 0;
  for (int l : labels) {
    if (l < 1) throw InvalidArgument("svm_train: labels are 1-based, got " + std::to_string(l));
    inferred = std::max(inferred, l);
  }
  if (num_classes == 0) num_classes = inferred;
  if (inferred > num_classes)
    throw InvalidArgument("svm_train: label " + std::to_string(inferred) + " exceeds class count " +
                          std::to_string(num_classes));

  SvmModel model;
  model.num_classes = num_classes;
  model.num_train = static_cast<std::uint32_t>(labels.size());
  model.c = params.c;
  model.machines.resize(num_classes);
  kernels::for_each_index(static_cast<std::size_t>(num_classes), [&](std::size_t k) {
    std::vector<int> y(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) y[t] = labels[t] == static_cast<int>(k) + 1 ? 1 : -1;
    SvmParams p = params;
    p.seed = params.seed + k;
    model.machines[k] = Smo(gram, std::move(y), p).solve();
  });
  return model;
}

SvmPrediction svm_predict(const SvmModel& model, const Eigen::MatrixXd& kernel_rows) {
  if (kernel_rows.cols() != static_cast<Eigen::Index>(model.num_train))
    throw InvalidArgument("svm_predict: kernel rows have " + std::to_string(kernel_rows.cols()) +
                          " columns but the model was trained on " + std::to_string(model.num_train) + " samples");
  SvmPrediction out;
  out.scores.resize(kernel_rows.rows(), model.num_classes);
  out.labels.resize(kernel_rows.rows());
  for (Eigen::Index r = 0; r < kernel_rows.rows(); ++r) {
    int best = 0;
    for (int k = 0; k < model.num_classes; ++k) {
      const auto& m = model.machines[k];
      double f = m.bias;
      for (std::size_t s = 0; s < m.support.size(); ++s) f += m.coef[s] * kernel_rows(r, m.support[s]);
      out.scores(r, k) = f;
      if (f > out.scores(r, best)) best = k;
    }
    out.labels[r] = best + 1;
  }
  return out;
}

std::string format_svm1(const SvmModel& model) {
  using namespace detail;
  std::string out = "SVM1";
  put_u32(out, static_cast<std::uint32_t>(model.num_classes));
  put_u32(out, model.num_train);
  put_f64(out, model.c);
  for (const auto& m : model.machines) {
    put_u32(out, static_cast<std::uint32_t>(m.support.size()));
    for (auto s : m.support) put_u32(out, s);
    for (double c : m.coef) put_f64(out, c);
    put_f64(out, m.bias);
  }
  out.push_back(static_cast<char>(model.kernel.tag));
  put_f64(out, model.kernel.xi);
  put_f64(out, model.kernel.clamp);
  return out;
}

SvmModel parse_svm1(const std::string& bytes) {
  detail::ByteReader in(bytes, "SVM1");
  in.expect_magic("SVM1");
  SvmModel model;
  const auto classes = in.u32();
  if (classes < 1 || classes > 1u << 20) throw FormatError("SVM1: implausible class count " + std::to_string(classes));
  model.num_classes = static_cast<int>(classes);
  model.num_train = in.u32();
  model.c = in.f64();
  model.machines.resize(classes);
  for (auto& m : model.machines) {
    const auto count = in.u32();
    if (count > model.num_train) throw FormatError("SVM1: more support vectors than training samples");
    m.support.resize(count);
    m.coef.resize(count);
    for (auto& s : m.support) {
      s = in.u32();
      if (s >= model.num_train) throw FormatError("SVM1: support index " + std::to_string(s) + " out of range");
    }
    for (auto& c : m.coef) c = in.f64();
    m.bias = in.f64();
  }
  const auto tag = in.u8();
  if (tag > 3) throw FormatError("SVM1: unknown kernel tag " + std::to_string(tag));
  model.kernel.tag = static_cast<KernelDescriptor::Tag>(tag);
  model.kernel.xi = in.f64();
  model.kernel.clamp = in.f64();
  in.expect_end();
  return model;
}

void save_svm(const SvmModel& model, const std::filesystem::path& path) {
  detail::write_file(path, format_svm1(model));
}

SvmModel load_svm(const std::filesystem::path& path) {
  try {
    return parse_svm1(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace spdpool
