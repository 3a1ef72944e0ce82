#include "spdpool/spd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spdpool/error.hpp"

namespace spdpool {

namespace {

void require_square(const Eigen::MatrixXd& c, const char* who) {
  if (c.rows() != c.cols() || c.rows() == 0) throw InvalidArgument(std::string(who) + ": expected a nonempty square matrix");
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& c, const char* who) {
  require_square(c, who);
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (!c.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite entries");
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw InvalidArgument(std::string(who) + ": matrix is not symmetric");
  return 0.5 * (c + c.transpose());
}

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index q = 0; q < a.cols(); ++q)
    for (Eigen::Index p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

// Cyclic Jacobi sweeps over a (already symmetric) matrix; v may be null.
int jacobi(Eigen::MatrixXd& a, Eigen::MatrixXd* v, const JacobiOptions& options) {
  const Eigen::Index m = a.rows();
  const double target = options.tolerance * a.norm();
  for (int sweep = 0; sweep <= options.max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) return sweep;
    if (sweep == options.max_sweeps) break;
    for (Eigen::Index p = 0; p < m - 1; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150)
          t = 0.5 / theta;
        else
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        if (v) {
          for (Eigen::Index k = 0; k < m; ++k) {
            const double vkp = (*v)(k, p), vkq = (*v)(k, q);
            (*v)(k, p) = c * vkp - s * vkq;
            (*v)(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  throw NumericalError("Jacobi eigensolver did not converge within " + std::to_string(options.max_sweeps) + " sweeps");
}

std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& values) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] > values[j]; });
  return order;
}

}  // namespace

SymEig sym_eig(const Eigen::MatrixXd& c, const JacobiOptions& options) {
  Eigen::MatrixXd a = symmetrized(c, "sym_eig");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const int sweeps = jacobi(a, &v, options);
  const Eigen::VectorXd diag = a.diagonal();
  const auto order = descending_order(diag);
  SymEig out;
  out.sweeps = sweeps;
  out.eigenvalues.resize(diag.size());
  out.eigenvectors.resize(v.rows(), v.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.eigenvalues[k] = diag[order[k]];
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& c, const JacobiOptions& options) {
  Eigen::MatrixXd a = symmetrized(c, "sym_eigenvalues");
  jacobi(a, nullptr, options);
  Eigen::VectorXd diag = a.diagonal();
  std::sort(diag.begin(), diag.end(), std::greater<>());
  return diag;
}

double min_eigenvalue(const Eigen::MatrixXd& c) { return sym_eigenvalues(c).minCoeff(); }

bool is_psd(const Eigen::MatrixXd& c, double tolerance) {
  return min_eigenvalue(c) >= -tolerance * std::abs(c.trace());
}

namespace {

Eigen::MatrixXd reconstruct(const SymEig& e, const Eigen::VectorXd& values) {
  Eigen::MatrixXd out = e.eigenvectors * values.asDiagonal() * e.eigenvectors.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

Eigen::MatrixXd spd_log(const Eigen::MatrixXd& c, double clamp) {
  if (!(clamp > 0.0)) throw InvalidArgument("spd_log: clamp must be positive");
  const SymEig e = sym_eig(c);
  const double lmax = e.eigenvalues[0];
  const double lmin = e.eigenvalues[e.eigenvalues.size() - 1];
  if (lmin < -1e-8 * std::abs(c.trace()))
    throw NumericalError("spd_log: matrix is indefinite (smallest eigenvalue " + std::to_string(lmin) + ")");
  if (!(lmax > 0.0)) throw NumericalError("spd_log: matrix has no positive eigenvalue");
  const double floor = clamp * lmax;
  Eigen::VectorXd logs(e.eigenvalues.size());
  for (Eigen::Index i = 0; i < logs.size(); ++i) logs[i] = std::log(std::max(e.eigenvalues[i], floor));
  return reconstruct(e, logs);
}

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s) {
  const SymEig e = sym_eig(s);
  return reconstruct(e, e.eigenvalues.array().exp().matrix());
}

Eigen::MatrixXd regularize(const Eigen::MatrixXd& c, double ridge) {
  require_square(c, "regularize");
  if (!(ridge >= 0.0)) throw InvalidArgument("regularize: ridge must be nonnegative");
  if ((c.array() == 0.0).all()) throw InvalidArgument("regularize: zero matrix cannot be made positive definite");
  if (ridge == 0.0) return c;
  Eigen::MatrixXd out = c;
  out.diagonal().array() += ridge * c.trace() / static_cast<double>(c.rows());
  return out;
}

SpdDescriptor regularize(const SpdDescriptor& c, double ridge) { return {regularize(c.matrix, ridge), c.n_frames}; }

double le_dist(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double clamp) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols()) throw InvalidArgument("le_dist: dimension mismatch");
  return (spd_log(c1, clamp) - spd_log(c2, clamp)).norm();
}

double le_kernel(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double xi, double clamp) {
  if (!(xi > 0.0)) throw InvalidArgument("le_kernel: xi must be positive");
  const double d = le_dist(c1, c2, clamp);
  return std::exp(-xi * d * d);
}

double logdet_spd(const Eigen::MatrixXd& c) {
  require_square(c, "logdet");
  const Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw NumericalError("logdet: matrix is not strictly positive definite");
  const auto diag = llt.matrixLLT().diagonal();
  double s = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) s += std::log(diag[i]);
  s *= 2.0;
  if (!std::isfinite(s)) throw NumericalError("logdet: matrix is singular");
  return s;
}

double jbld(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols()) throw InvalidArgument("jbld: dimension mismatch");
  const Eigen::MatrixXd mid = 0.5 * (c1 + c2);
  return logdet_spd(mid) - 0.5 * (logdet_spd(c1) + logdet_spd(c2));
}

SteinBandwidth::SteinBandwidth(double xi) : xi_(xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidArgument("Stein bandwidth must be positive and finite");
}

bool SteinBandwidth::admissible_for(Eigen::Index m) const noexcept {
  if (xi_ >= static_cast<double>(m)) return true;
  const double twice = 2.0 * xi_;
  const double k = std::round(twice);
  return std::abs(twice - k) <= 1e-12 * std::max(1.0, twice) && k >= 1.0 && k <= static_cast<double>(m - 1);
}

void SteinBandwidth::check(Eigen::Index m) const {
  if (!admissible_for(m)) {
    std::string allowed;
    for (Eigen::Index k = 1; k < m; ++k) allowed += (k == 1 ? "" : ", ") + std::to_string(k * 0.5).substr(0, 4);
    throw InvalidArgument("Stein bandwidth xi=" + std::to_string(xi_) + " is not admissible for " + std::to_string(m) +
                          "x" + std::to_string(m) + " matrices; use one of {" + allowed + "} or xi >= " +
                          std::to_string(m));
  }
}

double stein_kernel(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, const SteinBandwidth& xi) {
  xi.check(c1.rows());
  return std::exp(-xi.value() * jbld(c1, c2));
}

Eigen::MatrixXd combine_kernels(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2, double a, double b,
                                CombineMode mode) {
  if (k1.rows() != k2.rows() || k1.cols() != k2.cols()) throw InvalidArgument("combine_kernels: shape mismatch");
  if (mode == CombineMode::Sum) {
    if (!(a >= 0.0 && b >= 0.0)) throw InvalidArgument("combine_kernels: sum weights must be nonnegative");
    return a * k1 + b * k2;
  }
  auto positive_integer = [](double x) { return x >= 1.0 && x == std::floor(x) && x < 1e6; };
  if (!positive_integer(a) || !positive_integer(b))
    throw InvalidArgument("combine_kernels: product exponents must be positive integers");
  const int ia = static_cast<int>(a), ib = static_cast<int>(b);
  Eigen::MatrixXd out(k1.rows(), k1.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      double pa = 1.0, pb = 1.0;
      for (int e = 0; e < ia; ++e) pa *= k1(i, j);
      for (int e = 0; e < ib; ++e) pb *= k2(i, j);
      out(i, j) = pa * pb;
    }
  return out;
}

Eigen::VectorXd log_vectorize(const Eigen::MatrixXd& c, double clamp) {
  const Eigen::MatrixXd l = spd_log(c, clamp);
  const Eigen::Index m = l.rows();
  Eigen::VectorXd out(m * (m + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m; ++r) {
    out[k++] = l(r, r);
    for (Eigen::Index col = r + 1; col < m; ++col) out[k++] = std::sqrt(2.0) * l(r, col);
  }
  return out;
}

Eigen::VectorXd log_vectorize(const BlockDescriptor& desc, double clamp) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(desc.stored_size()));
  Eigen::Index offset = 0;
  for (const auto& b : desc.blocks) {
    const Eigen::VectorXd v = log_vectorize(b.matrix, clamp);
    out.segment(offset, v.size()) = v;
    offset += v.size();
  }
  return out;
}

}  // namespace spdpool
