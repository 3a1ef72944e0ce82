#include <cmath>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "spdpool/kernels.hpp"

namespace spdpool {

namespace {

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown once the loop has joined.
class FirstException {
 public:
  template <typename Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace

void set_num_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

Eigen::MatrixXd row_inner_products(const RowMatrix& t) {
  const Eigen::Index d = t.rows();
  const Eigen::Index n = t.cols();
  Eigen::MatrixXd out(d, d);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < d; ++j) {
    const double* a = t.data() + j * n;
    for (Eigen::Index k = 0; k <= j; ++k) {
      const double* b = t.data() + k * n;
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += a[i] * b[i];
      out(j, k) = s;
      out(k, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd row_rbf_sums(const RowMatrix& t, double gamma) {
  const Eigen::Index d = t.rows();
  const Eigen::Index n = t.cols();
  Eigen::MatrixXd out(d, d);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < d; ++j) {
    const double* a = t.data() + j * n;
    for (Eigen::Index k = 0; k <= j; ++k) {
      const double* b = t.data() + k * n;
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = a[i] - b[i];
        s += std::exp(-gamma * diff * diff);
      }
      out(j, k) = s;
      out(k, j) = s;
    }
  }
  return out;
}

Eigen::MatrixXd symmetric_pairwise(std::size_t n, const PairFunction& f) {
  Eigen::MatrixXd out(n, n);
  FirstException guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    guard.run([&] {
      for (long long j = i; j < count; ++j) {
        const double v = f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        out(i, j) = v;
        out(j, i) = v;
      }
    });
  }
  guard.rethrow();
  return out;
}

Eigen::MatrixXd cross_pairwise(std::size_t rows, std::size_t cols, const PairFunction& f) {
  Eigen::MatrixXd out(rows, cols);
  FirstException guard;
  const auto count = static_cast<long long>(rows);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    guard.run([&] {
      for (std::size_t j = 0; j < cols; ++j) out(i, j) = f(static_cast<std::size_t>(i), j);
    });
  }
  guard.rethrow();
  return out;
}

Eigen::MatrixXd mean_abs_diff(std::span<const Eigen::MatrixXd> frames) {
  const Eigen::Index h = frames[0].rows();
  const Eigen::Index w = frames[0].cols();
  const double scale = 1.0 / static_cast<double>(frames.size() - 1);
  Eigen::MatrixXd out(h, w);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < w; ++c) {
    for (Eigen::Index r = 0; r < h; ++r) {
      double s = 0.0;
      for (std::size_t j = 1; j < frames.size(); ++j) s += std::abs(frames[j](r, c) - frames[j - 1](r, c));
      out(r, c) = s * scale;
    }
  }
  return out;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  FirstException guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) guard.run([&] { fn(static_cast<std::size_t>(i)); });
  guard.rethrow();
}

}  // namespace kernels
}  // namespace spdpool
