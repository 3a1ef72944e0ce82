#include <cmath>

#include "binary_io.hpp"
#include "csv_util.hpp"
#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"
#include "spdpool/spd.hpp"

namespace spdpool {

namespace {

std::vector<Eigen::Index> block_dims(const BlockDescriptor& d) {
  std::vector<Eigen::Index> dims;
  for (const auto& b : d.blocks) dims.push_back(b.dim());
  return dims;
}

void check_homogeneous(std::span<const BlockDescriptor> a, std::span<const BlockDescriptor> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("gram: no descriptors");
  const auto dims = block_dims(a.front());
  if (dims.empty()) throw InvalidArgument("gram: descriptor without blocks");
  for (auto set : {a, b})
    for (std::size_t i = 0; i < set.size(); ++i)
      if (block_dims(set[i]) != dims)
        throw InvalidArgument("gram: descriptor " + std::to_string(i) + " has a different block layout");
}

// Everything an entry needs, computed once per descriptor.
struct Prepared {
  std::vector<Eigen::VectorXd> logvec;            // LE / linear measures
  std::vector<std::vector<double>> block_logdet;  // Stein measure
};

Prepared prepare(std::span<const BlockDescriptor> descs, GramMeasure measure, const GramParams& params) {
  Prepared p;
  if (measure == GramMeasure::SteinKernel) {
    p.block_logdet.resize(descs.size());
    kernels::for_each_index(descs.size(), [&](std::size_t i) {
      for (const auto& b : descs[i].blocks) p.block_logdet[i].push_back(logdet_spd(b.matrix));
    });
  } else {
    p.logvec.resize(descs.size());
    kernels::for_each_index(descs.size(), [&](std::size_t i) { p.logvec[i] = log_vectorize(descs[i], params.clamp); });
  }
  return p;
}

PairFunction entry_function(std::span<const BlockDescriptor> rows, const Prepared& pr,
                            std::span<const BlockDescriptor> cols, const Prepared& pc, GramMeasure measure,
                            const GramParams& params) {
  switch (measure) {
    case GramMeasure::LeKernel:
      return [&pr, &pc, xi = params.xi](std::size_t i, std::size_t j) {
        return std::exp(-xi * (pr.logvec[i] - pc.logvec[j]).squaredNorm());
      };
    case GramMeasure::LinearOnLogvec:
      return [&pr, &pc](std::size_t i, std::size_t j) { return pr.logvec[i].dot(pc.logvec[j]); };
    case GramMeasure::SteinKernel:
      return [rows, cols, &pr, &pc, xi = params.xi](std::size_t i, std::size_t j) {
        double div = 0.0;
        const auto& bi = rows[i].blocks;
        const auto& bj = cols[j].blocks;
        for (std::size_t b = 0; b < bi.size(); ++b) {
          const Eigen::MatrixXd mid = 0.5 * (bi[b].matrix + bj[b].matrix);
          div += logdet_spd(mid) - 0.5 * (pr.block_logdet[i][b] + pc.block_logdet[j][b]);
        }
        return std::exp(-xi * div);
      };
  }
  throw InvalidArgument("gram: unknown measure");
}

void check_params(std::span<const BlockDescriptor> descs, GramMeasure measure, const GramParams& params) {
  if (measure == GramMeasure::SteinKernel) {
    const SteinBandwidth xi(params.xi);
    for (const auto& b : descs.front().blocks) xi.check(b.dim());
  } else if (measure == GramMeasure::LeKernel && !(params.xi > 0.0)) {
    throw InvalidArgument("gram: LE kernel bandwidth xi must be positive");
  }
  if (!(params.clamp > 0.0)) throw InvalidArgument("gram: clamp must be positive");
}

}  // namespace

Eigen::MatrixXd gram(std::span<const BlockDescriptor> descs, GramMeasure measure, const GramParams& params) {
  check_homogeneous(descs, descs);
  check_params(descs, measure, params);
  const Prepared p = prepare(descs, measure, params);
  return kernels::symmetric_pairwise(descs.size(), entry_function(descs, p, descs, p, measure, params));
}

Eigen::MatrixXd cross_gram(std::span<const BlockDescriptor> rows, std::span<const BlockDescriptor> cols,
                           GramMeasure measure, const GramParams& params) {
  check_homogeneous(rows, cols);
  check_params(rows, measure, params);
  const Prepared pr = prepare(rows, measure, params);
  const Prepared pc = prepare(cols, measure, params);
  return kernels::cross_pairwise(rows.size(), cols.size(), entry_function(rows, pr, cols, pc, measure, params));
}

std::string format_grm1(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols()) throw InvalidArgument("GRM1 holds square matrices only");
  std::string out = "GRM1";
  detail::put_u32(out, static_cast<std::uint32_t>(g.rows()));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) detail::put_f64(out, g(i, j));
  return out;
}

Eigen::MatrixXd parse_grm1(const std::string& bytes) {
  detail::ByteReader in(bytes, "GRM1");
  in.expect_magic("GRM1");
  const std::uint32_t n = in.u32();
  if (in.remaining() / 8 < static_cast<std::uint64_t>(n) * n) throw FormatError("GRM1: truncated payload");
  Eigen::MatrixXd g(n, n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) g(i, j) = in.f64();
  in.expect_end();
  return g;
}

std::string format_matrix_csv(const Eigen::MatrixXd& g, const std::string& header_comment) {
  std::string out = header_comment;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (j) out.push_back(',');
      detail::append_double(out, g(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

Eigen::MatrixXd parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  const auto all = detail::lines(text);
  for (std::size_t li = 0; li < all.size(); ++li) {
    const auto line = detail::trim(all[li]);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line, ',');
    if (!rows.empty() && cells.size() != rows.front().size())
      throw FormatError("ragged matrix row", li + 1, std::min(cells.size(), rows.front().size()) + 1);
    std::vector<double> r;
    for (std::size_t c = 0; c < cells.size(); ++c) r.push_back(detail::parse_cell(cells[c], li + 1, c + 1));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw FormatError("matrix CSV has no rows");
  Eigen::MatrixXd g(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) g(i, j) = rows[i][j];
  return g;
}

void save_matrix(const Eigen::MatrixXd& g, const std::filesystem::path& path, const std::string& header_comment) {
  detail::write_file(path, path.extension() == ".csv" ? format_matrix_csv(g, header_comment) : format_grm1(g));
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  try {
    return path.extension() == ".csv" ? parse_matrix_csv(bytes) : parse_grm1(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace spdpool
