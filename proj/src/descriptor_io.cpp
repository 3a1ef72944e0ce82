#include "binary_io.hpp"
#include "spdpool/pooling.hpp"

namespace spdpool {

std::string format_spd1(const BlockDescriptor& desc) {
  std::string out = "SPD1";
  detail::put_u32(out, static_cast<std::uint32_t>(desc.blocks.size()));
  for (const auto& b : desc.blocks) {
    const auto m = b.dim();
    detail::put_u32(out, static_cast<std::uint32_t>(m));
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) detail::put_f64(out, b.matrix(r, c));
  }
  return out;
}

BlockDescriptor parse_spd1(const std::string& bytes) {
  detail::ByteReader in(bytes, "SPD1");
  in.expect_magic("SPD1");
  const std::uint32_t count = in.u32();
  if (count == 0) throw FormatError("SPD1: zero blocks");
  BlockDescriptor out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t m = in.u32();
    if (m == 0) throw FormatError("SPD1: zero-dimensional block");
    if (in.remaining() / 8 < static_cast<std::uint64_t>(m) * (m + 1) / 2) throw FormatError("SPD1: truncated payload");
    Eigen::MatrixXd mat(m, m);
    for (std::uint32_t r = 0; r < m; ++r)
      for (std::uint32_t c = 0; c <= r; ++c) mat(r, c) = mat(c, r) = in.f64();
    out.total_dim += static_cast<int>(m);
    out.blocks.push_back({std::move(mat), 0});
  }
  in.expect_end();
  out.config.block_len = static_cast<int>(out.blocks.front().dim());
  out.config.num_permutations = 1;
  return out;
}

void save_descriptor(const BlockDescriptor& desc, const std::filesystem::path& path) {
  detail::write_file(path, format_spd1(desc));
}

BlockDescriptor load_descriptor(const std::filesystem::path& path) {
  try {
    return parse_spd1(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace spdpool
