#include <algorithm>

#include "binary_io.hpp"
#include "csv_util.hpp"
#include "spdpool/error.hpp"
#include "spdpool/trajectory.hpp"

namespace spdpool {

namespace fs = std::filesystem;

TrajectoryFormat format_from_path(const fs::path& path) {
  return path.extension() == ".csv" ? TrajectoryFormat::Csv : TrajectoryFormat::TrjBinary;
}

namespace {

struct CsvHeader {
  int d = 0;
  TrajectoryKind kind = TrajectoryKind::Features;
};

CsvHeader parse_header(std::string_view body, std::size_t row) {
  CsvHeader h;
  bool saw_d = false;
  for (auto token : detail::split(detail::trim(body), ' ')) {
    token = detail::trim(token);
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) throw FormatError("malformed header token '" + std::string(token) + "'", row, 1);
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "d") {
      h.d = detail::parse_int(value, "header d");
      if (h.d < 1) throw FormatError("header d must be positive", row, 1);
      saw_d = true;
    } else if (key == "kind") {
      if (value == "scores")
        h.kind = TrajectoryKind::Scores;
      else if (value == "features")
        h.kind = TrajectoryKind::Features;
      else
        throw FormatError("header kind must be scores or features, got '" + std::string(value) + "'", row, 1);
    } else {
      throw FormatError("unknown header key '" + std::string(key) + "'", row, 1);
    }
  }
  if (!saw_d) throw FormatError("header is missing d=<int>", row, 1);
  return h;
}

bool is_header_line(std::string_view line) {
  line = detail::trim(line);
  if (line.empty() || line.front() != '#') return false;
  line = detail::trim(line.substr(1));
  return line.starts_with("d=");
}

}  // namespace

FeatureTrajectory parse_trajectory_csv(const std::string& text, const std::string& sequence_id) {
  const auto all = detail::lines(text);
  CsvHeader header;
  bool have_header = false;
  std::vector<std::vector<double>> frames;
  std::size_t width = 0;
  for (std::size_t li = 0; li < all.size(); ++li) {
    const std::size_t row = li + 1;
    const auto line = detail::trim(all[li]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (is_header_line(line)) {
        if (have_header || !frames.empty()) throw FormatError("header must precede all frame rows", row, 1);
        header = parse_header(detail::trim(line.substr(1)), row);
        have_header = true;
        width = static_cast<std::size_t>(header.d);
      }
      continue;
    }
    const auto cells = detail::split(line, ',');
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw FormatError("ragged row: " + std::to_string(cells.size()) + " cells where " + std::to_string(width) +
                            " expected",
                        row, std::min(cells.size(), width) + 1);
    std::vector<double> frame(width);
    for (std::size_t c = 0; c < width; ++c) frame[c] = detail::parse_cell(cells[c], row, c + 1);
    frames.push_back(std::move(frame));
  }
  if (frames.empty()) throw FormatError("trajectory CSV has no frame rows");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i)
    for (std::size_t m = 0; m < width; ++m) values(m, i) = frames[i][m];
  return FeatureTrajectory(std::move(values), header.kind, sequence_id);
}

std::string format_trajectory_csv(const FeatureTrajectory& t) {
  const auto& v = t.values();
  std::string out = "# d=" + std::to_string(v.rows()) +
                    (t.kind() == TrajectoryKind::Scores ? " kind=scores\n" : " kind=features\n");
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    for (Eigen::Index m = 0; m < v.rows(); ++m) {
      if (m) out.push_back(',');
      detail::append_double(out, v(m, i));
    }
    out.push_back('\n');
  }
  return out;
}

FeatureTrajectory parse_trajectory_trj(const std::string& bytes, const std::string& sequence_id) {
  detail::ByteReader in(bytes, "TRJ1");
  in.expect_magic("TRJ1");
  const std::uint32_t d = in.u32();
  const std::uint32_t n = in.u32();
  const std::uint8_t kind = in.u8();
  if (d == 0 || n == 0) throw FormatError("TRJ1: zero dimension");
  if (kind > 1) throw FormatError("TRJ1: kind byte must be 0 or 1, got " + std::to_string(kind));
  if (in.remaining() / 8 < static_cast<std::uint64_t>(d) * n) throw FormatError("TRJ1: truncated payload");
  Eigen::MatrixXd values(d, n);
  for (std::uint32_t m = 0; m < d; ++m)
    for (std::uint32_t i = 0; i < n; ++i) {
      values(m, i) = in.f64();
      if (!std::isfinite(values(m, i))) throw FormatError("TRJ1: non-finite value", m + 1, i + 1);
    }
  in.expect_end();
  return FeatureTrajectory(std::move(values), static_cast<TrajectoryKind>(kind), sequence_id);
}

std::string format_trajectory_trj(const FeatureTrajectory& t) {
  const auto& v = t.values();
  std::string out = "TRJ1";
  out.reserve(13 + 8 * static_cast<std::size_t>(v.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(v.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(v.cols()));
  out.push_back(static_cast<char>(t.kind()));
  for (Eigen::Index m = 0; m < v.rows(); ++m)
    for (Eigen::Index i = 0; i < v.cols(); ++i) detail::put_f64(out, v(m, i));
  return out;
}

FeatureTrajectory load_trajectory(const fs::path& path, TrajectoryFormat format) {
  const std::string bytes = detail::read_file(path);
  const std::string id = path.stem().string();
  try {
    return format == TrajectoryFormat::Csv ? parse_trajectory_csv(bytes, id) : parse_trajectory_trj(bytes, id);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_trajectory(const FeatureTrajectory& t, const fs::path& path, TrajectoryFormat format) {
  detail::write_file(path, format == TrajectoryFormat::Csv ? format_trajectory_csv(t) : format_trajectory_trj(t));
}

std::vector<LabelEntry> load_labels(const fs::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<LabelEntry> out;
  const auto all = detail::lines(text);
  for (std::size_t li = 0; li < all.size(); ++li) {
    const auto line = detail::trim(all[li]);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 2) throw FormatError(path.string() + ": labels need 'sequence_id,label'", li + 1, 1);
    out.push_back({std::string(detail::trim(cells[0])), detail::parse_int(cells[1], "label")});
  }
  return out;
}

void save_labels(const std::vector<LabelEntry>& labels, const fs::path& path, const std::string& header_comment) {
  std::string out = header_comment;
  for (const auto& l : labels) out += l.sequence_id + "," + std::to_string(l.label) + "\n";
  detail::write_file(path, out);
}

Dataset load_dataset(const fs::path& dir, int num_classes) {
  const auto labels = load_labels(dir / "labels.csv");
  Dataset data;
  data.provenance = dir.string();
  int max_label = 0;
  for (const auto& entry : labels) {
    fs::path file = dir / (entry.sequence_id + ".trj");
    TrajectoryFormat format = TrajectoryFormat::TrjBinary;
    if (!fs::exists(file)) {
      file = dir / (entry.sequence_id + ".csv");
      format = TrajectoryFormat::Csv;
    }
    if (!fs::exists(file)) throw IoError("no trajectory file for sequence '" + entry.sequence_id + "' in " + dir.string());
    data.records.push_back({load_trajectory(file, format), entry.label});
    max_label = std::max(max_label, entry.label);
  }
  data.num_classes = num_classes > 0 ? num_classes : max_label;
  data.validate();
  return data;
}

void save_dataset(const Dataset& data, const fs::path& dir, const std::string& header_comment) {
  data.validate();
  fs::create_directories(dir);
  std::vector<LabelEntry> labels;
  for (const auto& r : data.records) {
    const auto& id = r.trajectory.sequence_id();
    if (id.empty()) throw InvalidArgument("dataset records need sequence ids to be saved");
    save_trajectory(r.trajectory, dir / (id + ".trj"), TrajectoryFormat::TrjBinary);
    labels.push_back({id, r.label});
  }
  save_labels(labels, dir / "labels.csv", header_comment);
}

}  // namespace spdpool
