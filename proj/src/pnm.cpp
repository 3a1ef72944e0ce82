#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "spdpool/error.hpp"
#include "spdpool/smaid.hpp"

namespace spdpool {

namespace fs = std::filesystem;

namespace {

class HeaderScanner {
 public:
  explicit HeaderScanner(const std::string& bytes) : bytes_(bytes) {}

  int next_int(const char* what) {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') ++pos_;
    if (start == pos_) throw FormatError(std::string("PNM: missing ") + what);
    if (pos_ - start > 9) throw FormatError(std::string("PNM: ") + what + " too large");
    return std::stoi(bytes_.substr(start, pos_ - start));
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw FormatError("PNM: missing whitespace before raster");
    return pos_ + 1;
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

PnmImage parse_pnm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw FormatError("PNM: unsupported magic (only binary P5 and P6 are read)");
  PnmImage img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  HeaderScanner scan(bytes);
  img.width = scan.next_int("width");
  img.height = scan.next_int("height");
  const int maxval = scan.next_int("maxval");
  if (maxval != 255) throw FormatError("PNM: unsupported maxval " + std::to_string(maxval) + " (only 255)");
  if (img.width < 1 || img.height < 1) throw FormatError("PNM: zero image dimension");
  const std::size_t start = scan.raster_start();
  const std::size_t size = static_cast<std::size_t>(img.width) * img.height * img.channels;
  if (bytes.size() < start + size)
    throw FormatError("PNM: truncated payload, expected " + std::to_string(size) + " bytes, found " +
                      std::to_string(bytes.size() - std::min(bytes.size(), start)));
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                  bytes.begin() + static_cast<std::ptrdiff_t>(start + size));
  return img;
}

std::string format_pnm(const PnmImage& image) {
  if (image.channels != 1 && image.channels != 3) throw InvalidArgument("PNM: channels must be 1 or 3");
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels)
    throw InvalidArgument("PNM: pixel buffer does not match its dimensions");
  std::string out = (image.channels == 1 ? "P5\n" : "P6\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(image.data.begin(), image.data.end());
  return out;
}

PnmImage read_pnm(const fs::path& path) {
  try {
    return parse_pnm(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pnm(const PnmImage& image, const fs::path& path) { detail::write_file(path, format_pnm(image)); }

std::uint8_t quantize(double value) {
  const double r = std::floor(value + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

GrayFrame gray_from_pnm(const PnmImage& image) {
  if (image.channels == 3) {
    RgbFrame rgb{image.width, image.height, image.data};
    return to_gray(rgb);
  }
  GrayFrame out{Eigen::MatrixXd(image.height, image.width)};
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) out.pixels(y, x) = image.data[static_cast<std::size_t>(y) * image.width + x];
  return out;
}

PnmImage pnm_from_gray(const Eigen::MatrixXd& pixels) {
  PnmImage img;
  img.width = static_cast<int>(pixels.cols());
  img.height = static_cast<int>(pixels.rows());
  img.channels = 1;
  img.data.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.data[static_cast<std::size_t>(y) * img.width + x] = quantize(pixels(y, x));
  return img;
}

std::vector<GrayFrame> read_frame_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm" || ext == ".pnm")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  std::vector<GrayFrame> frames;
  for (const auto& f : files) frames.push_back(gray_from_pnm(read_pnm(f)));
  if (frames.empty()) throw IoError("no PNM frames in '" + dir.string() + "'");
  return frames;
}

std::vector<fs::path> export_smaid(const SmaidImage& image, const fs::path& path) {
  if (image.channels.empty()) throw InvalidArgument("export_smaid: image has no channels");
  if (image.channels.size() == 3) {
    const auto& ch = image.channels;
    PnmImage img;
    img.width = static_cast<int>(ch[0].cols());
    img.height = static_cast<int>(ch[0].rows());
    img.channels = 3;
    img.data.reserve(static_cast<std::size_t>(img.width) * img.height * 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < 3; ++c) img.data.push_back(quantize(ch[c](y, x)));
    write_pnm(img, path);
    return {path};
  }
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < image.channels.size(); ++k) {
    fs::path p = path.parent_path() / (path.stem().string() + "_c" + std::to_string(k + 1) + ".pgm");
    write_pnm(pnm_from_gray(image.channels[k]), p);
    written.push_back(p);
  }
  return written;
}

}  // namespace spdpool
