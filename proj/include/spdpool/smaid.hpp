#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spdpool {

/// Grayscale frame, height-by-width, real pixel values in [0, 255].
struct GrayFrame {
  Eigen::MatrixXd pixels;

  Eigen::Index width() const noexcept { return pixels.cols(); }
  Eigen::Index height() const noexcept { return pixels.rows(); }
};

/// 8-bit RGB frame, interleaved row-major.
struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  std::uint8_t at(int x, int y, int channel) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + channel]; }
};

struct SmaidConfig {
  int zeta = 15;  // frames per channel
  int beta = 3;   // channels
  int tau = 0;    // frames skipped before the first window

  /// 3 channels of 15 frames.
  static SmaidConfig long_window() { return {15, 3, 0}; }
  /// 3 channels of 7 frames.
  static SmaidConfig short_window() { return {7, 3, 0}; }
};

/// Channels in temporal order: channel 0 summarizes the earliest window.
struct SmaidImage {
  std::vector<Eigen::MatrixXd> channels;
  SmaidConfig config;
};

/// Inclusive pixel box.
struct BoundingBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool operator==(const BoundingBox&) const = default;
};

/// 0.299 R + 0.587 G + 0.114 B.
GrayFrame to_gray(const RgbFrame& rgb);

/// Mean absolute difference of frames[tau] .. frames[tau + zeta - 1] (0-based).
Eigen::MatrixXd maid(const std::vector<GrayFrame>& frames, int tau, int zeta);

/// beta MAID images over consecutive non-overlapping windows of zeta frames.
SmaidImage smaid(const std::vector<GrayFrame>& frames, const SmaidConfig& config);

struct LocalizeParams {
  double diff_threshold = 12.0;  // on the 0-255 scale
  int dilate_radius = 1;
  int dilate_iters = 2;
  int min_component_area = 16;
};

/// Action window: per consecutive frame pair the thresholded absolute
/// difference is smoothed (3x3 box blur, any support kept), dilated, and split
/// into 8-connected components; components of sufficient area are united
/// over all pairs and the tight box around them is returned. Falls back to
/// the full frame when nothing survives.
BoundingBox localize(const std::vector<GrayFrame>& frames, const LocalizeParams& params = {});

// ---------------------------------------------------------------------------
// Binary PNM (P5 grayscale, P6 RGB), maxval 255.

struct PnmImage {
  int width = 0;
  int height = 0;
  int channels = 1;               // 1 for P5, 3 for P6
  std::vector<std::uint8_t> data;  // interleaved, row-major
};

PnmImage parse_pnm(const std::string& bytes);
std::string format_pnm(const PnmImage& image);
PnmImage read_pnm(const std::filesystem::path& path);
void write_pnm(const PnmImage& image, const std::filesystem::path& path);

/// Round half-up to 8 bits, clamped to [0, 255].
std::uint8_t quantize(double value);

GrayFrame gray_from_pnm(const PnmImage& image);
PnmImage pnm_from_gray(const Eigen::MatrixXd& pixels);

/// Frames of a directory of .pgm/.ppm files in lexicographic order; RGB
/// frames are converted to gray.
std::vector<GrayFrame> read_frame_directory(const std::filesystem::path& dir);

/// beta = 3 is written as one P6 file with channel 1 in red; other channel
/// counts as <stem>_c<k>.pgm files next to `path`. Returns the written paths.
std::vector<std::filesystem::path> export_smaid(const SmaidImage& image, const std::filesystem::path& path);

}  // namespace spdpool
