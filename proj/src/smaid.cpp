#include "spdpool/smaid.hpp"

#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"

namespace spdpool {

GrayFrame to_gray(const RgbFrame& rgb) {
  if (rgb.width < 1 || rgb.height < 1 || rgb.data.size() != static_cast<std::size_t>(rgb.width) * rgb.height * 3)
    throw InvalidArgument("to_gray: RGB buffer does not match its dimensions");
  GrayFrame out{Eigen::MatrixXd(rgb.height, rgb.width)};
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x)
      out.pixels(y, x) = 0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2);
  return out;
}

namespace {

void check_frames(const std::vector<GrayFrame>& frames, std::size_t first, std::size_t count) {
  const auto& ref = frames[first].pixels;
  for (std::size_t k = first; k < first + count; ++k)
    if (frames[k].pixels.rows() != ref.rows() || frames[k].pixels.cols() != ref.cols())
      throw InvalidArgument("frame " + std::to_string(k) + " differs in size from frame " + std::to_string(first));
}

}  // namespace

Eigen::MatrixXd maid(const std::vector<GrayFrame>& frames, int tau, int zeta) {
  if (zeta < 2) throw InvalidArgument("maid: zeta must be >= 2");
  if (tau < 0) throw InvalidArgument("maid: tau must be >= 0");
  if (static_cast<std::size_t>(tau) + zeta > frames.size())
    throw InvalidArgument("maid: need " + std::to_string(tau + zeta) + " frames, have " + std::to_string(frames.size()));
  check_frames(frames, tau, zeta);
  std::vector<Eigen::MatrixXd> window;
  window.reserve(zeta);
  for (int j = 0; j < zeta; ++j) window.push_back(frames[tau + j].pixels);
  return kernels::mean_abs_diff(window);
}

SmaidImage smaid(const std::vector<GrayFrame>& frames, const SmaidConfig& config) {
  if (config.beta < 1) throw InvalidArgument("smaid: beta must be >= 1");
  if (config.zeta < 2) throw InvalidArgument("smaid: zeta must be >= 2");
  if (config.tau < 0) throw InvalidArgument("smaid: tau must be >= 0");
  const std::size_t needed = static_cast<std::size_t>(config.tau) + static_cast<std::size_t>(config.beta) * config.zeta;
  if (needed > frames.size())
    throw InvalidArgument("smaid: need " + std::to_string(needed) + " frames, have " + std::to_string(frames.size()));
  check_frames(frames, config.tau, needed - config.tau);
  SmaidImage out;
  out.config = config;
  for (int j = 0; j < config.beta; ++j) out.channels.push_back(maid(frames, config.tau + j * config.zeta, config.zeta));
  return out;
}

}  // namespace spdpool
