#include <algorithm>
#include <cmath>
#include <vector>

#include "spdpool/error.hpp"
#include "spdpool/smaid.hpp"

namespace spdpool {

namespace {

using Mask = std::vector<std::uint8_t>;

struct Grid {
  int w, h;
  std::size_t at(int x, int y) const { return static_cast<std::size_t>(y) * w + x; }
};

// Sets every pixel whose (2r+1)x(2r+1) neighbourhood contains a set pixel.
Mask grow(const Mask& in, const Grid& g, int r) {
  // Separable: horizontal pass then vertical pass.
  Mask row(in.size(), 0), out(in.size(), 0);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) {
      if (!in[g.at(x, y)]) continue;
      for (int xx = std::max(0, x - r); xx <= std::min(g.w - 1, x + r); ++xx) row[g.at(xx, y)] = 1;
    }
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) {
      if (!row[g.at(x, y)]) continue;
      for (int yy = std::max(0, y - r); yy <= std::min(g.h - 1, y + r); ++yy) out[g.at(x, yy)] = 1;
    }
  return out;
}

struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty = true;

  void add(int x, int y) {
    if (empty) {
      x0 = x1 = x;
      y0 = y1 = y;
      empty = false;
      return;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }

  void add(const Box& o) {
    if (o.empty) return;
    add(o.x0, o.y0);
    add(o.x1, o.y1);
  }
};

// Bounding box of the union of 8-connected components with area >= min_area.
Box surviving_components(const Mask& mask, const Grid& g, int min_area) {
  std::vector<int> label(mask.size(), 0);
  std::vector<std::pair<int, int>> stack;
  Box total;
  int next = 0;
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) {
      if (!mask[g.at(x, y)] || label[g.at(x, y)]) continue;
      ++next;
      Box box;
      int area = 0;
      stack.assign(1, {x, y});
      label[g.at(x, y)] = next;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++area;
        box.add(cx, cy);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= g.w || ny >= g.h) continue;
            const auto i = g.at(nx, ny);
            if (mask[i] && !label[i]) {
              label[i] = next;
              stack.emplace_back(nx, ny);
            }
          }
      }
      if (area >= min_area) total.add(box);
    }
  return total;
}

}  // namespace

BoundingBox localize(const std::vector<GrayFrame>& frames, const LocalizeParams& params) {
  if (frames.size() < 2) throw InvalidArgument("localize: need at least two frames");
  if (params.dilate_radius < 0 || params.dilate_iters < 0 || params.min_component_area < 1)
    throw InvalidArgument("localize: need dilate_radius >= 0, dilate_iters >= 0 and min_component_area >= 1");
  if (!(params.diff_threshold > 0.0)) throw InvalidArgument("localize: diff_threshold must be positive");
  const Grid g{static_cast<int>(frames[0].width()), static_cast<int>(frames[0].height())};
  if (g.w < 1 || g.h < 1) throw InvalidArgument("localize: empty frame");
  for (std::size_t k = 1; k < frames.size(); ++k)
    if (frames[k].width() != g.w || frames[k].height() != g.h)
      throw InvalidArgument("localize: frame " + std::to_string(k) + " differs in size from frame 0");

  Box total;
  Mask mask(static_cast<std::size_t>(g.w) * g.h);
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const auto& a = frames[k].pixels;
    const auto& b = frames[k + 1].pixels;
    for (int y = 0; y < g.h; ++y)
      for (int x = 0; x < g.w; ++x) mask[g.at(x, y)] = std::abs(b(y, x) - a(y, x)) >= params.diff_threshold;
    // 3x3 box blur re-binarized at any support.
    Mask m = grow(mask, g, 1);
    for (int i = 0; i < params.dilate_iters; ++i) m = grow(m, g, params.dilate_radius);
    total.add(surviving_components(m, g, params.min_component_area));
  }
  if (total.empty) return {0, 0, g.w - 1, g.h - 1};
  return {total.x0, total.y0, total.x1, total.y1};
}

}  // namespace spdpool
