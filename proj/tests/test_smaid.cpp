#include <doctest.h>

#include <algorithm>
#include <cstdio>

#include "spdpool/error.hpp"
#include "spdpool/smaid.hpp"
#include "support.hpp"

using namespace spdpool;
namespace st = spdpool::testing;

namespace {

std::vector<GrayFrame> scalar_clip(std::initializer_list<double> values) {
  std::vector<GrayFrame> out;
  for (double v : values) out.push_back({Eigen::MatrixXd::Constant(1, 1, v)});
  return out;
}

std::vector<GrayFrame> random_clip(int count, int h, int w, Rng& rng) {
  std::vector<GrayFrame> out;
  for (int k = 0; k < count; ++k) out.push_back({st::random_matrix(h, w, rng, 0, 255)});
  return out;
}

// Square of side `side` with its top-left corner at (x, y) on a dark frame.
GrayFrame square_frame(int w, int h, int x, int y, int side) {
  GrayFrame f{Eigen::MatrixXd::Zero(h, w)};
  f.pixels.block(y, x, side, side).setConstant(200.0);
  return f;
}

}  // namespace

TEST_CASE("maid by hand") {
  CHECK(maid(scalar_clip({0, 10, 30}), 0, 3)(0, 0) == 15.0);
  CHECK(maid(scalar_clip({5, 0, 10, 30}), 1, 3)(0, 0) == 15.0);
  CHECK(maid(scalar_clip({7, 7, 7, 7}), 0, 4)(0, 0) == 0.0);
  CHECK_THROWS_AS(maid(scalar_clip({1, 2}), 0, 3), InvalidArgument);
  CHECK_THROWS_AS(maid(scalar_clip({1, 2}), 0, 1), InvalidArgument);
}

TEST_CASE("maid is reversal invariant and zero on constant clips") {
  Rng rng(1);
  auto clip = random_clip(9, 5, 6, rng);
  const auto forward = maid(clip, 0, 9);
  std::reverse(clip.begin(), clip.end());
  CHECK((maid(clip, 0, 9) - forward).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<GrayFrame> still(5, clip[0]);
  CHECK(maid(still, 0, 5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smaid channel layout") {
  const auto img = smaid(scalar_clip({0, 10, 10, 40, 40, 0}), {2, 3, 0});
  REQUIRE(img.channels.size() == 3u);
  CHECK(img.channels[0](0, 0) == 10.0);
  CHECK(img.channels[1](0, 0) == 30.0);
  CHECK(img.channels[2](0, 0) == 40.0);

  CHECK(SmaidConfig::long_window().zeta == 15);
  CHECK(SmaidConfig::short_window().zeta == 7);
  CHECK(SmaidConfig::long_window().beta == 3);
  CHECK_THROWS_AS(smaid(scalar_clip({0, 1, 2, 3, 4}), {2, 3, 0}), InvalidArgument);

  auto mixed = scalar_clip({0, 1, 2, 3});
  mixed[3] = GrayFrame{Eigen::MatrixXd::Zero(2, 2)};
  CHECK_THROWS_AS(smaid(mixed, {2, 2, 0}), InvalidArgument);
}

TEST_CASE("grayscale conversion") {
  const RgbFrame rgb{2, 1, {255, 0, 0, 10, 20, 30}};
  const auto g = to_gray(rgb);
  CHECK(g.pixels(0, 0) == doctest::Approx(0.299 * 255));
  CHECK(g.pixels(0, 1) == doctest::Approx(0.299 * 10 + 0.587 * 20 + 0.114 * 30));
  CHECK_THROWS_AS(to_gray(RgbFrame{2, 2, {1, 2, 3}}), InvalidArgument);
}

TEST_CASE("quantize rounds half up and clamps") {
  CHECK(quantize(2.5) == 3);
  CHECK(quantize(2.4999) == 2);
  CHECK(quantize(-4.0) == 0);
  CHECK(quantize(300.0) == 255);
  CHECK(quantize(254.5) == 255);
}

TEST_CASE("PNM parsing and formatting") {
  Rng rng(2);
  for (int channels : {1, 3}) {
    PnmImage img{7, 5, channels, {}};
    for (int i = 0; i < 7 * 5 * channels; ++i) img.data.push_back(static_cast<std::uint8_t>(rng.below(256)));
    const auto back = parse_pnm(format_pnm(img));
    CHECK(back.width == 7);
    CHECK(back.height == 5);
    CHECK(back.channels == channels);
    CHECK(back.data == img.data);
  }
  const std::string with_comment = std::string("P5\n# made by hand\n2 1\n255\n") + '\x01' + '\xff';
  const auto c = parse_pnm(with_comment);
  CHECK(c.data == std::vector<std::uint8_t>{1, 255});

  CHECK_THROWS_AS(parse_pnm("P5\n2 1\n65535\n\x01\x02\x03\x04"), FormatError);
  CHECK_THROWS_AS(parse_pnm("P5\n2 2\n255\n\x01"), FormatError);
  CHECK_THROWS_AS(parse_pnm("P2\n1 1\n255\n7\n"), FormatError);
  CHECK_THROWS_AS(parse_pnm("P5\n2\n"), FormatError);
}

TEST_CASE("SMAID export") {
  st::TempDir dir("smaid");
  Rng rng(3);
  const auto clip = random_clip(6, 4, 3, rng);

  SUBCASE("three channels become one P6 with the earliest window in red") {
    const auto img = smaid(clip, {2, 3, 0});
    const auto paths = export_smaid(img, dir / "s.ppm");
    REQUIRE(paths.size() == 1u);
    const auto back = read_pnm(paths[0]);
    CHECK(back.channels == 3);
    CHECK(back.width == 3);
    CHECK(back.height == 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 3; ++x)
        for (int ch = 0; ch < 3; ++ch)
          CHECK(back.data[(static_cast<std::size_t>(y) * 3 + x) * 3 + ch] == quantize(img.channels[ch](y, x)));
  }
  SUBCASE("other channel counts become numbered P5 files") {
    const auto img = smaid(clip, {3, 2, 0});
    const auto paths = export_smaid(img, dir / "s.ppm");
    REQUIRE(paths.size() == 2u);
    CHECK(paths[0].filename() == "s_c1.pgm");
    CHECK(paths[1].filename() == "s_c2.pgm");
    const auto second = read_pnm(paths[1]);
    CHECK(second.channels == 1);
    CHECK(second.data[0] == quantize(img.channels[1](0, 0)));
  }
}

TEST_CASE("frame directories are read in lexicographic order") {
  st::TempDir dir("frames");
  for (int k : {2, 0, 1}) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.pgm", k);
    write_pnm(pnm_from_gray(Eigen::MatrixXd::Constant(2, 2, 10.0 * k)), dir / name);
  }
  // RGB frames are converted on the way in.
  write_pnm(PnmImage{2, 2, 3, std::vector<std::uint8_t>(12, 30)}, dir / "frame_003.ppm");
  std::FILE* f = std::fopen((dir / "notes.txt").c_str(), "w");
  std::fputs("ignored", f);
  std::fclose(f);

  const auto frames = read_frame_directory(dir.path());
  REQUIRE(frames.size() == 4u);
  CHECK(frames[0].pixels(0, 0) == 0.0);
  CHECK(frames[1].pixels(0, 0) == 10.0);
  CHECK(frames[2].pixels(0, 0) == 20.0);
  CHECK(frames[3].pixels(0, 0) == doctest::Approx(30.0));
  CHECK_THROWS_AS(read_frame_directory(dir / "nope"), IoError);
}

TEST_CASE("localize a moving square") {
  const int w = 48, h = 32, side = 5;
  std::vector<GrayFrame> clip;
  for (int k = 0; k < 8; ++k) clip.push_back(square_frame(w, h, 10 + 3 * k, 12 + k, side));

  // Oracle: the box around every pixel whose value changes between two
  // consecutive frames by at least the threshold.
  const LocalizeParams params;
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (std::size_t k = 0; k + 1 < clip.size(); ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (std::abs(clip[k + 1].pixels(y, x) - clip[k].pixels(y, x)) >= params.diff_threshold) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
  const int margin = 1 + params.dilate_radius * params.dilate_iters;
  const auto box = localize(clip, params);
  CHECK(box.x0 == std::max(0, x0 - margin));
  CHECK(box.y0 == std::max(0, y0 - margin));
  CHECK(box.x1 == std::min(w - 1, x1 + margin));
  CHECK(box.y1 == std::min(h - 1, y1 + margin));
}

TEST_CASE("localize falls back to the full frame and drops small blobs") {
  const std::vector<GrayFrame> still(5, square_frame(20, 10, 3, 3, 4));
  CHECK(localize(still) == BoundingBox{0, 0, 19, 9});

  std::vector<GrayFrame> flicker;
  for (int k = 0; k < 4; ++k) {
    GrayFrame f = square_frame(40, 30, 5 + 2 * k, 5, 6);
    f.pixels(28, 38) = (k % 2) ? 255.0 : 0.0;  // isolated flickering pixel
    flicker.push_back(f);
  }
  LocalizeParams strict;
  strict.min_component_area = 60;  // a dilated single pixel covers 7x7 = 49
  const auto box = localize(flicker, strict);
  CHECK(box.x1 < 30);
  CHECK(box.y1 < 20);
  const auto loose = localize(flicker);
  CHECK(loose.x1 == 39);

  CHECK_THROWS_AS(localize(std::vector<GrayFrame>(1, still[0])), InvalidArgument);
}
