#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "liff/lightfield_io.hpp"
#include "test_util.hpp"

using namespace liff;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("liff_lfcore_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

LightField colour_lf(LightFieldDims dims, double r, double g, double b) {
  LightField lf(dims, 3);
  auto x = lf.samples();
  for (std::size_t i = 0; i < x.size(); i += 3) {
    x[i] = r;
    x[i + 1] = g;
    x[i + 2] = b;
  }
  return lf;
}

}  // namespace

TEST(Grayscale, ConstantColourGivesConstantGray) {
  const LightField g = to_grayscale(colour_lf({3, 3, 8, 8}, 0.5, 0.5, 0.5));
  ASSERT_TRUE(g.is_grayscale());
  const double first = g.samples()[0];
  for (double x : g.samples()) EXPECT_EQ(x, first);
}

TEST(Grayscale, PureGreenLuminanceAndGamma) {
  EXPECT_NEAR(luminance(0.0, 1.0, 0.0), 0.587, 1e-12);
  EXPECT_NEAR(std::pow(luminance(0.0, 1.0, 0.0), grayscale::kGamma), 0.766, 5e-4);
}

TEST(Grayscale, EqualizedRampIsUniform) {
  std::vector<double> ramp(256 * 40);
  for (std::size_t i = 0; i < ramp.size(); ++i)
    ramp[i] = static_cast<double>(i) / (ramp.size() - 1);
  equalize_histogram(ramp);
  std::array<int, 8> hist{};
  for (double x : ramp) ++hist[std::min(7, static_cast<int>(x * 8))];
  for (int h : hist) EXPECT_NEAR(h, ramp.size() / 8.0, 256 * 40 / 256.0 + 1);
}

TEST(Grayscale, KeepsDimsAndRange) {
  LightField c({3, 3, 10, 12}, 3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& x : c.samples()) x = unit(rng);
  const LightField g = to_grayscale(c);
  EXPECT_EQ(g.channels(), 1);
  EXPECT_EQ(g.dims(), c.dims());
  EXPECT_TRUE(samples_in_unit_range(g));
}

TEST(CenterView, PicksMiddleView) {
  LightField lf({9, 9, 4, 4}, 1);
  lf(4, 4, 1, 2) = 0.7;
  EXPECT_EQ(center_view(lf)(1, 2), 0.7);
  LightField lf11({11, 11, 4, 4}, 1);
  lf11(5, 5, 0, 0) = 0.3;
  EXPECT_EQ(center_view(lf11)(0, 0), 0.3);
}

TEST(CenterView, EvenGridThrows) {
  EXPECT_THROW(center_view(LightField({8, 8, 4, 4}, 1)), Error);
}

TEST(ExtractCenterViews, CropsAroundCentre) {
  LightField lf({15, 15, 2, 2}, 1);
  for (int s = 0; s < 15; ++s)
    for (int t = 0; t < 15; ++t) lf(s, t, 0, 0) = s * 100 + t;
  const LightField k = extract_center_views(lf, 11);
  EXPECT_EQ(k.dims().ns, 11);
  EXPECT_EQ(k(0, 0, 0, 0), 2 * 100 + 2);
  EXPECT_EQ(k(10, 10, 0, 0), 12 * 100 + 12);
}

TEST(ExtractCenterViews, FullSizeIsIdentity) {
  const LightField lf = fixtures::random_lf({5, 5, 6, 7}, 1);
  EXPECT_EQ(extract_center_views(lf, 5), lf);
}

TEST(ExtractCenterViews, RejectsBadK) {
  const LightField lf({11, 11, 2, 2}, 1);
  EXPECT_THROW(extract_center_views(lf, 13), Error);
  EXPECT_THROW(extract_center_views(lf, 4), Error);
}

TEST(PackedFormat, RoundTripIsBitExact) {
  const fs::path dir = scratch_dir("packed");
  const LightField lf = fixtures::random_lf({3, 5, 41, 37}, 7);
  save_packed(lf, dir / "a.lf");
  const LightField back = load_packed(dir / "a.lf");
  EXPECT_EQ(back.dims(), (LightFieldDims{3, 5, 41, 37}));
  EXPECT_EQ(back, lf);
}

TEST(PackedFormat, ColourRoundTrip) {
  const fs::path dir = scratch_dir("packed_rgb");
  const LightField lf = colour_lf({3, 3, 5, 6}, 0.1, 0.2, 0.3);
  save_packed(lf, dir / "c.lf");
  EXPECT_EQ(load_lightfield(dir / "c.lf"), lf);
}

TEST(PackedFormat, BadMagicIsInputError) {
  const fs::path dir = scratch_dir("bad_magic");
  std::ofstream(dir / "x.lf") << "NOPE and some bytes";
  try {
    load_packed(dir / "x.lf");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(ViewGrid, RoundTripWithinQuantization) {
  const fs::path dir = scratch_dir("grid");
  const LightField lf = fixtures::random_lf({3, 3, 20, 24}, 3);
  save_view_grid(lf, dir);
  EXPECT_TRUE(fs::exists(dir / "meta.json"));
  EXPECT_TRUE(fs::exists(dir / "view_0_2.png"));
  const LightField back = load_lightfield(dir);
  ASSERT_EQ(back.dims(), lf.dims());
  for (std::size_t i = 0; i < lf.samples().size(); ++i)
    EXPECT_NEAR(back.samples()[i], lf.samples()[i], 0.5 / 65535 + 1e-12);
}

TEST(ViewGrid, InconsistentViewSizeIsRejected) {
  const fs::path dir = scratch_dir("grid_bad");
  save_view_grid(fixtures::random_lf({3, 3, 16, 16}, 3), dir);
  save_image_png(fixtures::random_image(15, 16, 1), dir / "view_1_1.png");
  EXPECT_THROW(load_lightfield(dir), Error);
}

TEST(ViewGrid, MissingMetaIsInvalidLightField) {
  const fs::path dir = scratch_dir("grid_empty");
  try {
    load_lightfield(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
    EXPECT_NE(std::string(e.what()).find("invalid light field"), std::string::npos);
  }
}
