#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace liff;

namespace {

constexpr double kPi = std::numbers::pi;

// Three slopes, one octave of three DoG levels, each 7x7, filled by fn.
template <typename Fn>
ScaleSlopeSpace synthetic_space(Fn fn) {
  ScaleSlopeSpace space;
  space.slopes = {-0.5, 0.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    DoGPyramid pyr;
    Octave oct;
    oct.index = 0;
    for (int l = 0; l < 4; ++l) oct.gaussians.emplace_back(7, 7, 0.0);
    for (int l = 0; l < 3; ++l) {
      Image d(7, 7);
      for (int u = 0; u < 7; ++u)
        for (int v = 0; v < 7; ++v) d(u, v) = fn(u - 3, v - 3, l - 1, i - 1);
      oct.dogs.push_back(d);
    }
    pyr.octaves.push_back(oct);
    space.per_slope.push_back(pyr);
  }
  return space;
}

const RawDetection kCentre{0, 1, 1, 3, 3};

Image rotate90(const Image& img) {
  const int n = img.nu();
  Image out(img.nv(), n);
  for (int u = 0; u < out.nu(); ++u)
    for (int v = 0; v < out.nv(); ++v) out(u, v) = img(v, n - 1 - u);
  return out;
}

double angle_gap(double a, double b) {
  const double d = wrap_two_pi(a - b);
  return std::min(d, 2 * kPi - d);
}

LightField disk_lf(LightFieldDims dims, double u, double v, double r, double slope) {
  return render_lf(fixtures::single_disk_scene(dims, u, v, r, slope));
}

}  // namespace

TEST(FindExtrema, ConstantLightFieldHasNone) {
  const LightField lf({5, 5, 32, 32}, 1, 0.4);
  DetectorParams p;
  p.slopes = linear_slopes(-1, 1, 5);
  const auto space = build_scale_slope_space(build_focal_stack(lf, p.slopes), p);
  EXPECT_TRUE(find_extrema(space, p.peak_threshold).empty());
  EXPECT_TRUE(detect(lf, p).empty());
}

TEST(FindExtrema, NeedsThreeSlopes) {
  const LightField lf({3, 3, 32, 32}, 1, 0.4);
  DetectorParams p;
  const auto space = build_scale_slope_space(build_focal_stack(lf, {-0.5, 0.5}), p);
  try {
    find_extrema(space, p.peak_threshold);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("need-three-slopes"), std::string::npos);
  }
  p.slopes = {-0.5, 0.5};
  EXPECT_THROW(detect(lf, p), Error);
}

TEST(FindExtrema, StrictMaximumFound) {
  const auto space = synthetic_space(
      [](int u, int v, int l, int s) { return 1.0 - (u * u + v * v + l * l + s * s) * 0.1; });
  const auto raw = find_extrema(space, 0.0066);
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_EQ(raw[0], kCentre);
}

TEST(FindExtrema, TiesAreRejected) {
  const auto space = synthetic_space([](int u, int v, int l, int s) {
    return (u == 0 && v == 0 && l == 0 && s == 0) || (u == 1 && v == 0 && l == 0 && s == 0)
               ? 1.0
               : 0.0;
  });
  EXPECT_TRUE(find_extrema(space, 0.0066).empty());
}

TEST(RefineFeature, SymmetricNeighbourhoodHasZeroOffset) {
  const auto space = synthetic_space(
      [](int u, int v, int l, int s) { return 1.0 - (u * u + v * v + l * l + s * s) * 0.1; });
  const auto kp = refine_feature(space, kCentre, 0.0066);
  ASSERT_TRUE(kp.has_value());
  EXPECT_NEAR(kp->du, 0.0, 1e-12);
  EXPECT_NEAR(kp->dv, 0.0, 1e-12);
  EXPECT_NEAR(kp->dlevel, 0.0, 1e-12);
  EXPECT_NEAR(kp->dslope, 0.0, 1e-12);
  EXPECT_NEAR(kp->response, 1.0, 1e-12);
}

TEST(RefineFeature, RecoversQuadraticPeak) {
  const double pu = 0.3, pv = -0.2, pl = 0.15, ps = -0.35;
  const auto space = synthetic_space([&](int u, int v, int l, int s) {
    return 0.02 - 0.001 * ((u - pu) * (u - pu) + 2 * (v - pv) * (v - pv) +
                           (l - pl) * (l - pl) + 3 * (s - ps) * (s - ps));
  });
  const auto kp = refine_feature(space, kCentre, 0.0066);
  ASSERT_TRUE(kp.has_value());
  EXPECT_NEAR(kp->du, pu, 1e-9);
  EXPECT_NEAR(kp->dv, pv, 1e-9);
  EXPECT_NEAR(kp->dlevel, pl, 1e-9);
  EXPECT_NEAR(kp->dslope, ps, 1e-9);
}

TEST(RefineFeature, BelowThresholdRejected) {
  const auto peak = [](double top) {
    return synthetic_space([top](int u, int v, int l, int s) {
      return top - 0.0001 * (u * u + v * v + l * l + s * s);
    });
  };
  EXPECT_FALSE(refine_feature(peak(0.006), kCentre, 0.0066).has_value());
  EXPECT_TRUE(refine_feature(peak(0.0070), kCentre, 0.0066).has_value());
}

TEST(RefineFeature, SingularHessianRejected) {
  const auto space = synthetic_space([](int u, int v, int, int) {
    return 1.0 - 0.1 * (u * u + v * v);  // flat in level and slope
  });
  EXPECT_FALSE(refine_feature(space, kCentre, 0.0066).has_value());
}

TEST(RejectEdges, IsotropicBlobKept) {
  const auto space =
      synthetic_space([](int u, int v, int, int) { return 1.0 - 0.01 * (u * u + v * v); });
  EXPECT_FALSE(reject_edges(space, kCentre, 10.0));
  EXPECT_FALSE(reject_edges(space, kCentre, 1.5));
}

TEST(RejectEdges, StraightEdgeRejected) {
  const auto space = synthetic_space([](int u, int, int, int) { return 1.0 - 0.01 * u * u; });
  EXPECT_TRUE(reject_edges(space, kCentre, 10.0));
}

TEST(RejectEdges, RatioExactlyAtThresholdRejected) {
  const auto at10 =
      synthetic_space([](int u, int v, int, int) { return 100.0 - (u * u + 10.0 * v * v); });
  EXPECT_TRUE(reject_edges(at10, kCentre, 10.0));
  const auto at9 =
      synthetic_space([](int u, int v, int, int) { return 100.0 - (u * u + 9.0 * v * v); });
  EXPECT_FALSE(reject_edges(at9, kCentre, 10.0));
}

TEST(Orientation, HorizontalRampPointsAlongU) {
  Image ramp(41, 41);
  for (int u = 0; u < 41; ++u)
    for (int v = 0; v < 41; ++v) ramp(u, v) = 0.01 * u;
  const auto th = assign_orientation(ramp, {20, 20, 2.0, 0.0});
  ASSERT_EQ(th.size(), 1u);
  EXPECT_NEAR(angle_gap(th[0], 0.0), 0.0, 1e-9);
}

TEST(Orientation, TwoOrthogonalRampsGiveTwoCopies) {
  Image img(41, 41);
  for (int u = 0; u < 41; ++u)
    for (int v = 0; v < 41; ++v) img(u, v) = 0.01 * std::max(u, v);
  const auto th = assign_orientation(img, {20, 20, 2.0, 0.0});
  ASSERT_EQ(th.size(), 2u);
  const double a = std::min(angle_gap(th[0], 0.0), angle_gap(th[1], 0.0));
  const double b = std::min(angle_gap(th[0], kPi / 2), angle_gap(th[1], kPi / 2));
  EXPECT_LT(a, kPi / 18);
  EXPECT_LT(b, kPi / 18);
}

TEST(Orientation, FlatPatchGivesZero) {
  const auto th = assign_orientation(Image(21, 21, 0.5), {10, 10, 1.5, 0.0});
  ASSERT_EQ(th.size(), 1u);
  EXPECT_EQ(th[0], 0.0);
}

TEST(Orientation, RotatesWithTheImage) {
  const Image img = gaussian_blur(fixtures::random_image(61, 61, 21), 2.0);
  const Image rot = rotate90(img);
  const auto a = assign_orientation(img, {30, 30, 3.0, 0.0});
  const auto b = assign_orientation(rot, {30, 30, 3.0, 0.0});
  ASSERT_FALSE(a.empty());
  double best = 10.0;
  for (double t : b) best = std::min(best, angle_gap(t, a[0] + kPi / 2));
  EXPECT_LE(best, 2 * kPi / 36);
}

TEST(Detect, SingleInFocusDiskGivesOneKeypoint) {
  const LightFieldDims dims{9, 9, 64, 64};
  const double r = 4.0;
  const auto scene = fixtures::single_disk_scene(dims, 32, 31, r, 0.5);
  DetectorParams p;
  const auto features = detect(render_lf(scene), p);
  const auto rep = evaluate(features, scene);
  EXPECT_EQ(rep.keypoints, 1);
  ASSERT_EQ(rep.tp_count, 1);
  const Feature& f = features[rep.assignments[0].first];
  EXPECT_NEAR(f.u, 32.0, 0.5);
  EXPECT_NEAR(f.v, 31.0, 0.5);
  EXPECT_NEAR(f.sigma / (r / std::numbers::sqrt2), 1.0, 0.25);
  EXPECT_NEAR(f.lambda, 0.5, 0.125);
}

TEST(Detect, MidwaySlopeRefinedWithinQuarterStep) {
  const double step = 0.25;
  for (double truth : {0.125, -0.375}) {
    const LightField lf = disk_lf({9, 9, 64, 64}, 32, 32, 4.0, truth);
    const auto features = detect(lf, DetectorParams{});
    ASSERT_FALSE(features.empty());
    EXPECT_NEAR(features.front().lambda, truth, 0.25 * step);
  }
}

TEST(Detect, SlopesStayInsideRange) {
  const auto scene = fixtures::single_disk_scene({9, 9, 64, 64}, 30, 34, 4.5, -0.6);
  const LightField lf = add_noise(render_lf(scene), 1e-3, 3);
  for (const auto& f : detect(lf, DetectorParams{})) {
    EXPECT_GT(f.lambda, -1.0);
    EXPECT_LT(f.lambda, 1.0);
    EXPECT_GT(f.sigma, 0.0);
  }
}

TEST(Detect, IntensityScaleEquivariance) {
  auto scene = fixtures::single_disk_scene({9, 9, 64, 64}, 32, 30, 4.0, 0.25);
  scene.background = 0.2;
  scene.disks[0].intensity = 0.3;
  const LightField lf = add_noise(render_lf(scene), 1e-5, 1);
  LightField doubled = lf;
  for (double& x : doubled.samples()) x *= 2.0;
  DetectorParams p;
  const auto a = detect(lf, p);
  p.peak_threshold *= 2.0;
  const auto b = detect(doubled, p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].u, b[i].u, 1e-9);
    EXPECT_NEAR(a[i].v, b[i].v, 1e-9);
    EXPECT_NEAR(a[i].sigma, b[i].sigma, 1e-9);
    EXPECT_NEAR(a[i].lambda, b[i].lambda, 1e-9);
  }
}

TEST(Detect, TranslationEquivariance) {
  const int du = 8, dv = -4;
  SyntheticScene scene = fixtures::single_disk_scene({9, 9, 96, 96}, 40, 50, 4.0, -0.25);
  scene.disks.push_back(scene.disks[0]);
  scene.disks[1].u = 52;
  scene.disks[1].v = 40;
  scene.disks[1].slope = 0.5;
  SyntheticScene moved = scene;
  for (auto& d : moved.disks) {
    d.u += du;
    d.v += dv;
  }
  const auto a = detect(render_lf(scene), DetectorParams{});
  const auto b = detect(render_lf(moved), DetectorParams{});
  int compared = 0;
  for (const auto& f : a) {
    if (f.sigma > 4.0) continue;
    bool found = false;
    for (const auto& g : b)
      found = found || (std::abs(g.u - f.u - du) < 1e-6 && std::abs(g.v - f.v - dv) < 1e-6 &&
                        std::abs(g.sigma - f.sigma) < 1e-6 &&
                        std::abs(g.lambda - f.lambda) < 1e-6);
    EXPECT_TRUE(found) << "feature at " << f.u << "," << f.v;
    ++compared;
  }
  EXPECT_GE(compared, 2);
}

TEST(Detect, DeterministicAcrossWorkerCounts) {
  const auto scene = fixtures::single_disk_scene({5, 5, 64, 64}, 30, 33, 4.0, 0.5);
  const LightField lf = add_noise(render_lf(scene), 1e-3, 8);
  DetectorParams p;
  const auto a = detect(lf, p, nullptr, 1);
  const auto b = detect(lf, p, nullptr, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].u, b[i].u);
    EXPECT_EQ(a[i].v, b[i].v);
    EXPECT_EQ(a[i].sigma, b[i].sigma);
    EXPECT_EQ(a[i].lambda, b[i].lambda);
    EXPECT_EQ(a[i].theta, b[i].theta);
    EXPECT_EQ(a[i].descriptor, b[i].descriptor);
  }
}

TEST(Detect, OutputSortedByResponse) {
  const LightField lf = add_noise(disk_lf({5, 5, 64, 64}, 32, 32, 4.0, 0.0), 1e-2, 2);
  const auto f = detect(lf, DetectorParams{});
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GE(f[i - 1].response, f[i].response);
}

TEST(Detect, RejectsColourInput) {
  EXPECT_THROW(detect(LightField({3, 3, 32, 32}, 3), DetectorParams{}), Error);
}
