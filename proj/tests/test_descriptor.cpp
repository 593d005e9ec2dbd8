#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace liff;

namespace {

Image rotate90(const Image& img) {
  const int n = img.nu();
  Image out(img.nv(), n);
  for (int u = 0; u < out.nu(); ++u)
    for (int v = 0; v < out.nv(); ++v) out(u, v) = img(v, n - 1 - u);
  return out;
}

double rms(const Descriptor& a, const Descriptor& b) {
  return descriptor_distance(a, b) / std::sqrt(static_cast<double>(a.size()));
}

Feature with_descriptor(const Descriptor& d) {
  Feature f;
  f.descriptor = d;
  return f;
}

Descriptor random_rooted(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Descriptor raw{};
  for (double& x : raw) x = unit(rng);
  return normalize_rootsift(raw);
}

}  // namespace

TEST(ComputeDescriptor, ConstantSliceIsZero) {
  const Descriptor d = compute_descriptor(Image(40, 40, 0.3), {20, 20, 2.0, 0.4});
  for (double x : d) EXPECT_EQ(x, 0.0);
}

TEST(ComputeDescriptor, NonNegative) {
  const Image img = gaussian_blur(fixtures::random_image(50, 50, 2), 1.5);
  for (double x : compute_descriptor(img, {25, 25, 2.5, 1.0})) EXPECT_GE(x, 0.0);
}

TEST(ComputeDescriptor, WindowLeavingImageIsFine) {
  const Image img = gaussian_blur(fixtures::random_image(30, 30, 2), 1.5);
  const Descriptor d = compute_descriptor(img, {1, 2, 3.0, 0.0});
  double sum = 0.0;
  for (double x : d) sum += x;
  EXPECT_GT(sum, 0.0);
}

TEST(ComputeDescriptor, JointQuarterTurnInvariance) {
  const Image img = gaussian_blur(fixtures::random_image(81, 81, 17), 1.5);
  const Image rot = rotate90(img);
  const double u = 40, v = 40, sigma = 3.0, theta = 0.3;
  const Descriptor a = normalize_rootsift(compute_descriptor(img, {u, v, sigma, theta}));
  const Descriptor b =
      normalize_rootsift(compute_descriptor(rot, {80 - v, u, sigma, theta + std::numbers::pi / 2}));
  EXPECT_LE(rms(a, b), 1e-3);
}

TEST(ComputeDescriptor, SameDiskAtTwoSlopesMatches) {
  const LightFieldDims dims{9, 9, 96, 96};
  const double r = 4.0;
  const LightField a = render_lf(fixtures::single_disk_scene(dims, 48, 48, r, -1.0));
  const LightField b = render_lf(fixtures::single_disk_scene(dims, 48, 48, r, 1.0));
  const KeypointFrame kp{48, 48, r / std::numbers::sqrt2, 0.0};
  const Descriptor da = compute_descriptor(refocus_slice(a, -1.0), kp);
  const Descriptor db = compute_descriptor(refocus_slice(b, 1.0), kp);
  for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], db[i], 1e-6);
}

TEST(RootSift, OneHot) {
  Descriptor raw{};
  raw[0] = 1.0;
  const Descriptor d = normalize_rootsift(raw);
  EXPECT_EQ(d[0], 1.0);
  for (std::size_t i = 1; i < d.size(); ++i) EXPECT_EQ(d[i], 0.0);
}

TEST(RootSift, Uniform) {
  Descriptor raw;
  raw.fill(1.0);
  for (double x : normalize_rootsift(raw)) EXPECT_NEAR(x, 0.08839, 1e-5);
}

TEST(RootSift, ZeroStaysZero) {
  for (double x : normalize_rootsift(Descriptor{})) EXPECT_EQ(x, 0.0);
}

TEST(RootSift, NegativeEntryRejected) {
  Descriptor raw{};
  raw[3] = -0.1;
  EXPECT_THROW(normalize_rootsift(raw), Error);
}

TEST(RootSift, UnitNormAndBhattacharyya) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Descriptor p{}, q{};
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = unit(rng) < 0.3 ? 0.0 : unit(rng);
      q[i] = unit(rng);
    }
    const Descriptor rp = normalize_rootsift(p);
    const Descriptor rq = normalize_rootsift(q);
    double norm = 0.0, dot = 0.0, sp = 0.0, sq = 0.0, bc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      norm += rp[i] * rp[i];
      dot += rp[i] * rq[i];
      sp += p[i];
      sq += q[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(p[i] / sp * q[i] / sq);
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
    EXPECT_NEAR(dot, bc, 1e-9);
  }
}

TEST(MatchFeatures, IdenticalSetsMatchThemselves) {
  std::mt19937_64 rng(1);
  std::vector<Feature> a;
  for (int i = 0; i < 20; ++i) a.push_back(with_descriptor(random_rooted(rng)));
  const auto m = match_features(a, a);
  ASSERT_EQ(m.size(), a.size());
  for (const auto& x : m) {
    EXPECT_EQ(x.a, x.b);
    EXPECT_EQ(x.distance, 0.0);
  }
}

TEST(MatchFeatures, AmbiguousPairRejectedByRatio) {
  std::mt19937_64 rng(2);
  const Descriptor base = random_rooted(rng);
  Descriptor twin = base;
  twin[0] += 1e-3;
  twin[1] -= 1e-3;
  Descriptor query = base;
  query[0] += 0.5e-3;
  query[1] -= 0.5e-3;
  const std::vector<Feature> a{with_descriptor(query)};
  const std::vector<Feature> b{with_descriptor(base), with_descriptor(twin),
                               with_descriptor(random_rooted(rng))};
  const std::vector<Feature> c{with_descriptor(twin), with_descriptor(random_rooted(rng))};
  // The query sits midway between two entries of b, so the ratio test fails.
  EXPECT_TRUE(match_features(a, b).empty());
  // Against c the nearest is unambiguous.
  EXPECT_EQ(match_features(a, c).size(), 1u);
}

TEST(MatchFeatures, TooFewCandidates) {
  std::mt19937_64 rng(3);
  const std::vector<Feature> a{with_descriptor(random_rooted(rng))};
  EXPECT_TRUE(match_features(a, a).empty());
  EXPECT_TRUE(match_features(a, {}).empty());
}

TEST(MatchFeatures, RatioOneKeepsEveryMutualBest) {
  std::mt19937_64 rng(4);
  std::vector<Feature> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(with_descriptor(random_rooted(rng)));
    b.push_back(with_descriptor(random_rooted(rng)));
  }
  const auto all = match_features(a, b, 1.0);
  const auto strict = match_features(a, b, 0.8);
  EXPECT_GE(all.size(), strict.size());
  for (const auto& m : all) {
    for (std::size_t j = 0; j < b.size(); ++j)
      EXPECT_LE(m.distance, descriptor_distance(a[m.a].descriptor, b[j].descriptor));
  }
}

TEST(MatchFeatures, ShiftedCameraMatchesAreCorrect) {
  // Clusters of overlapping disks, each cluster on one depth plane, seen by
  // two cameras displaced along u: a point at slope lambda moves by
  // -lambda * shift between the two light fields.
  SyntheticScene scene;
  scene.dims = {9, 9, 160, 160};
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int cu = 0; cu < 4; ++cu)
    for (int cv = 0; cv < 4; ++cv) {
      const double slope = -0.6 + 1.2 * unit(rng);
      for (int k = 0; k < 3; ++k) {
        Disk d;
        d.u = 25 + 36 * cu + 8 * (unit(rng) - 0.5);
        d.v = 25 + 36 * cv + 8 * (unit(rng) - 0.5);
        d.radius = 2.5 + 3 * unit(rng);
        d.slope = slope;
        d.intensity = 0.2 + 0.6 * unit(rng);
        scene.disks.push_back(d);
      }
    }
  const double shift = 4.0;
  SyntheticScene moved = scene;
  for (auto& d : moved.disks) d.u -= d.slope * shift;
  const auto fa = detect(add_noise(render_lf(scene), 1e-4, 1), DetectorParams{});
  const auto fb = detect(add_noise(render_lf(moved), 1e-4, 2), DetectorParams{});

  auto true_slope = [&](const Feature& f) {
    const Disk* best = &scene.disks.front();
    for (const auto& d : scene.disks)
      if (std::hypot(d.u - f.u, d.v - f.v) < std::hypot(best->u - f.u, best->v - f.v))
        best = &d;
    return best->slope;
  };
  int scored = 0, correct = 0;
  for (const auto& m : match_features(fa, fb)) {
    const Feature& a = fa[m.a];
    const Feature& b = fb[m.b];
    ++scored;
    if (std::hypot(b.u - (a.u - true_slope(a) * shift), b.v - a.v) <= 3.0) ++correct;
  }
  ASSERT_GE(scored, 10);
  EXPECT_GE(static_cast<double>(correct) / scored, 0.9) << correct << "/" << scored;
}
