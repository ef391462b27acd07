#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "f3dgs/error.hpp"
#include "f3dgs/scene_init.hpp"
#include "test_util.hpp"

namespace f3dgs {
namespace {

constexpr double kY00 = 0.28209479177387814;

std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), 0.2 * u(rng));
  return pts;
}

std::vector<double> brute_knn(const std::vector<Vec3>& pts, std::size_t self, std::size_t k) {
  std::vector<double> d;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j != self) d.push_back((pts[j] - pts[self]).squaredNorm());
  }
  std::sort(d.begin(), d.end());
  d.resize(std::min(k, d.size()));
  return d;
}

TEST(Knn, GridMatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (const std::size_t n : {5u, 60u, 700u}) {
    const auto pts = random_points(rng, n, 4.0);
    const GridIndex grid(pts);
    for (std::size_t i = 0; i < n; i += 7) {
      for (const std::size_t k : {1u, 3u, 8u}) {
        const auto got = grid.nearest_sq_distances(i, k);
        const auto want = brute_knn(pts, i, k);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t j = 0; j < got.size(); ++j) EXPECT_DOUBLE_EQ(got[j], want[j]);
      }
    }
  }
}

TEST(Knn, ClusteredAndDuplicatePoints) {
  std::mt19937_64 rng(32);
  auto pts = random_points(rng, 200, 0.01);
  const auto far = random_points(rng, 50, 100.0);
  pts.insert(pts.end(), far.begin(), far.end());
  pts.push_back(pts[3]);
  const GridIndex grid(pts);
  for (std::size_t i = 0; i < pts.size(); i += 5) {
    const auto got = grid.nearest_sq_distances(i, 3);
    const auto want = brute_knn(pts, i, 3);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(got[j], want[j]);
  }
  EXPECT_EQ(grid.nearest_sq_distances(pts.size() - 1, 1)[0], 0.0);
}

TEST(Knn, MeanDistanceOnLattice) {
  std::vector<Vec3> pts;
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) {
      for (int z = 0; z < 6; ++z) pts.emplace_back(0.5 * x, 0.5 * y, 0.5 * z);
    }
  }
  for (const double d : knn_mean_distances(pts)) EXPECT_NEAR(d, 0.5, 1e-12);
}

ColoredPointCloud colored(const std::vector<Vec3>& pts, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ColoredPointCloud c;
  for (const Vec3& p : pts) c.points.push_back({p, Vec3(u(rng), u(rng), u(rng))});
  return c;
}

TEST(Init, AttributeContract) {
  std::mt19937_64 rng(33);
  const auto pts = random_points(rng, 300, 2.0);
  const ColoredPointCloud pc = colored(pts, rng);
  const GaussianCloud cloud = initialize_gaussians(pc, 1000, 2);
  ASSERT_EQ(cloud.size(), 300u);
  EXPECT_EQ(cloud.sh_degree, 2);
  cloud.validate();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Gaussian& g = cloud.gaussians[i];
    EXPECT_EQ(g.mu, pts[i]);
    const auto nn = brute_knn(pts, i, 3);
    const double mean = (std::sqrt(nn[0]) + std::sqrt(nn[1]) + std::sqrt(nn[2])) / 3.0;
    EXPECT_NEAR(g.log_scale[0], std::log(mean), 1e-12);
    EXPECT_EQ(g.log_scale[0], g.log_scale[1]);
    EXPECT_EQ(g.log_scale[0], g.log_scale[2]);
    EXPECT_EQ(g.quat, Vec4(1, 0, 0, 0));
    EXPECT_NEAR(sigmoid(g.logit_opacity), 0.1, 1e-12);
    const Vec3 color = Vec3::Constant(0.5) + kY00 * g.sh[0];
    EXPECT_LT((color - pc.points[i].color).norm(), 1e-12);
    ASSERT_EQ(g.sh.size(), 9u);
    for (std::size_t k = 1; k < g.sh.size(); ++k) EXPECT_EQ(g.sh[k], Vec3::Zero());
  }
}

TEST(Init, SubsamplesDeterministically) {
  std::mt19937_64 rng(34);
  const ColoredPointCloud pc = colored(random_points(rng, 500, 2.0), rng);
  const GaussianCloud a = initialize_gaussians(pc, 120, 1, 5);
  const GaussianCloud b = initialize_gaussians(pc, 120, 1, 5);
  const GaussianCloud c = initialize_gaussians(pc, 120, 1, 6);
  ASSERT_EQ(a.size(), 120u);
  std::set<std::tuple<double, double, double>> source;
  for (const auto& p : pc.points) source.insert({p.position.x(), p.position.y(), p.position.z()});
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.gaussians[i].mu, b.gaussians[i].mu);
    const Vec3& m = a.gaussians[i].mu;
    EXPECT_TRUE(source.count({m.x(), m.y(), m.z()}));
    differs = differs || a.gaussians[i].mu != c.gaussians[i].mu;
  }
  EXPECT_TRUE(differs);
}

TEST(Init, ScaleIsClamped) {
  ColoredPointCloud pc;
  for (int i = 0; i < 4; ++i) pc.points.push_back({Vec3(100.0 * i, 0, 0), Vec3::Zero()});
  pc.points.push_back({Vec3::Zero(), Vec3::Zero()});
  const GaussianCloud g = initialize_gaussians(pc, 10, 0);
  for (const auto& x : g.gaussians) {
    EXPECT_LE(x.log_scale[0], std::log(kMaxInitScale) + 1e-15);
    EXPECT_GE(x.log_scale[0], std::log(kMinInitScale) - 1e-15);
  }
}

TEST(Init, Errors) {
  ColoredPointCloud tiny;
  for (int i = 0; i < 3; ++i) tiny.points.push_back({Vec3(i, 0, 0), Vec3::Zero()});
  EXPECT_THROW(initialize_gaussians(tiny, 10, 1), Error);
  std::mt19937_64 rng(35);
  const ColoredPointCloud pc = colored(random_points(rng, 20, 1.0), rng);
  EXPECT_THROW(initialize_gaussians(pc, 3, 1), Error);
  EXPECT_THROW(initialize_gaussians(pc, 10, 4), Error);
}

TEST(Backproject, RecoversPoints) {
  std::mt19937_64 rng(36);
  const Camera cam = testing::small_camera(12, 10);
  const Pose pose = testing::random_pose(rng, 1.0);
  const Image img = testing::random_image(rng, 12, 10);
  std::vector<double> depth(cam.pixel_count(), 2.0);
  depth[5] = 0.0;
  const ColoredPointCloud pc = backproject_depth(img, depth, pose, cam, 1);
  EXPECT_EQ(pc.size(), cam.pixel_count() - 1);
  const ColoredPointCloud strided = backproject_depth(img, depth, pose, cam, 3);
  EXPECT_EQ(strided.size(), 16u);
  // First point is pixel (0, 0).
  const Vec3 local = pose.inverse().apply(pc.points[0].position);
  EXPECT_NEAR(local.z(), 2.0, 1e-12);
  EXPECT_NEAR(local.x() / local.z() * cam.fx + cam.cx, 0.0, 1e-9);
  EXPECT_EQ(pc.points[0].color, img.pixel(0, 0));
  EXPECT_THROW(backproject_depth(img, std::vector<double>(3), pose, cam, 1), Error);
}

TEST(Ply, RoundTrip) {
  std::mt19937_64 rng(37);
  const ColoredPointCloud pc = colored(random_points(rng, 50, 3.0), rng);
  const auto path = std::filesystem::temp_directory_path() / "f3dgs_test_cloud.ply";
  write_ply(path, pc);
  const ColoredPointCloud back = read_ply(path);
  ASSERT_EQ(back.size(), pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    EXPECT_LT((back.points[i].position - pc.points[i].position).norm(), 1e-12);
    EXPECT_LT((back.points[i].color - pc.points[i].color).cwiseAbs().maxCoeff(), 0.5 / 255 + 1e-12);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(read_ply(path), Error);
}

}  // namespace
}  // namespace f3dgs
