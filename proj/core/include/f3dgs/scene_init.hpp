#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "f3dgs/types.hpp"

namespace f3dgs {

struct ColoredPoint {
  Vec3 position = Vec3::Zero();
  Vec3 color = Vec3::Zero();  // linear RGB in [0, 1]
};

struct ColoredPointCloud {
  std::vector<ColoredPoint> points;

  std::size_t size() const { return points.size(); }
};

constexpr std::size_t kInitNeighbors = 3;
constexpr double kInitOpacity = 0.1;
constexpr double kMinInitScale = 1e-4;
constexpr double kMaxInitScale = 1.0;
constexpr std::size_t kDefaultInitCount = 5000;

/// Uniform hash grid over a fixed point set answering exact k-nearest
/// neighbour queries.
class GridIndex {
 public:
  explicit GridIndex(std::span<const Vec3> points);

  /// Squared distances to the k nearest other points of point `self`,
  /// ascending. Fewer than k entries only if the set is that small.
  std::vector<double> nearest_sq_distances(std::size_t self, std::size_t k) const;

  double cell_size() const { return cell_; }

 private:
  using Key = std::int64_t;
  std::array<std::int64_t, 3> cell_of(const Vec3& p) const;
  static Key key_of(std::int64_t x, std::int64_t y, std::int64_t z);

  std::span<const Vec3> points_;
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  std::array<std::int64_t, 3> extent_{};  // max cell coordinate per axis
  std::unordered_map<Key, std::vector<std::uint32_t>> cells_;
};

/// Mean distance to the 3 nearest neighbours of each point.
std::vector<double> knn_mean_distances(std::span<const Vec3> points);

/// Unprojects every stride-th pixel with positive depth into world space.
ColoredPointCloud backproject_depth(const Image& image, std::span<const double> depth,
                                    const Pose& pose, const Camera& cam, int stride);

/// Converts points into Gaussians (isotropic KNN scale, identity rotation,
/// opacity 0.1, DC color from the point). Clouds larger than target_count are
/// uniformly subsampled with `seed`.
GaussianCloud initialize_gaussians(const ColoredPointCloud& cloud, std::size_t target_count,
                                   int sh_degree, std::uint64_t seed = 0);

ColoredPointCloud read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const ColoredPointCloud& cloud);

}  // namespace f3dgs
