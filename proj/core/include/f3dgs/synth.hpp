#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "f3dgs/pose_stitch.hpp"
#include "f3dgs/renderer.hpp"
#include "f3dgs/scene_init.hpp"
#include "f3dgs/types.hpp"

namespace f3dgs {

/// Rectangular L-shaped corridor: a straight leg along +z, a 90 degree
/// right turn, and a second leg along +x. World y points down.
struct CorridorLayout {
  double half_width = 1.0;
  double half_height = 1.2;
  double first_leg = 6.0;   // centerline z of the second leg
  double second_leg = 6.0;  // x of the far end wall
  double turn_radius = 1.0;

  /// True when the point lies inside the corridor volume.
  bool contains(const Vec3& p) const;
};

struct SceneParams {
  std::uint64_t seed = 7;
  std::int64_t n_frames = 120;
  std::size_t n_gaussians = 2000;
  int width = 64;
  int height = 64;
  double fov_degrees = 70.0;
  int sh_degree = 1;
  double init_noise = 0.005;   // sigma of the init point jitter (m)
  std::size_t init_count = 0;  // 0 means n_gaussians
  CorridorLayout layout;
};

Camera make_camera(int width, int height, double fov_degrees);

struct SyntheticScene {
  GaussianCloud ground_truth;
  Trajectory anchor;
  std::vector<Frame> frames;
  ColoredPointCloud point_cloud;
  Camera camera;
  std::uint64_t seed = 0;
};

SyntheticScene generate_corridor_scene(const SceneParams& params);

struct Sim3Noise {
  double scale = 0.0;        // scale drawn from [1 - s, 1 + s]
  double rotation = 0.0;     // angle up to r radians about a random axis
  double translation = 0.0;  // offset up to t meters in a random direction
};

/// Splits the anchor into K chunks of C frames and moves each chunk by an
/// independent random similarity.
std::vector<Trajectory> perturb_client_trajectories(const SyntheticScene& scene, std::int64_t clients,
                                                    std::int64_t chunk_size, const Sim3Noise& noise,
                                                    std::uint64_t seed);

}  // namespace f3dgs
