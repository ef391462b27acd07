#include "f3dgs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "f3dgs/error.hpp"

namespace f3dgs {
namespace {

constexpr double kShDc = 0.28209479177387814;
constexpr double kStartDepth = 0.5;
constexpr double kEndMargin = 1.0;
constexpr double kChecker = 0.5;  // texture square size (m)
// Gentle sway around the centerline; a perfectly straight track leaves the
// roll about the travel axis unobservable when aligning a chunk.
constexpr double kSwayLateral = 0.08;
constexpr double kSwayVertical = 0.05;
constexpr double kSwayPeriod = 2.5;  // meters of path per lateral cycle

struct Surface {
  Vec3 origin;
  Vec3 u;  // edge vectors spanning the rectangle
  Vec3 v;
  Vec3 base_color;

  double area() const { return u.norm() * v.norm(); }
};

std::vector<Surface> corridor_surfaces(const CorridorLayout& c) {
  const double w = c.half_width;
  const double h = c.half_height;
  const double lz = c.first_leg;
  const double lx = c.second_leg;
  const Vec3 up(0.0, 2.0 * h, 0.0);
  std::vector<Surface> s;
  // Walls; v spans floor-to-ceiling.
  s.push_back({{-w, -h, 0.0}, {0.0, 0.0, lz + w}, up, {0.80, 0.35, 0.25}});
  s.push_back({{w, -h, 0.0}, {0.0, 0.0, lz - w}, up, {0.25, 0.55, 0.85}});
  s.push_back({{-w, -h, lz + w}, {lx + w, 0.0, 0.0}, up, {0.85, 0.80, 0.30}});
  s.push_back({{w, -h, lz - w}, {lx - w, 0.0, 0.0}, up, {0.35, 0.75, 0.40}});
  s.push_back({{lx, -h, lz - w}, {0.0, 0.0, 2.0 * w}, up, {0.70, 0.40, 0.80}});
  // Floor (y = +h) and ceiling (y = -h) of both legs.
  for (const double y : {h, -h}) {
    const Vec3 tint = y > 0 ? Vec3(0.55, 0.50, 0.45) : Vec3(0.85, 0.85, 0.90);
    s.push_back({{-w, y, 0.0}, {2.0 * w, 0.0, 0.0}, {0.0, 0.0, lz + w}, tint});
    s.push_back({{w, y, lz - w}, {lx - w, 0.0, 0.0}, {0.0, 0.0, 2.0 * w}, tint});
  }
  return s;
}

struct PathSample {
  Vec3 position;
  double heading;  // yaw about +y; 0 looks along +z
};

PathSample corridor_path(const CorridorLayout& c, double s) {
  const double r = c.turn_radius;
  const double leg1 = c.first_leg - r - kStartDepth;
  const double arc = 0.5 * std::numbers::pi * r;
  if (s <= leg1) return {{0.0, 0.0, kStartDepth + s}, 0.0};
  if (s <= leg1 + arc) {
    const double phi = (s - leg1) / r;
    const Vec3 center(r, 0.0, c.first_leg - r);
    return {center + Vec3(-r * std::cos(phi), 0.0, r * std::sin(phi)), phi};
  }
  const double rest = s - leg1 - arc;
  return {{r + rest, 0.0, c.first_leg}, 0.5 * std::numbers::pi};
}

double path_length(const CorridorLayout& c) {
  return (c.first_leg - c.turn_radius - kStartDepth) + 0.5 * std::numbers::pi * c.turn_radius +
         (c.second_leg - kEndMargin - c.turn_radius);
}

Eigen::Quaterniond random_rotation(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 axis(normal(rng), normal(rng), normal(rng));
  axis.normalize();
  return Eigen::Quaterniond(Eigen::AngleAxisd(unit(rng) * max_angle, axis));
}

}  // namespace

bool CorridorLayout::contains(const Vec3& p) const {
  if (std::abs(p.y()) > half_height) return false;
  const bool in_first = std::abs(p.x()) <= half_width && p.z() >= 0.0 &&
                        p.z() <= first_leg + half_width;
  const bool in_second = p.x() >= -half_width && p.x() <= second_leg &&
                         std::abs(p.z() - first_leg) <= half_width;
  return in_first || in_second;
}

Camera make_camera(int width, int height, double fov_degrees) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.5 * width / std::tan(0.5 * fov_degrees * std::numbers::pi / 180.0);
  cam.fy = cam.fx;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.near = 0.05;
  cam.validate();
  return cam;
}

SyntheticScene generate_corridor_scene(const SceneParams& params) {
  if (params.n_frames < 8 || params.n_gaussians < 16) {
    throw Error(ErrorCode::kConfig, "corridor scene needs >= 8 frames and >= 16 gaussians");
  }
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticScene scene;
  scene.seed = params.seed;
  scene.camera = make_camera(params.width, params.height, params.fov_degrees);

  // Largest-remainder split of the Gaussian budget by surface area.
  const std::vector<Surface> surfaces = corridor_surfaces(params.layout);
  double total_area = 0.0;
  for (const Surface& s : surfaces) total_area += s.area();
  std::vector<std::size_t> counts(surfaces.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const double exact = static_cast<double>(params.n_gaussians) * surfaces[i].area() / total_area;
    counts[i] = static_cast<std::size_t>(exact);
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  for (std::size_t j = 0; assigned < params.n_gaussians; ++j, ++assigned) {
    ++counts[remainders[j % remainders.size()].second];
  }

  GaussianCloud& gt = scene.ground_truth;
  gt.sh_degree = params.sh_degree;
  const auto ncoef = static_cast<std::size_t>(sh_coeff_count(params.sh_degree));
  for (std::size_t si = 0; si < surfaces.size(); ++si) {
    const Surface& surf = surfaces[si];
    const std::size_t n = counts[si];
    if (n == 0) continue;
    const double lu = surf.u.norm();
    const double lv = surf.v.norm();
    const auto nu = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n) * lu / lv))));
    const std::size_t nv = (n + nu - 1) / nu;
    const Vec3 du = surf.u / lu;
    const Vec3 dv = surf.v / lv;
    const Vec3 normal_dir = du.cross(dv);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = (static_cast<double>(j % nu) + 0.5 + 0.3 * (2.0 * unit(rng) - 1.0)) / nu;
      const double b = (static_cast<double>(j / nu) + 0.5 + 0.3 * (2.0 * unit(rng) - 1.0)) / nv;
      Gaussian g;
      g.mu = surf.origin + a * surf.u + b * surf.v;

      const double spin = 0.3 * (2.0 * unit(rng) - 1.0);
      Mat3 frame;
      frame.col(0) = std::cos(spin) * du + std::sin(spin) * dv;
      frame.col(1) = -std::sin(spin) * du + std::cos(spin) * dv;
      frame.col(2) = normal_dir;
      const Eigen::Quaterniond q(frame);
      g.quat = Vec4(q.w(), q.x(), q.y(), q.z()).normalized();
      g.log_scale = Vec3(std::log(0.45 * lu / nu * (0.8 + 0.4 * unit(rng))),
                         std::log(0.45 * lv / nv * (0.8 + 0.4 * unit(rng))), std::log(0.02));
      g.logit_opacity = 1.5 + 1.5 * unit(rng);

      const auto cu = static_cast<long>(std::floor(a * lu / kChecker));
      const auto cv = static_cast<long>(std::floor(b * lv / kChecker));
      const double shade = ((cu + cv) % 2 == 0) ? 1.0 : 0.55;
      Vec3 color = surf.base_color * shade;
      for (int c = 0; c < 3; ++c) color[c] += 0.04 * normal(rng);
      color = color.cwiseMax(0.05).cwiseMin(0.95);

      g.sh.assign(ncoef, Vec3::Zero());
      g.sh[0] = (color - Vec3::Constant(0.5)) / kShDc;
      for (std::size_t k = 1; k < ncoef; ++k) {
        g.sh[k] = Vec3(normal(rng), normal(rng), normal(rng)) * 0.05;
      }
      gt.gaussians.push_back(std::move(g));

      ColoredPoint p;
      p.position = gt.gaussians.back().mu;
      if (params.init_noise > 0.0) {
        p.position += params.init_noise * Vec3(normal(rng), normal(rng), normal(rng));
      }
      p.color = color;
      scene.point_cloud.points.push_back(p);
    }
  }

  const double length = path_length(params.layout);
  for (std::int64_t i = 0; i < params.n_frames; ++i) {
    const double s = length * static_cast<double>(i) / static_cast<double>(params.n_frames - 1);
    const PathSample ps = corridor_path(params.layout, s);
    Pose pose;
    pose.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(ps.heading, Vec3::UnitY()));
    const double phase = 2.0 * std::numbers::pi * s / kSwayPeriod;
    const Vec3 side = pose.rotation * Vec3::UnitX();
    pose.translation = ps.position + kSwayLateral * std::sin(phase) * side +
                       Vec3(0.0, kSwayVertical * std::sin(1.7 * phase), 0.0);
    scene.anchor.poses.push_back(pose);
    scene.anchor.timestamps.push_back(i);

    Frame f;
    f.pose = pose;
    f.timestamp_index = i;
    f.image = render(gt, pose, scene.camera).image;
    scene.frames.push_back(std::move(f));
  }
  return scene;
}

std::vector<Trajectory> perturb_client_trajectories(const SyntheticScene& scene, std::int64_t clients,
                                                    std::int64_t chunk_size, const Sim3Noise& noise,
                                                    std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(scene.anchor.size());
  if (clients < 1 || chunk_size < 1 || clients * chunk_size < n) {
    throw Error(ErrorCode::kConfig, "K * C must cover every frame");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Trajectory> out;
  for (std::int64_t k = 0; k < clients; ++k) {
    const std::int64_t first = k * chunk_size;
    const std::int64_t last = std::min((k + 1) * chunk_size, n);
    if (first >= last) break;
    Trajectory chunk;
    chunk.poses.assign(scene.anchor.poses.begin() + first, scene.anchor.poses.begin() + last);
    chunk.timestamps.assign(scene.anchor.timestamps.begin() + first,
                            scene.anchor.timestamps.begin() + last);

    Sim3Transform s;
    s.scale = 1.0 + noise.scale * (2.0 * unit(rng) - 1.0);
    s.rotation = random_rotation(rng, noise.rotation);
    Vec3 dir(normal(rng), normal(rng), normal(rng));
    s.translation = dir.normalized() * (noise.translation * unit(rng));
    out.push_back(apply_sim3(s, chunk));
  }
  return out;
}

}  // namespace f3dgs
