#include "f3dgs/scene_init.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "f3dgs/error.hpp"

namespace f3dgs {
namespace {

constexpr double kShDc = 0.28209479177387814;

}  // namespace

GridIndex::GridIndex(std::span<const Vec3> points) : points_(points) {
  if (points.empty()) return;
  Vec3 lo = points.front();
  Vec3 hi = points.front();
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  const Vec3 ext = hi - lo;
  const double n = static_cast<double>(points.size());
  const double emax = ext.maxCoeff();
  if (emax > 0.0) {
    const double floor_ext = emax / std::cbrt(n);
    const double volume = std::max(ext.x(), floor_ext) * std::max(ext.y(), floor_ext) *
                          std::max(ext.z(), floor_ext);
    cell_ = 1.5 * std::cbrt(volume / n);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    for (int a = 0; a < 3; ++a) extent_[a] = std::max(extent_[a], c[a]);
    cells_[key_of(c[0], c[1], c[2])].push_back(static_cast<std::uint32_t>(i));
  }
}

std::array<std::int64_t, 3> GridIndex::cell_of(const Vec3& p) const {
  std::array<std::int64_t, 3> c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = static_cast<std::int64_t>(std::floor((p[a] - origin_[a]) / cell_));
  }
  return c;
}

GridIndex::Key GridIndex::key_of(std::int64_t x, std::int64_t y, std::int64_t z) {
  return (x << 42) ^ (y << 21) ^ z;
}

std::vector<double> GridIndex::nearest_sq_distances(std::size_t self, std::size_t k) const {
  std::vector<double> best;  // ascending, at most k
  if (k == 0 || points_.size() < 2) return best;
  const Vec3& q = points_[self];
  const auto c = cell_of(q);
  std::int64_t max_ring = 0;
  for (int a = 0; a < 3; ++a) max_ring = std::max({max_ring, c[a], extent_[a] - c[a]});

  for (std::int64_t r = 0; r <= max_ring; ++r) {
    for (std::int64_t dx = -r; dx <= r; ++dx) {
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        for (std::int64_t dz = -r; dz <= r; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          const auto it = cells_.find(key_of(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == cells_.end()) continue;
          for (const std::uint32_t j : it->second) {
            if (j == self) continue;
            const double d2 = (points_[j] - q).squaredNorm();
            if (best.size() == k && d2 >= best.back()) continue;
            best.insert(std::upper_bound(best.begin(), best.end(), d2), d2);
            if (best.size() > k) best.pop_back();
          }
        }
      }
    }
    // Every unvisited point lies at least r cells away from q.
    const double reach = static_cast<double>(r) * cell_;
    if (best.size() == k && best.back() <= reach * reach) break;
  }
  return best;
}

std::vector<double> knn_mean_distances(std::span<const Vec3> points) {
  const GridIndex index(points);
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto d2 = index.nearest_sq_distances(i, kInitNeighbors);
    double sum = 0.0;
    for (const double d : d2) sum += std::sqrt(d);
    out[i] = d2.empty() ? 0.0 : sum / static_cast<double>(d2.size());
  }
  return out;
}

ColoredPointCloud backproject_depth(const Image& image, std::span<const double> depth,
                                    const Pose& pose, const Camera& cam, int stride) {
  if (stride < 1) throw Error(ErrorCode::kConfig, "backproject stride must be positive");
  if (image.width() != cam.width || image.height() != cam.height ||
      depth.size() != cam.pixel_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "depth/image do not match camera resolution");
  }
  ColoredPointCloud out;
  for (int py = 0; py < cam.height; py += stride) {
    for (int px = 0; px < cam.width; px += stride) {
      const double d = depth[static_cast<std::size_t>(py) * cam.width + px];
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Vec3 pc((px - cam.cx) / cam.fx * d, (py - cam.cy) / cam.fy * d, d);
      out.points.push_back({pose.apply(pc), image.pixel(px, py)});
    }
  }
  return out;
}

GaussianCloud initialize_gaussians(const ColoredPointCloud& cloud, std::size_t target_count,
                                   int sh_degree, std::uint64_t seed) {
  if (cloud.size() < kInitNeighbors + 1) {
    throw Error(ErrorCode::kDegenerateInput,
                "initialization needs at least 4 points, got " + std::to_string(cloud.size()));
  }
  if (target_count < kInitNeighbors + 1) {
    throw Error(ErrorCode::kConfig, "target gaussian count must be at least 4");
  }
  if (sh_degree < 0 || sh_degree > kMaxShDegree) {
    throw Error(ErrorCode::kConfig, "sh degree outside [0, 3]");
  }

  std::vector<std::size_t> keep(cloud.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (cloud.size() > target_count) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < target_count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, keep.size() - 1);
      std::swap(keep[i], keep[pick(rng)]);
    }
    keep.resize(target_count);
    std::sort(keep.begin(), keep.end());
  }

  std::vector<Vec3> positions;
  positions.reserve(keep.size());
  for (const std::size_t i : keep) positions.push_back(cloud.points[i].position);
  const std::vector<double> spacing = knn_mean_distances(positions);

  GaussianCloud out;
  out.sh_degree = sh_degree;
  const auto ncoef = static_cast<std::size_t>(sh_coeff_count(sh_degree));
  out.gaussians.reserve(keep.size());
  const double lo = std::log(kMinInitScale);
  const double hi = std::log(kMaxInitScale);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    Gaussian g;
    g.mu = positions[j];
    g.log_scale = Vec3::Constant(std::clamp(std::log(spacing[j]), lo, hi));
    g.quat = Vec4(1.0, 0.0, 0.0, 0.0);
    g.logit_opacity = logit(kInitOpacity);
    g.sh.assign(ncoef, Vec3::Zero());
    g.sh[0] = (cloud.points[keep[j]].color - Vec3::Constant(0.5)) / kShDc;
    out.gaussians.push_back(std::move(g));
  }
  return out;
}

ColoredPointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open point cloud " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw Error(ErrorCode::kParse, path.string() + ": not a PLY file");
  }
  std::size_t count = 0;
  bool ascii = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex") {
        throw Error(ErrorCode::kParse, path.string() + ": unsupported element " + name);
      }
    } else if (word == "property") {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(ErrorCode::kParse, path.string() + ": only ascii PLY is supported");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < props.size(); ++i) col[props[i]] = i;
  for (const char* need : {"x", "y", "z", "red", "green", "blue"}) {
    if (!col.count(need)) {
      throw Error(ErrorCode::kParse, path.string() + ": missing property " + need);
    }
  }
  ColoredPointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> v(props.size());
  for (std::size_t i = 0; i < count; ++i) {
    for (double& x : v) {
      if (!(in >> x)) {
        throw Error(ErrorCode::kParse, path.string() + ": truncated vertex " + std::to_string(i));
      }
    }
    ColoredPoint p;
    p.position = Vec3(v[col["x"]], v[col["y"]], v[col["z"]]);
    p.color = Vec3(v[col["red"]], v[col["green"]], v[col["blue"]]) / 255.0;
    cloud.points.push_back(p);
  }
  return cloud;
}

void write_ply(const std::filesystem::path& path, const ColoredPointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write point cloud " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  out << std::setprecision(17);
  for (const ColoredPoint& p : cloud.points) {
    const auto q = [](double c) {
      return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
    };
    out << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z() << ' '
        << q(p.color.x()) << ' ' << q(p.color.y()) << ' ' << q(p.color.z()) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing point cloud " + path.string());
}

}  // namespace f3dgs
