#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace f3dgs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

constexpr int kMaxShDegree = 3;

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Rotation matrix of a (w,x,y,z) quaternion. The quaternion is normalized
/// first, so any non-zero 4-vector maps to a proper rotation.
Mat3 quat_to_rotation(const Vec4& wxyz);

/// One scene primitive. Scale is stored as log, opacity as logit; the
/// activations are applied by the renderer only.
struct Gaussian {
  Vec3 mu = Vec3::Zero();
  Vec3 log_scale = Vec3::Zero();
  Vec4 quat = Vec4(1.0, 0.0, 0.0, 0.0);  // (w, x, y, z)
  double logit_opacity = 0.0;
  std::vector<Vec3> sh;  // (degree + 1)^2 RGB coefficients, DC first
};

double sigmoid_opacity(const Gaussian& g);

struct GaussianCloud {
  std::vector<Gaussian> gaussians;
  int sh_degree = 1;

  std::size_t size() const { return gaussians.size(); }
  int coeffs_per_channel() const { return sh_coeff_count(sh_degree); }

  /// Throws ShapeMismatch / DegenerateInput when the cloud is empty, the
  /// degree is outside [0, 3], or a Gaussian carries the wrong SH count.
  void validate() const;
};

/// Rigid camera-to-world transform.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Mat4& m);

  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }
  Mat4 matrix() const;
  Pose inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

Pose pose_compose(const Pose& a, const Pose& b);

/// Rotation angle of the relative rotation plus translation distance.
double pose_distance(const Pose& a, const Pose& b);

struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  double near = 0.01;

  void validate() const;
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

/// Row-major linear RGB image.
class Image {
 public:
  Image() = default;
  Image(int width, int height, const Vec3& fill = Vec3::Zero());

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  double& at(int x, int y, int c) {
    return data_[3 * (static_cast<std::size_t>(y) * width_ + x) + c];
  }
  double at(int x, int y, int c) const {
    return data_[3 * (static_cast<std::size_t>(y) * width_ + x) + c];
  }
  Vec3 pixel(int x, int y) const {
    const double* p = &data_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    return {p[0], p[1], p[2]};
  }
  void set_pixel(int x, int y, const Vec3& v) {
    double* p = &data_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    p[0] = v.x();
    p[1] = v.y();
    p[2] = v.z();
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct Frame {
  Image image;
  Pose pose;
  std::int64_t timestamp_index = 0;
};

}  // namespace f3dgs
