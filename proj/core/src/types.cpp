#include "f3dgs/types.hpp"

#include <algorithm>
#include <string>

#include "f3dgs/error.hpp"

namespace f3dgs {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNonFiniteLoss: return "non_finite_loss";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kWindowTooLarge: return "window_too_large";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported_version";
    case ErrorCode::kCrcMismatch: return "crc_mismatch";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

Mat3 quat_to_rotation(const Vec4& wxyz) {
  const Vec4 q = wxyz.normalized();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

double sigmoid_opacity(const Gaussian& g) { return sigmoid(g.logit_opacity); }

void GaussianCloud::validate() const {
  if (gaussians.empty()) {
    throw Error(ErrorCode::kDegenerateInput, "gaussian cloud is empty");
  }
  if (sh_degree < 0 || sh_degree > kMaxShDegree) {
    throw Error(ErrorCode::kShapeMismatch,
                "sh degree " + std::to_string(sh_degree) + " outside [0, 3]");
  }
  const auto n = static_cast<std::size_t>(coeffs_per_channel());
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    if (gaussians[i].sh.size() != n) {
      throw Error(ErrorCode::kShapeMismatch,
                  "gaussian " + std::to_string(i) + " has " +
                      std::to_string(gaussians[i].sh.size()) +
                      " sh coefficients, expected " + std::to_string(n));
    }
  }
}

Pose Pose::from_matrix(const Mat4& m) {
  Pose p;
  p.rotation = Eigen::Quaterniond(Mat3(m.topLeftCorner<3, 3>())).normalized();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose pose_compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

double pose_distance(const Pose& a, const Pose& b) {
  const double angle = a.rotation.angularDistance(b.rotation);
  return angle + (a.translation - b.translation).norm();
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !(near > 0.0) || width <= 0 ||
      height <= 0 || cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw Error(ErrorCode::kConfig, "invalid camera intrinsics");
  }
}

Image::Image(int width, int height, const Vec3& fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kDimensionMismatch, "image dimensions must be positive");
  }
  data_.resize(3 * pixel_count());
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[3 * i + 0] = fill.x();
    data_[3 * i + 1] = fill.y();
    data_[3 * i + 2] = fill.z();
  }
}

}  // namespace f3dgs
