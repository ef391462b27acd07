#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "f3dgs/types.hpp"

namespace f3dgs {

/// Added to the diagonal of every 2D covariance before inversion (px^2).
constexpr double kCovarianceDilation = 0.3;
constexpr double kMaxAlpha = 0.99;
constexpr double kMinTransmittance = 1e-4;
/// A Gaussian is skipped at a pixel once exp(power) drops below exp(-30);
/// the skipped contribution is far below double-precision gradient noise.
constexpr double kPowerCutoff = 30.0;
/// Jacobian evaluation point is clamped to this multiple of the half FOV.
constexpr double kFrustumGuard = 1.3;

struct RenderSettings {
  Vec3 background = Vec3::Zero();
};

struct ProjectedGaussian {
  Vec2 mean2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  double depth = 0.0;
  double radius = 0.0;  // 0 means culled
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
};

struct RenderOutput {
  Image image;
  std::vector<std::uint32_t> visibility_increment;  // 0 or 1 per Gaussian
  std::vector<double> transmittance;                // final T per pixel
};

/// Gradients of a scalar loss with respect to the appearance attributes.
/// Positions deliberately have no slot.
struct AppearanceGradients {
  std::vector<Vec3> d_log_scale;
  std::vector<Vec4> d_quat;
  std::vector<double> d_logit_opacity;
  std::vector<Vec3> d_sh;  // M * coeffs_per_channel, Gaussian-major

  static AppearanceGradients zeros(std::size_t count, int coeffs_per_channel);
  std::size_t size() const { return d_log_scale.size(); }
};

/// Real SH basis values for a unit direction, degree <= 3.
void sh_basis(const Vec3& dir, int degree, std::span<double> out);

/// View-dependent color: SH sum plus 0.5, clamped per channel to [0, 1].
Vec3 evaluate_sh(std::span<const Vec3> coeffs, const Vec3& view_dir, int degree);

std::vector<ProjectedGaussian> project(const GaussianCloud& cloud, const Pose& pose,
                                       const Camera& cam);

/// Everything the backward pass needs from a forward render. Produced by
/// rasterize(); render() just returns its output.
struct RenderState {
  struct Extra {
    Eigen::Matrix<double, 2, 3> jw = Eigen::Matrix<double, 2, 3>::Zero();
    Mat2 conic = Mat2::Identity();
    Vec3 view_dir = Vec3::UnitZ();
    Eigen::Array3d color_pass = Eigen::Array3d::Ones();  // 0 where clamped
  };

  Camera cam;
  RenderSettings settings;
  std::vector<ProjectedGaussian> projected;
  std::vector<Extra> extras;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<std::uint32_t>> tile_lists;  // depth-ordered ids
  std::vector<std::int32_t> last_contributor;          // list slot + 1, per pixel
  RenderOutput output;
};

RenderState rasterize(const GaussianCloud& cloud, const Pose& pose, const Camera& cam,
                      const RenderSettings& settings = {});

RenderOutput render(const GaussianCloud& cloud, const Pose& pose, const Camera& cam,
                    const RenderSettings& settings = {});

/// Reverse pass over a previously rasterized frame. d_image holds dL/dpixel.
AppearanceGradients backward(const RenderState& state, const GaussianCloud& cloud,
                             const Image& d_image);

AppearanceGradients render_backward(const GaussianCloud& cloud, const Pose& pose,
                                    const Camera& cam, const Image& d_image,
                                    const RenderSettings& settings = {});

}  // namespace f3dgs
