#include "f3dgs/renderer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "f3dgs/error.hpp"

namespace f3dgs {
namespace {

constexpr int kTileSize = 16;

constexpr double kShC0 = 0.28209479177387814;
constexpr double kShC1 = 0.4886025119029199;
constexpr std::array<double, 5> kShC2 = {1.0925484305920792, -1.0925484305920792,
                                         0.31539156525252005, -1.0925484305920792,
                                         0.5462742152960396};
constexpr std::array<double, 7> kShC3 = {-0.5900435899266435, 2.890611442640554,
                                         -0.4570457994644658, 0.3731763325901154,
                                         -0.4570457994644658, 1.445305721320277,
                                         -0.5900435899266435};

double max_eigenvalue(const Mat2& m) {
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
  return mid + std::sqrt(half_diff * half_diff + m(0, 1) * m(0, 1));
}

// d(rotation matrix)/d(unit quaternion), contracted with dL/dR.
Vec4 rotation_grad_to_quat(const Vec4& q, const Mat3& g) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Vec4 d;
  d[0] = 2 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) +
              x * g(2, 1));
  d[1] = 2 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2 * x * g(1, 1) - w * g(1, 2) +
              z * g(2, 0) + w * g(2, 1) - 2 * x * g(2, 2));
  d[2] = 2 * (-2 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
              w * g(2, 0) + z * g(2, 1) - 2 * y * g(2, 2));
  d[3] = 2 * (-2 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) -
              2 * z * g(1, 1) + y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
  return d;
}

// Pixel box outside which exp(power) < exp(-kPowerCutoff) for sure.
struct PixelBox {
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
};

PixelBox cutoff_box(const ProjectedGaussian& pg, const Camera& cam) {
  const double ex = std::sqrt(2.0 * kPowerCutoff * pg.cov2d(0, 0));
  const double ey = std::sqrt(2.0 * kPowerCutoff * pg.cov2d(1, 1));
  PixelBox b;
  b.x0 = std::max(0, static_cast<int>(std::ceil(pg.mean2d.x() - ex)));
  b.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(pg.mean2d.x() + ex)));
  b.y0 = std::max(0, static_cast<int>(std::ceil(pg.mean2d.y() - ey)));
  b.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(pg.mean2d.y() + ey)));
  return b;
}

// One tile's splats in compositing order. Along a pixel row the exponent is
// quadratic in x, so exp(power) advances by two multiplies per pixel.
class TileKernel {
 public:
  TileKernel(const RenderState& st, const std::vector<std::uint32_t>& list) {
    const std::size_t n = list.size();
    mx_.resize(n), my_.resize(n), a_.resize(n), b_.resize(n), c_.resize(n);
    decay_.resize(n), opacity_.resize(n), color_.resize(n), g_.resize(n), ratio_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const ProjectedGaussian& pg = st.projected[list[i]];
      const Mat2& q = st.extras[list[i]].conic;
      mx_[i] = pg.mean2d.x();
      my_[i] = pg.mean2d.y();
      a_[i] = q(0, 0);
      b_[i] = q(0, 1);
      c_[i] = q(1, 1);
      decay_[i] = std::exp(-a_[i]);
      opacity_[i] = pg.opacity;
      color_[i] = pg.color;
    }
  }

  std::size_t size() const { return g_.size(); }

  void start_row(int px, int py) {
    for (std::size_t i = 0; i < g_.size(); ++i) {
      const double dx = px - mx_[i];
      const double dy = py - my_[i];
      const double power = -0.5 * (a_[i] * dx * dx + c_[i] * dy * dy) - b_[i] * dx * dy;
      // The conic's eigenvalues are at most 1/0.3, so a row start this far
      // down means the whole tile row is below the cutoff.
      if (power < -kDeadRow) {
        g_[i] = 0.0;
        ratio_[i] = 0.0;
      } else {
        g_[i] = std::exp(power);
        ratio_[i] = std::exp(-a_[i] * (dx + 0.5) - b_[i] * dy);
      }
    }
  }

  void step() {
    for (std::size_t i = 0; i < g_.size(); ++i) {
      g_[i] *= ratio_[i];
      ratio_[i] *= decay_[i];
    }
  }

  double value(std::size_t i) const { return g_[i]; }
  double opacity(std::size_t i) const { return opacity_[i]; }
  const Vec3& color(std::size_t i) const { return color_[i]; }
  double mx(std::size_t i) const { return mx_[i]; }
  double my(std::size_t i) const { return my_[i]; }

 private:
  static constexpr double kDeadRow = 700.0;

  std::vector<double> mx_, my_, a_, b_, c_, decay_, opacity_;
  std::vector<Vec3> color_;
  std::vector<double> g_, ratio_;
};

const double kCutoffValue = std::exp(-kPowerCutoff);

void project_into(const GaussianCloud& cloud, const Pose& pose, const Camera& cam,
                  std::vector<ProjectedGaussian>& projected,
                  std::vector<RenderState::Extra>* extras) {
  const Mat3 world_to_cam = pose.rotation_matrix().transpose();
  const Vec3 center = pose.translation;
  const int degree = cloud.sh_degree;
  std::vector<double> basis(static_cast<std::size_t>(sh_coeff_count(degree)));

  projected.assign(cloud.size(), ProjectedGaussian{});
  if (extras != nullptr) extras->assign(cloud.size(), RenderState::Extra{});

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Gaussian& g = cloud.gaussians[i];
    ProjectedGaussian& pg = projected[i];
    const Vec3 pc = world_to_cam * (g.mu - center);
    pg.depth = pc.z();
    pg.opacity = sigmoid(g.logit_opacity);
    if (pc.z() < cam.near) continue;

    const double inv_z = 1.0 / pc.z();
    pg.mean2d = Vec2(cam.fx * pc.x() * inv_z + cam.cx, cam.fy * pc.y() * inv_z + cam.cy);

    // The affine approximation is evaluated at a point clamped to 1.3x the
    // frustum, otherwise Gaussians beside the camera smear across the image.
    const double lim_x = kFrustumGuard * 0.5 * cam.width / cam.fx;
    const double lim_y = kFrustumGuard * 0.5 * cam.height / cam.fy;
    const double tx = std::clamp(pc.x() * inv_z, -lim_x, lim_x);
    const double ty = std::clamp(pc.y() * inv_z, -lim_y, lim_y);
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.fx * inv_z, 0.0, -cam.fx * tx * inv_z,  //
        0.0, cam.fy * inv_z, -cam.fy * ty * inv_z;
    const Eigen::Matrix<double, 2, 3> jw = jac * world_to_cam;

    const Mat3 rot = quat_to_rotation(g.quat);
    const Mat3 m = rot * g.log_scale.array().exp().matrix().asDiagonal();
    const Mat3 sigma = m * m.transpose();
    pg.cov2d = jw * sigma * jw.transpose();
    pg.cov2d(0, 0) += kCovarianceDilation;
    pg.cov2d(1, 1) += kCovarianceDilation;
    // Keep the matrix exactly symmetric regardless of rounding.
    pg.cov2d(1, 0) = pg.cov2d(0, 1);

    const double radius = 3.0 * std::sqrt(max_eigenvalue(pg.cov2d));
    const bool off_image = pg.mean2d.x() + radius < -0.5 ||
                           pg.mean2d.x() - radius > cam.width - 0.5 ||
                           pg.mean2d.y() + radius < -0.5 ||
                           pg.mean2d.y() - radius > cam.height - 0.5;
    if (!off_image) pg.radius = radius;

    const Vec3 dir = (g.mu - center).normalized();
    sh_basis(dir, degree, basis);
    Vec3 raw = Vec3::Constant(0.5);
    for (std::size_t k = 0; k < basis.size(); ++k) raw += basis[k] * g.sh[k];
    pg.color = raw.cwiseMax(0.0).cwiseMin(1.0);

    if (extras != nullptr) {
      RenderState::Extra& ex = (*extras)[i];
      ex.jw = jw;
      ex.conic = pg.cov2d.inverse();
      ex.conic(1, 0) = ex.conic(0, 1);
      ex.view_dir = dir;
      for (int c = 0; c < 3; ++c) ex.color_pass[c] = (raw[c] >= 0.0 && raw[c] <= 1.0) ? 1.0 : 0.0;
    }
  }
}

}  // namespace

AppearanceGradients AppearanceGradients::zeros(std::size_t count, int coeffs_per_channel) {
  AppearanceGradients g;
  g.d_log_scale.assign(count, Vec3::Zero());
  g.d_quat.assign(count, Vec4::Zero());
  g.d_logit_opacity.assign(count, 0.0);
  g.d_sh.assign(count * static_cast<std::size_t>(coeffs_per_channel), Vec3::Zero());
  return g;
}

void sh_basis(const Vec3& dir, int degree, std::span<double> out) {
  out[0] = kShC0;
  if (degree < 1) return;
  const double x = dir.x(), y = dir.y(), z = dir.z();
  out[1] = -kShC1 * y;
  out[2] = kShC1 * z;
  out[3] = -kShC1 * x;
  if (degree < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  out[4] = kShC2[0] * x * y;
  out[5] = kShC2[1] * y * z;
  out[6] = kShC2[2] * (2.0 * zz - xx - yy);
  out[7] = kShC2[3] * x * z;
  out[8] = kShC2[4] * (xx - yy);
  if (degree < 3) return;
  out[9] = kShC3[0] * y * (3.0 * xx - yy);
  out[10] = kShC3[1] * x * y * z;
  out[11] = kShC3[2] * y * (4.0 * zz - xx - yy);
  out[12] = kShC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kShC3[4] * x * (4.0 * zz - xx - yy);
  out[14] = kShC3[5] * z * (xx - yy);
  out[15] = kShC3[6] * x * (xx - 3.0 * yy);
}

Vec3 evaluate_sh(std::span<const Vec3> coeffs, const Vec3& view_dir, int degree) {
  std::array<double, 16> basis{};
  sh_basis(view_dir, degree, basis);
  Vec3 raw = Vec3::Constant(0.5);
  const auto n = static_cast<std::size_t>(sh_coeff_count(degree));
  for (std::size_t k = 0; k < n && k < coeffs.size(); ++k) raw += basis[k] * coeffs[k];
  return raw.cwiseMax(0.0).cwiseMin(1.0);
}

std::vector<ProjectedGaussian> project(const GaussianCloud& cloud, const Pose& pose,
                                       const Camera& cam) {
  std::vector<ProjectedGaussian> out;
  project_into(cloud, pose, cam, out, nullptr);
  return out;
}

RenderState rasterize(const GaussianCloud& cloud, const Pose& pose, const Camera& cam,
                      const RenderSettings& settings) {
  RenderState st;
  st.cam = cam;
  st.settings = settings;
  project_into(cloud, pose, cam, st.projected, &st.extras);

  const std::size_t count = cloud.size();
  RenderOutput& out = st.output;
  out.image = Image(cam.width, cam.height);
  out.visibility_increment.assign(count, 0);
  out.transmittance.assign(cam.pixel_count(), 1.0);
  st.last_contributor.assign(cam.pixel_count(), 0);

  std::vector<std::uint32_t> order;
  order.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (st.projected[i].radius > 0.0) {
      order.push_back(static_cast<std::uint32_t>(i));
      out.visibility_increment[i] = 1;
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return st.projected[a].depth < st.projected[b].depth;
  });

  st.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  st.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
  st.tile_lists.assign(static_cast<std::size_t>(st.tiles_x * st.tiles_y), {});
  for (const std::uint32_t id : order) {
    const PixelBox b = cutoff_box(st.projected[id], cam);
    if (b.x0 > b.x1 || b.y0 > b.y1) continue;
    for (int ty = b.y0 / kTileSize; ty <= b.y1 / kTileSize; ++ty) {
      for (int tx = b.x0 / kTileSize; tx <= b.x1 / kTileSize; ++tx) {
        st.tile_lists[static_cast<std::size_t>(ty * st.tiles_x + tx)].push_back(id);
      }
    }
  }

  for (int ty = 0; ty < st.tiles_y; ++ty) {
    for (int tx = 0; tx < st.tiles_x; ++tx) {
      TileKernel kernel(st, st.tile_lists[static_cast<std::size_t>(ty * st.tiles_x + tx)]);
      const int px_begin = tx * kTileSize;
      const int px_end = std::min(cam.width, (tx + 1) * kTileSize);
      const int py_end = std::min(cam.height, (ty + 1) * kTileSize);
      for (int py = ty * kTileSize; py < py_end; ++py) {
        kernel.start_row(px_begin, py);
        for (int px = px_begin; px < px_end; ++px, kernel.step()) {
          double t = 1.0;
          Vec3 color = Vec3::Zero();
          std::int32_t last = 0;
          for (std::size_t slot = 0; slot < kernel.size(); ++slot) {
            const double gval = kernel.value(slot);
            if (gval < kCutoffValue) continue;
            const double alpha = std::min(kMaxAlpha, kernel.opacity(slot) * gval);
            const double next_t = t * (1.0 - alpha);
            if (next_t < kMinTransmittance) break;
            color += kernel.color(slot) * (alpha * t);
            t = next_t;
            last = static_cast<std::int32_t>(slot + 1);
          }
          color += settings.background * t;
          const std::size_t pix = static_cast<std::size_t>(py) * cam.width + px;
          out.image.set_pixel(px, py, color);
          out.transmittance[pix] = t;
          st.last_contributor[pix] = last;
        }
      }
    }
  }
  return st;
}

RenderOutput render(const GaussianCloud& cloud, const Pose& pose, const Camera& cam,
                    const RenderSettings& settings) {
  return rasterize(cloud, pose, cam, settings).output;
}

AppearanceGradients backward(const RenderState& st, const GaussianCloud& cloud,
                             const Image& d_image) {
  const Camera& cam = st.cam;
  if (d_image.width() != cam.width || d_image.height() != cam.height) {
    throw Error(ErrorCode::kDimensionMismatch, "d_image does not match camera resolution");
  }
  const std::size_t count = cloud.size();
  const int ncoef = cloud.coeffs_per_channel();
  AppearanceGradients grads = AppearanceGradients::zeros(count, ncoef);

  std::vector<Vec3> d_color(count, Vec3::Zero());
  std::vector<double> d_opacity(count, 0.0);
  std::vector<Vec3> d_conic(count, Vec3::Zero());  // (A, B, C) of the conic
  std::vector<char> touched(count, 0);

  for (int ty = 0; ty < st.tiles_y; ++ty) {
    for (int tx = 0; tx < st.tiles_x; ++tx) {
      const auto& list = st.tile_lists[static_cast<std::size_t>(ty * st.tiles_x + tx)];
      TileKernel kernel(st, list);
      // Tile-local accumulators, scattered to the Gaussians once per tile.
      std::vector<Vec3> tile_color(list.size(), Vec3::Zero());
      std::vector<double> tile_opacity(list.size(), 0.0);
      std::vector<Vec3> tile_conic(list.size(), Vec3::Zero());
      std::vector<char> tile_touched(list.size(), 0);
      const int px_begin = tx * kTileSize;
      const int px_end = std::min(cam.width, (tx + 1) * kTileSize);
      const int py_end = std::min(cam.height, (ty + 1) * kTileSize);
      for (int py = ty * kTileSize; py < py_end; ++py) {
        kernel.start_row(px_begin, py);
        for (int px = px_begin; px < px_end; ++px, kernel.step()) {
          const std::size_t pix = static_cast<std::size_t>(py) * cam.width + px;
          const Vec3 dpix = d_image.pixel(px, py);
          if (dpix.isZero(0.0)) continue;
          double t = st.output.transmittance[pix];
          Vec3 behind = st.settings.background;
          for (std::int32_t slot = st.last_contributor[pix] - 1; slot >= 0; --slot) {
            const auto k = static_cast<std::size_t>(slot);
            const double gval = kernel.value(k);
            if (gval < kCutoffValue) continue;
            const double opacity = kernel.opacity(k);
            const Vec3& color = kernel.color(k);
            const double dx = px - kernel.mx(k);
            const double dy = py - kernel.my(k);
            const double raw_alpha = opacity * gval;
            const double alpha = std::min(kMaxAlpha, raw_alpha);
            t /= (1.0 - alpha);

            tile_color[k] += dpix * (alpha * t);
            const double d_alpha = (color - behind).dot(dpix) * t;
            behind = color * alpha + behind * (1.0 - alpha);
            tile_touched[k] = 1;
            if (raw_alpha >= kMaxAlpha) continue;

            const double d_g = d_alpha * gval;
            tile_opacity[k] += d_g;
            tile_conic[k] += d_g * Vec3(-0.5 * dx * dx, -dx * dy, -0.5 * dy * dy);
          }
        }
      }
      for (std::size_t k = 0; k < list.size(); ++k) {
        if (!tile_touched[k]) continue;
        const std::uint32_t id = list[k];
        touched[id] = 1;
        d_color[id] += tile_color[k];
        d_opacity[id] += tile_opacity[k];
        d_conic[id] += tile_conic[k] * kernel.opacity(k);
      }
    }
  }

  std::vector<double> basis(static_cast<std::size_t>(ncoef));
  for (std::size_t i = 0; i < count; ++i) {
    if (!touched[i]) continue;
    const Gaussian& g = cloud.gaussians[i];
    const ProjectedGaussian& pg = st.projected[i];
    const RenderState::Extra& ex = st.extras[i];

    grads.d_logit_opacity[i] = d_opacity[i] * pg.opacity * (1.0 - pg.opacity);

    const Vec3 dc = (d_color[i].array() * ex.color_pass).matrix();
    sh_basis(ex.view_dir, cloud.sh_degree, basis);
    for (int k = 0; k < ncoef; ++k) {
      grads.d_sh[i * static_cast<std::size_t>(ncoef) + static_cast<std::size_t>(k)] =
          basis[static_cast<std::size_t>(k)] * dc;
    }

    Mat2 g_conic;
    g_conic << d_conic[i][0], 0.5 * d_conic[i][1], 0.5 * d_conic[i][1], d_conic[i][2];
    const Mat2 g_cov = -ex.conic * g_conic * ex.conic;
    const Mat3 g_sigma = ex.jw.transpose() * g_cov * ex.jw;

    const double qnorm = g.quat.norm();
    const Vec4 qhat = g.quat / qnorm;
    const Mat3 rot = quat_to_rotation(g.quat);
    const Vec3 scale = g.log_scale.array().exp().matrix();
    const Mat3 m = rot * scale.asDiagonal();
    const Mat3 g_m = (g_sigma + g_sigma.transpose()) * m;

    const Mat3 g_scale_full = rot.transpose() * g_m;
    for (int j = 0; j < 3; ++j) grads.d_log_scale[i][j] = g_scale_full(j, j) * scale[j];

    const Mat3 g_rot = g_m * scale.asDiagonal();
    const Vec4 g_qhat = rotation_grad_to_quat(qhat, g_rot);
    grads.d_quat[i] = (g_qhat - qhat * qhat.dot(g_qhat)) / qnorm;
  }
  return grads;
}

AppearanceGradients render_backward(const GaussianCloud& cloud, const Pose& pose,
                                    const Camera& cam, const Image& d_image,
                                    const RenderSettings& settings) {
  return backward(rasterize(cloud, pose, cam, settings), cloud, d_image);
}

}  // namespace f3dgs
