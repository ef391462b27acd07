#include "f3dgs/metrics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "f3dgs/error.hpp"

namespace f3dgs {
namespace {

std::array<double, kSsimWindow> make_taps() {
  std::array<double, kSsimWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

const std::array<double, kSsimWindow>& taps() {
  static const std::array<double, kSsimWindow> t = make_taps();
  return t;
}

// Single-channel plane, row-major.
struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.0) {}
  double& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

// Valid-mode separable filtering: output is (w - 10) x (h - 10).
Plane filter_valid(const Plane& in) {
  const auto& k = taps();
  const int ow = in.w - kSsimWindow + 1;
  const int oh = in.h - kSsimWindow + 1;
  Plane horiz(ow, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<std::size_t>(i)] * in(x + i, y);
      horiz(x, y) = s;
    }
  }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[static_cast<std::size_t>(i)] * horiz(x, y + i);
      out(x, y) = s;
    }
  }
  return out;
}

// Adjoint of filter_valid: scatters a map-sized field back to image size.
Plane filter_adjoint(const Plane& in, int w, int h) {
  const auto& k = taps();
  Plane vert(in.w, h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      const double f = in(x, y);
      for (int i = 0; i < kSsimWindow; ++i) vert(x, y + i) += k[static_cast<std::size_t>(i)] * f;
    }
  }
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      const double f = vert(x, y);
      for (int i = 0; i < kSsimWindow; ++i) out(x + i, y) += k[static_cast<std::size_t>(i)] * f;
    }
  }
  return out;
}

Plane channel(const Image& img, int c) {
  Plane p(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) p(x, y) = img.at(x, y, c);
  }
  return p;
}

Plane product(const Plane& a, const Plane& b) {
  Plane p(a.w, a.h);
  for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
  return p;
}

void check_ssim_shapes(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch, "ssim: image dimensions differ");
  }
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw Error(ErrorCode::kWindowTooLarge,
                "ssim: image " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " smaller than the 11x11 window");
  }
}

// Per-channel SSIM; fills d(mean ssim)/d(y) when grad is non-null.
double ssim_channel(const Plane& x, const Plane& y, Plane* grad) {
  const Plane mu_x = filter_valid(x);
  const Plane mu_y = filter_valid(y);
  const Plane e_xx = filter_valid(product(x, x));
  const Plane e_yy = filter_valid(product(y, y));
  const Plane e_xy = filter_valid(product(x, y));

  const std::size_t n = mu_x.v.size();
  double total = 0.0;
  Plane d_mu(mu_x.w, mu_x.h);
  Plane d_var(mu_x.w, mu_x.h);
  Plane d_cov(mu_x.w, mu_x.h);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mx = mu_x.v[i];
    const double my = mu_y.v[i];
    const double var_x = e_xx.v[i] - mx * mx;
    const double var_y = e_yy.v[i] - my * my;
    const double cov = e_xy.v[i] - mx * my;
    const double l_num = 2.0 * mx * my + kSsimC1;
    const double l_den = mx * mx + my * my + kSsimC1;
    const double c_num = 2.0 * cov + kSsimC2;
    const double c_den = var_x + var_y + kSsimC2;
    const double s = (l_num * c_num) / (l_den * c_den);
    total += s;
    if (grad != nullptr) {
      const double ds_dmu = (2.0 * mx * c_num) / (l_den * c_den) - s * 2.0 * my / l_den;
      const double ds_dvar = -s / c_den;
      const double ds_dcov = 2.0 * l_num / (l_den * c_den);
      d_mu.v[i] = inv_n * (ds_dmu - 2.0 * my * ds_dvar - mx * ds_dcov);
      d_var.v[i] = inv_n * ds_dvar;
      d_cov.v[i] = inv_n * ds_dcov;
    }
  }
  if (grad != nullptr) {
    const Plane a = filter_adjoint(d_mu, x.w, x.h);
    const Plane b = filter_adjoint(d_var, x.w, x.h);
    const Plane c = filter_adjoint(d_cov, x.w, x.h);
    *grad = Plane(x.w, x.h);
    for (std::size_t i = 0; i < grad->v.size(); ++i) {
      grad->v[i] = a.v[i] + 2.0 * y.v[i] * b.v[i] + x.v[i] * c.v[i];
    }
  }
  return total * inv_n;
}

}  // namespace

std::span<const double> ssim_window_taps() { return taps(); }

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch, "psnr: image dimensions differ");
  }
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(da.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, std::max(0.0, 10.0 * std::log10(1.0 / mse)));
}

double ssim(const Image& a, const Image& b) {
  check_ssim_shapes(a, b);
  double total = 0.0;
  for (int c = 0; c < 3; ++c) total += ssim_channel(channel(a, c), channel(b, c), nullptr);
  return total / 3.0;
}

SsimWithGradient ssim_with_gradient(const Image& target, const Image& rendered) {
  check_ssim_shapes(target, rendered);
  SsimWithGradient out;
  out.gradient = Image(rendered.width(), rendered.height());
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    Plane g(rendered.width(), rendered.height());
    total += ssim_channel(channel(target, c), channel(rendered, c), &g);
    for (int y = 0; y < rendered.height(); ++y) {
      for (int x = 0; x < rendered.width(); ++x) out.gradient.at(x, y, c) = g(x, y) / 3.0;
    }
  }
  out.value = total / 3.0;
  return out;
}

EvalReport evaluate_local(const GaussianCloud& cloud, const ClientPartition& partition,
                          std::span<const Frame> frames, const Camera& cam,
                          const RenderSettings& settings) {
  if (partition.val_indices.empty()) {
    throw Error(ErrorCode::kConfig,
                "client " + std::to_string(partition.client_id) + " has no validation frames");
  }
  EvalReport report;
  report.scope = EvalScope::kLocal;
  report.client_id = partition.client_id;
  for (const std::int64_t t : partition.val_indices) {
    if (t < 0 || static_cast<std::size_t>(t) >= frames.size()) {
      throw Error(ErrorCode::kOutOfRange, "validation frame " + std::to_string(t) + " missing");
    }
    const Frame& f = frames[static_cast<std::size_t>(t)];
    const Image rendered = render(cloud, f.pose, cam, settings).image;
    report.psnr += psnr(f.image, rendered);
    report.ssim += ssim(f.image, rendered);
    ++report.n_images;
  }
  report.psnr /= static_cast<double>(report.n_images);
  report.ssim /= static_cast<double>(report.n_images);
  return report;
}

EvalReport weighted_sequence_report(std::span<const EvalReport> per_client) {
  EvalReport out;
  out.scope = EvalScope::kGlobal;
  if (per_client.size() == 1) {
    out.psnr = per_client[0].psnr;
    out.ssim = per_client[0].ssim;
    out.n_images = per_client[0].n_images;
    return out;
  }
  for (const EvalReport& r : per_client) {
    out.psnr += r.psnr * static_cast<double>(r.n_images);
    out.ssim += r.ssim * static_cast<double>(r.n_images);
    out.n_images += r.n_images;
  }
  if (out.n_images == 0) throw Error(ErrorCode::kConfig, "no validation images to weight");
  out.psnr /= static_cast<double>(out.n_images);
  out.ssim /= static_cast<double>(out.n_images);
  return out;
}

EvalReport evaluate_global(const GaussianCloud& cloud,
                           std::span<const ClientPartition> partitions,
                           std::span<const Frame> frames, const Camera& cam,
                           const RenderSettings& settings) {
  if (partitions.empty()) throw Error(ErrorCode::kConfig, "evaluate_global needs partitions");
  std::vector<EvalReport> per_client;
  per_client.reserve(partitions.size());
  for (const ClientPartition& p : partitions) {
    per_client.push_back(evaluate_local(cloud, p, frames, cam, settings));
  }
  return weighted_sequence_report(per_client);
}

}  // namespace f3dgs
