#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "f3dgs/partition.hpp"
#include "f3dgs/renderer.hpp"
#include "f3dgs/types.hpp"

namespace f3dgs {

constexpr double kPsnrCap = 100.0;
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

/// Peak 1.0, computed over all channels. Identical images give kPsnrCap.
double psnr(const Image& a, const Image& b);

/// Mean of the valid-window SSIM map (11x11 Gaussian, sigma 1.5), averaged
/// over channels. Both sides must be at least 11 pixels.
double ssim(const Image& a, const Image& b);

/// SSIM plus d(ssim)/d(rendered) for every channel of `rendered`.
struct SsimWithGradient {
  double value = 0.0;
  Image gradient;
};
SsimWithGradient ssim_with_gradient(const Image& target, const Image& rendered);

/// Normalized 1D taps of the SSIM window; the 2D window is their outer product.
std::span<const double> ssim_window_taps();

enum class EvalScope { kLocal, kGlobal };

struct EvalReport {
  EvalScope scope = EvalScope::kGlobal;
  std::int64_t client_id = -1;  // -1 for global reports
  double psnr = 0.0;
  double ssim = 0.0;
  std::int64_t n_images = 0;
};

/// Renders every validation frame of `partition` and averages the metrics.
/// `frames[t]` must be frame t of the sequence.
EvalReport evaluate_local(const GaussianCloud& cloud, const ClientPartition& partition,
                          std::span<const Frame> frames, const Camera& cam,
                          const RenderSettings& settings = {});

/// Scores the cloud on the union of all validation frames. Per-client means
/// are combined with weights equal to the clients' validation counts.
EvalReport evaluate_global(const GaussianCloud& cloud,
                           std::span<const ClientPartition> partitions,
                           std::span<const Frame> frames, const Camera& cam,
                           const RenderSettings& settings = {});

/// Validation-count weighted mean of per-client reports.
EvalReport weighted_sequence_report(std::span<const EvalReport> per_client);

}  // namespace f3dgs
