#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "f3dgs/client_update.hpp"
#include "f3dgs/metrics.hpp"
#include "f3dgs/partition.hpp"
#include "f3dgs/renderer.hpp"
#include "f3dgs/types.hpp"

namespace f3dgs {

/// Regularizer in the visibility weights v / (sum v + eps).
constexpr double kAggregationEpsilon = 1e-8;
constexpr double kDefaultLossLambda = 0.2;

struct LearningRates {
  double log_scale = 5e-3;
  double quat = 1e-3;
  double logit_opacity = 5e-2;
  double sh_dc = 2.5e-3;
  double sh_rest = 1.25e-4;

  static LearningRates zero() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

/// Adam moments over the flattened appearance parameters.
struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;

  double beta1 = 0.9;
  // Second-moment memory of ~100 steps, shorter than any local round, so the
  // effective step size does not depend on how often moments are reset.
  double beta2 = 0.99;
  double epsilon = 1e-15;

  static OptimizerState for_cloud(const GaussianCloud& cloud);
};

/// Appearance parameter count per Gaussian: log_scale, quat, opacity, SH.
std::size_t appearance_width(int sh_degree);

/// One Adam update of every appearance parameter. Quaternions are
/// renormalized afterwards; positions are left alone.
void adam_step(GaussianCloud& cloud, const AppearanceGradients& grads, const LearningRates& lr,
               OptimizerState& state);

struct LossResult {
  double value = 0.0;
  Image gradient;  // dL/d(rendered)
};

/// (1 - lambda) * mean|target - rendered| + lambda * (1 - SSIM).
LossResult compute_loss(const Image& target, const Image& rendered, double lambda);

struct LocalTrainSettings {
  std::int64_t steps = 1;
  double lambda = kDefaultLossLambda;
  LearningRates lr;
  RenderSettings render;
  std::uint32_t round = 0;  // offsets the round-robin frame schedule
};

/// T Adam steps on the partition's training frames, frozen positions.
/// Throws NonFiniteLoss if the loss diverges.
ClientUpdate local_train(const GaussianCloud& global, const ClientPartition& partition,
                         std::span<const Frame> frames, const Camera& cam,
                         const LocalTrainSettings& settings);

/// Visibility-weighted merge of client updates into the incumbent cloud.
/// Gaussians nobody saw keep their incumbent values; positions always do.
GaussianCloud aggregate(const GaussianCloud& incumbent, std::span<const ClientUpdate> updates);

struct RoundSchedule {
  std::int64_t rounds = 1;
  std::int64_t local_steps = 1;

  std::int64_t budget() const { return rounds * local_steps; }
};

struct FederatedConfig {
  RoundSchedule schedule;
  double lambda = kDefaultLossLambda;
  LearningRates lr;
  RenderSettings render;
  unsigned threads = 1;
  bool evaluate_rounds = true;
};

struct RoundMetrics {
  std::int64_t round = 0;  // 1-based
  std::vector<EvalReport> local;         // each client's own model, own val frames
  std::vector<EvalReport> global_per_client;  // aggregated model, per client val frames
  EvalReport global;                     // aggregated model, union of val frames
};

struct FederatedResult {
  GaussianCloud global;
  std::vector<RoundMetrics> history;
  std::vector<ClientUpdate> last_updates;  // final round, ordered by client id
};

FederatedResult run_federated(const FederatedConfig& config,
                              std::span<const ClientPartition> partitions,
                              std::span<const Frame> frames, const Camera& cam,
                              const GaussianCloud& initial);

}  // namespace f3dgs
