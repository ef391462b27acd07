#include "f3dgs/federated.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "f3dgs/error.hpp"
#include "f3dgs/parallel.hpp"

namespace f3dgs {

std::size_t appearance_width(int sh_degree) {
  return 3 + 4 + 1 + 3 * static_cast<std::size_t>(sh_coeff_count(sh_degree));
}

OptimizerState OptimizerState::for_cloud(const GaussianCloud& cloud) {
  OptimizerState st;
  const std::size_t n = cloud.size() * appearance_width(cloud.sh_degree);
  st.first_moment.assign(n, 0.0);
  st.second_moment.assign(n, 0.0);
  return st;
}

void adam_step(GaussianCloud& cloud, const AppearanceGradients& grads, const LearningRates& lr,
               OptimizerState& st) {
  const std::size_t m = cloud.size();
  const int ncoef = cloud.coeffs_per_channel();
  const std::size_t width = appearance_width(cloud.sh_degree);
  if (grads.size() != m || st.first_moment.size() != m * width) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match the cloud");
  }
  ++st.step;
  const double bias1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bias2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));

  auto update = [&](std::size_t slot, double& param, double grad, double rate) {
    double& m1 = st.first_moment[slot];
    double& m2 = st.second_moment[slot];
    m1 = st.beta1 * m1 + (1.0 - st.beta1) * grad;
    m2 = st.beta2 * m2 + (1.0 - st.beta2) * grad * grad;
    param -= rate * (m1 / bias1) / (std::sqrt(m2 / bias2) + st.epsilon);
  };

  for (std::size_t i = 0; i < m; ++i) {
    Gaussian& g = cloud.gaussians[i];
    std::size_t slot = i * width;
    for (int a = 0; a < 3; ++a) update(slot++, g.log_scale[a], grads.d_log_scale[i][a], lr.log_scale);
    for (int a = 0; a < 4; ++a) update(slot++, g.quat[a], grads.d_quat[i][a], lr.quat);
    update(slot++, g.logit_opacity, grads.d_logit_opacity[i], lr.logit_opacity);
    for (int k = 0; k < ncoef; ++k) {
      const Vec3& d = grads.d_sh[i * static_cast<std::size_t>(ncoef) + static_cast<std::size_t>(k)];
      const double rate = k == 0 ? lr.sh_dc : lr.sh_rest;
      for (int c = 0; c < 3; ++c) update(slot++, g.sh[static_cast<std::size_t>(k)][c], d[c], rate);
    }
    const double qn = g.quat.norm();
    if (qn > 0.0) g.quat /= qn;
  }
}

LossResult compute_loss(const Image& target, const Image& rendered, double lambda) {
  if (!target.same_shape(rendered)) {
    throw Error(ErrorCode::kDimensionMismatch, "loss: image dimensions differ");
  }
  LossResult out;
  out.gradient = Image(rendered.width(), rendered.height());
  const auto t = target.data();
  const auto r = rendered.data();
  const auto g = out.gradient.data();
  const double inv_n = 1.0 / static_cast<double>(r.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - t[i];
    l1 += std::abs(d);
    g[i] = (1.0 - lambda) * inv_n * static_cast<double>((d > 0.0) - (d < 0.0));
  }
  out.value = (1.0 - lambda) * l1 * inv_n;
  if (lambda != 0.0) {
    const SsimWithGradient s = ssim_with_gradient(target, rendered);
    out.value += lambda * (1.0 - s.value);
    const auto sg = s.gradient.data();
    for (std::size_t i = 0; i < r.size(); ++i) g[i] -= lambda * sg[i];
  }
  return out;
}

ClientUpdate local_train(const GaussianCloud& global, const ClientPartition& partition,
                         std::span<const Frame> frames, const Camera& cam,
                         const LocalTrainSettings& settings) {
  global.validate();
  cam.validate();
  if (settings.steps < 1) throw Error(ErrorCode::kConfig, "local_train needs at least one step");
  if (partition.train_indices.empty()) {
    throw Error(ErrorCode::kConfig,
                "client " + std::to_string(partition.client_id) + " has no training frames");
  }
  for (const std::int64_t t : partition.train_indices) {
    if (t < 0 || static_cast<std::size_t>(t) >= frames.size()) {
      throw Error(ErrorCode::kOutOfRange, "training frame " + std::to_string(t) + " missing");
    }
  }

  GaussianCloud cloud = global;
  OptimizerState state = OptimizerState::for_cloud(cloud);
  std::vector<std::uint32_t> visibility(cloud.size(), 0);
  const auto n_train = static_cast<std::int64_t>(partition.train_indices.size());
  const std::int64_t offset = static_cast<std::int64_t>(settings.round) * settings.steps;

  for (std::int64_t s = 0; s < settings.steps; ++s) {
    const std::int64_t t =
        partition.train_indices[static_cast<std::size_t>((offset + s) % n_train)];
    const Frame& frame = frames[static_cast<std::size_t>(t)];
    const RenderState rs = rasterize(cloud, frame.pose, cam, settings.render);
    for (std::size_t i = 0; i < visibility.size(); ++i) {
      visibility[i] += rs.output.visibility_increment[i];
    }
    const LossResult loss = compute_loss(frame.image, rs.output.image, settings.lambda);
    if (!std::isfinite(loss.value)) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  "client " + std::to_string(partition.client_id) + " step " +
                      std::to_string(s) + ": loss is not finite");
    }
    const AppearanceGradients grads = backward(rs, cloud, loss.gradient);
    adam_step(cloud, grads, settings.lr, state);
  }
  return make_update(cloud, partition.client_id, settings.round, std::move(visibility));
}

GaussianCloud aggregate(const GaussianCloud& incumbent, std::span<const ClientUpdate> updates) {
  incumbent.validate();
  const std::size_t m = incumbent.size();
  std::vector<const ClientUpdate*> ordered;
  ordered.reserve(updates.size());
  for (const ClientUpdate& u : updates) {
    u.validate();
    if (u.size() != m || static_cast<int>(u.sh_degree) != incumbent.sh_degree) {
      throw Error(ErrorCode::kShapeMismatch,
                  "client " + std::to_string(u.client_id) + " sent " + std::to_string(u.size()) +
                      " gaussians, server holds " + std::to_string(m));
    }
    if (u.round != updates.front().round) {
      throw Error(ErrorCode::kShapeMismatch, "client updates come from different rounds");
    }
    ordered.push_back(&u);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ClientUpdate* a, const ClientUpdate* b) {
                     return a->client_id < b->client_id;
                   });

  GaussianCloud out = incumbent;
  const auto ncoef = static_cast<std::size_t>(incumbent.coeffs_per_channel());
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (const ClientUpdate* u : ordered) total += u->visibility[i];
    if (total == 0.0) continue;

    Gaussian& g = out.gaussians[i];
    const Vec4 reference = incumbent.gaussians[i].quat;
    Vec3 log_scale = Vec3::Zero();
    Vec4 quat = Vec4::Zero();
    double opacity = 0.0;
    std::vector<Vec3> sh(ncoef, Vec3::Zero());
    for (const ClientUpdate* u : ordered) {
      const double w = u->visibility[i] / (total + kAggregationEpsilon);
      if (w == 0.0) continue;
      for (int a = 0; a < 3; ++a) log_scale[a] += w * u->log_scale[3 * i + a];
      Vec4 q(u->quat[4 * i], u->quat[4 * i + 1], u->quat[4 * i + 2], u->quat[4 * i + 3]);
      if (q.dot(reference) < 0.0) q = -q;
      quat += w * q;
      opacity += w * u->logit_opacity[i];
      for (int c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < ncoef; ++k) {
          sh[k][c] += w * u->sh[(3 * i + static_cast<std::size_t>(c)) * ncoef + k];
        }
      }
    }
    g.log_scale = log_scale;
    g.quat = quat.normalized();
    g.logit_opacity = opacity;
    g.sh = std::move(sh);
  }
  return out;
}

FederatedResult run_federated(const FederatedConfig& config,
                              std::span<const ClientPartition> partitions,
                              std::span<const Frame> frames, const Camera& cam,
                              const GaussianCloud& initial) {
  initial.validate();
  cam.validate();
  if (partitions.empty()) throw Error(ErrorCode::kConfig, "run_federated needs a client");
  if (config.schedule.rounds < 1 || config.schedule.local_steps < 1) {
    throw Error(ErrorCode::kConfig, "rounds and local steps must be positive");
  }
  const std::size_t k_clients = partitions.size();

  FederatedResult result;
  // The server state is kept at wire precision so broadcasts, model files
  // and evaluation all see the same values.
  GaussianCloud incumbent = initial;
  apply_appearance(make_update(incumbent, kServerId, 0), incumbent);
  for (std::int64_t r = 0; r < config.schedule.rounds; ++r) {
    const auto round = static_cast<std::uint32_t>(r);
    const std::vector<std::uint8_t> broadcast =
        encode_update(make_update(incumbent, kServerId, round));

    std::vector<std::vector<std::uint8_t>> wire(k_clients);
    parallel_for(k_clients, config.threads, [&](std::size_t k) {
      try {
        GaussianCloud local = initial;
        apply_appearance(decode_update(broadcast), local);
        LocalTrainSettings settings;
        settings.steps = config.schedule.local_steps;
        settings.lambda = config.lambda;
        settings.lr = config.lr;
        settings.render = config.render;
        settings.round = round;
        wire[k] = encode_update(local_train(local, partitions[k], frames, cam, settings));
      } catch (const Error& e) {
        throw Error(e.code(), "round " + std::to_string(r + 1) + " client " +
                                  std::to_string(partitions[k].client_id) + ": " + e.what());
      }
    });

    std::vector<ClientUpdate> updates;
    updates.reserve(k_clients);
    for (const auto& bytes : wire) updates.push_back(decode_update(bytes));
    incumbent = aggregate(incumbent, updates);
    apply_appearance(make_update(incumbent, kServerId, round), incumbent);

    if (config.evaluate_rounds) {
      RoundMetrics metrics;
      metrics.round = r + 1;
      metrics.local.resize(k_clients);
      metrics.global_per_client.resize(k_clients);
      parallel_for(2 * k_clients, config.threads, [&](std::size_t job) {
        const std::size_t k = job % k_clients;
        if (job < k_clients) {
          GaussianCloud local = initial;
          apply_appearance(updates[k], local);
          metrics.local[k] = evaluate_local(local, partitions[k], frames, cam, config.render);
        } else {
          EvalReport rep = evaluate_local(incumbent, partitions[k], frames, cam, config.render);
          rep.scope = EvalScope::kGlobal;
          metrics.global_per_client[k] = rep;
        }
      });
      metrics.global = weighted_sequence_report(metrics.global_per_client);
      result.history.push_back(std::move(metrics));
    }
    std::sort(updates.begin(), updates.end(),
              [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });
    result.last_updates = std::move(updates);
  }
  result.global = std::move(incumbent);
  return result;
}

}  // namespace f3dgs
