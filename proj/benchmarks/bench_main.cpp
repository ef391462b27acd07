#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "f3dgs/client_update.hpp"
#include "f3dgs/federated.hpp"
#include "f3dgs/metrics.hpp"
#include "f3dgs/renderer.hpp"
#include "f3dgs/scene_init.hpp"
#include "f3dgs/synth.hpp"

namespace {

using namespace f3dgs;

const SyntheticScene& corridor() {
  static const SyntheticScene scene = [] {
    SceneParams p;
    p.n_frames = 16;
    return generate_corridor_scene(p);
  }();
  return scene;
}

GaussianCloud initial_cloud() {
  const SyntheticScene& s = corridor();
  return initialize_gaussians(s.point_cloud, s.point_cloud.size(), s.ground_truth.sh_degree);
}

void BM_Render(benchmark::State& state) {
  const SyntheticScene& s = corridor();
  const GaussianCloud cloud = initial_cloud();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(cloud, s.frames[5].pose, s.camera));
  }
}
BENCHMARK(BM_Render)->Unit(benchmark::kMillisecond);

void BM_RenderBackward(benchmark::State& state) {
  const SyntheticScene& s = corridor();
  const GaussianCloud cloud = initial_cloud();
  const RenderState rs = rasterize(cloud, s.frames[5].pose, s.camera);
  const LossResult loss = compute_loss(s.frames[5].image, rs.output.image, kDefaultLossLambda);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(rs, cloud, loss.gradient));
  }
}
BENCHMARK(BM_RenderBackward)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const SyntheticScene& s = corridor();
  const ClientPartition part = partition_dataset(16, 16).front();
  const GaussianCloud cloud = initial_cloud();
  LocalTrainSettings settings;
  settings.steps = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_train(cloud, part, s.frames, s.camera, settings));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_SsimWithGradient(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int side = static_cast<int>(state.range(0));
  Image a(side, side);
  Image b(side, side);
  for (double& v : a.data()) v = u(rng);
  for (double& v : b.data()) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ssim_with_gradient(a, b));
}
BENCHMARK(BM_SsimWithGradient)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Aggregate(benchmark::State& state) {
  const GaussianCloud cloud = initial_cloud();
  std::mt19937_64 rng(2);
  std::vector<ClientUpdate> updates;
  for (std::uint32_t k = 0; k < static_cast<std::uint32_t>(state.range(0)); ++k) {
    std::vector<std::uint32_t> vis(cloud.size());
    for (auto& v : vis) v = static_cast<std::uint32_t>(rng() % 50);
    updates.push_back(make_update(cloud, k, 0, vis));
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(cloud, updates));
}
BENCHMARK(BM_Aggregate)->Arg(2)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_WireRoundTrip(benchmark::State& state) {
  const ClientUpdate u = make_update(initial_cloud(), 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(decode_update(encode_update(u)));
}
BENCHMARK(BM_WireRoundTrip)->Unit(benchmark::kMicrosecond);

void BM_KnnMeanDistances(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec3> pts(static_cast<std::size_t>(state.range(0)));
  for (Vec3& p : pts) p = Vec3(u(rng), u(rng), 0.1 * u(rng));
  for (auto _ : state) benchmark::DoNotOptimize(knn_mean_distances(pts));
}
BENCHMARK(BM_KnnMeanDistances)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
