#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "f3dgs/federated.hpp"
#include "f3dgs/pose_stitch.hpp"
#include "f3dgs/scene_init.hpp"
#include "f3dgs/synth.hpp"

namespace f3dgs {

/// Every tunable of an experiment. Serialized as flat "key = value" lines;
/// the same keys are accepted from config files, F3DGS_<KEY> environment
/// variables and --set flags, in increasing order of precedence.
struct ExperimentConfig {
  // scene
  std::uint64_t seed = 7;
  std::int64_t frames = 120;
  std::int64_t gaussians = 2000;
  int width = 64;
  int height = 64;
  double fov = 70.0;
  int sh_degree = 1;
  double init_noise = 0.005;
  std::int64_t init_count = 0;  // 0: same as gaussians
  double sim3_scale = 0.05;
  double sim3_rotation = 0.05;
  double sim3_translation = 0.2;

  // federation
  std::int64_t chunk_size = 48;
  std::int64_t rounds = 4;
  std::int64_t local_steps = 250;
  std::int64_t budget = 0;  // 0: unchecked
  double lambda = kDefaultLossLambda;
  LearningRates lr;
  bool centralized = false;

  // stitching
  std::int64_t tau = 30;
  DecayMode decay = DecayMode::kLinear;

  unsigned threads = 1;

  /// Throws Config on any out-of-range value.
  void validate() const;

  /// Sets one key from its textual value. Throws Config for unknown keys.
  void set(const std::string& key, const std::string& value);

  /// Deterministic "key = value" dump accepted by parse_config.
  std::string serialize() const;

  static std::vector<std::string> keys();
  SceneParams scene_params() const;
};

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Applies F3DGS_<UPPERCASE KEY> variables found in `env`.
void apply_env_overrides(ExperimentConfig& config, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_environment();

struct LoadedScene {
  Camera camera;
  std::vector<Frame> frames;  // poses are the anchor poses
  Trajectory anchor;
  std::vector<Trajectory> clients;
  ColoredPointCloud point_cloud;
  int sh_degree = 1;
  std::int64_t init_count = 0;
  std::uint64_t seed = 0;
};

LoadedScene load_scene(const std::filesystem::path& dir);

/// Writes the scene directory: scene.json, frames/%05d.ppm, traj_anchor.txt,
/// traj_client_%d.txt and init_cloud.ply.
void export_scene(const std::filesystem::path& dir, const SyntheticScene& scene,
                  const std::vector<Trajectory>& clients, const ExperimentConfig& config);

/// Stitched poses, initialized scaffold and partitions for a loaded scene.
struct PreparedRun {
  std::vector<Frame> frames;  // poses replaced by the stitched trajectory
  GaussianCloud initial;
  std::vector<ClientPartition> partitions;
};
PreparedRun prepare_run(const LoadedScene& scene, const ExperimentConfig& config);

void cmd_generate(const ExperimentConfig& config, const std::filesystem::path& out);

struct TrainOutcome {
  FederatedResult result;
  std::vector<ClientPartition> partitions;
};
TrainOutcome cmd_train(const ExperimentConfig& config, const std::filesystem::path& scene_dir,
                       const std::filesystem::path& out);

/// Parses "R:T,R:T,..." into (rounds, local_steps) pairs.
std::vector<std::pair<std::int64_t, std::int64_t>> parse_schedules(const std::string& text);

struct AblationRow {
  std::int64_t rounds = 0;
  std::int64_t local_steps = 0;
  EvalReport local;
  EvalReport global;
};
std::vector<AblationRow> cmd_ablate_rounds(
    const ExperimentConfig& config, const std::filesystem::path& scene_dir,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& schedules,
    const std::filesystem::path& out);

/// Renders the requested frames with a trained model into out/renders/.
/// An empty index list renders nothing and writes nothing.
std::vector<Image> cmd_render(const ExperimentConfig& config, const std::filesystem::path& model_file,
                              const std::filesystem::path& scene_dir,
                              const std::vector<std::int64_t>& frame_indices,
                              const std::filesystem::path& out);

/// metrics.csv body for a run, one row per (round, client, scope).
std::string metrics_csv(const FederatedResult& result);

}  // namespace f3dgs
