#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "f3dgs/error.hpp"
#include "f3dgs/harness.hpp"

namespace {

struct Flags {
  std::string config_file;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> sets;

  std::string scene;
  std::string model;
  std::string frames;
  std::string schedules;
  bool centralized = false;
  std::optional<std::int64_t> rounds;
  std::optional<std::int64_t> local_steps;
  std::optional<std::int64_t> chunk_size;
  std::optional<std::int64_t> budget;
};

f3dgs::ExperimentConfig resolve(const Flags& f) {
  f3dgs::ExperimentConfig cfg;
  if (!f.config_file.empty()) cfg = f3dgs::load_config(f.config_file);
  f3dgs::apply_env_overrides(cfg, f3dgs::process_environment());
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw f3dgs::Error(f3dgs::ErrorCode::kConfig, "--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.rounds) cfg.rounds = *f.rounds;
  if (f.local_steps) cfg.local_steps = *f.local_steps;
  if (f.chunk_size) cfg.chunk_size = *f.chunk_size;
  if (f.budget) cfg.budget = *f.budget;
  if (f.centralized) cfg.centralized = true;
  cfg.validate();
  return cfg;
}

std::vector<std::int64_t> parse_indices(const std::string& text) {
  std::vector<std::int64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw f3dgs::Error(f3dgs::ErrorCode::kConfig, "bad frame index '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated Gaussian splatting experiments on synthetic corridor scenes", "f3dgs"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", f.sets, "override a config key (key=value)");

  auto* gen = app.add_subcommand("generate", "write a synthetic corridor scene to --out");

  auto* train = app.add_subcommand("train", "stitch, initialize and train on a scene");
  train->add_option("--scene", f.scene, "scene directory")->required();
  train->add_flag("--centralized", f.centralized, "single client over every frame");
  train->add_option("--rounds", f.rounds, "communication rounds R");
  train->add_option("--local-steps", f.local_steps, "local iterations T");
  train->add_option("--chunk-size", f.chunk_size, "frames per client C");
  train->add_option("--budget", f.budget, "required R * T");

  auto* ablate = app.add_subcommand("ablate-rounds", "train several R:T schedules at a fixed budget");
  ablate->add_option("--scene", f.scene, "scene directory")->required();
  ablate->add_option("--schedules", f.schedules, "comma-separated R:T pairs")->required();
  ablate->add_option("--budget", f.budget, "required R * T");
  ablate->add_option("--chunk-size", f.chunk_size, "frames per client C");

  auto* rend = app.add_subcommand("render", "render frames with a trained model");
  rend->add_option("--scene", f.scene, "scene directory")->required();
  rend->add_option("--model", f.model, "model.bin from train")->required();
  rend->add_option("--frames", f.frames, "comma-separated frame indices");

  CLI11_PARSE(app, argc, argv);

  try {
    const f3dgs::ExperimentConfig cfg = resolve(f);
    if (gen->parsed()) {
      f3dgs::cmd_generate(cfg, f.out);
    } else if (train->parsed()) {
      const auto outcome = f3dgs::cmd_train(cfg, f.scene, f.out);
      const auto& g = outcome.result.history.back().global;
      std::cout << "global psnr " << g.psnr << " ssim " << g.ssim << '\n';
    } else if (ablate->parsed()) {
      for (const auto& row : f3dgs::cmd_ablate_rounds(cfg, f.scene, f3dgs::parse_schedules(f.schedules), f.out)) {
        std::cout << "R=" << row.rounds << " T=" << row.local_steps << " local psnr " << row.local.psnr
                  << " global psnr " << row.global.psnr << '\n';
      }
    } else if (rend->parsed()) {
      const auto images = f3dgs::cmd_render(cfg, f.model, f.scene, parse_indices(f.frames), f.out);
      std::cout << "rendered " << images.size() << " frames\n";
    }
  } catch (const f3dgs::Error& e) {
    std::cerr << "f3dgs: error[" << f3dgs::error_code_name(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "f3dgs: error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
