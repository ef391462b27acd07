#include "f3dgs/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "f3dgs/client_update.hpp"
#include "f3dgs/error.hpp"
#include "f3dgs/image_io.hpp"
#include <nlohmann/json.hpp>

extern char** environ;

namespace f3dgs {
namespace fs = std::filesystem;
namespace {

constexpr int kSceneFormatVersion = 1;
constexpr std::string_view kEnvPrefix = "F3DGS_";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kConfig, "bad value for " + key + ": '" + text + "'");
  }
  return value;
}

template <class T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

struct Field {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Field field(std::string name, T ExperimentConfig::*member) {
  Field f;
  f.name = name;
  f.set = [name, member](ExperimentConfig& c, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1") {
        c.*member = true;
      } else if (v == "false" || v == "0") {
        c.*member = false;
      } else {
        throw Error(ErrorCode::kConfig, "bad value for " + name + ": '" + v + "'");
      }
    } else {
      c.*member = parse_number<T>(name, v);
    }
  };
  f.get = [member](const ExperimentConfig& c) {
    if constexpr (std::is_same_v<T, bool>) {
      return std::string(c.*member ? "true" : "false");
    } else {
      return format_number(c.*member);
    }
  };
  return f;
}

Field lr_field(std::string name, double LearningRates::*member) {
  Field f;
  f.name = name;
  f.set = [name, member](ExperimentConfig& c, const std::string& v) {
    c.lr.*member = parse_number<double>(name, v);
  };
  f.get = [member](const ExperimentConfig& c) { return format_number(c.lr.*member); };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using C = ExperimentConfig;
    std::vector<Field> t;
    t.push_back(field("seed", &C::seed));
    t.push_back(field("frames", &C::frames));
    t.push_back(field("gaussians", &C::gaussians));
    t.push_back(field("width", &C::width));
    t.push_back(field("height", &C::height));
    t.push_back(field("fov", &C::fov));
    t.push_back(field("sh_degree", &C::sh_degree));
    t.push_back(field("init_noise", &C::init_noise));
    t.push_back(field("init_count", &C::init_count));
    t.push_back(field("sim3_scale", &C::sim3_scale));
    t.push_back(field("sim3_rotation", &C::sim3_rotation));
    t.push_back(field("sim3_translation", &C::sim3_translation));
    t.push_back(field("chunk_size", &C::chunk_size));
    t.push_back(field("rounds", &C::rounds));
    t.push_back(field("local_steps", &C::local_steps));
    t.push_back(field("budget", &C::budget));
    t.push_back(field("lambda", &C::lambda));
    t.push_back(lr_field("lr_log_scale", &LearningRates::log_scale));
    t.push_back(lr_field("lr_quat", &LearningRates::quat));
    t.push_back(lr_field("lr_opacity", &LearningRates::logit_opacity));
    t.push_back(lr_field("lr_sh_dc", &LearningRates::sh_dc));
    t.push_back(lr_field("lr_sh_rest", &LearningRates::sh_rest));
    t.push_back(field("centralized", &C::centralized));
    t.push_back(field("tau", &C::tau));
    Field decay;
    decay.name = "decay";
    decay.set = [](C& c, const std::string& v) {
      if (v == "linear") {
        c.decay = DecayMode::kLinear;
      } else if (v == "exponential") {
        c.decay = DecayMode::kExponential;
      } else {
        throw Error(ErrorCode::kConfig, "bad value for decay: '" + v + "'");
      }
    };
    decay.get = [](const C& c) {
      return std::string(c.decay == DecayMode::kLinear ? "linear" : "exponential");
    };
    t.push_back(decay);
    t.push_back(field("threads", &C::threads));
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfig, what);
}

std::string frame_name(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05lld.ppm", static_cast<long long>(index));
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  const std::string s = read_text(path);
  return {s.begin(), s.end()};
}

// Timestamps live only in log.txt so every other output stays reproducible.
class RunLog {
 public:
  explicit RunLog(const fs::path& path) : out_(path, std::ios::app) {
    if (!out_) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }

  void line(const std::string& msg) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    out_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << msg << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

void csv_row(std::ostringstream& out, std::int64_t round, const std::string& client,
             std::string_view scope, const EvalReport& r) {
  out << round << ',' << client << ',' << scope << ',' << fixed(r.psnr) << ',' << fixed(r.ssim)
      << ',' << r.n_images << ",NA\n";
}

// Refuses to clobber directories that were not produced by this tool.
void clear_output(const fs::path& dir, std::string_view marker) {
  if (!fs::exists(dir)) return;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, dir.string() + " exists and is not a directory");
  }
  if (!fs::is_empty(dir) && !fs::exists(dir / marker)) {
    throw Error(ErrorCode::kIo, "refusing to overwrite non-empty " + dir.string());
  }
  fs::remove_all(dir);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(frames >= 8, "frames must be >= 8");
  require(gaussians >= 16, "gaussians must be >= 16");
  require(width >= kSsimWindow && height >= kSsimWindow, "image side must be >= 11 pixels");
  require(fov > 0.0 && fov < 180.0, "fov must be in (0, 180)");
  require(sh_degree >= 0 && sh_degree <= 3, "sh_degree must be in [0, 3]");
  require(init_noise >= 0.0 && init_count >= 0, "init_noise and init_count must be >= 0");
  require(sim3_scale >= 0.0 && sim3_scale < 1.0, "sim3_scale must be in [0, 1)");
  require(sim3_rotation >= 0.0 && sim3_translation >= 0.0, "sim3 noise must be >= 0");
  require(chunk_size >= 1, "chunk_size must be >= 1");
  require(rounds >= 1 && local_steps >= 1, "rounds and local_steps must be >= 1");
  require(budget >= 0, "budget must be >= 0");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0, 1]");
  require(lr.log_scale >= 0.0 && lr.quat >= 0.0 && lr.logit_opacity >= 0.0 && lr.sh_dc >= 0.0 &&
              lr.sh_rest >= 0.0,
          "learning rates must be >= 0");
  require(tau >= 1, "tau must be >= 1");
  require(threads >= 1, "threads must be >= 1");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (f.name == key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw Error(ErrorCode::kConfig, "unknown config key '" + key + "'");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  for (const Field& f : fields()) out << f.name << " = " << f.get(*this) << '\n';
  return out.str();
}

std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> k;
  for (const Field& f : fields()) k.push_back(f.name);
  return k;
}

SceneParams ExperimentConfig::scene_params() const {
  SceneParams p;
  p.seed = seed;
  p.n_frames = frames;
  p.n_gaussians = static_cast<std::size_t>(gaussians);
  p.width = width;
  p.height = height;
  p.fov_degrees = fov;
  p.sh_degree = sh_degree;
  p.init_noise = init_noise;
  p.init_count = static_cast<std::size_t>(init_count);
  return p;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    base.set(trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const fs::path& path, ExperimentConfig base) {
  return parse_config(read_text(path), base);
}

void apply_env_overrides(ExperimentConfig& config, const std::map<std::string, std::string>& env) {
  for (const std::string& key : ExperimentConfig::keys()) {
    std::string name(kEnvPrefix);
    for (const char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const auto it = env.find(name);
    if (it != env.end()) config.set(key, it->second);
  }
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string_view entry(*e);
    if (!entry.starts_with(kEnvPrefix)) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return env;
}

void export_scene(const fs::path& dir, const SyntheticScene& scene,
                  const std::vector<Trajectory>& clients, const ExperimentConfig& config) {
  fs::create_directories(dir / "frames");
  for (const Frame& f : scene.frames) write_ppm(dir / "frames" / frame_name(f.timestamp_index), f.image);
  write_trajectory(dir / "traj_anchor.txt", scene.anchor);
  for (std::size_t k = 0; k < clients.size(); ++k) {
    write_trajectory(dir / ("traj_client_" + std::to_string(k) + ".txt"), clients[k]);
  }
  write_ply(dir / "init_cloud.ply", scene.point_cloud);

  const Camera& cam = scene.camera;
  nlohmann::ordered_json j;
  j["format"] = "f3dgs-scene";
  j["version"] = kSceneFormatVersion;
  j["seed"] = config.seed;
  j["frames"] = scene.frames.size();
  j["clients"] = clients.size();
  j["chunk_size"] = config.chunk_size;
  j["sh_degree"] = scene.ground_truth.sh_degree;
  j["init_count"] = config.init_count > 0 ? config.init_count : config.gaussians;
  j["camera"] = {{"width", cam.width}, {"height", cam.height}, {"fx", cam.fx}, {"fy", cam.fy},
                 {"cx", cam.cx},       {"cy", cam.cy},         {"near", cam.near}};
  write_text(dir / "scene.json", j.dump(2) + "\n");
}

LoadedScene load_scene(const fs::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(dir / "scene.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, (dir / "scene.json").string() + ": " + e.what());
  }
  LoadedScene s;
  try {
    if (j.at("format") != "f3dgs-scene") throw Error(ErrorCode::kParse, "not an f3dgs scene");
    if (j.at("version").get<int>() != kSceneFormatVersion) {
      throw Error(ErrorCode::kUnsupportedVersion, "scene version " + j.at("version").dump());
    }
    const auto& c = j.at("camera");
    s.camera.width = c.at("width").get<int>();
    s.camera.height = c.at("height").get<int>();
    s.camera.fx = c.at("fx").get<double>();
    s.camera.fy = c.at("fy").get<double>();
    s.camera.cx = c.at("cx").get<double>();
    s.camera.cy = c.at("cy").get<double>();
    s.camera.near = c.at("near").get<double>();
    s.sh_degree = j.at("sh_degree").get<int>();
    s.init_count = j.at("init_count").get<std::int64_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto n_frames = j.at("frames").get<std::int64_t>();
    const auto n_clients = j.at("clients").get<std::int64_t>();

    s.camera.validate();
    s.anchor = read_trajectory(dir / "traj_anchor.txt");
    for (std::int64_t k = 0; k < n_clients; ++k) {
      s.clients.push_back(read_trajectory(dir / ("traj_client_" + std::to_string(k) + ".txt")));
    }
    s.point_cloud = read_ply(dir / "init_cloud.ply");
    if (static_cast<std::int64_t>(s.anchor.size()) != n_frames) {
      throw Error(ErrorCode::kShapeMismatch, "anchor length does not match frame count");
    }
    for (std::int64_t t = 0; t < n_frames; ++t) {
      Frame f;
      f.timestamp_index = t;
      f.pose = s.anchor.poses[static_cast<std::size_t>(t)];
      f.image = read_ppm(dir / "frames" / frame_name(t));
      if (f.image.width() != s.camera.width || f.image.height() != s.camera.height) {
        throw Error(ErrorCode::kShapeMismatch, "frame " + std::to_string(t) + " has wrong size");
      }
      s.frames.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, (dir / "scene.json").string() + ": " + e.what());
  }
  return s;
}

PreparedRun prepare_run(const LoadedScene& scene, const ExperimentConfig& config) {
  PreparedRun run;
  const Trajectory stitched = stitch_trajectories(scene.clients, scene.anchor, config.tau, config.decay);
  run.frames = scene.frames;
  std::vector<bool> seen(run.frames.size(), false);
  for (std::size_t i = 0; i < stitched.size(); ++i) {
    const std::int64_t t = stitched.timestamps[i];
    if (t < 0 || t >= static_cast<std::int64_t>(run.frames.size())) continue;
    run.frames[static_cast<std::size_t>(t)].pose = stitched.poses[i];
    seen[static_cast<std::size_t>(t)] = true;
  }
  for (std::size_t t = 0; t < seen.size(); ++t) {
    if (!seen[t]) {
      throw Error(ErrorCode::kShapeMismatch, "no stitched pose for frame " + std::to_string(t));
    }
  }
  run.initial = initialize_gaussians(scene.point_cloud, static_cast<std::size_t>(scene.init_count),
                                     scene.sh_degree, scene.seed);
  run.partitions = partition_dataset(static_cast<std::int64_t>(run.frames.size()), config.chunk_size);
  return run;
}

void cmd_generate(const ExperimentConfig& config, const fs::path& out) {
  config.validate();
  const SyntheticScene scene = generate_corridor_scene(config.scene_params());
  const std::int64_t k = (config.frames + config.chunk_size - 1) / config.chunk_size;
  const Sim3Noise noise{config.sim3_scale, config.sim3_rotation, config.sim3_translation};
  const std::vector<Trajectory> clients =
      perturb_client_trajectories(scene, k, config.chunk_size, noise, config.seed + 1);

  fs::path tmp = out;
  tmp += ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    export_scene(tmp, scene, clients, config);
    write_text(tmp / "config.echo", config.serialize());
    RunLog log(tmp / "log.txt");
    log.line("generate frames=" + std::to_string(config.frames) +
             " gaussians=" + std::to_string(config.gaussians) + " clients=" + std::to_string(k));
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  clear_output(out, "scene.json");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::rename(tmp, out);
}

std::string metrics_csv(const FederatedResult& result) {
  std::ostringstream out;
  out << "round,client,scope,psnr,ssim,n_images,lpips\n";
  for (const RoundMetrics& m : result.history) {
    for (const EvalReport& r : m.local) csv_row(out, m.round, std::to_string(r.client_id), "local", r);
    for (const EvalReport& r : m.global_per_client) {
      csv_row(out, m.round, std::to_string(r.client_id), "global", r);
    }
    csv_row(out, m.round, "all", "global", m.global);
  }
  return out.str();
}

TrainOutcome cmd_train(const ExperimentConfig& config, const fs::path& scene_dir, const fs::path& out) {
  config.validate();
  if (config.budget > 0 && config.rounds * config.local_steps != config.budget) {
    throw Error(ErrorCode::kConfig, "rounds * local_steps = " +
                                        std::to_string(config.rounds * config.local_steps) +
                                        " violates budget " + std::to_string(config.budget));
  }
  const LoadedScene scene = load_scene(scene_dir);
  PreparedRun run = prepare_run(scene, config);

  fs::create_directories(out / "renders");
  write_text(out / "config.echo", config.serialize());
  RunLog log(out / "log.txt");
  log.line("train scene=" + scene_dir.string() + " clients=" + std::to_string(run.partitions.size()) +
           " rounds=" + std::to_string(config.rounds) + " local_steps=" +
           std::to_string(config.local_steps) + (config.centralized ? " centralized" : ""));

  FederatedConfig fc;
  fc.schedule = {config.rounds, config.local_steps};
  fc.lambda = config.lambda;
  fc.lr = config.lr;
  fc.threads = config.threads;

  std::vector<ClientPartition> active = run.partitions;
  if (config.centralized) active = {merge_partitions(run.partitions)};

  TrainOutcome outcome;
  try {
    outcome.result = run_federated(fc, active, run.frames, scene.camera, run.initial);
  } catch (const Error& e) {
    log.line(std::string("error ") + std::string(error_code_name(e.code())) + ": " + e.what());
    throw;
  }
  outcome.partitions = std::move(active);

  for (const RoundMetrics& m : outcome.result.history) {
    log.line("round " + std::to_string(m.round) + " global psnr=" + fixed(m.global.psnr) +
             " ssim=" + fixed(m.global.ssim));
  }
  write_text(out / "metrics.csv", metrics_csv(outcome.result));
  write_bytes(out / "model.bin",
              encode_model(make_update(outcome.result.global, kServerId,
                                       static_cast<std::uint32_t>(config.rounds))));
  log.line("done");
  return outcome;
}

std::vector<std::pair<std::int64_t, std::int64_t>> parse_schedules(const std::string& text) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kConfig, "schedule '" + item + "' is not R:T");
    }
    out.emplace_back(parse_number<std::int64_t>("schedule", trim(item.substr(0, colon))),
                     parse_number<std::int64_t>("schedule", trim(item.substr(colon + 1))));
  }
  if (out.empty()) throw Error(ErrorCode::kConfig, "no schedules given");
  return out;
}

std::vector<AblationRow> cmd_ablate_rounds(
    const ExperimentConfig& config, const fs::path& scene_dir,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& schedules, const fs::path& out) {
  const std::int64_t budget = config.budget > 0 ? config.budget : config.rounds * config.local_steps;
  for (const auto& [r, t] : schedules) {
    if (r < 1 || t < 1 || r * t != budget) {
      throw Error(ErrorCode::kConfig, "schedule " + std::to_string(r) + ":" + std::to_string(t) +
                                          " violates budget " + std::to_string(budget));
    }
  }
  fs::create_directories(out);
  std::vector<AblationRow> rows;
  std::ostringstream csv;
  csv << "rounds,local_steps,local_psnr,local_ssim,global_psnr,global_ssim\n";
  for (const auto& [r, t] : schedules) {
    ExperimentConfig run = config;
    run.rounds = r;
    run.local_steps = t;
    run.budget = budget;
    const TrainOutcome o =
        cmd_train(run, scene_dir, out / ("R" + std::to_string(r) + "_T" + std::to_string(t)));
    AblationRow row;
    row.rounds = r;
    row.local_steps = t;
    row.local = weighted_sequence_report(o.result.history.back().local);
    row.local.scope = EvalScope::kLocal;
    row.global = o.result.history.back().global;
    csv << r << ',' << t << ',' << fixed(row.local.psnr) << ',' << fixed(row.local.ssim) << ','
        << fixed(row.global.psnr) << ',' << fixed(row.global.ssim) << '\n';
    rows.push_back(row);
  }
  write_text(out / "ablation.csv", csv.str());
  return rows;
}

std::vector<Image> cmd_render(const ExperimentConfig& config, const fs::path& model_file,
                              const fs::path& scene_dir, const std::vector<std::int64_t>& frame_indices,
                              const fs::path& out) {
  config.validate();
  const LoadedScene scene = load_scene(scene_dir);
  const PreparedRun run = prepare_run(scene, config);
  const ClientUpdate model = decode_model(read_bytes(model_file));
  if (model.size() != run.initial.size()) {
    throw Error(ErrorCode::kShapeMismatch, "model has " + std::to_string(model.size()) +
                                               " Gaussians, scene has " +
                                               std::to_string(run.initial.size()));
  }
  if (static_cast<int>(model.sh_degree) != run.initial.sh_degree) {
    throw Error(ErrorCode::kShapeMismatch, "model SH degree does not match scene");
  }
  GaussianCloud cloud = run.initial;
  apply_appearance(model, cloud);

  const auto n = static_cast<std::int64_t>(run.frames.size());
  const std::vector<std::int64_t>& indices = frame_indices;
  for (const std::int64_t t : indices) {
    if (t < 0 || t >= n) {
      throw Error(ErrorCode::kOutOfRange, "frame index " + std::to_string(t) + " outside [0, " +
                                              std::to_string(n) + ")");
    }
  }

  std::vector<Image> images;
  if (indices.empty()) return images;
  fs::create_directories(out / "renders");
  std::ostringstream csv;
  csv << "frame,psnr,ssim\n";
  for (const std::int64_t t : indices) {
    const Frame& f = run.frames[static_cast<std::size_t>(t)];
    Image img = render(cloud, f.pose, scene.camera).image;
    write_ppm(out / "renders" / frame_name(t), img);
    csv << t << ',' << fixed(psnr(f.image, img)) << ',' << fixed(ssim(f.image, img)) << '\n';
    images.push_back(std::move(img));
  }
  write_text(out / "render_metrics.csv", csv.str());
  return images;
}

}  // namespace f3dgs
