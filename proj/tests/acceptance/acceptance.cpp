// Acceptance suite: one PASS/FAIL line per criterion.
//   f3dgs_acceptance [--work DIR] [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "f3dgs/client_update.hpp"
#include "f3dgs/error.hpp"
#include "f3dgs/federated.hpp"
#include "f3dgs/harness.hpp"
#include "f3dgs/metrics.hpp"
#include "f3dgs/pose_stitch.hpp"
#include "f3dgs/renderer.hpp"

namespace fs = std::filesystem;
using namespace f3dgs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

fs::path g_work;

// ---------------------------------------------------------------- helpers

Vec4 random_unit4(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
}

GaussianCloud random_cloud(std::mt19937_64& rng, std::size_t count, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GaussianCloud c;
  c.sh_degree = degree;
  for (std::size_t i = 0; i < count; ++i) {
    Gaussian g;
    g.mu = Vec3(0.6 * u(rng), 0.6 * u(rng), 2.0 + 0.8 * u(rng));
    g.log_scale = Vec3::Constant(std::log(0.12)) + 0.4 * Vec3(u(rng), u(rng), u(rng));
    g.quat = random_unit4(rng);
    g.logit_opacity = 1.5 * u(rng);
    g.sh.assign(static_cast<std::size_t>(sh_coeff_count(degree)), Vec3::Zero());
    g.sh[0] = 0.8 * Vec3(u(rng), u(rng), u(rng));
    for (std::size_t k = 1; k < g.sh.size(); ++k) g.sh[k] = 0.2 * Vec3(u(rng), u(rng), u(rng));
    c.gaussians.push_back(std::move(g));
  }
  return c;
}

Image random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

Camera camera16() {
  Camera cam;
  cam.width = cam.height = 16;
  cam.fx = cam.fy = 14.4;
  cam.cx = cam.cy = 8.0;
  cam.near = 0.05;
  return cam;
}

Pose random_pose(std::mt19937_64& rng, double angle, double shift) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Pose p;
  p.rotation = Eigen::Quaterniond(
      Eigen::AngleAxisd(angle * u(rng), Vec3(n(rng), n(rng), n(rng)).normalized()));
  p.translation = shift * u(rng) * Vec3(n(rng), n(rng), n(rng)).normalized();
  return p;
}

// ---------------------------------------------------------------- 1

Outcome gradient_check() {
  const Camera cam = camera16();
  const double h = 1e-4;
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_abs = 0.0;
  for (int scene = 0; scene < 10; ++scene) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(scene));
    const GaussianCloud cloud = random_cloud(rng, 4 + static_cast<std::size_t>(scene) % 13, scene % 4);
    const Image w = random_image(rng, 16, 16);
    const Pose pose = random_pose(rng, 0.1, 0.1);
    RenderSettings settings;
    settings.background = Vec3(0.1, 0.2, 0.3);
    const AppearanceGradients g = render_backward(cloud, pose, cam, w, settings);
    auto loss = [&](const GaussianCloud& c) {
      const Image img = render(c, pose, cam, settings).image;
      double s = 0.0;
      for (std::size_t i = 0; i < img.data().size(); ++i) s += img.data()[i] * w.data()[i];
      return s;
    };
    auto check = [&](double analytic, const std::function<void(GaussianCloud&, double)>& nudge) {
      GaussianCloud p = cloud;
      GaussianCloud m = cloud;
      nudge(p, h);
      nudge(m, -h);
      const double fd = (loss(p) - loss(m)) / (2.0 * h);
      if (std::abs(analytic) <= 1e-6 && std::abs(fd) <= 1e-6) return;
      ++checked;
      const double err = std::abs(analytic - fd);
      if (err > 1e-6 && err > 1e-3 * std::abs(fd)) {
        ++failed;
        worst_abs = std::max(worst_abs, err);
      }
    };
    const int nc = cloud.coeffs_per_channel();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      check(g.d_logit_opacity[i], [i](GaussianCloud& c, double d) { c.gaussians[i].logit_opacity += d; });
      for (int a = 0; a < 3; ++a) {
        check(g.d_log_scale[i][a], [i, a](GaussianCloud& c, double d) { c.gaussians[i].log_scale[a] += d; });
      }
      for (int a = 0; a < 4; ++a) {
        check(g.d_quat[i][a], [i, a](GaussianCloud& c, double d) { c.gaussians[i].quat[a] += d; });
      }
      for (int k = 0; k < nc; ++k) {
        for (int ch = 0; ch < 3; ++ch) {
          check(g.d_sh[i * static_cast<std::size_t>(nc) + static_cast<std::size_t>(k)][ch],
                [i, k, ch](GaussianCloud& c, double d) {
                  c.gaussians[i].sh[static_cast<std::size_t>(k)][ch] += d;
                });
        }
      }
    }
  }
  return {failed == 0, std::to_string(checked) + " entries, " + std::to_string(failed) +
                           " outside tolerance" +
                           (failed ? ", worst abs err " + fmt("%.3g", worst_abs) : "")};
}

// ---------------------------------------------------------------- 2

Outcome aggregation_oracle() {
  std::mt19937_64 rng(2000);
  double worst = 0.0;
  double worst_norm = 0.0;
  bool retained = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 100;
    const std::size_t k = 1 + rng() % 4;
    const int degree = static_cast<int>(rng() % 4);
    const GaussianCloud inc = random_cloud(rng, m, degree);
    std::vector<ClientUpdate> ups;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::uint32_t> vis(m);
      for (auto& v : vis) v = rng() % 3 == 0 ? 0u : static_cast<std::uint32_t>(rng() % 200);
      GaussianCloud local = random_cloud(rng, m, degree);
      // Some clients send the antipodal quaternion.
      for (auto& g : local.gaussians) {
        if (rng() % 2) g.quat = -g.quat;
      }
      ups.push_back(make_update(local, static_cast<std::uint32_t>(c), 0, vis));
    }
    const GaussianCloud out = aggregate(inc, ups);
    const auto nc = static_cast<std::size_t>(inc.coeffs_per_channel());
    for (std::size_t i = 0; i < m; ++i) {
      double total = 0.0;
      for (const auto& u : ups) total += u.visibility[i];
      const Gaussian& got = out.gaussians[i];
      const Gaussian& old = inc.gaussians[i];
      if (total == 0.0) {
        retained = retained && got.log_scale == old.log_scale && got.quat == old.quat &&
                   got.logit_opacity == old.logit_opacity && got.sh == old.sh && got.mu == old.mu;
        continue;
      }
      Vec3 ls = Vec3::Zero();
      Vec4 q = Vec4::Zero();
      double op = 0.0;
      std::vector<Vec3> sh(nc, Vec3::Zero());
      for (const auto& u : ups) {
        const double w = u.visibility[i] / (total + 1e-8);
        for (int a = 0; a < 3; ++a) ls[a] += w * u.log_scale[3 * i + a];
        Vec4 qi(u.quat[4 * i], u.quat[4 * i + 1], u.quat[4 * i + 2], u.quat[4 * i + 3]);
        if (qi.dot(old.quat) < 0.0) qi = -qi;
        q += w * qi;
        op += w * u.logit_opacity[i];
        for (std::size_t kk = 0; kk < nc; ++kk) {
          for (int ch = 0; ch < 3; ++ch) sh[kk][ch] += w * u.sh[(3 * i + ch) * nc + kk];
        }
      }
      q.normalize();
      worst = std::max(worst, (got.log_scale - ls).cwiseAbs().maxCoeff());
      worst = std::max(worst, (got.quat - q).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(got.logit_opacity - op));
      for (std::size_t kk = 0; kk < nc; ++kk) worst = std::max(worst, (got.sh[kk] - sh[kk]).cwiseAbs().maxCoeff());
      worst_norm = std::max(worst_norm, std::abs(got.quat.norm() - 1.0));
      if (got.mu != old.mu) retained = false;
    }
  }
  const bool ok = worst <= 1e-12 && worst_norm <= 1e-6 && retained;
  return {ok, "max deviation " + fmt("%.3g", worst) + ", max |q|-1 " + fmt("%.3g", worst_norm) +
                  (retained ? ", unseen retained" : ", unseen NOT retained")};
}

// ---------------------------------------------------------------- fixture

ExperimentConfig fixture_config() {
  ExperimentConfig c;  // 120 frames, 2000 Gaussians, 64x64
  c.chunk_size = 60;
  return c;
}

const fs::path& fixture_scene() {
  static const fs::path dir = [] {
    const fs::path d = g_work / "corridor";
    if (!fs::exists(d / "scene.json")) cmd_generate(fixture_config(), d);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------- 3

Outcome frozen_geometry() {
  ExperimentConfig c = fixture_config();
  c.chunk_size = 40;
  c.rounds = 4;
  c.local_steps = 25;
  const LoadedScene scene = load_scene(fixture_scene());
  const PreparedRun run = prepare_run(scene, c);
  const TrainOutcome o = cmd_train(c, fixture_scene(), g_work / "frozen");
  std::size_t moved = 0;
  for (std::size_t i = 0; i < run.initial.size(); ++i) {
    if (std::memcmp(run.initial.gaussians[i].mu.data(), o.result.global.gaussians[i].mu.data(),
                    3 * sizeof(double)) != 0) {
      ++moved;
    }
  }
  const bool ok = moved == 0 && o.partitions.size() == 3 && o.result.history.size() == 4;
  return {ok, std::to_string(o.partitions.size()) + " clients, " +
                  std::to_string(o.result.history.size()) + " rounds, " + std::to_string(moved) +
                  " of " + std::to_string(run.initial.size()) + " positions changed"};
}

// ---------------------------------------------------------------- 4

Sim3Transform random_sim3(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sim3Transform s;
  s.scale = std::exp(u(rng));
  const Vec4 q = random_unit4(rng);
  s.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  s.translation = 5.0 * Vec3(u(rng), u(rng), u(rng));
  return s;
}

Outcome sim3_recovery() {
  std::mt19937_64 rng(4000);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  double worst = 0.0;
  double worst_rms = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool noisy = trial >= 100;
    const Sim3Transform truth = random_sim3(rng);
    const std::size_t n = noisy ? 100 : 3 + rng() % 50;
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    for (std::size_t i = 0; i < n; ++i) {
      src.emplace_back(u(rng), u(rng), u(rng));
      Vec3 y = truth.apply(src.back());
      if (noisy) y += Vec3(noise(rng), noise(rng), noise(rng));
      dst.push_back(y);
    }
    const Sim3Estimate est = umeyama_sim3(src, dst);
    if (noisy) {
      worst_rms = std::max(worst_rms, est.residual_rms);
    } else {
      worst = std::max({worst, std::abs(est.transform.scale / truth.scale - 1.0),
                        est.transform.rotation.angularDistance(truth.rotation),
                        (est.transform.translation - truth.translation).norm()});
    }
  }
  return {worst <= 1e-9 && worst_rms <= 0.03,
          "noiseless max error " + fmt("%.3g", worst) + ", noisy max rms " + fmt("%.4f", worst_rms)};
}

// ---------------------------------------------------------------- 5

Outcome boundary_smoothing() {
  std::mt19937_64 rng(5000);
  double worst_join = 0.0;
  int regressions = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto tau = static_cast<std::int64_t>(1 + rng() % 40);
    const auto len = static_cast<std::int64_t>(2 + rng() % 60);
    const Pose base = random_pose(rng, 3.0, 3.0);
    const Pose step = random_pose(rng, 0.05, 0.1);
    Trajectory next;
    Pose p = pose_compose(random_pose(rng, 0.4, 0.5), base);
    for (std::int64_t t = 0; t < len; ++t) {
      next.poses.push_back(p);
      next.timestamps.push_back(t + 1);
      p = pose_compose(p, step);
    }
    const Pose prev_tail = base;
    const Pose delta = compute_boundary_delta(prev_tail, next.poses.front());
    const Trajectory smoothed = smooth_boundary(next, delta, tau,
                                                trial % 2 ? DecayMode::kExponential : DecayMode::kLinear);
    const double before = pose_distance(prev_tail, next.poses.front());
    const double after = pose_distance(prev_tail, smoothed.poses.front());
    if (after > before) ++regressions;
    worst_join = std::max(worst_join, after);
  }
  return {regressions == 0 && worst_join < 1e-9,
          std::to_string(regressions) + " cases with a larger gap, max boundary gap " +
              fmt("%.3g", worst_join)};
}

// ---------------------------------------------------------------- 6

const EvalReport& final_global(const TrainOutcome& o) { return o.result.history.back().global; }

Outcome federated_vs_centralized() {
  ExperimentConfig c = fixture_config();
  c.rounds = 4;
  c.local_steps = 500;
  c.budget = 2000;
  const TrainOutcome fed = cmd_train(c, fixture_scene(), g_work / "c6_federated");
  ExperimentConfig cc = c;
  cc.centralized = true;
  const TrainOutcome cen = cmd_train(cc, fixture_scene(), g_work / "c6_centralized");
  const double gap = final_global(cen).psnr - final_global(fed).psnr;
  const RoundMetrics& last = fed.result.history.back();
  double worst_local = -1e9;
  std::string per_client;
  for (std::size_t k = 0; k < last.local.size(); ++k) {
    const double d = last.local[k].psnr - last.global_per_client[k].psnr;
    worst_local = std::max(worst_local, d);
    per_client += " c" + std::to_string(k) + "=" + fmt("%.2f", d);
  }
  const bool ok = last.local.size() == 2 && gap <= 3.0 && worst_local <= 3.0;
  return {ok, "federated " + fmt("%.2f", final_global(fed).psnr) + " dB, centralized " +
                  fmt("%.2f", final_global(cen).psnr) + " dB, gap " + fmt("%.2f", gap) +
                  " dB; local-global" + per_client};
}

// ---------------------------------------------------------------- 7

Outcome communication_frequency() {
  ExperimentConfig c = fixture_config();
  c.budget = 2000;
  const auto rows = cmd_ablate_rounds(c, fixture_scene(), {{1, 2000}, {8, 250}}, g_work / "c7_ablation");
  const AblationRow& r1 = rows[0];
  const AblationRow& r8 = rows[1];
  const bool ok = r8.global.psnr >= r1.global.psnr && r1.local.psnr >= r8.local.psnr - 0.5;
  return {ok, "global R=1 " + fmt("%.2f", r1.global.psnr) + " / R=8 " + fmt("%.2f", r8.global.psnr) +
                  " dB; local R=1 " + fmt("%.2f", r1.local.psnr) + " / R=8 " +
                  fmt("%.2f", r8.local.psnr) + " dB"};
}

// ---------------------------------------------------------------- 8

double brute_ssim(const Image& a, const Image& b) {
  double w[11][11];
  double norm = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
      norm += w[i][j];
    }
  }
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    int n = 0;
    for (int y = 0; y + 11 <= a.height(); ++y) {
      for (int x = 0; x + 11 <= a.width(); ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < 11; ++i) {
          for (int j = 0; j < 11; ++j) {
            const double k = w[i][j] / norm;
            const double va = a.at(x + j, y + i, c);
            const double vb = b.at(x + j, y + i, c);
            ma += k * va;
            mb += k * vb;
            saa += k * va * va;
            sbb += k * vb * vb;
            sab += k * va * vb;
          }
        }
        const double c1 = 1e-4;
        const double c2 = 9e-4;
        sum += ((2 * ma * mb + c1) * (2 * (sab - ma * mb) + c2)) /
               ((ma * ma + mb * mb + c1) * (saa - ma * ma + sbb - mb * mb + c2));
        ++n;
      }
    }
    total += sum / n;
  }
  return total / 3.0;
}

Outcome metric_oracles() {
  std::mt19937_64 rng(8000);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 11 + static_cast<int>(rng() % 30);
    const int h = 11 + static_cast<int>(rng() % 30);
    const Image a = random_image(rng, w, h);
    Image b = random_image(rng, w, h);
    const double mix = static_cast<double>(trial) / 19.0;
    for (std::size_t i = 0; i < b.data().size(); ++i) b.data()[i] = mix * a.data()[i] + (1 - mix) * b.data()[i];
    worst = std::max(worst, std::abs(ssim(a, b) - brute_ssim(a, b)));
  }
  const Image lo(16, 16, Vec3::Constant(0.45));
  const Image hi(16, 16, Vec3::Constant(0.55));
  Image c0(16, 16);
  Image c1(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const double v = (x + y) % 2;
      c0.set_pixel(x, y, Vec3::Constant(v));
      c1.set_pixel(x, y, Vec3::Constant(1.0 - v));
    }
  }
  const double p20 = psnr(lo, hi);
  const double p0 = psnr(c0, c1);
  const bool ok = worst <= 1e-9 && std::abs(p20 - 20.0) <= 1e-9 && std::abs(p0) <= 1e-9;
  return {ok, "ssim max deviation " + fmt("%.3g", worst) + ", psnr " + fmt("%.12f", p20) + " / " +
                  fmt("%.12f", p0)};
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  ExperimentConfig c;
  c.frames = 24;
  c.gaussians = 400;
  c.width = 32;
  c.height = 32;
  c.chunk_size = 8;
  c.rounds = 2;
  c.local_steps = 10;
  const fs::path scene = g_work / "c9_scene";
  cmd_generate(c, scene);
  ExperimentConfig one = c;
  one.threads = 1;
  ExperimentConfig four = c;
  four.threads = 4;
  cmd_train(one, scene, g_work / "c9_threads1");
  cmd_train(four, scene, g_work / "c9_threads4");
  const bool csv = slurp(g_work / "c9_threads1" / "metrics.csv") == slurp(g_work / "c9_threads4" / "metrics.csv");
  const bool model = slurp(g_work / "c9_threads1" / "model.bin") == slurp(g_work / "c9_threads4" / "model.bin");
  return {csv && model, std::string("metrics.csv ") + (csv ? "identical" : "differs") + ", model.bin " +
                            (model ? "identical" : "differs")};
}

// ---------------------------------------------------------------- 10

ErrorCode rejection(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_update(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

Outcome wire_round_trip() {
  std::mt19937_64 rng(10000);
  std::normal_distribution<float> n(0.0f, 3.0f);
  int mismatches = 0;
  int wrong_errors = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ClientUpdate u;
    u.client_id = static_cast<std::uint32_t>(rng());
    u.round = static_cast<std::uint32_t>(rng() % 1000);
    u.sh_degree = static_cast<std::uint32_t>(rng() % 4);
    const std::size_t m = 1 + rng() % 64;
    const std::size_t nc = static_cast<std::size_t>(u.coeffs_per_channel());
    auto fill = [&](std::vector<float>& v, std::size_t count) {
      v.resize(count);
      for (float& x : v) x = n(rng);
    };
    fill(u.log_scale, 3 * m);
    fill(u.quat, 4 * m);
    fill(u.logit_opacity, m);
    fill(u.sh, 3 * nc * m);
    u.visibility.resize(m);
    for (auto& v : u.visibility) v = static_cast<std::uint32_t>(rng());
    const std::vector<std::uint8_t> bytes = encode_update(u);
    const ClientUpdate back = decode_update(bytes);
    if (!(back == u) || encode_update(back) != bytes) ++mismatches;

    auto crc = bytes;
    crc.back() ^= 0x01;
    auto magic = bytes;
    magic[1] ^= 0x20;
    auto version = bytes;
    version[4] = static_cast<std::uint8_t>(2 + rng() % 200);
    if (rejection(crc) != ErrorCode::kCrcMismatch || rejection(magic) != ErrorCode::kBadMagic ||
        rejection(version) != ErrorCode::kUnsupportedVersion) {
      ++wrong_errors;
    }
  }
  return {mismatches == 0 && wrong_errors == 0,
          std::to_string(mismatches) + " round-trip mismatches, " + std::to_string(wrong_errors) +
              " corruptions with the wrong error"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no limit
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  g_work = fs::temp_directory_path() / "f3dgs_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--work") == 0 && i + 1 < argc) {
      g_work = argv[++i];
    } else {
      only.insert(std::atoi(argv[i]));
    }
  }
  fs::create_directories(g_work);

  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 60, gradient_check},
      {2, "aggregation oracle", 10, aggregation_oracle},
      {3, "frozen geometry", 300, frozen_geometry},
      {4, "sim3 recovery", 5, sim3_recovery},
      {5, "boundary smoothing", 5, boundary_smoothing},
      {6, "federated vs centralized", 900, federated_vs_centralized},
      {7, "communication frequency", 2700, communication_frequency},
      {8, "metric oracles", 10, metric_oracles},
      {9, "determinism", 0, determinism},
      {10, "wire round-trip", 0, wire_round_trip},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.limit_seconds) + " s limit";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s: %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
