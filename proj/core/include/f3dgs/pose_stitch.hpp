#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "f3dgs/types.hpp"

namespace f3dgs {

struct Trajectory {
  std::vector<Pose> poses;
  std::vector<std::int64_t> timestamps;

  std::size_t size() const { return poses.size(); }
  /// Throws on mismatched lengths, empty input, or non-increasing timestamps.
  void validate() const;
};

struct Sim3Transform {
  double scale = 1.0;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  Sim3Transform inverse() const;
};

struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct Sim3Estimate {
  Sim3Transform transform;
  double residual_rms = 0.0;
};

/// Closed-form least-squares similarity mapping client points onto anchor
/// points. Throws DegenerateInput for fewer than 3 pairs or rank < 2.
Sim3Estimate umeyama_sim3(std::span<const Vec3> client_points,
                          std::span<const Vec3> anchor_points);

/// Aligns the client trajectory onto the anchor using positions matched by
/// timestamp. Rotations are pre-multiplied by R; translations map to sRt + t.
Trajectory align_trajectory(const Trajectory& client, const Trajectory& anchor);
Trajectory apply_sim3(const Sim3Transform& s, const Trajectory& traj);

Vec3 so3_log(const Eigen::Quaterniond& q);
Eigen::Quaterniond so3_exp(const Vec3& omega);
Twist se3_log(const Pose& p);
Pose se3_exp(const Twist& tw);

enum class DecayMode { kLinear, kExponential };

/// Correction weight for frame offset t inside a window of tau frames.
double boundary_weight(std::int64_t t, std::int64_t tau, DecayMode mode);

/// pose_t <- Exp(beta(t) * Log(delta)) * pose_t for t in [0, tau).
Trajectory smooth_boundary(const Trajectory& aligned, const Pose& delta, std::int64_t tau,
                           DecayMode mode = DecayMode::kLinear);

/// Transform taking next_head onto prev_tail: prev_tail * next_head^-1.
Pose compute_boundary_delta(const Pose& prev_tail, const Pose& next_head);

/// Aligns every client to the anchor, then smooths each client boundary in
/// order. The incoming client's correction is computed against a constant
/// velocity prediction from the outgoing client's last two poses, so an
/// already-consistent boundary receives an identity correction.
Trajectory stitch_trajectories(std::span<const Trajectory> clients, const Trajectory& anchor,
                               std::int64_t tau, DecayMode mode = DecayMode::kLinear);

// TUM-style text: "timestamp tx ty tz qw qx qy qz" per line, '#' comments.
Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace f3dgs
