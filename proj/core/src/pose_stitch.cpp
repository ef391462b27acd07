#include "f3dgs/pose_stitch.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <unordered_map>

#include "f3dgs/error.hpp"

namespace f3dgs {
namespace {

constexpr double kSmallAngle = 1e-6;
constexpr double kRankTolerance = 1e-12;

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),  //
      w.z(), 0.0, -w.x(),   //
      -w.y(), w.x(), 0.0;
  return m;
}

}  // namespace

void Trajectory::validate() const {
  if (poses.empty()) throw Error(ErrorCode::kDegenerateInput, "trajectory is empty");
  if (poses.size() != timestamps.size()) {
    throw Error(ErrorCode::kShapeMismatch, "trajectory poses/timestamps length mismatch");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] <= timestamps[i - 1]) {
      throw Error(ErrorCode::kParse, "trajectory timestamps not strictly increasing at " +
                                         std::to_string(timestamps[i]));
    }
  }
}

Sim3Transform Sim3Transform::inverse() const {
  Sim3Transform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.scale * (inv.rotation * translation));
  return inv;
}

Sim3Estimate umeyama_sim3(std::span<const Vec3> client_points,
                          std::span<const Vec3> anchor_points) {
  const std::size_t n = client_points.size();
  if (n != anchor_points.size()) {
    throw Error(ErrorCode::kShapeMismatch, "umeyama: point lists differ in length");
  }
  if (n < 3) {
    throw Error(ErrorCode::kDegenerateInput, "umeyama: need at least 3 correspondences");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Vec3 mean_c = Vec3::Zero();
  Vec3 mean_a = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_c += client_points[i];
    mean_a += anchor_points[i];
  }
  mean_c *= inv_n;
  mean_a *= inv_n;

  Mat3 cross = Mat3::Zero();
  Mat3 spread = Mat3::Zero();
  double var_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 dc = client_points[i] - mean_c;
    const Vec3 da = anchor_points[i] - mean_a;
    cross += da * dc.transpose();
    spread += dc * dc.transpose();
    var_c += dc.squaredNorm();
  }
  cross *= inv_n;
  spread *= inv_n;
  var_c *= inv_n;

  const Eigen::SelfAdjointEigenSolver<Mat3> eig(spread);
  const Vec3 ev = eig.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] <= kRankTolerance * ev[2]) {
    throw Error(ErrorCode::kDegenerateInput, "umeyama: client points are collinear or coincident");
  }

  const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (sv[1] <= kRankTolerance * sv[0]) {
    throw Error(ErrorCode::kDegenerateInput, "umeyama: cross-covariance rank below 2");
  }
  Vec3 sign = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign[2] = -1.0;
  const Mat3 rot = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();

  Sim3Estimate est;
  est.transform.scale = sv.dot(sign) / var_c;
  est.transform.rotation = Eigen::Quaterniond(rot).normalized();
  est.transform.translation = mean_a - est.transform.scale * (rot * mean_c);

  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += (anchor_points[i] - est.transform.apply(client_points[i])).squaredNorm();
  }
  est.residual_rms = std::sqrt(sq * inv_n);
  return est;
}

Trajectory apply_sim3(const Sim3Transform& s, const Trajectory& traj) {
  Trajectory out = traj;
  for (Pose& p : out.poses) {
    p.translation = s.apply(p.translation);
    p.rotation = (s.rotation * p.rotation).normalized();
  }
  return out;
}

Trajectory align_trajectory(const Trajectory& client, const Trajectory& anchor) {
  client.validate();
  anchor.validate();
  std::unordered_map<std::int64_t, std::size_t> index;
  index.reserve(anchor.size());
  for (std::size_t i = 0; i < anchor.size(); ++i) index.emplace(anchor.timestamps[i], i);

  std::vector<Vec3> client_pts;
  std::vector<Vec3> anchor_pts;
  client_pts.reserve(client.size());
  anchor_pts.reserve(client.size());
  for (std::size_t i = 0; i < client.size(); ++i) {
    const auto it = index.find(client.timestamps[i]);
    if (it == index.end()) {
      throw Error(ErrorCode::kShapeMismatch, "client timestamp " +
                                                 std::to_string(client.timestamps[i]) +
                                                 " missing from anchor");
    }
    client_pts.push_back(client.poses[i].translation);
    anchor_pts.push_back(anchor.poses[it->second].translation);
  }
  return apply_sim3(umeyama_sim3(client_pts, anchor_pts).transform, client);
}

Vec3 so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 xyz = q.vec();
  const double vn = xyz.norm();
  const double w = q.w();
  if (vn < kSmallAngle) {
    return 2.0 * xyz * (1.0 / w - vn * vn / (3.0 * w * w * w));
  }
  return xyz * (2.0 * std::atan2(vn, w) / vn);
}

Eigen::Quaterniond so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  Eigen::Quaterniond q;
  if (theta < kSmallAngle) {
    q.w() = 1.0 - theta * theta / 8.0;
    q.vec() = 0.5 * omega * (1.0 - theta * theta / 24.0);
  } else {
    q.w() = std::cos(0.5 * theta);
    q.vec() = omega * (std::sin(0.5 * theta) / theta);
  }
  return q.normalized();
}

Twist se3_log(const Pose& p) {
  Twist tw;
  tw.omega = so3_log(p.rotation);
  const double theta = tw.omega.norm();
  const Mat3 w = hat(tw.omega);
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0;
  } else {
    c = (1.0 - theta * std::sin(theta) / (2.0 * (1.0 - std::cos(theta)))) / (theta * theta);
  }
  const Mat3 v_inv = Mat3::Identity() - 0.5 * w + c * w * w;
  tw.v = v_inv * p.translation;
  return tw;
}

Pose se3_exp(const Twist& tw) {
  const double theta = tw.omega.norm();
  const Mat3 w = hat(tw.omega);
  double a;
  double b;
  if (theta < kSmallAngle) {
    a = 0.5 - theta * theta / 24.0;
    b = 1.0 / 6.0 - theta * theta / 120.0;
  } else {
    a = (1.0 - std::cos(theta)) / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  Pose p;
  p.rotation = so3_exp(tw.omega);
  p.translation = (Mat3::Identity() + a * w + b * w * w) * tw.v;
  return p;
}

double boundary_weight(std::int64_t t, std::int64_t tau, DecayMode mode) {
  if (tau <= 0 || t >= tau) return 0.0;
  if (t <= 0) return 1.0;
  const double ratio = static_cast<double>(t) / static_cast<double>(tau);
  if (mode == DecayMode::kExponential) return std::exp(-ratio);
  return std::clamp(1.0 - ratio, 0.0, 1.0);
}

Trajectory smooth_boundary(const Trajectory& aligned, const Pose& delta, std::int64_t tau,
                           DecayMode mode) {
  if (tau < 1) throw Error(ErrorCode::kConfig, "smoothing window must be positive");
  Trajectory out = aligned;
  const Twist log_delta = se3_log(delta);
  const auto window = std::min<std::size_t>(static_cast<std::size_t>(tau), out.size());
  for (std::size_t t = 0; t < window; ++t) {
    const double beta = boundary_weight(static_cast<std::int64_t>(t), tau, mode);
    if (beta == 0.0) continue;
    const Pose correction =
        t == 0 && beta == 1.0 ? delta : se3_exp({beta * log_delta.omega, beta * log_delta.v});
    out.poses[t] = pose_compose(correction, out.poses[t]);
  }
  return out;
}

Pose compute_boundary_delta(const Pose& prev_tail, const Pose& next_head) {
  return pose_compose(prev_tail, next_head.inverse());
}

Trajectory stitch_trajectories(std::span<const Trajectory> clients, const Trajectory& anchor,
                               std::int64_t tau, DecayMode mode) {
  if (clients.empty()) throw Error(ErrorCode::kConfig, "no client trajectories to stitch");
  Trajectory out;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    Trajectory aligned = align_trajectory(clients[k], anchor);
    if (k > 0) {
      const Pose& tail = out.poses.back();
      Pose predicted = tail;
      if (out.size() >= 2) {
        const Pose step = pose_compose(out.poses[out.size() - 2].inverse(), tail);
        predicted = pose_compose(tail, step);
      }
      aligned = smooth_boundary(aligned, compute_boundary_delta(predicted, aligned.poses.front()),
                                tau, mode);
    }
    out.poses.insert(out.poses.end(), aligned.poses.begin(), aligned.poses.end());
    out.timestamps.insert(out.timestamps.end(), aligned.timestamps.begin(),
                          aligned.timestamps.end());
  }
  out.validate();
  return out;
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::int64_t stamp = 0;
    if (!(ss >> stamp)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorCode::kParse, "trajectory line " + std::to_string(line_no) +
                                         ": bad timestamp");
    }
    double v[7];
    for (double& x : v) {
      if (!(ss >> x)) {
        throw Error(ErrorCode::kParse, "trajectory line " + std::to_string(line_no) +
                                           ": expected 'timestamp tx ty tz qw qx qy qz'");
      }
    }
    Pose p;
    p.translation = Vec3(v[0], v[1], v[2]);
    p.rotation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]).normalized();
    traj.poses.push_back(p);
    traj.timestamps.push_back(stamp);
  }
  traj.validate();
  return traj;
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open trajectory " + path.string());
  return read_trajectory(in);
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "# timestamp tx ty tz qw qx qy qz\n" << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Pose& p = traj.poses[i];
    out << traj.timestamps[i] << ' ' << p.translation.x() << ' ' << p.translation.y() << ' '
        << p.translation.z() << ' ' << p.rotation.w() << ' ' << p.rotation.x() << ' '
        << p.rotation.y() << ' ' << p.rotation.z() << '\n';
  }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write trajectory " + path.string());
  write_trajectory(out, traj);
  if (!out) throw Error(ErrorCode::kIo, "failed writing trajectory " + path.string());
}

}  // namespace f3dgs
