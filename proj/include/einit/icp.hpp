#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include "einit/core.hpp"
#include "einit/einit.hpp"
#include "einit/spatial.hpp"

namespace einit {

struct IcpParams {
  int max_iterations = 100;
  /// Stop once (previous - current) / previous drops below this.
  double relative_tolerance = 1e-8;
  /// Stop once the cost falls below this fraction of the target's scale.
  double absolute_floor = 1e-12;
  /// Estimate over O(d) when true, over SO(d) otherwise.
  bool allow_reflections = true;

  void validate() const {
    if (max_iterations < 1) fail(ErrorKind::InvalidInput, "IcpParams: max_iterations must be >= 1");
    if (!(relative_tolerance > 0.0) || !(absolute_floor > 0.0)) {
      fail(ErrorKind::InvalidInput, "IcpParams: tolerances must be positive");
    }
  }
};

struct ProcrustesEstimate {
  Matrix rotation;
  /// The SO(d) solution is not unique (rank-deficient cross-covariance while a
  /// determinant correction was needed).
  bool ambiguous = false;
};

/// argmin over O(d) (or SO(d)) of sum_i |R x_i - y_i|^2 for paired, centred columns.
inline ProcrustesEstimate procrustes(const Matrix& source_pts, const Matrix& target_pts, bool allow_reflections) {
  if (source_pts.rows() != target_pts.rows() || source_pts.cols() != target_pts.cols()) {
    fail(ErrorKind::InvalidInput, "procrustes: point sets must have the same shape");
  }
  const Index d = source_pts.rows();
  const Matrix cross = target_pts * source_pts.transpose();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU();
  const Matrix& v = svd.matrixV();

  ProcrustesEstimate out;
  out.rotation = u * v.transpose();
  if (!allow_reflections && out.rotation.determinant() < 0.0) {
    const Vector& s = svd.singularValues();
    const double top = s(0);
    // Flipping the weakest axis is only well-defined when that axis is unique.
    out.ambiguous = !(top > 0.0) || (d >= 2 && s(d - 2) - s(d - 1) <= 1e-12 * top);
    u.col(d - 1) *= -1.0;
    out.rotation = u * v.transpose();
  }
  return out;
}

inline ProcrustesEstimate procrustes(const PointCloud& source_pts, const PointCloud& target_pts,
                                     bool allow_reflections) {
  return procrustes(source_pts.matrix(), target_pts.matrix(), allow_reflections);
}

struct IcpResult {
  RigidMotion motion;
  PermutationMap correspondences;
  std::vector<double> cost_trace;  // match score of every accepted motion, starting with the initial one
  int iterations = 0;
  bool converged = false;
  bool ambiguous_estimate = false;
};

/// Point-to-point ICP: nearest-neighbour correspondences, barycentre-aligned
/// Procrustes re-estimate, repeat. A step is accepted only if it does not
/// raise the cost, so the returned motion is the best one seen.
inline IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                     const IcpParams& params = {}) {
  if (source.dim() != target.dim()) fail(ErrorKind::InvalidInput, "icp: dimension mismatch");
  params.validate();

  const NeighborIndex index(target);
  const double floor = params.absolute_floor * std::max(cloud_scale(target), cloud_scale(source));
  const Matrix& x = source.matrix();
  const Index n = source.size();

  IcpResult result;
  result.motion = init;
  MatchResult match = match_score(apply_motion(init, source), index);
  result.cost_trace.push_back(match.score);

  Matrix paired(source.dim(), n);
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const auto& assign = match.assignment.assignment;
    if (n > 1 && std::all_of(assign.begin(), assign.end(), [&](Index a) { return a == assign.front(); })) {
      fail(ErrorKind::DegenerateCorrespondence, "icp: every source point matched the same target point");
    }
    for (Index i = 0; i < n; ++i) paired.col(i) = target.point(assign[static_cast<std::size_t>(i)]);

    const Vector bx = x.rowwise().mean();
    const Vector by = paired.rowwise().mean();
    const ProcrustesEstimate est =
        procrustes(Matrix(x.colwise() - bx), Matrix(paired.colwise() - by), params.allow_reflections);
    result.ambiguous_estimate = result.ambiguous_estimate || est.ambiguous;
    RigidMotion candidate{est.rotation, by - est.rotation * bx};

    MatchResult next = match_score(apply_motion(candidate, source), index);
    const double previous = match.score;
    if (next.score > previous) {
      result.converged = true;
      break;
    }
    result.motion = std::move(candidate);
    match = std::move(next);
    result.cost_trace.push_back(match.score);
    ++result.iterations;

    if (match.score <= floor || previous - match.score < params.relative_tolerance * previous) {
      result.converged = true;
      break;
    }
  }
  result.correspondences = std::move(match.assignment);
  return result;
}

struct RegistrationResult {
  EInitResult init;
  IcpResult refine;
  RigidMotion init_motion;
  RigidMotion final_motion;
  double init_seconds = 0.0;
  double icp_seconds = 0.0;
};

/// E-Init followed by ICP.
inline RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                          const EInitParams& init_params, const IcpParams& icp_params = {}) {
  using Clock = std::chrono::steady_clock;
  RegistrationResult r;
  const auto t0 = Clock::now();
  r.init = e_init(source, target, init_params);
  const auto t1 = Clock::now();
  r.refine = icp(source, target, r.init.motion, icp_params);
  const auto t2 = Clock::now();
  r.init_motion = r.init.motion;
  r.final_motion = r.refine.motion;
  r.init_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.icp_seconds = std::chrono::duration<double>(t2 - t1).count();
  return r;
}

inline RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target, GroupKind group,
                                          const IcpParams& icp_params = {}) {
  EInitParams p;
  p.group = group;
  return register_clouds(source, target, p, icp_params);
}

/// ICP from a given motion with no E-Init stage; `init` in the result is left empty
/// apart from the motion.
inline RegistrationResult register_without_init(const PointCloud& source, const PointCloud& target,
                                                const RigidMotion& start, const IcpParams& icp_params = {}) {
  using Clock = std::chrono::steady_clock;
  RegistrationResult r;
  r.init.motion = start;
  r.init_motion = start;
  const auto t0 = Clock::now();
  r.refine = icp(source, target, start, icp_params);
  r.icp_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  r.final_motion = r.refine.motion;
  return r;
}

}  // namespace einit
