#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "einit/core.hpp"
#include "einit/icp.hpp"
#include "einit/perturb.hpp"

namespace einit {

inline constexpr double kDefaultSuccessThreshold = 0.05;

/// Per-trial statistics. Distances to point sets are spectral norms of d x n
/// difference matrices divided by |P|_2.
struct TrialRecord {
  double nu = 0.0;          // |Q' - Q|_2 / |P|_2, clutter columns compared against 0
  double delta = 0.0;       // |Q'_matched - Q_icp|_2 / |P|_2
  double delta_spec = 0.0;  // |Q - Q_icp S|_2 / |P|_2
  double delta_o = 0.0;     // |U_icp - O|_2
  std::optional<double> delta_h;  // |S_icp - S|_F^2 / (2n); only when |Q'| == |P|
  double delta_icp = 0.0;   // (|Q' - Q_init|_2 - |Q' - Q_icp|_2) / |P|_2
  double delta_icp_o = 0.0; // |U_init - U_icp|_2
  bool success = false;
  double init_seconds = 0.0;
  double icp_seconds = 0.0;
};

namespace detail {

/// Column i is the target point matched to source point i.
inline Matrix gather(const PointCloud& target, const PermutationMap& map) {
  Matrix out(target.dim(), static_cast<Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Index j = map.assignment[i];
    if (j < 0 || j >= target.size()) fail(ErrorKind::InvalidInput, "evaluate: correspondence out of range");
    out.col(static_cast<Index>(i)) = target.point(j);
  }
  return out;
}

inline Matrix moved(const RigidMotion& m, const PointCloud& p) {
  return (m.rotation * p.matrix()).colwise() + m.translation;
}

}  // namespace detail

/// Normalized Hamming distance |S_a - S_b|_F^2 / (2n) between two maps over the
/// same n source columns. Each disagreeing row contributes 2 to the Frobenius sum.
inline double hamming_distance(const PermutationMap& a, const PermutationMap& b) {
  if (a.size() != b.size() || a.size() == 0) fail(ErrorKind::InvalidInput, "hamming_distance: size mismatch");
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a.assignment[i] != b.assignment[i] ? 1 : 0;
  return static_cast<double>(2 * differ) / (2.0 * static_cast<double>(a.size()));
}

/// Under occlusion Q' has more columns than P. Point-set distances against Q'
/// then use only the target points ICP matched (one per source point), and the
/// Hamming distance is omitted because no bijection exists.
inline TrialRecord evaluate(const SceneTruth& truth, const RegistrationResult& result,
                            double threshold = kDefaultSuccessThreshold) {
  const PointCloud& p = truth.source;
  const PointCloud& q = truth.clean_target;
  const PointCloud& qc = truth.target;
  const Index d = p.dim();
  if (q.dim() != d || qc.dim() != d || result.final_motion.dim() != d || result.init_motion.dim() != d) {
    fail(ErrorKind::InvalidInput, "evaluate: dimension mismatch");
  }
  if (q.size() != p.size() || qc.size() < q.size()) fail(ErrorKind::InvalidInput, "evaluate: cardinality mismatch");
  if (result.refine.correspondences.size() != static_cast<std::size_t>(p.size())) {
    fail(ErrorKind::InvalidInput, "evaluate: correspondences do not cover the source");
  }

  const double p_norm = spectral_norm(p.matrix());
  if (!(p_norm > 0.0)) fail(ErrorKind::DegenerateCloud, "evaluate: source cloud is zero");

  TrialRecord r;
  Matrix noise = qc.matrix();
  noise.leftCols(q.size()) -= q.matrix();
  r.nu = spectral_norm(noise) / p_norm;

  const Matrix image = detail::moved(result.final_motion, p);
  const Matrix init_image = detail::moved(result.init_motion, p);
  const Matrix matched = detail::gather(qc, result.refine.correspondences);
  const Matrix truth_image = detail::gather(q, truth.permutation);

  const double dist_icp = spectral_norm(matched - image);
  r.delta = dist_icp / p_norm;
  r.delta_spec = spectral_norm(truth_image - image) / p_norm;
  r.delta_o = spectral_norm(result.final_motion.rotation - truth.orthogonal);
  if (qc.size() == p.size()) r.delta_h = hamming_distance(result.refine.correspondences, truth.permutation);
  r.delta_icp = (spectral_norm(matched - init_image) - dist_icp) / p_norm;
  r.delta_icp_o = spectral_norm(result.init_motion.rotation - result.final_motion.rotation);
  r.success = r.delta_spec <= threshold;
  r.init_seconds = result.init_seconds;
  r.icp_seconds = result.icp_seconds;
  return r;
}

inline double success_rate(const std::vector<TrialRecord>& records) {
  if (records.empty()) fail(ErrorKind::InvalidInput, "success_rate: no records");
  const auto ok = std::count_if(records.begin(), records.end(), [](const TrialRecord& r) { return r.success; });
  return static_cast<double>(ok) / static_cast<double>(records.size());
}

struct EllipsoidDeviation {
  double spectral = 0.0;   // |E(Q') - E(Q)|_2 / |E(Q)|_2
  double frobenius = 0.0;  // |E(Q') - E(Q)|_F / |E(Q)|_F
};

/// Relative deviation of the centred covariance of `corrupted` from that of `reference`.
inline EllipsoidDeviation ellipsoid_deviation(const PointCloud& reference, const PointCloud& corrupted) {
  if (reference.dim() != corrupted.dim()) fail(ErrorKind::InvalidInput, "ellipsoid_deviation: dimension mismatch");
  const Matrix eq = covariance(center(reference).cloud).matrix;
  const Matrix eqc = covariance(center(corrupted).cloud).matrix;
  const double base2 = spectral_norm(eq);
  if (!(base2 > 0.0)) fail(ErrorKind::DegenerateCloud, "ellipsoid_deviation: reference ellipsoid is zero");
  const Matrix diff = eqc - eq;
  return {spectral_norm(diff) / base2, frobenius_norm(diff) / frobenius_norm(eq)};
}

}  // namespace einit
