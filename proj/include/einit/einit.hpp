#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "einit/core.hpp"
#include "einit/spatial.hpp"

namespace einit {

/// Which finite group of axis ambiguities E-Init searches.
///   Ref - diagonal +-1 matrices (2^d elements), enough for a simple spectrum.
///   Bd  - signed permutation matrices (2^d d! elements), tolerates eigenvalue swaps.
enum class GroupKind { Ref, Bd };

inline const char* to_string(GroupKind kind) { return kind == GroupKind::Ref ? "ref" : "bd"; }

inline GroupKind parse_group(const std::string& name) {
  if (name == "ref" || name == "Ref") return GroupKind::Ref;
  if (name == "bd" || name == "Bd" || name == "BD") return GroupKind::Bd;
  fail(ErrorKind::InvalidInput, "unknown group '" + name + "' (expected ref or bd)");
}

struct CandidateGroup {
  GroupKind kind = GroupKind::Ref;
  std::vector<Matrix> elements;  // identity first

  std::size_t size() const noexcept { return elements.size(); }
};

/// Enumerates Ref(d) (1 <= d <= 16) or B_d (1 <= d <= 8) without duplicates.
/// Sign patterns run in binary counting order; B_d iterates permutations in
/// lexicographic order with the sign patterns inner.
inline CandidateGroup enumerate_group(Index d, GroupKind kind) {
  const Index max_d = kind == GroupKind::Ref ? 16 : 8;
  if (d < 1 || d > max_d) {
    fail(ErrorKind::InvalidInput, std::string("enumerate_group: d out of range for ") + to_string(kind));
  }
  const std::uint32_t sign_patterns = 1u << static_cast<unsigned>(d);

  std::vector<Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Index{0});

  CandidateGroup group{kind, {}};
  do {
    for (std::uint32_t mask = 0; mask < sign_patterns; ++mask) {
      Matrix w = Matrix::Zero(d, d);
      for (Index col = 0; col < d; ++col) {
        const double sign = (mask >> static_cast<unsigned>(col)) & 1u ? -1.0 : 1.0;
        w(perm[static_cast<std::size_t>(col)], col) = sign;
      }
      group.elements.push_back(std::move(w));
    }
  } while (kind == GroupKind::Bd && std::next_permutation(perm.begin(), perm.end()));
  return group;
}

struct EInitParams {
  GroupKind group = GroupKind::Ref;
  /// Cloud is degenerate (not rank d) when l_d / l_1 falls below this.
  double degenerate_ratio = 1e-9;
  /// Spectrum is near-degenerate when the relative spectral gap is below this.
  double near_degenerate_gap = 1e-6;
  /// Relative eigenvalue discrepancy above which the clouds look unrelated.
  double eigenvalue_mismatch = 0.2;
  /// Candidates whose score is within this fraction of the cloud scale of the
  /// best one count as ties.
  double tie_tolerance = 1e-9;
  /// Score candidates on at most this many evenly strided source points; 0 = all.
  Index max_score_points = 0;
  MatchOptions match;
};

struct CandidateScore {
  Matrix element;
  double score = 0.0;
};

struct EInitResult {
  RigidMotion motion;  // source frame -> target frame
  Matrix chosen_element;
  std::size_t chosen_index = 0;
  std::vector<CandidateScore> candidate_scores;
  double source_gap = 0.0;
  double target_gap = 0.0;
  std::vector<std::string> warnings;
};

struct SpectrumReport {
  Vector source_eigenvalues;
  Vector target_eigenvalues;
  Vector source_relative_gaps;  // (l_i - l_{i+1}) / l_1 for each adjacent pair
  Vector target_relative_gaps;
  double source_gap = 0.0;
  double target_gap = 0.0;
  /// max_i |l_i(P) - l_i(Q)| / l_1(P)
  double eigenvalue_discrepancy = 0.0;
};

namespace detail {

inline Vector adjacent_gaps(const Vector& values) {
  const Index d = values.size();
  Vector gaps(std::max<Index>(0, d - 1));
  for (Index i = 0; i + 1 < d; ++i) gaps(i) = values(0) > 0.0 ? (values(i) - values(i + 1)) / values(0) : 0.0;
  return gaps;
}

inline double eigenvalue_discrepancy(const Vector& source, const Vector& target) {
  if (!(source(0) > 0.0)) return 0.0;
  return (source - target).cwiseAbs().maxCoeff() / source(0);
}

inline void require_registrable(const PointCloud& cloud, const CovarianceEllipsoid& e, double degenerate_ratio,
                                const char* role) {
  const Index d = cloud.dim();
  if (cloud.size() < d + 1) {
    fail(ErrorKind::DegenerateCloud, std::string(role) + " cloud needs at least d+1 points");
  }
  const double top = e.eigenvalues(0);
  if (!(top > 0.0) || e.eigenvalues(d - 1) / top < degenerate_ratio) {
    fail(ErrorKind::DegenerateCloud, std::string(role) + " cloud does not span the ambient space");
  }
}

inline PointCloud stride_subsample(const PointCloud& cloud, Index max_points) {
  if (max_points <= 0 || cloud.size() <= max_points) return cloud;
  Matrix out(cloud.dim(), max_points);
  for (Index k = 0; k < max_points; ++k) out.col(k) = cloud.point(k * cloud.size() / max_points);
  return PointCloud(std::move(out));
}

}  // namespace detail

inline SpectrumReport spectrum_report(const PointCloud& source, const PointCloud& target) {
  if (source.dim() != target.dim()) fail(ErrorKind::InvalidInput, "spectrum_report: dimension mismatch");
  const CovarianceEllipsoid ep = covariance(center(source).cloud);
  const CovarianceEllipsoid eq = covariance(center(target).cloud);
  SpectrumReport r;
  r.source_eigenvalues = ep.eigenvalues;
  r.target_eigenvalues = eq.eigenvalues;
  r.source_relative_gaps = detail::adjacent_gaps(ep.eigenvalues);
  r.target_relative_gaps = detail::adjacent_gaps(eq.eigenvalues);
  r.source_gap = ep.spectral_gap;
  r.target_gap = eq.spectral_gap;
  r.eigenvalue_discrepancy = detail::eigenvalue_discrepancy(ep.eigenvalues, eq.eigenvalues);
  return r;
}

/// Ellipsoid initialization: align the principal axes of the two centred
/// covariance ellipsoids, then resolve the remaining axis ambiguity by trying
/// every element D of the candidate group and keeping the one whose motion
/// U_Q D U_P^T gives the smallest nearest-neighbour score.
///
/// The returned motion maps `source` onto `target` in their original frames.
inline EInitResult e_init(const PointCloud& source, const PointCloud& target, const EInitParams& params = {}) {
  if (source.dim() != target.dim()) fail(ErrorKind::InvalidInput, "e_init: dimension mismatch");
  const Index d = source.dim();

  const Centered p = center(source);
  const Centered q = center(target);
  const CovarianceEllipsoid ep = covariance(p.cloud);
  const CovarianceEllipsoid eq = covariance(q.cloud);
  detail::require_registrable(source, ep, params.degenerate_ratio, "source");
  detail::require_registrable(target, eq, params.degenerate_ratio, "target");

  EInitResult result;
  result.source_gap = ep.spectral_gap;
  result.target_gap = eq.spectral_gap;
  if (std::min(ep.spectral_gap, eq.spectral_gap) < params.near_degenerate_gap) {
    result.warnings.push_back(params.group == GroupKind::Ref
                                  ? "near-degenerate spectrum: principal axes are ill-defined, consider group bd"
                                  : "near-degenerate spectrum: principal axes are ill-defined");
  }
  if (detail::eigenvalue_discrepancy(ep.eigenvalues, eq.eigenvalues) > params.eigenvalue_mismatch) {
    result.warnings.push_back("eigenvalue mismatch: clouds are likely unrelated or heavily corrupted");
  }

  // U0 U_P D U_P^T with U0 = U_Q U_P^T.
  const Matrix& up = ep.eigenvectors;
  const Matrix u0 = eq.eigenvectors * up.transpose();

  const PointCloud scored = detail::stride_subsample(p.cloud, params.max_score_points);
  const NeighborIndex target_index(q.cloud);
  const CandidateGroup group = enumerate_group(d, params.group);

  result.candidate_scores.reserve(group.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < group.size(); ++k) {
    const Matrix rotation = u0 * up * group.elements[k] * up.transpose();
    const PointCloud moved(rotation * scored.matrix());
    double score = 0.0;
    if (params.match.symmetric) {
      score = match_score(moved, q.cloud, params.match).score;
    } else {
      score = match_score(moved, target_index).score;
    }
    result.candidate_scores.push_back({group.elements[k], score});
    if (score < result.candidate_scores[best].score) best = k;
  }

  const double best_score = result.candidate_scores[best].score;
  const double tie_band = params.tie_tolerance * std::max(cloud_scale(source), cloud_scale(target));
  const auto ties = std::count_if(result.candidate_scores.begin(), result.candidate_scores.end(),
                                  [&](const CandidateScore& c) { return c.score <= best_score + tie_band; });
  if (ties > 1) {
    result.warnings.push_back(std::to_string(ties) +
                              " candidates tie for the best score: the cloud is (nearly) symmetric, "
                              "the first by enumeration order was kept");
  }

  result.chosen_index = best;
  result.chosen_element = group.elements[best];
  result.motion.rotation = u0 * up * result.chosen_element * up.transpose();
  result.motion.translation = q.offset - result.motion.rotation * p.offset;
  return result;
}

inline EInitResult e_init(const PointCloud& source, const PointCloud& target, GroupKind group) {
  EInitParams params;
  params.group = group;
  return e_init(source, target, params);
}

}  // namespace einit
