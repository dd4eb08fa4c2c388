#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "einit/error.hpp"

namespace einit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A d x n matrix whose columns are points. Never empty, always finite.
class PointCloud {
 public:
  PointCloud() = delete;

  explicit PointCloud(Matrix data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      fail(ErrorKind::InvalidInput, "point cloud must have d >= 1 and n >= 1");
    }
    if (!data_.allFinite()) fail(ErrorKind::InvalidInput, "point cloud has non-finite entries");
  }

  Index dim() const noexcept { return data_.rows(); }
  Index size() const noexcept { return data_.cols(); }

  const Matrix& matrix() const noexcept { return data_; }
  auto point(Index i) const { return data_.col(i); }

  double max_abs() const { return data_.cwiseAbs().maxCoeff(); }

  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  Matrix data_;
};

/// x -> rotation * x + translation. `rotation` is any element of O(d).
struct RigidMotion {
  Matrix rotation;
  Vector translation;

  static RigidMotion identity(Index d) {
    return {Matrix::Identity(d, d), Vector::Zero(d)};
  }

  Index dim() const noexcept { return rotation.rows(); }

  RigidMotion inverse() const {
    Matrix rt = rotation.transpose();
    Vector t = -(rt * translation);
    return {std::move(rt), std::move(t)};
  }

  /// (*this) after `first`.
  RigidMotion compose(const RigidMotion& first) const {
    return {rotation * first.rotation, rotation * first.translation + translation};
  }

  /// Max-abs entry of R^T R - I.
  double orthogonality_error() const {
    return (rotation.transpose() * rotation - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }
};

/// Source column i is matched to target column assignment[i].
struct PermutationMap {
  std::vector<Index> assignment;
  bool bijective = false;

  std::size_t size() const noexcept { return assignment.size(); }

  static PermutationMap identity(Index n) {
    PermutationMap p;
    p.assignment.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p.assignment[static_cast<std::size_t>(i)] = i;
    p.bijective = true;
    return p;
  }

  /// True when `assignment` hits every index in [0, n) exactly once.
  bool is_permutation() const {
    std::vector<char> seen(assignment.size(), 0);
    for (Index a : assignment) {
      if (a < 0 || static_cast<std::size_t>(a) >= assignment.size() || seen[static_cast<std::size_t>(a)]) {
        return false;
      }
      seen[static_cast<std::size_t>(a)] = 1;
    }
    return true;
  }

  friend bool operator==(const PermutationMap&, const PermutationMap&) = default;
};

struct CovarianceEllipsoid {
  Matrix matrix;
  Vector eigenvalues;   // non-increasing
  Matrix eigenvectors;  // columns follow `eigenvalues`
  double spectral_gap = 0.0;

  Index dim() const noexcept { return matrix.rows(); }
};

struct SortedEigen {
  Vector values;
  Matrix vectors;
};

// ---------------------------------------------------------------------------

inline Vector barycenter(const PointCloud& cloud) { return cloud.matrix().rowwise().mean(); }

struct Centered {
  PointCloud cloud;
  Vector offset;
};

inline Centered center(const PointCloud& cloud) {
  Vector b = barycenter(cloud);
  Matrix shifted = cloud.matrix().colwise() - b;
  return {PointCloud(std::move(shifted)), std::move(b)};
}

/// Smallest relative gap (l_i - l_{i+1}) / l_1 over adjacent sorted eigenvalues.
/// Zero when l_1 == 0; 1 for d == 1 where there is nothing to confuse.
inline double relative_spectral_gap(const Vector& sorted_desc) {
  if (sorted_desc.size() < 2) return 1.0;
  const double top = sorted_desc(0);
  if (!(top > 0.0)) return 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i + 1 < sorted_desc.size(); ++i) {
    gap = std::min(gap, (sorted_desc(i) - sorted_desc(i + 1)) / top);
  }
  return gap;
}

/// Symmetric eigendecomposition with descending eigenvalues and a deterministic
/// sign per eigenvector: its largest-magnitude entry is positive (ties go to the
/// lowest row).
inline SortedEigen eigh_sorted(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) fail(ErrorKind::InvalidInput, "eigh_sorted needs a square matrix");
  if (!a.allFinite()) fail(ErrorKind::InvalidInput, "eigh_sorted: non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    fail(ErrorKind::InvalidInput, "eigh_sorted: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "eigensolver did not converge");

  const Index d = a.rows();
  SortedEigen out{Vector(d), Matrix(d, d)};
  for (Index k = 0; k < d; ++k) {
    out.values(k) = solver.eigenvalues()(d - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(d - 1 - k);
  }
  for (Index k = 0; k < d; ++k) {
    Index pivot = 0;
    double best = -1.0;
    for (Index r = 0; r < d; ++r) {
      const double m = std::abs(out.vectors(r, k));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (out.vectors(pivot, k) < 0.0) out.vectors.col(k) *= -1.0;
  }
  return out;
}

/// E(X) = X X^T on the cloud as given (no centering, no 1/n).
inline CovarianceEllipsoid covariance(const PointCloud& cloud) {
  const Matrix& x = cloud.matrix();
  Matrix e = x * x.transpose();
  e = 0.5 * (e + e.transpose()).eval();
  SortedEigen eig = eigh_sorted(e);
  CovarianceEllipsoid out;
  out.spectral_gap = relative_spectral_gap(eig.values);
  out.matrix = std::move(e);
  out.eigenvalues = std::move(eig.values);
  out.eigenvectors = std::move(eig.vectors);
  return out;
}

/// Largest singular value.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() > m.cols()) return spectral_norm(m.transpose());
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

inline PointCloud apply_motion(const RigidMotion& motion, const PointCloud& cloud) {
  if (motion.rotation.rows() != cloud.dim() || motion.rotation.cols() != cloud.dim() ||
      motion.translation.size() != cloud.dim()) {
    fail(ErrorKind::InvalidInput, "apply_motion: dimension mismatch");
  }
  Matrix out = (motion.rotation * cloud.matrix()).colwise() + motion.translation;
  return PointCloud(std::move(out));
}

/// Column j of the result is column assignment^{-1}(j) of `cloud`, i.e. the
/// matrix product X S for the permutation matrix S with S[i, assignment[i]] = 1.
inline PointCloud permute_columns(const PointCloud& cloud, const PermutationMap& perm) {
  if (static_cast<Index>(perm.size()) != cloud.size() || !perm.is_permutation()) {
    fail(ErrorKind::InvalidInput, "permute_columns: not a permutation of the cloud's columns");
  }
  Matrix out(cloud.dim(), cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) out.col(perm.assignment[static_cast<std::size_t>(i)]) = cloud.point(i);
  return PointCloud(std::move(out));
}

/// RMS distance of the points from their barycenter; used to make tolerances unit-free.
inline double cloud_scale(const PointCloud& cloud) {
  const Matrix c = cloud.matrix().colwise() - barycenter(cloud);
  return std::sqrt(c.squaredNorm() / static_cast<double>(cloud.size()));
}

}  // namespace einit
