#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "einit/core.hpp"

namespace einit {

struct Neighbor {
  Index index = -1;
  double distance = std::numeric_limits<double>::infinity();
};

/// Exact k-d tree over the columns of a cloud. Median split on the axis of
/// largest spread. Immutable after construction, so concurrent queries are safe.
class NeighborIndex {
 public:
  static constexpr Index kDefaultLeafSize = 16;

  explicit NeighborIndex(const PointCloud& target, Index leaf_size = kDefaultLeafSize)
      : points_(target.matrix()), leaf_size_(std::max<Index>(1, leaf_size)) {
    order_.resize(static_cast<std::size_t>(points_.cols()));
    std::iota(order_.begin(), order_.end(), Index{0});
    nodes_.reserve(static_cast<std::size_t>(2 * points_.cols() / leaf_size_ + 2));
    build(0, points_.cols());
  }

  Index dim() const noexcept { return points_.rows(); }
  Index size() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }

  /// Global minimizer of the Euclidean distance; ties go to the lowest column index.
  template <typename Derived>
  Neighbor nearest(const Eigen::MatrixBase<Derived>& query) const {
    if (query.size() != dim()) fail(ErrorKind::InvalidInput, "nearest: query dimension mismatch");
    Index best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    const Vector q = query;
    search(0, q, best, best_d2);
    return {best, std::sqrt(best_d2)};
  }

 private:
  struct Node {
    Index begin = 0;
    Index end = 0;
    Index axis = -1;  // -1 marks a leaf
    double split = 0.0;
    Index left = -1;
    Index right = -1;
  };

  Index build(Index begin, Index end) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Index axis = 0;
    double widest = -1.0;
    for (Index k = 0; k < dim(); ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (Index i = begin; i < end; ++i) {
        const double v = points_(k, order_[static_cast<std::size_t>(i)]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = k;
      }
    }
    if (widest <= 0.0) return id;  // all points coincide

    const Index mid = begin + (end - begin) / 2;
    auto first = order_.begin() + begin;
    std::nth_element(first, order_.begin() + mid, order_.begin() + end, [&](Index a, Index b) {
      return points_(axis, a) < points_(axis, b);
    });
    const double split = points_(axis, order_[static_cast<std::size_t>(mid)]);

    const Index left = build(begin, mid);
    const Index right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  // Left subtree holds coordinates <= split, right subtree >= split.
  void search(Index id, const Vector& q, Index& best, double& best_d2) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index col = order_[static_cast<std::size_t>(i)];
        double d2 = 0.0;
        for (Index k = 0; k < q.size(); ++k) {
          const double diff = points_(k, col) - q(k);
          d2 += diff * diff;
        }
        if (d2 < best_d2 || (d2 == best_d2 && col < best)) {
          best_d2 = d2;
          best = col;
        }
      }
      return;
    }
    const double diff = q(node.axis) - node.split;
    const Index near = diff <= 0.0 ? node.left : node.right;
    const Index far = diff <= 0.0 ? node.right : node.left;
    search(near, q, best, best_d2);
    if (diff * diff <= best_d2) search(far, q, best, best_d2);
  }

  Matrix points_;
  Index leaf_size_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

inline NeighborIndex build_index(const PointCloud& target) { return NeighborIndex(target); }

template <typename Derived>
Neighbor nearest(const NeighborIndex& index, const Eigen::MatrixBase<Derived>& query) {
  return index.nearest(query);
}

struct MatchOptions {
  /// Adds target -> source distances to the aggregate (Chamfer-style).
  bool symmetric = false;
};

struct MatchResult {
  PermutationMap assignment;  // source column -> nearest target column
  std::vector<double> distances;
  double score = 0.0;         // RMS of nearest distances
};

/// Nearest-neighbour matching distance of `source` into an already indexed target.
inline MatchResult match_score(const PointCloud& source, const NeighborIndex& target_index) {
  if (source.dim() != target_index.dim()) fail(ErrorKind::InvalidInput, "match_score: dimension mismatch");
  const Index n = source.size();
  MatchResult out;
  out.assignment.assignment.resize(static_cast<std::size_t>(n));
  out.distances.resize(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Neighbor nb = target_index.nearest(source.point(i));
    out.assignment.assignment[static_cast<std::size_t>(i)] = nb.index;
    out.distances[static_cast<std::size_t>(i)] = nb.distance;
    sum += nb.distance * nb.distance;
  }
  out.assignment.bijective = n == target_index.size() && out.assignment.is_permutation();
  out.score = std::sqrt(sum / static_cast<double>(n));
  return out;
}

inline MatchResult match_score(const PointCloud& source, const PointCloud& target,
                               const MatchOptions& options = {}) {
  if (source.dim() != target.dim()) fail(ErrorKind::InvalidInput, "match_score: dimension mismatch");
  MatchResult forward = match_score(source, NeighborIndex(target));
  if (!options.symmetric) return forward;

  const MatchResult backward = match_score(target, NeighborIndex(source));
  const double ns = static_cast<double>(source.size());
  const double nt = static_cast<double>(target.size());
  const double total = forward.score * forward.score * ns + backward.score * backward.score * nt;
  forward.score = std::sqrt(total / (ns + nt));
  return forward;
}

}  // namespace einit
