#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "einit/core.hpp"

namespace einit {

/// Seeded generator with platform-independent output. The engine is
/// std::mt19937_64 (its sequence is fixed by the standard); the conversions to
/// uniform and normal variates are done here because the standard
/// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Marsaglia polar method).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t r = 0;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Independent stream seed for (master seed, trial index, stage name). Adding
/// a new stage name never changes the seeds of existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::string_view stage) {
  return splitmix64(master ^ splitmix64(index ^ splitmix64(fnv1a(stage))));
}

inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) { return derive_seed(seed, 0, stage); }

// ---------------------------------------------------------------------------

inline PointCloud random_cloud(Index n, Index d, double half_width, Rng& rng) {
  if (n < 1 || d < 1) fail(ErrorKind::InvalidInput, "random_cloud: n and d must be >= 1");
  if (!(half_width >= 0.0)) fail(ErrorKind::InvalidInput, "random_cloud: half_width must be >= 0");
  Matrix m(d, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) m(i, j) = rng.uniform(-half_width, half_width);
  }
  return PointCloud(std::move(m));
}

/// Haar-distributed element of O(d): QR of a Gaussian matrix with the signs of
/// R's diagonal folded into Q. Both determinant signs occur with probability 1/2.
inline Matrix random_orthogonal(Index d, Rng& rng) {
  Matrix g(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k) {
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  }
  return q;
}

/// Fisher-Yates shuffle of 0..n-1.
inline PermutationMap random_permutation(Index n, Rng& rng) {
  PermutationMap p = PermutationMap::identity(n);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(p.assignment[static_cast<std::size_t>(i)], p.assignment[static_cast<std::size_t>(j)]);
  }
  return p;
}

enum class CorruptionKind { Multiplicative, Additive, Occlusion };

inline const char* to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::Multiplicative: return "multiplicative";
    case CorruptionKind::Additive: return "additive";
    case CorruptionKind::Occlusion: return "occlusion";
  }
  return "unknown";
}

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::Multiplicative;
  double value = 0.0;  // sigma for the noise models, alpha for occlusion

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

struct SceneTruth {
  Matrix orthogonal;       // O
  PermutationMap permutation;  // S: source column i lands in target column assignment[i]
  PointCloud source;       // P
  PointCloud clean_target; // Q = O P S
  PointCloud target;       // Q', the corrupted target; its first n columns correspond to Q
  std::vector<CorruptionSpec> corruption;
};

inline SceneTruth random_scene(const PointCloud& source, Rng& rng) {
  Matrix o = random_orthogonal(source.dim(), rng);
  PermutationMap s = random_permutation(source.size(), rng);
  PointCloud q = permute_columns(PointCloud(o * source.matrix()), s);
  return SceneTruth{std::move(o), std::move(s), source, q, q, {}};
}

/// Q' = Q (.) N with N_ij ~ N(1, sigma^2).
inline PointCloud multiplicative_noise(const PointCloud& q, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) fail(ErrorKind::InvalidInput, "multiplicative_noise: sigma must be >= 0");
  Matrix out = q.matrix();
  if (sigma == 0.0) return PointCloud(std::move(out));
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) out(i, j) *= rng.normal(1.0, sigma);
  }
  return PointCloud(std::move(out));
}

/// Q' = Q + N with N_ij ~ N(0, sigma^2).
inline PointCloud additive_noise(const PointCloud& q, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) fail(ErrorKind::InvalidInput, "additive_noise: sigma must be >= 0");
  Matrix out = q.matrix();
  if (sigma == 0.0) return PointCloud(std::move(out));
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) out(i, j) += rng.normal(0.0, sigma);
  }
  return PointCloud(std::move(out));
}

/// Appends floor(alpha * n) points drawn uniformly in the axis-aligned bounding
/// box of `q`. The original columns keep their positions.
inline PointCloud occlude(const PointCloud& q, double alpha, Rng& rng) {
  if (!(alpha >= 0.0)) fail(ErrorKind::InvalidInput, "occlude: alpha must be >= 0");
  const auto extra = static_cast<Index>(std::floor(alpha * static_cast<double>(q.size())));
  if (extra == 0) return q;
  const Vector lo = q.matrix().rowwise().minCoeff();
  const Vector hi = q.matrix().rowwise().maxCoeff();
  Matrix out(q.dim(), q.size() + extra);
  out.leftCols(q.size()) = q.matrix();
  for (Index j = q.size(); j < out.cols(); ++j) {
    for (Index i = 0; i < q.dim(); ++i) out(i, j) = rng.uniform(lo(i), hi(i));
  }
  return PointCloud(std::move(out));
}

/// Drops floor(fraction * n) uniformly chosen columns (true occlusion rather
/// than clutter). Surviving columns keep their relative order; `kept` receives
/// their original indices.
inline PointCloud remove_points(const PointCloud& q, double fraction, Rng& rng, std::vector<Index>* kept = nullptr) {
  if (!(fraction >= 0.0) || fraction >= 1.0) fail(ErrorKind::InvalidInput, "remove_points: fraction must be in [0, 1)");
  const auto drop = static_cast<Index>(std::floor(fraction * static_cast<double>(q.size())));
  PermutationMap order = random_permutation(q.size(), rng);
  std::vector<Index> survivors(order.assignment.begin() + drop, order.assignment.end());
  std::sort(survivors.begin(), survivors.end());
  Matrix out(q.dim(), static_cast<Index>(survivors.size()));
  for (Index k = 0; k < out.cols(); ++k) out.col(k) = q.point(survivors[static_cast<std::size_t>(k)]);
  if (kept) *kept = survivors;
  return PointCloud(std::move(out));
}

inline PointCloud apply_corruption(const PointCloud& q, const CorruptionSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case CorruptionKind::Multiplicative: return multiplicative_noise(q, spec.value, rng);
    case CorruptionKind::Additive: return additive_noise(q, spec.value, rng);
    case CorruptionKind::Occlusion: return occlude(q, spec.value, rng);
  }
  return q;
}

/// Applies the specs in the fixed order multiplicative, additive, occlusion.
/// Each stage draws from its own stream stage_seed(seed, kind name), so a
/// single-spec superposition equals the direct call with that seed.
inline PointCloud superpose(const PointCloud& q, std::vector<CorruptionSpec> specs, std::uint64_t seed) {
  std::stable_sort(specs.begin(), specs.end(),
                   [](const CorruptionSpec& a, const CorruptionSpec& b) { return a.kind < b.kind; });
  for (std::size_t k = 1; k < specs.size(); ++k) {
    if (specs[k].kind == specs[k - 1].kind) fail(ErrorKind::InvalidInput, "superpose: duplicate corruption kind");
  }
  PointCloud out = q;
  for (const CorruptionSpec& spec : specs) {
    Rng rng(stage_seed(seed, to_string(spec.kind)));
    out = apply_corruption(out, spec, rng);
  }
  return out;
}

inline void corrupt(SceneTruth& scene, const std::vector<CorruptionSpec>& specs, std::uint64_t seed) {
  scene.target = superpose(scene.clean_target, specs, seed);
  scene.corruption = specs;
}

}  // namespace einit
