#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "einit/core.hpp"
#include "einit/perturb.hpp"

// Procedural surface samplings used as the bundled test clouds. They are
// deliberately asymmetric (no mirror plane, distinct principal axes) and sized
// to roughly unit scale.

namespace einit::shapes {

namespace detail {

using Vec3 = Eigen::Vector3d;

inline Vec3 unit_sphere(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-12);
  return v.normalized();
}

inline Vec3 ellipsoid(Rng& rng, const Vec3& c, const Vec3& radii) {
  return c + unit_sphere(rng).cwiseProduct(radii);
}

/// Surface of a tapered tube from `a` to `b`.
inline Vec3 tube(Rng& rng, const Vec3& a, const Vec3& b, double r0, double r1) {
  const Vec3 axis = (b - a).normalized();
  Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = axis.cross(helper).normalized();
  const Vec3 e2 = axis.cross(e1);
  const double t = rng.uniform();
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = r0 + (r1 - r0) * t;
  return a + t * (b - a) + r * (std::cos(phi) * e1 + std::sin(phi) * e2);
}

/// Torus arc in the plane spanned by e1, e2 around `c`.
inline Vec3 torus_arc(Rng& rng, const Vec3& c, const Vec3& e1, const Vec3& e2, double major, double minor,
                      double from, double to) {
  const double theta = rng.uniform(from, to);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Vec3 radial = std::cos(theta) * e1 + std::sin(theta) * e2;
  const Vec3 normal = e1.cross(e2).normalized();
  return c + (major + minor * std::cos(phi)) * radial + minor * std::sin(phi) * normal;
}

struct Part {
  double weight;
  std::function<Vec3(Rng&)> sample;
};

inline PointCloud assemble(Index n, std::uint64_t seed, const std::vector<Part>& parts, double scale = 1.0) {
  Rng rng(seed);
  double total = 0.0;
  for (const Part& p : parts) total += p.weight;
  Matrix m(3, n);
  Index col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Index count = k + 1 == parts.size()
                            ? n - col
                            : static_cast<Index>(std::floor(parts[k].weight / total * static_cast<double>(n)));
    for (Index i = 0; i < count; ++i) m.col(col++) = parts[k].sample(rng);
  }
  // Scatter the part blocks so no column order carries structure.
  PermutationMap shuffle = random_permutation(n, rng);
  PointCloud cloud = permute_columns(PointCloud(std::move(m)), shuffle);
  return PointCloud(scale * center(cloud).cloud.matrix());
}

}  // namespace detail

/// Squat body with a spout on one side, a handle on the other and an off-axis knob.
inline PointCloud teapot_like(Index n = 1000, std::uint64_t seed = 0x7ea907ull) {
  using detail::Vec3;
  return detail::assemble(
      n, seed,
      {
          {0.60, [](Rng& r) { return detail::ellipsoid(r, Vec3(0, 0, 0), Vec3(0.30, 0.17, 0.22)); }},
          {0.15, [](Rng& r) { return detail::tube(r, Vec3(0.24, 0.02, -0.04), Vec3(0.50, 0.07, 0.17), 0.06, 0.022); }},
          {0.15, [](Rng& r) {
             return detail::torus_arc(r, Vec3(-0.30, -0.02, 0.03), Vec3(1, 0, 0), Vec3(0, 0.15, 0.99).normalized(), 0.12,
                                      0.025, 0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
           }},
          {0.10, [](Rng& r) { return detail::ellipsoid(r, Vec3(0.05, 0.04, 0.24), Vec3(0.05, 0.04, 0.035)); }},
      });
}

/// Round body, a head offset forward and up, two unequal ears and a tail.
inline PointCloud bunny_like(Index n = 1000, std::uint64_t seed = 0xb0bb1eull) {
  using detail::Vec3;
  return detail::assemble(
      n, seed,
      {
          {0.55, [](Rng& r) { return detail::ellipsoid(r, Vec3(0, 0, 0), Vec3(0.24, 0.15, 0.17)); }},
          {0.22, [](Rng& r) { return detail::ellipsoid(r, Vec3(0.21, 0.03, 0.15), Vec3(0.10, 0.08, 0.08)); }},
          {0.09, [](Rng& r) { return detail::tube(r, Vec3(0.22, 0.07, 0.20), Vec3(0.18, 0.12, 0.42), 0.03, 0.015); }},
          {0.08, [](Rng& r) { return detail::tube(r, Vec3(0.22, -0.01, 0.20), Vec3(0.12, -0.07, 0.38), 0.03, 0.012); }},
          {0.06, [](Rng& r) { return detail::ellipsoid(r, Vec3(-0.25, 0.01, 0.04), Vec3(0.04, 0.04, 0.04)); }},
      },
      0.8);
}

/// Long body, four legs of slightly different lengths, a lowered head and a tail.
inline PointCloud cow_like(Index n = 1000, std::uint64_t seed = 0xc0ffeeull) {
  using detail::Vec3;
  return detail::assemble(
      n, seed,
      {
          {0.50, [](Rng& r) { return detail::ellipsoid(r, Vec3(0, 0, 0), Vec3(0.38, 0.13, 0.17)); }},
          {0.07, [](Rng& r) { return detail::tube(r, Vec3(0.25, 0.07, -0.10), Vec3(0.26, 0.08, -0.40), 0.035, 0.025); }},
          {0.07, [](Rng& r) { return detail::tube(r, Vec3(0.24, -0.07, -0.10), Vec3(0.22, -0.09, -0.38), 0.035, 0.025); }},
          {0.07, [](Rng& r) { return detail::tube(r, Vec3(-0.26, 0.07, -0.10), Vec3(-0.27, 0.07, -0.41), 0.035, 0.025); }},
          {0.07, [](Rng& r) { return detail::tube(r, Vec3(-0.25, -0.07, -0.10), Vec3(-0.24, -0.10, -0.37), 0.035, 0.025); }},
          {0.17, [](Rng& r) { return detail::ellipsoid(r, Vec3(0.45, 0.02, 0.08), Vec3(0.12, 0.07, 0.08)); }},
          {0.05, [](Rng& r) { return detail::tube(r, Vec3(-0.37, 0.0, 0.08), Vec3(-0.47, 0.03, -0.15), 0.015, 0.01); }},
      });
}

inline PointCloud by_name(const std::string& name, Index n = 1000) {
  if (name == "teapot") return teapot_like(n);
  if (name == "bunny") return bunny_like(n);
  if (name == "cow") return cow_like(n);
  fail(ErrorKind::InvalidInput, "unknown shape '" + name + "' (expected teapot, bunny or cow)");
}

}  // namespace einit::shapes
