#include <gtest/gtest.h>

#include "einit/metrics.hpp"
#include "einit/shapes.hpp"
#include "test_support.hpp"

using namespace einit;

namespace {

RegistrationResult exact_result(const SceneTruth& s) {
  RegistrationResult r;
  r.init_motion = {s.orthogonal, Vector::Zero(s.source.dim())};
  r.final_motion = r.init_motion;
  r.refine.motion = r.final_motion;
  r.refine.correspondences = s.permutation;
  return r;
}

}  // namespace

TEST(Evaluate, PerfectRecovery) {
  Rng rng(51);
  const SceneTruth s = random_scene(shapes::teapot_like(200), rng);
  const TrialRecord t = evaluate(s, exact_result(s));
  EXPECT_LT(t.delta_spec, 1e-14);
  EXPECT_LT(t.delta_o, 1e-14);
  ASSERT_TRUE(t.delta_h.has_value());
  EXPECT_EQ(*t.delta_h, 0.0);
  EXPECT_EQ(t.nu, 0.0);
  EXPECT_TRUE(t.success);
}

TEST(HammingDistance, OneTransposition) {
  PermutationMap a = PermutationMap::identity(100);
  PermutationMap b = a;
  std::swap(b.assignment[3], b.assignment[71]);
  EXPECT_DOUBLE_EQ(hamming_distance(a, b), 0.02);
  EXPECT_DOUBLE_EQ(hamming_distance(b, a), 0.02);
  EXPECT_EQ(hamming_distance(a, a), 0.0);
  EXPECT_THROW(hamming_distance(a, PermutationMap::identity(5)), Error);
}

TEST(HammingDistance, CountsDisagreements) {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const PermutationMap a = random_permutation(30, rng);
    const PermutationMap b = random_permutation(30, rng);
    int differ = 0;
    for (std::size_t i = 0; i < 30; ++i) differ += a.assignment[i] != b.assignment[i];
    // Frobenius form: each disagreeing row leaves a +1 and a -1 in S_a - S_b.
    Matrix sa = Matrix::Zero(30, 30);
    Matrix sb = Matrix::Zero(30, 30);
    for (Index i = 0; i < 30; ++i) {
      sa(i, a.assignment[static_cast<std::size_t>(i)]) = 1;
      sb(i, b.assignment[static_cast<std::size_t>(i)]) = 1;
    }
    EXPECT_DOUBLE_EQ(hamming_distance(a, b), differ / 30.0);
    EXPECT_DOUBLE_EQ(hamming_distance(a, b), (sa - sb).squaredNorm() / 60.0);
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
  }
}

TEST(Evaluate, ScaleInvariance) {
  Rng rng(53);
  const PointCloud p = shapes::bunny_like(200);
  SceneTruth s = random_scene(p, rng);
  corrupt(s, {{CorruptionKind::Additive, 0.02}, {CorruptionKind::Occlusion, 0.1}}, 4);
  const RegistrationResult r = register_clouds(s.source, s.target, GroupKind::Ref);
  const TrialRecord a = evaluate(s, r);

  const double k = 7.5;
  SceneTruth big = s;
  big.source = PointCloud(k * s.source.matrix());
  big.clean_target = PointCloud(k * s.clean_target.matrix());
  big.target = PointCloud(k * s.target.matrix());
  RegistrationResult rb = r;
  rb.final_motion.translation *= k;
  rb.init_motion.translation *= k;
  const TrialRecord b = evaluate(big, rb);
  EXPECT_NEAR(a.nu, b.nu, 1e-12);
  EXPECT_NEAR(a.delta, b.delta, 1e-12);
  EXPECT_NEAR(a.delta_spec, b.delta_spec, 1e-12);
  EXPECT_NEAR(a.delta_icp, b.delta_icp, 1e-12);
}

TEST(Evaluate, OcclusionUsesMatchedSubsetAndSkipsHamming) {
  Rng rng(54);
  SceneTruth s = random_scene(shapes::cow_like(200), rng);
  corrupt(s, {{CorruptionKind::Occlusion, 0.5}}, 8);
  ASSERT_EQ(s.target.size(), 300);
  const TrialRecord t = evaluate(s, register_clouds(s.source, s.target, GroupKind::Ref));
  EXPECT_FALSE(t.delta_h.has_value());
  EXPECT_GT(t.nu, 0.0);
  EXPECT_TRUE(std::isfinite(t.delta));
}

TEST(Evaluate, NuComparesClutterAgainstZero) {
  Rng rng(55);
  const PointCloud p = random_cloud(10, 2, 1.0, rng);
  SceneTruth s = random_scene(p, rng);
  Matrix extra(2, 11);
  extra.leftCols(10) = s.clean_target.matrix();
  extra.col(10) = Eigen::Vector2d(3, 4);
  s.target = PointCloud(extra);
  const TrialRecord t = evaluate(s, exact_result(s));
  EXPECT_NEAR(t.nu, 5.0 / spectral_norm(p.matrix()), 1e-12);
}

TEST(Evaluate, InitialAndFinalDifferences) {
  Rng rng(56);
  const SceneTruth s = random_scene(shapes::teapot_like(200), rng);
  RegistrationResult r = exact_result(s);
  r.init_motion = RigidMotion::identity(3);
  const TrialRecord t = evaluate(s, r);
  EXPECT_NEAR(t.delta_icp_o, spectral_norm(Matrix::Identity(3, 3) - s.orthogonal), 1e-12);
  EXPECT_GT(t.delta_icp, 0.0);
}

TEST(Evaluate, RejectsInconsistentInputs) {
  Rng rng(57);
  const SceneTruth s = random_scene(random_cloud(20, 3, 1.0, rng), rng);
  RegistrationResult r = exact_result(s);
  r.refine.correspondences.assignment.pop_back();
  EXPECT_THROW(evaluate(s, r), Error);
}

TEST(SuccessRate, Examples) {
  std::vector<TrialRecord> all(4);
  for (auto& r : all) r.success = true;
  EXPECT_EQ(success_rate(all), 1.0);
  all[0].success = all[1].success = false;
  EXPECT_EQ(success_rate(all), 0.5);
  EXPECT_THROW(success_rate({}), Error);
}

TEST(SuccessRate, NoiselessTrialsAllSucceed) {
  Rng rng(58);
  std::vector<TrialRecord> records;
  for (int trial = 0; trial < 100; ++trial) {
    const SceneTruth s = random_scene(random_cloud(100, 3, 20.0, rng), rng);
    records.push_back(evaluate(s, register_clouds(s.source, s.target, GroupKind::Ref)));
  }
  EXPECT_EQ(success_rate(records), 1.0);
}

TEST(EllipsoidDeviation, Examples) {
  Rng rng(59);
  const PointCloud q = random_cloud(50, 3, 1.0, rng);
  EXPECT_EQ(ellipsoid_deviation(q, q).spectral, 0.0);
  const EllipsoidDeviation twice = ellipsoid_deviation(q, PointCloud(2.0 * q.matrix()));
  EXPECT_NEAR(twice.spectral, 3.0, 1e-12);
  EXPECT_NEAR(twice.frobenius, 3.0, 1e-12);
  try {
    ellipsoid_deviation(PointCloud(Matrix::Ones(3, 4)), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateCloud);
  }
}

TEST(EllipsoidDeviation, BoundHoldsAtSmallMultiplicativeNoise) {
  Rng rng(60);
  const double sigma = 0.05;
  const double bound = std::sqrt(3.0 * 3 * sigma) + sigma * sigma;
  const PointCloud q = shapes::teapot_like(500);
  int exceed = 0;
  for (int k = 0; k < 1000; ++k) {
    exceed += ellipsoid_deviation(q, multiplicative_noise(q, sigma, rng)).spectral > bound ? 1 : 0;
  }
  EXPECT_LE(exceed, 100);
}
