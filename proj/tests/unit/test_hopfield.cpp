#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "testing.hpp"
#include "uhop/hopfield.hpp"
#include "uhop/train.hpp"

using namespace uhop;

namespace {

Vector gaussian_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

Matrix random_orthogonal(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace

TEST(MhmEnergy, Examples) {
  const PatternSet one = PatternSet::from_unit_columns(Eigen::Vector3d(0, 1, 0));
  for (double beta : {0.1, 1.0, 7.0}) EXPECT_NEAR(mhm_energy(one.column(0), one, beta), -0.5, 1e-15);
  EXPECT_NEAR(mhm_energy(Vector::Zero(3), one, 2.0), 0.0, 1e-15);
  const PatternSet two = PatternSet::from_unit_columns(Matrix::Identity(2, 2));
  EXPECT_NEAR(mhm_energy(two.column(0), two, 1.0), 0.5 - std::log(std::numbers::e + 1.0), 1e-12);
  EXPECT_NEAR(mhm_energy(two.column(0), two, 1.0), -0.81326, 1e-5);
}

TEST(MhmEnergy, DimensionMismatch) {
  const PatternSet two = PatternSet::from_unit_columns(Matrix::Identity(2, 2));
  EXPECT_UHOP_ERROR(mhm_energy(Vector::Zero(3), two, 1.0), ErrorKind::DimensionMismatch);
}

TEST(KhmEnergy, Examples) {
  const PatternSet xi = generate_synthetic(4, 3, 2);
  Rng rng(1);
  const Vector x = gaussian_vector(rng, 3);
  EXPECT_NEAR(khm_energy(x, xi, FeatureMap::identity(3, false), 1.5), mhm_energy(x, xi, 1.5), 1e-9);

  const PatternSet one = generate_synthetic(1, 4, 5);
  const FeatureMap phi(initial_weights(4, 3, 6));
  EXPECT_NEAR(khm_energy(one.column(0), one, phi, 2.0), -0.5, 1e-12);

  // Re-derivation from explicit feature vectors.
  const PatternSet three = generate_synthetic(3, 4, 5);
  const FeatureMap w5(initial_weights(4, 3, 5));
  const Vector fx = w5.w().transpose() * three.column(0);
  const Vector ux = fx / fx.norm();
  double s = 0.0;
  for (Index mu = 0; mu < 3; ++mu) {
    const Vector f = w5.w().transpose() * three.column(mu);
    s += std::exp(2.0 * (f / f.norm()).dot(ux));
  }
  EXPECT_NEAR(khm_energy(three.column(0), three, w5, 2.0), 0.5 * ux.squaredNorm() - std::log(s) / 2.0, 1e-9);
}

TEST(UpdateStep, SingleMemoryIsAbsorbing) {
  const PatternSet one = generate_synthetic(1, 5, 3);
  Rng rng(2);
  const HopfieldConfig cfg;
  for (int t = 0; t < 10; ++t) {
    const auto [next, p] = update_step(gaussian_vector(rng, 5), one, nullptr, cfg);
    EXPECT_LE((next - one.column(0)).norm(), 1e-15);
    EXPECT_EQ(p(0), 1.0);
  }
}

TEST(UpdateStep, EquidistantQueryGivesMidpoint) {
  const PatternSet two = PatternSet::from_unit_columns(Matrix::Identity(2, 2));
  const auto [next, p] = update_step(Eigen::Vector2d(0.3, 0.3), two, nullptr, HopfieldConfig{});
  EXPECT_LE((next - Eigen::Vector2d(0.5, 0.5)).norm(), 1e-15);
}

TEST(UpdateStep, LargeBetaSaturates) {
  Matrix m(3, 3);
  m << 1, 0, -1, 0, 1, 0, 0, 0, 0;
  const PatternSet xi = PatternSet::from_unit_columns(m);
  HopfieldConfig cfg;
  cfg.beta = 1e4;
  const Eigen::Vector3d x(std::cos(0.1), std::sin(0.1), 0.0);
  // Inner-product gap to the nearest other memory.
  ASSERT_GE(x.dot(xi.column(0)) - x.dot(xi.column(1)), 0.5);
  const auto [next, p] = update_step(x, xi, nullptr, cfg);
  EXPECT_LE((next - xi.column(0)).norm(), 1e-3);
}

TEST(Retrieve, SingleMemoryConverges) {
  const PatternSet one = generate_synthetic(1, 4, 9);
  const RetrievalTrace tr = retrieve(Eigen::Vector4d(0.1, -2, 0.3, 0.5), one, nullptr, HopfieldConfig{});
  EXPECT_TRUE(tr.converged);
  // The first update lands on the memory; the second confirms no movement.
  EXPECT_LE((tr.iterates[1] - one.column(0)).norm(), 1e-15);
  EXPECT_EQ(tr.steps, 2);
  EXPECT_EQ(tr.iterates.size(), tr.energies.size());
}

TEST(Retrieve, FixedPointStartTakesOneStep) {
  const PatternSet xi = generate_synthetic(4, 3, 12);
  HopfieldConfig tight;
  tight.beta = 3.0;
  tight.max_iters = 10000;
  tight.fixed_point_tol = 1e-15;
  Rng rng(1);
  const RetrievalTrace pre = retrieve(gaussian_vector(rng, 3), xi, nullptr, tight);
  ASSERT_TRUE(pre.converged);
  HopfieldConfig cfg;
  cfg.beta = 3.0;
  const RetrievalTrace tr = retrieve(pre.iterates.back(), xi, nullptr, cfg);
  EXPECT_TRUE(tr.converged);
  EXPECT_EQ(tr.steps, 1);
  EXPECT_LE((tr.iterates[1] - tr.iterates[0]).norm(), cfg.fixed_point_tol);
}

TEST(Retrieve, SyntheticSettingEnergyNonIncreasing) {
  HopfieldConfig cfg;
  cfg.beta = 4.0;
  cfg.max_iters = 20;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PatternSet xi = generate_synthetic(10, 5, seed);
    Rng rng(seed + 100);
    const RetrievalTrace tr = retrieve(gaussian_vector(rng, 5), xi, nullptr, cfg);
    for (std::size_t t = 1; t < tr.energies.size(); ++t) EXPECT_LE(tr.energies[t], tr.energies[t - 1] + 1e-9);
    if (tr.converged) {
      EXPECT_LE((tr.iterates.back() - tr.iterates[tr.iterates.size() - 2]).norm(), cfg.fixed_point_tol);
    }
  }
}

TEST(Retrieve, RejectsNonFiniteQuery) {
  const PatternSet xi = generate_synthetic(2, 2, 1);
  EXPECT_UHOP_ERROR(retrieve(Eigen::Vector2d(NAN, 0), xi, nullptr, HopfieldConfig{}), ErrorKind::NonFinite);
}

TEST(RetrievalError, Examples) {
  const PatternSet xi = generate_synthetic(3, 4, 2);
  EXPECT_EQ(retrieval_error(xi.column(1), xi, 1), 0.0);
  EXPECT_NEAR(retrieval_error((-xi.column(2)).eval(), xi, 2), 2.0, 1e-15);
  Rng rng(2);
  const Vector x = gaussian_vector(rng, 4);
  double s = 0.0;
  for (Index i = 0; i < 4; ++i) s += (x(i) - xi.column(0)(i)) * (x(i) - xi.column(0)(i));
  EXPECT_NEAR(retrieval_error(x, xi, 0), std::sqrt(s), 1e-12);
  EXPECT_UHOP_ERROR(retrieval_error(x, xi, 3), ErrorKind::IndexOutOfRange);
}

TEST(HopfieldProperties, EnergyMonotoneAlongTraces) {
  Rng rng(2024);
  for (int inst = 0; inst < 200; ++inst) {
    const Index d = 2 + static_cast<Index>(rng.bits() % 9);
    const Index m = 1 + static_cast<Index>(rng.bits() % 20);
    const PatternSet xi = generate_synthetic(m, d, rng.bits());
    HopfieldConfig cfg;
    cfg.beta = 0.2 + 8.0 * rng.uniform();
    cfg.max_iters = 30;
    const bool kernel = inst % 2 == 1;
    const FeatureMap phi(gaussian_matrix(d, 2 + static_cast<Index>(rng.bits() % 6), rng), false);
    const RetrievalTrace tr = retrieve(gaussian_vector(rng, d), xi, kernel ? &phi : nullptr, cfg);
    for (std::size_t t = 1; t < tr.energies.size(); ++t) {
      ASSERT_LE(tr.energies[t], tr.energies[t - 1] + 1e-9) << "instance " << inst << " step " << t;
    }
  }
}

TEST(HopfieldProperties, UpdateInConvexHull) {
  Rng rng(5);
  for (auto kind : {NormalizationKind::Softmax, NormalizationKind::Sparsemax, NormalizationKind::Entmax15}) {
    for (int t = 0; t < 50; ++t) {
      const PatternSet xi = generate_synthetic(6, 4, rng.bits());
      HopfieldConfig cfg;
      cfg.norm.kind = kind;
      cfg.beta = 5.0;
      const auto [next, p] = update_step(gaussian_vector(rng, 4), xi, nullptr, cfg);
      EXPECT_GE(p.minCoeff(), 0.0);
      EXPECT_NEAR(p.sum(), 1.0, 1e-9);
      EXPECT_LE((next - xi.matrix() * p).norm(), 1e-12);
    }
  }
}

TEST(HopfieldProperties, OrthogonalLinearMapReproducesMhm) {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const Index d = 2 + static_cast<Index>(rng.bits() % 7);
    const PatternSet xi = generate_synthetic(5, d, rng.bits());
    const FeatureMap phi(random_orthogonal(d, rng), false);
    HopfieldConfig cfg;
    cfg.beta = 3.0;
    const Vector x = gaussian_vector(rng, d);
    const auto [a, pa] = update_step(x, xi, &phi, cfg);
    const auto [b, pb] = update_step(x, xi, nullptr, cfg);
    EXPECT_LE((a - b).norm(), 1e-9);
    EXPECT_NEAR(khm_energy(x, xi, phi, cfg.beta), mhm_energy(x, xi, cfg.beta), 1e-9);
  }
}

TEST(HopfieldProperties, WellSeparatedMemoriesAreRetrieved) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PatternSet xi = generate_synthetic(5, 8, seed);
    const FeatureMap phi = FeatureMap::identity(8);
    const SeparationStats st = separation_stats(phi, xi);
    ASSERT_GT(st.r_phi, 0.0);
    HopfieldConfig cfg;
    // Twice the smallest beta meeting the well-separation threshold.
    cfg.beta = 2.0 * std::log(2.0 * (xi.m() - 1) / st.r_phi) / st.delta_min;
    cfg.max_iters = 200;
    for (Index mu = 0; mu < xi.m(); ++mu) {
      const RetrievalTrace tr = retrieve(xi.column(mu), xi, &phi, cfg);
      EXPECT_TRUE(tr.converged);
      EXPECT_LE(retrieval_error(tr.iterates.back(), xi, mu), st.r_phi);
    }
  }
}

TEST(HopfieldConfig, Validation) {
  HopfieldConfig cfg;
  cfg.beta = 0.0;
  EXPECT_UHOP_ERROR(cfg.validate(), ErrorKind::InvalidArgument);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_UHOP_ERROR(cfg.validate(), ErrorKind::InvalidArgument);
  cfg = {};
  cfg.fixed_point_tol = 0.0;
  EXPECT_UHOP_ERROR(cfg.validate(), ErrorKind::InvalidArgument);
}
