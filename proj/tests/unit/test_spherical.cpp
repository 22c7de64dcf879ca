#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "testing.hpp"
#include "uhop/spherical.hpp"

using namespace uhop;

namespace {

SphericalCode planar(std::initializer_list<double> degrees) {
  Matrix m(2, static_cast<Index>(degrees.size()));
  Index j = 0;
  for (double deg : degrees) {
    const double a = deg * std::numbers::pi / 180.0;
    m.col(j++) << std::cos(a), std::sin(a);
  }
  return SphericalCode(m);
}

}  // namespace

TEST(MinimalSeparation, Examples) {
  EXPECT_NEAR(minimal_separation(planar({0, 180})), -1.0, 1e-15);
  EXPECT_NEAR(minimal_separation(planar({40, 40})), 1.0, 1e-15);
  EXPECT_NEAR(minimal_separation(planar({0, 120, 240})), -0.5, 1e-15);
  EXPECT_UHOP_ERROR(minimal_separation(planar({0})), ErrorKind::SinglePoint);
  EXPECT_UHOP_ERROR(SphericalCode(Matrix::Constant(2, 1, 1.0)), ErrorKind::InvalidArgument);
}

TEST(MinimalSeparation, RangeAndRotationInvariance) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Index d = 2 + t % 5;
    Matrix pts = gaussian_matrix(d, 2 + t % 7, rng);
    for (Index j = 0; j < pts.cols(); ++j) pts.col(j).normalize();
    const SphericalCode code(pts);
    const double rho = minimal_separation(code);
    EXPECT_GE(rho, -1.0);
    EXPECT_LE(rho, 1.0);
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, d, rng));
    const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    Matrix rotated = q * pts;
    for (Index j = 0; j < rotated.cols(); ++j) rotated.col(j).normalize();
    EXPECT_NEAR(minimal_separation(SphericalCode(rotated)), rho, 1e-9);
  }
}

TEST(SimplexCode, Examples) {
  const SphericalCode one = simplex_code(1);
  EXPECT_EQ(one.n(), 2);
  EXPECT_NEAR(minimal_separation(one), -1.0, 1e-12);
  EXPECT_NEAR(minimal_separation(simplex_code(2)), -0.5, 1e-12);
  EXPECT_NEAR(minimal_separation(simplex_code(3)), -1.0 / 3.0, 1e-12);
}

TEST(SimplexCode, AllPairsEqual) {
  for (Index d = 1; d <= 12; ++d) {
    const SphericalCode c = simplex_code(d);
    ASSERT_EQ(c.n(), d + 1);
    ASSERT_EQ(c.dim(), d);
    const Matrix g = c.points().transpose() * c.points();
    for (Index i = 0; i < c.n(); ++i)
      for (Index j = 0; j < c.n(); ++j)
        EXPECT_NEAR(g(i, j), i == j ? 1.0 : -1.0 / static_cast<double>(d), 1e-10);
  }
}

TEST(CrossPolytope, Examples) {
  EXPECT_NEAR(minimal_separation(cross_polytope_code(2)), 0.0, 1e-15);
  EXPECT_NEAR(minimal_separation(cross_polytope_code(3)), 0.0, 1e-15);
  EXPECT_NEAR(minimal_separation(cross_polytope_code(1)), -1.0, 1e-15);
  EXPECT_EQ(cross_polytope_code(4).n(), 8);
}

TEST(BruteForceCode, Examples) {
  CodeSearchOptions opt;
  opt.seed = 1;
  EXPECT_NEAR(minimal_separation(brute_force_optimal_code(2, 2, opt)), -1.0, 1e-3);
  EXPECT_NEAR(minimal_separation(brute_force_optimal_code(3, 4, opt)), -1.0 / 3.0, 1e-2);
  EXPECT_NEAR(minimal_separation(brute_force_optimal_code(2, 5, opt)), std::cos(72.0 * std::numbers::pi / 180.0),
              1e-2);
}

TEST(BruteForceCode, ReachesAnalyticOptima) {
  CodeSearchOptions opt;
  opt.seed = 5;
  for (Index d : {2, 3, 4}) {
    EXPECT_LE(minimal_separation(brute_force_optimal_code(d, d + 1, opt)),
              minimal_separation(simplex_code(d)) + 1e-2);
    EXPECT_LE(minimal_separation(brute_force_optimal_code(d, 2 * d, opt)),
              minimal_separation(cross_polytope_code(d)) + 1e-2);
  }
}

TEST(BruteForceCode, DeterministicAndValidated) {
  CodeSearchOptions opt;
  opt.seed = 9;
  opt.restarts = 3;
  EXPECT_EQ(brute_force_optimal_code(3, 5, opt).points(), brute_force_optimal_code(3, 5, opt).points());
  EXPECT_UHOP_ERROR(brute_force_optimal_code(1, 3, opt), ErrorKind::InvalidArgument);
  opt.restarts = 0;
  EXPECT_UHOP_ERROR(brute_force_optimal_code(3, 3, opt), ErrorKind::InvalidArgument);
}
