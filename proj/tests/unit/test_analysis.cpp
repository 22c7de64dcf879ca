#include <cmath>
#include <vector>

#include "testing.hpp"
#include "uhop/analysis.hpp"
#include "uhop/presets.hpp"

using namespace uhop;

namespace {

PatternSet antipodal_x() {
  Matrix m(2, 2);
  m << 1, -1, 0, 0;
  return PatternSet::from_unit_columns(m);
}

double histogram_sum(const MetaHistogram& h) {
  double s = 0.0;
  for (int b = 0; b <= MetaHistogram::kOverflow; ++b) s += h.percent(b);
  return s;
}

}  // namespace

TEST(MetastableSize, Examples) {
  const Normalization soft{};
  EXPECT_EQ(metastable_size(Eigen::Vector3d(1, 0, 0), soft), 1);
  EXPECT_EQ(metastable_size(Vector::Constant(10, 0.1), soft), 10);
  EXPECT_EQ(metastable_size(Eigen::Vector2d(0.995, 0.005), soft), 1);
}

TEST(MetastableSize, SparseMapsCountExactZeros) {
  const Normalization sparse{NormalizationKind::Sparsemax};
  EXPECT_EQ(metastable_size(Eigen::Vector3d(0.995, 0.005, 0.0), sparse), 2);
  const Normalization ent{NormalizationKind::Entmax15};
  EXPECT_EQ(metastable_size(Eigen::Vector3d(0.5, 0.5, 0.0), ent), 2);
}

TEST(MetastableSize, RejectsNonSimplex) {
  const Normalization soft{};
  EXPECT_UHOP_ERROR(metastable_size(Eigen::Vector2d(0.5, 0.6), soft), ErrorKind::NotOnSimplex);
  EXPECT_UHOP_ERROR(metastable_size(Eigen::Vector2d(1.5, -0.5), soft), ErrorKind::NotOnSimplex);
  EXPECT_UHOP_ERROR(metastable_size(Vector(0), soft), ErrorKind::NotOnSimplex);
}

TEST(MetaHistogram, OverflowBucketAndTotals) {
  MetaHistogram h;
  for (int s : {1, 1, 3, 10, 14, 0}) h.add(s);
  EXPECT_EQ(h.total_queries, 6u);
  EXPECT_EQ(h.counts[10], 2u);
  EXPECT_NEAR(h.percent(1), 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(histogram_sum(h), 100.0, 0.1);
  EXPECT_EQ(MetaHistogram::label(10), "10+");
}

TEST(MetastableDistribution, SingleMemory) {
  const PatternSet one = generate_synthetic(1, 3, 1);
  const MetaHistogram h = metastable_distribution(gaussian_queries(3, 50, 2), one, nullptr, HopfieldConfig{});
  EXPECT_EQ(h.percent(1), 100.0);
  EXPECT_EQ(h.total_queries, 50u);
}

TEST(MetastableDistribution, AntipodalPairSaturates) {
  const PatternSet xi = antipodal_x();
  Rng rng(3);
  Matrix q(2, 40);
  for (Index j = 0; j < 40; ++j) {
    const double side = j % 2 == 0 ? 1.0 : -1.0;
    q.col(j) << side + 0.1 * rng.gaussian(), 0.1 * rng.gaussian();
  }
  HopfieldConfig cfg;
  cfg.beta = 20.0;
  // Weight on the far memory after one step is at most 1/(1 + e^{20 * 2 * 0.7}).
  ASSERT_LT(1.0 / (1.0 + std::exp(20.0 * 2.0 * 0.7)), 0.01);
  const MetaHistogram h = metastable_distribution(q, xi, nullptr, cfg);
  EXPECT_EQ(h.percent(1), 100.0);
}

TEST(MetastableDistribution, SyntheticPresetUntrainedHasLargeStates) {
  const Preset& p = find_preset("synthetic-meta");
  const MetaInputs in = synthetic_meta_inputs(p, 7);
  const MetaHistogram h = metastable_distribution(in.queries, in.memories, nullptr, hopfield_config(p));
  double large = 0.0;
  for (int b = 5; b <= MetaHistogram::kOverflow; ++b) large += h.percent(b);
  EXPECT_GT(large, 0.0);
  EXPECT_NEAR(histogram_sum(h), 100.0, 0.1);
  EXPECT_EQ(h.total_queries, 500u);
}

TEST(MetastableDistribution, ThreadCountDoesNotChangeResult) {
  const Preset& p = find_preset("synthetic-meta");
  const MetaInputs in = synthetic_meta_inputs(p, 3);
  const HopfieldConfig cfg = hopfield_config(p);
  const MetaHistogram a = metastable_distribution(in.queries, in.memories, nullptr, cfg, 1);
  const MetaHistogram b = metastable_distribution(in.queries, in.memories, nullptr, cfg, 4);
  EXPECT_EQ(a.counts, b.counts);
}

TEST(MetastableDistribution, Errors) {
  const PatternSet xi = generate_synthetic(3, 3, 1);
  EXPECT_UHOP_ERROR(metastable_distribution(Matrix(3, 0), xi, nullptr, HopfieldConfig{}), ErrorKind::InvalidArgument);
  EXPECT_UHOP_ERROR(metastable_distribution(Matrix::Ones(2, 4), xi, nullptr, HopfieldConfig{}),
                    ErrorKind::DimensionMismatch);
}

TEST(EnergyLandscape, SingleAttractor) {
  const PatternSet one = PatternSet::from_unit_columns(Eigen::Vector2d(1, 0));
  const GridSpec grid{-1.5, 1.5, -1.5, 1.5, 40, 40};
  const GridResult r = energy_landscape(one, nullptr, 20.0, grid);
  Index row, col;
  r.values.minCoeff(&row, &col);
  const double step = 3.0 / 39.0;
  EXPECT_LE(std::abs(grid.x(static_cast<int>(col)) - 1.0), step);
  EXPECT_LE(std::abs(grid.y(static_cast<int>(row))), step);
}

TEST(EnergyLandscape, PresetGridShapeAndFinite) {
  const Preset& p = find_preset("contours-2pt");
  const PatternSet xi = generate_synthetic(p.m, p.d, 1);
  const GridResult r = energy_landscape(xi, nullptr, p.beta, grid_spec(p));
  EXPECT_EQ(r.values.rows(), 40);
  EXPECT_EQ(r.values.cols(), 40);
  EXPECT_EQ(r.values.size(), 1600);
  EXPECT_TRUE(r.values.allFinite());
  EXPECT_EQ(r.kind, GridKind::Energy);
}

TEST(EnergyLandscape, ReflectionSymmetry) {
  const PatternSet xi = antipodal_x();
  const GridSpec grid{-1.2, 1.2, -1.0, 1.0, 41, 30};
  const GridResult r = energy_landscape(xi, nullptr, 3.0, grid);
  double asym = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) asym = std::max(asym, std::abs(r.values(j, i) - r.values(j, grid.nx - 1 - i)));
  EXPECT_LE(asym, 1e-9);
}

TEST(EnergyLandscape, NotPlanar) {
  EXPECT_UHOP_ERROR(energy_landscape(generate_synthetic(2, 3, 1), nullptr, 1.0, GridSpec{}), ErrorKind::NotPlanar);
}

TEST(Basins, SingleMemoryEverywhere) {
  const PatternSet one = generate_synthetic(1, 2, 4);
  const GridResult r = basins(one, nullptr, HopfieldConfig{}, GridSpec{-1, 1, -1, 1, 9, 7});
  EXPECT_TRUE((r.values.array() == 1.0).all());
  EXPECT_EQ(r.kind, GridKind::Basin);
}

TEST(Basins, PresetShape) {
  const Preset& p = find_preset("basins-5pt");
  const PatternSet xi = generate_synthetic(p.m, p.d, 2);
  const GridResult r = basins(xi, nullptr, hopfield_config(p), grid_spec(p), 0.05, 4);
  EXPECT_EQ(r.values.rows(), 100);
  EXPECT_EQ(r.values.cols(), 100);
}

TEST(Basins, AntipodalHalfPlanes) {
  const PatternSet xi = antipodal_x();
  HopfieldConfig cfg;
  cfg.beta = 20.0;
  const GridSpec grid{-1, 1, -1, 1, 41, 21};
  const GridResult r = basins(xi, nullptr, cfg, grid, 0.05);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i);
      const int want = std::abs(x) < 1e-12 ? kNoConvergence : (x > 0 ? 1 : 2);
      EXPECT_EQ(static_cast<int>(r.values(j, i)), want) << "x=" << x << " y=" << grid.y(j);
    }
  }
}

TEST(Basins, LabelsFollowMemoryPermutation) {
  const PatternSet xi = generate_synthetic(4, 2, 6);
  HopfieldConfig cfg;
  cfg.beta = 20.0;
  cfg.max_iters = 5;
  const GridSpec grid{-1.5, 1.5, -1.5, 1.5, 25, 25};
  const std::vector<Index> perm{2, 0, 3, 1};  // new column j holds old column perm[j]
  const GridResult a = basins(xi, nullptr, cfg, grid);
  const GridResult b = basins(xi.permuted(perm), nullptr, cfg, grid);
  for (Index k = 0; k < a.values.size(); ++k) {
    const int la = static_cast<int>(a.values(k));
    const int lb = static_cast<int>(b.values(k));
    if (la == kNoConvergence) {
      EXPECT_EQ(lb, kNoConvergence);
    } else {
      ASSERT_NE(lb, kNoConvergence);
      EXPECT_EQ(perm[static_cast<std::size_t>(lb - 1)] + 1, la);
    }
  }
}

TEST(Basins, GeneralDimensionQueries) {
  const PatternSet xi = generate_synthetic(5, 5, 8);
  HopfieldConfig cfg;
  cfg.beta = 20.0;
  const std::vector<int> labels = basin_labels(xi.matrix(), xi, nullptr, cfg, 0.05);
  for (std::size_t mu = 0; mu < labels.size(); ++mu) {
    if (labels[mu] != kNoConvergence) {
      EXPECT_EQ(labels[mu], static_cast<int>(mu) + 1);
    }
  }
  EXPECT_UHOP_ERROR(basins(xi, nullptr, cfg, GridSpec{}), ErrorKind::NotPlanar);
}

TEST(GridSpec, InclusiveLinspace) {
  const GridSpec g{-1, 1, 0, 2, 5, 1};
  EXPECT_EQ(g.x(0), -1.0);
  EXPECT_EQ(g.x(4), 1.0);
  EXPECT_EQ(g.x(2), 0.0);
  EXPECT_EQ(g.y(0), 0.0);
  EXPECT_UHOP_ERROR((GridSpec{1, 0, 0, 1, 3, 3}.validate()), ErrorKind::InvalidArgument);
}
