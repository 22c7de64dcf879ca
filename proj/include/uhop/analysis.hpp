#pragma once

#include <array>
#include <string>
#include <vector>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/hopfield.hpp"
#include "uhop/normalization.hpp"
#include "uhop/parallel.hpp"

namespace uhop {

// Experiment protocols: metastable-state histograms, energy landscapes and
// basins of attraction over planar query grids.

/// Support size of a weight vector: entries >= threshold for softmax, exact
/// non-zeros for the sparse maps.
template <typename Derived>
int metastable_size(const Eigen::MatrixBase<Derived>& p, const Normalization& norm) {
  detail::require(p.size() >= 1, ErrorKind::NotOnSimplex, "empty weight vector");
  if (!all_finite(p) || p.minCoeff() < -1e-12 || std::abs(p.sum() - 1.0) > 1e-6) {
    throw Error(ErrorKind::NotOnSimplex, "weights are not a probability vector");
  }
  int k = 0;
  for (Index i = 0; i < p.size(); ++i) {
    if (norm.kind == NormalizationKind::Softmax ? p(i) >= norm.softmax_support_threshold : p(i) > 0.0) ++k;
  }
  return k;
}

/// Buckets 0..9 hold exact sizes, bucket 10 is "10+". Size 0 only occurs for
/// softmax when every weight falls below the threshold (M > 1/threshold).
struct MetaHistogram {
  static constexpr int kOverflow = 10;
  std::array<std::size_t, kOverflow + 1> counts{};
  std::size_t total_queries = 0;

  void add(int size) {
    counts[static_cast<std::size_t>(std::min(size, kOverflow))] += 1;
    ++total_queries;
  }

  double percent(int bucket) const {
    if (total_queries == 0) return 0.0;
    return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(bucket)]) / static_cast<double>(total_queries);
  }

  MetaHistogram& operator+=(const MetaHistogram& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total_queries += other.total_queries;
    return *this;
  }

  static std::string label(int bucket) { return bucket == kOverflow ? "10+" : std::to_string(bucket); }
};

/// Runs each query (a column) for cfg.max_iters updates and histograms the
/// support size of the final weights.
inline MetaHistogram metastable_distribution(const Matrix& queries, const PatternSet& xi, const FeatureMap* phi,
                                             const HopfieldConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  detail::require(queries.cols() >= 1, ErrorKind::InvalidArgument, "no queries given");
  if (queries.rows() != xi.d()) throw Error(ErrorKind::DimensionMismatch, "queries and memories disagree on d");
  const HopfieldModel model(xi, phi);
  std::vector<int> sizes(static_cast<std::size_t>(queries.cols()));
  parallel_for(sizes.size(), threads, [&](std::size_t q) {
    const auto [x, p] = model.run(queries.col(static_cast<Index>(q)), cfg);
    sizes[q] = metastable_size(p, cfg.norm);
  });
  MetaHistogram h;
  for (int s : sizes) h.add(s);
  return h;
}

struct GridSpec {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  int nx = 40, ny = 40;

  void validate() const {
    detail::require(nx >= 1 && ny >= 1, ErrorKind::InvalidArgument, "grid resolution must be >= 1");
    detail::require(x_max >= x_min && y_max >= y_min, ErrorKind::InvalidArgument, "grid ranges must be ordered");
  }
  /// Inclusive linspace coordinates.
  double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double y(int j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1); }
};

enum class GridKind { Energy, Basin };

/// values(j, i) belongs to the query (grid.x(i), grid.y(j)).
struct GridResult {
  GridSpec grid;
  Matrix values;
  GridKind kind = GridKind::Energy;
};

inline constexpr int kNoConvergence = 0;

inline GridResult energy_landscape(const PatternSet& xi, const FeatureMap* phi, double beta, const GridSpec& grid,
                                   unsigned threads = 1) {
  grid.validate();
  if (xi.d() != 2) throw Error(ErrorKind::NotPlanar, "energy landscapes need d = 2");
  detail::require(beta > 0.0, ErrorKind::InvalidArgument, "beta must be positive");
  const HopfieldModel model(xi, phi);
  GridResult out{grid, Matrix(grid.ny, grid.nx), GridKind::Energy};
  parallel_for(static_cast<std::size_t>(grid.ny), threads, [&](std::size_t j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Eigen::Vector2d x(grid.x(i), grid.y(static_cast<int>(j)));
      out.values(static_cast<Index>(j), i) = model.energy(x, beta);
    }
  });
  return out;
}

/// 1-based memory label if the final state lies within eps of exactly one
/// memory, else kNoConvergence.
inline std::vector<int> basin_labels(const Matrix& queries, const PatternSet& xi, const FeatureMap* phi,
                                     const HopfieldConfig& cfg, double eps, unsigned threads = 1) {
  cfg.validate();
  detail::require(eps > 0.0, ErrorKind::InvalidArgument, "eps must be positive");
  if (queries.rows() != xi.d()) throw Error(ErrorKind::DimensionMismatch, "queries and memories disagree on d");
  const HopfieldModel model(xi, phi);
  std::vector<int> labels(static_cast<std::size_t>(queries.cols()), kNoConvergence);
  parallel_for(labels.size(), threads, [&](std::size_t q) {
    const auto [x, p] = model.run(queries.col(static_cast<Index>(q)), cfg);
    int hit = kNoConvergence;
    int hits = 0;
    for (Index mu = 0; mu < xi.m(); ++mu) {
      if ((x - xi.column(mu)).norm() <= eps) {
        ++hits;
        hit = static_cast<int>(mu) + 1;
      }
    }
    labels[q] = hits == 1 ? hit : kNoConvergence;
  });
  return labels;
}

inline GridResult basins(const PatternSet& xi, const FeatureMap* phi, const HopfieldConfig& cfg, const GridSpec& grid,
                         double eps = 0.05, unsigned threads = 1) {
  grid.validate();
  if (xi.d() != 2) throw Error(ErrorKind::NotPlanar, "planar basin grids need d = 2");
  Matrix queries(2, static_cast<Index>(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) queries.col(static_cast<Index>(j) * grid.nx + i) << grid.x(i), grid.y(j);
  const std::vector<int> labels = basin_labels(queries, xi, phi, cfg, eps, threads);
  GridResult out{grid, Matrix(grid.ny, grid.nx), GridKind::Basin};
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) out.values(j, i) = labels[static_cast<std::size_t>(j) * grid.nx + i];
  return out;
}

}  // namespace uhop
