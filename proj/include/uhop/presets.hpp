#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "uhop/analysis.hpp"
#include "uhop/hopfield.hpp"
#include "uhop/patterns.hpp"
#include "uhop/rng.hpp"
#include "uhop/train.hpp"

namespace uhop {

enum class Dataset { Synthetic, Mnist };

/// Named experiment settings. `train_iters` is the number of U-Hop+ steps N,
/// `update_iters` the number of retrieval updates.
struct Preset {
  std::string_view name;
  Dataset dataset = Dataset::Synthetic;
  Index m = 10;
  Index d = 5;
  Index d_phi = 5;
  double beta = 1.0;
  int train_iters = 20;
  double lr = 0.1;
  int update_iters = 20;
  double threshold = 0.01;
  int queries = 500;
  int grid = 40;            // planar grid resolution per axis
  double extent = 1.5;      // planar grid covers [-extent, extent]^2
};

// Planar presets use d = D_phi = 2. The basin preset keeps its 5 memories
// but places them on the circle so the grid is the full query space.
inline constexpr std::array<Preset, 5> kPresets{{
    {"synthetic-meta", Dataset::Synthetic, 10, 5, 5, 4.0, 20, 0.1, 20, 0.01, 500, 0, 0.0},
    {"mnist-meta", Dataset::Mnist, 2000, 784, 200, 0.1, 20, 0.1, 5, 0.01, 500, 0, 0.0},
    {"contours-2pt", Dataset::Synthetic, 2, 2, 2, 20.0, 5, 0.1, 20, 0.01, 0, 40, 1.5},
    {"contours-4pt", Dataset::Synthetic, 4, 2, 2, 1.0 / 0.9, 5, 0.1, 20, 0.01, 0, 40, 1.5},
    {"basins-5pt", Dataset::Synthetic, 5, 2, 2, 20.0, 5, 0.1, 5, 0.01, 0, 100, 1.5},
}};

inline const Preset& find_preset(std::string_view name) {
  for (const Preset& p : kPresets) {
    if (p.name == name) return p;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

inline HopfieldConfig hopfield_config(const Preset& p) {
  HopfieldConfig cfg;
  cfg.beta = p.beta;
  cfg.max_iters = p.update_iters;
  cfg.norm.softmax_support_threshold = p.threshold;
  return cfg;
}

inline TrainConfig train_config(const Preset& p, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.iters = p.train_iters;
  cfg.lr = p.lr;
  cfg.seed = seed;
  return cfg;
}

inline GridSpec grid_spec(const Preset& p) {
  return {-p.extent, p.extent, -p.extent, p.extent, p.grid, p.grid};
}

// Seed streams: a run seeded with s draws memories from derive(s, 0), queries
// from derive(s, 1) and the initial W from derive(s, 2).
inline constexpr std::uint64_t kMemoryStream = 0;
inline constexpr std::uint64_t kQueryStream = 1;
inline constexpr std::uint64_t kWeightStream = 2;

/// Standard Gaussian queries (not normalized), one per column.
inline Matrix gaussian_queries(Index d, Index n, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, kQueryStream);
  return gaussian_matrix(d, n, rng);
}

struct MetaInputs {
  PatternSet memories;
  Matrix queries;
  Matrix w0;
};

inline MetaInputs synthetic_meta_inputs(const Preset& p, std::uint64_t seed) {
  Rng mem = Rng::derive(seed, kMemoryStream);
  return {PatternSet::normalized(gaussian_matrix(p.d, p.m, mem)), gaussian_queries(p.d, p.queries, seed),
          initial_weights(p.d, p.d_phi, Rng::derive(seed, kWeightStream).bits())};
}

/// Memories are the first M training images and queries the first N test
/// images under `data_dir` (IDX, plain or gzipped).
inline MetaInputs mnist_meta_inputs(const Preset& p, const std::filesystem::path& data_dir, std::uint64_t seed) {
  auto pick = [&](const char* stem) {
    const std::filesystem::path gz = data_dir / (std::string(stem) + ".gz");
    const std::filesystem::path plain = data_dir / stem;
    if (std::filesystem::exists(plain)) return plain.string();
    if (std::filesystem::exists(gz)) return gz.string();
    throw Error(ErrorKind::IoError, "missing " + plain.string() + "[.gz]");
  };
  PatternSet memories = load_idx(pick("train-images-idx3-ubyte"), static_cast<std::size_t>(p.m));
  if (memories.m() < p.m) throw Error(ErrorKind::TruncatedFile, "training file holds fewer than M images");
  const PatternSet queries = load_idx(pick("t10k-images-idx3-ubyte"), static_cast<std::size_t>(p.queries));
  Matrix w0 = initial_weights(p.d, p.d_phi, Rng::derive(seed, kWeightStream).bits());
  return {std::move(memories), queries.matrix(), std::move(w0)};
}

struct MetaRun {
  MetaHistogram before;  // MHM, no feature map
  MetaHistogram after;   // KHM with the trained map
  TrainLog log;
};

inline MetaRun run_meta(const Preset& p, const MetaInputs& in, std::uint64_t seed, unsigned threads = 1) {
  const HopfieldConfig hcfg = hopfield_config(p);
  MetaRun out;
  out.before = metastable_distribution(in.queries, in.memories, nullptr, hcfg, threads);
  auto [phi, log] = uhop_plus(in.memories, in.w0, train_config(p, seed));
  out.after = metastable_distribution(in.queries, in.memories, &phi, hcfg, threads);
  out.log = std::move(log);
  return out;
}

}  // namespace uhop
