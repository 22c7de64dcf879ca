#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uhop/core.hpp"
#include "uhop/error.hpp"
#include "uhop/rng.hpp"

namespace uhop {

inline constexpr double kUnitNormTol = 1e-9;
inline constexpr double kZeroNorm = 1e-12;

/// A set of M unit-norm memories stored as the columns of a d x M matrix.
/// Immutable once built; every constructor path validates the unit-norm
/// invariant.
class PatternSet {
 public:
  /// Wraps columns that are already unit norm (within 1e-9).
  static PatternSet from_unit_columns(Matrix columns) {
    detail::require(columns.cols() >= 1 && columns.rows() >= 1, ErrorKind::InvalidArgument,
                    "pattern set needs M >= 1 and d >= 1");
    detail::require(all_finite(columns.reshaped()), ErrorKind::NonFinite, "pattern entries must be finite");
    for (Index mu = 0; mu < columns.cols(); ++mu) {
      if (std::abs(columns.col(mu).norm() - 1.0) > kUnitNormTol) {
        throw Error(ErrorKind::InvalidArgument,
                    "column " + std::to_string(mu) + " is not unit norm");
      }
    }
    return PatternSet(std::move(columns));
  }

  /// Scales every column to unit norm.
  static PatternSet normalized(Matrix columns) {
    detail::require(columns.cols() >= 1 && columns.rows() >= 1, ErrorKind::InvalidArgument,
                    "pattern set needs M >= 1 and d >= 1");
    detail::require(all_finite(columns.reshaped()), ErrorKind::NonFinite, "pattern entries must be finite");
    for (Index mu = 0; mu < columns.cols(); ++mu) {
      const double n = columns.col(mu).norm();
      if (n < kZeroNorm) {
        throw Error(ErrorKind::ZeroVector, "pattern " + std::to_string(mu) + " has zero norm");
      }
      columns.col(mu) /= n;
    }
    return PatternSet(std::move(columns));
  }

  Index m() const { return data_.cols(); }
  Index d() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }
  auto column(Index mu) const { return data_.col(mu); }

  /// First k patterns, order preserved.
  PatternSet head(Index k) const {
    detail::require(k >= 1 && k <= m(), ErrorKind::InvalidArgument, "head: k out of range");
    return PatternSet(data_.leftCols(k));
  }

  /// Same patterns, columns reordered as perm[new] = old.
  PatternSet permuted(std::span<const Index> perm) const {
    detail::require(static_cast<Index>(perm.size()) == m(), ErrorKind::DimensionMismatch,
                    "permutation length differs from M");
    Matrix out(d(), m());
    for (Index j = 0; j < m(); ++j) out.col(j) = data_.col(perm[j]);
    return PatternSet(std::move(out));
  }

 private:
  explicit PatternSet(Matrix data) : data_(std::move(data)) {}
  Matrix data_;
};

inline PatternSet normalize_patterns(std::span<const Vector> raw) {
  detail::require(!raw.empty(), ErrorKind::InvalidArgument, "no vectors given");
  const Index d = raw.front().size();
  detail::require(d >= 1, ErrorKind::InvalidArgument, "vectors must have d >= 1");
  Matrix cols(d, static_cast<Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "vector " + std::to_string(i) + " has dimension " +
                                                    std::to_string(raw[i].size()) + ", expected " +
                                                    std::to_string(d));
    }
    cols.col(static_cast<Index>(i)) = raw[i];
  }
  return PatternSet::normalized(std::move(cols));
}

/// i.i.d. standard Gaussian matrix, filled column by column.
inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = rng.gaussian();
  }
  return out;
}

/// M Gaussian memories, unit-normalized. Pure function of (m, d, seed).
inline PatternSet generate_synthetic(Index m, Index d, std::uint64_t seed) {
  detail::require(m >= 1 && d >= 1, ErrorKind::InvalidArgument, "generate_synthetic needs m >= 1 and d >= 1");
  Rng rng(seed);
  return PatternSet::normalized(gaussian_matrix(d, m, rng));
}

// ---------------------------------------------------------------------------
// IDX3 images

inline constexpr std::uint32_t kIdx3Magic = 0x00000803;

struct IdxHeader {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

namespace detail {

class GzFile {
 public:
  explicit GzFile(const std::string& path) : f_(gzopen(path.c_str(), "rb")) {
    if (f_ == nullptr) throw Error(ErrorKind::IoError, "cannot open " + path);
  }
  ~GzFile() {
    if (f_ != nullptr) gzclose(f_);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  /// Reads exactly n bytes or throws TruncatedFile.
  void read_exact(void* dst, std::size_t n) {
    auto* out = static_cast<unsigned char*>(dst);
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int got = gzread(f_, out, chunk);
      if (got <= 0) throw Error(ErrorKind::TruncatedFile, "unexpected end of IDX data");
      out += got;
      n -= static_cast<std::size_t>(got);
    }
  }

  std::uint32_t read_be32() {
    std::array<unsigned char, 4> b{};
    read_exact(b.data(), b.size());
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

 private:
  gzFile f_;
};

}  // namespace detail

/// Loads an IDX3 image file (plain or gzip-compressed). Each image is
/// flattened row-major, scaled by 1/255 and unit-normalized. An all-zero
/// image is an error, not silently dropped.
inline PatternSet load_idx(const std::string& images_path, std::optional<std::size_t> limit = std::nullopt) {
  if (limit && *limit == 0) throw Error(ErrorKind::EmptySelection, "limit = 0 selects no images");
  detail::GzFile file(images_path);
  const std::uint32_t magic = file.read_be32();
  if (magic != kIdx3Magic) throw Error(ErrorKind::BadMagic, "not an IDX3 image file: " + images_path);
  IdxHeader h;
  h.count = file.read_be32();
  h.rows = file.read_be32();
  h.cols = file.read_be32();
  const std::size_t pixels = std::size_t{h.rows} * h.cols;
  detail::require(pixels > 0, ErrorKind::InvalidArgument, "IDX image size is zero");
  std::size_t n = h.count;
  if (limit) n = std::min(n, *limit);
  if (n == 0) throw Error(ErrorKind::EmptySelection, "IDX file holds no images");

  Matrix cols(static_cast<Index>(pixels), static_cast<Index>(n));
  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < n; ++i) {
    file.read_exact(buf.data(), pixels);
    for (std::size_t k = 0; k < pixels; ++k) cols(static_cast<Index>(k), static_cast<Index>(i)) = buf[k] / 255.0;
  }
  return PatternSet::normalized(std::move(cols));
}

}  // namespace uhop
