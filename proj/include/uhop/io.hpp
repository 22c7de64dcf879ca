#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>

#include "uhop/analysis.hpp"
#include "uhop/error.hpp"
#include "uhop/hopfield.hpp"
#include "uhop/kernel.hpp"
#include "uhop/train.hpp"

namespace uhop::io {

using json = nlohmann::json;

/// 12 significant digits; "nan", "inf" and "-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// JSON number carrying 12 significant digits, null when non-finite.
inline json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_double(v).c_str(), nullptr);
}

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// FeatureMap

/// {"d", "d_phi", "output_normalize", "w"} with w flattened row-major.
inline json to_json(const FeatureMap& phi) {
  json w = json::array();
  for (Index i = 0; i < phi.d(); ++i)
    for (Index j = 0; j < phi.d_phi(); ++j) w.push_back(number(phi.w()(i, j)));
  return {{"d", phi.d()}, {"d_phi", phi.d_phi()}, {"output_normalize", phi.output_normalize()}, {"w", std::move(w)}};
}

inline FeatureMap feature_map_from_json(const json& j) {
  try {
    const Index d = j.at("d").get<Index>();
    const Index dp = j.at("d_phi").get<Index>();
    const json& w = j.at("w");
    if (d < 1 || dp < 1 || w.size() != static_cast<std::size_t>(d * dp)) {
      throw Error(ErrorKind::DimensionMismatch, "feature map JSON: w has the wrong number of entries");
    }
    Matrix m(d, dp);
    for (Index i = 0; i < d; ++i)
      for (Index k = 0; k < dp; ++k) m(i, k) = w.at(static_cast<std::size_t>(i * dp + k)).get<double>();
    return FeatureMap(std::move(m), j.value("output_normalize", true));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("feature map JSON: ") + e.what());
  }
}

inline FeatureMap load_feature_map(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
  return feature_map_from_json(j);
}

// ---------------------------------------------------------------------------
// Tabular outputs

/// iter,loss,hardmax,delta_min; row 0 is the projected starting point.
inline std::string train_log_csv(const TrainLog& log) {
  std::string out = "iter,loss,hardmax,delta_min\n";
  auto row = [&](std::size_t it, double l, double h, double d) {
    out += std::to_string(it) + "," + format_double(l) + "," + format_double(h) + "," + format_double(d) + "\n";
  };
  row(0, log.initial_loss, log.initial_hardmax, log.initial_delta_min);
  for (std::size_t t = 0; t < log.loss_per_iter.size(); ++t) {
    row(t + 1, log.loss_per_iter[t], log.hardmax_per_iter[t], log.delta_min_per_iter[t]);
  }
  return out;
}

/// Iterates beyond `max_iterates` are elided; the first and last are kept.
inline json to_json(const RetrievalTrace& trace, std::size_t max_iterates = 1000) {
  json iterates = json::array();
  const bool elide = trace.iterates.size() > max_iterates;
  if (elide) {
    iterates.push_back(vector_json(trace.iterates.front()));
    iterates.push_back(vector_json(trace.iterates.back()));
  } else {
    for (const Vector& x : trace.iterates) iterates.push_back(vector_json(x));
  }
  json energies = json::array();
  for (double e : trace.energies) energies.push_back(number(e));
  return {{"steps", trace.steps},
          {"converged", trace.converged},
          {"iterates_elided", elide},
          {"iterates", std::move(iterates)},
          {"energies", std::move(energies)},
          {"weights_final", vector_json(trace.weights_final)}};
}

/// One row per cell: x,y,value.
inline std::string grid_csv(const GridResult& g) {
  std::string out = "x,y,value\n";
  for (int j = 0; j < g.grid.ny; ++j) {
    for (int i = 0; i < g.grid.nx; ++i) {
      const double v = g.values(j, i);
      out += format_double(g.grid.x(i)) + "," + format_double(g.grid.y(j)) + ",";
      out += g.kind == GridKind::Basin ? std::to_string(static_cast<int>(v)) : format_double(v);
      out += "\n";
    }
  }
  return out;
}

/// k,percent for buckets 0..9 and 10+.
inline std::string histogram_csv(const MetaHistogram& h) {
  std::string out = "k,percent\n";
  for (int b = 0; b <= MetaHistogram::kOverflow; ++b) {
    out += MetaHistogram::label(b) + "," + format_double(h.percent(b)) + "\n";
  }
  return out;
}

inline json to_json(const MetaHistogram& h) {
  json buckets = json::object();
  for (int b = 0; b <= MetaHistogram::kOverflow; ++b) buckets[MetaHistogram::label(b)] = number(h.percent(b));
  return {{"total_queries", h.total_queries}, {"percent", std::move(buckets)}};
}

/// Metadata sidecar: the config echo plus a UTC timestamp. Timestamps only
/// appear here so primary outputs stay byte-reproducible.
inline json metadata(const json& config) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"generated_at", stamp}, {"config", config}};
}

}  // namespace uhop::io
