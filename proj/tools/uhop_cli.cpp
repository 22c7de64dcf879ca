// uhop: command-line front end for training, retrieval, the experiment
// protocols, capacity bounds and spherical codes.
//
// Exit codes: 0 success, 1 runtime error (JSON object on stderr), 2 usage.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uhop/io.hpp"
#include "uhop/uhop.hpp"

namespace fs = std::filesystem;
using namespace uhop;
using io::json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
  unsigned threads = 1;
  std::string preset;
  std::string config;
  std::string data_dir;
  bool out_given = false;
};

// Options a subcommand may override on top of its preset.
struct Overrides {
  std::optional<Index> m, d, d_phi;
  std::optional<double> beta, lr, tau;
  std::optional<int> train_iters, update_iters, queries, grid;
  std::optional<double> extent, threshold;
  std::string norm = "softmax";
};

Preset resolve(const Common& c, std::string_view fallback, const Overrides& o) {
  Preset p = find_preset(c.preset.empty() ? fallback : std::string_view(c.preset));
  if (o.m) p.m = *o.m;
  if (o.d) p.d = *o.d;
  if (o.d_phi) p.d_phi = *o.d_phi;
  if (o.beta) p.beta = *o.beta;
  if (o.lr) p.lr = *o.lr;
  if (o.train_iters) p.train_iters = *o.train_iters;
  if (o.update_iters) p.update_iters = *o.update_iters;
  if (o.queries) p.queries = *o.queries;
  if (o.grid) p.grid = *o.grid;
  if (o.extent) p.extent = *o.extent;
  if (o.threshold) p.threshold = *o.threshold;
  return p;
}

json preset_json(const Preset& p) {
  return {{"name", p.name},
          {"dataset", p.dataset == Dataset::Mnist ? "mnist" : "synthetic"},
          {"m", p.m},
          {"d", p.d},
          {"d_phi", p.d_phi},
          {"beta", io::number(p.beta)},
          {"train_iters", p.train_iters},
          {"lr", io::number(p.lr)},
          {"update_iters", p.update_iters},
          {"threshold", io::number(p.threshold)},
          {"queries", p.queries},
          {"grid", p.grid},
          {"extent", io::number(p.extent)}};
}

fs::path data_dir(const Common& c) {
  if (!c.data_dir.empty()) return c.data_dir;
  if (const char* env = std::getenv("UHOP_DATA_DIR")) return env;
  throw Error(ErrorKind::IoError, "MNIST presets need --data-dir or UHOP_DATA_DIR");
}

fs::path prepare_out(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) throw Error(ErrorKind::IoError, "cannot create output directory " + c.out);
  return c.out;
}

void write(const fs::path& path, const std::string& text) { io::write_text(path.string(), text); }

void write_sidecar(const Common& c, const fs::path& dir, const std::string& name, json config) {
  config["seed"] = c.seed;
  config["threads"] = c.threads;
  write(dir / (name + ".meta.json"), io::dump(io::metadata(config)));
}

MetaInputs inputs_for(const Common& c, const Preset& p) {
  if (p.dataset == Dataset::Mnist) return mnist_meta_inputs(p, data_dir(c), c.seed);
  return synthetic_meta_inputs(p, c.seed);
}

TrainConfig train_config_for(const Preset& p, const Overrides& o, std::uint64_t seed) {
  TrainConfig cfg = train_config(p, seed);
  if (o.tau) cfg.tau = *o.tau;
  return cfg;
}

HopfieldConfig hopfield_for(const Preset& p, const Overrides& o) {
  HopfieldConfig cfg = hopfield_config(p);
  cfg.norm.kind = parse_normalization(o.norm);
  return cfg;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::optional<double> lipschitz;
  std::string projection = "frobenius";
  bool raw_features = false;
};

int cmd_train(const Common& c, const Overrides& o, const TrainArgs& a) {
  const Preset p = resolve(c, "synthetic-meta", o);
  MetaInputs in = inputs_for(c, p);
  TrainConfig cfg = train_config_for(p, o, c.seed);
  if (a.lipschitz) cfg.step_rule = StepRule::provided(*a.lipschitz);
  if (a.projection == "orthonormal") cfg.projection = Projection::ColumnOrthonormal;
  else if (a.projection != "frobenius") throw Error(ErrorKind::InvalidArgument, "unknown projection " + a.projection);
  cfg.output_normalize = !a.raw_features;
  const auto [phi, log] = uhop_plus(in.memories, in.w0, cfg);

  const fs::path dir = prepare_out(c);
  write(dir / "feature_map.json", io::dump(io::to_json(phi)));
  write(dir / "train_log.csv", io::train_log_csv(log));
  json conf = {{"command", "train"}, {"preset", preset_json(p)}, {"tau", io::number(cfg.tau)},
               {"projection", a.projection}, {"output_normalize", cfg.output_normalize},
               {"step_rule", a.lipschitz ? "provided" : "backtracking"}};
  if (a.lipschitz) conf["lipschitz"] = io::number(*a.lipschitz);
  write_sidecar(c, dir, "train", conf);
  return 0;
}

struct RetrieveArgs {
  std::string feature_map;
  double tol = 1e-6;
  std::size_t trace_cap = 1000;
};

int cmd_retrieve(const Common& c, Overrides o, const RetrieveArgs& a) {
  if (!o.queries) o.queries = 5;
  const Preset p = resolve(c, "synthetic-meta", o);
  const MetaInputs in = inputs_for(c, p);
  HopfieldConfig cfg = hopfield_for(p, o);
  cfg.fixed_point_tol = a.tol;
  std::optional<FeatureMap> phi;
  if (!a.feature_map.empty()) phi = io::load_feature_map(a.feature_map);

  json traces = json::array();
  for (Index q = 0; q < in.queries.cols(); ++q) {
    const RetrievalTrace tr = retrieve(in.queries.col(q), in.memories, phi ? &*phi : nullptr, cfg);
    json t = io::to_json(tr, a.trace_cap);
    t["query"] = q;
    t["support"] = metastable_size(tr.weights_final, cfg.norm);
    traces.push_back(std::move(t));
  }
  const fs::path dir = prepare_out(c);
  write(dir / "traces.json", io::dump({{"traces", std::move(traces)}}));
  write_sidecar(c, dir, "retrieve",
                {{"command", "retrieve"}, {"preset", preset_json(p)}, {"norm", o.norm},
                 {"fixed_point_tol", io::number(a.tol)}, {"feature_map", a.feature_map},
                 {"trace_cap", a.trace_cap}});
  return 0;
}

int cmd_meta(const Common& c, const Overrides& o, bool no_train) {
  const Preset p = resolve(c, "synthetic-meta", o);
  const MetaInputs in = inputs_for(c, p);
  const HopfieldConfig cfg = hopfield_for(p, o);
  const fs::path dir = prepare_out(c);

  json summary;
  const MetaHistogram before = metastable_distribution(in.queries, in.memories, nullptr, cfg, c.threads);
  write(dir / "meta_before.csv", io::histogram_csv(before));
  summary["before"] = io::to_json(before);
  if (!no_train) {
    const auto [phi, log] = uhop_plus(in.memories, in.w0, train_config_for(p, o, c.seed));
    const MetaHistogram after = metastable_distribution(in.queries, in.memories, &phi, cfg, c.threads);
    write(dir / "meta_after.csv", io::histogram_csv(after));
    write(dir / "train_log.csv", io::train_log_csv(log));
    write(dir / "feature_map.json", io::dump(io::to_json(phi)));
    summary["after"] = io::to_json(after);
  }
  write(dir / "meta_summary.json", io::dump(summary));
  write_sidecar(c, dir, "meta", {{"command", "meta"}, {"preset", preset_json(p)}, {"norm", o.norm},
                                 {"trained", !no_train}});
  std::cout << summary.dump() << "\n";
  return 0;
}

// Planar memories plus a feature map trained for the preset's N steps.
std::pair<PatternSet, FeatureMap> planar_setup(const Common& c, const Preset& p, const Overrides& o) {
  if (p.d != 2) throw Error(ErrorKind::NotPlanar, "grid experiments need d = 2");
  Rng mem = Rng::derive(c.seed, kMemoryStream);
  PatternSet xi = PatternSet::normalized(gaussian_matrix(p.d, p.m, mem));
  const Matrix w0 = initial_weights(p.d, p.d_phi, Rng::derive(c.seed, kWeightStream).bits());
  auto [phi, log] = uhop_plus(xi, w0, train_config_for(p, o, c.seed));
  return {std::move(xi), std::move(phi)};
}

int cmd_landscape(const Common& c, const Overrides& o) {
  const Preset p = resolve(c, "contours-2pt", o);
  const auto [xi, phi] = planar_setup(c, p, o);
  const GridSpec grid = grid_spec(p);
  const fs::path dir = prepare_out(c);
  write(dir / "landscape_mhm.csv", io::grid_csv(energy_landscape(xi, nullptr, p.beta, grid, c.threads)));
  write(dir / "landscape_khm.csv", io::grid_csv(energy_landscape(xi, &phi, p.beta, grid, c.threads)));
  write(dir / "feature_map.json", io::dump(io::to_json(phi)));
  write_sidecar(c, dir, "landscape", {{"command", "landscape"}, {"preset", preset_json(p)}});
  return 0;
}

int cmd_basins(const Common& c, const Overrides& o, double eps) {
  const Preset p = resolve(c, "basins-5pt", o);
  const auto [xi, phi] = planar_setup(c, p, o);
  const HopfieldConfig cfg = hopfield_for(p, o);
  const GridSpec grid = grid_spec(p);
  const fs::path dir = prepare_out(c);
  write(dir / "basins_mhm.csv", io::grid_csv(basins(xi, nullptr, cfg, grid, eps, c.threads)));
  write(dir / "basins_khm.csv", io::grid_csv(basins(xi, &phi, cfg, grid, eps, c.threads)));
  write(dir / "feature_map.json", io::dump(io::to_json(phi)));
  write_sidecar(c, dir, "basins",
                {{"command", "basins"}, {"preset", preset_json(p)}, {"eps", io::number(eps)}, {"norm", o.norm}});
  return 0;
}

struct CapacityArgs {
  int d_phi = 2;
  double beta = 1.0;
  double p = 0.5;
  double r_phi = 0.5;
  bool strict = false;
  std::optional<long long> m_star;
  std::optional<double> theta;
};

int cmd_capacity(const Common& c, const CapacityArgs& a) {
  const CapacityBound b = capacity_lower_bound({a.d_phi, a.beta, a.p, a.r_phi},
                                               a.strict ? LogArgumentPolicy::Strict : LogArgumentPolicy::Guarded);
  json out = {{"bound", io::number(b.bound)},
              {"a", io::number(b.a)},
              {"b", io::number(b.b)},
              {"C", io::number(b.c)},
              {"raw_log_argument", io::number(b.raw_log_argument)},
              {"flags", b.flags}};
  if (a.m_star) {
    const BoundPair s = separation_sandwich(*a.m_star, a.d_phi);
    out["separation_sandwich"] = {{"lower", io::number(s.lower)}, {"upper", io::number(s.upper)}};
  }
  if (a.theta) {
    const BoundPair s = optimal_capacity_bounds(a.d_phi, *a.theta);
    out["optimal_capacity"] = {
        {"lower", io::number(s.lower)}, {"upper", io::number(s.upper)}, {"asymptotic_estimate", true}};
  }
  std::cout << out.dump() << "\n";
  if (c.out_given) write(prepare_out(c) / "capacity.json", io::dump(out));
  return 0;
}

struct CodesArgs {
  Index dim = 3;
  Index n = 4;
  std::string kind = "search";
  CodeSearchOptions search;
};

int cmd_codes(const Common& c, CodesArgs a) {
  std::optional<SphericalCode> code;
  if (a.kind == "search") {
    a.search.seed = c.seed;
    code = brute_force_optimal_code(a.dim, a.n, a.search);
  } else if (a.kind == "simplex") {
    code = simplex_code(a.dim);
  } else if (a.kind == "cross") {
    code = cross_polytope_code(a.dim);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown code kind " + a.kind);
  }
  json points = json::array();
  for (Index j = 0; j < code->n(); ++j) points.push_back(io::vector_json(code->points().col(j)));
  const json out = {{"kind", a.kind},
                    {"dim", code->dim()},
                    {"n", code->n()},
                    {"rho", io::number(minimal_separation(*code))},
                    {"points", std::move(points)}};
  std::cout << out.dump() << "\n";
  if (c.out_given) write(prepare_out(c) / "code.json", io::dump(out));
  return 0;
}

// ---------------------------------------------------------------------------
// key=value config files: each line becomes --key=value unless the same
// option already appears on the command line.

std::vector<std::string> with_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw CLI::FileError::Missing(path);
  std::string line;
  while (std::getline(f, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const std::string key = "--" + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool given = false;
    for (const std::string& a : args) given = given || a == key || a.rfind(key + "=", 0) == 0;
    if (!given) args.push_back(key + "=" + value);
  }
  return args;
}

void print_error(std::string_view kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernelized modern Hopfield memories: training, retrieval and capacity tools", "uhop"};
  app.fallthrough();
  app.require_subcommand(1);

  Common c;
  Overrides o;
  app.add_option("--seed", c.seed, "Seed for every random stream")->capture_default_str();
  auto* out_opt = app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker cap (0 = all cores)")->capture_default_str();
  app.add_option("--preset", c.preset, "synthetic-meta | mnist-meta | contours-2pt | contours-4pt | basins-5pt");
  app.add_option("--config", c.config, "key=value file; command-line flags win");
  app.add_option("--data-dir", c.data_dir, "MNIST IDX directory (default: $UHOP_DATA_DIR)");

  auto add_model = [&](CLI::App* s) {
    s->add_option("--m", o.m, "Number of memories");
    s->add_option("--d", o.d, "Pattern dimension");
    s->add_option("--d-phi", o.d_phi, "Feature dimension");
    s->add_option("--beta", o.beta, "Inverse temperature");
    s->add_option("--norm", o.norm, "softmax | sparsemax | entmax15")->capture_default_str();
    s->add_option("--update-iters", o.update_iters, "Retrieval updates");
    s->add_option("--threshold", o.threshold, "Softmax support threshold");
  };
  auto add_training = [&](CLI::App* s) {
    s->add_option("--train-iters", o.train_iters, "U-Hop+ steps N");
    s->add_option("--lr", o.lr, "Learning rate");
    s->add_option("--tau", o.tau, "Separation-loss temperature");
  };

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Learn a feature map with U-Hop+");
  add_model(train);
  add_training(train);
  train->add_option("--lipschitz", ta.lipschitz, "Known Lipschitz constant G (step min(lr, 1/G))");
  train->add_option("--projection", ta.projection, "frobenius | orthonormal")->capture_default_str();
  train->add_flag("--raw-features", ta.raw_features, "Disable output normalization");

  RetrieveArgs ra;
  auto* ret = app.add_subcommand("retrieve", "Run retrieval traces on generated queries");
  add_model(ret);
  ret->add_option("--queries", o.queries, "Number of queries (default 5)");
  ret->add_option("--feature-map", ra.feature_map, "Feature map JSON (omit for MHM)");
  ret->add_option("--tol", ra.tol, "Fixed-point tolerance")->capture_default_str();
  ret->add_option("--trace-cap", ra.trace_cap, "Elide iterates above this count")->capture_default_str();

  bool no_train = false;
  auto* meta = app.add_subcommand("meta", "Metastable-state histogram before and after training");
  add_model(meta);
  add_training(meta);
  meta->add_option("--queries", o.queries, "Number of queries");
  meta->add_flag("--no-train", no_train, "Only the untrained histogram");

  auto* land = app.add_subcommand("landscape", "Energy landscape on a planar grid");
  add_model(land);
  add_training(land);
  land->add_option("--grid", o.grid, "Cells per axis");
  land->add_option("--extent", o.extent, "Grid covers [-extent, extent]^2");

  double eps = 0.05;
  auto* bas = app.add_subcommand("basins", "Basins of attraction on a planar grid");
  add_model(bas);
  add_training(bas);
  bas->add_option("--grid", o.grid, "Cells per axis");
  bas->add_option("--extent", o.extent, "Grid covers [-extent, extent]^2");
  bas->add_option("--eps", eps, "Convergence radius")->capture_default_str();

  CapacityArgs ca;
  auto* cap = app.add_subcommand("capacity", "Capacity lower bound and related bounds");
  cap->add_option("--d-phi", ca.d_phi, "Feature dimension")->required();
  cap->add_option("--beta", ca.beta, "Inverse temperature")->capture_default_str();
  cap->add_option("--p", ca.p, "Failure probability p")->required();
  cap->add_option("--r-phi", ca.r_phi, "Radius R_phi")->required();
  cap->add_flag("--strict-log", ca.strict, "Reject a non-positive log argument");
  cap->add_option("--m-star", ca.m_star, "Also report the separation sandwich for M* points");
  cap->add_option("--theta", ca.theta, "Also report optimal-capacity estimates at angle theta");

  CodesArgs cd;
  auto* codes = app.add_subcommand("codes", "Spherical codes and their minimal separation");
  codes->add_option("--dim", cd.dim, "Dimension D")->capture_default_str();
  codes->add_option("--n", cd.n, "Number of points")->capture_default_str();
  codes->add_option("--kind", cd.kind, "search | simplex | cross")->capture_default_str();
  codes->add_option("--restarts", cd.search.restarts, "Search restarts")->capture_default_str();
  codes->add_option("--iters", cd.search.iters, "Steps per temperature")->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = with_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return 2;
  }
  c.out_given = out_opt->count() > 0;

  try {
    if (*train) return cmd_train(c, o, ta);
    if (*ret) return cmd_retrieve(c, o, ra);
    if (*meta) return cmd_meta(c, o, no_train);
    if (*land) return cmd_landscape(c, o);
    if (*bas) return cmd_basins(c, o, eps);
    if (*cap) return cmd_capacity(c, ca);
    if (*codes) return cmd_codes(c, cd);
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return 2;
}
