// gcfrft command-line front end.
//
// Exit codes: 0 success, 1 invariant failure, 2 configuration error,
// 3 principal-log assumption violated.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcfrft/gcfrft.hpp"

namespace fs = std::filesystem;
using namespace gcfrft;

namespace {

constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
};

// Spatial/temporal graph selection shared by gen, transform and denoise.
struct GraphOptions {
  std::string edges;
  std::string points;
  Index k = 4;
  Index n1 = 30;
  Index n2 = 10;
  std::uint64_t point_seed = 0;
};

void add_graph_options(CLI::App* cmd, GraphOptions& g) {
  cmd->add_option("--edges", g.edges, "spatial graph edge list (src,dst,weight)");
  cmd->add_option("--points", g.points, "spatial node coordinates (id,x1,...,xd) for a k-NN graph");
  cmd->add_option("--k", g.k, "neighbours per node for k-NN graphs");
  cmd->add_option("--n1", g.n1, "random planar points when no graph file is given");
  cmd->add_option("--n2", g.n2, "length of the temporal path graph");
  cmd->add_option("--point-seed", g.point_seed, "seed for random planar points");
}

std::optional<nlohmann::json> load_config(const Globals& globals) {
  if (globals.config.empty()) return std::nullopt;
  return io::read_json(globals.config);
}

fs::path config_dir(const Globals& globals) {
  return globals.config.empty() ? fs::path{} : fs::path(globals.config).parent_path();
}

std::pair<Graph, Graph> build_graphs(const GraphOptions& g, const Globals& globals) {
  if (const auto cfg = load_config(globals); cfg && cfg->contains("spatial_graph")) {
    const BenchmarkConfig parsed = benchmark_config_from_json(*cfg);
    return {build_graph(parsed.spatial, config_dir(globals)),
            build_graph(parsed.temporal, config_dir(globals))};
  }
  Graph temporal = path_graph(g.n2);
  if (!g.edges.empty()) return {io::read_edge_list(g.edges), std::move(temporal)};
  if (!g.points.empty()) return {knn_graph(io::read_points(g.points), g.k), std::move(temporal)};
  return {knn_graph(random_points(g.n1, 2, g.point_seed), g.k), std::move(temporal)};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::config, "cannot parse number '" + item + "'");
    }
  }
  return out;
}

fs::path out_dir(const Globals& globals, const std::string& fallback) {
  return globals.out.empty() ? fs::path(fallback) : fs::path(globals.out);
}

// ---- gen ----

struct GenOptions {
  GraphOptions graph;
  double bandwidth = 0.3;
  double sigma = 0.6;
};

int run_gen(const GenOptions& o, const Globals& globals) {
  const auto [g1, g2] = build_graphs(o.graph, globals);
  const std::uint64_t seed = globals.seed.value_or(0);
  const TimeVertexSignal x = synth_signal(g1, g2.size(), o.bandwidth, seed);
  const TimeVertexSignal y = add_awgn(x, o.sigma, seed + 1);
  const fs::path dir = out_dir(globals, "gen_out");
  io::write_edge_list(dir / "edges.csv", g1);
  io::write_edge_list(dir / "temporal_edges.csv", g2);
  io::write_signal(dir / "clean.csv", x);
  io::write_signal(dir / "noisy.csv", y);
  io::SignalMeta meta;
  meta.n1 = g1.size();
  meta.n2 = g2.size();
  io::write_json(dir / "clean.json", io::to_json(meta));
  io::write_json(dir / "noisy.json", io::to_json(meta));
  std::cout << "wrote " << g1.size() << "x" << g2.size() << " signals to " << dir.string() << '\n';
  return 0;
}

// ---- transform ----

struct TransformOptions {
  GraphOptions graph;
  std::string signal;
  std::string family = "gcgfrft";
  std::string orders = "0.5,0.5";
  std::optional<double> lambda;
  bool inverse = false;
  std::string margin_tol;
};

std::optional<double> plan_lambda(Family f, std::optional<double> lambda) {
  if (f == Family::gcgfrft) return lambda.value_or(0.5);
  if (lambda) throw Error(ErrorCode::config, "--lambda applies only to gcgfrft");
  return std::nullopt;
}

int run_transform(const TransformOptions& o, const Globals& globals) {
  const auto [g1, g2] = build_graphs(o.graph, globals);
  const TransformContext ctx = TransformContext::from_graphs(g1, g2);
  const Family family = parse_family(o.family);
  const std::vector<double> orders = parse_list(o.orders);
  const auto lambda = plan_lambda(family, o.lambda);
  const TransformPlan plan = make_plan(ctx, family, orders, lambda);
  const TimeVertexSignal x = io::read_signal(o.signal);
  const TimeVertexSignal y = o.inverse ? inverse(plan, x) : forward(plan, x);
  const fs::path dir = out_dir(globals, "transform_out");
  const fs::path name = o.inverse ? "inverse.csv" : "spectrum.csv";
  io::write_signal(dir / name, y);
  io::write_json(dir / fs::path(name).replace_extension(".json"),
                 io::to_json(io::SignalMeta{y.rows(), y.cols(), o.family, orders, lambda}));
  std::cout << (o.inverse ? "inverse " : "forward ") << o.family << " -> " << (dir / name).string()
            << '\n';
  return 0;
}

// ---- denoise ----

struct DenoiseOptions {
  GraphOptions graph;
  std::string noisy;
  std::string clean;
  std::string family = "gcgfrft";
  std::string lambda_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string train_config;
};

int run_denoise(const DenoiseOptions& o, const Globals& globals) {
  const auto [g1, g2] = build_graphs(o.graph, globals);
  const TransformContext ctx = TransformContext::from_graphs(g1, g2);
  const Family family = parse_family(o.family);
  const WienerModel model(ctx, family);
  TrainConfig cfg;
  if (!o.train_config.empty()) {
    cfg = io::train_config_from_json(io::read_json(o.train_config));
  } else if (const auto c = load_config(globals); c && c->contains("train")) {
    cfg = io::train_config_from_json((*c)["train"]);
  }
  if (globals.seed) cfg.seed = *globals.seed;
  const TimeVertexSignal y = io::read_signal(o.noisy);
  const TimeVertexSignal x = io::read_signal(o.clean);

  TrainResult result;
  nlohmann::json grid_table = nlohmann::json::array();
  if (family == Family::gcgfrft) {
    const GridScore by_mse = [&](const TrainResult& r) {
      return metrics(x.real(), denoise(y, r.params, model).estimate.real()).mse;
    };
    const GridSearchResult g = lambda_grid_search(y, x, parse_list(o.lambda_grid), cfg, model,
                                                  by_mse, resolve_threads(globals.threads));
    for (const auto& row : g.table) {
      grid_table.push_back(row.ok ? nlohmann::json{{"lambda", row.lambda},
                                                   {"mse", row.score},
                                                   {"final_loss", row.result->final_loss}}
                                  : nlohmann::json{{"lambda", row.lambda}, {"error", row.error}});
    }
    result = g.best;
  } else {
    result = train(y, x, 0.0, cfg, model);
  }

  const DenoiseResult est = denoise(y, result.params, model);
  const MetricValues m = metrics(x.real(), est.estimate.real());
  const MetricValues noisy = metrics(x.real(), y.real());
  const fs::path dir = out_dir(globals, "denoise_out");
  io::write_signal(dir / "estimate.csv", est.estimate);
  io::write_json(dir / "params.json", io::to_json(result.params));
  io::write_trace_csv(dir / "trace.csv", result.trace);
  nlohmann::json summary{{"family", o.family},
                         {"mse", m.mse},
                         {"psnr", format_number(m.psnr)},
                         {"ssim", m.ssim},
                         {"noisy_mse", noisy.mse},
                         {"final_loss", result.final_loss}};
  if (!grid_table.empty()) summary["grid"] = grid_table;
  io::write_json(dir / "metrics.json", summary);
  std::printf("%s: mse %.6g (noisy %.6g), alpha %.4f beta %.4f lambda %.2f\n", o.family.c_str(),
              m.mse, noisy.mse, result.params.alpha, result.params.beta, result.params.lambda);
  return 0;
}

// ---- benchmark ----

int run_benchmark_cmd(const Globals& globals) {
  const auto cfg_json = load_config(globals);
  if (!cfg_json) throw Error(ErrorCode::config, "benchmark needs --config <json>");
  BenchmarkConfig cfg = benchmark_config_from_json(*cfg_json);
  if (!globals.out.empty()) cfg.output_dir = globals.out;
  if (globals.seed) cfg.seeds = {*globals.seed};
  const MetricReport report = run_benchmark(cfg, resolve_threads(globals.threads), config_dir(globals));
  write_report(report, cfg.output_dir);
  int failed = 0;
  for (const auto& r : report.rows) failed += r.status != "ok";
  std::cout << report.rows.size() << " rows written to " << cfg.output_dir;
  if (failed) std::cout << " (" << failed << " rows violated the principal-log assumption)";
  std::cout << '\n';
  return 0;
}

// ---- verify ----

struct VerifyCliOptions {
  std::string sizes;
  bool inject_fault = false;
};

int run_verify(const VerifyCliOptions& o, const Globals& globals) {
  VerifyOptions v;
  if (!o.sizes.empty()) {
    v.sizes.clear();
    std::stringstream ss(o.sizes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto x = item.find('x');
      if (x == std::string::npos) throw Error(ErrorCode::config, "sizes look like 4x3,6x5");
      v.sizes.emplace_back(std::stol(item.substr(0, x)), std::stol(item.substr(x + 1)));
    }
  }
  if (globals.seed) v.seeds = {*globals.seed};
  v.inject_fault = o.inject_fault;
  const VerifyReport r = verify_properties(v);
  std::cout << r.table();
  if (!globals.out.empty()) {
    std::ofstream out(globals.out);
    out << r.table();
  }
  return r.all_passed() ? 0 : kExitInvariant;
}

// ---- dump-operator ----

struct DumpOptions {
  GraphOptions graph;
  std::string kind = "dfrft";
  Index n = 8;
  double order = 0.5;
  double beta = 0.5;
  double lambda = 0.5;
  std::string mode = "candan";
  bool temporal = false;
};

int run_dump(const DumpOptions& o, const Globals& globals) {
  const DfrftMode mode = o.mode == "principal_shifted" ? DfrftMode::principal_shifted
                         : o.mode == "candan"
                             ? DfrftMode::candan
                             : throw Error(ErrorCode::config, "mode is candan or principal_shifted");
  const fs::path dir = out_dir(globals, "operator_out");
  FractionalOperator op = dfrft_matrix(std::max<Index>(o.n, 2), 1.0, mode);
  if (o.kind == "dfrft") {
    op = dfrft_matrix(o.n, o.order, mode);
  } else if (o.kind == "graph") {
    const auto [g1, g2] = build_graphs(o.graph, globals);
    op = graph_frft(eigendecompose(o.temporal ? g2 : g1), o.order);
  } else if (o.kind == "geodesic") {
    const Graph g2 = path_graph(o.n);
    const FractionalOperator fg = graph_frft(eigendecompose(g2), o.beta);
    const CouplingDecomposition d =
        phase_decompose(coupling_operator(fg, dfrft_matrix(o.n, o.beta, mode)));
    std::ofstream diag((fs::create_directories(dir), dir / "phases.csv"));
    write_phase_diagnostics(diag, d);
    op = geodesic_temporal_basis(fg, d, o.lambda);
  } else {
    throw Error(ErrorCode::config, "kind is graph, dfrft or geodesic");
  }
  io::write_operator_csv(dir / "operator.csv", op.matrix());
  std::printf("%s operator %ldx%ld, unitarity error %.3e\n", to_string(op.kind()),
              static_cast<long>(op.size()), static_cast<long>(op.size()), op.unitarity_error());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph / fractional Fourier transforms with geodesic temporal coupling"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--config", globals.config, "JSON configuration file");
  app.add_option("--seed", globals.seed, "random seed override");
  app.add_option("--out", globals.out, "output directory or file");
  app.add_option("--threads", globals.threads, "worker threads (0 = all; capped by FRFT_THREADS)");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "synthesize a clean/noisy signal pair");
  add_graph_options(gen_cmd, gen.graph);
  gen_cmd->add_option("--bandwidth", gen.bandwidth, "fraction of modes carrying energy");
  gen_cmd->add_option("--sigma", gen.sigma, "noise standard deviation");

  TransformOptions tr;
  auto* tr_cmd = app.add_subcommand("transform", "apply a transform plan to a signal");
  add_graph_options(tr_cmd, tr.graph);
  tr_cmd->add_option("--signal", tr.signal, "input signal CSV")->required();
  tr_cmd->add_option("--family", tr.family, "gfrft2d | gbfrft2d | jfrft | gcgfrft");
  tr_cmd->add_option("--orders", tr.orders, "one order (gfrft2d) or spatial,temporal");
  tr_cmd->add_option("--lambda", tr.lambda, "coupling parameter (gcgfrft)");
  tr_cmd->add_flag("--inverse", tr.inverse, "apply the inverse transform");

  DenoiseOptions dn;
  auto* dn_cmd = app.add_subcommand("denoise", "train a spectral filter and denoise one instance");
  add_graph_options(dn_cmd, dn.graph);
  dn_cmd->add_option("--noisy", dn.noisy, "observed signal CSV")->required();
  dn_cmd->add_option("--clean", dn.clean, "reference signal CSV")->required();
  dn_cmd->add_option("--family", dn.family, "transform family");
  dn_cmd->add_option("--lambda-grid", dn.lambda_grid, "comma-separated lambda values (gcgfrft)");
  dn_cmd->add_option("--train-config", dn.train_config, "training configuration JSON");

  auto* bench_cmd = app.add_subcommand("benchmark", "run the denoising sweep from --config");

  VerifyCliOptions vf;
  auto* verify_cmd = app.add_subcommand("verify", "run the property suite");
  verify_cmd->add_option("--sizes", vf.sizes, "n1xn2 pairs, e.g. 4x3,8x8");
  verify_cmd->add_flag("--inject-fault", vf.inject_fault, "perturb one operator entry");

  DumpOptions dump;
  auto* dump_cmd = app.add_subcommand("dump-operator", "write an operator as interleaved re,im CSV");
  add_graph_options(dump_cmd, dump.graph);
  dump_cmd->add_option("--kind", dump.kind, "graph | dfrft | geodesic");
  dump_cmd->add_option("--n", dump.n, "size for dfrft / geodesic");
  dump_cmd->add_option("--order", dump.order, "fractional order");
  dump_cmd->add_option("--beta", dump.beta, "temporal order for geodesic");
  dump_cmd->add_option("--lambda", dump.lambda, "coupling parameter for geodesic");
  dump_cmd->add_option("--mode", dump.mode, "candan | principal_shifted");
  dump_cmd->add_flag("--temporal", dump.temporal, "graph kind: use the temporal path graph");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_cmd) return run_gen(gen, globals);
    if (*tr_cmd) return run_transform(tr, globals);
    if (*dn_cmd) return run_denoise(dn, globals);
    if (*bench_cmd) return run_benchmark_cmd(globals);
    if (*verify_cmd) return run_verify(vf, globals);
    if (*dump_cmd) return run_dump(dump, globals);
  } catch (const AssumptionViolated& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::not_unitary:
      case ErrorCode::decomposition:
      case ErrorCode::construction:
        return kExitInvariant;
      default:
        return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
