#pragma once

// Denoising benchmark: synthetic band-limited signals on a spatial graph x
// path-graph product, AWGN at several levels, one trained filter per
// transform family, plus a noisy passthrough and an oracle closed-form
// filter as reference rows.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcfrft/error.hpp"
#include "gcfrft/graph.hpp"
#include "gcfrft/io.hpp"
#include "gcfrft/metrics.hpp"
#include "gcfrft/parallel.hpp"
#include "gcfrft/synth.hpp"
#include "gcfrft/transforms.hpp"
#include "gcfrft/wiener.hpp"

namespace gcfrft {

struct GraphSpec {
  enum class Kind { path, knn, random_knn, edge_list };
  Kind kind = Kind::path;
  Index n = 0;               // path, random_knn, optional for edge_list
  Index k = 0;               // knn, random_knn
  std::string file;          // knn points file or edge list
  std::uint64_t seed = 0;    // random_knn point placement
  Index dims = 2;            // random_knn
  std::optional<double> gaussian_sigma;
};

inline Matrix random_points(Index n, Index dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix p(n, dims);
  for (Index i = 0; i < n; ++i) {
    for (Index d = 0; d < dims; ++d) p(i, d) = unit(rng);
  }
  return p;
}

inline Graph build_graph(const GraphSpec& spec, const std::filesystem::path& base_dir = {}) {
  auto resolve = [&](const std::string& f) {
    const std::filesystem::path p(f);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  WeightMode weights = UnitWeights{};
  if (spec.gaussian_sigma) weights = GaussianWeights{*spec.gaussian_sigma};
  switch (spec.kind) {
    case GraphSpec::Kind::path: return path_graph(spec.n);
    case GraphSpec::Kind::knn: return knn_graph(io::read_points(resolve(spec.file)), spec.k, weights);
    case GraphSpec::Kind::random_knn:
      if (spec.n < 2 || spec.dims < 1) {
        throw Error(ErrorCode::config, "random_knn needs n >= 2 and dims >= 1");
      }
      return knn_graph(random_points(spec.n, spec.dims, spec.seed), spec.k, weights);
    case GraphSpec::Kind::edge_list:
      return io::read_edge_list(resolve(spec.file),
                                spec.n > 0 ? std::optional<Index>(spec.n) : std::nullopt);
  }
  throw Error(ErrorCode::config, "unknown graph kind");
}

struct BenchmarkConfig {
  static std::vector<double> default_lambda_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
  }

  GraphSpec spatial;
  GraphSpec temporal;
  std::vector<double> sigma_list;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<Family> families;
  TrainConfig train;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  double bandwidth = 0.3;
  bool persist_estimates = false;
  DfrftMode dfrft_mode = DfrftMode::candan;
  double margin_tol = kDefaultMarginTolerance;

  void validate() const {
    if (families.empty()) throw Error(ErrorCode::config, "benchmark needs at least one family");
    if (seeds.empty()) throw Error(ErrorCode::config, "benchmark needs at least one seed");
    if (sigma_list.empty()) throw Error(ErrorCode::config, "benchmark needs at least one sigma");
    for (double s : sigma_list) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorCode::config, "sigma must be >= 0");
    }
    if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
      throw Error(ErrorCode::config, "bandwidth must lie in (0, 1]");
    }
    if (std::find(families.begin(), families.end(), Family::gcgfrft) != families.end()) {
      if (lambda_grid.empty()) throw Error(ErrorCode::config, "lambda grid is empty");
      for (double l : lambda_grid) {
        if (!(l >= 0.0 && l <= 1.0)) throw Error(ErrorCode::config, "lambda grid outside [0, 1]");
      }
    }
    train.validate();
  }
};

namespace detail {
inline GraphSpec graph_spec_from_json(const nlohmann::json& j) {
  GraphSpec s;
  const auto type = j.at("type").get<std::string>();
  if (type == "path") {
    s.kind = GraphSpec::Kind::path;
    s.n = j.at("n").get<Index>();
  } else if (type == "knn") {
    s.k = j.at("k").get<Index>();
    if (j.contains("points_file")) {
      s.kind = GraphSpec::Kind::knn;
      s.file = j["points_file"].get<std::string>();
    } else {
      s.kind = GraphSpec::Kind::random_knn;
      s.n = j.at("n").get<Index>();
      s.seed = j.value("point_seed", std::uint64_t{0});
      s.dims = j.value("dims", Index{2});
    }
    if (j.contains("gaussian_sigma")) s.gaussian_sigma = j["gaussian_sigma"].get<double>();
  } else if (type == "edge_list") {
    s.kind = GraphSpec::Kind::edge_list;
    s.file = j.at("file").get<std::string>();
    s.n = j.value("n", Index{0});
  } else {
    throw Error(ErrorCode::config, "unknown graph type '" + type + "'");
  }
  return s;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

inline BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  try {
    BenchmarkConfig c;
    c.spatial = detail::graph_spec_from_json(j.at("spatial_graph"));
    c.temporal = detail::graph_spec_from_json(j.at("temporal_graph"));
    c.sigma_list = j.at("sigma_list").get<std::vector<double>>();
    c.lambda_grid = j.contains("lambda_grid") ? j["lambda_grid"].get<std::vector<double>>()
                                              : BenchmarkConfig::default_lambda_grid();
    for (const auto& f : j.at("families")) c.families.push_back(parse_family(f.get<std::string>()));
    if (j.contains("train")) c.train = io::train_config_from_json(j["train"]);
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.output_dir = j.value("output_dir", std::string("out"));
    c.bandwidth = j.value("bandwidth", 0.3);
    c.persist_estimates = j.value("persist_estimates", false);
    c.margin_tol = j.value("margin_tol", kDefaultMarginTolerance);
    const auto mode = j.value("dfrft_mode", std::string("candan"));
    if (mode == "candan") {
      c.dfrft_mode = DfrftMode::candan;
    } else if (mode == "principal_shifted") {
      c.dfrft_mode = DfrftMode::principal_shifted;
    } else {
      throw Error(ErrorCode::config, "unknown dfrft_mode '" + mode + "'");
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("benchmark config: ") + e.what());
  }
}

struct GridEntry {
  double lambda = 0.0;
  bool ok = false;
  double mse = 0.0;
  double final_loss = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct ReportRow {
  std::string method;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error;
  MetricValues metrics;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> lambda;
  int epochs = 0;
  std::optional<double> final_loss;
  std::vector<GridEntry> grid;
  std::string estimate_file;
  double wall_time = 0.0;  // seconds; kept out of the deterministic report
};

struct MetricReport {
  std::vector<ReportRow> rows;

  std::string to_csv() const {
    std::ostringstream os;
    os << "method,sigma,seed,status,mse,psnr,ssim,alpha,beta,lambda,epochs,final_loss\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : ""; };
    for (const auto& r : rows) {
      const bool ok = r.status == "ok";
      os << r.method << ',' << format_number(r.sigma) << ',' << r.seed << ',' << r.status << ','
         << (ok ? format_number(r.metrics.mse) : "") << ','
         << (ok ? format_number(r.metrics.psnr) : "") << ','
         << (ok ? format_number(r.metrics.ssim) : "") << ',' << opt(r.alpha) << ','
         << opt(r.beta) << ',' << opt(r.lambda) << ',' << r.epochs << ',' << opt(r.final_loss)
         << '\n';
    }
    return os.str();
  }

  nlohmann::json to_json() const {
    auto num = [](double v) {
      return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v));
    };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); };
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json j{{"method", r.method}, {"sigma", r.sigma},   {"seed", r.seed},
                       {"status", r.status}, {"epochs", r.epochs}, {"alpha", opt(r.alpha)},
                       {"beta", opt(r.beta)}, {"lambda", opt(r.lambda)},
                       {"final_loss", opt(r.final_loss)}};
      if (r.status == "ok") {
        j["mse"] = num(r.metrics.mse);
        j["psnr"] = num(r.metrics.psnr);
        j["ssim"] = num(r.metrics.ssim);
      } else {
        j["error"] = r.error;
      }
      if (!r.grid.empty()) {
        nlohmann::json grid = nlohmann::json::array();
        for (const auto& g : r.grid) {
          grid.push_back(g.ok ? nlohmann::json{{"lambda", g.lambda},
                                               {"ok", true},
                                               {"mse", num(g.mse)},
                                               {"final_loss", num(g.final_loss)},
                                               {"alpha", g.alpha},
                                               {"beta", g.beta}}
                              : nlohmann::json{{"lambda", g.lambda}, {"ok", false}});
        }
        j["grid"] = std::move(grid);
      }
      if (!r.estimate_file.empty()) j["estimate_file"] = r.estimate_file;
      out.push_back(std::move(j));
    }
    return {{"rows", std::move(out)}};
  }

  std::string timings_csv() const {
    std::ostringstream os;
    os << "method,sigma,seed,wall_time_s\n";
    for (const auto& r : rows) {
      os << r.method << ',' << format_number(r.sigma) << ',' << r.seed << ','
         << format_number(r.wall_time) << '\n';
    }
    return os.str();
  }

  const ReportRow* find(const std::string& method, double sigma, std::uint64_t seed) const {
    for (const auto& r : rows) {
      if (r.method == method && r.sigma == sigma && r.seed == seed) return &r;
    }
    return nullptr;
  }
};

struct BenchmarkInstance {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  TimeVertexSignal x;
  TimeVertexSignal y;
};

/// Clean and noisy signals for every (sigma, seed). The noise draw depends
/// only on the seed, so sigma levels share one realization.
inline std::vector<BenchmarkInstance> make_instances(const BenchmarkConfig& cfg, const Graph& g1,
                                                     Index n2) {
  std::vector<BenchmarkInstance> out;
  for (double sigma : cfg.sigma_list) {
    for (std::uint64_t seed : cfg.seeds) {
      TimeVertexSignal x = synth_signal(g1, n2, cfg.bandwidth, detail::mix_seed(seed, 0));
      TimeVertexSignal y = add_awgn(x, sigma, detail::mix_seed(seed, 1));
      out.push_back({sigma, seed, std::move(x), std::move(y)});
    }
  }
  return out;
}

namespace detail {
inline ReportRow run_method(const TransformContext& ctx, const BenchmarkConfig& cfg,
                            const BenchmarkInstance& inst, const std::string& method,
                            Matrix& estimate) {
  ReportRow row;
  row.method = method;
  row.sigma = inst.sigma;
  row.seed = inst.seed;
  const Matrix x = inst.x.real();
  const double max_value = x.cwiseAbs().maxCoeff();
  auto score = [&](const Matrix& est) { return metrics(x, est, max_value); };
  auto keep = [&](Matrix est) {
    const MetricValues m = score(est);
    estimate = std::move(est);
    return m;
  };

  try {
    if (method == "noisy") {
      row.metrics = keep(inst.y.real());
      return row;
    }
    if (method == "oracle_h") {
      const WienerModel model(ctx, Family::gbfrft2d);
      FilterParams p;
      p.alpha = 1.0;
      p.beta = 1.0;
      p.lambda = 0.0;
      p.h = closed_form_h(inst.y, inst.x, p, model);
      const auto est = denoise(inst.y, p, model);
      row.metrics = keep(est.estimate.real());
      row.alpha = p.alpha;
      row.beta = p.beta;
      row.final_loss = (est.complex_estimate - inst.x.data).squaredNorm();
      return row;
    }

    const Family family = parse_family(method);
    const WienerModel model(ctx, family);
    row.epochs = cfg.train.epochs;
    if (family != Family::gcgfrft) {
      const TrainResult r = train(inst.y, inst.x, 0.0, cfg.train, model);
      row.metrics = keep(denoise(inst.y, r.params, model).estimate.real());
      row.alpha = r.params.alpha;
      row.beta = r.params.beta;
      row.final_loss = r.final_loss;
      return row;
    }

    // lambda is chosen by the estimate's MSE, the quantity the report ranks.
    const GridScore by_mse = [&](const TrainResult& r) {
      return score(denoise(inst.y, r.params, model).estimate.real()).mse;
    };
    const GridSearchResult g =
        lambda_grid_search(inst.y, inst.x, cfg.lambda_grid, cfg.train, model, by_mse, 1);
    for (const auto& e : g.table) {
      GridEntry entry{e.lambda, e.ok};
      if (e.ok) {
        entry.mse = e.score;
        entry.final_loss = e.result->final_loss;
        entry.alpha = e.result->params.alpha;
        entry.beta = e.result->params.beta;
      }
      row.grid.push_back(entry);
    }
    row.metrics = keep(denoise(inst.y, g.best.params, model).estimate.real());
    row.alpha = g.best.params.alpha;
    row.beta = g.best.params.beta;
    row.lambda = g.best_lambda;
    row.final_loss = g.best.final_loss;
  } catch (const AssumptionViolated& e) {
    row.status = "assumption_violated";
    row.error = e.what();
  }
  return row;
}

inline std::string estimate_name(const ReportRow& r, size_t sigma_index) {
  return "estimates/" + r.method + "_s" + std::to_string(sigma_index) + "_seed" +
         std::to_string(r.seed) + ".csv";
}
}  // namespace detail

/// Rows are ordered by sigma, then seed, then method (noisy, oracle_h, the
/// configured families). Row contents do not depend on `threads`.
/// Relative graph file paths resolve against `base_dir`.
inline MetricReport run_benchmark(const BenchmarkConfig& cfg, unsigned threads = 1,
                                  const std::filesystem::path& base_dir = {}) {
  cfg.validate();
  const Graph g1 = build_graph(cfg.spatial, base_dir);
  const Graph g2 = build_graph(cfg.temporal, base_dir);
  const TransformContext ctx =
      TransformContext::from_graphs(g1, g2, ContextOptions{cfg.dfrft_mode, cfg.margin_tol});
  const auto instances = make_instances(cfg, g1, g2.size());

  std::vector<std::string> methods{"noisy", "oracle_h"};
  for (Family f : cfg.families) methods.emplace_back(to_string(f));

  MetricReport report;
  report.rows.resize(instances.size() * methods.size());
  std::vector<Matrix> estimates(report.rows.size());
  parallel_for(report.rows.size(), threads, [&](size_t t) {
    const auto start = std::chrono::steady_clock::now();
    ReportRow row = detail::run_method(ctx, cfg, instances[t / methods.size()],
                                       methods[t % methods.size()], estimates[t]);
    row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.rows[t] = std::move(row);
  });

  if (cfg.persist_estimates) {
    const std::filesystem::path out(cfg.output_dir);
    for (size_t t = 0; t < report.rows.size(); ++t) {
      ReportRow& row = report.rows[t];
      if (row.status != "ok") continue;
      const size_t sigma_index = t / methods.size() / cfg.seeds.size();
      row.estimate_file = detail::estimate_name(row, sigma_index);
      io::write_matrix_csv(out / row.estimate_file, estimates[t]);
      if (sigma_index == 0 && row.method == "noisy") {
        io::write_matrix_csv(out / ("estimates/clean_seed" + std::to_string(row.seed) + ".csv"),
                             instances[t / methods.size()].x.real());
      }
    }
  }
  return report;
}

/// report.csv and report.json are byte-stable for a fixed config;
/// timings.csv carries wall-clock times.
inline void write_report(const MetricReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.csv", std::ios::binary);
    out << report.to_csv();
  }
  io::write_json(dir / "report.json", report.to_json());
  std::ofstream out(dir / "timings.csv", std::ios::binary);
  out << report.timings_csv();
}

}  // namespace gcfrft
