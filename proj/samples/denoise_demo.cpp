// Denoise one synthetic time-vertex signal with every transform family.

#include <cstdio>

#include "gcfrft/gcfrft.hpp"

using namespace gcfrft;

int main() {
  const Graph g1 = knn_graph(random_points(24, 2, 11), 3);
  const Graph g2 = path_graph(8);
  const TransformContext ctx = TransformContext::from_graphs(g1, g2);

  const TimeVertexSignal x = synth_signal(g1, g2.size(), 0.3, 1);
  const TimeVertexSignal y = add_awgn(x, 0.8, 2);
  std::printf("noisy      mse %.4f\n", metrics(x.real(), y.real()).mse);

  TrainConfig cfg;
  cfg.grad_mode = GradMode::analytic;
  cfg.epochs = 100;

  for (Family f : {Family::gfrft2d, Family::gbfrft2d, Family::jfrft}) {
    const WienerModel model(ctx, f);
    const TrainResult r = train(y, x, 0.0, cfg, model);
    const Matrix est = denoise(y, r.params, model).estimate.real();
    std::printf("%-10s mse %.4f  alpha %.3f beta %.3f\n", to_string(f), metrics(x.real(), est).mse,
                r.params.alpha, r.params.beta);
  }

  const WienerModel model(ctx, Family::gcgfrft);
  const GridScore by_mse = [&](const TrainResult& r) {
    return metrics(x.real(), denoise(y, r.params, model).estimate.real()).mse;
  };
  const GridSearchResult g =
      lambda_grid_search(y, x, BenchmarkConfig::default_lambda_grid(), cfg, model, by_mse);
  for (const auto& row : g.table) {
    if (row.ok)
      std::printf("  lambda %.1f  mse %.4f\n", row.lambda, row.score);
    else
      std::printf("  lambda %.1f  %s\n", row.lambda, row.error.c_str());
  }
  std::printf("gcgfrft    mse %.4f  lambda %.1f\n", by_mse(g.best), g.best_lambda);
}
