#include <benchmark/benchmark.h>

#include <memory>

#include "ncasp/algnn.hpp"
#include "bench_common.hpp"

using namespace ncasp;

static void TrainEpoch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  auto shifts = std::make_shared<ShiftSet>(bench::random_shift_set(n, 2, rng));

  std::vector<TrainSample> data;
  for (int i = 0; i < 64; ++i) {
    Vector x(n);
    for (int j = 0; j < n; ++j) x(j) = rng.gaussian();
    Vector y(1);
    y << x.sum();
    data.push_back({std::move(x), std::move(y)});
  }

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.il_weight = 0.05;
  cfg.seed = 5;

  for (auto _ : state) {
    AlgNN net;
    net.layers.push_back(Layer::dense_template(shifts, 2, 1, 1, Nonlinearity::relu));
    net.readout_weight = Matrix(1, n);
    net.readout_bias = Vector(1);
    initialize_parameters(net, 7);
    benchmark::DoNotOptimize(train(std::move(net), data, cfg));
  }
  state.SetComplexityN(n);
}
BENCHMARK(TrainEpoch)->RangeMultiplier(2)->Range(16, 128)->Complexity()
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
