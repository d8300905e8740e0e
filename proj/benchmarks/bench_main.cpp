#include <benchmark/benchmark.h>

#include <vector>

#include "triaccel/curvature.hpp"
#include "triaccel/hvp.hpp"
#include "triaccel/network.hpp"
#include "triaccel/precision.hpp"
#include "triaccel/rng.hpp"
#include "triaccel/task.hpp"

using namespace triaccel;

namespace {

std::vector<double> random_values(size_t n, uint64_t seed) {
  Rng rng(seed);
  return rng.normal_vector(n);
}

Network bench_net(uint64_t seed) {
  return Network::make({{32, 64, Activation::Tanh},
                        {64, 64, Activation::Tanh},
                        {64, 10, Activation::Identity}},
                       seed);
}

Matrix bench_batch(const Network& net, int rows, uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, net.input_dim());
  m.data = rng.normal_vector(m.data.size());
  return m;
}

std::vector<int> bench_labels(int rows, int classes, uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(rows);
  for (int& l : labels) l = static_cast<int>(rng.uniform_below(classes));
  return labels;
}

void BM_QuantizeBuffer(benchmark::State& state) {
  const auto mode = static_cast<PrecisionMode>(state.range(0));
  const auto source = random_values(static_cast<size_t>(state.range(1)), 0xbe);
  std::vector<double> values = source;
  for (auto _ : state) {
    values = source;
    quantize_buffer(values, mode);
    benchmark::DoNotOptimize(values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_Forward(benchmark::State& state) {
  const auto net = bench_net(7);
  const auto batch = bench_batch(net, static_cast<int>(state.range(1)), 11);
  const PrecisionMap map(static_cast<size_t>(net.layer_count()),
                         static_cast<PrecisionMode>(state.range(0)));
  for (auto _ : state) {
    auto cache = forward(net, batch, map);
    benchmark::DoNotOptimize(cache.logits().data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_ForwardBackward(benchmark::State& state) {
  const auto net = bench_net(7);
  const int rows = static_cast<int>(state.range(1));
  const auto batch = bench_batch(net, rows, 11);
  const auto labels = bench_labels(rows, 10, 13);
  const PrecisionMap map(static_cast<size_t>(net.layer_count()),
                         static_cast<PrecisionMode>(state.range(0)));
  for (auto _ : state) {
    auto cache = forward(net, batch, map);
    auto result = backward(net, cache, labels, map, 1.0);
    benchmark::DoNotOptimize(result.grads.data());
  }
  state.SetItemsProcessed(state.iterations() * rows);
}

void BM_LayerHvpApply(benchmark::State& state) {
  const auto net = bench_net(7);
  const int rows = static_cast<int>(state.range(0));
  const auto batch = bench_batch(net, rows, 11);
  const auto labels = bench_labels(rows, 10, 13);
  NetworkLayerHvp op(net, 1, batch, labels);
  Rng rng(17);
  const auto v = rng.normal_vector(static_cast<size_t>(op.dim()));
  for (auto _ : state) {
    auto hv = op.apply(v);
    benchmark::DoNotOptimize(hv.data());
  }
}

void BM_PowerIterationTopK(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(23);
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) {
      const double x = rng.normal();
      m.data[static_cast<size_t>(i) * dim + j] = x;
      m.data[static_cast<size_t>(j) * dim + i] = x;
    }
  DenseHvp op(m);
  CurvatureConfig cfg;
  cfg.top_k = 3;
  cfg.max_iters = 100;
  for (auto _ : state) {
    auto est = estimate_top_k(op, cfg);
    benchmark::DoNotOptimize(est.pairs.data());
  }
}

void BM_TaskBatch(benchmark::State& state) {
  TaskConfig cfg;
  const Task task = make_task(cfg, 5);
  Rng rng(29);
  std::vector<int> index(static_cast<size_t>(state.range(0)));
  for (int& i : index)
    i = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(task.train.size())));
  for (auto _ : state) {
    auto batch = gather(task.train, index);
    benchmark::DoNotOptimize(batch.inputs.data.data());
  }
}

}  // namespace

BENCHMARK(BM_QuantizeBuffer)
    ->Args({static_cast<int>(PrecisionMode::Fp16), 4096})
    ->Args({static_cast<int>(PrecisionMode::Bf16), 4096})
    ->Args({static_cast<int>(PrecisionMode::Fp32), 4096});
BENCHMARK(BM_Forward)
    ->Args({static_cast<int>(PrecisionMode::Fp32), 64})
    ->Args({static_cast<int>(PrecisionMode::Bf16), 64})
    ->Args({static_cast<int>(PrecisionMode::Fp16), 64});
BENCHMARK(BM_ForwardBackward)
    ->Args({static_cast<int>(PrecisionMode::Fp32), 64})
    ->Args({static_cast<int>(PrecisionMode::Bf16), 64});
BENCHMARK(BM_LayerHvpApply)->Arg(16)->Arg(64);
BENCHMARK(BM_PowerIterationTopK)->Arg(32)->Arg(128);
BENCHMARK(BM_TaskBatch)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
