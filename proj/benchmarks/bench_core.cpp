// Copyright 2026 The qccf Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "qccf/fl_core.hpp"
#include "qccf/kkt_solver.hpp"
#include "qccf/policies.hpp"
#include "qccf/quantizer.hpp"
#include "qccf/rng.hpp"
#include "qccf/simctl.hpp"

namespace {

void BM_Quantize(benchmark::State& state) {
  const int bits = static_cast<int>(state.range(0));
  qccf::Rng rng(1);
  std::vector<double> model(8010);
  for (auto& x : model) x = rng.normal(0.0, 0.1);
  for (auto _ : state) {
    auto qm = qccf::quantize(model, bits, rng);
    benchmark::DoNotOptimize(qm);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(model.size()));
}
BENCHMARK(BM_Quantize)->Arg(1)->Arg(8)->Arg(16);

void BM_Dequantize(benchmark::State& state) {
  qccf::Rng rng(2);
  std::vector<double> model(8010);
  for (auto& x : model) x = rng.normal(0.0, 0.1);
  const auto qm = qccf::quantize(model, 8, rng);
  for (auto _ : state) benchmark::DoNotOptimize(qccf::dequantize(qm));
}
BENCHMARK(BM_Dequantize);

void BM_SolveClient(benchmark::State& state) {
  qccf::Rng rng(3);
  std::vector<qccf::ClientSolveInput> inputs;
  for (int t = 0; t < 60; ++t) inputs.push_back(qccf::random_solve_instance(t, rng));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qccf::solve_client(inputs[k]));
    k = (k + 1) % inputs.size();
  }
}
BENCHMARK(BM_SolveClient);

void BM_OracleGrid(benchmark::State& state) {
  qccf::Rng rng(4);
  const auto in = qccf::random_solve_instance(5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(qccf::oracle_grid_solve(in));
}
BENCHMARK(BM_OracleGrid);

void BM_GaAllocate(benchmark::State& state) {
  const int clients = static_cast<int>(state.range(0));
  const int channels = static_cast<int>(state.range(1));
  qccf::Rng rng(5);
  const auto g = qccf::random_ga_instance(clients, channels, rng);
  const qccf::AllocationEvaluator eval = [&](const qccf::Chromosome& c) {
    return qccf::evaluate_allocation(qccf::PolicyKind::qccf, g.config, g.state, 1, c);
  };
  for (auto _ : state) {
    qccf::Rng ga_rng(6);
    benchmark::DoNotOptimize(qccf::ga_allocate(clients, channels, g.config.ga, eval, ga_rng));
  }
}
BENCHMARK(BM_GaAllocate)->Args({3, 3})->Args({10, 6})->Unit(benchmark::kMillisecond);

void BM_LocalUpdate(benchmark::State& state) {
  qccf::Rng rng(7);
  qccf::SyntheticTask task(800, 10, 0.12, rng);
  const std::vector<int> classes = {1, 4, 7};
  const auto data = task.sample(1200, classes, rng);
  qccf::SoftmaxRegression model(800, 10);
  const qccf::ModelVector theta = qccf::ModelVector::Zero(model.dimension());
  const int batch = qccf::batch_size_for(data.size(), 2, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qccf::local_update(model, theta, data, 0.05, 6, batch, rng));
  }
}
BENCHMARK(BM_LocalUpdate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
