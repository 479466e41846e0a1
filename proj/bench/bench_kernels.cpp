// Serial reference kernels against their OpenMP and KD-tree counterparts.
#include <benchmark/benchmark.h>

#include "advpol/approximator/losses.hpp"
#include "advpol/density/cover_buffer.hpp"
#include "support/oracles.hpp"

using namespace advpol;

namespace {

struct KnnFixture {
  StateMatrix points, queries;
  std::vector<double> scale;
  KdForest forest;

  KnnFixture(std::size_t n, std::size_t dim) {
    auto rng = make_rng(1);
    points = testing::random_matrix(n, dim, rng);
    queries = testing::random_matrix(1024, dim, rng);
    scale.assign(dim, 1.0);
    forest.sync(points);
  }
};

void BM_KnnSerial(benchmark::State& state) {
  const KnnFixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(knn_brute_serial(f.points, f.queries, {}, 10, f.scale));
  state.SetItemsProcessed(state.iterations() * 1024);
}

void BM_KnnParallel(benchmark::State& state) {
  const KnnFixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(knn_brute_parallel(f.points, f.queries, {}, 10, f.scale));
  state.SetItemsProcessed(state.iterations() * 1024);
}

void BM_KnnKdTree(benchmark::State& state) {
  const KnnFixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(knn_forest(f.forest, f.points, f.queries, {}, 10, f.scale));
  state.SetItemsProcessed(state.iterations() * 1024);
}

#define KNN_ARGS ->Args({4096, 2})->Args({32768, 2})->Args({32768, 4})->Unit(benchmark::kMillisecond)
BENCHMARK(BM_KnnSerial) KNN_ARGS;
BENCHMARK(BM_KnnParallel) KNN_ARGS;
BENCHMARK(BM_KnnKdTree) KNN_ARGS;

struct GradFixture {
  PolicyHandle policy;
  testing::SurrogateBatch batch;

  explicit GradFixture(std::size_t n) {
    auto rng = make_rng(2);
    policy = testing::random_policy(HeadKind::kGaussian, 4, 2, 64, rng);
    batch = testing::surrogate_batch(policy, n, rng);
  }
  SurrogateLoss spec() const {
    return {&batch.states, &batch.actions, batch.old_log_prob, batch.advantage, 0.2, 0.0};
  }
};

void BM_GradientReference(benchmark::State& state) {
  const GradFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient_reference(f.policy, f.spec()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradientChunked(benchmark::State& state) {
  const GradFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(f.policy, f.spec()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_GradientReference)->Arg(64)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientChunked)->Arg(64)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
