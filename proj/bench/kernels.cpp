// Serial reference vs OpenMP kernels. Each pair runs the same work with
// Exec::serial and Exec::parallel; results are identical by contract.

#include <benchmark/benchmark.h>

#include "threatbench/core/matrix.hpp"
#include "threatbench/core/rng.hpp"
#include "threatbench/forest/isolation.hpp"
#include "threatbench/forest/random_forest.hpp"
#include "threatbench/neural/dense_autoencoder.hpp"
#include "threatbench/neural/lstm_autoencoder.hpp"
#include "threatbench/preprocess/smote.hpp"

namespace tb = threatbench;

namespace {

tb::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    tb::RngStream rng(seed, "bench");
    tb::Matrix X(rows, cols);
    for (double& v : X.data()) v = rng.normal();
    return X;
}

std::vector<int> labels_for(const tb::Matrix& X) {
    std::vector<int> y(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) y[i] = X(i, 0) + 0.5 * X(i, 1) > 0.0;
    return y;
}

tb::Exec exec_of(const benchmark::State& state) {
    return state.range(0) ? tb::Exec::parallel : tb::Exec::serial;
}

void BM_RandomForestFit(benchmark::State& state) {
    const auto X = random_matrix(4000, 12, 1);
    const auto y = labels_for(X);
    tb::forest::ForestConfig cfg;
    cfg.n_trees = 32;
    for (auto _ : state) {
        auto model = tb::forest::fit_random_forest(X, y, cfg, tb::RngStream(7, "rf"), exec_of(state));
        benchmark::DoNotOptimize(model.trees.size());
    }
}

void BM_IsolationScore(benchmark::State& state) {
    const auto X = random_matrix(8000, 8, 2);
    const auto model = tb::forest::fit_isolation_forest(X, 100, 256, tb::RngStream(7, "if"));
    for (auto _ : state) {
        auto scores = model.score(X, exec_of(state));
        benchmark::DoNotOptimize(scores.data());
    }
}

void BM_NearestNeighbors(benchmark::State& state) {
    const auto X = random_matrix(1500, 14, 3);
    for (auto _ : state) {
        auto nn = tb::preprocess::nearest_neighbors(X, 5, exec_of(state));
        benchmark::DoNotOptimize(nn.data());
    }
}

void BM_ReconstructionErrors(benchmark::State& state) {
    const auto X = random_matrix(20000, 16, 4);
    const auto model = tb::neural::init_dense_autoencoder(tb::neural::default_dense_layers(16), 0.0,
                                                          tb::RngStream(7, "ae"));
    for (auto _ : state) {
        auto errors = tb::neural::reconstruction_errors(model, X, exec_of(state));
        benchmark::DoNotOptimize(errors.data());
    }
}

void BM_LstmObjectiveGradient(benchmark::State& state) {
    tb::preprocess::SessionTensor t;
    t.sessions = 64;
    t.time_steps = 40;
    t.features = 10;
    t.data = random_matrix(t.sessions * t.time_steps, t.features, 5).data();
    t.lengths.assign(t.sessions, t.time_steps);
    t.labels.assign(t.sessions, 0);
    const auto model = tb::neural::init_lstm_autoencoder(10, 32, 16, tb::RngStream(7, "lstm"));
    std::vector<std::size_t> batch(t.sessions);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    std::vector<double> grad;
    for (auto _ : state) {
        grad.assign(model.params.size(), 0.0);
        benchmark::DoNotOptimize(
            tb::neural::lstm_objective(model, t, batch, &grad, exec_of(state)));
    }
}

} // namespace

BENCHMARK(BM_RandomForestFit)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IsolationScore)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestNeighbors)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReconstructionErrors)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LstmObjectiveGradient)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
