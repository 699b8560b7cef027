#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "readapt/contrastive.hpp"
#include "readapt/dirichlet.hpp"
#include "readapt/distance.hpp"
#include "readapt/model.hpp"
#include "readapt/pool.hpp"
#include "readapt/rng.hpp"
#include "readapt/special_functions.hpp"
#include "readapt/training.hpp"

namespace {

void BM_LogGamma(benchmark::State& state) {
    readapt::RandomStream stream(1);
    std::vector<double> xs(1024);
    for (double& x : xs) x = 0.05 + 500.0 * stream.uniform();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(readapt::log_gamma(xs[i]));
        i = (i + 1) & 1023;
    }
}
BENCHMARK(BM_LogGamma);

void BM_UPred(benchmark::State& state) {
    const std::size_t c = static_cast<std::size_t>(state.range(0));
    readapt::RandomStream stream(2);
    std::vector<double> alpha(c);
    for (double& a : alpha) a = 0.5 + 20.0 * stream.uniform();
    const readapt::DirichletParams d(alpha);
    const readapt::RenyiOrder s(0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(readapt::u_pred(d, s));
    }
}
BENCHMARK(BM_UPred)->Arg(2)->Arg(16)->Arg(64);

readapt::FeatureMap random_features(std::size_t n, std::size_t dim,
                                    std::uint64_t seed) {
    readapt::RandomStream stream(seed);
    readapt::FeatureMap features;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> f(dim);
        for (double& v : f) v = stream.normal();
        features[static_cast<std::int64_t>(i)] = f;
    }
    return features;
}

void BM_MutualKnn(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const readapt::FeatureMap features = random_features(n, 32, 3);
    std::vector<std::int64_t> ids;
    for (const auto& [id, f] : features) ids.push_back(id);
    for (auto _ : state) {
        auto knn = readapt::knn_sets(ids, features, 5);
        benchmark::DoNotOptimize(knn);
    }
    state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MutualKnn)->Arg(64)->Arg(256)->Complexity();

void BM_Contrastive(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const readapt::FeatureMap features = random_features(2 * n, 32, 4);
    readapt::PoolState pools;
    std::map<std::int64_t, int> labels;
    std::vector<std::int64_t> batch;
    std::int64_t id = 0;
    for (const auto& [key, f] : features) {
        if (static_cast<std::size_t>(id) < n) {
            pools.source_labeled.insert(key);
        } else {
            pools.target_labeled.insert(key);
        }
        labels[key] = static_cast<int>(id % 6);
        if (id % 4 == 0) batch.push_back(key);
        ++id;
    }
    readapt::RandomStream stream(5);
    for (auto _ : state) {
        auto result = readapt::contrastive_loss(batch, features, labels,
                                                pools, 8, stream, true);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_Contrastive)->Arg(32)->Arg(128);

void BM_TrainingStep(benchmark::State& state) {
    const readapt::ModelDims dims{8, 32, 32, 6};
    readapt::EvidentialModel model = readapt::init_model(dims, 6);
    readapt::RandomStream stream(7);
    readapt::TrainingData data;
    readapt::PoolState pools;
    readapt::TrainingBatch batch;
    for (std::int64_t i = 0; i < 48; ++i) {
        std::vector<double> x(8);
        for (double& v : x) v = stream.normal();
        data.inputs[i] = x;
        if (i < 24) {
            pools.source_labeled.insert(i);
            data.labels[i] = static_cast<int>(i % 6);
        } else if (i < 32) {
            pools.target_labeled.insert(i);
            data.labels[i] = static_cast<int>(i % 6);
        } else {
            pools.target_unlabeled.insert(i);
            data.pls[i] = {static_cast<int>(i % 6)};
        }
    }
    for (std::int64_t i = 0; i < 16; ++i) batch.edl_ids.push_back(i);
    for (std::int64_t i = 32; i < 48; ++i) batch.align_ids.push_back(i);
    batch.contrastive_ids = batch.edl_ids;
    batch.subsets = readapt::draw_contrastive_subsets(
        batch.contrastive_ids, data.labels, pools, 8, stream);
    const readapt::LossConfig config;
    for (auto _ : state) {
        auto result = readapt::backward(model, data, pools, batch, config);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_TrainingStep);

} // namespace

BENCHMARK_MAIN();
