#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "fedcast/federated.hpp"
#include "fedcast/model.hpp"
#include "fedcast/synthetic.hpp"
#include "fedcast/windowing.hpp"

namespace {

using namespace fedcast;

ingest::SyntheticSpec bench_spec(int days) {
    ingest::SyntheticSpec spec;
    spec.days = days;
    spec.seed = 7;
    spec.channels = {{"t_room", ingest::ChannelKind::Temperature, 21.0, 2.5,
                      1.0, 0.4}};
    return spec;
}

core::SupervisedWindowSet bench_windows(int days) {
    const auto channels = ingest::synthesize(bench_spec(days));
    core::WindowSpec window;
    window.lookback = 168;
    window.horizon = 6;
    window.target_id = "t_room";
    return core::make_windows(channels, window);
}

struct ModelFixture {
    core::SupervisedWindowSet windows;
    std::unique_ptr<models::ForecastModel> model;
    models::ParamVector params;

    explicit ModelFixture(models::ModelSpec spec)
        : windows(bench_windows(60)),
          model(models::make_model(spec, windows, models::Scaler::fit(windows))),
          params(model->initParams(1)) {}
};

models::ModelSpec linear_spec() {
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Linear;
    return spec;
}

models::ModelSpec dense_spec() {
    models::ModelSpec spec;
    spec.kind = models::ModelSpec::Kind::Dense;
    spec.hidden = {32};
    return spec;
}

void BM_MakeWindows(benchmark::State& state) {
    const auto channels = ingest::synthesize(bench_spec(60));
    core::WindowSpec window;
    window.lookback = 168;
    window.horizon = 6;
    window.target_id = "t_room";
    for (auto _ : state) {
        benchmark::DoNotOptimize(core::make_windows(channels, window));
    }
}
BENCHMARK(BM_MakeWindows);

void BM_LinearPredict(benchmark::State& state) {
    const ModelFixture f(linear_spec());
    const auto& sample = f.windows.samples().front();
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.model->predict(f.params, sample));
    }
}
BENCHMARK(BM_LinearPredict);

void BM_DensePredict(benchmark::State& state) {
    const ModelFixture f(dense_spec());
    const auto& sample = f.windows.samples().front();
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.model->predict(f.params, sample));
    }
}
BENCHMARK(BM_DensePredict);

void BM_DenseGradientBatch32(benchmark::State& state) {
    const ModelFixture f(dense_spec());
    const std::span<const core::WindowSample> batch(
        f.windows.samples().data(), 32);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            f.model->gradient(f.params, batch, models::LossKind::Squared));
    }
}
BENCHMARK(BM_DenseGradientBatch32);

void BM_AggregateFedAvg(benchmark::State& state) {
    const ModelFixture f(linear_spec());
    std::vector<std::pair<models::ParamVector, std::size_t>> deltas;
    for (int c = 0; c < 8; ++c) {
        deltas.emplace_back(f.model->initParams(static_cast<std::uint64_t>(c)),
                            100 + c);
    }
    for (auto _ : state) {
        auto strategy = fed::ServerStrategy::make(fed::StrategyKind::FedAvg);
        benchmark::DoNotOptimize(fed::aggregate(deltas, strategy, f.params));
    }
}
BENCHMARK(BM_AggregateFedAvg);

void BM_AggregateFedMedian(benchmark::State& state) {
    const ModelFixture f(linear_spec());
    std::vector<std::pair<models::ParamVector, std::size_t>> deltas;
    for (int c = 0; c < 8; ++c) {
        deltas.emplace_back(f.model->initParams(static_cast<std::uint64_t>(c)),
                            100 + c);
    }
    for (auto _ : state) {
        auto strategy = fed::ServerStrategy::make(fed::StrategyKind::FedMedian);
        benchmark::DoNotOptimize(fed::aggregate(deltas, strategy, f.params));
    }
}
BENCHMARK(BM_AggregateFedMedian);

}  // namespace

BENCHMARK_MAIN();
