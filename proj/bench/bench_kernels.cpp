// Serial vs OpenMP versions of the two parallel kernels: model-tree split
// search and seed replications.
#include "dgsim/model_tree.hpp"
#include "dgsim/random.hpp"
#include "dgsim/replication.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

namespace {

dgsim::TrainingSet synthetic(std::size_t n) {
    dgsim::RandomStream rng(42);
    dgsim::TrainingSet data;
    for (std::size_t i = 0; i < n; ++i) {
        dgsim::FeatureVector x;
        x.used_memory = 1e8 + rng.uniform() * 1e9;
        x.cpu_utilization = rng.uniform();
        x.message_size = 200 + rng.uniform() * 4000;
        x.msg_rate = rng.uniform() * 5000;
        double y = 1e-4 + 2e-8 * x.message_size + (x.msg_rate > 2500 ? 3e-7 * x.msg_rate : 1e-8 * x.msg_rate);
        data.rows.push_back({x.array(), y + rng.exponential(1e-5)});
    }
    return data;
}

void split_search(benchmark::State& state, bool parallel) {
    auto data = synthetic(static_cast<std::size_t>(state.range(0)));
    std::vector<std::uint32_t> index(data.rows.size());
    std::iota(index.begin(), index.end(), 0u);
    for (auto _ : state) {
        auto best = parallel ? dgsim::best_split_parallel(data.rows, index, 15)
                             : dgsim::best_split_serial(data.rows, index, 15);
        benchmark::DoNotOptimize(best);
    }
}

void BM_SplitSerial(benchmark::State& s) { split_search(s, false); }
void BM_SplitParallel(benchmark::State& s) { split_search(s, true); }
BENCHMARK(BM_SplitSerial)->Arg(2000)->Arg(20000);
BENCHMARK(BM_SplitParallel)->Arg(2000)->Arg(20000);

void BM_TrainSerial(benchmark::State& state) {
    auto data = synthetic(5000);
    for (auto _ : state) benchmark::DoNotOptimize(dgsim::train(data, {}));
}
void BM_TrainParallel(benchmark::State& state) {
    auto data = synthetic(5000);
    dgsim::TrainParams p;
    p.search = dgsim::SplitSearch::Parallel;
    for (auto _ : state) benchmark::DoNotOptimize(dgsim::train(data, p));
}
BENCHMARK(BM_TrainSerial);
BENCHMARK(BM_TrainParallel);

dgsim::RunConfig small_config() {
    dgsim::RunConfig c;
    c.servers = 4;
    c.clients_per_server = 4;
    c.workload.dataset_size = 10000;
    c.run.max_time = 2.0;
    c.run.seeds = {1, 2, 3, 4};
    return c;
}

void BM_ReplicationsSerial(benchmark::State& state) {
    auto c = small_config();
    for (auto _ : state) benchmark::DoNotOptimize(dgsim::run_replications_serial(c, c.run.seeds, {}));
}
void BM_ReplicationsParallel(benchmark::State& state) {
    auto c = small_config();
    for (auto _ : state) benchmark::DoNotOptimize(dgsim::run_replications_parallel(c, c.run.seeds, {}));
}
BENCHMARK(BM_ReplicationsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsParallel)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
