#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "matchsim/analysis.hpp"
#include "matchsim/ctmc.hpp"
#include "matchsim/diffusion.hpp"
#include "matchsim/kernel.hpp"
#include "matchsim/model.hpp"

using namespace matchsim;

namespace {

SystemParams desk_params(std::int64_t n) {
    SystemParams p;
    p.K = 2;
    p.lambda0 = 1.0;
    p.beta = {0.3, -0.3};
    p.delta = {1.0, 1.0};
    p.buffer = {1.0, 1.0};
    p.scale = n;
    return p;
}

void BM_ctmc_events(benchmark::State& state) {
    const auto params = desk_params(state.range(0));
    const auto rates = derive_prelimit_rates(params);
    const QueueState initial({0, 0});
    std::uint64_t seed = 1;
    std::uint64_t events = 0;
    for (auto _ : state) {
        SimulateOptions options;
        options.record_every = 0;
        const auto path = simulate_path(rates, initial, 1.0, seed++, options);
        events += path.total_events;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_ctmc_events)->Arg(100)->Arg(400)->Arg(1600);

void BM_limit_steps(benchmark::State& state) {
    const auto params = desk_params(400);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    std::uint64_t seed = 1;
    std::uint64_t steps = 0;
    for (auto _ : state) {
        const auto path = simulate_limit_K(params, x0, 1.0, 1e-3, seed++);
        steps += path.times.size() - 1;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_limit_steps);

void BM_double_ended_steps(benchmark::State& state) {
    const auto params = desk_params(400);
    std::uint64_t seed = 1;
    std::uint64_t steps = 0;
    for (auto _ : state) {
        const auto path =
            simulate_double_ended(params, 1.4142135623730951, 0.0, 1.0, 1e-3, seed++);
        steps += path.times.size() - 1;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_double_ended_steps);

void BM_uniformization(benchmark::State& state) {
    const PreLimitRates rates{{5.0, 7.0}, {1.3, 0.7}, {4, 4}};
    const auto gen = build_generator_matrix(rates);
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(gen.states.size()));
    p0(0) = 1.0;
    for (auto _ : state) {
        const auto p = uniformization_transient(gen.matrix, p0, 1.0);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_uniformization);

}  // namespace

BENCHMARK_MAIN();
