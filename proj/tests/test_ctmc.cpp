#include <doctest.h>

#include <cmath>
#include <sstream>

#include "matchsim/ctmc.hpp"
#include "matchsim/rng.hpp"

using namespace matchsim;

namespace {

PreLimitRates make_rates(std::vector<double> lambda, std::vector<double> delta,
                         std::vector<std::int64_t> buffer) {
    PreLimitRates r;
    r.arrival_rate = std::move(lambda);
    r.abandon_rate_per_item = std::move(delta);
    r.buffer_count = std::move(buffer);
    return r;
}

PreLimitRates random_rates(std::mt19937_64& rng, int K) {
    std::vector<double> lam, del;
    std::vector<std::int64_t> b;
    for (int i = 0; i < K; ++i) {
        lam.push_back(1.0 + 25.0 * uniform_open(rng));
        del.push_back(0.2 + 2.0 * uniform_open(rng));
        b.push_back(rng() % 3 == 0 ? kUnboundedCount
                                   : 2 + static_cast<std::int64_t>(rng() % 6));
    }
    return make_rates(lam, del, b);
}

}  // namespace

TEST_CASE("horizon zero returns only the initial snapshot") {
    const auto rates = make_rates({5, 7}, {1, 1}, {3, 3});
    const auto path = simulate_path(rates, QueueState({0, 2}), 0.0, 42);
    REQUIRE(path.size() == 1);
    CHECK(path.times[0] == 0.0);
    CHECK(path.states[0] == std::vector<std::int64_t>{0, 2});
    CHECK(path.matches[0] == 0);
    CHECK(path.total_events == 0);
}

TEST_CASE("zero arrival rates and empty system: no events ever") {
    const auto rates = make_rates({0, 0}, {1, 1}, {3, 3});
    const auto path = simulate_path(rates, QueueState({0, 0}), 100.0, 42);
    CHECK(path.size() == 1);
    CHECK(path.total_events == 0);
}

TEST_CASE("flow conservation, match identity and product-zero on random paths") {
    auto rng = make_stream(404, 0);
    for (int K : {2, 3, 4}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto rates = random_rates(rng, K);
            const auto path = simulate_path(
                rates, QueueState(std::vector<std::int64_t>(static_cast<std::size_t>(K), 0)),
                3.0, rng());
            CHECK(path.total_events > 0);
            CHECK(flow_conservation_check(path));
            CHECK(match_count_identity_check(path));
            for (const auto& s : path.states)
                CHECK(is_valid_state(s, rates.buffer_count));
        }
    }
}

TEST_CASE("counters are nondecreasing and blocks only happen at full buffers") {
    const auto rates = make_rates({40, 35}, {1, 1}, {4, 4});
    const auto path = simulate_path(rates, QueueState({0, 0}), 5.0, 7);
    for (std::size_t k = 1; k < path.size(); ++k) {
        CHECK(path.times[k] > path.times[k - 1]);
        CHECK(path.matches[k] >= path.matches[k - 1]);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(path.arrivals[k][i] >= path.arrivals[k - 1][i]);
            CHECK(path.abandons[k][i] >= path.abandons[k - 1][i]);
            CHECK(path.blocks[k][i] >= path.blocks[k - 1][i]);
            CHECK(path.states[k][i] >= 0);
            CHECK(path.states[k][i] <= 4);
            if (path.blocks[k][i] > path.blocks[k - 1][i])
                CHECK(path.states[k - 1][i] == 4);  // block leaves the state put
        }
    }
    // With these rates blocks must actually occur.
    CHECK(path.blocks.back()[0] + path.blocks.back()[1] > 0);
}

TEST_CASE("determinism: same seed, same path") {
    const auto rates = make_rates({10, 12}, {1, 2}, {5, kUnboundedCount});
    const auto a = simulate_path(rates, QueueState({0, 1}), 2.0, 99);
    const auto b = simulate_path(rates, QueueState({0, 1}), 2.0, 99);
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
    CHECK(a.arrivals == b.arrivals);
    CHECK(a.matches == b.matches);
    const auto c = simulate_path(rates, QueueState({0, 1}), 2.0, 100);
    CHECK(a.times != c.times);
}

TEST_CASE("empirical arrival rate obeys the Poisson law bound") {
    const double T = 50.0;
    const auto rates = make_rates({30, 20}, {1, 1}, {kUnboundedCount, kUnboundedCount});
    const auto path = simulate_path(rates, QueueState({0, 0}), T, 2024);
    for (std::size_t i = 0; i < 2; ++i) {
        const double lam = rates.arrival_rate[i];
        const double empirical = static_cast<double>(path.arrivals.back()[i]) / T;
        CHECK(std::abs(empirical - lam) <= 3.0 * std::sqrt(lam / T));
    }
}

TEST_CASE("hand-built path violating the match identity is rejected") {
    const auto rates = make_rates({5, 7}, {1, 1}, {9, 9});
    auto path = simulate_path(rates, QueueState({0, 0}), 1.0, 5);
    REQUIRE(path.size() > 4);
    CHECK(match_count_identity_check(path));
    path.matches[3] += 1;  // perturb one counter
    CHECK_FALSE(match_count_identity_check(path));
}

TEST_CASE("thinned recording keeps initial and final snapshots") {
    const auto rates = make_rates({20, 20}, {1, 1}, {5, 5});
    SimulateOptions thin;
    thin.record_every = 0;
    const auto sparse = simulate_path(rates, QueueState({0, 0}), 2.0, 31, thin);
    const auto full = simulate_path(rates, QueueState({0, 0}), 2.0, 31);
    REQUIRE(sparse.size() == 2);
    CHECK(sparse.times.back() == full.times.back());
    CHECK(sparse.states.back() == full.states.back());
    CHECK(sparse.matches.back() == full.matches.back());
    CHECK(sparse.total_events == full.total_events);

    SimulateOptions every3;
    every3.record_every = 3;
    const auto third = simulate_path(rates, QueueState({0, 0}), 2.0, 31, every3);
    CHECK(third.size() < full.size());
    CHECK(third.states.back() == full.states.back());
    CHECK(flow_conservation_check(third));
}

TEST_CASE("run_replications is independent of the worker count") {
    const auto rates = make_rates({15, 10}, {1, 1}, {4, kUnboundedCount});
    const auto serial = run_replications(rates, QueueState({0, 0}), 1.5, 77, 64, 1);
    const auto parallel = run_replications(rates, QueueState({0, 0}), 1.5, 77, 64, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].counts == parallel[i].counts);
        CHECK(serial[i].matches == parallel[i].matches);
    }
}

TEST_CASE("CSV export has the documented header and row count") {
    const auto rates = make_rates({5, 7}, {1, 1}, {3, 3});
    const auto path = simulate_path(rates, QueueState({0, 0}), 1.0, 3);
    std::ostringstream out;
    write_path_csv(path, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,Q_1,Q_2,A_1,A_2,G_1,G_2,L_1,L_2,R");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == path.size());
}
