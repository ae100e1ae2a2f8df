#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "matchsim/kernel.hpp"
#include "matchsim/model.hpp"

namespace matchsim {

/// Time-stamped event log of one chain trajectory with cumulative flow
/// counters. Index 0 is the initial condition at t = 0. All counters are
/// integer-exact; flow conservation
///   Q_i(k) = Q_i(0) + A_i(k) - L_i(k) - G_i(k) - R(k)
/// holds at every recorded index.
struct EventPath {
    std::vector<double> times;
    std::vector<std::vector<std::int64_t>> states;
    std::vector<std::vector<std::int64_t>> arrivals;  // cumulative A_i
    std::vector<std::vector<std::int64_t>> abandons;  // cumulative G_i
    std::vector<std::vector<std::int64_t>> blocks;    // cumulative L_i
    std::vector<std::int64_t> matches;                // cumulative R
    std::uint64_t seed = 0;
    std::string rng_name;
    std::uint64_t total_events = 0;  // independent of recording thinning

    std::size_t size() const { return times.size(); }
};

struct SimulateOptions {
    /// Record every k-th event (1 = every event). 0 records only the initial
    /// and final snapshots, for memory control at large n.
    std::uint64_t record_every = 1;
};

/// Gillespie simulation of the pre-limit matching system: one exponential at
/// the total rate, then a categorical over the transitions of
/// kernel::transitions_from. Deterministic given the seed.
EventPath simulate_path(const PreLimitRates& rates, const QueueState& initial,
                        double horizon, std::uint64_t seed,
                        const SimulateOptions& options = {});

/// R(k) == min_j (Q_j(0) + A_j(k) - L_j(k) - G_j(k)) at every recorded index.
bool match_count_identity_check(const EventPath& path);

/// Flow conservation at every recorded index (integer-exact).
bool flow_conservation_check(const EventPath& path);

/// Terminal snapshot of one replication, for Monte-Carlo fan-out without
/// path storage.
struct TerminalSample {
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> arrivals;
    std::vector<std::int64_t> blocks;
    std::vector<std::int64_t> abandons;
    std::int64_t matches = 0;
};

/// Runs `replications` independent paths on `threads` workers with one RNG
/// stream per replication index; output order is by index, independent of
/// the worker count.
std::vector<TerminalSample> run_replications(const PreLimitRates& rates,
                                             const QueueState& initial,
                                             double horizon, std::uint64_t seed,
                                             std::size_t replications,
                                             unsigned threads = 1);

/// CSV export: t, Q_1..Q_K, A_1..A_K, G_1..G_K, L_1..L_K, R.
void write_path_csv(const EventPath& path, std::ostream& out);

}  // namespace matchsim
