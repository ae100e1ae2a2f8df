#include "matchsim/ctmc.hpp"

#include <algorithm>
#include <ostream>
#include <thread>

#include "matchsim/rng.hpp"

namespace matchsim {

namespace {

struct Counters {
    std::vector<std::int64_t> counts, arrivals, abandons, blocks;
    std::int64_t matches = 0;
};

void record(EventPath& path, double t, const Counters& c) {
    path.times.push_back(t);
    path.states.push_back(c.counts);
    path.arrivals.push_back(c.arrivals);
    path.abandons.push_back(c.abandons);
    path.blocks.push_back(c.blocks);
    path.matches.push_back(c.matches);
}

// Shared event loop; `record_fn` decides what is kept.
template <typename RecordFn>
void run_chain(const PreLimitRates& rates, const QueueState& initial, double horizon,
               std::mt19937_64& rng, Counters& c, std::uint64_t& events,
               RecordFn&& record_fn) {
    const int K = rates.num_classes();
    const auto uK = static_cast<std::size_t>(K);
    c.counts = initial.counts();
    c.arrivals.assign(uK, 0);
    c.abandons.assign(uK, 0);
    c.blocks.assign(uK, 0);
    c.matches = 0;

    double lambda_total = 0.0;
    for (double lam : rates.arrival_rate) lambda_total += lam;

    double t = 0.0;
    events = 0;
    while (true) {
        double total = lambda_total;
        for (std::size_t i = 0; i < uK; ++i)
            total += rates.abandon_rate_per_item[i] * static_cast<double>(c.counts[i]);
        if (total <= 0.0) break;
        t += exponential(rng, total);
        if (t > horizon) break;
        ++events;

        double u = uniform_open(rng) * total;
        int cls = -1;
        bool arrival = true;
        for (std::size_t i = 0; i < uK; ++i) {
            if (u < rates.arrival_rate[i]) { cls = static_cast<int>(i); break; }
            u -= rates.arrival_rate[i];
        }
        if (cls < 0) {
            arrival = false;
            for (std::size_t i = 0; i < uK; ++i) {
                const double r = rates.abandon_rate_per_item[i] * static_cast<double>(c.counts[i]);
                if (u < r) { cls = static_cast<int>(i); break; }
                u -= r;
            }
            if (cls < 0) cls = K - 1;  // top up against roundoff
        }

        const auto idx = static_cast<std::size_t>(cls);
        if (arrival) {
            ++c.arrivals[idx];
            int zero_count = 0;
            for (std::int64_t q : c.counts) zero_count += (q == 0);
            const bool others_nonempty = (zero_count == 1 && c.counts[idx] == 0);
            if (others_nonempty) {
                for (std::size_t j = 0; j < uK; ++j)
                    if (j != idx) --c.counts[j];
                ++c.matches;
            } else if (is_unbounded(rates.buffer_count[idx]) ||
                       c.counts[idx] < rates.buffer_count[idx]) {
                ++c.counts[idx];
            } else {
                ++c.blocks[idx];
            }
        } else {
            ++c.abandons[idx];
            --c.counts[idx];
        }
        record_fn(t, events);
    }
}

}  // namespace

EventPath simulate_path(const PreLimitRates& rates, const QueueState& initial,
                        double horizon, std::uint64_t seed,
                        const SimulateOptions& options) {
    rates.validate();
    if (!is_valid_state(initial.counts(), rates.buffer_count))
        throw InvalidStateError("initial state violates the buffer bounds");
    if (horizon < 0.0) throw Error("horizon must be >= 0");

    EventPath path;
    path.seed = seed;
    path.rng_name = kRngName;
    auto rng = make_stream(seed, 0);

    Counters c;
    c.counts = initial.counts();
    const auto uK = initial.counts().size();
    c.arrivals.assign(uK, 0);
    c.abandons.assign(uK, 0);
    c.blocks.assign(uK, 0);
    record(path, 0.0, c);

    double last_t = 0.0;
    run_chain(rates, initial, horizon, rng, c, path.total_events,
              [&](double t, std::uint64_t events) {
                  last_t = t;
                  if (options.record_every > 0 && events % options.record_every == 0)
                      record(path, t, c);
              });
    // Keep the final snapshot when thinning dropped it.
    if (path.times.back() != last_t && path.total_events > 0) record(path, last_t, c);
    return path;
}

bool match_count_identity_check(const EventPath& path) {
    if (path.states.empty()) return false;
    const auto& initial = path.states.front();
    for (std::size_t k = 0; k < path.size(); ++k) {
        std::int64_t min_netflow = std::numeric_limits<std::int64_t>::max();
        for (std::size_t i = 0; i < initial.size(); ++i) {
            const std::int64_t net = initial[i] + path.arrivals[k][i] -
                                     path.blocks[k][i] - path.abandons[k][i];
            min_netflow = std::min(min_netflow, net);
        }
        if (path.matches[k] != min_netflow) return false;
    }
    return true;
}

bool flow_conservation_check(const EventPath& path) {
    if (path.states.empty()) return false;
    const auto& initial = path.states.front();
    for (std::size_t k = 0; k < path.size(); ++k)
        for (std::size_t i = 0; i < initial.size(); ++i)
            if (path.states[k][i] != initial[i] + path.arrivals[k][i] -
                                         path.blocks[k][i] - path.abandons[k][i] -
                                         path.matches[k])
                return false;
    return true;
}

std::vector<TerminalSample> run_replications(const PreLimitRates& rates,
                                             const QueueState& initial,
                                             double horizon, std::uint64_t seed,
                                             std::size_t replications,
                                             unsigned threads) {
    rates.validate();
    std::vector<TerminalSample> out(replications);
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
            auto rng = make_stream(seed, rep);
            Counters c;
            std::uint64_t events = 0;
            run_chain(rates, initial, horizon, rng, c, events, [](double, std::uint64_t) {});
            out[rep] = TerminalSample{c.counts, c.arrivals, c.blocks, c.abandons, c.matches};
        }
    };
    if (threads <= 1 || replications < 2) {
        worker(0, replications);
    } else {
        const unsigned t = std::min<unsigned>(threads, std::thread::hardware_concurrency());
        std::vector<std::thread> pool;
        const std::size_t chunk = (replications + t - 1) / t;
        for (unsigned w = 0; w < t; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(replications, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

void write_path_csv(const EventPath& path, std::ostream& out) {
    const std::size_t K = path.states.empty() ? 0 : path.states.front().size();
    out << "t";
    for (std::size_t i = 1; i <= K; ++i) out << ",Q_" << i;
    for (std::size_t i = 1; i <= K; ++i) out << ",A_" << i;
    for (std::size_t i = 1; i <= K; ++i) out << ",G_" << i;
    for (std::size_t i = 1; i <= K; ++i) out << ",L_" << i;
    out << ",R\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        out << path.times[k];
        for (std::size_t i = 0; i < K; ++i) out << ',' << path.states[k][i];
        for (std::size_t i = 0; i < K; ++i) out << ',' << path.arrivals[k][i];
        for (std::size_t i = 0; i < K; ++i) out << ',' << path.abandons[k][i];
        for (std::size_t i = 0; i < K; ++i) out << ',' << path.blocks[k][i];
        out << ',' << path.matches[k] << '\n';
    }
}

}  // namespace matchsim
