#include "matchsim/kernel.hpp"

#include <ostream>

namespace matchsim {

const char* to_string(TransitionKind kind) {
    switch (kind) {
        case TransitionKind::ArrivalAdmitted: return "arrival-admitted";
        case TransitionKind::ArrivalMatched: return "arrival-matched";
        case TransitionKind::ArrivalBlocked: return "arrival-blocked";
        case TransitionKind::Abandonment: return "abandonment";
    }
    return "?";
}

std::vector<Transition> transitions_from(const QueueState& state,
                                         const PreLimitRates& rates) {
    const auto& counts = state.counts();
    const int K = state.num_classes();
    if (K != rates.num_classes())
        throw InvalidStateError("state dimension does not match rates");
    if (!is_valid_state(counts, rates.buffer_count))
        throw InvalidStateError("invalid source state " + state.to_string());

    std::vector<Transition> out;
    out.reserve(static_cast<std::size_t>(2 * K));

    int zero_count = 0;
    for (std::int64_t c : counts) zero_count += (c == 0);

    for (int i = 0; i < K; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double lam = rates.arrival_rate[idx];
        if (lam <= 0.0) continue;
        // Every other queue nonempty <=> the only zero coordinate is i.
        const bool others_nonempty = (zero_count == 1 && counts[idx] == 0);
        Transition tr;
        tr.rate = lam;
        tr.class_index = i;
        if (others_nonempty) {
            tr.kind = TransitionKind::ArrivalMatched;
            tr.target = counts;
            for (int j = 0; j < K; ++j)
                if (j != i) --tr.target[static_cast<std::size_t>(j)];
        } else if (is_unbounded(rates.buffer_count[idx]) ||
                   counts[idx] < rates.buffer_count[idx]) {
            tr.kind = TransitionKind::ArrivalAdmitted;
            tr.target = counts;
            ++tr.target[idx];
        } else {
            tr.kind = TransitionKind::ArrivalBlocked;
            tr.target = counts;  // self-loop
        }
        out.push_back(std::move(tr));
    }
    for (int i = 0; i < K; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (counts[idx] == 0) continue;
        Transition tr;
        tr.kind = TransitionKind::Abandonment;
        tr.class_index = i;
        tr.rate = rates.abandon_rate_per_item[idx] * static_cast<double>(counts[idx]);
        tr.target = counts;
        --tr.target[idx];
        out.push_back(std::move(tr));
    }
    return out;
}

std::vector<QueueState> enumerate_states(const PreLimitRates& rates) {
    const int K = rates.num_classes();
    for (std::int64_t b : rates.buffer_count)
        if (is_unbounded(b))
            throw UnboundedError("enumerate_states requires finite buffers");

    std::vector<QueueState> states;
    std::vector<std::int64_t> current(static_cast<std::size_t>(K), 0);
    // Lexicographic depth-first walk over the buffer box, keeping states
    // with at least one zero coordinate.
    auto recurse = [&](auto&& self, int level) -> void {
        if (level == K) {
            if (is_valid_state(current)) states.emplace_back(current);
            return;
        }
        const auto idx = static_cast<std::size_t>(level);
        for (std::int64_t v = 0; v <= rates.buffer_count[idx]; ++v) {
            current[idx] = v;
            self(self, level + 1);
        }
        current[idx] = 0;
    };
    recurse(recurse, 0);
    return states;
}

std::size_t GeneratorMatrix::index_of(const QueueState& state) const {
    auto it = index_.find(state.counts());
    if (it == index_.end())
        throw InvalidStateError("state not in enumerated space: " + state.to_string());
    return it->second;
}

GeneratorMatrix build_generator_matrix(const PreLimitRates& rates,
                                       std::size_t max_states) {
    GeneratorMatrix gen;
    gen.states = enumerate_states(rates);
    if (gen.states.size() > max_states)
        throw TooLargeError("state space exceeds the configured cap");
    for (std::size_t i = 0; i < gen.states.size(); ++i)
        gen.index_.emplace(gen.states[i].counts(), i);

    const auto dim = static_cast<Eigen::Index>(gen.states.size());
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t row = 0; row < gen.states.size(); ++row) {
        double diag = 0.0;
        for (const Transition& tr : transitions_from(gen.states[row], rates)) {
            if (tr.kind == TransitionKind::ArrivalBlocked) continue;
            const auto col = gen.index_.at(tr.target);
            triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), tr.rate);
            diag -= tr.rate;
        }
        triplets.emplace_back(static_cast<int>(row), static_cast<int>(row), diag);
    }
    gen.matrix.resize(dim, dim);
    gen.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return gen;
}

void write_coordinate_format(const GeneratorMatrix& gen, std::ostream& out) {
    out << "# row col value\n";
    for (int k = 0; k < gen.matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.matrix, k);
             it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace matchsim
