#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include <Eigen/SparseCore>

#include "matchsim/model.hpp"

namespace matchsim {

enum class TransitionKind {
    ArrivalAdmitted,
    ArrivalMatched,
    ArrivalBlocked,  // self-loop, counted for L but dynamically vacuous
    Abandonment,
};

const char* to_string(TransitionKind kind);

struct Transition {
    std::vector<std::int64_t> target;
    double rate = 0.0;
    TransitionKind kind = TransitionKind::ArrivalAdmitted;
    int class_index = 0;
};

/// All transitions out of `state` under one unified rule: a class-i arrival
/// matches iff every other queue is nonempty, is admitted iff below its
/// buffer, and is blocked otherwise (self-loop). Each class i with a
/// positive count additionally abandons at rate delta_i^n * Q_i.
std::vector<Transition> transitions_from(const QueueState& state,
                                         const PreLimitRates& rates);

/// Every state with 0 <= counts_i <= b_i^n and at least one zero coordinate,
/// in lexicographic order. Throws UnboundedError if any buffer is infinite.
std::vector<QueueState> enumerate_states(const PreLimitRates& rates);

/// Explicit generator matrix of the pre-limit chain on the enumerated state
/// space. Row convention: entry (s, s') is the rate from s to s', diagonal
/// is minus the row sum. Blocked arrivals contribute nothing.
struct GeneratorMatrix {
    std::vector<QueueState> states;  // lexicographic, defines the index
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;

    std::size_t index_of(const QueueState& state) const;

  private:
    friend GeneratorMatrix build_generator_matrix(const PreLimitRates&, std::size_t);
    std::map<std::vector<std::int64_t>, std::size_t> index_;
};

GeneratorMatrix build_generator_matrix(const PreLimitRates& rates,
                                       std::size_t max_states = 1'000'000);

/// Coordinate-format sparse text export: one "row col value" line per entry.
void write_coordinate_format(const GeneratorMatrix& gen, std::ostream& out);

}  // namespace matchsim
