#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "matchsim/errors.hpp"

namespace matchsim {

/// Sentinel for an infinite (item-count) buffer.
inline constexpr std::int64_t kUnboundedCount =
    std::numeric_limits<std::int64_t>::max();

inline bool is_unbounded(std::int64_t buffer_count) {
    return buffer_count == kUnboundedCount;
}

/// All model constants of one pre-limit system and its heavy-traffic limit.
///
/// K classes, base rate lambda0, per-class drift offsets beta, abandonment
/// rates delta, limit buffers b (scaled coordinates, +inf allowed) and the
/// scale index n.
struct SystemParams {
    int K = 0;
    double lambda0 = 0.0;
    std::vector<double> beta;
    std::vector<double> delta;
    std::vector<double> buffer;  // scaled buffers b_i, +inf allowed
    std::int64_t scale = 1;      // n

    /// Throws Error with a descriptive message when any invariant fails.
    void validate() const;

    nlohmann::json to_json() const;
    static SystemParams from_json(const nlohmann::json& j);
};

/// Unscaled rates of the n-th system: arrival rates lambda_i^n, per-item
/// abandonment rates delta_i^n and integer buffer counts b_i^n.
struct PreLimitRates {
    std::vector<double> arrival_rate;
    std::vector<double> abandon_rate_per_item;
    std::vector<std::int64_t> buffer_count;  // kUnboundedCount for infinite

    int num_classes() const { return static_cast<int>(arrival_rate.size()); }
    void validate() const;
};

/// Realizes the heavy-traffic parameterization with exact equality:
/// lambda_i^n = lambda0*n + beta_i*sqrt(n), delta_i^n = delta_i,
/// b_i^n = round(b_i*sqrt(n)) clamped to >= 1.
///
/// Throws NegativeRateError if some lambda_i^n < 0 for the stored n.
PreLimitRates derive_prelimit_rates(const SystemParams& params);

/// Vector of unscaled integer queue lengths. Constructors enforce the
/// product-zero invariant (at least one empty queue) and nonnegativity;
/// the buffer bound is checked when buffer counts are supplied.
class QueueState {
  public:
    explicit QueueState(std::vector<std::int64_t> counts);
    QueueState(std::vector<std::int64_t> counts,
               const std::vector<std::int64_t>& buffer_count);

    const std::vector<std::int64_t>& counts() const { return counts_; }
    int num_classes() const { return static_cast<int>(counts_.size()); }
    std::int64_t operator[](int i) const { return counts_[static_cast<std::size_t>(i)]; }

    bool operator==(const QueueState& other) const { return counts_ == other.counts_; }
    bool operator<(const QueueState& other) const { return counts_ < other.counts_; }

    std::string to_string() const;

  private:
    std::vector<std::int64_t> counts_;
};

/// True iff counts are nonnegative, at least one is zero, and counts_i <=
/// buffer_count_i where buffers are finite (pass empty buffers to skip).
bool is_valid_state(const std::vector<std::int64_t>& counts,
                    const std::vector<std::int64_t>& buffer_count = {});

/// Diffusion scaling: counts_i / sqrt(n) componentwise.
std::vector<double> scale_state(const QueueState& state, std::int64_t n);
std::vector<double> scale_counts(const std::vector<std::int64_t>& counts, std::int64_t n);

}  // namespace matchsim
