#include "matchsim/model.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace matchsim {

void SystemParams::validate() const {
    if (K < 2) throw Error("K must be >= 2");
    if (!(lambda0 > 0.0)) throw Error("lambda0 must be > 0");
    const auto k = static_cast<std::size_t>(K);
    if (beta.size() != k) throw Error("beta length must equal K");
    if (delta.size() != k) throw Error("delta length must equal K");
    if (buffer.size() != k) throw Error("buffer length must equal K");
    for (double d : delta)
        if (!(d > 0.0)) throw Error("delta entries must be > 0");
    for (double b : buffer)
        if (!(b > 0.0)) throw Error("buffer entries must be > 0 (inf allowed)");
    if (scale < 1) throw Error("scale n must be >= 1");
}

nlohmann::json SystemParams::to_json() const {
    nlohmann::json j;
    j["K"] = K;
    j["lambda0"] = lambda0;
    j["beta"] = beta;
    j["delta"] = delta;
    auto& buf = j["buffer"] = nlohmann::json::array();
    for (double b : buffer) {
        if (std::isinf(b))
            buf.push_back("inf");
        else
            buf.push_back(b);
    }
    j["n"] = scale;
    return j;
}

SystemParams SystemParams::from_json(const nlohmann::json& j) {
    SystemParams p;
    p.K = j.at("K").get<int>();
    p.lambda0 = j.at("lambda0").get<double>();
    p.beta = j.at("beta").get<std::vector<double>>();
    p.delta = j.at("delta").get<std::vector<double>>();
    for (const auto& b : j.at("buffer")) {
        if (b.is_string()) {
            if (b.get<std::string>() != "inf")
                throw Error("buffer entries must be numbers or \"inf\"");
            p.buffer.push_back(std::numeric_limits<double>::infinity());
        } else {
            p.buffer.push_back(b.get<double>());
        }
    }
    p.scale = j.at("n").get<std::int64_t>();
    p.validate();
    return p;
}

void PreLimitRates::validate() const {
    const std::size_t k = arrival_rate.size();
    if (k < 2 || abandon_rate_per_item.size() != k || buffer_count.size() != k)
        throw Error("rate vectors must share length K >= 2");
    for (double r : arrival_rate)
        if (!(r >= 0.0)) throw NegativeRateError("arrival rate must be >= 0");
    for (double d : abandon_rate_per_item)
        if (!(d > 0.0)) throw Error("abandonment rate must be > 0");
    for (std::int64_t b : buffer_count)
        if (b < 1) throw Error("buffer count must be >= 1 (or unbounded)");
}

PreLimitRates derive_prelimit_rates(const SystemParams& params) {
    params.validate();
    const double n = static_cast<double>(params.scale);
    const double sqrt_n = std::sqrt(n);
    PreLimitRates rates;
    for (int i = 0; i < params.K; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double lam = params.lambda0 * n + params.beta[idx] * sqrt_n;
        if (lam < 0.0) {
            std::ostringstream msg;
            msg << "lambda_" << i + 1 << "^n = " << lam << " < 0 for n = " << params.scale;
            throw NegativeRateError(msg.str());
        }
        rates.arrival_rate.push_back(lam);
        rates.abandon_rate_per_item.push_back(params.delta[idx]);
        if (std::isinf(params.buffer[idx])) {
            rates.buffer_count.push_back(kUnboundedCount);
        } else {
            const auto b = static_cast<std::int64_t>(std::llround(params.buffer[idx] * sqrt_n));
            rates.buffer_count.push_back(std::max<std::int64_t>(b, 1));
        }
    }
    return rates;
}

bool is_valid_state(const std::vector<std::int64_t>& counts,
                    const std::vector<std::int64_t>& buffer_count) {
    if (counts.empty()) return false;
    bool has_zero = false;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) return false;
        if (counts[i] == 0) has_zero = true;
        if (!buffer_count.empty() && !is_unbounded(buffer_count[i]) &&
            counts[i] > buffer_count[i])
            return false;
    }
    return has_zero;
}

QueueState::QueueState(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
    if (!is_valid_state(counts_))
        throw InvalidStateError("queue state violates the product-zero or sign invariant: " +
                                to_string());
}

QueueState::QueueState(std::vector<std::int64_t> counts,
                       const std::vector<std::int64_t>& buffer_count)
    : counts_(std::move(counts)) {
    if (!is_valid_state(counts_, buffer_count))
        throw InvalidStateError("queue state violates an invariant: " + to_string());
}

std::string QueueState::to_string() const {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (i) out << ',';
        out << counts_[i];
    }
    out << ')';
    return out.str();
}

std::vector<double> scale_counts(const std::vector<std::int64_t>& counts, std::int64_t n) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> scaled(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        scaled[i] = static_cast<double>(counts[i]) * inv;
    return scaled;
}

std::vector<double> scale_state(const QueueState& state, std::int64_t n) {
    if (n < 1) throw Error("scale n must be >= 1");
    return scale_counts(state.counts(), n);
}

}  // namespace matchsim
