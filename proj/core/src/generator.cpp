#include "matchsim/generator.hpp"

#include <cmath>

namespace matchsim {

namespace {

// C^2 bump g(u) = (1 - (u/w)^2)^3 on |u| < w, zero outside.
struct Bump {
    double w;
    double value(double u) const {
        const double z = u / w;
        if (std::abs(z) >= 1.0) return 0.0;
        const double q = 1.0 - z * z;
        return q * q * q;
    }
    double d1(double u) const {
        const double z = u / w;
        if (std::abs(z) >= 1.0) return 0.0;
        const double q = 1.0 - z * z;
        return -6.0 * z * q * q / w;
    }
    double d2(double u) const {
        const double z = u / w;
        if (std::abs(z) >= 1.0) return 0.0;
        const double q = 1.0 - z * z;
        return (-6.0 * q * q + 24.0 * z * z * q) / (w * w);
    }
};

Eigen::VectorXd basis_diff(int K) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(K);
    d(0) = 1.0;
    d(1) = -1.0;
    return d;
}

}  // namespace

TestFunction difference_bump(int K, double width) {
    const Eigen::VectorXd d = basis_diff(K);
    const Bump g{width};
    TestFunction f;
    f.name = "difference-bump";
    f.value = [d, g](const Eigen::VectorXd& s) { return g.value(d.dot(s)); };
    f.gradient = [d, g](const Eigen::VectorXd& s) -> Eigen::VectorXd {
        return g.d1(d.dot(s)) * d;
    };
    f.hessian = [d, g](const Eigen::VectorXd& s) -> Eigen::MatrixXd {
        return g.d2(d.dot(s)) * (d * d.transpose());
    };
    f.support_lo.assign(static_cast<std::size_t>(K), -width);
    f.support_hi.assign(static_cast<std::size_t>(K), width);
    return f;
}

TestFunction first_coordinate_squared(int K) {
    TestFunction f;
    f.name = "s1-squared";
    f.value = [](const Eigen::VectorXd& s) { return s(0) * s(0); };
    f.gradient = [K](const Eigen::VectorXd& s) -> Eigen::VectorXd {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(K);
        g(0) = 2.0 * s(0);
        return g;
    };
    f.hessian = [K](const Eigen::VectorXd&) -> Eigen::MatrixXd {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(K, K);
        h(0, 0) = 2.0;
        return h;
    };
    return f;
}

std::vector<TestFunction> test_function_library(int K, double bump_width) {
    std::vector<TestFunction> lib;

    TestFunction constant;
    constant.name = "constant";
    constant.value = [](const Eigen::VectorXd&) { return 1.0; };
    constant.gradient = [K](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(K); };
    constant.hessian = [K](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(K, K); };
    lib.push_back(std::move(constant));

    const Eigen::VectorXd d = basis_diff(K);
    TestFunction diff;
    diff.name = "difference";
    diff.value = [d](const Eigen::VectorXd& s) { return d.dot(s); };
    diff.gradient = [d](const Eigen::VectorXd&) -> Eigen::VectorXd { return d; };
    diff.hessian = [K](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(K, K); };
    lib.push_back(std::move(diff));

    TestFunction diff_sq;
    diff_sq.name = "difference-squared";
    diff_sq.value = [d](const Eigen::VectorXd& s) { const double u = d.dot(s); return u * u; };
    diff_sq.gradient = [d](const Eigen::VectorXd& s) -> Eigen::VectorXd {
        return 2.0 * d.dot(s) * d;
    };
    diff_sq.hessian = [d](const Eigen::VectorXd&) -> Eigen::MatrixXd {
        return 2.0 * (d * d.transpose());
    };
    lib.push_back(std::move(diff_sq));

    lib.push_back(difference_bump(K, bump_width));

    // Product of per-coordinate bumps; compactly supported but not regulated.
    const Bump g{bump_width};
    TestFunction prod;
    prod.name = "product-bump";
    prod.value = [g](const Eigen::VectorXd& s) {
        double v = 1.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) v *= g.value(s(i));
        return v;
    };
    prod.gradient = [g](const Eigen::VectorXd& s) -> Eigen::VectorXd {
        Eigen::VectorXd grad(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            double v = g.d1(s(i));
            for (Eigen::Index j = 0; j < s.size(); ++j)
                if (j != i) v *= g.value(s(j));
            grad(i) = v;
        }
        return grad;
    };
    prod.hessian = [g](const Eigen::VectorXd& s) -> Eigen::MatrixXd {
        const auto K2 = s.size();
        Eigen::MatrixXd h(K2, K2);
        for (Eigen::Index i = 0; i < K2; ++i) {
            for (Eigen::Index j = 0; j < K2; ++j) {
                double v = (i == j) ? g.d2(s(i)) : g.d1(s(i)) * g.d1(s(j));
                for (Eigen::Index k = 0; k < K2; ++k)
                    if (k != i && k != j) v *= g.value(s(k));
                h(i, j) = v;
            }
        }
        return h;
    };
    prod.support_lo.assign(static_cast<std::size_t>(K), -bump_width);
    prod.support_hi.assign(static_cast<std::size_t>(K), bump_width);
    lib.push_back(std::move(prod));

    return lib;
}

double apply_An(const TestFunction& f, const QueueState& state,
                const PreLimitRates& rates, std::int64_t n) {
    const auto scaled_src = scale_state(state, n);
    const Eigen::VectorXd src =
        Eigen::Map<const Eigen::VectorXd>(scaled_src.data(),
                                          static_cast<Eigen::Index>(scaled_src.size()));
    const double f_src = f.value(src);
    double sum = 0.0;
    for (const Transition& tr : transitions_from(state, rates)) {
        if (tr.kind == TransitionKind::ArrivalBlocked) continue;
        const auto scaled_tgt = scale_counts(tr.target, n);
        const Eigen::VectorXd tgt =
            Eigen::Map<const Eigen::VectorXd>(scaled_tgt.data(),
                                              static_cast<Eigen::Index>(scaled_tgt.size()));
        sum += tr.rate * (f.value(tgt) - f_src);
    }
    return sum;
}

Eigen::MatrixXd diffusion_matrix(const Eigen::VectorXd& scaled_state, double lambda0) {
    const auto K = scaled_state.size();
    // 1[prod_{j != k} s_j = 0] for each k.
    std::vector<int> indicator(static_cast<std::size_t>(K), 0);
    bool on_manifold = false;
    for (Eigen::Index k = 0; k < K; ++k) {
        bool zero = false;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k && scaled_state(j) == 0.0) { zero = true; break; }
        indicator[static_cast<std::size_t>(k)] = zero ? 1 : 0;
        if (scaled_state(k) == 0.0) on_manifold = true;
    }
    if (!on_manifold)
        throw OffManifoldError("diffusion matrix requires a product-zero state");

    Eigen::MatrixXd a(K, K);
    for (Eigen::Index m = 0; m < K; ++m) {
        int sum_others = 0;
        for (Eigen::Index k = 0; k < K; ++k)
            if (k != m) sum_others += indicator[static_cast<std::size_t>(k)];
        a(m, m) = lambda0 * (indicator[static_cast<std::size_t>(m)] +
                             static_cast<double>(K - 1) - sum_others);
        for (Eigen::Index c = m + 1; c < K; ++c) {
            int sum_rest = 0;
            for (Eigen::Index k = 0; k < K; ++k)
                if (k != m && k != c) sum_rest += indicator[static_cast<std::size_t>(k)];
            const double off = 2.0 * lambda0 * (static_cast<double>(K - 2) - sum_rest);
            a(m, c) = off;
            a(c, m) = off;
        }
    }
    return a;
}

double apply_A(const TestFunction& f, const Eigen::VectorXd& scaled_state,
               const SystemParams& params) {
    if (scaled_state.minCoeff() > 1e-12)
        throw OffManifoldError("state is off the product-zero manifold");
    const Eigen::MatrixXd a = diffusion_matrix(scaled_state, params.lambda0);
    const Eigen::MatrixXd h = f.hessian(scaled_state);
    const Eigen::VectorXd g = f.gradient(scaled_state);
    double out = 0.5 * (a.array() * h.array()).sum();
    for (Eigen::Index m = 0; m < scaled_state.size(); ++m) {
        const auto idx = static_cast<std::size_t>(m);
        out += (params.beta[idx] - params.delta[idx] * scaled_state(m)) * g(m);
    }
    return out;
}

RegulatedReport check_regulated(const TestFunction& f,
                                const std::vector<Eigen::VectorXd>& samples,
                                const std::vector<double>& buffers) {
    RegulatedReport report;
    for (const auto& s : samples) {
        const Eigen::VectorXd g = f.gradient(s);
        report.max_gradient_sum = std::max(report.max_gradient_sum, std::abs(g.sum()));
        bool boundary = false;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double b = buffers[static_cast<std::size_t>(i)];
            if (std::isfinite(b) && std::abs(s(i) - b) <= 1e-9) { boundary = true; break; }
        }
        if (boundary) {
            ++report.boundary_samples;
            report.max_boundary_partial =
                std::max(report.max_boundary_partial, g.cwiseAbs().maxCoeff());
        }
    }
    report.pass = report.max_gradient_sum <= 1e-8 && report.max_boundary_partial <= 1e-8;
    return report;
}

std::vector<QueueState> window_lattice_states(const SystemParams& params,
                                              std::int64_t n,
                                              const StateWindow& window) {
    const int K = params.K;
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    SystemParams local = params;
    local.scale = n;
    const PreLimitRates rates = derive_prelimit_rates(local);

    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (int i = 0; i < K; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double lo = window.lo.empty() ? 0.0 : window.lo[idx];
        const double hi = window.hi[idx];
        auto k_lo = static_cast<std::int64_t>(std::ceil(lo * sqrt_n - 1e-9));
        auto k_hi = static_cast<std::int64_t>(std::floor(hi * sqrt_n + 1e-9));
        k_lo = std::max<std::int64_t>(k_lo, 0);
        if (!is_unbounded(rates.buffer_count[idx]))
            k_hi = std::min(k_hi, rates.buffer_count[idx] - 1);  // interior only
        ranges.emplace_back(k_lo, k_hi);
    }

    std::vector<QueueState> states;
    std::vector<std::int64_t> current(static_cast<std::size_t>(K), 0);
    auto recurse = [&](auto&& self, int level) -> void {
        if (level == K) {
            if (is_valid_state(current)) states.emplace_back(current);
            return;
        }
        const auto idx = static_cast<std::size_t>(level);
        for (std::int64_t v = ranges[idx].first; v <= ranges[idx].second; ++v) {
            current[idx] = v;
            self(self, level + 1);
        }
    };
    recurse(recurse, 0);
    return states;
}

std::vector<SweepRow> convergence_sweep(const TestFunction& f,
                                        const SystemParams& params,
                                        const std::vector<std::int64_t>& n_grid,
                                        const StateWindow& window) {
    std::vector<SweepRow> table;
    for (std::int64_t n : n_grid) {
        SystemParams local = params;
        local.scale = n;
        const PreLimitRates rates = derive_prelimit_rates(local);
        const auto states = window_lattice_states(params, n, window);
        if (states.empty())
            throw EmptyWindowError("no interior manifold states in the window for n = " +
                                   std::to_string(n));
        SweepRow row;
        row.n = n;
        for (const auto& state : states) {
            const auto scaled = scale_state(state, n);
            const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(
                scaled.data(), static_cast<Eigen::Index>(scaled.size()));
            const double err = std::abs(apply_An(f, state, rates, n) - apply_A(f, s, local));
            if (err > row.sup_error) {
                row.sup_error = err;
                row.argmax_state = state.counts();
            }
        }
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace matchsim
