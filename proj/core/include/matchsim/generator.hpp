#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matchsim/kernel.hpp"
#include "matchsim/model.hpp"

namespace matchsim {

/// Smooth scalar field on scaled states with analytic gradient and Hessian.
/// An empty support box means the function is not compactly supported.
struct TestFunction {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
    std::vector<double> support_lo;  // empty = unbounded
    std::vector<double> support_hi;

    bool compact_support() const { return !support_lo.empty(); }
};

/// Built-in library: constant, coordinate difference s1 - s2, squared
/// difference, a C^2 difference-coordinate bump, and a C^2 product bump.
/// The first four satisfy the gradient-sum condition for K = 2.
std::vector<TestFunction> test_function_library(int K, double bump_width = 1.0);

/// C^2 bump g(s_1 - s_2) with g(u) = (1 - (u/w)^2)^3 on |u| < w; the
/// gradient-sum is identically zero for every K.
TestFunction difference_bump(int K, double width);

/// Negative control: f(s) = s_1^2, which violates the gradient-sum condition.
TestFunction first_coordinate_squared(int K);

/// Discrete generator applied to f at an unscaled state:
///   sum over transitions of rate * (f(scaled target) - f(scaled source)).
/// Blocked arrivals contribute zero.
double apply_An(const TestFunction& f, const QueueState& state,
                const PreLimitRates& rates, std::int64_t n);

/// State-dependent diffusion matrix of the limiting generator:
///   a_mm = lambda0 * (1[prod_{j!=m} s_j = 0] + K - 1
///                     - sum_{k!=m} 1[prod_{j!=k} s_j = 0])
///   a_mn = 2*lambda0 * (K - 2 - sum_{k!=m,n} 1[prod_{j!=k} s_j = 0])
/// Throws OffManifoldError when no coordinate is zero.
Eigen::MatrixXd diffusion_matrix(const Eigen::VectorXd& scaled_state,
                                 double lambda0);

/// Limiting generator in compact form:
///   A f = 1/2 sum_{m,n} a_mn d^2 f / ds_m ds_n
///         + sum_m (beta_m - delta_m s_m) df/ds_m.
double apply_A(const TestFunction& f, const Eigen::VectorXd& scaled_state,
               const SystemParams& params);

struct RegulatedReport {
    double max_gradient_sum = 0.0;      // max |sum_i df/ds_i| over samples
    double max_boundary_partial = 0.0;  // max |df/ds_i| over boundary samples
    std::size_t boundary_samples = 0;
    bool pass = false;                  // both maxima <= 1e-8
};

/// Checks the regulated conditions over the given scaled-state samples;
/// boundary samples are those with some coordinate within 1e-9 of a finite
/// buffer.
RegulatedReport check_regulated(const TestFunction& f,
                                const std::vector<Eigen::VectorXd>& samples,
                                const std::vector<double>& buffers);

struct SweepRow {
    std::int64_t n = 0;
    double sup_error = 0.0;
    std::vector<std::int64_t> argmax_state;  // unscaled counts
};

/// Axis-aligned box of scaled states, closed on both ends.
struct StateWindow {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// For each n, sup over interior product-zero lattice states in the window
/// of |apply_An(f) - apply_A(f)|. "Interior" means counts_i < b_i^n for all
/// i. Throws EmptyWindowError when no state qualifies for some n.
std::vector<SweepRow> convergence_sweep(const TestFunction& f,
                                        const SystemParams& params,
                                        const std::vector<std::int64_t>& n_grid,
                                        const StateWindow& window);

/// All product-zero lattice states (unscaled counts) inside the window for
/// scale n, interior to the buffers. Exposed for tests.
std::vector<QueueState> window_lattice_states(const SystemParams& params,
                                              std::int64_t n,
                                              const StateWindow& window);

}  // namespace matchsim
