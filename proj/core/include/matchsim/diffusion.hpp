#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "matchsim/model.hpp"

namespace matchsim {

/// Symmetric PSD square root via spectral decomposition; negative eigenvalues
/// are clamped to zero and eigenvector signs fixed (largest-magnitude entry
/// positive) so the output is deterministic.
/// Throws NotPsdError if the minimum eigenvalue is below -1e-8.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& a);

struct ReflectedPath {
    std::vector<double> values;           // regulated path
    std::vector<double> lower_local_time; // nondecreasing, starts at 0
    std::vector<double> upper_local_time;
};

/// Two-sided Skorokhod map applied to a grid-sampled piecewise-linear path.
/// Decomposition identity: output = input + lower - upper pointwise.
ReflectedPath skorokhod_two_sided(const std::vector<double>& input,
                                  double lower, double upper);

/// One-dimensional regulated path of the K = 2 double-ended limit.
struct DoubleEndedPath {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> lower_local_time;  // at -b2
    std::vector<double> upper_local_time;  // at b1
    std::uint64_t seed = 0;
};

/// Euler-Maruyama for X(t) = x0 + sigma*B_t + int (beta - h(X)) ds - U_t with
/// h(x) = delta1*x^+ - delta2*x^- and band [-b2, b1]; each step is projected
/// onto the band with local-time accounting. params must have K = 2.
DoubleEndedPath simulate_double_ended(const SystemParams& params, double sigma,
                                      double x0, double T, double dt,
                                      std::uint64_t seed);

/// Time grid, limit states X, local times U at the buffers, and the
/// matching functional R of one K-dimensional regulated limit path.
struct DiffusionPath {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> X;
    std::vector<Eigen::VectorXd> U;        // nondecreasing per class
    std::vector<double> R;                 // matching functional (semimartingale)
    std::vector<Eigen::VectorXd> W;        // driving Brownian increments, summed
    std::uint64_t seed = 0;
};

/// Euler scheme for the regulated coupling integral equation with per-class
/// independent drivers of variance lambda0. Each step accrues net inflow
/// N_i += (beta_i - delta_i X_i) dt + sqrt(lambda0) dW_i, then sets
/// R = min_i (N_i - U_i) and X_i = N_i - U_i - R, then absorbs any buffer
/// overshoot into U_i. Post-step states satisfy min_i X_i = 0 and
/// X_i in [0, b_i]; U_i is nondecreasing.
DiffusionPath simulate_limit_K(const SystemParams& params,
                               const Eigen::VectorXd& x0, double T, double dt,
                               std::uint64_t seed);

/// CSV export: t, X_1..X_K, U_1..U_K, R.
void write_diffusion_csv(const DiffusionPath& path, std::ostream& out);

}  // namespace matchsim
