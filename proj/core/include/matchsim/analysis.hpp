#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "matchsim/errors.hpp"

namespace matchsim {

struct Sample {
    std::vector<double> values;
    std::string label;
};

/// Exact two-sample Kolmogorov-Smirnov distance on pooled order statistics.
double ks_distance(const Sample& a, const Sample& b);

/// One-sample KS distance against a CDF evaluated at the sample points.
double ks_distance_to_cdf(const Sample& a,
                          const std::function<double(double)>& cdf);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;   // unbiased
    double sem = 0.0;        // standard error of the mean
    std::size_t count = 0;
};

Moments moments(const Sample& a);

/// Transient distribution p(t) = p(0) exp(Qt) by uniformization with an
/// explicit Poisson tail bound: truncation error <= tol in l1.
/// Row convention matches kernel::GeneratorMatrix (rows sum to zero).
Eigen::VectorXd uniformization_transient(
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& generator,
    const Eigen::VectorXd& initial, double t, double tol = 1e-10);

}  // namespace matchsim
