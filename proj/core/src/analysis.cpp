#include "matchsim/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace matchsim {

double ks_distance(const Sample& a, const Sample& b) {
    if (a.values.empty() || b.values.empty())
        throw EmptySampleError("ks_distance requires nonempty samples");
    std::vector<double> sa = a.values, sb = b.values;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < sa.size() && ib < sb.size()) {
        const double x = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] <= x) ++ia;
        while (ib < sb.size() && sb[ib] <= x) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
    }
    return d;
}

double ks_distance_to_cdf(const Sample& a,
                          const std::function<double(double)>& cdf) {
    if (a.values.empty()) throw EmptySampleError("empty sample");
    std::vector<double> s = a.values;
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = cdf(s[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
        d = std::max(d, std::abs(static_cast<double>(i) / n - F));
    }
    return d;
}

Moments moments(const Sample& a) {
    if (a.values.empty()) throw EmptySampleError("empty sample");
    if (a.values.size() < 2) throw TooFewError("variance requires >= 2 values");
    Moments m;
    m.count = a.values.size();
    double sum = 0.0;
    for (double v : a.values) sum += v;
    m.mean = sum / static_cast<double>(m.count);
    double ss = 0.0;
    for (double v : a.values) ss += (v - m.mean) * (v - m.mean);
    m.variance = ss / static_cast<double>(m.count - 1);
    m.sem = std::sqrt(m.variance / static_cast<double>(m.count));
    return m;
}

Eigen::VectorXd uniformization_transient(
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& generator,
    const Eigen::VectorXd& initial, double t, double tol) {
    if (t < 0.0) throw Error("t must be >= 0");
    if (!(tol > 0.0)) throw Error("tol must be > 0");
    const Eigen::Index dim = generator.rows();
    if (generator.cols() != dim || initial.size() != dim)
        throw Error("dimension mismatch");
    if (t == 0.0) return initial;

    double max_diag = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
        max_diag = std::max(max_diag, -generator.coeff(i, i));
    if (max_diag == 0.0) return initial;  // no dynamics
    const double rate = max_diag * 1.01;
    const double mean = rate * t;

    // Row-vector iteration p_{k} = p_{k-1} P with P = I + Q/rate; Poisson
    // weights computed in log space so large rate*t cannot underflow the
    // recursion. Stops when the accumulated weight reaches 1 - tol.
    Eigen::RowVectorXd pk = initial.transpose();
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim);
    double cumulative = 0.0;
    const double log_mean = std::log(mean);
    for (std::uint64_t k = 0;; ++k) {
        const double log_w = -mean + static_cast<double>(k) * log_mean -
                             std::lgamma(static_cast<double>(k) + 1.0);
        const double w = std::exp(log_w);
        acc += w * pk;
        cumulative += w;
        if (cumulative >= 1.0 - tol) break;
        if (k > 1000 && static_cast<double>(k) > mean + 200.0 * std::sqrt(mean) + 200.0)
            throw Error("uniformization failed to meet the tail bound");
        pk = pk + (pk * generator) / rate;
    }
    return acc.transpose();
}

}  // namespace matchsim
