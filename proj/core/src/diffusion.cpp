#include "matchsim/diffusion.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "matchsim/rng.hpp"

namespace matchsim {

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw Error("sqrt_psd requires a square matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    Eigen::VectorXd evals = solver.eigenvalues();
    if (evals.minCoeff() < -1e-8)
        throw NotPsdError("matrix is not PSD: min eigenvalue " +
                          std::to_string(evals.minCoeff()));
    Eigen::MatrixXd vecs = solver.eigenvectors();
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        Eigen::Index imax = 0;
        vecs.col(j).cwiseAbs().maxCoeff(&imax);
        if (vecs(imax, j) < 0.0) vecs.col(j) = -vecs.col(j);
    }
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        evals(i) = std::sqrt(std::max(evals(i), 0.0));
    return vecs * evals.asDiagonal() * vecs.transpose();
}

ReflectedPath skorokhod_two_sided(const std::vector<double>& input,
                                  double lower, double upper) {
    if (!(lower < upper)) throw BadBandError("lower must be < upper");
    if (input.empty()) throw Error("empty input path");
    if (input.front() < lower || input.front() > upper)
        throw BadBandError("input must start inside the band");

    ReflectedPath out;
    out.values.reserve(input.size());
    out.lower_local_time.reserve(input.size());
    out.upper_local_time.reserve(input.size());
    double y = input.front(), low = 0.0, up = 0.0;
    out.values.push_back(y);
    out.lower_local_time.push_back(0.0);
    out.upper_local_time.push_back(0.0);
    for (std::size_t k = 1; k < input.size(); ++k) {
        // input + low - up keeps the decomposition identity exact
        y = input[k] + low - up;
        if (y > upper) { up += y - upper; y = upper; }
        else if (y < lower) { low += lower - y; y = lower; }
        out.values.push_back(y);
        out.lower_local_time.push_back(low);
        out.upper_local_time.push_back(up);
    }
    return out;
}

DoubleEndedPath simulate_double_ended(const SystemParams& params, double sigma,
                                      double x0, double T, double dt,
                                      std::uint64_t seed) {
    params.validate();
    if (params.K != 2) throw Error("double-ended limit requires K = 2");
    if (!(dt > 0.0)) throw Error("dt must be > 0");
    if (sigma < 0.0) throw Error("sigma must be >= 0");
    const double upper = params.buffer[0];
    const double lower = -params.buffer[1];
    if (x0 < lower || x0 > upper) throw BadInitError("x0 outside [-b2, b1]");
    const double beta = params.beta[0] - params.beta[1];
    const double d1 = params.delta[0], d2 = params.delta[1];

    DoubleEndedPath path;
    path.seed = seed;
    auto rng = make_stream(seed, 0);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    path.times.reserve(steps + 1);
    path.x.reserve(steps + 1);
    path.lower_local_time.reserve(steps + 1);
    path.upper_local_time.reserve(steps + 1);

    double x = x0, low = 0.0, up = 0.0;
    path.times.push_back(0.0);
    path.x.push_back(x);
    path.lower_local_time.push_back(0.0);
    path.upper_local_time.push_back(0.0);
    const double sq = sigma * std::sqrt(dt);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double h = d1 * std::max(x, 0.0) - d2 * std::max(-x, 0.0);
        x += (beta - h) * dt + sq * standard_normal(rng);
        if (x > upper) { up += x - upper; x = upper; }
        else if (x < lower) { low += lower - x; x = lower; }
        path.times.push_back(static_cast<double>(k) * dt);
        path.x.push_back(x);
        path.lower_local_time.push_back(low);
        path.upper_local_time.push_back(up);
    }
    return path;
}

DiffusionPath simulate_limit_K(const SystemParams& params,
                               const Eigen::VectorXd& x0, double T, double dt,
                               std::uint64_t seed) {
    params.validate();
    const int K = params.K;
    if (x0.size() != K) throw BadInitError("x0 dimension mismatch");
    if (x0.minCoeff() < 0.0 || x0.minCoeff() > 1e-12)
        throw BadInitError("x0 must be a product-zero state");
    for (int i = 0; i < K; ++i)
        if (x0(i) > params.buffer[static_cast<std::size_t>(i)])
            throw BadInitError("x0 exceeds a buffer");
    if (!(dt > 0.0)) throw Error("dt must be > 0");

    const double sigma = std::sqrt(params.lambda0);
    for (int i = 0; i < K; ++i) {
        const double b = params.buffer[static_cast<std::size_t>(i)];
        if (std::isfinite(b) &&
            std::abs(params.beta[static_cast<std::size_t>(i)]) * dt + 4.0 * sigma * std::sqrt(dt) > b)
            throw StepTooLargeError("single-step drift + 4 sigma sqrt(dt) exceeds buffer " +
                                    std::to_string(i + 1));
    }

    DiffusionPath path;
    path.seed = seed;
    auto rng = make_stream(seed, 0);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    path.times.reserve(steps + 1);

    Eigen::VectorXd X = x0;
    Eigen::VectorXd N = x0;  // cumulative net inflow per class
    Eigen::VectorXd U = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd Wsum = Eigen::VectorXd::Zero(K);
    double R = 0.0;
    const double sqdt = std::sqrt(dt);

    auto push = [&](double t) {
        path.times.push_back(t);
        path.X.push_back(X);
        path.U.push_back(U);
        path.R.push_back(R);
        path.W.push_back(Wsum);
    };
    push(0.0);

    for (std::size_t k = 1; k <= steps; ++k) {
        for (int i = 0; i < K; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double dw = sqdt * standard_normal(rng);
            Wsum(i) += dw;
            N(i) += (params.beta[idx] - params.delta[idx] * X(i)) * dt + sigma * dw;
        }
        R = (N - U).minCoeff();
        X = N - U - Eigen::VectorXd::Constant(K, R);
        // Buffer overshoot goes into the local time; the clamped class is
        // never the argmin (X_i > b_i > 0), so R is unchanged.
        for (int i = 0; i < K; ++i) {
            const double b = params.buffer[static_cast<std::size_t>(i)];
            if (std::isfinite(b) && X(i) > b) {
                U(i) += X(i) - b;
                X(i) = b;
            }
        }
        push(static_cast<double>(k) * dt);
    }
    return path;
}

void write_diffusion_csv(const DiffusionPath& path, std::ostream& out) {
    const Eigen::Index K = path.X.empty() ? 0 : path.X.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= K; ++i) out << ",X_" << i;
    for (Eigen::Index i = 1; i <= K; ++i) out << ",U_" << i;
    out << ",R\n";
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        out << path.times[k];
        for (Eigen::Index i = 0; i < K; ++i) out << ',' << path.X[k](i);
        for (Eigen::Index i = 0; i < K; ++i) out << ',' << path.U[k](i);
        out << ',' << path.R[k] << '\n';
    }
}

}  // namespace matchsim
