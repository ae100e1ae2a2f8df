#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "matchsim/generator.hpp"
#include "matchsim/rng.hpp"

using namespace matchsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PreLimitRates make_rates(std::vector<double> lambda, std::vector<double> delta,
                         std::vector<std::int64_t> buffer) {
    PreLimitRates r;
    r.arrival_rate = std::move(lambda);
    r.abandon_rate_per_item = std::move(delta);
    r.buffer_count = std::move(buffer);
    return r;
}

SystemParams make_params(int K, double lambda0, std::vector<double> beta,
                         std::vector<double> delta, std::vector<double> buffer,
                         std::int64_t n) {
    SystemParams p;
    p.K = K;
    p.lambda0 = lambda0;
    p.beta = std::move(beta);
    p.delta = std::move(delta);
    p.buffer = std::move(buffer);
    p.scale = n;
    return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Enumerate all 2^K - 1 product-zero sign patterns (which coordinates are 0).
std::vector<Eigen::VectorXd> sign_patterns(int K) {
    std::vector<Eigen::VectorXd> out;
    for (unsigned mask = 1; mask < (1u << K); ++mask) {
        Eigen::VectorXd s(K);
        for (int i = 0; i < K; ++i)
            s(i) = (mask & (1u << i)) ? 0.0 : 0.5 + static_cast<double>(i);
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("library gradients and Hessians agree with central differences") {
    const int K = 3;
    auto lib = test_function_library(K);
    lib.push_back(first_coordinate_squared(K));
    const double h = 1e-4;
    auto rng = make_stream(5, 0);
    for (const auto& f : lib) {
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd s(K);
            // stay away from the bump's support edge, where the third
            // derivative jumps and the finite-difference stencil degrades
            for (int i = 0; i < K; ++i) s(i) = 0.9 * uniform_open(rng) - 0.45;
            const Eigen::VectorXd g = f.gradient(s);
            const Eigen::MatrixXd hess = f.hessian(s);
            CHECK((hess - hess.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (int i = 0; i < K; ++i) {
                Eigen::VectorXd up = s, dn = s;
                up(i) += h;
                dn(i) -= h;
                const double fd = (f.value(up) - f.value(dn)) / (2 * h);
                CHECK(std::abs(fd - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))));
                const Eigen::VectorXd gu = f.gradient(up), gd = f.gradient(dn);
                for (int j = 0; j < K; ++j) {
                    const double fd2 = (gu(j) - gd(j)) / (2 * h);
                    CHECK(std::abs(fd2 - hess(i, j)) <= 1e-5 * std::max(1.0, std::abs(hess(i, j))));
                }
            }
        }
    }
}

TEST_CASE("apply_An of a constant is zero everywhere") {
    const auto rates = make_rates({5, 7}, {1, 1}, {3, 3});
    const auto f = test_function_library(2)[0];
    for (const auto& state : enumerate_states(rates))
        CHECK(apply_An(f, state, rates, 4) == 0.0);
}

TEST_CASE("apply_An hand example: K=2, n=4, f = s1 - s2 at (0,2)") {
    // Transitions: match(1) rate 5 -> (0,1), admit(2) rate 7 -> (0,3),
    // abandon(2) rate 2 -> (0,1); spacing 1/2 in scaled coordinates, so
    // A_n f = 5*(+1/2) + 7*(-1/2) + 2*(+1/2) = 0.
    const auto rates = make_rates({5, 7}, {1, 1}, {8, 8});
    const auto f = test_function_library(2)[1];  // difference
    const double value = apply_An(f, QueueState({0, 2}), rates, 4);
    CHECK(value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("apply_An equals the generator-matrix action on every state") {
    const auto rates = make_rates({5, 7}, {1.3, 0.7}, {3, 3});
    const std::int64_t n = 9;
    const auto gen = build_generator_matrix(rates);
    for (const auto& f : test_function_library(2)) {
        Eigen::VectorXd fvec(static_cast<Eigen::Index>(gen.states.size()));
        for (std::size_t i = 0; i < gen.states.size(); ++i) {
            const auto s = scale_state(gen.states[i], n);
            fvec(static_cast<Eigen::Index>(i)) =
                f.value(Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())));
        }
        const Eigen::VectorXd action = gen.matrix * fvec;
        for (std::size_t i = 0; i < gen.states.size(); ++i)
            CHECK(std::abs(apply_An(f, gen.states[i], rates, n) -
                           action(static_cast<Eigen::Index>(i))) <= 1e-12);
    }
}

TEST_CASE("diffusion_matrix reproduces the degenerate one-empty K=3 matrix") {
    const double lam = 1.7;
    const Eigen::MatrixXd a = diffusion_matrix(vec({0.0, 1.5, 2.3}), lam);
    Eigen::MatrixXd expected(3, 3);
    expected << 0, 0, 0, 0, 2 * lam, 2 * lam, 0, 2 * lam, 2 * lam;
    CHECK((a - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diffusion_matrix with two empty queues is lambda0 * I") {
    const double lam = 2.5;
    const Eigen::MatrixXd a = diffusion_matrix(vec({0.0, 0.0, 3.0}), lam);
    CHECK((a - lam * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diffusion_matrix for K=2 puts all variance on the nonempty class") {
    const double lam = 1.0;
    const Eigen::MatrixXd a = diffusion_matrix(vec({0.0, 1.0}), lam);
    CHECK(a(0, 0) == 0.0);
    CHECK(a(1, 1) == 2.0 * lam);
    CHECK(a(0, 1) == 0.0);
    // Variance of the difference process matches Example-1's sigma^2 = 2*lambda0.
    CHECK(a(0, 0) + a(1, 1) - 2 * a(0, 1) == 2.0 * lam);
}

TEST_CASE("diffusion_matrix requires the product-zero manifold") {
    CHECK_THROWS_AS(diffusion_matrix(vec({1.0, 2.0}), 1.0), OffManifoldError);
}

TEST_CASE("diffusion_matrix is symmetric PSD on every sign pattern, K <= 4") {
    for (int K : {2, 3, 4}) {
        for (const auto& s : sign_patterns(K)) {
            const Eigen::MatrixXd a = diffusion_matrix(s, 1.3);
            CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        }
    }
}

TEST_CASE("degenerate K=3 one-empty matrix has eigenvalues {0, 0, 4*lambda0}") {
    const double lam = 0.9;
    const Eigen::MatrixXd a = diffusion_matrix(vec({0.0, 1.0, 2.0}), lam);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(es.eigenvalues()(1)) <= 1e-10);
    CHECK(es.eigenvalues()(2) == doctest::Approx(4.0 * lam).epsilon(1e-12));
}

TEST_CASE("apply_A of a constant is zero") {
    const auto p = make_params(2, 1.0, {0.5, -0.5}, {1, 1}, {kInf, kInf}, 100);
    const auto f = test_function_library(2)[0];
    CHECK(apply_A(f, vec({0.0, 1.0}), p) == 0.0);
}

TEST_CASE("apply_A linear example: K=2, f = s1 - s2 at (x, 0)") {
    const auto p = make_params(2, 1.0, {0.7, -0.4}, {1.5, 2.0}, {kInf, kInf}, 100);
    const auto f = test_function_library(2)[1];
    const double x = 0.8;
    CHECK(apply_A(f, vec({x, 0.0}), p) ==
          doctest::Approx(p.beta[0] - p.beta[1] - p.delta[0] * x).epsilon(1e-14));
}

TEST_CASE("apply_A quadratic example: K=3 second-order part vanishes") {
    const auto p = make_params(3, 1.4, {0.2, -0.1, 0.3}, {1, 2, 0.5},
                               {kInf, kInf, kInf}, 100);
    // f = (s2 - s3)^2 on the one-empty pattern (0, y, z): the rank-one block
    // [[2L,2L],[2L,2L]] annihilates (1,-1), so only the drift remains.
    TestFunction f;
    f.name = "s2-s3-squared";
    f.value = [](const Eigen::VectorXd& s) { const double u = s(1) - s(2); return u * u; };
    f.gradient = [](const Eigen::VectorXd& s) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(3);
        g(1) = 2 * (s(1) - s(2));
        g(2) = -2 * (s(1) - s(2));
        return g;
    };
    f.hessian = [](const Eigen::VectorXd&) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
        h(1, 1) = 2;
        h(2, 2) = 2;
        h(1, 2) = h(2, 1) = -2;
        return h;
    };
    const double y = 0.6, z = 1.1;
    const double drift = 2 * (p.beta[1] - p.delta[1] * y) * (y - z) -
                         2 * (p.beta[2] - p.delta[2] * z) * (y - z);
    CHECK(apply_A(f, vec({0.0, y, z}), p) == doctest::Approx(drift).epsilon(1e-13));
}

TEST_CASE("apply_A is linear in f") {
    const auto p = make_params(2, 1.0, {1, -1}, {1, 1}, {kInf, kInf}, 100);
    const auto lib = test_function_library(2, 2.0);
    const auto& f = lib[3];  // difference bump
    const auto& g = lib[2];  // difference squared
    const double alpha = 0.7, gamma = -1.3;
    TestFunction combo;
    combo.value = [&](const Eigen::VectorXd& s) { return alpha * f.value(s) + gamma * g.value(s); };
    combo.gradient = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
        return alpha * f.gradient(s) + gamma * g.gradient(s);
    };
    combo.hessian = [&](const Eigen::VectorXd& s) -> Eigen::MatrixXd {
        return alpha * f.hessian(s) + gamma * g.hessian(s);
    };
    for (double x : {0.0, 0.3, 1.1}) {
        const auto s = vec({x, 0.0});
        CHECK(apply_A(combo, s, p) ==
              doctest::Approx(alpha * apply_A(f, s, p) + gamma * apply_A(g, s, p)).epsilon(1e-10));
    }
}

TEST_CASE("check_regulated: difference functions pass, s1 fails") {
    std::vector<Eigen::VectorXd> samples;
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        samples.push_back(vec({x, 0.0}));
        samples.push_back(vec({0.0, x}));
    }
    const std::vector<double> buffers{1.0, 1.0};

    const auto bump = difference_bump(2, 1.0);
    const auto rep = check_regulated(bump, samples, buffers);
    CHECK(rep.pass);
    CHECK(rep.max_gradient_sum == 0.0);
    CHECK(rep.boundary_samples == 2);
    CHECK(rep.max_boundary_partial <= 1e-8);  // g'(+-1) = 0 for the C^2 bump

    TestFunction s1;
    s1.value = [](const Eigen::VectorXd& s) { return s(0); };
    s1.gradient = [](const Eigen::VectorXd&) { return vec({1.0, 0.0}); };
    s1.hessian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(2, 2); };
    const auto bad = check_regulated(s1, samples, buffers);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_gradient_sum == 1.0);
}

TEST_CASE("convergence_sweep: constant has zero sup-error for every n") {
    const auto p = make_params(2, 1.0, {1, -1}, {1, 1}, {kInf, kInf}, 1);
    StateWindow window{{0.0, 0.0}, {0.8, 0.8}};
    const auto table = convergence_sweep(test_function_library(2)[0], p, {100, 400}, window);
    REQUIRE(table.size() == 2);
    CHECK(table[0].sup_error == 0.0);
    CHECK(table[1].sup_error == 0.0);
}

TEST_CASE("convergence_sweep: regulated bump error decreases with n") {
    const auto p = make_params(2, 1.0, {1, -1}, {1, 1}, {kInf, kInf}, 1);
    const auto f = difference_bump(2, 1.0);
    StateWindow window{{0.0, 0.0}, {0.8, 0.8}};
    const auto table = convergence_sweep(f, p, {100, 1600}, window);
    REQUIRE(table.size() == 2);
    CHECK(table[0].sup_error > 0.0);
    CHECK(table[1].sup_error < table[0].sup_error);
    // O(n^{-1/2}) remainder: a 16x scale step should shave ~4x.
    CHECK(table[1].sup_error / table[0].sup_error < 0.5);
}

TEST_CASE("convergence_sweep: empty window raises EmptyWindow") {
    const auto p = make_params(2, 1.0, {1, -1}, {1, 1}, {0.5, 0.5}, 1);
    StateWindow window{{0.9, 0.9}, {0.95, 0.95}};
    CHECK_THROWS_AS(convergence_sweep(test_function_library(2)[0], p, {100}, window),
                    EmptyWindowError);
}

TEST_CASE("window_lattice_states stays interior and on the manifold") {
    const auto p = make_params(2, 1.0, {0, 0}, {1, 1}, {0.5, 0.5}, 1);
    StateWindow window{{0.0, 0.0}, {1.0, 1.0}};
    const auto states = window_lattice_states(p, 100, window);
    const auto rates = derive_prelimit_rates([&] { auto q = p; q.scale = 100; return q; }());
    CHECK(!states.empty());
    for (const auto& s : states) {
        CHECK(is_valid_state(s.counts()));
        for (int i = 0; i < 2; ++i)
            CHECK(s[i] < rates.buffer_count[static_cast<std::size_t>(i)]);
    }
}
