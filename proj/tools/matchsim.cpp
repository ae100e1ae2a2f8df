// Experiment runner: one subcommand per experiment kind. Each run writes CSV
// data plus a summary.json echoing the config, its hash, the RNG name, the
// version and the wall time. Fixed config + seed reproduces the data files
// byte for byte.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "matchsim/analysis.hpp"
#include "matchsim/config.hpp"
#include "matchsim/ctmc.hpp"
#include "matchsim/diffusion.hpp"
#include "matchsim/generator.hpp"
#include "matchsim/kernel.hpp"
#include "matchsim/model.hpp"
#include "matchsim/rng.hpp"

#ifndef MATCHSIM_VERSION
#define MATCHSIM_VERSION "0.0.0"
#endif

using namespace matchsim;

namespace {

struct RunContext {
    ExperimentConfig cfg;
    std::string hash;
    unsigned threads = 1;
    std::filesystem::path out;
};

std::ofstream open_output(const RunContext& ctx, const std::string& name) {
    std::ofstream out(ctx.out / name);
    if (!out) throw IoError("cannot write " + (ctx.out / name).string());
    out << "# config " << ctx.hash << "\n";
    return out;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    std::uint64_t s = base;
    for (auto& v : seeds) v = splitmix64(s);
    return seeds;
}

void parallel_for(unsigned threads, std::size_t count,
                  const std::function<void(std::size_t)>& body) {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < std::max(threads, 1u); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                body(i);
        });
    for (auto& t : pool) t.join();
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
}

QueueState zero_state(int K) {
    return QueueState(std::vector<std::int64_t>(static_cast<std::size_t>(K), 0));
}

nlohmann::json run_simulate_ctmc(const RunContext& ctx) {
    const auto rates = derive_prelimit_rates(ctx.cfg.params);
    const auto initial = zero_state(ctx.cfg.params.K);

    SimulateOptions options;
    options.record_every = ctx.cfg.record_every;
    const auto path =
        simulate_path(rates, initial, ctx.cfg.horizon, ctx.cfg.seed, options);
    {
        auto out = open_output(ctx, "path.csv");
        write_path_csv(path, out);
    }

    const auto terminals =
        run_replications(rates, initial, ctx.cfg.horizon, ctx.cfg.seed,
                         static_cast<std::size_t>(ctx.cfg.replications), ctx.threads);
    auto out = open_output(ctx, "terminals.csv");
    const int K = ctx.cfg.params.K;
    out << "rep";
    for (int i = 1; i <= K; ++i) out << ",Q_" << i;
    for (int i = 1; i <= K; ++i) out << ",A_" << i;
    for (int i = 1; i <= K; ++i) out << ",G_" << i;
    for (int i = 1; i <= K; ++i) out << ",L_" << i;
    out << ",R\n";
    for (std::size_t r = 0; r < terminals.size(); ++r) {
        const auto& t = terminals[r];
        out << r;
        for (auto v : t.counts) out << ',' << v;
        for (auto v : t.arrivals) out << ',' << v;
        for (auto v : t.abandons) out << ',' << v;
        for (auto v : t.blocks) out << ',' << v;
        out << ',' << t.matches << '\n';
    }

    Sample q1;
    for (const auto& t : terminals)
        q1.values.push_back(static_cast<double>(t.counts[0]));
    const Moments m = moments(q1);
    return {{"path_events", path.total_events},
            {"terminal_mean_Q1", m.mean},
            {"terminal_sem_Q1", m.sem}};
}

nlohmann::json run_simulate_limit(const RunContext& ctx) {
    const int K = ctx.cfg.params.K;
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(K);
    const auto path = simulate_limit_K(ctx.cfg.params, x0, ctx.cfg.horizon,
                                       ctx.cfg.dt, ctx.cfg.seed);
    {
        auto out = open_output(ctx, "limit_path.csv");
        write_diffusion_csv(path, out);
    }

    const auto reps = static_cast<std::size_t>(ctx.cfg.replications);
    const auto seeds = derive_seeds(ctx.cfg.seed, reps);
    std::vector<Eigen::VectorXd> X(reps), U(reps);
    std::vector<double> R(reps);
    parallel_for(ctx.threads, reps, [&](std::size_t i) {
        const auto p =
            simulate_limit_K(ctx.cfg.params, x0, ctx.cfg.horizon, ctx.cfg.dt, seeds[i]);
        X[i] = p.X.back();
        U[i] = p.U.back();
        R[i] = p.R.back();
    });
    auto out = open_output(ctx, "limit_terminals.csv");
    out << "rep";
    for (int i = 1; i <= K; ++i) out << ",X_" << i;
    for (int i = 1; i <= K; ++i) out << ",U_" << i;
    out << ",R\n";
    for (std::size_t r = 0; r < reps; ++r) {
        out << r;
        for (int i = 0; i < K; ++i) out << ',' << X[r](i);
        for (int i = 0; i < K; ++i) out << ',' << U[r](i);
        out << ',' << R[r] << '\n';
    }

    Sample x1;
    for (const auto& x : X) x1.values.push_back(x(0));
    const Moments m = moments(x1);
    return {{"terminal_mean_X1", m.mean}, {"terminal_sem_X1", m.sem}};
}

double default_sigma(const ExperimentConfig& cfg) {
    return cfg.sigma > 0.0 ? cfg.sigma : std::sqrt(2.0 * cfg.params.lambda0);
}

nlohmann::json run_double_ended(const RunContext& ctx) {
    const double sigma = default_sigma(ctx.cfg);
    const auto path = simulate_double_ended(ctx.cfg.params, sigma, ctx.cfg.x0,
                                            ctx.cfg.horizon, ctx.cfg.dt, ctx.cfg.seed);
    {
        auto out = open_output(ctx, "double_ended_path.csv");
        out << "t,x,lower_local_time,upper_local_time\n";
        for (std::size_t k = 0; k < path.times.size(); ++k)
            out << path.times[k] << ',' << path.x[k] << ','
                << path.lower_local_time[k] << ',' << path.upper_local_time[k] << '\n';
    }

    const auto reps = static_cast<std::size_t>(ctx.cfg.replications);
    const auto seeds = derive_seeds(ctx.cfg.seed, reps);
    std::vector<double> terminal(reps), lower(reps), upper(reps);
    parallel_for(ctx.threads, reps, [&](std::size_t i) {
        const auto p = simulate_double_ended(ctx.cfg.params, sigma, ctx.cfg.x0,
                                             ctx.cfg.horizon, ctx.cfg.dt, seeds[i]);
        terminal[i] = p.x.back();
        lower[i] = p.lower_local_time.back();
        upper[i] = p.upper_local_time.back();
    });
    auto out = open_output(ctx, "double_ended_terminals.csv");
    out << "rep,x,lower_local_time,upper_local_time\n";
    for (std::size_t r = 0; r < reps; ++r)
        out << r << ',' << terminal[r] << ',' << lower[r] << ',' << upper[r] << '\n';

    const Moments m = moments({terminal, "terminal"});
    return {{"sigma", sigma}, {"terminal_mean", m.mean}, {"terminal_sem", m.sem}};
}

nlohmann::json run_generator_check(const RunContext& ctx) {
    const auto rates = derive_prelimit_rates(ctx.cfg.params);
    const auto gen = build_generator_matrix(rates);
    const auto funcs = test_function_library(ctx.cfg.params.K);
    const std::int64_t n = ctx.cfg.params.scale;

    std::vector<Eigen::VectorXd> scaled;
    scaled.reserve(gen.states.size());
    for (const auto& s : gen.states) scaled.push_back(to_eigen(scale_state(s, n)));

    nlohmann::json per_function = nlohmann::json::array();
    double worst = 0.0;
    auto out = open_output(ctx, "generator_check.csv");
    out << "function,max_oracle_error,max_gradient_sum,max_boundary_partial,regulated\n";
    for (const auto& f : funcs) {
        Eigen::VectorXd fv(static_cast<Eigen::Index>(gen.states.size()));
        for (std::size_t i = 0; i < gen.states.size(); ++i)
            fv(static_cast<Eigen::Index>(i)) = f.value(scaled[i]);
        const Eigen::VectorXd action = gen.matrix * fv;
        double err = 0.0;
        for (std::size_t i = 0; i < gen.states.size(); ++i)
            err = std::max(err, std::abs(apply_An(f, gen.states[i], rates, n) -
                                         action(static_cast<Eigen::Index>(i))));
        worst = std::max(worst, err);

        std::vector<double> buffers;
        for (auto b : rates.buffer_count)
            buffers.push_back(static_cast<double>(b) / std::sqrt(static_cast<double>(n)));
        const auto report = check_regulated(f, scaled, buffers);
        out << f.name << ',' << err << ',' << report.max_gradient_sum << ','
            << report.max_boundary_partial << ',' << (report.pass ? 1 : 0) << '\n';
        per_function.push_back({{"function", f.name},
                                {"max_oracle_error", err},
                                {"regulated_pass", report.pass}});
    }
    return {{"max_oracle_error", worst},
            {"oracle_pass", worst <= 1e-12},
            {"functions", per_function}};
}

nlohmann::json run_converge_sweep(const RunContext& ctx) {
    const auto f = difference_bump(ctx.cfg.params.K, 1.0);
    const auto rows =
        convergence_sweep(f, ctx.cfg.params, ctx.cfg.n_grid, ctx.cfg.window);
    auto out = open_output(ctx, "sweep.csv");
    out << "n,sup_error,argmax_state\n";
    for (const auto& row : rows) {
        out << row.n << ',' << row.sup_error << ",\"";
        for (std::size_t i = 0; i < row.argmax_state.size(); ++i)
            out << (i ? " " : "") << row.argmax_state[i];
        out << "\"\n";
    }
    return {{"first_error", rows.front().sup_error},
            {"last_error", rows.back().sup_error},
            {"ratio", rows.back().sup_error / rows.front().sup_error}};
}

nlohmann::json run_compare_laws(const RunContext& ctx) {
    if (ctx.cfg.params.K != 2)
        throw ConfigError("compare-laws requires K = 2");
    const auto rates = derive_prelimit_rates(ctx.cfg.params);
    const double root = std::sqrt(static_cast<double>(ctx.cfg.params.scale));
    const double sigma = default_sigma(ctx.cfg);
    const auto reps = static_cast<std::size_t>(ctx.cfg.replications);

    std::vector<double> times = ctx.cfg.compare_times;
    if (times.empty()) times.push_back(ctx.cfg.horizon);

    auto table = open_output(ctx, "ks_table.csv");
    table << "t,ks,threshold,pass\n";
    nlohmann::json rows = nlohmann::json::array();
    std::uint64_t salt = ctx.cfg.seed;
    for (double t : times) {
        const auto terminals = run_replications(rates, zero_state(2), t,
                                                splitmix64(salt), reps, ctx.threads);
        Sample scaled;
        for (const auto& term : terminals)
            scaled.values.push_back(
                static_cast<double>(term.counts[0] - term.counts[1]) / root);

        const auto seeds = derive_seeds(splitmix64(salt), reps);
        std::vector<double> limit(reps);
        parallel_for(ctx.threads, reps, [&](std::size_t i) {
            limit[i] = simulate_double_ended(ctx.cfg.params, sigma, ctx.cfg.x0, t,
                                             ctx.cfg.dt, seeds[i])
                           .x.back();
        });

        const double d = ks_distance(scaled, {limit, "limit"});
        const bool pass = d <= ctx.cfg.ks_threshold;
        table << t << ',' << d << ',' << ctx.cfg.ks_threshold << ','
              << (pass ? 1 : 0) << '\n';
        rows.push_back({{"t", t}, {"ks", d}, {"pass", pass}});

        if (t == times.back()) {
            auto out = open_output(ctx, "samples.csv");
            out << "rep,scaled_difference,limit\n";
            for (std::size_t r = 0; r < reps; ++r)
                out << r << ',' << scaled.values[r] << ',' << limit[r] << '\n';
        }
    }
    bool all = true;
    for (const auto& row : rows) all = all && row["pass"].get<bool>();
    return {{"ks_table", rows}, {"pass", all}};
}

nlohmann::json run_oracle_validate(const RunContext& ctx) {
    const auto rates = derive_prelimit_rates(ctx.cfg.params);
    const auto gen = build_generator_matrix(rates);
    const auto dim = static_cast<Eigen::Index>(gen.states.size());
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(dim);
    p0(static_cast<Eigen::Index>(gen.index_of(zero_state(ctx.cfg.params.K)))) = 1.0;
    const Eigen::VectorXd p =
        uniformization_transient(gen.matrix, p0, ctx.cfg.horizon, ctx.cfg.tol);

    {
        auto out = open_output(ctx, "transient_distribution.csv");
        out << "state,probability\n";
        for (std::size_t i = 0; i < gen.states.size(); ++i)
            out << '"' << gen.states[i].to_string() << "\"," << p(static_cast<Eigen::Index>(i))
                << '\n';
    }

    const auto terminals =
        run_replications(rates, zero_state(ctx.cfg.params.K), ctx.cfg.horizon,
                         ctx.cfg.seed, static_cast<std::size_t>(ctx.cfg.replications),
                         ctx.threads);
    nlohmann::json classes = nlohmann::json::array();
    double worst = 0.0;
    for (int cls = 0; cls < ctx.cfg.params.K; ++cls) {
        double exact = 0.0;
        for (std::size_t i = 0; i < gen.states.size(); ++i)
            exact += p(static_cast<Eigen::Index>(i)) *
                     static_cast<double>(gen.states[i][cls]);
        Sample mc;
        for (const auto& term : terminals)
            mc.values.push_back(
                static_cast<double>(term.counts[static_cast<std::size_t>(cls)]));
        const Moments m = moments(mc);
        const double sigmas = std::abs(m.mean - exact) / m.sem;
        worst = std::max(worst, sigmas);
        classes.push_back({{"class", cls + 1},
                           {"transient_mean", exact},
                           {"mc_mean", m.mean},
                           {"mc_sem", m.sem},
                           {"offset_se", sigmas}});
    }
    return {{"classes", classes}, {"max_offset_se", worst}, {"pass", worst <= 3.0}};
}

int run(ExperimentKind kind, const std::string& config_path,
        const std::string& out_override, std::int64_t seed_override,
        unsigned threads) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot read config " + config_path);
    nlohmann::json raw = nlohmann::json::parse(in);
    raw["kind"] = to_string(kind);
    if (!out_override.empty()) raw["out"] = out_override;
    if (seed_override >= 0) raw["seed"] = static_cast<std::uint64_t>(seed_override);

    const auto validated = validate_config(raw);
    if (std::holds_alternative<std::vector<std::string>>(validated)) {
        for (const auto& e : std::get<std::vector<std::string>>(validated))
            std::cerr << "config error: " << e << "\n";
        return 2;
    }

    RunContext ctx;
    ctx.cfg = std::get<ExperimentConfig>(validated);
    ctx.hash = config_hash(ctx.cfg);
    ctx.threads = threads;
    ctx.out = ctx.cfg.out_dir;
    std::filesystem::create_directories(ctx.out);

    const auto start = std::chrono::steady_clock::now();
    nlohmann::json results;
    switch (kind) {
        case ExperimentKind::SimulateCtmc: results = run_simulate_ctmc(ctx); break;
        case ExperimentKind::SimulateLimit: results = run_simulate_limit(ctx); break;
        case ExperimentKind::DoubleEnded: results = run_double_ended(ctx); break;
        case ExperimentKind::GeneratorCheck: results = run_generator_check(ctx); break;
        case ExperimentKind::ConvergeSweep: results = run_converge_sweep(ctx); break;
        case ExperimentKind::CompareLaws: results = run_compare_laws(ctx); break;
        case ExperimentKind::OracleValidate: results = run_oracle_validate(ctx); break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::json summary;
    summary["config"] = ctx.cfg.to_json();
    summary["config_hash"] = ctx.hash;
    summary["rng"] = kRngName;
    summary["version"] = MATCHSIM_VERSION;
    summary["threads"] = threads;
    summary["wall_time_seconds"] = wall;
    summary["results"] = results;
    std::ofstream out(ctx.out / "summary.json");
    if (!out) throw IoError("cannot write summary.json");
    out << summary.dump(2) << "\n";

    std::cout << summary["results"].dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matching-queue simulation and verification toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::int64_t seed = -1;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    const ExperimentKind kinds[] = {
        ExperimentKind::SimulateCtmc,   ExperimentKind::SimulateLimit,
        ExperimentKind::DoubleEnded,    ExperimentKind::GeneratorCheck,
        ExperimentKind::ConvergeSweep,  ExperimentKind::CompareLaws,
        ExperimentKind::OracleValidate,
    };
    for (ExperimentKind kind : kinds) {
        auto* sub = app.add_subcommand(to_string(kind));
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "seed (overrides config)");
        sub->add_option("--threads", threads, "worker threads");
        sub->callback([kind, &config_path, &out_dir, &seed, &threads] {
            try {
                std::exit(run(kind, config_path, out_dir, seed, threads));
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                std::exit(1);
            }
        });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
