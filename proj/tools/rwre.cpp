#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/env.hpp"
#include "rwre/harness.hpp"
#include "rwre/quenched.hpp"

using nlohmann::json;

namespace {

// Law selection shared by the env and stats subcommands.
struct LawOptions {
    std::string distJson;
    std::optional<double> alpha;
    std::optional<double> p;

    void attach(CLI::App* app) {
        app->add_option("--dist", distJson, "law as JSON, same schema as the config \"dist\" field");
        app->add_option("--alpha", alpha, "two-point family rho in {2, 1/2}, P(rho = 2) = alpha");
        app->add_option("--p", p, "homogeneous law omega = p");
    }

    rwre::EnvDistribution resolve() const {
        const int given = (!distJson.empty()) + alpha.has_value() + p.has_value();
        if (given != 1) throw CLI::ValidationError("law", "give exactly one of --dist, --alpha, --p");
        if (alpha) return rwre::EnvDistribution::two_point(*alpha);
        if (p) return rwre::EnvDistribution::homogeneous(*p);
        return rwre::EnvDistribution::from_json(json::parse(distJson));
    }
};

int cmd_run(const std::string& path, unsigned threads, const std::string& out) {
    const rwre::ExperimentConfig cfg = rwre::load_config(path);
    std::optional<std::filesystem::path> outDir;
    if (!out.empty()) outDir = out;
    const rwre::RunReport rep = rwre::run_experiment(cfg, threads, outDir);
    json summary = {{"experiment", cfg.experiment},
                    {"configHash", rep.configHash},
                    {"aggregate", rep.aggregate},
                    {"totalSeconds", rep.durations.at("totalSeconds")}};
    for (const auto& e : rep.perSeed)
        if (!e.at("ok").get<bool>()) summary["errors"].push_back({{"seed", e.at("seed")}, {"error", e.at("error")}});
    std::cout << summary.dump(2) << '\n';
    if (outDir) std::cout << "report: " << (*outDir / "report.json").string() << '\n';
    else std::cout << rep.to_json().dump() << '\n';
    std::cout << (rep.pass ? "PASS" : "FAIL") << '\n';
    return rep.pass ? 0 : 1;
}

int cmd_env_sample(const rwre::EnvDistribution& dist, std::uint64_t seed, rwre::Site lo, rwre::Site hi, bool q,
                   long leftDepth, long blocks) {
    rwre::EnvironmentWindow env =
        q ? rwre::sample_window_Q(dist, seed, leftDepth, hi) : rwre::sample_window_P(dist, seed, lo, hi);
    if (blocks > 0) {
        rwre::LadderDecomposition lad;
        while (true) {
            try {
                lad = rwre::ladder_decompose(env, 0, static_cast<std::size_t>(blocks));
                break;
            } catch (const std::out_of_range&) {
                env = env.resampled(env.lo(), 2 * env.hi() + 64);
            }
        }
        const long b = rwre::b_n(static_cast<double>(blocks));
        rwre::write_block_csv(std::cout, rwre::all_block_moments(env, lad, b));
        return 0;
    }
    std::cout << "# seed=" << seed << " kind=" << (q ? "Q" : "P") << "\n";
    std::cout << "site,omega,rho,potential\n";
    std::cout.precision(17);
    for (rwre::Site x = env.lo(); x <= env.hi(); ++x)
        std::cout << x << ',' << env.omega(x) << ',' << env.rho(x) << ',' << rwre::potential(env, x) << '\n';
    return 0;
}

int cmd_stats_exact(const rwre::EnvDistribution& dist, std::uint64_t seed, long n, long depth, long leftDepth) {
    const rwre::EnvironmentWindow env = rwre::sample_window_P(dist, seed, -leftDepth, n);
    const rwre::TailExponent te = rwre::solve_s(dist);
    const rwre::SolomonResult sol = rwre::solomon_classify(dist);
    json out = {{"seed", seed},
                {"n", n},
                {"depth", depth},
                {"barrier", depth == 0 ? json(env.lo() - 1) : json("trailing")},
                {"meanT", rwre::quenched_mean_T(env, n, depth)},
                {"varT", rwre::quenched_var_T(env, n, depth)},
                {"s", te.finite() ? json(te.s) : json("inf")},
                {"regime", rwre::to_string(sol.regime)},
                {"vP", sol.speed},
                {"annealedStepMean", rwre::annealed_step_mean(dist)},
                {"annealedStepVariance", rwre::annealed_step_variance(dist)}};
    for (auto& [k, v] : out.items())
        if (v.is_number_float() && !std::isfinite(v.get<double>())) v = "inf";
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rwre: random walk in random environment laboratory"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment config; exit code 0 iff every threshold passes");
    std::string runPath, outDir;
    unsigned threads = 1;
    run->add_option("config", runPath, "config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
    run->add_option("--out", outDir, "directory for report.json and raw CSV files");

    auto* list = app.add_subcommand("list", "list the experiment catalog");
    bool listJson = false;
    list->add_flag("--json", listJson, "machine-readable output");

    auto* check = app.add_subcommand("check", "validate a config and print it with defaults resolved");
    std::string checkPath;
    check->add_option("config", checkPath, "config JSON")->required()->check(CLI::ExistingFile);

    auto* env = app.add_subcommand("env", "environment utilities");
    env->require_subcommand(1);
    auto* sample = env->add_subcommand("sample", "sample an environment window (CSV on stdout)");
    LawOptions sampleLaw;
    sampleLaw.attach(sample);
    std::uint64_t sampleSeed = 0;
    rwre::Site lo = 0, hi = 99;
    bool useQ = false;
    long qDepth = 64, blocks = 0;
    sample->add_option("--seed", sampleSeed);
    sample->add_option("--lo", lo, "left end (P only)");
    sample->add_option("--hi", hi, "right end");
    sample->add_flag("--q", useQ, "sample under Q (rejection on the left partial products)");
    sample->add_option("--left-depth", qDepth, "sites kept left of 0 under Q");
    sample->add_option("--blocks", blocks, "print ladder block moments for this many blocks instead of sites");

    auto* stats = app.add_subcommand("stats", "quenched statistics");
    stats->require_subcommand(1);
    auto* exact = stats->add_subcommand("exact", "exact E_omega T_n and Var_omega T_n in one sampled environment");
    LawOptions exactLaw;
    exactLaw.attach(exact);
    std::uint64_t exactSeed = 0;
    long n = 1000, depth = 0, leftDepth = 400;
    exact->add_option("--seed", exactSeed);
    exact->add_option("--n", n, "target site")->check(CLI::PositiveNumber);
    exact->add_option("--depth", depth, "trailing reflection depth in sites; 0 = fixed barrier left of the window");
    exact->add_option("--left-depth", leftDepth, "sites sampled left of 0");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(runPath, threads, outDir);
        if (*list) {
            std::cout << (listJson ? rwre::catalog_json().dump(2) + "\n" : rwre::catalog_table());
            return 0;
        }
        if (*check) {
            const rwre::ExperimentConfig cfg = rwre::load_config(checkPath);
            std::cout << json{{"valid", true}, {"configHash", cfg.hash()}, {"config", cfg.resolved()}}.dump(2) << '\n';
            return 0;
        }
        if (*sample) return cmd_env_sample(sampleLaw.resolve(), sampleSeed, lo, hi, useQ, qDepth, blocks);
        if (*exact) return cmd_stats_exact(exactLaw.resolve(), exactSeed, n, depth, leftDepth);
    } catch (const rwre::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
