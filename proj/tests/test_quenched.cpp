#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rwre/oracles.hpp"
#include "rwre/quenched.hpp"
#include "rwre/sim.hpp"
#include "support.hpp"

using namespace rwre;
using doctest::Approx;

namespace {

EnvironmentWindow constant(Site lo, Site hi, double w) {
    return EnvironmentWindow(lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), w));
}

struct Moments {
    double mean = 0.0, var = 0.0, meanSe = 0.0, varSe = 0.0;
};

Moments sample_moments(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = (x - m) * (x - m);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n - 1.0;
    m4 /= n;
    return {m, m2, std::sqrt(m2 / n), std::sqrt(std::max(m4 - m2 * m2, 0.0) / n)};
}

}  // namespace

TEST_CASE("hitting probabilities: gambler's ruin examples") {
    const auto sym = constant(-2, 6, 0.5);
    CHECK(hitting_prob(sym, 0, 1, 4).right == Approx(0.25).epsilon(1e-15));
    const auto half = EnvironmentWindow::from_rho(-2, std::vector<double>(8, 0.5));
    CHECK(hitting_prob(half, 0, 1, 3).right == Approx(4.0 / 7.0).epsilon(1e-14));
    CHECK_THROWS(hitting_prob(sym, 2, 1, 4));
    CHECK_THROWS(hitting_prob(sym, -4, 0, 4));  // needs sites i+1..j-1
}

TEST_CASE("hitting probabilities match the dense harmonic solve") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto env = testsupport::random_window(seed, 0, 11);
        const auto h = testsupport::hitting_dense(env, 0, 11);
        for (Site x = 0; x <= 11; ++x) {
            const auto p = hitting_prob(env, 0, x, 11);
            REQUIRE(std::abs(p.right - h[static_cast<std::size_t>(x)]) < 1e-12);
            REQUIRE(std::abs(p.right + p.left - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("quenched mean examples") {
    const auto env = EnvironmentWindow::from_rho(-200, std::vector<double>(202, 1.0 / 3.0));
    CHECK(quenched_mean_T(env, 1, 0) == Approx(2.0).epsilon(1e-14));
    CHECK(quenched_var_T(env, 1, 0) == Approx(6.0).epsilon(1e-13));
    CHECK(quenched_mean_T(env, 1, 150) == Approx(2.0).epsilon(1e-14));

    const auto det = constant(-5, 40, 1.0);
    CHECK(quenched_mean_T(det, 40, 0) == 40.0);
    CHECK(quenched_var_T(det, 40, 0) == 0.0);

    // Biased walk with p = 0.6: 1/(2p-1) per step and 4 rho (1+rho)/(1-rho)^3.
    for (double p : {0.6, 0.75, 0.9}) {
        const double r = (1 - p) / p;
        const auto hom = constant(-900, 3, p);
        CHECK(quenched_mean_T(hom, 1, 0) == Approx(1.0 / (2 * p - 1)).epsilon(1e-12));
        CHECK(quenched_var_T(hom, 1, 0) == Approx(4 * r * (1 + r) / std::pow(1 - r, 3)).epsilon(1e-12));
    }
}

TEST_CASE("quenched moments match dense first-step equations") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto env = testsupport::random_window(seed, -40, 60, 0.3, 0.9);
        const Site barrier = -40;
        for (Site to : {1, 7, 30, 60}) {
            const auto dense = testsupport::hitting_time_dense(env, barrier, 0, to);
            REQUIRE(quenched_mean_between(env, 0, to, barrier) == Approx(dense.mean).epsilon(1e-9));
            REQUIRE(quenched_var_between(env, 0, to, barrier) == Approx(dense.var).epsilon(1e-8));
        }
    }
}

TEST_CASE("trailing depth puts the barrier depth sites behind each step") {
    const auto env = testsupport::random_window(5, -20, 30, 0.3, 0.9);
    const Site depth = 6;
    double mean = 0.0, var = 0.0;
    for (Site j = 0; j < 25; ++j) {
        const auto d = testsupport::hitting_time_dense(env, j - depth, j, j + 1);
        mean += d.mean;
        var += d.var;
    }
    CHECK(quenched_mean_T(env, 25, depth) == Approx(mean).epsilon(1e-10));
    CHECK(quenched_var_T(env, 25, depth) == Approx(var).epsilon(1e-10));
    CHECK(s_bar(env, 3, depth) == Approx(1.0 + 2.0 * w_sum(env, 3, depth)).epsilon(1e-14));
}

TEST_CASE("quenched variance agrees with the second-moment recursion") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto env = testsupport::random_window(seed + 500, -30, 30, 0.2, 0.95);
        const double a = quenched_var_between(env, 0, 30, -30);
        const double b = oracle::second_moment_variance(env, -30, 0, 30);
        REQUIRE(std::abs(a - b) <= 1e-9 * std::abs(b));
    }
}

TEST_CASE("quenched mean is additive over intervals") {
    const auto env = testsupport::random_window(9, -50, 80, 0.3, 0.9);
    const double whole = quenched_mean_between(env, 0, 80, -50);
    for (Site m : {1, 17, 40, 79})
        CHECK(whole == Approx(quenched_mean_between(env, 0, m, -50) + quenched_mean_between(env, m, 80, -50))
                           .epsilon(1e-13));
    const double wholeVar = quenched_var_between(env, 0, 80, -50);
    CHECK(wholeVar == Approx(quenched_var_between(env, 0, 33, -50) + quenched_var_between(env, 33, 80, -50))
                          .epsilon(1e-13));
}

TEST_CASE("quenched mean of T_50 against simulation") {
    const auto env = testsupport::random_window(77, -200, 60, 0.35, 0.9);
    const Site barrier = -200;
    const double exact = quenched_mean_between(env, 0, 50, barrier);
    std::vector<double> ts;
    const int reps = 100000;
    ts.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        Rng rng = replica_rng(31, static_cast<std::uint64_t>(r));
        const auto h = simulate_hitting(env, 50, 1000000, rng, 0, barrier);
        REQUIRE_FALSE(h.censored);
        ts.push_back(static_cast<double>(h.T));
    }
    const auto m = sample_moments(ts);
    CHECK(std::abs(m.mean - exact) < 4.0 * m.meanSe);
}

TEST_CASE("unreflected mean reports its truncation") {
    const auto env = EnvironmentWindow::from_rho(-100, std::vector<double>(151, 1.0 / 3.0));
    const auto t = quenched_mean_unreflected(env, 10, -20, 0.5);
    CHECK(t.value + t.truncation == Approx(20.0).epsilon(1e-12));
    CHECK(t.truncation > 0.0);
    CHECK_THROWS(quenched_mean_unreflected(env, 10, 0, 0.5));
}

TEST_CASE("reflection depth b_n") {
    CHECK(b_n(10) == 5);
    CHECK(b_n(100) == 21);
    CHECK(b_n(1) == 0);
    CHECK(b_n(10000) == 84);
}

TEST_CASE("block moment invariants") {
    const auto dist = EnvDistribution::two_point(0.25);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto env = sample_window_Q(dist, seed, 300, 600);
        const auto lad = ladder_decompose(env, 0, 40);
        for (long i = 1; i <= 40; ++i) {
            BlockMoments prev;
            for (long b = 0; b <= 6; ++b) {
                const auto bm = block_moments(env, lad, i, b);
                if (b > 0) {
                    // b = 0 puts the barrier on nu_{i-1} itself, removing the rho that sets M.
                    REQUIRE(bm.mu >= bm.M);
                    REQUIRE(bm.sigma2 >= bm.M * bm.M);
                    REQUIRE(bm.mu >= prev.mu);
                    REQUIRE(bm.sigma2 >= prev.sigma2);
                }
                prev = bm;
            }
            // Unreflected (deepest available) values bound every reflected one.
            const double deep = quenched_mean_between(env, lad.nu[i - 1], lad.nu[i], env.lo() - 1);
            REQUIRE(deep >= prev.mu * (1 - 1e-14));
        }
    }
}

TEST_CASE("single-site block with a far field below 1") {
    const double r = 5.0;
    std::vector<double> rhos(40, 0.25);
    rhos[20] = r;
    rhos[21] = 0.1;  // r * 0.1 < 1 closes the block after two sites
    auto env = EnvironmentWindow::from_rho(-20, rhos);
    const auto lad = ladder_decompose(env, 0, 2);
    CHECK(lad.nu[1] == 2);
    const auto bm = block_moments(env, lad, 1, 3);
    CHECK(bm.M == r);
    CHECK(bm.mu >= r);
}

TEST_CASE("block moments against reflected crossings") {
    const auto dist = EnvDistribution::two_point(0.25);
    const auto env = sample_window_Q(dist, 5, 200, 400);
    const auto lad = ladder_decompose(env, 0, 30);
    long pick = 1;
    for (long i = 1; i <= 30; ++i)
        if (lad.M[i - 1] > lad.M[pick - 1]) pick = i;
    const auto bm = block_moments(env, lad, pick, 5);
    std::vector<double> ts;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        Rng rng = replica_rng(8, static_cast<std::uint64_t>(r));
        const auto h = simulate_crossing(env, bm.nuLeft, bm.nuRight, bm.barrier, 100000000, rng);
        REQUIRE_FALSE(h.censored);
        ts.push_back(static_cast<double>(h.T));
    }
    const auto m = sample_moments(ts);
    CHECK(std::abs(m.mean - bm.mu) < 4.0 * m.meanSe);
    CHECK(std::abs(m.var - bm.sigma2) < 4.0 * m.varSe);
}

TEST_CASE("block means add up to the reflected walk's expected time") {
    const auto dist = EnvDistribution::two_point(0.25);
    const auto env = sample_window_Q(dist, 21, 200, 400);
    const long blocks = 12, b = 3;
    const auto lad = ladder_decompose(env, 0, blocks);
    double total = 0.0;
    for (long i = 1; i <= blocks; ++i) total += block_moments(env, lad, i, b).mu;
    std::vector<double> ts;
    const int reps = 40000;
    for (int r = 0; r < reps; ++r) {
        Rng rng = replica_rng(12, static_cast<std::uint64_t>(r));
        const auto s = simulate_reflected(env, lad, lad.nu[blocks], b, 100000000, rng, ReflectionMode::Blocks);
        REQUIRE_FALSE(s.reflected.censored);
        ts.push_back(static_cast<double>(s.reflected.T));
    }
    const auto m = sample_moments(ts);
    CHECK(std::abs(m.mean - total) < 4.0 * m.meanSe);
}

TEST_CASE("block table CSV columns") {
    const auto dist = EnvDistribution::two_point(0.25);
    const auto env = sample_window_Q(dist, 3, 100, 200);
    const auto lad = ladder_decompose(env, 0, 5);
    std::ostringstream os;
    write_block_csv(os, all_block_moments(env, lad, 2));
    std::string header;
    std::istringstream is(os.str());
    std::getline(is, header);
    CHECK(header == "blockIndex,nuLeft,nuRight,M,mu,sigma2,reflectionDepth");
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("centering series") {
    SUBCASE("vanishes for a homogeneous environment") {
        const double p = 0.75, vP = 2 * p - 1;
        const auto env = constant(-800, 2000, p);
        const auto z = centering_Z(env, 1000, vP, {0.0, 0.5, 1.0, 2.0}, 0);
        for (double v : z.Z) CHECK(std::abs(v) < 1e-9);
        CHECK(z.Z[0] == 0.0);
    }
    SUBCASE("is small relative to n for the s = 3 family") {
        const auto dist = EnvDistribution::two_point(1.0 / 9.0);
        const double vP = solomon_classify(dist).speed;
        const double n = 1e5;
        const auto env = sample_window_P(dist, 4, -500, static_cast<Site>(n * vP) + 2);
        const auto z = centering_Z(env, n, vP, {0.0, 1.0}, 0);
        CHECK(z.Z[0] == 0.0);
        CHECK(std::abs(z.Z[1]) / n < 0.02);
    }
    CHECK_THROWS(centering_Z(constant(0, 10, 0.75), 5, 0.0, {1.0}, 0));
}

TEST_CASE("annealed step moments") {
    const auto hom = EnvDistribution::homogeneous(0.75);
    CHECK(annealed_step_mean(hom) == Approx(2.0).epsilon(1e-14));
    CHECK(annealed_step_variance(hom) == Approx(6.0).epsilon(1e-12));
    CHECK(std::isinf(annealed_step_mean(EnvDistribution::two_point(1.0 / 3.0))));
    CHECK(std::isinf(annealed_step_variance(EnvDistribution::two_point(0.2))));
    // alpha = 1/9: mean (1 + 2/3)/(1 - 2/3) = 5 = 1/vP.
    CHECK(annealed_step_mean(EnvDistribution::two_point(1.0 / 9.0)) == Approx(5.0).epsilon(1e-13));
}
