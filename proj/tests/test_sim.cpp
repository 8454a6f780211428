#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "rwre/experiments.hpp"
#include "rwre/quenched.hpp"
#include "rwre/sim.hpp"

using namespace rwre;

namespace {

EnvironmentWindow constant(Site lo, Site hi, double w) {
    return EnvironmentWindow(lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), w));
}

PathSample path_of(const std::vector<std::int64_t>& xs) {
    PathSample p;
    p.dim = 1;
    p.coords = xs;
    return p;
}

double lag1(const std::vector<std::int64_t>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (auto x : v) m += static_cast<double>(x);
    m /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = static_cast<double>(v[i]) - m;
        den += d * d;
        if (i + 1 < v.size()) num += d * (static_cast<double>(v[i + 1]) - m);
    }
    return num / den;
}

}  // namespace

TEST_CASE("hitting a target in a deterministic environment") {
    const auto env = constant(-3, 10, 1.0);
    Rng rng(1);
    const auto h = simulate_hitting(env, 5, 100, rng);
    CHECK(h.T == 5);
    CHECK_FALSE(h.censored);
    CHECK_THROWS(simulate_hitting(env, 0, 100, rng));
    CHECK_THROWS(simulate_hitting(env, 5, 4, rng));
}

TEST_CASE("one-step hitting time of the biased walk") {
    const auto env = constant(-400, 5, 0.75);
    const int reps = 100000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    std::vector<double> ts(reps);
    for (int r = 0; r < reps; ++r) {
        Rng rng = replica_rng(2, static_cast<std::uint64_t>(r));
        const auto h = simulate_hitting(env, 1, 1000000, rng);
        REQUIRE_FALSE(h.censored);
        ts[static_cast<std::size_t>(r)] = static_cast<double>(h.T);
        s += ts[static_cast<std::size_t>(r)];
    }
    const double mean = s / reps;
    for (double t : ts) {
        const double d = (t - mean) * (t - mean);
        s2 += d;
        s4 += d * d;
    }
    const double var = s2 / (reps - 1);
    const double varSe = std::sqrt((s4 / reps - var * var) / reps);
    CHECK(std::abs(mean - 2.0) < 4.0 * std::sqrt(var / reps));
    CHECK(std::abs(var - 6.0) < 4.0 * varSe);
}

TEST_CASE("hitting times respect lattice parity") {
    const auto dist = EnvDistribution::two_point(0.2);
    const auto env = sample_window_P(dist, 3, -500, 200);
    for (int r = 0; r < 2000; ++r) {
        Rng rng = replica_rng(4, static_cast<std::uint64_t>(r));
        const Site target = 1 + r % 37;
        const auto h = simulate_hitting(env, target, 100000000, rng);
        REQUIRE_FALSE(h.censored);
        REQUIRE(h.T >= target);
        REQUIRE((h.T - target) % 2 == 0);
    }
}

TEST_CASE("censoring instead of failure") {
    const auto env = constant(-1000, 1000, 0.3);
    Rng rng(5);
    const auto h = simulate_hitting(env, 50, 60, rng);
    CHECK(h.censored);
    CHECK(h.T == 60);
}

TEST_CASE("reflected walk in a deterministic environment") {
    const auto env = constant(-50, 200, 1.0);
    LadderDecomposition lad;
    lad.nu.resize(101);
    for (std::size_t i = 0; i <= 100; ++i) lad.nu[i] = static_cast<Site>(i);
    lad.M.assign(100, 0.0);
    lad.blockCount = 100;
    lad.leftNu = {-1, -2, -3};
    Rng rng(6);
    const auto s = simulate_reflected(env, lad, 40, 3, 1000, rng);
    CHECK(s.plain.T == 40);
    CHECK(s.reflected.T == 40);
    CHECK(s.coupledEqual);
}

TEST_CASE("coupling never lets the reflected walk lose") {
    const auto dist = EnvDistribution::two_point(0.2);
    const auto env = sample_window_Q(dist, 9, 2000, 3000);
    const auto lad = ladder_decompose(env, 0, 1500);
    REQUIRE(lad.nu.back() > 1000);
    auto mismatch_rate = [&](Site n, int reps) {
        const long b = b_n(static_cast<double>(n));
        int differ = 0;
        for (int r = 0; r < reps; ++r) {
            Rng rng = replica_rng(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r));
            for (auto mode : {ReflectionMode::Blocks, ReflectionMode::Sites}) {
                const auto s = simulate_reflected(env, lad, n, b, 1000000000, rng, mode);
                REQUIRE_FALSE(s.plain.censored);
                REQUIRE(s.reflected.T <= s.plain.T);
                if (s.coupledEqual) REQUIRE(s.reflected.T == s.plain.T);
                if (mode == ReflectionMode::Blocks) differ += s.plain.T != s.reflected.T;
            }
        }
        return static_cast<double>(differ) / reps;
    };
    const double small = mismatch_rate(30, 10000);
    const double large = mismatch_rate(1000, 10000);
    CHECK(large < 0.05);
    CHECK(large <= small);
}

TEST_CASE("regeneration extraction examples") {
    SUBCASE("strictly increasing path") {
        const auto rec = extract_regenerations(path_of({0, 1, 2, 3, 4, 5}), {1});
        REQUIRE(rec.size() == 5);
        for (std::size_t k = 0; k < rec.size(); ++k) {
            CHECK(rec.duration[k] == 1);
            CHECK(rec.disp(k) == 1);
        }
        CHECK(rec.lastProvisional);
    }
    SUBCASE("one backtrack") {
        const auto rec = extract_regenerations(path_of({0, 1, 0, 1, 2, 3, 4}), {1});
        REQUIRE(rec.size() >= 1);
        CHECK(rec.duration[0] == 4);
        CHECK(rec.disp(0) == 2);
    }
    SUBCASE("two-dimensional path along e1") {
        PathSample p;
        p.dim = 2;
        for (int t = 0; t <= 8; ++t) {
            p.coords.push_back(t);
            p.coords.push_back(0);
        }
        const auto rec = extract_regenerations(p, {1, 0});
        REQUIRE(rec.size() == 8);
        for (std::size_t k = 0; k < rec.size(); ++k) {
            CHECK(rec.disp(k, 0) == 1);
            CHECK(rec.disp(k, 1) == 0);
            CHECK(rec.duration[k] == 1);
        }
    }
    SUBCASE("no regeneration") {
        CHECK_THROWS(extract_regenerations(path_of({0, -1, -2, -3}), {1}));
    }
}

TEST_CASE("regeneration increments from simulated paths obey their invariants") {
    const auto dist = EnvDistribution::two_point(0.2);
    const auto env = sample_window_P(dist, 12, -2000, 60000);
    Rng rng(13);
    const auto path = simulate_path_1d(env, 200000, rng);
    for (std::size_t t = 1; t <= path.steps(); ++t) REQUIRE(std::llabs(path.at(t) - path.at(t - 1)) == 1);
    const auto rec = extract_regenerations(path, {1});
    REQUIRE(rec.size() > 100);
    for (std::size_t k = 0; k < rec.size(); ++k) {
        REQUIRE(rec.duration[k] >= 1);
        REQUIRE(rec.disp(k) > 0);
        REQUIRE(rec.disp(k) <= rec.duration[k]);
    }
}

TEST_CASE("walks on Z^d") {
    SUBCASE("deterministic drift is a straight line") {
        const DistDD dist(2, {{{1.0, 0.0, 0.0, 0.0}, 1.0}});
        const auto p = simulate_walk_dD(dist, 1, 100);
        for (std::size_t t = 0; t <= 100; ++t) {
            CHECK(p.at(t, 0) == static_cast<std::int64_t>(t));
            CHECK(p.at(t, 1) == 0);
        }
    }
    SUBCASE("symmetric law has no drift") {
        const DistDD dist(2, {{{0.25, 0.25, 0.25, 0.25}, 1.0}});
        const std::int64_t n = 1000000;
        const auto p = simulate_walk_dD(dist, 2, n);
        const double sd = std::sqrt(static_cast<double>(n) / 2.0);
        CHECK(std::abs(static_cast<double>(p.at(static_cast<std::size_t>(n), 0))) < 4.0 * sd);
        CHECK(std::abs(static_cast<double>(p.at(static_cast<std::size_t>(n), 1))) < 4.0 * sd);
    }
    SUBCASE("non-nestling law keeps its minimal drift") {
        // Local drift along e1 is 0.3 or 0.1; epsilon = 0.1.
        const DistDD dist(2, {{{0.4, 0.1, 0.25, 0.25}, 0.5}, {{0.35, 0.25, 0.2, 0.2}, 0.5}});
        const std::int64_t n = 1000000;
        const auto p = simulate_walk_dD(dist, 3, n);
        CHECK(static_cast<double>(p.at(static_cast<std::size_t>(n), 0)) / static_cast<double>(n) >= 0.1 * 0.9);
        const auto rec = extract_regenerations(p, {1, 0});
        REQUIRE(rec.size() > 10);
        for (std::size_t k = 0; k < rec.size(); ++k) {
            REQUIRE(rec.disp(k, 0) > 0);
            REQUIRE(std::llabs(rec.disp(k, 0)) + std::llabs(rec.disp(k, 1)) <= rec.duration[k]);
        }
    }
    SUBCASE("unnormalized site law is rejected") {
        CHECK_THROWS(DistDD(2, {{{0.5, 0.5, 0.5, 0.0}, 1.0}}));
        CHECK_THROWS(DistDD::from_json(nlohmann::json::parse(R"({"dim":1,"laws":[{"probs":[0.7,0.7]}]})")));
    }
}

TEST_CASE("harvested regeneration speed") {
    SUBCASE("two-point family with s = 2") {
        const auto res = harvest_regenerations(EnvDistribution::two_point(0.2), 1, 100000, 17);
        REQUIRE(res.record.size() == 100000);
        CHECK(std::abs(res.record.speed_estimate() / (1.0 / 9.0) - 1.0) < 0.03);
        CHECK(std::abs(lag1(res.record.duration)) < 4.0 / std::sqrt(100000.0));
    }
    SUBCASE("homogeneous p = 3/4") {
        const auto res = harvest_regenerations(EnvDistribution::homogeneous(0.75), 1, 100000, 18);
        CHECK(std::abs(res.record.speed_estimate() / 0.5 - 1.0) < 0.02);
    }
    SUBCASE("walk moving left") {
        const auto res = harvest_regenerations(EnvDistribution::homogeneous(0.25), -1, 20000, 19);
        for (std::size_t k = 0; k < res.record.size(); ++k) REQUIRE(res.record.disp(k) < 0);
        CHECK(std::abs(res.record.speed_estimate() / 0.5 - 1.0) < 0.05);
    }
}

TEST_CASE("harvest in an environment that always steps right") {
    // omega = 1 is not an admissible (elliptic) law, so this case goes through
    // the path extractor that the harvester feeds: every increment is (1, 1).
    const auto env = constant(-2, 200, 1.0);
    Rng rng(1);
    const auto rec = extract_regenerations(simulate_path_1d(env, 100, rng), {1});
    CHECK(rec.size() == 100);
    CHECK(rec.speed_estimate() == 1.0);
}

TEST_CASE("harvest does not depend on the thread count") {
    const auto dist = EnvDistribution::two_point(0.2);
    HarvestOptions one, four;
    four.threads = 4;
    const auto a = harvest_regenerations(dist, 1, 5000, 23, one);
    const auto b = harvest_regenerations(dist, 1, 5000, 23, four);
    CHECK(a.record.duration == b.record.duration);
    CHECK(a.record.displacement == b.record.displacement);
    CHECK(a.chunks == b.chunks);
}

TEST_CASE("sample files carry a header and round trip") {
    std::vector<HittingSample> xs = {{10, 12, false}, {10, 100, true}, {10, 10, false}};
    std::ostringstream bin;
    write_samples_binary(bin, "abc123", 77, xs);
    std::istringstream in(bin.str());
    std::string header;
    const auto back = read_samples_binary(in, &header);
    CHECK(header == "# configHash=abc123 masterSeed=77");
    REQUIRE(back.size() == xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(back[i].T == xs[i].T);
        CHECK(back[i].censored == xs[i].censored);
    }
    CHECK(bin.str().size() == header.size() + 1 + 24 * xs.size());

    std::ostringstream csv;
    write_samples_csv(csv, "abc123", 77, xs);
    CHECK(csv.str().rfind("# configHash=abc123 masterSeed=77\nreplica,value,censored\n0,12,0\n", 0) == 0);

    std::istringstream bad("no header\n");
    CHECK_THROWS(read_samples_binary(bad));
}
