#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "rwre/ldp.hpp"
#include "rwre/oracles.hpp"
#include "rwre/sim.hpp"

using namespace rwre;
using doctest::Approx;

namespace {

// E e^{lambda T_1} for the homogeneous walk from the first-passage law
// P(T_1 = 2k+1) = Catalan(k) p^{k+1} q^k, summed in log space.
double phi_series(double lambda, double p) {
    const double q = 1.0 - p;
    double sum = 0.0, logCat = 0.0;  // log Catalan(0) = 0
    for (int k = 0; k < 200000; ++k) {
        const double logTerm = logCat + (k + 1) * std::log(p) + k * std::log(q) + lambda * (2 * k + 1);
        const double term = std::exp(logTerm);
        sum += term;
        if (k > 50 && term < 1e-18 * sum) break;
        logCat += std::log(2.0 * (2 * k + 1)) - std::log(k + 2.0);
    }
    return sum;
}

// psi(0) from a dense solve of psi(x) = w e^l psi(x+1) + (1-w) e^l psi(x-1)
// on x = 0..n-1 with psi(-1) = 0 and psi(n) = 1.
double psi_dense(int n, double lambda, double w) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    const double up = w * std::exp(lambda), down = (1.0 - w) * std::exp(lambda);
    for (int x = 0; x < n; ++x) {
        if (x + 1 < n) A(x, x + 1) = -up; else b(x) = up;
        if (x > 0) A(x, x - 1) = -down;
    }
    return A.fullPivLu().solve(b)(0);
}

std::shared_ptr<EmpiricalLogMgf> point_mass() {
    return std::make_shared<EmpiricalLogMgf>(std::vector<Vec>{{1.0, 1.0}}, std::vector<double>{1.0});
}

}  // namespace

TEST_CASE("critical exponent") {
    CHECK(lambda_bar(0.5) == 0.0);
    CHECK(lambda_bar(0.75) == Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-14));
    CHECK(std::abs(lambda_bar(0.75) - 0.14384) < 1e-5);
    for (double w : {0.1, 0.3, 0.45, 0.6}) CHECK(lambda_bar(w) == Approx(lambda_bar(1.0 - w)).epsilon(1e-14));
    CHECK_THROWS(lambda_bar(1.0));
}

TEST_CASE("hitting-time MGF closed form") {
    CHECK(mgf_phi(0.0, 0.75) == Approx(1.0).epsilon(1e-14));
    CHECK(mgf_phi(lambda_bar(0.75), 0.75) == Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(std::isinf(mgf_phi(lambda_bar(0.75) + 1e-9, 0.75)));
    for (double w : {0.6, 0.75, 0.9})
        for (double l : {-2.0, -0.5, 0.0, 0.5 * lambda_bar(w), 0.9 * lambda_bar(w)})
            CHECK(mgf_phi(l, w) == Approx(phi_series(l, w)).epsilon(1e-10));
    // phi(lambda_bar) = rho_max^{-1/2}
    for (double w : {0.6, 0.9}) CHECK(mgf_phi(lambda_bar(w), w) == Approx(std::sqrt(w / (1 - w))).epsilon(1e-13));
}

TEST_CASE("conditioned MGF") {
    const double w = 0.75, r = 1.0 / 3.0;
    for (int n : {1, 3, 10})
        CHECK(conditioned_mgf_psi(n, 0.0, w) == Approx((1 - r) / (1 - std::pow(r, n + 1))).epsilon(1e-13));
    for (double l : {-1.0, 0.0, 0.1, lambda_bar(w)}) {
        const double f = mgf_phi(l, w);
        CHECK(conditioned_mgf_psi(1, l, w) == Approx(f / (1 + r * f * f)).epsilon(1e-13));
    }
    CHECK(std::abs(conditioned_mgf_psi(5, 0.05, w) - psi_dense(5, 0.05, w)) < 1e-10);
    CHECK(std::abs(conditioned_mgf_psi(5, 0.05, w) - oracle::psi_boundary_value(5, 0.05, w)) < 1e-10);
    CHECK_THROWS(conditioned_mgf_psi(5, lambda_bar(w) + 0.01, w));
    // Dropping the paths that visit -1 can only lower the MGF.
    for (int n = 1; n <= 12; ++n)
        for (double l = -1.0; l <= lambda_bar(w); l += 0.07)
            CHECK(conditioned_mgf_psi(n, l, w) <= std::pow(mgf_phi(l, w), n) * (1 + 1e-14));
}

TEST_CASE("rate r(t) closed form") {
    for (double t : {1.5, 2.0, 5.0}) CHECK(std::abs(rate_r(t, 0.75) - rate_r_numeric(t, 0.75)) < 1e-8);
    CHECK(std::abs(rate_r(100.0, 0.75) / 100.0 - lambda_bar(0.75)) < 0.01);
    CHECK_THROWS(rate_r(1.0, 0.75));
    // r vanishes at the mean passage time 1/(2w-1) and grows beyond it.
    CHECK(std::abs(rate_r(2.0, 0.75)) < 1e-12);
    for (double t = 2.1; t < 30; t += 0.5) CHECK(rate_r(t + 0.5, 0.75) > rate_r(t, 0.75));
}

TEST_CASE("rate r(t) for the symmetric floor") {
    auto closed = [](double t) { return 0.5 * t * std::log(1 - 1 / (t * t)) - 0.5 * std::log((t - 1) / (t + 1)); };
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 1.1; t < 2000; t *= 1.3) {
        const double r = rate_r(t, 0.5);
        CHECK(r == Approx(closed(t)).epsilon(1e-12));
        CHECK(r < prev);
        CHECK(r > 0.0);
        prev = r;
    }
    CHECK(rate_r(1e6, 0.5) < 1e-5);
}

TEST_CASE("empirical log-MGF basics") {
    const auto pm = point_mass();
    const auto g = estimate_log_mgf(pm, {{0.0, 0.0}, {0.3, -0.2}, {-1.0, 2.0}});
    CHECK(g.values[0] == 0.0);
    CHECK(g.values[1] == Approx(0.1).epsilon(1e-14));
    CHECK(g.values[2] == Approx(1.0).epsilon(1e-14));

    RegenerationRecord rec;
    rec.dim = 1;
    rec.ell = {1};
    for (int k = 0; k < 1000; ++k) {
        rec.displacement.push_back(1 + k % 3);
        rec.duration.push_back(1 + k % 3 + 2 * (k % 5));
    }
    const auto g2 = estimate_log_mgf(rec, {{0.0, 0.0}});
    CHECK(g2.values[0] == 0.0);
    CHECK(g2.sampleCount == 1000);
}

TEST_CASE("heavy summands are flagged") {
    std::vector<Vec> pts;
    std::vector<double> w;
    for (int k = 0; k < 1000; ++k) {
        pts.push_back({1.0, static_cast<double>(1 + (k == 0 ? 200 : k % 4))});
        w.push_back(1.0);
    }
    const auto src = std::make_shared<EmpiricalLogMgf>(pts, w);
    const auto g = estimate_log_mgf(src, {{0.0, 0.0}, {0.0, 0.2}});
    CHECK(g.stable[0]);
    CHECK_FALSE(g.stable[1]);
    // Far out the value stays finite (max-shifted sum) and carries the flag.
    const auto far = estimate_log_mgf(src, {{0.0, 20.0}});
    CHECK(std::isfinite(far.values[0]));
    CHECK_FALSE(far.stable[0]);
}

TEST_CASE("Legendre conjugate") {
    SUBCASE("point mass: zero at the atom, infinite elsewhere") {
        const auto g = estimate_log_mgf(point_mass(), {{0.0, 0.0}});
        const LambdaBox box{{-3, -3}, {3, 3}, 11};
        CHECK(std::abs(legendre_conjugate(g, box, {1.0, 1.0}).value) < 1e-9);
        const auto off = legendre_conjugate(g, box, {0.5, 1.0});
        CHECK(off.infinite);
        CHECK(std::isinf(off.value));
    }
    SUBCASE("quadratic is self-conjugate") {
        auto q = [](const Vec& l) { return 0.5 * (l[0] * l[0] + l[1] * l[1]); };
        const LambdaBox box{{-4, -4}, {4, 4}, 9};
        for (const Vec& z : std::vector<Vec>{{0, 0}, {1, -0.5}, {2.5, 1.5}, {-3, 0.2}}) {
            const auto r = legendre_conjugate(q, box, z);
            CHECK(r.value == Approx(0.5 * (z[0] * z[0] + z[1] * z[1])).epsilon(1e-8));
            CHECK_FALSE(r.boundary);
        }
        const auto edge = legendre_conjugate(q, box, {6.0, 0.0});
        CHECK(edge.boundary);
        CHECK(edge.value <= 18.0);
    }
    SUBCASE("zero at the empirical mean and non-negative elsewhere") {
        const auto rec = harvest_regenerations(EnvDistribution::homogeneous(0.75), 1, 20000, 3).record;
        const auto src = std::make_shared<EmpiricalLogMgf>(rec);
        const auto g = estimate_log_mgf(src, {{0.0, 0.0}});
        const LambdaBox box{{-3, -2}, {3, 2}, 13};
        CHECK(std::abs(legendre_conjugate(g, box, src->mean()).value) < 1e-3);
        for (double x : {1.0, 2.0, 4.0})
            for (double t : {2.0, 4.0, 8.0, 16.0}) {
                const auto r = legendre_conjugate(g, box, {x, t});
                if (!r.infinite) CHECK(r.value >= -1e-12);
            }
    }
}

TEST_CASE("conjugating twice returns the convex function") {
    // Lambda(l) = log E e^{l . z} for a three-point law, known exactly.
    const std::vector<Vec> pts = {{1, 1}, {1, 3}, {3, 5}};
    const std::vector<double> w = {0.5, 0.3, 0.2};
    auto Lambda = [&](const Vec& l) {
        double s = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) s += w[i] * std::exp(l[0] * pts[i][0] + l[1] * pts[i][1]);
        return std::log(s);
    };
    const LambdaBox lamBox{{-6, -6}, {6, 6}, 13};
    // I on a z-grid inside the hull, then sup_z l.z - I(z) at a few interior l.
    std::vector<Vec> zs;
    std::vector<double> Is;
    for (double x = 1.0; x <= 3.0; x += 0.05)
        for (double t = 1.0; t <= 5.0; t += 0.05) {
            const EmpiricalLogMgf src(pts, w);
            if (!src.in_hull({x, t})) continue;
            const auto r = legendre_conjugate(Lambda, lamBox, {x, t});
            if (r.boundary) continue;
            zs.push_back({x, t});
            Is.push_back(r.value);
        }
    REQUIRE(zs.size() > 200);
    for (const Vec& l : std::vector<Vec>{{0.0, 0.0}, {0.3, -0.2}, {-0.4, 0.1}}) {
        double best = -1e300;
        for (std::size_t k = 0; k < zs.size(); ++k) best = std::max(best, l[0] * zs[k][0] + l[1] * zs[k][1] - Is[k]);
        CHECK(std::abs(best - Lambda(l)) < 0.02);
    }
}

TEST_CASE("projected rate function") {
    const double p = 0.75;
    const auto rec = harvest_regenerations(EnvDistribution::homogeneous(p), 1, 200000, 5).record;
    const EmpiricalLogMgf src(rec);
    const LambdaBox box{{-3, -2}, {6, 2}, 13};
    const double vHat = rec.speed_estimate();
    CHECK(jbar(src, box, vHat).value < 2e-3);
    CHECK_THROWS(jbar(src, box, 0.0));
    CHECK_THROWS(jbar(src, box, -0.3));

    Vec grid;
    for (int i = 0; i <= 8; ++i) grid.push_back(0.3 + 0.05 * i);
    const auto table = rate_table(src, box, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(table.Jbar[i] >= -1e-12);
        CHECK(std::abs(table.Jbar[i] - cramer_rate(grid[i], p)) < 0.02);
        CHECK(table.sStar[i] > 0.0);
        CHECK(table.sStar[i] <= 1.0);
    }
    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
        CHECK(table.Jbar[i + 1] - 2 * table.Jbar[i] + table.Jbar[i - 1] >= -1e-6);

    std::ostringstream os;
    write_rate_csv(os, table);
    CHECK(os.str().rfind("v,Jbar,sStar,lambdaStar_x,lambdaStar_t,boundary\n", 0) == 0);
}

TEST_CASE("Cramer rate") {
    CHECK(cramer_rate(0.5, 0.75) == Approx(0.0).epsilon(1e-15));
    CHECK(cramer_rate(1.0, 0.75) == Approx(-std::log(0.75)).epsilon(1e-14));
    CHECK(cramer_rate(0.0, 0.75) == Approx(-0.5 * std::log(4 * 0.75 * 0.25)).epsilon(1e-14));
    CHECK_THROWS(cramer_rate(1.5, 0.75));
}

TEST_CASE("log-MGF is midpoint convex along the axes") {
    const auto rec = harvest_regenerations(EnvDistribution::two_point(0.2), 1, 20000, 9).record;
    const auto src = std::make_shared<EmpiricalLogMgf>(rec);
    const double tol = 3.0 / std::sqrt(static_cast<double>(src->sample_count()));
    for (double a = -1.0; a <= 1.0; a += 0.25)
        for (double t = -0.5; t <= 0.0; t += 0.05) {
            const double l = src->value({a, t - 0.05}), m = src->value({a, t}), r = src->value({a, t + 0.05});
            CHECK(m <= 0.5 * (l + r) + tol);
            const double lx = src->value({a - 0.25, t}), rx = src->value({a + 0.25, t});
            CHECK(m <= 0.5 * (lx + rx) + tol);
        }
}
