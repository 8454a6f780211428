#include "rwre/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <limits>
#include <stdexcept>

namespace rwre {

namespace {

struct Kahan {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

void require_window(const EnvironmentWindow& env, Site a, Site b, const char* who) {
    if (a > b) return;
    if (!env.contains(a) || !env.contains(b))
        throw std::out_of_range(std::string(who) + ": insufficient window");
}

}  // namespace

long b_n(double n) {
    if (!(n >= 1.0)) throw std::invalid_argument("b_n: n must be >= 1");
    const double l = std::log(n);
    return static_cast<long>(std::floor(l * l));
}

const char* to_string(ReflectionMode m) { return m == ReflectionMode::Sites ? "sites" : "blocks"; }

HitProbabilities hitting_prob(const EnvironmentWindow& env, Site i, Site x, Site j) {
    if (!(i <= x && x <= j) || i == j) throw std::invalid_argument("hitting_prob: need i <= x <= j and i < j");
    require_window(env, i + 1, j - 1, "hitting_prob");
    // Sums of Pi_{i+1,m}; the common factor rho_i of the R-sums cancels.
    Kahan below, above;
    double term = 1.0;
    for (Site m = i; m <= j - 1; ++m) {
        if (m > i) term *= env.rho(m);
        (m < x ? below : above).add(term);
    }
    const double total = below.sum + above.sum;
    return {below.sum / total, above.sum / total};
}

StepMoments crossing_moments(const EnvironmentWindow& env, Site barrier, Site from, Site to) {
    if (from < barrier) throw std::invalid_argument("crossing_moments: start left of barrier");
    if (to < from) throw std::invalid_argument("crossing_moments: to < from");
    require_window(env, barrier + 1, to - 1, "crossing_moments");
    StepMoments out;
    out.mean.reserve(static_cast<std::size_t>(to - from));
    out.var.reserve(static_cast<std::size_t>(to - from));
    // W_l = rho_l (1 + W_{l-1}),  V_l = rho_l (V_{l-1} + W_{l-1} + W_{l-1}^2),
    // both zero at the barrier where rho = 0.
    double W = 0.0, V = 0.0;
    for (Site l = barrier; l < to; ++l) {
        if (l > barrier) {
            const double r = env.rho(l);
            const double Vn = r * (V + W + W * W);
            W = r * (1.0 + W);
            V = Vn;
        }
        if (l >= from) {
            out.mean.push_back(1.0 + 2.0 * W);
            out.var.push_back(4.0 * (W + W * W) + 8.0 * V);
        }
    }
    return out;
}

double quenched_mean_between(const EnvironmentWindow& env, Site from, Site to, Site barrier) {
    Kahan k;
    for (double m : crossing_moments(env, barrier, from, to).mean) k.add(m);
    return k.sum;
}

double quenched_var_between(const EnvironmentWindow& env, Site from, Site to, Site barrier) {
    Kahan k;
    for (double v : crossing_moments(env, barrier, from, to).var) k.add(v);
    return k.sum;
}

namespace {

template <typename Pick>
double trailing_sum(const EnvironmentWindow& env, Site n, Site depth, Pick pick) {
    if (n < 0) throw std::invalid_argument("quenched moments: n must be non-negative");
    if (depth < 0) throw std::invalid_argument("quenched moments: depth must be non-negative");
    if (n == 0) return 0.0;
    if (depth == 0) {
        Kahan k;
        const StepMoments sm = crossing_moments(env, env.lo() - 1, 0, n);
        for (double v : pick(sm)) k.add(v);
        return k.sum;
    }
    require_window(env, -depth + 1, n - 1, "quenched moments");
    Kahan k;
    for (Site j = 0; j < n; ++j) k.add(pick(crossing_moments(env, j - depth, j, j + 1))[0]);
    return k.sum;
}

}  // namespace

double quenched_mean_T(const EnvironmentWindow& env, Site n, Site depth) {
    return trailing_sum(env, n, depth, [](const StepMoments& s) -> const std::vector<double>& { return s.mean; });
}

double quenched_var_T(const EnvironmentWindow& env, Site n, Site depth) {
    return trailing_sum(env, n, depth, [](const StepMoments& s) -> const std::vector<double>& { return s.var; });
}

TruncatedMean quenched_mean_unreflected(const EnvironmentWindow& env, Site n, Site barrier, double wEstimate) {
    if (barrier >= 0) throw std::invalid_argument("quenched_mean_unreflected: barrier must be negative");
    TruncatedMean out;
    out.value = quenched_mean_between(env, 0, n, barrier);
    // E T_n - E Tbar_n = 2 (1 + W_{r-1}) Pi_{r,-1} R_{0,n-1}
    out.truncation = 2.0 * (1.0 + wEstimate) * pi_product(env, barrier, -1) * r_sum(env, 0, n - 1);
    return out;
}

BlockMoments block_moments(const EnvironmentWindow& env, const LadderDecomposition& ladder, long i, long b) {
    if (i < 1 || static_cast<std::size_t>(i) > ladder.blockCount)
        throw std::out_of_range("block_moments: block index out of range");
    if (b < 0) throw std::invalid_argument("block_moments: negative reflection depth");
    BlockMoments bm;
    bm.index = i;
    bm.nuLeft = ladder.nu_at(i - 1);
    bm.nuRight = ladder.nu_at(i);
    bm.barrier = ladder.nu_at(i - 1 - b);  // throws on insufficient ladder context
    bm.M = ladder.M[static_cast<std::size_t>(i - 1)];
    bm.reflectionDepth = b;
    const StepMoments sm = crossing_moments(env, bm.barrier, bm.nuLeft, bm.nuRight);
    Kahan mu, var;
    for (std::size_t k = 0; k < sm.mean.size(); ++k) {
        mu.add(sm.mean[k]);
        var.add(sm.var[k]);
    }
    bm.mu = mu.sum;
    bm.sigma2 = var.sum;
    return bm;
}

BlockMoments block_moments_n(const EnvironmentWindow& env, const LadderDecomposition& ladder, long i, double n) {
    return block_moments(env, ladder, i, b_n(n));
}

std::vector<BlockMoments> all_block_moments(const EnvironmentWindow& env, const LadderDecomposition& ladder, long b) {
    std::vector<BlockMoments> out;
    out.reserve(ladder.blockCount);
    for (long i = 1; i <= static_cast<long>(ladder.blockCount); ++i) out.push_back(block_moments(env, ladder, i, b));
    return out;
}

void write_block_csv(std::ostream& os, const std::vector<BlockMoments>& rows) {
    os << "blockIndex,nuLeft,nuRight,M,mu,sigma2,reflectionDepth\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.index << ',' << r.nuLeft << ',' << r.nuRight << ',' << r.M << ',' << r.mu << ',' << r.sigma2 << ','
           << r.reflectionDepth << '\n';
}

double s_bar(const EnvironmentWindow& env, Site j, Site depth) {
    const Site barrier = depth == 0 ? env.lo() - 1 : j - depth;
    return crossing_moments(env, barrier, j, j + 1).mean[0];
}

CenteringSeries centering_Z(const EnvironmentWindow& env, double n, double vP, const std::vector<double>& tGrid,
                            Site depth) {
    if (!(vP > 0.0)) throw std::invalid_argument("centering_Z: vP must be positive");
    CenteringSeries out;
    out.vP = vP;
    out.t = tGrid;
    double tMax = 0.0;
    for (double t : tGrid) {
        if (t < 0.0) throw std::invalid_argument("centering_Z: negative t");
        tMax = std::max(tMax, t);
    }
    const auto top = static_cast<Site>(std::floor(n * tMax * vP));
    // Summands for j = 1..top, then prefix sums read off at each grid point.
    std::vector<double> prefix(static_cast<std::size_t>(top) + 1, 0.0);
    if (top >= 1) {
        std::vector<double> sb;
        if (depth == 0) {
            sb = crossing_moments(env, env.lo() - 1, 1, top + 1).mean;
        } else {
            require_window(env, 1 - depth + 1, top, "centering_Z");
            sb.reserve(static_cast<std::size_t>(top));
            for (Site j = 1; j <= top; ++j) sb.push_back(s_bar(env, j, depth));
        }
        Kahan k;
        for (Site j = 1; j <= top; ++j) {
            k.add(vP * sb[static_cast<std::size_t>(j - 1)] - 1.0);
            prefix[static_cast<std::size_t>(j)] = k.sum;
        }
    }
    for (double t : tGrid) out.Z.push_back(prefix[static_cast<std::size_t>(std::floor(n * t * vP))]);
    return out;
}

}  // namespace rwre

namespace rwre {

double annealed_step_mean(const EnvDistribution& dist) {
    const double m = dist.mean_rho();
    if (!(m < 1.0)) return std::numeric_limits<double>::infinity();
    return (1.0 + m) / (1.0 - m);
}

double annealed_step_variance(const EnvDistribution& dist) {
    // W = rho (1 + W') with W' an independent copy, so
    // E W = m/(1-m) and E W^2 = m2 (1 + 2 E W) / (1 - m2).
    const double m = dist.mean_rho();
    const double m2 = dist.rho_moment(2.0);
    if (!(m2 < 1.0)) return std::numeric_limits<double>::infinity();
    const double ew = m / (1.0 - m);
    const double ew2 = m2 * (1.0 + 2.0 * ew) / (1.0 - m2);
    return 4.0 * (ew + ew2) * (1.0 + m) / (1.0 - m);
}

}  // namespace rwre
