#include "rwre/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace rwre::oracle {

std::vector<double> harmonic_hitting(const EnvironmentWindow& env, Site i, Site j) {
    if (j <= i) throw std::invalid_argument("harmonic_hitting: need i < j");
    const auto n = static_cast<std::size_t>(j - i - 1);  // interior unknowns
    std::vector<double> h(static_cast<std::size_t>(j - i + 1), 0.0);
    h.back() = 1.0;
    if (n == 0) return h;
    // -(1-w) h(x-1) + h(x) - w h(x+1) = 0 for interior x.
    std::vector<long double> c(n), d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const long double w = env.omega(i + 1 + static_cast<Site>(k));
        const long double a = -(1.0L - w), b = 1.0L, cc = -w;
        const long double rhs = (k + 1 == n) ? w : 0.0L;  // h(j) = 1 moved to the right side
        if (k == 0) {
            c[k] = cc / b;
            d[k] = rhs / b;
        } else {
            const long double m = b - a * c[k - 1];
            c[k] = cc / m;
            d[k] = (rhs - a * d[k - 1]) / m;
        }
    }
    std::vector<long double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) x[k] = d[k] - c[k] * x[k + 1];
    for (std::size_t k = 0; k < n; ++k) h[k + 1] = static_cast<double>(x[k]);
    return h;
}

double second_moment_variance(const EnvironmentWindow& env, Site barrier, Site from, Site to) {
    if (from < barrier || to < from) throw std::invalid_argument("second_moment_variance: bad range");
    // S[k] = E^{barrier+k} tau_1, first-step analysis: S = (1 + (1-w) S_left) / w.
    const auto len = static_cast<std::size_t>(to - barrier);
    std::vector<long double> S(len), r(len);
    S[0] = 1.0L;
    r[0] = 0.0L;
    for (std::size_t k = 1; k < len; ++k) {
        const long double w = env.omega(barrier + static_cast<Site>(k));
        S[k] = (1.0L + (1.0L - w) * S[k - 1]) / w;
        r[k] = (1.0L - w) / w;
    }
    long double total = 0.0L;
    for (Site x = from; x < to; ++x) {
        const auto k = static_cast<std::size_t>(x - barrier);
        long double tail = 0.0L, pi = 1.0L;
        for (std::size_t n = 1; n <= k; ++n) {
            pi *= r[k - n + 1];  // Pi_{x-n+1, x}
            tail += pi * S[k - n] * S[k - n];
        }
        const long double second = 2.0L * S[k] * S[k] - S[k] + 2.0L * tail;
        total += second - S[k] * S[k];
    }
    return static_cast<double>(total);
}

}  // namespace rwre::oracle

namespace rwre::oracle {

double psi_boundary_value(int n, double lambda, double omega) {
    if (n < 1) throw std::invalid_argument("psi_boundary_value: n must be >= 1");
    const long double e = std::exp(static_cast<long double>(lambda));
    const long double a = -(1.0L - omega) * e, c = -omega * e;
    const auto N = static_cast<std::size_t>(n);  // unknowns psi(0..n-1)
    std::vector<long double> cp(N), dp(N);
    for (std::size_t k = 0; k < N; ++k) {
        const long double rhs = (k + 1 == N) ? omega * e : 0.0L;
        const long double m = k == 0 ? 1.0L : 1.0L - a * cp[k - 1];
        cp[k] = c / m;
        dp[k] = (rhs - (k == 0 ? 0.0L : a * dp[k - 1])) / m;
    }
    long double x = dp[N - 1];
    for (std::size_t k = N - 1; k-- > 0;) x = dp[k] - cp[k] * x;
    return static_cast<double>(x);
}

}  // namespace rwre::oracle
