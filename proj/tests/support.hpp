#pragma once

// Reference computations written independently of the library: dense linear
// solves of the first-step equations of the walk.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/rng.hpp"

namespace testsupport {

// P^x(T_j < T_i) for x = i..j, from h(x) = w_x h(x+1) + (1-w_x) h(x-1).
inline std::vector<double> hitting_dense(const rwre::EnvironmentWindow& env, rwre::Site i, rwre::Site j) {
    const auto n = static_cast<int>(j - i + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    A(0, 0) = 1.0;
    A(n - 1, n - 1) = 1.0;
    b(n - 1) = 1.0;
    for (int k = 1; k < n - 1; ++k) {
        const double w = env.omega(i + k);
        A(k, k) = 1.0;
        A(k, k + 1) = -w;
        A(k, k - 1) = -(1.0 - w);
    }
    const Eigen::VectorXd h = A.fullPivLu().solve(b);
    return {h.data(), h.data() + n};
}

struct TimeMoments {
    double mean = 0.0;
    double var = 0.0;
};

// Mean and variance of the hitting time of `target` from `start` for the walk
// that is pushed right at `barrier`, via first-step equations for the first
// and second moments on the states barrier..target-1.
inline TimeMoments hitting_time_dense(const rwre::EnvironmentWindow& env, rwre::Site barrier, rwre::Site start,
                                      rwre::Site target) {
    const auto n = static_cast<int>(target - barrier);
    auto w = [&](int k) { return k == 0 ? 1.0 : env.omega(barrier + k); };
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        A(k, k) = 1.0;
        if (k + 1 < n) A(k, k + 1) = -w(k);
        if (k > 0) A(k, k - 1) = -(1.0 - w(k));
    }
    const auto lu = A.fullPivLu();
    const Eigen::VectorXd m = lu.solve(Eigen::VectorXd::Ones(n));
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
        const double right = k + 1 < n ? m(k + 1) : 0.0;
        const double left = k > 0 ? m(k - 1) : 0.0;
        rhs(k) = 1.0 + 2.0 * (w(k) * right + (1.0 - w(k)) * left);
    }
    const Eigen::VectorXd s = lu.solve(rhs);
    const int k0 = static_cast<int>(start - barrier);
    return {m(k0), s(k0) - m(k0) * m(k0)};
}

// W_j truncated after `depth` terms, straight from the products.
inline double w_direct(const rwre::EnvironmentWindow& env, rwre::Site j, rwre::Site depth) {
    double sum = 0.0;
    for (rwre::Site i = j - depth + 1; i <= j; ++i) {
        double p = 1.0;
        for (rwre::Site k = i; k <= j; ++k) p *= env.rho(k);
        sum += p;
    }
    return sum;
}

inline rwre::EnvironmentWindow random_window(std::uint64_t seed, rwre::Site lo, rwre::Site hi, double a = 0.05,
                                             double b = 0.95) {
    std::vector<double> om;
    for (rwre::Site x = lo; x <= hi; ++x)
        om.push_back(a + (b - a) * rwre::to_unit(rwre::hash_combine(seed, 99, static_cast<std::uint64_t>(x))));
    return rwre::EnvironmentWindow(lo, std::move(om));
}

}  // namespace testsupport
