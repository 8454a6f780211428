#pragma once

#include <vector>

#include "rwre/env.hpp"

// Independent reference computations used by the exact-check experiment.
namespace rwre::oracle {

// h(x) = P^x(T_j < T_i) for x in [i, j] from the harmonic equations
// h(x) = omega_x h(x+1) + (1-omega_x) h(x-1), h(i) = 0, h(j) = 1,
// solved by tridiagonal elimination.
std::vector<double> harmonic_hitting(const EnvironmentWindow& env, Site i, Site j);

// Variance of T_to - T_from for the walk reflected at `barrier`, via the
// second-moment identity E tau^2 = 2 S^2 - S + 2 sum_k Pi S_{shifted}^2,
// where S is built by first-step analysis rather than from W-sums.
double second_moment_variance(const EnvironmentWindow& env, Site barrier, Site from, Site to);

}  // namespace rwre::oracle

namespace rwre::oracle {

// psi(0) for psi(x) = w e^l psi(x+1) + (1-w) e^l psi(x-1), psi(-1) = 0, psi(n) = 1.
double psi_boundary_value(int n, double lambda, double omega);

}  // namespace rwre::oracle
