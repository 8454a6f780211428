#pragma once

#include <iosfwd>
#include <vector>

#include "rwre/env.hpp"

namespace rwre {

// Reflection depth floor((ln n)^2) used to decouple distant blocks.
long b_n(double n);

// How the reflecting barrier follows the walk.
//   Sites:  crossing j -> j+1 is computed with a barrier at j - depth.
//   Blocks: crossing of block i uses a barrier at nu_{i-1-b}.
enum class ReflectionMode { Sites, Blocks };
const char* to_string(ReflectionMode m);

struct HitProbabilities {
    double right = 0.0;  // P^x(T_j < T_i)
    double left = 0.0;   // P^x(T_i < T_j)
};

HitProbabilities hitting_prob(const EnvironmentWindow& env, Site i, Site x, Site j);

// Per-step mean and variance of the crossing times j -> j+1 for j in
// [from, to), with the environment modified so that omega = 1 at `barrier`.
struct StepMoments {
    std::vector<double> mean;
    std::vector<double> var;
};
StepMoments crossing_moments(const EnvironmentWindow& env, Site barrier, Site from, Site to);

// Sum of per-step moments over [from, to) with a fixed barrier.
double quenched_mean_between(const EnvironmentWindow& env, Site from, Site to, Site barrier);
double quenched_var_between(const EnvironmentWindow& env, Site from, Site to, Site barrier);

// E_omega T_n and Var_omega T_n from 0 where step j only sees `depth` sites
// to its left (barrier at j - depth). depth = 0 means "as deep as the window
// allows", i.e. a fixed barrier just left of the window.
double quenched_mean_T(const EnvironmentWindow& env, Site n, Site depth);
double quenched_var_T(const EnvironmentWindow& env, Site n, Site depth);

// Unreflected mean of T_n approximated by a barrier at `barrier` < 0, plus the
// exact size of the omitted term when W_{barrier-1} equals `wEstimate`.
struct TruncatedMean {
    double value = 0.0;
    double truncation = 0.0;
};
TruncatedMean quenched_mean_unreflected(const EnvironmentWindow& env, Site n, Site barrier, double wEstimate);

struct BlockMoments {
    long index = 0;
    Site nuLeft = 0;
    Site nuRight = 0;
    Site barrier = 0;
    double M = 0.0;
    double mu = 0.0;
    double sigma2 = 0.0;
    long reflectionDepth = 0;
};

BlockMoments block_moments(const EnvironmentWindow& env, const LadderDecomposition& ladder, long i, long b);
BlockMoments block_moments_n(const EnvironmentWindow& env, const LadderDecomposition& ladder, long i, double n);
std::vector<BlockMoments> all_block_moments(const EnvironmentWindow& env, const LadderDecomposition& ladder,
                                            long b);
void write_block_csv(std::ostream& os, const std::vector<BlockMoments>& rows);

// S(theta^j omega) = 1 + 2 W_j, with W_j truncated as in quenched_mean_T.
double s_bar(const EnvironmentWindow& env, Site j, Site depth);

struct CenteringSeries {
    std::vector<double> t;
    std::vector<double> Z;
    double vP = 0.0;
};
CenteringSeries centering_Z(const EnvironmentWindow& env, double n, double vP, const std::vector<double>& tGrid,
                            Site depth);

}  // namespace rwre

namespace rwre {

// E_P Var_omega tau_1 for an i.i.d. environment; finite only when E rho^2 < 1.
double annealed_step_variance(const EnvDistribution& dist);
// E_P E_omega tau_1 = (1 + E rho)/(1 - E rho); infinite when E rho >= 1.
double annealed_step_mean(const EnvDistribution& dist);

}  // namespace rwre
