#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/env.hpp"
#include "rwre/lab.hpp"
#include "rwre/quenched.hpp"

namespace rwre {

// Bulk samples an experiment can hand back for persistence as CSV.
struct RawOutput {
    std::string name;
    std::string contents;
};
struct RawSink {
    std::string configHash;
    std::vector<RawOutput> files;
};

// ---------------------------------------------------------------- localization

struct LocalizationParams {
    long blockBudget = 3000;
    double m = 4.0;
    long paths = 1000;
    long jMin = 2;
    double tBudget = 2e6;          // witnesses with t_m above this are skipped
    double tMin = 1000.0;          // ... and so are those with t_m below this
    long leftDepth = 4000;
    double occupationThreshold = 0.9;
};

struct LocalizationWitness {
    bool found = false;
    long j = 0;
    double M = 0.0;
    double expectedTime = 0.0;     // E_omega Tbar^{(j)}_{nu_{j-1}}
    long skippedOverBudget = 0;
    long skippedBelowMin = 0;
};

// First j in [jMin, blocks] with M_j >= m^2 E_omega Tbar^{(j)}_{nu_{j-1}} and
// tMin <= M_j / m <= tBudget, using blocks-mode reflection with depth b_j.
LocalizationWitness find_localization_witness(const EnvironmentWindow& env, const LadderDecomposition& ladder,
                                              double m, long jMin, double tBudget, double tMin = 0.0);

nlohmann::json localization_experiment(const EnvDistribution& dist, std::uint64_t envSeed,
                                       const LocalizationParams& p, unsigned threads);

// ---------------------------------------------------------------- quenched CLT

struct CltParams {
    long n = 2000;
    long replicas = 2000;
    long leftDepth = 400;          // walk reflected at -leftDepth
    double ksThreshold = 0.06;
    bool walkMarginal = true;
    std::vector<double> tGrid = {0.25, 0.5, 0.75, 1.0};
};

nlohmann::json quenched_clt_experiment(const EnvDistribution& dist, std::uint64_t envSeed, const CltParams& p,
                                       unsigned threads, RawSink* sink = nullptr);

// ---------------------------------------------------------------- stable scaling

struct StableParams {
    std::vector<std::string> checks = {"M1", "mean", "var", "slope"};
    long tailSamples = 100000;
    long hillK = 1000;
    long leftDepth = 64;
    long medianReplicas = 2000;
    std::vector<long> slopeN = {8, 16, 32, 64, 128, 256, 512, 1024};
    double tolM1 = 0.15;
    double tolMean = 0.20;
    double tolVar = 0.20;
    double tolSlope = 0.15;
    bool latticeSmoothing = true;
};

// Log-span h when every log rho is an integer multiple of h, else 0.
double lattice_log_span(const EnvDistribution& dist);

nlohmann::json stable_scaling_experiment(const EnvDistribution& dist, std::uint64_t seed, const StableParams& p,
                                         unsigned threads);

// ---------------------------------------------------------------- exponential block law

struct LaplaceParams {
    long blocks = 10000;
    long replicas = 10000;
    long leftDepth = 2000;
    double lambdaMax = 5.0;
    double lambdaStep = 0.05;
    double threshold = 0.05;
    double horizonFactor = 1000.0;  // censoring horizon in units of mu
};

nlohmann::json laplace_experiment(const EnvDistribution& dist, std::uint64_t seed, const LaplaceParams& p,
                                  unsigned threads, RawSink* sink = nullptr);

// ---------------------------------------------------------------- dominant block

struct DominantParams {
    long blocks = 10000;
    double C = 2.0;
    double eta = 0.5;
    long leftDepth = 2000;
};

nlohmann::json dominant_experiment(const EnvDistribution& dist, std::uint64_t seed, const DominantParams& p, RawSink* sink = nullptr);

// ---------------------------------------------------------------- speed

struct SpeedParams {
    long n = 100000;
    long leftDepth = 5000;
    long increments = 100000;
    double tolWalk = 0.05;
    double tolRegen = 0.03;
};

nlohmann::json speed_walk(const EnvDistribution& dist, std::uint64_t seed, const SpeedParams& p);
nlohmann::json speed_regeneration(const EnvDistribution& dist, std::uint64_t seed, const SpeedParams& p,
                                  unsigned threads);

// ---------------------------------------------------------------- exact formulas

struct ExactParams {
    long envCount = 100;
    long hitSites = 12;
    long varSteps = 30;
    long varDepth = 30;
    std::vector<double> homogeneousP = {0.6, 0.75, 0.9};
    std::vector<double> alphas = {1.0 / 3.0, 1.0 / 5.0, 1.0 / 9.0, 1.0 / 17.0};
    double tolHit = 1e-12;
    double tolVar = 1e-9;
    double tolClosed = 1e-12;
    double tolS = 1e-10;
};

nlohmann::json exact_check(std::uint64_t seed, const ExactParams& p);

// ---------------------------------------------------------------- large deviations

struct LdpParams {
    long increments = 2000000;
    std::vector<double> lambdaLo = {-3.0, -2.0};
    std::vector<double> lambdaHi = {6.0, 2.0};
    int coarse = 13;
    double vLo = 0.1;
    double vHi = 0.9;
    double vStep = 0.05;
    std::vector<double> rateT = {1.5, 2.0, 5.0};
    int psiN = 5;
    double psiLambda = 0.05;
    double tolR = 1e-8;
    double tolPsi = 1e-10;
    double tolAsymptote = 0.01;
    double tolJbarAtSpeed = 2e-3;
    double tolCramer = 0.02;
    double tolConvexity = 1e-6;
    double tolMgfCurve = 0.02;
    // Homogeneous laws only: harvest under a mixture of tilted walks and
    // reweight by the exact likelihood ratio.
    bool tiltedSampling = true;
    double tiltStep = 0.1;
};

nlohmann::json ldp_experiment(const EnvDistribution& dist, std::uint64_t seed, const LdpParams& p,
                              unsigned threads, RawSink* sink = nullptr);

// Grow a sampled window to the right until it holds `blocks` ladder blocks
// from `fromSite`; explicit windows are used as given.
LadderDecomposition ladder_with_growth(EnvironmentWindow& env, Site fromSite, std::size_t blocks);

}  // namespace rwre
