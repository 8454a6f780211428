#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

#include "rwre/sim.hpp"

namespace rwre {

using Vec = std::vector<double>;

// Empirical law of regeneration increments z = (X_tau, tau), stored as
// distinct points with (log) weights. Plain records weight each distinct point
// by its multiplicity; importance-sampled records carry likelihood ratios.
class EmpiricalLogMgf {
public:
    explicit EmpiricalLogMgf(const RegenerationRecord& rec);
    EmpiricalLogMgf(std::vector<Vec> points, const std::vector<double>& weights);
    static EmpiricalLogMgf from_log_weights(std::vector<Vec> points, std::vector<double> logWeights,
                                            std::size_t sampleCount);

    int dim() const { return dim_; }
    std::size_t sample_count() const { return sampleCount_; }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<double>& log_weights() const { return logW_; }
    const Vec& mean() const { return mean_; }

    // log of the weighted mean of exp(lambda . z), evaluated with a max shift.
    double value(const Vec& lambda) const;
    // Share of the total carried by the largest 1% of the summands.
    double top_share(const Vec& lambda) const;
    // Whether z lies in the closed convex hull of the support (2-dim exact).
    bool in_hull(const Vec& z) const;
    // Interval [uLo, uHi] of u >= 0 with u*dir in the hull; empty if uLo > uHi.
    std::pair<double, double> ray_interval(const Vec& dir) const;

private:
    EmpiricalLogMgf() = default;
    void finish();
    int dim_ = 2;
    std::vector<Vec> points_;
    std::vector<double> logW_;
    double logTotal_ = 0.0;
    std::size_t sampleCount_ = 0;
    Vec mean_;
    std::vector<Vec> hull_;  // counter-clockwise, 2-dim only
};

struct LogMgfGrid {
    std::vector<Vec> lambdas;
    std::vector<double> values;
    std::vector<bool> stable;
    std::size_t sampleCount = 0;
    std::shared_ptr<const EmpiricalLogMgf> source;
};

LogMgfGrid estimate_log_mgf(const RegenerationRecord& record, const std::vector<Vec>& lambdaGrid);
LogMgfGrid estimate_log_mgf(std::shared_ptr<const EmpiricalLogMgf> source, const std::vector<Vec>& lambdaGrid);

// Rectangular lambda box with the number of coarse grid points per axis.
struct LambdaBox {
    Vec lo, hi;
    int coarse = 21;
    std::vector<Vec> grid() const;
};

struct ConjugateResult {
    double value = 0.0;
    Vec lambdaStar;
    bool boundary = false;  // maximiser on the box edge: value is a lower bound
    bool infinite = false;  // z outside the support hull
};

// sup over lambda in the box of lambda.z - Lambda(lambda) for a convex Lambda:
// best coarse grid point, then Powell conjugate directions with Brent line
// searches.
ConjugateResult legendre_conjugate(const std::function<double(const Vec&)>& Lambda, const LambdaBox& box,
                                   const Vec& z);
ConjugateResult legendre_conjugate(const LogMgfGrid& grid, const LambdaBox& box, const Vec& z);

struct JbarResult {
    double value = std::numeric_limits<double>::infinity();
    double sStar = 0.0;
    Vec lambdaStar;
    bool boundary = false;
    bool infinite = true;
};

// inf over s in (0,1] of s * Ibar(v/s, 1/s) for one-dimensional increments.
JbarResult jbar(const EmpiricalLogMgf& mgf, const LambdaBox& box, double v);

struct RateFunctionTable {
    Vec v;
    Vec Jbar;
    Vec sStar;
    std::vector<Vec> lambdaStar;
    std::vector<bool> boundary;
};

RateFunctionTable rate_table(const EmpiricalLogMgf& mgf, const LambdaBox& box, const Vec& vGrid);
void write_rate_csv(std::ostream& os, const RateFunctionTable& t);

// Homogeneous walk with omega = omegaMin at every site.
double lambda_bar(double omegaMin);
double mgf_phi(double lambda, double omegaMin);  // +inf beyond lambda_bar
double conditioned_mgf_psi(int n, double lambda, double omegaMin);
double rate_r(double t, double omegaMin);
// sup_{lambda <= lambda_bar} (lambda t - log phi(lambda)) by Brent search.
double rate_r_numeric(double t, double omegaMin);
// Rate function of the empirical mean of i.i.d. +-1 steps with P(+1) = p.
double cramer_rate(double v, double p);

}  // namespace rwre
