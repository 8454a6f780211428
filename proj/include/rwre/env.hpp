#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rwre {

using Site = std::int64_t;

// Odds ratio (1-omega)/omega for a site probability in (0,1).
double rho(double omega);

struct Atom {
    double omega = 0.5;
    double rho = 1.0;  // kept alongside omega so lattice laws stay exact
    double weight = 1.0;
};

// Finite law of omega_0 with uniform ellipticity bound kappa.
class EnvDistribution {
public:
    EnvDistribution(std::vector<Atom> atoms, double kappa);

    // Atoms may be given by "omega" or by "rho"; the reciprocal field is derived.
    static EnvDistribution from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // rho in {2, 1/2} with P(rho = 2) = alpha. Tail exponent log2((1-alpha)/alpha).
    static EnvDistribution two_point(double alpha);
    // Every site has omega = p.
    static EnvDistribution homogeneous(double p);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double kappa() const { return kappa_; }

    double mean_rho() const;
    double mean_log_rho() const;
    double rho_moment(double gamma) const;  // E rho^gamma
    double omega_min() const;
    double rho_max() const;

    // Atom index selected by a uniform variate in [0,1).
    std::size_t atom_index(double u) const;

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    double kappa_;
};

enum class WindowKind { Explicit, P, Q };

// Realized omega on [lo, hi]. Sampled windows remember (seed, dist) so that
// sites outside the stored range can still be generated on demand.
class EnvironmentWindow {
public:
    EnvironmentWindow() = default;
    // Explicit values; omega = 1 is allowed (it marks a reflecting site).
    EnvironmentWindow(Site lo, std::vector<double> omega);
    static EnvironmentWindow from_rho(Site lo, const std::vector<double>& rho);

    Site lo() const { return lo_; }
    Site hi() const { return lo_ + static_cast<Site>(omega_.size()) - 1; }
    std::size_t size() const { return omega_.size(); }
    bool contains(Site x) const { return x >= lo_ && x <= hi(); }

    double omega(Site x) const;
    double rho(Site x) const;
    // Stored value when inside the window, otherwise generated from (seed, x)
    // under P; throws for explicit windows.
    double omega_at(Site x) const;
    double rho_at(Site x) const;

    const std::vector<double>& omega_values() const { return omega_; }
    const std::vector<double>& rho_values() const { return rho_; }

    WindowKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    const std::shared_ptr<const EnvDistribution>& dist() const { return dist_; }
    Site left_depth() const { return leftDepth_; }
    std::uint64_t q_attempts() const { return qAttempts_; }

    // Same seed and law, different range; sites covered by both agree.
    EnvironmentWindow resampled(Site lo, Site hi) const;

private:
    friend EnvironmentWindow sample_window_P(const EnvDistribution&, std::uint64_t, Site, Site);
    friend EnvironmentWindow sample_window_Q(const EnvDistribution&, std::uint64_t, Site, Site,
                                             std::uint64_t);
    void check(Site x) const;

    Site lo_ = 0;
    std::vector<double> omega_;
    std::vector<double> rho_;
    WindowKind kind_ = WindowKind::Explicit;
    std::uint64_t seed_ = 0;
    std::shared_ptr<const EnvDistribution> dist_;
    Site leftDepth_ = 0;
    std::uint64_t qAttempts_ = 0;
};

struct LadderDecomposition {
    std::vector<Site> nu;     // nu[0] = fromSite < nu[1] < ...
    std::vector<double> M;    // M[k-1] is the maximum over block k
    std::size_t blockCount = 0;
    std::vector<Site> leftNu; // leftNu[k-1] = nu_{-k}, descending

    // nu_k for any k in [-leftNu.size(), blockCount].
    Site nu_at(long k) const;
    long min_index() const { return -static_cast<long>(leftNu.size()); }
};

struct TailExponent {
    double s = std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double tol = 0.0;
    bool finite() const { return s < std::numeric_limits<double>::infinity(); }
};

enum class Transience { Right, Left, Recurrent };

struct SolomonResult {
    Transience regime = Transience::Recurrent;
    double speed = 0.0;
    double meanLogRho = 0.0;
    double meanRho = 0.0;
};

std::string to_string(Transience t);

double pi_product(const EnvironmentWindow& env, Site i, Site j);
double w_sum(const EnvironmentWindow& env, Site j, Site depth);
double r_sum(const EnvironmentWindow& env, Site i, Site k);
double potential(const EnvironmentWindow& env, Site x);

LadderDecomposition ladder_decompose(const EnvironmentWindow& env, Site fromSite,
                                     std::size_t blockCount);
// Strict prefix minima of the potential on (lo, upTo), nearest first.
std::vector<Site> left_ladder_points(const EnvironmentWindow& env, Site upTo);

TailExponent solve_s(const EnvDistribution& dist, double tol = 1e-10);
SolomonResult solomon_classify(const EnvDistribution& dist);

double site_omega(const EnvDistribution& dist, std::uint64_t seed, Site x);
EnvironmentWindow sample_window_P(const EnvDistribution& dist, std::uint64_t seed, Site lo,
                                  Site hi);
EnvironmentWindow sample_window_Q(const EnvDistribution& dist, std::uint64_t seed,
                                  Site leftDepth, Site hi,
                                  std::uint64_t maxAttempts = 1000000);

}  // namespace rwre
