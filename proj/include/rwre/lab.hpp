#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rwre {

class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> samples);
    const std::vector<double>& sorted() const { return sorted_; }
    std::size_t count() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

double normal_cdf(double x);

// sup_x |F_n(x) - F(x)|, checked on both sides of every jump.
double ks_distance(const EmpiricalDistribution& samples, const std::function<double(double)>& cdf);

struct HillResult {
    double index = 0.0;   // 1 / gamma
    double gamma = 0.0;   // mean log excess over the (k+1)-th largest value
    std::size_t k = 0;
    bool degenerate = false;
};

HillResult hill_estimator(std::vector<double> samples, std::size_t k);

// Multiplies each sample by exp(U * logSpan), U uniform on [0,1), so that a
// law supported on a geometric lattice gets a continuous tail with the same
// index. The stream is fixed by `seed`.
std::vector<double> lattice_smooth(const std::vector<double>& samples, double logSpan, std::uint64_t seed);

std::vector<double> empirical_laplace(const std::vector<double>& samples, const std::vector<double>& lambdaGrid);

struct EventReport {
    std::string eventName;
    bool found = false;
    std::vector<long> witnessIndices;  // 1-based block indices
    nlohmann::json scalars = nlohmann::json::object();
};

// Index i <= eta*n with M_i^2 >= C * sum_{j != i} sigma2_j, n = sigma2.size().
EventReport detect_dominant_block(const std::vector<double>& sigma2, const std::vector<double>& M, double C,
                                  double eta);

// Exactly 2a of the first floor(eta*n) values mu^2 in [n^{2/s}, 2 n^{2/s}) and
// all other values of mu^2 among them below n^{2/s}.
EventReport detect_uniform_blocks(const std::vector<double>& mu, double n, double s, double eta, long a);
EventReport detect_uniform_blocks_band(const std::vector<double>& mu2, double bandLow, double eta, long a);

}  // namespace rwre
