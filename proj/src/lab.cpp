#include "rwre/lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rwre/rng.hpp"

namespace rwre {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("EmpiricalDistribution: no samples");
    for (double x : sorted_)
        if (std::isnan(x)) throw std::invalid_argument("EmpiricalDistribution: NaN sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance(const EmpiricalDistribution& samples, const std::function<double(double)>& cdf) {
    const auto& xs = samples.sorted();
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;  // ties form one jump
        const double F = cdf(xs[i]);
        d = std::max({d, std::abs(F - static_cast<double>(i) / n), std::abs(static_cast<double>(j) / n - F)});
        i = j;
    }
    return std::min(d, 1.0);
}

HillResult hill_estimator(std::vector<double> samples, std::size_t k) {
    if (k == 0 || k >= samples.size()) throw std::invalid_argument("hill_estimator: need 0 < k < count");
    for (double x : samples)
        if (!(x > 0.0)) throw std::invalid_argument("hill_estimator: samples must be positive");
    std::nth_element(samples.begin(), samples.begin() + static_cast<long>(k), samples.end(), std::greater<>());
    const double threshold = samples[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += std::log(samples[i] / threshold);
    HillResult r;
    r.k = k;
    r.gamma = acc / static_cast<double>(k);
    r.degenerate = !(r.gamma > 0.0) || !std::isfinite(r.gamma);
    r.index = r.degenerate ? std::numeric_limits<double>::infinity() : 1.0 / r.gamma;
    return r;
}

std::vector<double> lattice_smooth(const std::vector<double>& samples, double logSpan, std::uint64_t seed) {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out[i] = samples[i] * std::exp(logSpan * to_unit(hash_combine(seed, i)));
    return out;
}

std::vector<double> empirical_laplace(const std::vector<double>& samples, const std::vector<double>& lambdaGrid) {
    if (samples.empty()) throw std::invalid_argument("empirical_laplace: no samples");
    std::vector<double> out;
    out.reserve(lambdaGrid.size());
    for (double l : lambdaGrid) {
        double acc = 0.0;
        for (double x : samples) acc += std::exp(-l * x);
        out.push_back(acc / static_cast<double>(samples.size()));
    }
    return out;
}

EventReport detect_dominant_block(const std::vector<double>& sigma2, const std::vector<double>& M, double C,
                                  double eta) {
    if (!(C > 1.0)) throw std::invalid_argument("detect_dominant_block: C must exceed 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("detect_dominant_block: eta must lie in (0,1]");
    if (sigma2.size() != M.size()) throw std::invalid_argument("detect_dominant_block: size mismatch");
    EventReport r;
    r.eventName = "dominant-block";
    const std::size_t n = sigma2.size();
    const auto limit = static_cast<std::size_t>(std::floor(eta * static_cast<double>(n)));
    long double total = 0.0L;
    for (double v : sigma2) total += v;
    double best = 0.0;
    long bestIndex = 0;
    for (std::size_t i = 0; i < limit; ++i) {
        const long double rest = total - sigma2[i];
        const long double m2 = static_cast<long double>(M[i]) * M[i];
        if (m2 >= static_cast<long double>(C) * rest) r.witnessIndices.push_back(static_cast<long>(i) + 1);
        const double ratio = rest > 0.0L ? static_cast<double>(m2 / rest) : std::numeric_limits<double>::infinity();
        if (ratio > best) {
            best = ratio;
            bestIndex = static_cast<long>(i) + 1;
        }
    }
    r.found = !r.witnessIndices.empty();
    // Largest M_i^2 / sum_{j != i} sigma2_j over the scanned range: how close
    // the environment came to the event.
    r.scalars = {{"C", C}, {"eta", eta}, {"n", n}, {"bestRatio", best}, {"bestIndex", bestIndex}};
    return r;
}

EventReport detect_uniform_blocks_band(const std::vector<double>& mu2, double bandLow, double eta, long a) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("detect_uniform_blocks: eta must lie in (0,1]");
    const auto limit = static_cast<std::size_t>(std::floor(eta * static_cast<double>(mu2.size())));
    if (!(2 * a < static_cast<long>(limit))) throw std::invalid_argument("detect_uniform_blocks: need 2a < eta*n");
    EventReport r;
    r.eventName = "uniform-blocks";
    std::vector<long> inBand;
    bool othersBelow = true;
    for (std::size_t i = 0; i < limit; ++i) {
        if (mu2[i] >= bandLow && mu2[i] < 2.0 * bandLow)
            inBand.push_back(static_cast<long>(i) + 1);
        else if (mu2[i] >= bandLow)
            othersBelow = false;
    }
    r.found = othersBelow && static_cast<long>(inBand.size()) == 2 * a;
    if (r.found) r.witnessIndices = inBand;
    r.scalars = {{"bandLow", bandLow}, {"eta", eta}, {"a", a}, {"inBand", inBand.size()}};
    return r;
}

EventReport detect_uniform_blocks(const std::vector<double>& mu, double n, double s, double eta, long a) {
    std::vector<double> mu2(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) mu2[i] = mu[i] * mu[i];
    EventReport r = detect_uniform_blocks_band(mu2, std::pow(n, 2.0 / s), eta, a);
    r.scalars["n"] = n;
    r.scalars["s"] = s;
    return r;
}

}  // namespace rwre
