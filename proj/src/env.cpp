#include "rwre/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rwre/rng.hpp"

namespace rwre {

namespace {

constexpr std::uint64_t kQTag = 0x51d7a3c4e1f0b295ULL;

std::size_t site_atom(const EnvDistribution& dist, std::uint64_t seed, Site x) {
    return dist.atom_index(to_unit(hash_combine(seed, static_cast<std::uint64_t>(x))));
}

}  // namespace

double rho(double omega) {
    if (!(omega > 0.0 && omega < 1.0)) throw std::domain_error("rho: omega must lie in (0,1)");
    return (1.0 - omega) / omega;
}

// ---------------------------------------------------------------- distribution

EnvDistribution::EnvDistribution(std::vector<Atom> atoms, double kappa)
    : atoms_(std::move(atoms)), kappa_(kappa) {
    if (atoms_.empty()) throw std::invalid_argument("dist.atoms: at least one atom required");
    if (!(kappa_ > 0.0 && kappa_ <= 0.5)) throw std::invalid_argument("dist.kappa: must lie in (0, 1/2]");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        const std::string where = "dist.atoms[" + std::to_string(i) + "]";
        if (!(a.weight > 0.0)) throw std::invalid_argument(where + ".weight: must be positive");
        if (!(a.omega >= kappa_ && a.omega <= 1.0 - kappa_))
            throw std::invalid_argument(where + ".omega: violates kappa <= omega <= 1-kappa");
        if (!(a.rho > 0.0) || std::abs(a.rho - (1.0 - a.omega) / a.omega) > 1e-9 * (1.0 + a.rho))
            throw std::invalid_argument(where + ".rho: inconsistent with omega");
        total += a.weight;
        cumulative_.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("dist.atoms: weights must sum to 1");
    cumulative_.back() = 1.0;
}

EnvDistribution EnvDistribution::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("dist: expected an object");
    if (j.contains("family")) {
        const std::string fam = j.at("family").get<std::string>();
        if (fam == "two-point") {
            if (!j.contains("alpha")) throw std::invalid_argument("dist.alpha: required for two-point family");
            return two_point(j.at("alpha").get<double>());
        }
        if (fam == "homogeneous") {
            if (!j.contains("p")) throw std::invalid_argument("dist.p: required for homogeneous family");
            return homogeneous(j.at("p").get<double>());
        }
        throw std::invalid_argument("dist.family: unknown family '" + fam + "'");
    }
    if (!j.contains("atoms") || !j.at("atoms").is_array())
        throw std::invalid_argument("dist.atoms: required array");
    if (!j.contains("kappa")) throw std::invalid_argument("dist.kappa: required");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < j.at("atoms").size(); ++i) {
        const auto& a = j.at("atoms")[i];
        const std::string where = "dist.atoms[" + std::to_string(i) + "]";
        if (!a.contains("weight")) throw std::invalid_argument(where + ".weight: required");
        Atom atom;
        atom.weight = a.at("weight").get<double>();
        if (a.contains("rho")) {
            atom.rho = a.at("rho").get<double>();
            if (!(atom.rho > 0.0)) throw std::invalid_argument(where + ".rho: must be positive");
            atom.omega = a.contains("omega") ? a.at("omega").get<double>() : 1.0 / (1.0 + atom.rho);
        } else if (a.contains("omega")) {
            atom.omega = a.at("omega").get<double>();
            if (!(atom.omega > 0.0 && atom.omega < 1.0))
                throw std::invalid_argument(where + ".omega: must lie in (0,1)");
            atom.rho = rho(atom.omega);
        } else {
            throw std::invalid_argument(where + ": needs omega or rho");
        }
        atoms.push_back(atom);
    }
    return EnvDistribution(std::move(atoms), j.at("kappa").get<double>());
}

nlohmann::json EnvDistribution::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const Atom& a : atoms_) arr.push_back({{"omega", a.omega}, {"rho", a.rho}, {"weight", a.weight}});
    return {{"atoms", arr}, {"kappa", kappa_}};
}

EnvDistribution EnvDistribution::two_point(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("dist.alpha: must lie in (0,1)");
    return EnvDistribution({{1.0 / 3.0, 2.0, alpha}, {2.0 / 3.0, 0.5, 1.0 - alpha}}, 1.0 / 3.0);
}

EnvDistribution EnvDistribution::homogeneous(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("dist.p: must lie in (0,1)");
    return EnvDistribution({{p, rho(p), 1.0}}, std::min(p, 1.0 - p));
}

double EnvDistribution::mean_rho() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.weight * a.rho;
    return m;
}

double EnvDistribution::mean_log_rho() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.weight * std::log(a.rho);
    return m;
}

double EnvDistribution::rho_moment(double gamma) const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.weight * std::exp(gamma * std::log(a.rho));
    return m;
}

double EnvDistribution::omega_min() const {
    double m = 1.0;
    for (const Atom& a : atoms_) m = std::min(m, a.omega);
    return m;
}

double EnvDistribution::rho_max() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m = std::max(m, a.rho);
    return m;
}

std::size_t EnvDistribution::atom_index(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

std::string to_string(Transience t) {
    switch (t) {
        case Transience::Right: return "transient-right";
        case Transience::Left: return "transient-left";
        default: return "recurrent";
    }
}

// ---------------------------------------------------------------- windows

EnvironmentWindow::EnvironmentWindow(Site lo, std::vector<double> omega) : lo_(lo), omega_(std::move(omega)) {
    if (omega_.empty()) throw std::invalid_argument("EnvironmentWindow: empty window");
    rho_.reserve(omega_.size());
    for (double w : omega_) {
        if (!(w > 0.0 && w <= 1.0)) throw std::domain_error("EnvironmentWindow: omega must lie in (0,1]");
        rho_.push_back((1.0 - w) / w);
    }
}

EnvironmentWindow EnvironmentWindow::from_rho(Site lo, const std::vector<double>& rhos) {
    std::vector<double> om;
    om.reserve(rhos.size());
    for (double r : rhos) {
        if (!(r >= 0.0)) throw std::domain_error("EnvironmentWindow: rho must be non-negative");
        om.push_back(1.0 / (1.0 + r));
    }
    EnvironmentWindow w(lo, std::move(om));
    w.rho_ = rhos;
    return w;
}

void EnvironmentWindow::check(Site x) const {
    if (!contains(x))
        throw std::out_of_range("site " + std::to_string(x) + " outside window [" + std::to_string(lo_) +
                                ", " + std::to_string(hi()) + "]");
}

double EnvironmentWindow::omega(Site x) const {
    check(x);
    return omega_[static_cast<std::size_t>(x - lo_)];
}

double EnvironmentWindow::rho(Site x) const {
    check(x);
    return rho_[static_cast<std::size_t>(x - lo_)];
}

double EnvironmentWindow::omega_at(Site x) const {
    if (contains(x)) return omega_[static_cast<std::size_t>(x - lo_)];
    if (!dist_) check(x);
    return dist_->atoms()[site_atom(*dist_, seed_, x)].omega;
}

double EnvironmentWindow::rho_at(Site x) const {
    if (contains(x)) return rho_[static_cast<std::size_t>(x - lo_)];
    if (!dist_) check(x);
    return dist_->atoms()[site_atom(*dist_, seed_, x)].rho;
}

EnvironmentWindow EnvironmentWindow::resampled(Site lo, Site hi) const {
    if (!dist_) throw std::logic_error("resampled: explicit windows cannot be regenerated");
    if (kind_ == WindowKind::Q) {
        // Keep the conditioned left segment, extend with P sites elsewhere.
        EnvironmentWindow w = sample_window_P(*dist_, seed_, lo, hi);
        for (Site x = std::max(lo, lo_); x <= std::min<Site>(hi, -1); ++x) {
            const auto k = static_cast<std::size_t>(x - lo);
            w.omega_[k] = omega(x);
            w.rho_[k] = rho(x);
        }
        w.kind_ = WindowKind::Q;
        w.leftDepth_ = leftDepth_;
        w.qAttempts_ = qAttempts_;
        return w;
    }
    return sample_window_P(*dist_, seed_, lo, hi);
}

Site LadderDecomposition::nu_at(long k) const {
    if (k >= 0) {
        if (static_cast<std::size_t>(k) >= nu.size()) throw std::out_of_range("ladder index beyond decomposition");
        return nu[static_cast<std::size_t>(k)];
    }
    const auto idx = static_cast<std::size_t>(-k - 1);
    if (idx >= leftNu.size()) throw std::out_of_range("insufficient left ladder context");
    return leftNu[idx];
}

// ---------------------------------------------------------------- functionals

double pi_product(const EnvironmentWindow& env, Site i, Site j) {
    if (i > j) return 1.0;
    if (!env.contains(i) || !env.contains(j)) throw std::out_of_range("pi_product: indices outside window");
    double p = 1.0;
    for (Site k = i; k <= j; ++k) p *= env.rho(k);
    return p;
}

double w_sum(const EnvironmentWindow& env, Site j, Site depth) {
    if (depth < 1) throw std::invalid_argument("w_sum: depth must be positive");
    if (!env.contains(j) || !env.contains(j - depth + 1)) throw std::out_of_range("w_sum: insufficient window");
    double term = 1.0, sum = 0.0, comp = 0.0;
    for (Site k = j; k >= j - depth + 1; --k) {
        term *= env.rho(k);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double r_sum(const EnvironmentWindow& env, Site i, Site k) {
    if (i > k) return 0.0;
    if (!env.contains(i) || !env.contains(k)) throw std::out_of_range("r_sum: insufficient window");
    double term = 1.0, sum = 0.0, comp = 0.0;
    for (Site j = i; j <= k; ++j) {
        term *= env.rho(j);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double potential(const EnvironmentWindow& env, Site x) {
    double v = 0.0;
    if (x >= 1) {
        if (!env.contains(0) || !env.contains(x - 1)) throw std::out_of_range("potential: insufficient window");
        for (Site i = 0; i < x; ++i) v += std::log(env.rho(i));
    } else if (x <= -1) {
        if (!env.contains(x) || !env.contains(-1)) throw std::out_of_range("potential: insufficient window");
        for (Site i = x; i <= -1; ++i) v -= std::log(env.rho(i));
    }
    return v;
}

std::vector<Site> left_ladder_points(const EnvironmentWindow& env, Site upTo) {
    // Walk left to right keeping the product of rho since the current strict
    // minimum of the potential; a new minimum appears when it drops below 1.
    std::vector<Site> mins;
    double rel = 1.0;
    const Site last = std::min(upTo, env.hi() + 1);
    for (Site j = env.lo() + 1; j < last; ++j) {
        rel *= env.rho(j - 1);
        if (rel < 1.0) {
            mins.push_back(j);
            rel = 1.0;
        }
    }
    std::reverse(mins.begin(), mins.end());
    return mins;
}

LadderDecomposition ladder_decompose(const EnvironmentWindow& env, Site fromSite, std::size_t blockCount) {
    if (!env.contains(fromSite)) throw std::out_of_range("ladder_decompose: start outside window");
    LadderDecomposition ld;
    ld.nu.reserve(blockCount + 1);
    ld.M.reserve(blockCount);
    ld.nu.push_back(fromSite);
    double prod = 1.0, maxProd = 0.0;
    Site n = fromSite;
    while (ld.M.size() < blockCount) {
        if (n > env.hi())
            throw std::out_of_range("ladder_decompose: window exhausted after " + std::to_string(ld.M.size()) +
                                    " blocks");
        prod *= env.rho(n);  // prod = Pi_{start, n}
        maxProd = std::max(maxProd, prod);
        ++n;
        if (prod < 1.0) {
            ld.nu.push_back(n);
            ld.M.push_back(maxProd);
            prod = 1.0;
            maxProd = 0.0;
        }
    }
    ld.blockCount = blockCount;
    ld.leftNu = left_ladder_points(env, fromSite);
    return ld;
}

// ---------------------------------------------------------------- tail exponent

TailExponent solve_s(const EnvDistribution& dist, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_s: tol must be positive");
    if (!(dist.mean_log_rho() < 0.0)) throw std::invalid_argument("solve_s: requires E log rho < 0");
    TailExponent te;
    te.tol = tol;
    if (dist.rho_max() <= 1.0) return te;  // E rho^gamma < 1 for every gamma > 0
    auto f = [&](double g) { return dist.rho_moment(g) - 1.0; };
    double lo = 0.0, hi = 1.0;
    while (f(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("solve_s: root bracket not found");
    }
    // lo is 0 or a point with f <= 0; f < 0 just right of 0 since E log rho < 0.
    const double width = tol / 4.0;
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < 0.0) lo = mid; else hi = mid;
    }
    te.lo = lo;
    te.hi = hi;
    te.s = 0.5 * (lo + hi);
    return te;
}

SolomonResult solomon_classify(const EnvDistribution& dist) {
    SolomonResult r;
    r.meanLogRho = dist.mean_log_rho();
    r.meanRho = dist.mean_rho();
    const double scale = 1e-14 * std::max(1.0, std::abs(std::log(dist.rho_max())));
    if (r.meanLogRho < -scale) {
        r.regime = Transience::Right;
        r.speed = r.meanRho < 1.0 ? (1.0 - r.meanRho) / (1.0 + r.meanRho) : 0.0;
    } else if (r.meanLogRho > scale) {
        r.regime = Transience::Left;
        double inv = 0.0;
        for (const Atom& a : dist.atoms()) inv += a.weight / a.rho;
        r.speed = inv < 1.0 ? -(1.0 - inv) / (1.0 + inv) : 0.0;
    }
    return r;
}

// ---------------------------------------------------------------- sampling

double site_omega(const EnvDistribution& dist, std::uint64_t seed, Site x) {
    return dist.atoms()[site_atom(dist, seed, x)].omega;
}

EnvironmentWindow sample_window_P(const EnvDistribution& dist, std::uint64_t seed, Site lo, Site hi) {
    if (lo > hi) throw std::invalid_argument("sample_window_P: lo > hi");
    EnvironmentWindow w;
    w.lo_ = lo;
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    w.omega_.resize(n);
    w.rho_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Atom& a = dist.atoms()[site_atom(dist, seed, lo + static_cast<Site>(k))];
        w.omega_[k] = a.omega;
        w.rho_[k] = a.rho;
    }
    w.kind_ = WindowKind::P;
    w.seed_ = seed;
    w.dist_ = std::make_shared<const EnvDistribution>(dist);
    return w;
}

EnvironmentWindow sample_window_Q(const EnvDistribution& dist, std::uint64_t seed, Site leftDepth, Site hi,
                                  std::uint64_t maxAttempts) {
    if (leftDepth < 1) throw std::invalid_argument("sample_window_Q: leftDepth must be >= 1");
    if (hi < 0) throw std::invalid_argument("sample_window_Q: hi must be >= 0");
    if (!(dist.mean_log_rho() < 0.0)) throw std::invalid_argument("sample_window_Q: requires E log rho < 0");
    EnvironmentWindow w = sample_window_P(dist, seed, -leftDepth, hi);
    const auto L = static_cast<std::size_t>(leftDepth);
    std::vector<std::size_t> idx(L);
    for (std::uint64_t attempt = 0; attempt < maxAttempts; ++attempt) {
        // Sites -1, -2, ... drawn in that order so rejection can stop early.
        double prod = 1.0;
        bool ok = true;
        for (std::size_t k = 0; k < L; ++k) {
            const Site x = -static_cast<Site>(k) - 1;
            idx[k] = dist.atom_index(to_unit(hash_combine(seed, kQTag, attempt, static_cast<std::uint64_t>(x))));
            prod *= dist.atoms()[idx[k]].rho;
            if (!(prod < 1.0)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        for (std::size_t k = 0; k < L; ++k) {
            const auto pos = L - 1 - k;  // site -k-1 sits at offset leftDepth-k-1
            w.omega_[pos] = dist.atoms()[idx[k]].omega;
            w.rho_[pos] = dist.atoms()[idx[k]].rho;
        }
        w.kind_ = WindowKind::Q;
        w.leftDepth_ = leftDepth;
        w.qAttempts_ = attempt + 1;
        return w;
    }
    throw std::runtime_error("sample_window_Q: rejection budget of " + std::to_string(maxAttempts) +
                             " attempts exceeded");
}

}  // namespace rwre
