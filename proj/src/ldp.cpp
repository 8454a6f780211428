#include "rwre/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace rwre {

namespace {

constexpr int kBrentBits = 26;  // about 1.5e-8 relative in the argument
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double cross(const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace

// ---------------------------------------------------------------- empirical log-MGF

EmpiricalLogMgf::EmpiricalLogMgf(const RegenerationRecord& rec) : dim_(rec.dim + 1) {
    if (rec.size() == 0) throw std::invalid_argument("EmpiricalLogMgf: empty record");
    std::map<std::vector<std::int64_t>, double> hist;
    std::vector<std::int64_t> key(static_cast<std::size_t>(dim_));
    for (std::size_t k = 0; k < rec.size(); ++k) {
        for (int a = 0; a < rec.dim; ++a) key[static_cast<std::size_t>(a)] = rec.disp(k, a);
        key.back() = rec.duration[k];
        hist[key] += 1.0;
    }
    for (const auto& [z, w] : hist) {
        points_.emplace_back(z.begin(), z.end());
        logW_.push_back(std::log(w));
    }
    sampleCount_ = rec.size();
    finish();
}

EmpiricalLogMgf::EmpiricalLogMgf(std::vector<Vec> points, const std::vector<double>& weights)
    : points_(std::move(points)) {
    if (points_.empty() || points_.size() != weights.size())
        throw std::invalid_argument("EmpiricalLogMgf: points and weights must be non-empty and aligned");
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("EmpiricalLogMgf: weights must be positive");
        logW_.push_back(std::log(w));
    }
    dim_ = static_cast<int>(points_[0].size());
    sampleCount_ = points_.size();
    finish();
}

EmpiricalLogMgf EmpiricalLogMgf::from_log_weights(std::vector<Vec> points, std::vector<double> logWeights,
                                                  std::size_t sampleCount) {
    if (points.empty() || points.size() != logWeights.size())
        throw std::invalid_argument("EmpiricalLogMgf: points and weights must be non-empty and aligned");
    EmpiricalLogMgf e;
    e.points_ = std::move(points);
    e.logW_ = std::move(logWeights);
    for (double lw : e.logW_)
        if (!std::isfinite(lw)) throw std::invalid_argument("EmpiricalLogMgf: log weights must be finite");
    e.dim_ = static_cast<int>(e.points_[0].size());
    e.sampleCount_ = sampleCount;
    e.finish();
    return e;
}

void EmpiricalLogMgf::finish() {
    for (const auto& p : points_)
        if (static_cast<int>(p.size()) != dim_) throw std::invalid_argument("EmpiricalLogMgf: ragged points");
    const double m = *std::max_element(logW_.begin(), logW_.end());
    long double tot = 0.0L;
    for (double lw : logW_) tot += std::exp(static_cast<long double>(lw - m));
    logTotal_ = m + static_cast<double>(std::log(tot));
    mean_.assign(static_cast<std::size_t>(dim_), 0.0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double w = std::exp(logW_[i] - logTotal_);
        for (int a = 0; a < dim_; ++a) mean_[static_cast<std::size_t>(a)] += w * points_[i][static_cast<std::size_t>(a)];
    }
    if (dim_ != 2) return;
    // Andrew's monotone chain.
    std::vector<Vec> pts = points_;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        hull_ = pts;
        return;
    }
    std::vector<Vec> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    hull_ = h;
}

double EmpiricalLogMgf::value(const Vec& lambda) const {
    if (static_cast<int>(lambda.size()) != dim_) throw std::invalid_argument("EmpiricalLogMgf: lambda dimension");
    double m = -kInf;
    for (std::size_t i = 0; i < points_.size(); ++i) m = std::max(m, dot(lambda, points_[i]) + logW_[i]);
    long double s = 0.0L;
    for (std::size_t i = 0; i < points_.size(); ++i)
        s += std::exp(static_cast<long double>(dot(lambda, points_[i]) + logW_[i] - m));
    return m + static_cast<double>(std::log(s)) - logTotal_;
}

double EmpiricalLogMgf::top_share(const Vec& lambda) const {
    // Summands are per raw increment: a distinct point with multiplicity c
    // contributes c equal summands when the record is unweighted.
    std::vector<std::pair<double, double>> terms;  // (log summand, multiplicity share of the sample)
    terms.reserve(points_.size());
    double m = -kInf;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        terms.emplace_back(dot(lambda, points_[i]) + logW_[i], std::exp(logW_[i] - logTotal_));
        m = std::max(m, terms.back().first);
    }
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        return a.first - std::log(a.second) > b.first - std::log(b.second);
    });
    long double all = 0.0L, top = 0.0L;
    double taken = 0.0;
    for (const auto& [e, share] : terms) {
        const long double mass = std::exp(static_cast<long double>(e - m));
        all += mass;
        if (taken < 0.01) {
            const double use = std::min(share, 0.01 - taken);
            top += mass * (use / share);
            taken += use;
        }
    }
    return static_cast<double>(top / all);
}

bool EmpiricalLogMgf::in_hull(const Vec& z) const {
    if (dim_ != 2) throw std::logic_error("in_hull: only two-dimensional increments are supported");
    const double eps = 1e-12 * (1.0 + std::abs(z[0]) + std::abs(z[1]));
    if (hull_.size() == 1) return std::abs(z[0] - hull_[0][0]) <= eps && std::abs(z[1] - hull_[0][1]) <= eps;
    if (hull_.size() == 2) {
        if (std::abs(cross(hull_[0], hull_[1], z)) > eps) return false;
        const double t = dot(Vec{z[0] - hull_[0][0], z[1] - hull_[0][1]},
                             Vec{hull_[1][0] - hull_[0][0], hull_[1][1] - hull_[0][1]});
        const double len2 = std::pow(hull_[1][0] - hull_[0][0], 2) + std::pow(hull_[1][1] - hull_[0][1], 2);
        return t >= -eps && t <= len2 + eps;
    }
    for (std::size_t i = 0; i < hull_.size(); ++i)
        if (cross(hull_[i], hull_[(i + 1) % hull_.size()], z) < -eps) return false;
    return true;
}

std::pair<double, double> EmpiricalLogMgf::ray_interval(const Vec& d) const {
    if (dim_ != 2) throw std::logic_error("ray_interval: only two-dimensional increments are supported");
    double uLo = kInf, uHi = -kInf;
    auto consider = [&](double u) {
        if (u < 0.0) return;
        uLo = std::min(uLo, u);
        uHi = std::max(uHi, u);
    };
    const double dd = dot(d, d);
    for (const auto& v : hull_) {
        if (std::abs(d[0] * v[1] - d[1] * v[0]) <= 1e-12 * (1.0 + dot(v, v))) consider(dot(v, d) / dd);
    }
    const std::size_t m = hull_.size();
    for (std::size_t i = 0; m >= 2 && i < m; ++i) {
        const Vec& a = hull_[i];
        const Vec& b = hull_[(i + 1) % m];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double det = -d[0] * ey + ex * d[1];
        if (std::abs(det) < 1e-15) continue;
        const double u = (-a[0] * ey + ex * a[1]) / det;
        const double t = (d[0] * a[1] - d[1] * a[0]) / det;
        if (t >= -1e-12 && t <= 1.0 + 1e-12) consider(u);
    }
    return {uLo, uHi};
}

LogMgfGrid estimate_log_mgf(std::shared_ptr<const EmpiricalLogMgf> source, const std::vector<Vec>& lambdaGrid) {
    LogMgfGrid g;
    g.lambdas = lambdaGrid;
    g.sampleCount = source->sample_count();
    for (const Vec& l : lambdaGrid) {
        const double v = source->value(l);
        if (!std::isfinite(v)) throw std::overflow_error("estimate_log_mgf: overflow at a grid point");
        g.values.push_back(v);
        g.stable.push_back(source->top_share(l) <= 0.5);
    }
    g.source = std::move(source);
    return g;
}

LogMgfGrid estimate_log_mgf(const RegenerationRecord& record, const std::vector<Vec>& lambdaGrid) {
    return estimate_log_mgf(std::make_shared<const EmpiricalLogMgf>(record), lambdaGrid);
}

// ---------------------------------------------------------------- conjugates

std::vector<Vec> LambdaBox::grid() const {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("LambdaBox: malformed bounds");
    if (coarse < 2) throw std::invalid_argument("LambdaBox: coarse must be >= 2");
    const std::size_t d = lo.size();
    std::vector<Vec> out;
    std::vector<int> idx(d, 0);
    while (true) {
        Vec p(d);
        for (std::size_t a = 0; a < d; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * idx[a] / (coarse - 1);
        out.push_back(p);
        std::size_t a = 0;
        while (a < d && ++idx[a] == coarse) idx[a++] = 0;
        if (a == d) break;
    }
    return out;
}

ConjugateResult legendre_conjugate(const std::function<double(const Vec&)>& Lambda, const LambdaBox& box,
                                   const Vec& z) {
    const std::size_t d = z.size();
    if (box.lo.size() != d) throw std::invalid_argument("legendre_conjugate: box dimension");
    auto g = [&](const Vec& l) { return dot(l, z) - Lambda(l); };

    Vec p;
    double best = -kInf;
    for (const Vec& l : box.grid()) {
        const double v = g(l);
        if (v > best) {
            best = v;
            p = l;
        }
    }

    auto line_max = [&](Vec& at, const Vec& u) {
        double tLo = -kInf, tHi = kInf;
        for (std::size_t a = 0; a < d; ++a) {
            if (u[a] == 0.0) continue;
            double t1 = (box.lo[a] - at[a]) / u[a], t2 = (box.hi[a] - at[a]) / u[a];
            if (t1 > t2) std::swap(t1, t2);
            tLo = std::max(tLo, t1);
            tHi = std::min(tHi, t2);
        }
        if (!(tHi > tLo)) return g(at);
        auto neg = [&](double t) {
            Vec q = at;
            for (std::size_t a = 0; a < d; ++a) q[a] += t * u[a];
            return -g(q);
        };
        const auto [tStar, fStar] = boost::math::tools::brent_find_minima(neg, tLo, tHi, kBrentBits);
        if (-fStar > g(at)) {
            for (std::size_t a = 0; a < d; ++a) at[a] = std::clamp(at[a] + tStar * u[a], box.lo[a], box.hi[a]);
        }
        return g(at);
    };

    std::vector<Vec> dirs(d, Vec(d, 0.0));
    for (std::size_t a = 0; a < d; ++a) dirs[a][a] = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const Vec start = p;
        const double f0 = g(p);
        double biggest = 0.0;
        std::size_t biggestIdx = 0;
        double prev = f0;
        for (std::size_t k = 0; k < d; ++k) {
            const double f = line_max(p, dirs[k]);
            if (f - prev > biggest) {
                biggest = f - prev;
                biggestIdx = k;
            }
            prev = f;
        }
        Vec u(d);
        double norm = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            u[a] = p[a] - start[a];
            norm += u[a] * u[a];
        }
        if (norm > 0.0) {
            line_max(p, u);
            dirs.erase(dirs.begin() + static_cast<long>(biggestIdx));
            dirs.push_back(u);
        }
        if (g(p) - f0 <= 1e-15 * (1.0 + std::abs(f0))) {
            // Reset to axes once before accepting convergence.
            bool axes = true;
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t a = 0; a < d; ++a)
                    if (dirs[k][a] != (a == k ? 1.0 : 0.0)) axes = false;
            if (axes) break;
            for (std::size_t k = 0; k < d; ++k) {
                dirs[k].assign(d, 0.0);
                dirs[k][k] = 1.0;
            }
        }
    }

    ConjugateResult r;
    r.value = g(p);
    r.lambdaStar = p;
    for (std::size_t a = 0; a < d; ++a) {
        const double tol = 1e-6 * (box.hi[a] - box.lo[a]);
        if (p[a] - box.lo[a] < tol || box.hi[a] - p[a] < tol) r.boundary = true;
    }
    return r;
}

ConjugateResult legendre_conjugate(const LogMgfGrid& grid, const LambdaBox& box, const Vec& z) {
    if (!grid.source) throw std::invalid_argument("legendre_conjugate: grid without source");
    const EmpiricalLogMgf& src = *grid.source;
    if (src.dim() == 2 && !src.in_hull(z)) {
        ConjugateResult r;
        r.value = kInf;
        r.infinite = true;
        return r;
    }
    return legendre_conjugate([&](const Vec& l) { return src.value(l); }, box, z);
}

JbarResult jbar(const EmpiricalLogMgf& mgf, const LambdaBox& box, double v) {
    if (mgf.dim() != 2) throw std::invalid_argument("jbar: one-dimensional increments required");
    if (!(v > 0.0)) throw std::invalid_argument("jbar: v must be positive in direction ell");
    JbarResult out;
    const auto [uLo, uHi] = mgf.ray_interval({v, 1.0});
    if (!(uLo <= uHi)) return out;
    const double sLo = 1.0 / uHi;
    const double sHi = std::min(1.0, 1.0 / uLo);
    if (!(sLo <= sHi)) return out;
    auto Lambda = [&](const Vec& l) { return mgf.value(l); };
    ConjugateResult last;
    auto f = [&](double s) {
        last = legendre_conjugate(Lambda, box, {v / s, 1.0 / s});
        return s * last.value;
    };
    double sStar = sLo;
    if (sHi - sLo > 1e-12 * sHi) {
        sStar = boost::math::tools::brent_find_minima(f, sLo, sHi, kBrentBits).first;
    }
    out.value = f(sStar);
    out.sStar = sStar;
    out.lambdaStar = last.lambdaStar;
    out.boundary = last.boundary;
    out.infinite = false;
    return out;
}

RateFunctionTable rate_table(const EmpiricalLogMgf& mgf, const LambdaBox& box, const Vec& vGrid) {
    RateFunctionTable t;
    for (double v : vGrid) {
        const JbarResult r = jbar(mgf, box, v);
        t.v.push_back(v);
        t.Jbar.push_back(r.value);
        t.sStar.push_back(r.sStar);
        t.lambdaStar.push_back(r.lambdaStar);
        t.boundary.push_back(r.boundary);
    }
    return t;
}

void write_rate_csv(std::ostream& os, const RateFunctionTable& t) {
    os << "v,Jbar,sStar,lambdaStar_x,lambdaStar_t,boundary\n";
    os.precision(17);
    for (std::size_t i = 0; i < t.v.size(); ++i) {
        const Vec& l = t.lambdaStar[i];
        os << t.v[i] << ',' << t.Jbar[i] << ',' << t.sStar[i] << ',' << (l.size() > 0 ? l[0] : 0.0) << ','
           << (l.size() > 1 ? l[1] : 0.0) << ',' << (t.boundary[i] ? 1 : 0) << '\n';
    }
}

// ---------------------------------------------------------------- closed forms

namespace {
void check_omega(double w) {
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("omegaMin must lie in (0,1)");
}
}  // namespace

double lambda_bar(double omegaMin) {
    check_omega(omegaMin);
    return -0.5 * std::log(4.0 * omegaMin * (1.0 - omegaMin));
}

double mgf_phi(double lambda, double omegaMin) {
    const double lb = lambda_bar(omegaMin);
    if (lambda > lb) return kInf;
    const double e = std::exp(2.0 * (lambda - lb));
    // (1 - sqrt(1-e)) rewritten as e / (1 + sqrt(1-e)) to avoid cancellation.
    return e / ((1.0 + std::sqrt(std::max(0.0, 1.0 - e))) * 2.0 * (1.0 - omegaMin) * std::exp(lambda));
}

double conditioned_mgf_psi(int n, double lambda, double omegaMin) {
    if (n < 0) throw std::invalid_argument("conditioned_mgf_psi: n must be non-negative");
    if (lambda > lambda_bar(omegaMin)) throw std::domain_error("conditioned_mgf_psi: lambda exceeds lambda_bar");
    const double phi = mgf_phi(lambda, omegaMin);
    const double r = (1.0 - omegaMin) / omegaMin;
    double sum = 0.0, term = 1.0;
    for (int k = 0; k <= n; ++k) {
        sum += term;
        term *= r * phi * phi;
    }
    return std::pow(phi, n) / sum;
}

double rate_r(double t, double omegaMin) {
    if (!(t > 1.0)) throw std::domain_error("rate_r: t must exceed 1");
    const double rmax = (1.0 - omegaMin) / omegaMin;
    return t * lambda_bar(omegaMin) + 0.5 * t * std::log1p(-1.0 / (t * t)) +
           0.5 * std::log(rmax * (t + 1.0) / (t - 1.0));
}

double rate_r_numeric(double t, double omegaMin) {
    if (!(t > 1.0)) throw std::domain_error("rate_r_numeric: t must exceed 1");
    const double lb = lambda_bar(omegaMin);
    auto neg = [&](double l) { return -(l * t - std::log(mgf_phi(l, omegaMin))); };
    const auto res = boost::math::tools::brent_find_minima(neg, lb - 60.0, lb, 52);
    return -res.second;
}

double cramer_rate(double v, double p) {
    if (!(v >= -1.0 && v <= 1.0)) throw std::domain_error("cramer_rate: v must lie in [-1,1]");
    auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
    return term((1.0 + v) / 2.0, p) + term((1.0 - v) / 2.0, 1.0 - p);
}

}  // namespace rwre
