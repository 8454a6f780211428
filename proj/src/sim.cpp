#include "rwre/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rwre/parallel.hpp"

namespace rwre {

namespace {

// Fast omega lookup: stored values inside the window, generated outside.
class OmegaView {
public:
    explicit OmegaView(const EnvironmentWindow& env)
        : env_(env), data_(env.omega_values().data()), lo_(env.lo()), hi_(env.hi()) {}
    double operator()(Site x) const {
        if (x >= lo_ && x <= hi_) return data_[x - lo_];
        return env_.omega_at(x);
    }

private:
    const EnvironmentWindow& env_;
    const double* data_;
    Site lo_, hi_;
};

}  // namespace

double RegenerationRecord::speed_estimate() const {
    if (duration.empty()) throw std::logic_error("speed_estimate: empty record");
    long double num = 0.0L, den = 0.0L;
    for (std::size_t k = 0; k < duration.size(); ++k) {
        long double dot = 0.0L;
        for (int a = 0; a < dim; ++a) dot += static_cast<long double>(disp(k, a)) * ell[static_cast<std::size_t>(a)];
        num += dot;
        den += static_cast<long double>(duration[k]);
    }
    return static_cast<double>(num / den);
}

HittingSample simulate_hitting(const EnvironmentWindow& env, Site target, std::int64_t horizon, Rng& rng, Site start,
                               std::optional<Site> barrier) {
    if (target <= start) throw std::invalid_argument("simulate_hitting: target must exceed start");
    if (horizon < target - start) throw std::invalid_argument("simulate_hitting: horizon shorter than distance");
    const OmegaView om(env);
    const Site bar = barrier.value_or(std::numeric_limits<Site>::min());
    Site x = start;
    std::int64_t t = 0;
    while (x < target) {
        if (t >= horizon) return {target, t, true};
        const double w = x == bar ? 1.0 : om(x);
        x += rng.uniform() < w ? 1 : -1;
        ++t;
    }
    return {target, t, false};
}

HittingSample simulate_crossing(const EnvironmentWindow& env, Site from, Site to, Site barrier, std::int64_t horizon,
                                Rng& rng) {
    if (barrier > from) throw std::invalid_argument("simulate_crossing: barrier right of start");
    return simulate_hitting(env, to, horizon, rng, from, barrier);
}

ReflectedSample simulate_reflected(const EnvironmentWindow& env, const LadderDecomposition& ladder, Site target,
                                   long b, std::int64_t horizon, Rng& rng, ReflectionMode mode) {
    if (b < 0) throw std::invalid_argument("simulate_reflected: negative reflection depth");
    const Site start = ladder.nu.at(0);
    if (target <= start) throw std::invalid_argument("simulate_reflected: target must exceed start");
    if (horizon < target - start) throw std::invalid_argument("simulate_reflected: horizon shorter than distance");
    const OmegaView om(env);

    long K = 0;  // furthest ladder index reached by Xbar
    Site maxBar = start;
    auto barrierFor = [&]() -> Site {
        if (mode == ReflectionMode::Sites) return maxBar - b;
        while (static_cast<std::size_t>(K + 1) < ladder.nu.size() && ladder.nu[static_cast<std::size_t>(K + 1)] <= maxBar)
            ++K;
        return ladder.nu_at(K - b);
    };

    ReflectedSample out;
    out.plain.target = out.reflected.target = target;
    Site x = start, xb = start;
    Site barrier = barrierFor();
    bool doneX = false, doneB = false;
    std::int64_t t = 0;
    while (!(doneX && doneB)) {
        if (t >= horizon) break;
        const double u = rng.uniform();
        const double wx = om(x);
        if (!doneB) {
            const double wb = xb == barrier ? 1.0 : (xb == x ? wx : om(xb));
            if (xb == x && xb == barrier && !(u < wx)) out.coupledEqual = false;
            xb += u < wb ? 1 : -1;
            if (xb > maxBar) {
                maxBar = xb;
                barrier = barrierFor();
            }
        }
        if (!doneX) x += u < wx ? 1 : -1;
        ++t;
        if (!doneB && xb >= target) {
            doneB = true;
            out.reflected.T = t;
        }
        if (!doneX && x >= target) {
            doneX = true;
            out.plain.T = t;
        }
    }
    if (!doneB) {
        out.reflected.T = t;
        out.reflected.censored = true;
    }
    if (!doneX) {
        out.plain.T = t;
        out.plain.censored = true;
    }
    return out;
}

std::vector<Site> simulate_positions(const EnvironmentWindow& env, const std::vector<std::int64_t>& times, Rng& rng,
                                     std::optional<Site> barrier) {
    if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("simulate_positions: unsorted times");
    const OmegaView om(env);
    const Site bar = barrier.value_or(std::numeric_limits<Site>::min());
    std::vector<Site> out;
    out.reserve(times.size());
    Site x = 0;
    std::int64_t t = 0;
    for (std::int64_t target : times) {
        if (target < 0) throw std::invalid_argument("simulate_positions: negative time");
        for (; t < target; ++t) {
            const double w = x == bar ? 1.0 : om(x);
            x += rng.uniform() < w ? 1 : -1;
        }
        out.push_back(x);
    }
    return out;
}

PathSample simulate_path_1d(const EnvironmentWindow& env, std::int64_t steps, Rng& rng) {
    if (steps < 0) throw std::invalid_argument("simulate_path_1d: negative steps");
    const OmegaView om(env);
    PathSample p;
    p.dim = 1;
    p.coords.resize(static_cast<std::size_t>(steps) + 1);
    Site x = 0;
    p.coords[0] = 0;
    for (std::int64_t t = 1; t <= steps; ++t) {
        x += rng.uniform() < om(x) ? 1 : -1;
        p.coords[static_cast<std::size_t>(t)] = x;
    }
    return p;
}

namespace {

std::vector<std::int64_t> project(const PathSample& path, const std::vector<std::int64_t>& ell) {
    const std::size_t len = path.steps() + 1;
    std::vector<std::int64_t> h(len);
    for (std::size_t n = 0; n < len; ++n) {
        std::int64_t dot = 0;
        for (int a = 0; a < path.dim; ++a) dot += path.at(n, a) * ell[static_cast<std::size_t>(a)];
        h[n] = dot;
    }
    return h;
}

// Times n in (0, len) at which h_n exceeds all earlier levels and is never
// undercut later within the path.
std::vector<std::size_t> regeneration_times(const std::vector<std::int64_t>& h, std::size_t lastCandidate) {
    const std::size_t len = h.size();
    std::vector<std::int64_t> sufMin(len);
    sufMin[len - 1] = h[len - 1];
    for (std::size_t n = len - 1; n-- > 0;) sufMin[n] = std::min(h[n], sufMin[n + 1]);
    std::vector<std::size_t> out;
    std::int64_t prefMax = h[0];
    for (std::size_t n = 1; n <= std::min(lastCandidate, len - 1); ++n) {
        if (h[n] > prefMax && sufMin[n] >= h[n]) out.push_back(n);
        prefMax = std::max(prefMax, h[n]);
    }
    return out;
}

}  // namespace

RegenerationRecord extract_regenerations(const PathSample& path, const std::vector<std::int64_t>& ell) {
    if (static_cast<int>(ell.size()) != path.dim) throw std::invalid_argument("extract_regenerations: ell dimension");
    if (path.coords.size() < static_cast<std::size_t>(path.dim) * 2)
        throw std::invalid_argument("extract_regenerations: path too short");
    const std::vector<std::int64_t> h = project(path, ell);
    const std::vector<std::size_t> times = regeneration_times(h, h.size() - 1);
    if (times.size() < 2 && !(times.size() == 1 && times[0] < h.size() - 1))
        throw std::runtime_error("extract_regenerations: no confirmed regeneration in path");
    RegenerationRecord rec;
    rec.dim = path.dim;
    rec.ell = ell;
    std::size_t prev = 0;
    for (std::size_t n : times) {
        for (int a = 0; a < path.dim; ++a) rec.displacement.push_back(path.at(n, a) - path.at(prev, a));
        rec.duration.push_back(static_cast<std::int64_t>(n - prev));
        prev = n;
    }
    // Nothing after the final regeneration is observed, so its status is open.
    rec.lastProvisional = true;
    return rec;
}

// ---------------------------------------------------------------- d-dim walks

DistDD::DistDD(int dim, std::vector<SiteLawDD> laws) : dim_(dim), laws_(std::move(laws)) {
    if (dim_ < 1) throw std::invalid_argument("dist_dD.dim: must be >= 1");
    if (laws_.empty()) throw std::invalid_argument("dist_dD.laws: at least one law required");
    double total = 0.0;
    for (std::size_t i = 0; i < laws_.size(); ++i) {
        const auto& l = laws_[i];
        const std::string where = "dist_dD.laws[" + std::to_string(i) + "]";
        if (l.probs.size() != static_cast<std::size_t>(2 * dim_))
            throw std::invalid_argument(where + ".probs: need 2*dim entries");
        double s = 0.0;
        for (double p : l.probs) {
            if (!(p >= 0.0)) throw std::invalid_argument(where + ".probs: negative probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument(where + ".probs: site law not normalized");
        if (!(l.weight > 0.0)) throw std::invalid_argument(where + ".weight: must be positive");
        total += l.weight;
        cumulative_.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("dist_dD.laws: weights must sum to 1");
    cumulative_.back() = 1.0;
}

DistDD DistDD::from_json(const nlohmann::json& j) {
    std::vector<SiteLawDD> laws;
    for (const auto& l : j.at("laws")) laws.push_back({l.at("probs").get<std::vector<double>>(), l.value("weight", 1.0)});
    return DistDD(j.at("dim").get<int>(), std::move(laws));
}

const SiteLawDD& DistDD::draw(std::uint64_t key) const {
    const double u = to_unit(key);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return laws_[static_cast<std::size_t>(it - cumulative_.begin())];
}

PathSample simulate_walk_dD(const DistDD& dist, std::uint64_t seed, std::int64_t steps) {
    if (steps < 0) throw std::invalid_argument("simulate_walk_dD: negative steps");
    const int d = dist.dim();
    PathSample p;
    p.dim = d;
    p.masterSeed = seed;
    p.coords.assign(static_cast<std::size_t>(steps + 1) * static_cast<std::size_t>(d), 0);
    std::vector<std::int64_t> x(static_cast<std::size_t>(d), 0);
    Rng rng(hash_combine(seed, 0x77616c6bULL));
    for (std::int64_t t = 1; t <= steps; ++t) {
        std::uint64_t key = seed;
        for (int a = 0; a < d; ++a) key = hash_combine(key, static_cast<std::uint64_t>(x[static_cast<std::size_t>(a)]));
        const SiteLawDD& law = dist.draw(key);
        double u = rng.uniform();
        int dir = 2 * d - 1;
        for (int k = 0; k < 2 * d; ++k) {
            if (u < law.probs[static_cast<std::size_t>(k)]) {
                dir = k;
                break;
            }
            u -= law.probs[static_cast<std::size_t>(k)];
        }
        // Guard against rounding picking a zero-probability final direction.
        while (law.probs[static_cast<std::size_t>(dir)] == 0.0) --dir;
        x[static_cast<std::size_t>(dir / 2)] += dir % 2 == 0 ? 1 : -1;
        std::copy(x.begin(), x.end(), p.coords.begin() + t * d);
    }
    return p;
}

// ---------------------------------------------------------------- harvesting

namespace {

struct ChunkOut {
    std::vector<std::int64_t> disp, dur;
    std::size_t discarded = 0;
};

ChunkOut harvest_chunk(const EnvDistribution& dist, int ell, std::uint64_t seed, std::size_t c,
                       const HarvestOptions& o) {
    const std::uint64_t envSeed = hash_combine(seed, c, 0x656e76ULL);
    Rng rng(hash_combine(seed, c, 0x77616c6bULL));
    const Site span = o.segmentSteps + 1024;
    const EnvironmentWindow env =
        ell > 0 ? sample_window_P(dist, envSeed, -1024, span) : sample_window_P(dist, envSeed, -span, 1024);
    const OmegaView om(env);
    std::vector<std::int64_t> h;
    h.reserve(static_cast<std::size_t>(o.segmentSteps) * 2);
    Site x = 0;
    h.push_back(0);
    auto advance = [&](std::int64_t steps) {
        for (std::int64_t t = 0; t < steps; ++t) {
            x += rng.uniform() < om(x) ? 1 : -1;
            h.push_back(ell > 0 ? x : -x);
        }
    };
    // Stop after a fixed number of increments rather than at a fixed time:
    // increments that happen to fit in a time window are biased towards
    // short durations, while the first K increments are exactly i.i.d.
    const std::size_t need = o.incrementsPerChunk + 1;
    std::int64_t seg = o.segmentSteps, total = 0;
    std::vector<std::size_t> confirmed;
    while (true) {
        if (total >= o.maxStepsPerChunk)
            throw std::runtime_error("harvest_regenerations: step budget per environment exceeded");
        const std::int64_t step = std::min(seg, o.maxStepsPerChunk - total);
        advance(step);
        total += step;
        seg *= 2;
        const std::int64_t settled = h.back() - o.lead;
        confirmed.clear();
        for (std::size_t n : regeneration_times(h, h.size() - 1))
            if (h[n] <= settled) confirmed.push_back(n);
        if (confirmed.size() >= need) break;
    }
    ChunkOut out;
    out.discarded = confirmed.size() - need;
    for (std::size_t k = 1; k < need; ++k) {
        out.disp.push_back(static_cast<std::int64_t>(ell) * (h[confirmed[k]] - h[confirmed[k - 1]]));
        out.dur.push_back(static_cast<std::int64_t>(confirmed[k] - confirmed[k - 1]));
    }
    return out;
}

}  // namespace

HarvestResult harvest_regenerations(const EnvDistribution& dist, int ell, std::size_t count, std::uint64_t seed,
                                    const HarvestOptions& opts) {
    if (ell != 1 && ell != -1) throw std::invalid_argument("harvest_regenerations: ell must be +1 or -1");
    if (opts.segmentSteps < 2 || opts.batch < 1 || opts.incrementsPerChunk < 1 || opts.lead < 1) throw std::invalid_argument("harvest_regenerations: bad options");
    HarvestResult res;
    res.record.dim = 1;
    res.record.ell = {ell};
    const std::size_t maxChunks = 1u << 24;
    while (res.record.size() < count) {
        if (res.chunks >= maxChunks) throw std::runtime_error("harvest_regenerations: confirmation budget exceeded");
        std::vector<ChunkOut> outs(opts.batch);
        const std::size_t base = res.chunks;
        parallel_for(opts.batch, opts.threads,
                     [&](std::size_t k) { outs[k] = harvest_chunk(dist, ell, seed, base + k, opts); });
        res.chunks += opts.batch;
        for (const ChunkOut& o : outs) {
            res.discarded += o.discarded;
            for (std::size_t k = 0; k < o.dur.size() && res.record.size() < count; ++k) {
                res.record.displacement.push_back(o.disp[k]);
                res.record.duration.push_back(o.dur[k]);
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------- persistence

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("read_samples_binary: truncated record");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::string header_line(const std::string& configHash, std::uint64_t seed) {
    return "# configHash=" + configHash + " masterSeed=" + std::to_string(seed) + "\n";
}

}  // namespace

void write_samples_csv(std::ostream& os, const std::string& configHash, std::uint64_t seed,
                       const std::vector<HittingSample>& samples) {
    os << header_line(configHash, seed) << "replica,value,censored\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        os << i << ',' << samples[i].T << ',' << (samples[i].censored ? 1 : 0) << '\n';
}

void write_samples_binary(std::ostream& os, const std::string& configHash, std::uint64_t seed,
                          const std::vector<HittingSample>& samples) {
    os << header_line(configHash, seed);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        put_u64(os, i);
        const double v = static_cast<double>(samples[i].T);
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(os, bits);
        put_u64(os, samples[i].censored ? 1 : 0);
    }
}

std::vector<HittingSample> read_samples_binary(std::istream& is, std::string* headerOut) {
    std::string header;
    std::getline(is, header);
    if (header.rfind("# configHash=", 0) != 0) throw std::runtime_error("read_samples_binary: missing header");
    if (headerOut) *headerOut = header;
    std::vector<HittingSample> out;
    while (is.peek() != std::char_traits<char>::eof()) {
        get_u64(is);
        const std::uint64_t bits = get_u64(is);
        double v;
        std::memcpy(&v, &bits, 8);
        const std::uint64_t cens = get_u64(is);
        out.push_back({0, static_cast<std::int64_t>(v), cens != 0});
    }
    return out;
}

}  // namespace rwre
