#include "rwre/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "rwre/experiments.hpp"

namespace rwre {

using nlohmann::json;

namespace {

const std::vector<std::string> kExperiments = {"exact-check", "clt",     "stable", "localize",
                                               "laplace",     "dominant", "ldp",    "speed"};

// Reads parameters from the config (when given) and writes back the value in
// effect, so that the resolved object lists every knob with its default.
class Binder {
public:
    Binder(const json* params, const json* thresholds) : params_(params), thresholds_(thresholds) {}

    template <typename T>
    void param(const char* key, T& v) {
        bind(key, v, false);
    }
    template <typename T>
    void threshold(const char* key, T& v) {
        bind(key, v, true);
    }

    void positive(const char* key, double v) const {
        if (!(v > 0.0)) throw ConfigError(std::string("params.") + key, "must be positive");
    }

    void finish() const {
        auto check = [&](const json* src, const char* section, const std::set<std::string>& allowed,
                         const std::set<std::string>& other, const char* otherSection) {
            if (!src) return;
            for (const auto& [k, _] : src->items()) {
                if (allowed.count(k)) continue;
                if (other.count(k))
                    throw ConfigError(std::string(section) + "." + k,
                                      std::string("belongs under \"") + otherSection + "\"");
                throw ConfigError(std::string(section) + "." + k, "unknown key for this experiment");
            }
        };
        check(params_, "params", paramKeys_, thresholdKeys_, "thresholds");
        check(thresholds_, "thresholds", thresholdKeys_, paramKeys_, "params");
    }

    json params_out = json::object();
    json thresholds_out = json::object();

private:
    template <typename T>
    void bind(const char* key, T& v, bool isThreshold) {
        (isThreshold ? thresholdKeys_ : paramKeys_).insert(key);
        const json* src = isThreshold ? thresholds_ : params_;
        const std::string field = std::string(isThreshold ? "thresholds." : "params.") + key;
        if (src && src->contains(key)) {
            try {
                v = src->at(key).get<T>();
            } catch (const json::exception& e) {
                throw ConfigError(field, std::string("wrong type: ") + e.what());
            }
        }
        (isThreshold ? thresholds_out : params_out)[key] = v;
    }

    const json* params_;
    const json* thresholds_;
    std::set<std::string> paramKeys_, thresholdKeys_;
};

struct Plan {
    json params, thresholds;
    std::function<json(std::size_t index, std::uint64_t seed, unsigned threads, RawSink* sink)> runSeed;
    std::function<json(const json& perSeed)> aggregate;
};

double tail_exponent_for(const std::optional<EnvDistribution>& dist) {
    try {
        return solve_s(*dist).s;
    } catch (const std::exception& e) {
        throw ConfigError("dist", e.what());
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

void require_s(const std::string& experiment, double s, bool ok, const std::string& what) {
    if (!ok)
        throw ConfigError("dist", "experiment '" + experiment + "' requires " + what + " (dist has s = " + fmt(s) +
                                      ")");
}

// Walk over the per-seed entries that finished without an exception.
template <typename F>
void for_ok(const json& perSeed, F f) {
    for (const auto& e : perSeed)
        if (e.at("ok").get<bool>()) f(e.at("result"));
}

long failed_count(const json& perSeed) {
    long n = 0;
    for (const auto& e : perSeed) n += e.at("ok").get<bool>() ? 0 : 1;
    return n;
}

json all_pass_aggregate(const json& perSeed, long maxFailed) {
    long passed = 0, total = 0;
    for_ok(perSeed, [&](const json& r) {
        ++total;
        passed += r.value("pass", false) ? 1 : 0;
    });
    const long failed = failed_count(perSeed);
    return {{"seedsPassed", passed}, {"seedsCompleted", total}, {"seedsFailed", failed},
            {"pass", total > 0 && passed == total && failed <= maxFailed}};
}

Plan make_plan(const std::string& experiment, const std::optional<EnvDistribution>& dist, const json* paramsIn,
               const json* thresholdsIn) {
    Binder b(paramsIn, thresholdsIn);
    Plan plan;
    long maxFailed = 0;
    b.threshold("maxFailedSeeds", maxFailed);

    if (experiment == "exact-check") {
        ExactParams p;
        b.param("envCount", p.envCount);
        b.param("hitSites", p.hitSites);
        b.param("varSteps", p.varSteps);
        b.param("varDepth", p.varDepth);
        b.param("homogeneousP", p.homogeneousP);
        b.param("alphas", p.alphas);
        b.threshold("tolHit", p.tolHit);
        b.threshold("tolVar", p.tolVar);
        b.threshold("tolClosed", p.tolClosed);
        b.threshold("tolS", p.tolS);
        b.finish();
        b.positive("envCount", static_cast<double>(p.envCount));
        if (p.hitSites < 2) throw ConfigError("params.hitSites", "needs at least 2 sites");
        b.positive("varSteps", static_cast<double>(p.varSteps));
        for (double a : p.alphas)
            if (!(a > 0.0 && a < 0.5)) throw ConfigError("params.alphas", "each alpha must lie in (0, 1/2)");
        for (double q : p.homogeneousP)
            if (!(q > 0.5 && q < 1.0)) throw ConfigError("params.homogeneousP", "each p must lie in (1/2, 1)");
        plan.runSeed = [p](std::size_t, std::uint64_t seed, unsigned, RawSink*) { return exact_check(seed, p); };
        plan.aggregate = [maxFailed](const json& ps) { return all_pass_aggregate(ps, maxFailed); };
    } else if (experiment == "speed") {
        SpeedParams p;
        long regenSeeds = 1;
        b.param("n", p.n);
        b.param("leftDepth", p.leftDepth);
        b.param("increments", p.increments);
        b.param("regenerationSeeds", regenSeeds);
        b.threshold("tolWalk", p.tolWalk);
        b.threshold("tolRegen", p.tolRegen);
        b.finish();
        b.positive("n", static_cast<double>(p.n));
        b.positive("increments", static_cast<double>(p.increments));
        if (solomon_classify(*dist).regime == Transience::Recurrent)
            throw ConfigError("dist", "experiment 'speed' requires a transient law");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d, regenSeeds](std::size_t index, std::uint64_t seed, unsigned threads, RawSink*) {
            json r = {{"walk", speed_walk(d, seed, p)}};
            if (static_cast<long>(index) < regenSeeds) r["regeneration"] = speed_regeneration(d, seed, p, threads);
            return r;
        };
        const double vP = solomon_classify(*dist).speed;
        plan.aggregate = [p, vP, maxFailed](const json& ps) {
            double sum = 0.0;
            long count = 0;
            bool regenOk = true;
            long regenCount = 0;
            json regen = json::array();
            for_ok(ps, [&](const json& r) {
                sum += r.at("walk").at("speedEstimate").get<double>();
                ++count;
                if (r.contains("regeneration")) {
                    ++regenCount;
                    regenOk = regenOk && r.at("regeneration").at("pass").get<bool>();
                    regen.push_back(r.at("regeneration").at("speedEstimate"));
                }
            });
            const double vHat = count ? sum / count : 0.0;
            const double err = vP != 0.0 ? std::abs(vHat - vP) / std::abs(vP) : std::abs(vHat);
            const bool walkOk = count > 0 && err <= p.tolWalk;
            const long failed = failed_count(ps);
            return json{{"vP", vP},
                        {"walkSpeedMean", vHat},
                        {"walkRelError", err},
                        {"walkPass", walkOk},
                        {"regenerationEstimates", regen},
                        {"regenerationPass", regenOk && regenCount > 0},
                        {"seedsCompleted", count},
                        {"seedsFailed", failed},
                        {"pass", walkOk && regenOk && regenCount > 0 && failed <= maxFailed}};
        };
    } else if (experiment == "clt") {
        CltParams p;
        double minPass = 0.9, minWrongWorse = 0.9;
        b.param("n", p.n);
        b.param("replicas", p.replicas);
        b.param("leftDepth", p.leftDepth);
        b.param("walkMarginal", p.walkMarginal);
        b.param("tGrid", p.tGrid);
        b.threshold("ksThreshold", p.ksThreshold);
        b.threshold("minPassFraction", minPass);
        b.threshold("minWrongWorseFraction", minWrongWorse);
        b.finish();
        b.positive("n", static_cast<double>(p.n));
        b.positive("replicas", static_cast<double>(p.replicas));
        b.positive("leftDepth", static_cast<double>(p.leftDepth));
        for (double t : p.tGrid)
            if (!(t > 0.0)) throw ConfigError("params.tGrid", "grid points must be positive");
        const double s = tail_exponent_for(dist);
        require_s(experiment, s, s > 2.0, "s > 2");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d](std::size_t, std::uint64_t seed, unsigned threads, RawSink* sink) {
            return quenched_clt_experiment(d, seed, p, threads, sink);
        };
        plan.aggregate = [minPass, minWrongWorse, maxFailed](const json& ps) {
            long pass = 0, worse = 0, total = 0;
            for_ok(ps, [&](const json& r) {
                ++total;
                pass += r.at("pass").get<bool>() ? 1 : 0;
                worse += r.at("wrongWorse").get<bool>() ? 1 : 0;
            });
            const double fp = total ? static_cast<double>(pass) / total : 0.0;
            const double fw = total ? static_cast<double>(worse) / total : 0.0;
            const long failed = failed_count(ps);
            return json{{"environments", total},
                        {"ksPassFraction", fp},
                        {"wrongCenteringWorseFraction", fw},
                        {"seedsFailed", failed},
                        {"pass", total > 0 && fp >= minPass && fw >= minWrongWorse && failed <= maxFailed}};
        };
    } else if (experiment == "stable") {
        StableParams p;
        b.param("checks", p.checks);
        b.param("tailSamples", p.tailSamples);
        b.param("hillK", p.hillK);
        b.param("leftDepth", p.leftDepth);
        b.param("medianReplicas", p.medianReplicas);
        b.param("slopeN", p.slopeN);
        b.param("latticeSmoothing", p.latticeSmoothing);
        b.threshold("tolM1", p.tolM1);
        b.threshold("tolMean", p.tolMean);
        b.threshold("tolVar", p.tolVar);
        b.threshold("tolSlope", p.tolSlope);
        b.finish();
        static const std::set<std::string> known = {"M1", "mean", "var", "slope"};
        if (p.checks.empty()) throw ConfigError("params.checks", "at least one check is required");
        for (const auto& c : p.checks)
            if (!known.count(c)) throw ConfigError("params.checks", "unknown check '" + c + "'");
        if (p.hillK < 1 || p.hillK >= p.tailSamples)
            throw ConfigError("params.hillK", "must lie in [1, tailSamples)");
        if (p.slopeN.size() < 2) throw ConfigError("params.slopeN", "needs at least two sizes");
        for (long n : p.slopeN)
            if (n < 1) throw ConfigError("params.slopeN", "sizes must be positive");
        b.positive("medianReplicas", static_cast<double>(p.medianReplicas));
        const double s = tail_exponent_for(dist);
        auto has = [&](const char* c) { return std::find(p.checks.begin(), p.checks.end(), c) != p.checks.end(); };
        require_s(experiment, s, std::isfinite(s), "a finite tail exponent");
        if (has("var")) require_s(experiment, s, s < 2.0, "s < 2 for the var check");
        if (has("mean") || has("slope")) require_s(experiment, s, s < 1.0, "s < 1 for the mean and slope checks");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d](std::size_t, std::uint64_t seed, unsigned threads, RawSink*) {
            return stable_scaling_experiment(d, seed, p, threads);
        };
        plan.aggregate = [maxFailed](const json& ps) { return all_pass_aggregate(ps, maxFailed); };
    } else if (experiment == "localize") {
        LocalizationParams p;
        b.param("blockBudget", p.blockBudget);
        b.param("m", p.m);
        b.param("paths", p.paths);
        b.param("jMin", p.jMin);
        b.param("tBudget", p.tBudget);
        b.param("tMin", p.tMin);
        b.param("leftDepth", p.leftDepth);
        b.threshold("occupationThreshold", p.occupationThreshold);
        b.finish();
        b.positive("blockBudget", static_cast<double>(p.blockBudget));
        b.positive("paths", static_cast<double>(p.paths));
        if (!(p.m > 1.0)) throw ConfigError("params.m", "must exceed 1");
        const double s = tail_exponent_for(dist);
        require_s(experiment, s, s < 1.0, "s < 1");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d](std::size_t, std::uint64_t seed, unsigned threads, RawSink*) {
            return localization_experiment(d, seed, p, threads);
        };
        plan.aggregate = [maxFailed](const json& ps) {
            long found = 0, total = 0, occOk = 0;
            json occ = json::array();
            for_ok(ps, [&](const json& r) {
                ++total;
                if (r.at("found").get<bool>()) {
                    ++found;
                    occOk += r.at("pass").get<bool>() ? 1 : 0;
                    occ.push_back(r.at("occupation"));
                }
            });
            const long failed = failed_count(ps);
            return json{{"foundRate", total ? static_cast<double>(found) / total : 0.0},
                        {"witnessesFound", found},
                        {"witnessesPassing", occOk},
                        {"occupations", occ},
                        {"vacuous", found == 0},
                        {"seedsCompleted", total},
                        {"seedsFailed", failed},
                        {"pass", total > 0 && occOk == found && failed <= maxFailed}};
        };
    } else if (experiment == "laplace") {
        LaplaceParams p;
        b.param("blocks", p.blocks);
        b.param("replicas", p.replicas);
        b.param("leftDepth", p.leftDepth);
        b.param("lambdaMax", p.lambdaMax);
        b.param("lambdaStep", p.lambdaStep);
        b.param("horizonFactor", p.horizonFactor);
        b.threshold("threshold", p.threshold);
        b.finish();
        b.positive("blocks", static_cast<double>(p.blocks));
        b.positive("replicas", static_cast<double>(p.replicas));
        b.positive("lambdaStep", p.lambdaStep);
        const double s = tail_exponent_for(dist);
        require_s(experiment, s, s < 2.0, "s < 2");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d](std::size_t, std::uint64_t seed, unsigned threads, RawSink* sink) {
            return laplace_experiment(d, seed, p, threads, sink);
        };
        plan.aggregate = [maxFailed](const json& ps) { return all_pass_aggregate(ps, maxFailed); };
    } else if (experiment == "dominant") {
        DominantParams p;
        b.param("blocks", p.blocks);
        b.param("C", p.C);
        b.param("eta", p.eta);
        b.param("leftDepth", p.leftDepth);
        b.finish();
        b.positive("blocks", static_cast<double>(p.blocks));
        if (!(p.eta > 0.0 && p.eta <= 1.0)) throw ConfigError("params.eta", "must lie in (0, 1]");
        const double s = tail_exponent_for(dist);
        require_s(experiment, s, std::isfinite(s), "a finite tail exponent");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d](std::size_t, std::uint64_t seed, unsigned, RawSink* sink) {
            return dominant_experiment(d, seed, p, sink);
        };
        plan.aggregate = [maxFailed](const json& ps) {
            long found = 0, total = 0;
            for_ok(ps, [&](const json& r) {
                ++total;
                found += r.at("found").get<bool>() ? 1 : 0;
            });
            const long failed = failed_count(ps);
            const double freq = total ? static_cast<double>(found) / total : 0.0;
            return json{{"detectionFrequency", freq},
                        {"detections", found},
                        {"seedsCompleted", total},
                        {"seedsFailed", failed},
                        {"pass", freq > 0.0 && failed <= maxFailed}};
        };
    } else if (experiment == "ldp") {
        LdpParams p;
        b.param("increments", p.increments);
        b.param("lambdaLo", p.lambdaLo);
        b.param("lambdaHi", p.lambdaHi);
        b.param("coarse", p.coarse);
        b.param("vLo", p.vLo);
        b.param("vHi", p.vHi);
        b.param("vStep", p.vStep);
        b.param("rateT", p.rateT);
        b.param("psiN", p.psiN);
        b.param("psiLambda", p.psiLambda);
        b.param("tiltedSampling", p.tiltedSampling);
        b.param("tiltStep", p.tiltStep);
        b.threshold("tolR", p.tolR);
        b.threshold("tolPsi", p.tolPsi);
        b.threshold("tolAsymptote", p.tolAsymptote);
        b.threshold("tolJbarAtSpeed", p.tolJbarAtSpeed);
        b.threshold("tolCramer", p.tolCramer);
        b.threshold("tolConvexity", p.tolConvexity);
        b.threshold("tolMgfCurve", p.tolMgfCurve);
        b.finish();
        b.positive("increments", static_cast<double>(p.increments));
        if (p.lambdaLo.size() != 2) throw ConfigError("params.lambdaLo", "needs two entries (space, time)");
        if (p.lambdaHi.size() != 2) throw ConfigError("params.lambdaHi", "needs two entries (space, time)");
        for (int k = 0; k < 2; ++k)
            if (!(p.lambdaLo[k] < p.lambdaHi[k])) throw ConfigError("params.lambdaHi", "must exceed lambdaLo");
        if (!(p.vLo > 0.0 && p.vLo < p.vHi && p.vHi <= 1.0))
            throw ConfigError("params.vLo", "need 0 < vLo < vHi <= 1");
        b.positive("vStep", p.vStep);
        b.positive("tiltStep", p.tiltStep);
        if (p.coarse < 2) throw ConfigError("params.coarse", "needs at least 2 points per axis");
        if (solomon_classify(*dist).regime != Transience::Right)
            throw ConfigError("dist", "experiment 'ldp' requires a law transient to the right");
        const EnvDistribution d = *dist;
        plan.runSeed = [p, d](std::size_t, std::uint64_t seed, unsigned threads, RawSink* sink) {
            return ldp_experiment(d, seed, p, threads, sink);
        };
        plan.aggregate = [maxFailed](const json& ps) { return all_pass_aggregate(ps, maxFailed); };
    } else {
        throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
    }
    plan.params = std::move(b.params_out);
    plan.thresholds = std::move(b.thresholds_out);
    return plan;
}

std::vector<std::uint64_t> parse_seeds(const json& j) {
    std::vector<std::uint64_t> out;
    try {
        if (j.is_array()) {
            for (const auto& s : j) out.push_back(s.get<std::uint64_t>());
        } else if (j.is_object()) {
            for (const auto& [k, _] : j.items())
                if (k != "start" && k != "count") throw ConfigError("seeds." + k, "unknown key");
            const auto start = j.at("start").get<std::uint64_t>();
            const auto count = j.at("count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) out.push_back(start + i);
        } else {
            throw ConfigError("seeds", "expected a list or {\"start\", \"count\"}");
        }
    } catch (const json::exception& e) {
        throw ConfigError("seeds", e.what());
    }
    if (out.empty()) throw ConfigError("seeds", "at least one seed is required");
    return out;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

json ExperimentConfig::resolved() const {
    return {{"experiment", experiment},
            {"dist", dist ? dist->to_json() : json(nullptr)},
            {"seeds", seeds},
            {"params", params},
            {"thresholds", thresholds}};
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(resolved().dump()); }

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("(root)", "config must be a JSON object");
    static const std::set<std::string> top = {"experiment", "dist", "seeds", "params", "thresholds", "description"};
    for (const auto& [k, _] : j.items())
        if (!top.count(k)) throw ConfigError(k, "unknown top-level key");
    ExperimentConfig cfg;
    if (!j.contains("experiment") || !j.at("experiment").is_string())
        throw ConfigError("experiment", "required string, one of the catalog names");
    cfg.experiment = j.at("experiment").get<std::string>();
    if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end())
        throw ConfigError("experiment", "unknown experiment '" + cfg.experiment + "'");
    if (j.contains("dist") && !j.at("dist").is_null()) {
        try {
            cfg.dist = EnvDistribution::from_json(j.at("dist"));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            const std::string msg = e.what();
            throw ConfigError(msg.rfind("dist", 0) == 0 ? msg.substr(0, msg.find(':')) : "dist", msg);
        }
    } else if (cfg.experiment != "exact-check") {
        throw ConfigError("dist", "required for experiment '" + cfg.experiment + "'");
    }
    cfg.seeds = parse_seeds(j.contains("seeds") ? j.at("seeds") : json());
    const json* params = nullptr;
    const json* thresholds = nullptr;
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw ConfigError("params", "must be an object");
        params = &j.at("params");
    }
    if (j.contains("thresholds")) {
        if (!j.at("thresholds").is_object()) throw ConfigError("thresholds", "must be an object");
        thresholds = &j.at("thresholds");
    }
    const Plan plan = make_plan(cfg.experiment, cfg.dist, params, thresholds);
    cfg.params = plan.params;
    cfg.thresholds = plan.thresholds;
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("(file)", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json RunReport::payload() const {
    return {{"configHash", configHash}, {"config", config}, {"perSeed", perSeed}, {"aggregate", aggregate},
            {"pass", pass}};
}

json RunReport::to_json() const {
    json j = payload();
    j["timing"] = {{"startedAt", startedAt}, {"durations", durations}};
    return j;
}

RunReport run_experiment(const ExperimentConfig& cfg, unsigned threads,
                         const std::optional<std::filesystem::path>& outDir) {
    using clock = std::chrono::steady_clock;
    const Plan plan = make_plan(cfg.experiment, cfg.dist, &cfg.params, &cfg.thresholds);
    RunReport rep;
    rep.startedAt = utc_now();
    rep.config = cfg.resolved();
    rep.configHash = cfg.hash();
    if (outDir) std::filesystem::create_directories(*outDir);
    const auto t0 = clock::now();
    json perSeedTimes = json::array();
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const std::uint64_t seed = cfg.seeds[i];
        RawSink sink{rep.configHash, {}};
        const auto ts = clock::now();
        json entry = {{"seed", seed}};
        try {
            entry["result"] = plan.runSeed(i, seed, threads, outDir ? &sink : nullptr);
            entry["ok"] = true;
        } catch (const std::exception& e) {
            entry["ok"] = false;
            entry["error"] = e.what();
        }
        perSeedTimes.push_back(std::chrono::duration<double>(clock::now() - ts).count());
        if (outDir) {
            for (const auto& f : sink.files) {
                std::ofstream os(*outDir / ("seed" + std::to_string(seed) + "_" + f.name + ".csv"));
                os << f.contents;
            }
        }
        rep.perSeed.push_back(std::move(entry));
    }
    rep.aggregate = plan.aggregate(rep.perSeed);
    rep.pass = rep.aggregate.at("pass").get<bool>();
    rep.durations = {{"totalSeconds", std::chrono::duration<double>(clock::now() - t0).count()},
                     {"perSeedSeconds", perSeedTimes},
                     {"threads", threads}};
    if (outDir) {
        std::ofstream os(*outDir / "report.json");
        os << rep.to_json().dump(2) << '\n';
    }
    return rep;
}

const std::vector<CatalogEntry>& experiment_catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> v = {
            {"exact-check", "Closed-form quenched statistics against independent solvers",
             "tridiagonal harmonic solve; first-step second-moment recursion; homogeneous closed forms; "
             "s = log2((1-alpha)/alpha)",
             "none (random environments are generated internally)", {}},
            {"clt", "Standardized T_n in one environment versus the Gaussian law",
             "standard normal cdf with exact quenched mean and variance", "s > 2", {}},
            {"stable", "Tail indices of block statistics under Q and median scaling of E_omega T_nu_n",
             "Hill index against s (M1, mean) or s/2 (var); slope against 1/s", "finite s; s < 2 for var; s < 1 for mean and slope", {}},
            {"localize", "Witness search for a dominating trap block and occupation probability at t_m",
             "witness inequality M_j >= m^2 E_omega Tbar; occupation above threshold", "s < 1", {}},
            {"laplace", "Crossing time of the largest block, normalized by its quenched mean",
             "Laplace transform 1/(1+lambda) of Exp(1)", "s < 2", {}},
            {"dominant", "Detection frequency of a block dominating the total variance",
             "positive detection frequency", "finite s", {}},
            {"ldp", "Regeneration log-MGF, its conjugate and the projected velocity rate function",
             "closed forms for the homogeneous walk; Cramer rate of +-1 steps; convexity", "transient to the right", {}},
            {"speed", "Speed from walk positions and from regeneration increments",
             "(1 - E rho)/(1 + E rho)", "transient", {}},
        };
        const EnvDistribution probe = EnvDistribution::two_point(0.45);
        const EnvDistribution probe2 = EnvDistribution::two_point(1.0 / 17.0);
        const EnvDistribution probe3 = EnvDistribution::two_point(0.25);
        for (auto& e : v) {
            std::optional<EnvDistribution> d = probe;
            if (e.name == "clt" || e.name == "speed" || e.name == "ldp") d = probe2;
            if (e.name == "laplace" || e.name == "dominant") d = probe3;
            if (e.name == "stable") d = EnvDistribution::two_point(1.0 / 3.0 + 0.1);
            const Plan plan = make_plan(e.name, d, nullptr, nullptr);
            for (const auto& [k, _] : plan.params.items()) e.requiredParameters.push_back(k);
        }
        return v;
    }();
    return entries;
}

json catalog_json() {
    json out = json::array();
    for (const auto& e : experiment_catalog())
        out.push_back({{"name", e.name},
                       {"summary", e.summary},
                       {"oracle", e.oracle},
                       {"lawRequirement", e.lawRequirement},
                       {"parameters", e.requiredParameters}});
    return out;
}

std::string catalog_table() {
    std::ostringstream os;
    for (const auto& e : experiment_catalog()) {
        os << e.name << "\n";
        os << "  summary:    " << e.summary << "\n";
        os << "  law:        " << e.lawRequirement << "\n";
        os << "  oracle:     " << e.oracle << "\n";
        os << "  parameters: ";
        for (std::size_t i = 0; i < e.requiredParameters.size(); ++i)
            os << (i ? ", " : "") << e.requiredParameters[i];
        os << "\n";
    }
    return os.str();
}

}  // namespace rwre
