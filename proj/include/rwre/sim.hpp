#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/quenched.hpp"
#include "rwre/rng.hpp"

namespace rwre {

struct HittingSample {
    Site target = 0;
    std::int64_t T = 0;     // steps taken (the horizon when censored)
    bool censored = false;
};

// Nearest-neighbour path in Z^dim; coords holds (steps+1)*dim integers.
struct PathSample {
    int dim = 1;
    std::vector<std::int64_t> coords;
    std::uint64_t masterSeed = 0;
    std::uint64_t replica = 0;
    std::size_t steps() const { return coords.size() / static_cast<std::size_t>(dim) - 1; }
    std::int64_t at(std::size_t n, int axis = 0) const {
        return coords[n * static_cast<std::size_t>(dim) + static_cast<std::size_t>(axis)];
    }
};

// Increments between consecutive regeneration times. displacement is stored
// flattened with `dim` entries per increment.
struct RegenerationRecord {
    int dim = 1;
    std::vector<std::int64_t> ell;
    std::vector<std::int64_t> displacement;
    std::vector<std::int64_t> duration;
    bool lastProvisional = false;

    std::size_t size() const { return duration.size(); }
    std::int64_t disp(std::size_t k, int axis = 0) const {
        return displacement[k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(axis)];
    }
    // Ratio estimator  E X_tau . ell / E tau  over all stored increments.
    double speed_estimate() const;
};

// First passage of `target` from `start`; the walk is reflected at `barrier`
// (omega := 1 there) when one is given.
HittingSample simulate_hitting(const EnvironmentWindow& env, Site target, std::int64_t horizon, Rng& rng,
                               Site start = 0, std::optional<Site> barrier = std::nullopt);

// Crossing from -> to with a fixed reflecting barrier; T counts steps from `from`.
HittingSample simulate_crossing(const EnvironmentWindow& env, Site from, Site to, Site barrier, std::int64_t horizon,
                                Rng& rng);

struct ReflectedSample {
    HittingSample plain;       // X
    HittingSample reflected;   // Xbar^{(n)}
    bool coupledEqual = true;  // the barrier never separated the two walks
};

// X and Xbar driven by the same uniforms. In Blocks mode Xbar's barrier sits
// b ladder blocks behind the furthest ladder point it has reached; in Sites
// mode b sites behind its running maximum.
ReflectedSample simulate_reflected(const EnvironmentWindow& env, const LadderDecomposition& ladder, Site target,
                                   long b, std::int64_t horizon, Rng& rng,
                                   ReflectionMode mode = ReflectionMode::Blocks);

// Position after `steps` steps (no target).
std::vector<Site> simulate_positions(const EnvironmentWindow& env, const std::vector<std::int64_t>& times, Rng& rng,
                                     std::optional<Site> barrier = std::nullopt);

PathSample simulate_path_1d(const EnvironmentWindow& env, std::int64_t steps, Rng& rng);

RegenerationRecord extract_regenerations(const PathSample& path, const std::vector<std::int64_t>& ell);

// Site law for walks on Z^d: probabilities for +e1, -e1, +e2, -e2, ...
struct SiteLawDD {
    std::vector<double> probs;
    double weight = 1.0;
};

class DistDD {
public:
    DistDD(int dim, std::vector<SiteLawDD> laws);
    static DistDD from_json(const nlohmann::json& j);
    int dim() const { return dim_; }
    const std::vector<SiteLawDD>& laws() const { return laws_; }
    const SiteLawDD& draw(std::uint64_t key) const;

private:
    int dim_;
    std::vector<SiteLawDD> laws_;
    std::vector<double> cumulative_;
};

PathSample simulate_walk_dD(const DistDD& dist, std::uint64_t seed, std::int64_t steps);

struct HarvestOptions {
    std::size_t incrementsPerChunk = 64;   // increments kept from each fresh environment
    std::int64_t segmentSteps = 4096;      // first simulation segment; later ones double
    std::int64_t lead = 200;               // required advance past a candidate before it counts
    std::int64_t maxStepsPerChunk = std::int64_t{1} << 28;
    unsigned threads = 1;
    std::size_t batch = 16;                // chunks per scheduling round; fixed so output is thread-independent
};

struct HarvestResult {
    RegenerationRecord record;
    std::size_t chunks = 0;
    std::size_t discarded = 0;  // confirmed increments beyond the per-chunk quota
};

// Confirmed regeneration increments in direction ell (+1 or -1). Each chunk
// uses a fresh environment and contributes the first incrementsPerChunk
// increments after its first regeneration time (the stretch from 0 to the
// first regeneration has a different law and is dropped).
HarvestResult harvest_regenerations(const EnvDistribution& dist, int ell, std::size_t count, std::uint64_t seed,
                                    const HarvestOptions& opts = {});

// Raw sample persistence. Every file starts with a header line carrying the
// config hash and master seed.
void write_samples_csv(std::ostream& os, const std::string& configHash, std::uint64_t seed,
                       const std::vector<HittingSample>& samples);
// Header line, then little-endian records: u64 replica, f64 value, u64 censored.
void write_samples_binary(std::ostream& os, const std::string& configHash, std::uint64_t seed,
                          const std::vector<HittingSample>& samples);
std::vector<HittingSample> read_samples_binary(std::istream& is, std::string* headerOut = nullptr);

}  // namespace rwre
