#pragma once

#include "netctrl/analyzer.hpp"
#include "netctrl/classical.hpp"
#include "netctrl/system.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netctrl {

class GenerationFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct GenSpec {
    std::uint64_t seed = 0;
    int max_nodes = 4;
    int node_dim = 3;
    int input_dim = 1;
    int entry_bound = 2;
    bool homogeneous = false;
    bool ensure_diagonalizable = false;
    // C = P^-1 J0 P with J0 carrying a Jordan block of length >= 2
    bool plant_jordan = false;
    double control_density = 0.5;

    void require_valid() const;
};

/// Deterministic in spec (integer entries, so every instance also carries its exact copy).
NetworkedSystem generate(const GenSpec& spec, const Tolerances& tol = {});

/// Seed of instance id within a batch seeded by batch_seed.
std::uint64_t instance_seed(std::uint64_t batch_seed, std::uint64_t id);

struct CrossReport {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    Dims dims;
    Verdict theorem;
    Verdict kalman;
    Verdict pbh;
    Verdict source;
    Verdict sink;
    std::optional<Verdict> corollary;
    std::string transform_source;  // empty when no admissible T was found
    bool agreement = true;
    bool fragile = false;
    bool disagreement = false;  // non-fragile disagreement
    double min_margin = kInf;
    std::vector<std::string> errors;
    std::optional<NetworkedSystem> system;
};

CrossReport cross_validate(const NetworkedSystem& sys, const Tolerances& tol, int kalman_cap = kKalmanCap);

struct BatchSummary {
    int trials = 0;
    std::map<std::string, std::map<std::string, int>> counts;  // method -> status -> count
    int agreements = 0;
    int disagreements = 0;  // non-fragile
    int fragile = 0;
    int fragile_disagreements = 0;
    int theorem_fallbacks = 0;  // theorem not applicable, oracles decide
    int errors = 0;
    std::map<std::string, int> transform_sources;

    double fragile_rate() const { return trials ? static_cast<double>(fragile) / trials : 0.0; }
};

/// Instances are validated in parallel; results are ordered by instance id.
std::vector<CrossReport> run_batch(const GenSpec& spec, int trials, const Tolerances& tol);
/// Serial reference for run_batch.
std::vector<CrossReport> run_batch_serial(const GenSpec& spec, int trials, const Tolerances& tol);

BatchSummary summarize(const std::vector<CrossReport>& reports);

}  // namespace netctrl
