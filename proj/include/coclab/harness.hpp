#pragma once

#include "coclab/config.hpp"
#include "coclab/lyapunov_norm.hpp"
#include "coclab/spectral_radii.hpp"

namespace coclab {

// A stage failure wraps the underlying error with the stage name.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& msg)
        : Error("stage " + stage + ": " + msg), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct StageSelection {
    bool estimate = false;
    bool lyapnorm = false;
    bool periodic = false;
    bool corollary = false;
    bool jsr = false;

    static StageSelection all() { return {true, true, true, true, true}; }
    static StageSelection only_estimate() { return {true, false, false, false, false}; }
};

struct ResultBundle {
    ExponentPair exponents;
    LyapunovNormContext norm_ctx;
    std::vector<ContractionReport> contraction;
    std::vector<TemperednessReport> temperedness;
    TheoremReport theorem;
    NormRatesReport corollary;
    bool has_theorem = false;
    bool has_corollary = false;
    bool has_norm_checks = false;
    bool has_jsr = false;
    RadiusBounds jsr_exhaustive;
    RadiusBounds jsr_bb;
    std::vector<std::string> stages; // executed, in order

    std::string config_hash_hex;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string timestamp;

    nlohmann::json to_json() const;
};

// Fixed-order pipeline: estimate -> norm checks -> periodic verification ->
// corollary rates -> spectral radii. Writes exponents.csv,
// periodic_scores.csv, norm_checks.json, jsr.json, bundle.json under
// config.output_dir when write_files is set.
ResultBundle run_experiment(const ExperimentConfig& config,
                            const StageSelection& select = StageSelection::all(),
                            bool write_files = true);

std::string tool_version_string();

} // namespace coclab
