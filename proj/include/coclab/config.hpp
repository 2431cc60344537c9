#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "coclab/exponents.hpp"
#include "coclab/periodic.hpp"

namespace coclab {

struct Horizons {
    std::int64_t n = 1000;
    int replicas = 8;
    std::int64_t k_max = 8;
    std::int64_t N_min = 0;
    int truncation_N = 200;
    int depth = 8;
};

struct LyapSettings {
    double tail_tol = 1e-6;
    double ell = 4.0;
    double rho = 0.1;
    int check_points = 5;
    std::int64_t contraction_steps = 10;
    std::int64_t temperedness_N = 200;
};

struct JsrSettings {
    double target_gap = 1e-3;
    int max_depth = 30;
};

struct ConstructiveSettings {
    std::int64_t orbit_N = 1200;
    std::int64_t L = 10;
    double delta = 0.05;
};

struct ExperimentConfig {
    BaseSystem base;
    CocycleGenerator cocycle;
    MeasureSampler measure;
    double eps = 0.1;
    Horizons horizons;
    LyapSettings lyap;
    JsrSettings jsr;
    ConstructiveSettings constructive;
    TheoremMode mode = TheoremMode::exhaustive;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

// FNV-1a over the canonical serialization, as a 16-hex-digit string.
std::string config_hash(const ExperimentConfig& config);

} // namespace coclab
