#pragma once

#include <string>

#include "coclab/exponents.hpp"

namespace coclab {

struct PeriodicScore {
    double upper_rate = 0.0;     // (1/k) ln ||A^k_p||
    double lower_rate = 0.0;     // (1/k) ln ||(A^k_p)^{-1}||^{-1}
    double upper_exponent = 0.0; // (1/k) ln r(A^k_p)
    double lower_exponent = 0.0; // -(1/k) ln r((A^k_p)^{-1})
    double ln_q = 0.0;           // ln Q(p, k)
};

// All period-k orbits, one representative per cyclic class, in canonical
// order (lexicographically minimal rotation for words, lexicographic exact
// rational coordinates for the torus). Torus enumeration is exact integer
// lattice arithmetic; residuals are exact zeros.
std::vector<PeriodicOrbit> enumerate_periodic(const BaseSystem& base, std::int64_t k,
                                              std::uint64_t budget = (std::uint64_t{1} << 24));

PeriodicScore score_periodic(const CocycleGenerator& gen, const BaseSystem& base,
                             const PeriodicOrbit& orbit);

std::string orbit_label(const BaseSystem& base, const PeriodicOrbit& orbit);

enum class TheoremMode { exhaustive, constructive };

struct ScoreRow {
    std::int64_t k = 0;
    std::string label;
    PeriodicScore score;
    double residual = 0.0; // max(|lambda_hat - upper_rate|, |chi_hat - lower_rate|)
};

struct TheoremReport {
    TheoremMode mode = TheoremMode::exhaustive;
    bool success = false;
    double lambda_hat = 0.0;
    double chi_hat = 0.0;
    double eps_target = 0.0;
    double stderr_total = 0.0;
    std::vector<ScoreRow> table;
    ScoreRow winner;
    bool one_sided_upper_ok = false; // upper_exponent < lambda_hat + eps
    bool one_sided_lower_ok = false; // lower_exponent > chi_hat - eps
    std::vector<std::string> trace;  // constructive-mode log
};

// Knobs for the constructive recipe (good times -> recurrence return ->
// closing); the proof's unknown constants are exposed here.
struct ConstructiveOptions {
    std::int64_t orbit_N = 1200; // horizon of the good-time search
    std::int64_t L = 10;
    double delta = 0.05;
    ClosingParams closing; // D used to shrink the return threshold to delta/D
};

TheoremReport verify_main_theorem(const CocycleGenerator& gen, const BaseSystem& base,
                                  const MeasureSampler& sampler, const ExponentPair& exponents,
                                  double eps_target, std::int64_t k_max, std::int64_t N_min,
                                  TheoremMode mode = TheoremMode::exhaustive,
                                  const ConstructiveOptions& copts = {},
                                  std::uint64_t budget = (std::uint64_t{1} << 24));

struct NormRatesReport {
    std::vector<double> s_n;   // sup_x (1/n) ln ||A^n_x||, n = 1..n_max
    std::vector<double> t_k;   // max_p (1/k) ln ||A^k_p||, k = 1..k_max
    std::vector<double> q_s_n; // sup_x (1/n) ln Q(x, n)
    std::vector<double> q_t_k; // max_p (1/k) ln Q(p, k)
    double gap = 0.0;          // |s_{n_max} - max_k t_k|
    double q_gap = 0.0;
};

// Exact sup over allowed words for locally constant cocycles over shifts;
// sampled sup for the torus families.
NormRatesReport corollary_norm_rates(const CocycleGenerator& gen, const BaseSystem& base,
                                     std::int64_t n_max, std::int64_t k_max,
                                     int torus_samples = 10000, std::uint64_t seed = 0,
                                     std::uint64_t budget = (std::uint64_t{1} << 24));

} // namespace coclab
