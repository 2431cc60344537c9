#pragma once

#include <memory>
#include <span>

#include "coclab/cocycle.hpp"

namespace coclab {

struct BernoulliMeasure {
    std::vector<double> probs;
};

struct MarkovMeasure {
    std::vector<double> rows;       // row-major stochastic matrix
    std::vector<double> stationary; // pi with pi P = pi
};

struct LebesgueTorusMeasure {};

struct MeasureSampler {
    std::variant<BernoulliMeasure, MarkovMeasure, LebesgueTorusMeasure> kind;
    std::uint64_t seed = 0;

    void validate(const BaseSystem& base) const; // throws IncompatibleSampler
};

// mu-distributed point; deterministic in (sampler.seed, index).
BasePoint sample_point(const MeasureSampler& sampler, const BaseSystem& base,
                       std::uint64_t index = 0);

struct ExponentEstimate {
    double value = 0.0;
    std::int64_t horizon_n = 0;
    int replicas = 1;
    double stderr_v = 0.0;
};

// One orbit pass per replica yields both exponents; the pair estimator is the
// workhorse, the single-sided ops are views of it.
struct ExponentPair {
    ExponentEstimate upper;
    ExponentEstimate lower;
    std::vector<double> replica_upper; // a_n(x_r)/n
    std::vector<double> replica_lower; // -a~_n(x_r)/n
};

ExponentPair estimate_exponents(const CocycleGenerator& gen, const BaseSystem& base,
                                const MeasureSampler& sampler, std::int64_t n, int replicas);
ExponentEstimate estimate_upper(const CocycleGenerator& gen, const BaseSystem& base,
                                const MeasureSampler& sampler, std::int64_t n, int replicas);
ExponentEstimate estimate_lower(const CocycleGenerator& gen, const BaseSystem& base,
                                const MeasureSampler& sampler, std::int64_t n, int replicas);

enum class SubadditiveKind { a, a_tilde, b, b_tilde };

struct SubadditiveSequence {
    std::vector<double> values; // values[0] = 0, indexed by n
    SubadditiveKind kind = SubadditiveKind::a;
    BasePoint x_ref;
    // rows[i][m] = the same quantity started at f^i x; needed by the good-time
    // detectors (a and a_tilde kinds only).
    std::shared_ptr<const SuffixNormTable> suffix;
};

SubadditiveSequence make_subadditive_sequence(const CocycleGenerator& gen, const BaseSystem& base,
                                              const BasePoint& x, std::int64_t n,
                                              SubadditiveKind kind, bool with_suffix_table);

// All n in [1, N] with values[n] - values_{n-i}(f^i x) >= (lambda_hat - eps) i
// for every i in [L, n].
std::vector<std::int64_t> km_good_times(const SubadditiveSequence& seq, double lambda_hat,
                                        double eps, std::int64_t L);

// |S cap [0, N-1]| / N where S uses per-i tolerances from the schedule and
// i runs from 1 to n.
double gk_good_density(const SubadditiveSequence& seq, double lambda_hat,
                       std::span<const double> eps_schedule, std::int64_t N);

} // namespace coclab
