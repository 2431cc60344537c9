#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "coclab/base_system.hpp"
#include "coclab/operator.hpp"

namespace coclab {

// Declared Hölder data and uniform bounds of a generator:
//   ln ||A(x)||      <= lambda_prime
//   ln ||A(x)^{-1}|| <= -chi_prime
struct HolderData {
    double alpha = 1.0;
    double M = 1.0;
    double lambda_prime = 0.0;
    double chi_prime = 0.0;
};

struct ConstantGen {
    Operator a;
    Operator a_inv;
};

struct LocallyConstantGen {
    int memory = 0; // word window is [-memory, memory]
    std::map<std::vector<int>, std::pair<Operator, Operator>> table;
};

struct TorusSmoothGen {
    Operator a0;
    Operator a0_inv;
    double eta = 0.0;
    std::vector<std::int64_t> freq;
    Operator pattern; // fixed skew-symmetric-plus-diagonal field shape
};

struct CocycleGenerator {
    std::variant<ConstantGen, LocallyConstantGen, TorusSmoothGen> kind;
    int dim = 1;
    HolderData holder;
    NormKind norm = NormKind::l2_induced;
    bool check_bounds = true;

    bool is_constant() const { return std::holds_alternative<ConstantGen>(kind); }
    bool is_locally_constant() const { return std::holds_alternative<LocallyConstantGen>(kind); }
    bool is_torus_smooth() const { return std::holds_alternative<TorusSmoothGen>(kind); }
};

// Factories validate invertibility and fill lambda_prime/chi_prime when the
// declared values are NaN (exact for finite tables, analytic bound for the
// smooth family). Declared values are verified against the actual sup.
CocycleGenerator make_constant_generator(Operator a, HolderData h = {},
                                         NormKind norm = NormKind::l2_induced);
CocycleGenerator make_locally_constant_generator(int memory,
                                                 std::map<std::vector<int>, Operator> table,
                                                 HolderData h,
                                                 NormKind norm = NormKind::l2_induced);
CocycleGenerator make_torus_smooth_generator(Operator a0, double eta,
                                             std::vector<std::int64_t> freq, HolderData h,
                                             NormKind norm = NormKind::l2_induced);

// Pairing checks: generator family vs base kind, table coverage of all
// transition-allowed words of length 2m+1, frequency vector vs torus dim.
void validate_generator(const CocycleGenerator& gen, const BaseSystem& base);

// c * gen, with bounds and Hölder data adjusted.
CocycleGenerator scale_generator(const CocycleGenerator& gen, double c);

// A(x) and A(x)^{-1}; enforces the declared uniform bounds at runtime.
std::pair<Operator, Operator> generator_pair_at(const CocycleGenerator& gen,
                                                const BaseSystem& base, const BasePoint& x);
Operator generator_at(const CocycleGenerator& gen, const BaseSystem& base, const BasePoint& x);

// One orbit pass: forward product A^n_x and its inverse, both scale-tracked
// (the inverse is accumulated from per-step inverses, never by inverting the
// long product).
struct CocyclePass {
    ScaledOperator forward;
    ScaledOperator inverse;
};
CocyclePass cocycle_pass(const CocycleGenerator& gen, const BaseSystem& base,
                         const BasePoint& x, std::int64_t n);

// A^n_x for n of either sign (identity at n = 0).
ScaledOperator evaluate(const CocycleGenerator& gen, const BaseSystem& base,
                        const BasePoint& x, std::int64_t n);

double log_norm(const CocycleGenerator& gen, const BaseSystem& base,
                const BasePoint& x, std::int64_t n); // a_n(x) = ln ||A^n_x||
double log_inv_norm(const CocycleGenerator& gen, const BaseSystem& base,
                    const BasePoint& x, std::int64_t n); // ln ||(A^n_x)^{-1}||
double distortion_log(const CocycleGenerator& gen, const BaseSystem& base,
                      const BasePoint& x, std::int64_t n); // ln Q(x, n)

// Prefix sequences along one orbit: a[j] and a_tilde[j] for j = 0..N
// (or the b/b-tilde versions along the backward orbit).
struct PrefixLogNorms {
    std::vector<double> a;
    std::vector<double> a_tilde;
};
PrefixLogNorms prefix_log_norms(const CocycleGenerator& gen, const BaseSystem& base,
                                const BasePoint& x, std::int64_t n);
PrefixLogNorms prefix_log_norms_backward(const CocycleGenerator& gen, const BaseSystem& base,
                                         const BasePoint& x, std::int64_t n);

// rows[i][m] = a_m(f^i x) (or the tilde version) for i + m <= N. Quadratic
// work, linear memory per row; used by the good-time detectors.
struct SuffixNormTable {
    std::int64_t n = 0;
    std::vector<std::vector<double>> rows;
};
SuffixNormTable suffix_log_norm_table(const CocycleGenerator& gen, const BaseSystem& base,
                                      const BasePoint& x, std::int64_t n, bool tilde);

} // namespace coclab
