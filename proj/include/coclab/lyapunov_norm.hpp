#pragma once

#include "coclab/cocycle.hpp"

namespace coclab {

// Weights for the two-sided series norm; lambda/chi are the frozen exponent
// estimates of the experiment.
struct LyapunovNormContext {
    double lambda = 0.0;
    double chi = 0.0;
    double eps = 0.1;
    int truncation_N = 200;
    double tail_tol = 1e-6;
    double ell = 4.0; // regular-set level
    double rho = 0.1;

    void validate() const;
};

// Truncated series value plus a convergence flag: true iff the last 10 terms
// of each series are below tail_tol times the running partial sum. A false
// flag marks the point as unresolved at this horizon, not an error.
struct LyapNormValue {
    double value = 0.0;
    bool converged = true;
};

LyapNormValue lyap_vector_norm(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                               const BaseSystem& base, const BasePoint& x,
                               std::span<const double> u);

// Sampled lower bound on sup { ||A u||_{y,eps} : ||u||_{x,eps} = 1 }:
// random directions, coordinate ascent from the best, plus an angular grid
// in dimension <= 2.
LyapNormValue lyap_op_norm(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                           const BaseSystem& base, const Operator& a,
                           const BasePoint& x, const BasePoint& y, std::uint64_t seed = 0);

struct ContractionEntry {
    std::int64_t step = 0;
    double forward_ratio = 0.0;  // ||A_x||_{fx<-x} estimate / e^{lambda+eps}
    double backward_ratio = 0.0; // ||A_x^{-1}||_{f^{-1}x<-x} estimate / e^{-chi+eps}
    bool forward_converged = true;
    bool backward_converged = true;
};

struct ContractionReport {
    std::vector<ContractionEntry> entries;
    double slack = 0.0;   // 10 * tail_tol
    int violations = 0;   // converged evaluations exceeding 1 + slack
    int nonconverged = 0; // evaluations excluded by the convergence flag
    double max_forward_ratio = 0.0;
    double max_backward_ratio = 0.0;
};

ContractionReport check_contraction(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                                    const BaseSystem& base, const BasePoint& x,
                                    std::int64_t steps, std::uint64_t seed = 0);

struct TemperednessReport {
    std::int64_t N = 0;
    std::vector<double> M_eps_values;       // index 0..2N maps to orbit time -N..N
    std::vector<double> M_eps_prime_values;
    double K_rho_truncated = 0.0;
    double forward_slope = 0.0;
    double backward_slope = 0.0;
};

TemperednessReport temperedness_diagnostic(const LyapunovNormContext& ctx,
                                           const CocycleGenerator& gen, const BaseSystem& base,
                                           const BasePoint& x, std::int64_t N);

struct ShadowGrowthReport {
    double c_forward = 0.0;
    double c_backward = 0.0;
    int violations = 0;
    std::vector<double> forward_log_norms;  // ln ||A^n_p||, n = 0..m
    std::vector<double> backward_log_norms; // ln ||(A^n_p)^{-1}||, n = 0..m
};

// Checks the norm growth of the shadowing orbit p against
//   ln ||A^n_p||        <= ln(ell) + c ell delta^alpha + n (lambda + eps)
//   ln ||(A^n_p)^{-1}|| <= ln(ell) + eps min(n, m-n) + c ell delta^alpha + n (-chi + eps)
// with c fitted as the smallest constant making the segment pass. Throws
// ProfileViolated when (x, p) do not satisfy the closeness envelope at
// scale delta with the given gamma.
ShadowGrowthReport shadow_growth_check(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                                       const BaseSystem& base, const BasePoint& x,
                                       const BasePoint& p, std::int64_t m, double ell,
                                       double delta, double gamma);

} // namespace coclab
