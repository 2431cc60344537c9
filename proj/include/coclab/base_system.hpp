#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "coclab/errors.hpp"
#include "coclab/operator.hpp"
#include "coclab/rng.hpp"

namespace coclab {

// Shift space over a finite alphabet with a 0/1 transition matrix (empty
// transition = full shift). The metric is metric_base^(-N) where N is the
// first disagreement radius, capped at `horizon` (distance 0 beyond it).
struct ShiftSpace {
    int alphabet_size = 2;
    std::vector<std::uint8_t> transition; // row-major, empty means full shift
    double metric_base = 2.718281828459045;
    int horizon = 256;

    bool is_full() const { return transition.empty(); }
    bool allowed(int a, int b) const {
        return is_full() || transition[static_cast<std::size_t>(a) * alphabet_size + b] != 0;
    }
    void validate() const;
};

// On-demand extension of a symbolic window beyond its stored part.
// fwd_rows/bwd_rows are row-stochastic kernels over the alphabet; the symbol
// at each index is a pure function of (seed, index, neighbor symbol), so
// extension is deterministic regardless of query order.
struct SamplerExtension {
    std::uint64_t seed = 0;
    int alphabet = 2;
    std::vector<double> init_probs;
    std::vector<double> fwd_rows; // P(next | cur), row-major
    std::vector<double> bwd_rows; // P(prev | cur), row-major
    std::int64_t max_extent = (std::int64_t{1} << 24);
};

class SymbolBuffer {
public:
    static std::shared_ptr<SymbolBuffer> periodic(std::vector<int> word);
    static std::shared_ptr<SymbolBuffer> sampled(SamplerExtension ext);

    int symbol(std::int64_t i); // lazily extends; throws WindowExhausted past max_extent
    bool is_periodic() const { return periodic_; }
    std::int64_t period() const { return static_cast<std::int64_t>(word_.size()); }
    const std::vector<int>& word() const { return word_; }

private:
    SymbolBuffer() = default;
    int draw(std::span<const double> probs, std::int64_t index) const;

    bool periodic_ = false;
    std::vector<int> word_;       // one period, absolute indices 0..k-1
    SamplerExtension ext_;
    std::vector<int> fwd_;        // absolute indices 0, 1, 2, ...
    std::vector<int> bwd_;        // absolute indices -1, -2, ...
};

// A point of a shift space: shared bi-infinite sequence plus the position of
// the observer. Stepping the shift is a translation of center_offset.
struct SymbolicWindow {
    std::shared_ptr<SymbolBuffer> buffer;
    std::int64_t center_offset = 0;

    int symbol(std::int64_t rel) const { return buffer->symbol(center_offset + rel); }

    // Periodic repetition of `word`, validated against the shift's transitions
    // (including the wrap pair). Throws ForbiddenWrap.
    static SymbolicWindow periodic_word(const ShiftSpace& base, std::vector<int> word);
    static SymbolicWindow sampled(SamplerExtension ext);
};

// Hyperbolic toral automorphism given by an integer matrix with |det| = 1 and
// no eigenvalue on the unit circle.
struct TorusMap {
    int dim = 2;
    std::vector<std::int64_t> mat;     // row-major
    std::vector<std::int64_t> inv_mat; // filled by validate()

    std::int64_t at(int i, int j) const { return mat[static_cast<std::size_t>(i) * dim + j]; }
    void validate(); // checks |det| = 1 (exact) and hyperbolicity, computes inv_mat
    Operator as_operator() const;
    std::vector<double> eigen_moduli() const;
    double min_expansion_rate() const; // min over eigenvalues of |ln |lambda||
};

struct TorusPoint {
    std::vector<double> coords; // each in [0, 1)
    void reduce();
};

using BaseSystem = std::variant<ShiftSpace, TorusMap>;
using BasePoint = std::variant<SymbolicWindow, TorusPoint>;

struct ClosingParams {
    double D = 1.0;
    double gamma = 1.0;
    double delta0 = 0.1;
};

struct PeriodicOrbit {
    BasePoint point;
    std::int64_t period_k = 1;
    double residual = 0.0;
};

BasePoint step(const BaseSystem& base, const BasePoint& x, std::int64_t n);
double distance(const BaseSystem& base, const BasePoint& x, const BasePoint& y);

// Smallest k strictly inside (n(1+eps'), n(1+2 eps')) with dist(x, f^k x) < delta.
std::optional<std::int64_t> find_return(const BaseSystem& base, const BasePoint& x,
                                        std::int64_t n, double eps_prime, double delta);

// Periodic point shadowing the near-return segment x, ..., f^k x.
PeriodicOrbit close_orbit(const BaseSystem& base, const BasePoint& x, std::int64_t k);

// dist(f^i x, f^i p) for i = 0..k.
std::vector<double> shadowing_profile(const BaseSystem& base, const BasePoint& x,
                                      const BasePoint& p, std::int64_t k);

// Near-return segments used for envelope calibration.
struct ReturnPair {
    BasePoint x;
    std::int64_t k = 1;
    double dist = 0.0;
};

std::vector<ReturnPair> sample_return_pairs(const BaseSystem& base, int count,
                                            std::uint64_t seed, double delta_max);

double expansion_rate(const BaseSystem& base); // the gamma of the closing envelope

ClosingParams calibrate_closing_from_pairs(const BaseSystem& base,
                                           std::span<const ReturnPair> pairs);

ClosingParams calibrate_closing(const BaseSystem& base, int samples, std::uint64_t seed);

// Uniform-ish point used for calibration sweeps (allowed-transition word for
// shifts, Lebesgue for the torus).
BasePoint uniform_point(const BaseSystem& base, std::uint64_t seed, std::uint64_t index);

} // namespace coclab
