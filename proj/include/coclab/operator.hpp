#pragma once

#include <span>
#include <string>
#include <vector>

#include "coclab/errors.hpp"

namespace coclab {

enum class NormKind { l2_induced, l1_induced, linf_induced };

std::string to_string(NormKind k);
NormKind norm_kind_from_string(const std::string& s);

// Dense square real matrix, row-major. Entries are validated finite on
// construction; this is the carrier for generator values and cocycle products.
class Operator {
public:
    Operator() : Operator(1) {}
    explicit Operator(int dim);
    Operator(int dim, std::vector<double> entries);

    static Operator identity(int dim);
    static Operator diagonal(std::span<const double> d);
    static Operator from_rows(const std::vector<std::vector<double>>& rows);

    int dim() const { return dim_; }
    double& at(int i, int j) { return entries_[static_cast<std::size_t>(i) * dim_ + j]; }
    double at(int i, int j) const { return entries_[static_cast<std::size_t>(i) * dim_ + j]; }
    const std::vector<double>& entries() const { return entries_; }

    Operator operator*(const Operator& rhs) const;
    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator scaled(double c) const;
    Operator transpose() const;
    std::vector<double> apply(std::span<const double> v) const;

    double max_abs_entry() const;
    void check_finite() const; // throws Error on NaN/Inf

private:
    int dim_;
    std::vector<double> entries_;
};

// Induced operator norm. l1 = max column abs sum, linf = max row abs sum,
// l2 = largest singular value.
double op_norm(const Operator& a, NormKind kind = NormKind::l2_induced);

// Vector norm matching the induced-norm kind.
double vec_norm(std::span<const double> v, NormKind kind = NormKind::l2_induced);

// Inverse via LU with partial pivoting. Throws SingularOperator when the
// condition estimate exceeds 1e14.
Operator invert(const Operator& a);

// Largest eigenvalue modulus. Dense eigensolve for dim <= 64, power iteration
// with quadratic extraction beyond (eigensolve fallback if it stalls).
double spectral_radius(const Operator& a);

// Moduli of all eigenvalues, unsorted.
std::vector<double> eigenvalue_moduli(const Operator& a);

// exp(A) by scaling and squaring with a truncated Taylor series; used for the
// smooth torus generator family.
Operator matrix_exp(const Operator& a);

// Metric on the operator group: ||A - B|| + ||A^{-1} - B^{-1}||.
double group_metric(const Operator& a, const Operator& b, NormKind kind = NormKind::l2_induced);

// Product with a running log-scale factor so that norms of long cocycle
// products never leave the double range. True operator = e^{log_scale} * mat,
// with mat kept at unit sup-entry scale.
struct ScaledOperator {
    Operator mat;
    double log_scale = 0.0;

    static ScaledOperator identity(int dim) { return {Operator::identity(dim), 0.0}; }

    void multiply_left(const Operator& a);  // mat <- a * mat
    void multiply_right(const Operator& a); // mat <- mat * a
    void renormalize();

    double log_norm(NormKind kind = NormKind::l2_induced) const;
    double log_spectral_radius() const;
    ScaledOperator inverse() const;

    // e^{log_scale} * mat as a plain operator; only safe at small horizons.
    Operator dense() const;
};

} // namespace coclab
