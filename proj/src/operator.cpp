#include "coclab/operator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace coclab {

std::string to_string(NormKind k) {
    switch (k) {
        case NormKind::l2_induced: return "l2";
        case NormKind::l1_induced: return "l1";
        case NormKind::linf_induced: return "linf";
    }
    return "l2";
}

NormKind norm_kind_from_string(const std::string& s) {
    if (s == "l2" || s == "l2_induced") return NormKind::l2_induced;
    if (s == "l1" || s == "l1_induced") return NormKind::l1_induced;
    if (s == "linf" || s == "linf_induced") return NormKind::linf_induced;
    throw ConfigError("unknown norm kind: " + s);
}

Operator::Operator(int dim) : dim_(dim), entries_(static_cast<std::size_t>(dim) * dim, 0.0) {
    if (dim < 1) throw Error("Operator dim must be >= 1");
}

Operator::Operator(int dim, std::vector<double> entries) : dim_(dim), entries_(std::move(entries)) {
    if (dim < 1) throw Error("Operator dim must be >= 1");
    if (entries_.size() != static_cast<std::size_t>(dim) * dim)
        throw Error("Operator entry count does not match dim*dim");
    check_finite();
}

Operator Operator::identity(int dim) {
    Operator a(dim);
    for (int i = 0; i < dim; ++i) a.at(i, i) = 1.0;
    return a;
}

Operator Operator::diagonal(std::span<const double> d) {
    Operator a(static_cast<int>(d.size()));
    for (int i = 0; i < a.dim(); ++i) a.at(i, i) = d[static_cast<std::size_t>(i)];
    a.check_finite();
    return a;
}

Operator Operator::from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    if (n < 1) throw Error("empty matrix");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n) throw Error("ragged or non-square matrix rows");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return Operator(n, std::move(flat));
}

void Operator::check_finite() const {
    for (double v : entries_)
        if (!std::isfinite(v)) throw Error("Operator entry is not finite");
}

Operator Operator::operator*(const Operator& rhs) const {
    if (dim_ != rhs.dim_) throw Error("dimension mismatch in operator product");
    Operator out(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int k = 0; k < dim_; ++k) {
            const double aik = at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < dim_; ++j) out.at(i, j) += aik * rhs.at(k, j);
        }
    }
    return out;
}

Operator Operator::operator+(const Operator& rhs) const {
    if (dim_ != rhs.dim_) throw Error("dimension mismatch in operator sum");
    Operator out = *this;
    for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] += rhs.entries_[i];
    return out;
}

Operator Operator::operator-(const Operator& rhs) const {
    if (dim_ != rhs.dim_) throw Error("dimension mismatch in operator difference");
    Operator out = *this;
    for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] -= rhs.entries_[i];
    return out;
}

Operator Operator::scaled(double c) const {
    Operator out = *this;
    for (double& v : out.entries_) v *= c;
    return out;
}

Operator Operator::transpose() const {
    Operator out(dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) out.at(j, i) = at(i, j);
    return out;
}

std::vector<double> Operator::apply(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != dim_) throw Error("dimension mismatch in apply");
    std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += at(i, j) * v[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

double Operator::max_abs_entry() const {
    double m = 0.0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

Eigen::MatrixXd to_eigen(const Operator& a) {
    const int n = a.dim();
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a.at(i, j);
    return m;
}

Operator from_eigen(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    Operator a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.at(i, j) = m(i, j);
    return a;
}

double norm_l1(const Operator& a) {
    double best = 0.0;
    for (int j = 0; j < a.dim(); ++j) {
        double s = 0.0;
        for (int i = 0; i < a.dim(); ++i) s += std::abs(a.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

double norm_linf(const Operator& a) {
    double best = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.dim(); ++j) s += std::abs(a.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

double norm_l2(const Operator& a) {
    if (a.dim() == 1) return std::abs(a.at(0, 0));
    if (a.dim() == 2) {
        // closed-form largest singular value (rotate-scale-rotate split)
        const double e = 0.5 * (a.at(0, 0) + a.at(1, 1));
        const double f = 0.5 * (a.at(0, 0) - a.at(1, 1));
        const double g = 0.5 * (a.at(1, 0) + a.at(0, 1));
        const double h = 0.5 * (a.at(1, 0) - a.at(0, 1));
        return std::hypot(e, h) + std::hypot(f, g);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
    return svd.singularValues()(0);
}

// Power iteration with extraction on the 2-dimensional Krylov span {x, Ax};
// handles a dominant complex pair without tracking phases.
double power_iteration_radius(const Operator& a) {
    const int n = a.dim();
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = 1.0 / (1.0 + i);
    double prev = -1.0;
    int stable = 0;
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> y = a.apply(x);
        std::vector<double> z = a.apply(y);
        // least squares z ~ c1*y + c0*x
        double yy = 0, xx = 0, xy = 0, zy = 0, zx = 0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            yy += y[k] * y[k];
            xx += x[k] * x[k];
            xy += x[k] * y[k];
            zy += z[k] * y[k];
            zx += z[k] * x[k];
        }
        const double det = yy * xx - xy * xy;
        double r_est;
        if (std::abs(det) < 1e-300 || xx == 0.0) {
            if (xx == 0.0) return 0.0;
            r_est = std::sqrt(std::abs(zx) / xx);
        } else {
            const double c1 = (zy * xx - zx * xy) / det;
            const double c0 = (zx * yy - zy * xy) / det;
            const std::complex<double> disc = std::sqrt(std::complex<double>(c1 * c1 + 4.0 * c0, 0.0));
            const double r1 = std::abs((c1 + disc) / 2.0);
            const double r2 = std::abs((c1 - disc) / 2.0);
            r_est = std::max(r1, r2);
        }
        if (prev >= 0.0 && std::abs(r_est - prev) <= 1e-12 * std::max(1.0, std::abs(r_est))) {
            if (++stable >= 3) return r_est;
        } else {
            stable = 0;
        }
        prev = r_est;
        double zn = 0.0;
        for (double v : z) zn += v * v;
        zn = std::sqrt(zn);
        if (zn == 0.0) return 0.0;
        for (auto& v : z) v /= zn;
        x = z;
    }
    return -1.0; // stalled
}

} // namespace

double op_norm(const Operator& a, NormKind kind) {
    switch (kind) {
        case NormKind::l1_induced: return norm_l1(a);
        case NormKind::linf_induced: return norm_linf(a);
        case NormKind::l2_induced: return norm_l2(a);
    }
    return norm_l2(a);
}

double vec_norm(std::span<const double> v, NormKind kind) {
    double s = 0.0;
    switch (kind) {
        case NormKind::l1_induced:
            for (double x : v) s += std::abs(x);
            return s;
        case NormKind::linf_induced:
            for (double x : v) s = std::max(s, std::abs(x));
            return s;
        case NormKind::l2_induced:
            for (double x : v) s += x * x;
            return std::sqrt(s);
    }
    return 0.0;
}

Operator invert(const Operator& a) {
    Eigen::MatrixXd m = to_eigen(a);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) throw SingularOperator("operator is singular");
    Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite()) throw SingularOperator("operator inverse is not finite");
    Operator out = from_eigen(inv);
    const double cond = norm_l1(a) * norm_l1(out);
    if (!(cond <= 1e14)) throw SingularOperator("condition estimate exceeds 1e14");
    return out;
}

double spectral_radius(const Operator& a) {
    if (a.dim() == 1) return std::abs(a.at(0, 0));
    if (a.dim() > 64) {
        const double r = power_iteration_radius(a);
        if (r >= 0.0) return r;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(a), /*computeEigenvectors=*/false);
    double best = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, std::abs(es.eigenvalues()(i)));
    return best;
}

std::vector<double> eigenvalue_moduli(const Operator& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(a), /*computeEigenvectors=*/false);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(a.dim()));
    for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(std::abs(es.eigenvalues()(i)));
    return out;
}

Operator matrix_exp(const Operator& a) {
    const double nrm = norm_l1(a);
    int s = 0;
    if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const double scale = std::ldexp(1.0, -s);
    Operator b = a.scaled(scale);
    Operator term = Operator::identity(a.dim());
    Operator sum = term;
    for (int k = 1; k <= 40; ++k) {
        term = (term * b).scaled(1.0 / k);
        sum = sum + term;
        if (term.max_abs_entry() < 1e-20) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

double group_metric(const Operator& a, const Operator& b, NormKind kind) {
    return op_norm(a - b, kind) + op_norm(invert(a) - invert(b), kind);
}

void ScaledOperator::renormalize() {
    const double m = mat.max_abs_entry();
    if (m > 0.0 && std::isfinite(m)) {
        mat = mat.scaled(1.0 / m);
        log_scale += std::log(m);
    }
}

void ScaledOperator::multiply_left(const Operator& a) {
    mat = a * mat;
    renormalize();
}

void ScaledOperator::multiply_right(const Operator& a) {
    mat = mat * a;
    renormalize();
}

double ScaledOperator::log_norm(NormKind kind) const {
    const double n = op_norm(mat, kind);
    if (n == 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(n);
}

double ScaledOperator::log_spectral_radius() const {
    const double r = spectral_radius(mat);
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(r);
}

ScaledOperator ScaledOperator::inverse() const {
    ScaledOperator out{invert(mat), -log_scale};
    out.renormalize();
    return out;
}

Operator ScaledOperator::dense() const {
    return mat.scaled(std::exp(log_scale));
}

} // namespace coclab
