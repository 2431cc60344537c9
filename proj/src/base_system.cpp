#include "coclab/base_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coclab {

void ShiftSpace::validate() const {
    if (alphabet_size < 2) throw ConfigError("shift alphabet_size must be >= 2");
    if (!(metric_base > 1.0)) throw ConfigError("shift metric_base must be > 1");
    if (horizon < 1) throw ConfigError("shift horizon must be >= 1");
    if (!is_full()) {
        if (transition.size() != static_cast<std::size_t>(alphabet_size) * alphabet_size)
            throw ConfigError("transition matrix size does not match alphabet");
        for (int a = 0; a < alphabet_size; ++a) {
            bool row = false, col = false;
            for (int b = 0; b < alphabet_size; ++b) {
                row = row || allowed(a, b);
                col = col || allowed(b, a);
            }
            if (!row || !col) throw ConfigError("transition matrix has a dead symbol");
        }
    }
}

std::shared_ptr<SymbolBuffer> SymbolBuffer::periodic(std::vector<int> word) {
    if (word.empty()) throw Error("periodic word must be nonempty");
    auto buf = std::shared_ptr<SymbolBuffer>(new SymbolBuffer());
    buf->periodic_ = true;
    buf->word_ = std::move(word);
    return buf;
}

std::shared_ptr<SymbolBuffer> SymbolBuffer::sampled(SamplerExtension ext) {
    auto buf = std::shared_ptr<SymbolBuffer>(new SymbolBuffer());
    buf->periodic_ = false;
    buf->ext_ = std::move(ext);
    buf->fwd_.push_back(buf->draw(std::span<const double>(buf->ext_.init_probs), 0));
    return buf;
}

int SymbolBuffer::draw(std::span<const double> probs, std::int64_t index) const {
    CounterRng rng(CounterRng::mix(ext_.seed ^ CounterRng::mix(static_cast<std::uint64_t>(index))));
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
        acc += probs[s];
        if (u < acc) return static_cast<int>(s);
    }
    // rounding tail
    for (std::size_t s = probs.size(); s-- > 0;)
        if (probs[s] > 0.0) return static_cast<int>(s);
    throw Error("sampler row has no mass");
}

int SymbolBuffer::symbol(std::int64_t i) {
    if (periodic_) {
        const auto k = static_cast<std::int64_t>(word_.size());
        return word_[static_cast<std::size_t>(((i % k) + k) % k)];
    }
    if (i > ext_.max_extent || i < -ext_.max_extent)
        throw WindowExhausted("symbolic window extension beyond max_extent");
    const int a = ext_.alphabet;
    if (i >= 0) {
        while (static_cast<std::int64_t>(fwd_.size()) <= i) {
            const int prev = fwd_.back();
            const auto idx = static_cast<std::int64_t>(fwd_.size());
            std::span<const double> row(ext_.fwd_rows.data() + static_cast<std::size_t>(prev) * a,
                                        static_cast<std::size_t>(a));
            fwd_.push_back(draw(row, idx));
        }
        return fwd_[static_cast<std::size_t>(i)];
    }
    const std::int64_t j = -i - 1; // bwd_[j] holds x_{-(j+1)}
    while (static_cast<std::int64_t>(bwd_.size()) <= j) {
        const int next = bwd_.empty() ? fwd_.front() : bwd_.back();
        const auto idx = -static_cast<std::int64_t>(bwd_.size()) - 1;
        std::span<const double> row(ext_.bwd_rows.data() + static_cast<std::size_t>(next) * a,
                                    static_cast<std::size_t>(a));
        bwd_.push_back(draw(row, idx));
    }
    return bwd_[static_cast<std::size_t>(j)];
}

SymbolicWindow SymbolicWindow::periodic_word(const ShiftSpace& base, std::vector<int> word) {
    const auto k = word.size();
    for (std::size_t i = 0; i < k; ++i) {
        const int cur = word[i];
        if (cur < 0 || cur >= base.alphabet_size) throw Error("symbol outside alphabet");
        const int nxt = word[(i + 1) % k];
        if (!base.allowed(cur, nxt)) {
            if (i + 1 == k)
                throw ForbiddenWrap("wrap pair of the periodic word is transition-forbidden");
            throw Error("periodic word contains a forbidden transition");
        }
    }
    return SymbolicWindow{SymbolBuffer::periodic(std::move(word)), 0};
}

SymbolicWindow SymbolicWindow::sampled(SamplerExtension ext) {
    return SymbolicWindow{SymbolBuffer::sampled(std::move(ext)), 0};
}

namespace {

using int128 = __int128;

int128 int_det(const std::vector<std::int64_t>& m, int n) {
    if (n == 1) return m[0];
    if (n == 2) return static_cast<int128>(m[0]) * m[3] - static_cast<int128>(m[1]) * m[2];
    int128 det = 0;
    std::vector<std::int64_t> minor(static_cast<std::size_t>(n - 1) * (n - 1));
    for (int c = 0; c < n; ++c) {
        if (m[static_cast<std::size_t>(c)] == 0) continue;
        int mi = 0;
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != c) minor[static_cast<std::size_t>(mi++)] = m[static_cast<std::size_t>(i) * n + j];
        const int128 sub = int_det(minor, n - 1);
        det += ((c % 2 == 0) ? 1 : -1) * static_cast<int128>(m[static_cast<std::size_t>(c)]) * sub;
    }
    return det;
}

std::vector<std::int64_t> int_adjugate(const std::vector<std::int64_t>& m, int n) {
    std::vector<std::int64_t> adj(static_cast<std::size_t>(n) * n);
    if (n == 1) {
        adj[0] = 1;
        return adj;
    }
    std::vector<std::int64_t> minor(static_cast<std::size_t>(n - 1) * (n - 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            int mi = 0;
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                for (int c = 0; c < n; ++c)
                    if (c != j) minor[static_cast<std::size_t>(mi++)] = m[static_cast<std::size_t>(r) * n + c];
            }
            const int128 cof = (((i + j) % 2 == 0) ? 1 : -1) * int_det(minor, n - 1);
            adj[static_cast<std::size_t>(j) * n + i] = static_cast<std::int64_t>(cof);
        }
    }
    return adj;
}

double circle_dist(double a, double b) {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

// Difference b - a as the representative in [-1/2, 1/2).
double circle_diff(double a, double b) {
    double d = b - a;
    d -= std::floor(d + 0.5);
    return d;
}

void torus_step_once(const TorusMap& t, std::vector<double>& c, bool forward) {
    const auto& m = forward ? t.mat : t.inv_mat;
    std::vector<double> out(c.size(), 0.0);
    for (int i = 0; i < t.dim; ++i) {
        double s = 0.0;
        for (int j = 0; j < t.dim; ++j)
            s += static_cast<double>(m[static_cast<std::size_t>(i) * t.dim + j]) * c[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s - std::floor(s);
    }
    c = std::move(out);
}

} // namespace

void TorusMap::validate() {
    if (dim < 2) throw ConfigError("torus dim must be >= 2");
    if (mat.size() != static_cast<std::size_t>(dim) * dim) throw ConfigError("torus matrix size mismatch");
    if (dim > 8) throw ConfigError("torus dim > 8 not supported");
    const int128 det = int_det(mat, dim);
    if (det != 1 && det != -1) throw ConfigError("torus matrix must have determinant +-1");
    auto adj = int_adjugate(mat, dim);
    inv_mat.assign(adj.begin(), adj.end());
    if (det == -1)
        for (auto& v : inv_mat) v = -v;
    for (double r : eigen_moduli())
        if (std::abs(r - 1.0) <= 1e-9) throw ConfigError("torus matrix is not hyperbolic");
}

Operator TorusMap::as_operator() const {
    Operator a(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a.at(i, j) = static_cast<double>(at(i, j));
    return a;
}

std::vector<double> TorusMap::eigen_moduli() const {
    return eigenvalue_moduli(as_operator());
}

double TorusMap::min_expansion_rate() const {
    double best = std::numeric_limits<double>::infinity();
    for (double r : eigen_moduli()) best = std::min(best, std::abs(std::log(r)));
    return best;
}

void TorusPoint::reduce() {
    for (double& c : coords) {
        c -= std::floor(c);
        if (c >= 1.0) c = 0.0;
        if (c < 0.0) c = 0.0;
    }
}

BasePoint step(const BaseSystem& base, const BasePoint& x, std::int64_t n) {
    if (std::holds_alternative<ShiftSpace>(base)) {
        auto w = std::get<SymbolicWindow>(x);
        w.center_offset += n;
        return w;
    }
    const auto& t = std::get<TorusMap>(base);
    auto p = std::get<TorusPoint>(x);
    const bool forward = n >= 0;
    for (std::int64_t i = 0; i < std::abs(n); ++i) torus_step_once(t, p.coords, forward);
    return p;
}

double distance(const BaseSystem& base, const BasePoint& x, const BasePoint& y) {
    if (std::holds_alternative<ShiftSpace>(base)) {
        const auto& s = std::get<ShiftSpace>(base);
        const auto& a = std::get<SymbolicWindow>(x);
        const auto& b = std::get<SymbolicWindow>(y);
        for (int r = 0; r <= s.horizon; ++r) {
            if (a.symbol(r) != b.symbol(r) || a.symbol(-r) != b.symbol(-r))
                return std::pow(s.metric_base, -static_cast<double>(r));
        }
        return 0.0;
    }
    const auto& a = std::get<TorusPoint>(x);
    const auto& b = std::get<TorusPoint>(y);
    double best = 0.0;
    for (std::size_t i = 0; i < a.coords.size(); ++i)
        best = std::max(best, circle_dist(a.coords[i], b.coords[i]));
    return best;
}

namespace {

// Endpoints are open; a bound within rounding distance of an integer is
// treated as that integer so that n(1+eps') = 13 excludes k = 13 even when
// the double product lands at 12.999...9.
long double snap_to_integer(long double v, long double tol) {
    const long double r = roundl(v);
    return fabsl(v - r) <= tol ? r : v;
}

} // namespace

std::optional<std::int64_t> find_return(const BaseSystem& base, const BasePoint& x,
                                        std::int64_t n, double eps_prime, double delta) {
    if (n < 1 || !(eps_prime > 0.0) || !(delta > 0.0))
        throw Error("find_return requires n >= 1, eps_prime > 0, delta > 0");
    const long double tol = 1e-9L * static_cast<long double>(n);
    const long double lo = snap_to_integer(
        static_cast<long double>(n) * (1.0L + static_cast<long double>(eps_prime)), tol);
    const long double hi = snap_to_integer(
        static_cast<long double>(n) * (1.0L + 2.0L * static_cast<long double>(eps_prime)), tol);
    std::int64_t k = static_cast<std::int64_t>(floorl(lo)) + 1;
    if (k <= n) k = n + 1;
    BasePoint y = step(base, x, k);
    for (; static_cast<long double>(k) < hi; ++k) {
        if (distance(base, x, y) < delta) return k;
        y = step(base, y, 1);
    }
    return std::nullopt;
}

PeriodicOrbit close_orbit(const BaseSystem& base, const BasePoint& x, std::int64_t k) {
    if (k < 1) throw Error("close_orbit requires k >= 1");
    if (std::holds_alternative<ShiftSpace>(base)) {
        const auto& s = std::get<ShiftSpace>(base);
        const auto& w = std::get<SymbolicWindow>(x);
        std::vector<int> word(static_cast<std::size_t>(k));
        for (std::int64_t i = 0; i < k; ++i) word[static_cast<std::size_t>(i)] = w.symbol(i);
        auto p = SymbolicWindow::periodic_word(s, std::move(word));
        return PeriodicOrbit{p, k, 0.0};
    }
    const auto& t = std::get<TorusMap>(base);
    const auto& p0 = std::get<TorusPoint>(x);
    const auto yp = std::get<TorusPoint>(step(base, x, k));
    std::vector<double> u(p0.coords.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = circle_diff(p0.coords[i], yp.coords[i]);
        if (std::abs(u[i]) > 0.49)
            throw IllConditionedClosing("return displacement too large for unambiguous rounding");
    }
    // solve (M^k - I) e = -u
    Operator mk = Operator::identity(t.dim);
    const Operator m = t.as_operator();
    for (std::int64_t i = 0; i < k; ++i) mk = m * mk;
    Operator b = mk - Operator::identity(t.dim);
    Operator binv(t.dim);
    try {
        binv = invert(b);
    } catch (const SingularOperator&) {
        throw IllConditionedClosing("M^k - I is numerically singular");
    }
    std::vector<double> neg_u(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) neg_u[i] = -u[i];
    const std::vector<double> e = binv.apply(neg_u);
    TorusPoint p = p0;
    for (std::size_t i = 0; i < e.size(); ++i) p.coords[i] += e[i];
    p.reduce();
    const double residual = distance(base, step(base, p, k), p);
    if (!(residual < 1e-9))
        throw IllConditionedClosing("closing residual above 1e-9");
    return PeriodicOrbit{p, k, residual};
}

std::vector<double> shadowing_profile(const BaseSystem& base, const BasePoint& x,
                                      const BasePoint& p, std::int64_t k) {
    std::vector<double> out(static_cast<std::size_t>(k) + 1);
    BasePoint a = x;
    BasePoint b = p;
    for (std::int64_t i = 0; i <= k; ++i) {
        out[static_cast<std::size_t>(i)] = distance(base, a, b);
        if (i < k) {
            a = step(base, a, 1);
            b = step(base, b, 1);
        }
    }
    return out;
}

BasePoint uniform_point(const BaseSystem& base, std::uint64_t seed, std::uint64_t index) {
    if (std::holds_alternative<ShiftSpace>(base)) {
        const auto& s = std::get<ShiftSpace>(base);
        const int a = s.alphabet_size;
        SamplerExtension ext;
        ext.seed = CounterRng::mix(seed ^ CounterRng::mix(index));
        ext.alphabet = a;
        ext.init_probs.assign(static_cast<std::size_t>(a), 1.0 / a);
        ext.fwd_rows.assign(static_cast<std::size_t>(a) * a, 0.0);
        ext.bwd_rows.assign(static_cast<std::size_t>(a) * a, 0.0);
        for (int i = 0; i < a; ++i) {
            int cnt_fwd = 0, cnt_bwd = 0;
            for (int j = 0; j < a; ++j) {
                if (s.allowed(i, j)) ++cnt_fwd;
                if (s.allowed(j, i)) ++cnt_bwd;
            }
            for (int j = 0; j < a; ++j) {
                if (s.allowed(i, j))
                    ext.fwd_rows[static_cast<std::size_t>(i) * a + j] = 1.0 / cnt_fwd;
                if (s.allowed(j, i))
                    ext.bwd_rows[static_cast<std::size_t>(i) * a + j] = 1.0 / cnt_bwd;
            }
        }
        return SymbolicWindow::sampled(std::move(ext));
    }
    const auto& t = std::get<TorusMap>(base);
    CounterRng rng = CounterRng::derive(seed, "torus_pt", index);
    TorusPoint p;
    p.coords.resize(static_cast<std::size_t>(t.dim));
    for (double& c : p.coords) c = rng.next_double();
    return p;
}

double expansion_rate(const BaseSystem& base) {
    if (std::holds_alternative<ShiftSpace>(base))
        return std::log(std::get<ShiftSpace>(base).metric_base);
    return std::get<TorusMap>(base).min_expansion_rate();
}

std::vector<ReturnPair> sample_return_pairs(const BaseSystem& base, int count,
                                            std::uint64_t seed, double delta_max) {
    std::vector<ReturnPair> out;
    std::uint64_t idx = 0;
    const std::uint64_t max_attempts = static_cast<std::uint64_t>(count) * 64 + 64;
    while (static_cast<int>(out.size()) < count && idx < max_attempts) {
        BasePoint x = uniform_point(base, seed, idx);
        CounterRng rng = CounterRng::derive(seed, "retn", idx);
        const std::int64_t n = 8 + static_cast<std::int64_t>(rng.next_below(25));
        BasePoint y = step(base, x, n + 1);
        for (std::int64_t k = n + 1; k <= n + 4096; ++k) {
            const double d = distance(base, x, y);
            if (d > 0.0 && d < delta_max) {
                bool closable = true;
                try {
                    (void)close_orbit(base, x, k);
                } catch (const Error&) {
                    closable = false;
                }
                if (closable) {
                    out.push_back(ReturnPair{x, k, d});
                    break;
                }
            }
            y = step(base, y, 1);
        }
        ++idx;
    }
    return out;
}

ClosingParams calibrate_closing_from_pairs(const BaseSystem& base,
                                           std::span<const ReturnPair> pairs) {
    ClosingParams params;
    params.gamma = expansion_rate(base);
    params.D = 1.0;
    params.delta0 = 0.0;
    for (const auto& pr : pairs) {
        const PeriodicOrbit orbit = close_orbit(base, pr.x, pr.k);
        const auto profile = shadowing_profile(base, pr.x, orbit.point, pr.k);
        for (std::int64_t i = 0; i <= pr.k; ++i) {
            const double env = pr.dist *
                std::exp(-params.gamma * static_cast<double>(std::min(i, pr.k - i)));
            if (env <= 0.0) continue;
            const double ratio = profile[static_cast<std::size_t>(i)] / env;
            if (!std::isfinite(ratio) || ratio > 1e8)
                throw CalibrationFailed("sampled pair violates every tested envelope");
            params.D = std::max(params.D, ratio);
        }
        params.delta0 = std::max(params.delta0, pr.dist);
    }
    if (params.delta0 == 0.0) params.delta0 = 0.1;
    return params;
}

ClosingParams calibrate_closing(const BaseSystem& base, int samples, std::uint64_t seed) {
    if (samples < 1) throw Error("calibrate_closing requires samples >= 1");
    const double delta_max = std::holds_alternative<ShiftSpace>(base) ? 0.3 : 0.05;
    const auto pairs = sample_return_pairs(base, samples, seed, delta_max);
    return calibrate_closing_from_pairs(base, pairs);
}

} // namespace coclab
