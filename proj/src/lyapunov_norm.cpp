#include "coclab/lyapunov_norm.hpp"

#include <algorithm>
#include <cmath>

namespace coclab {

void LyapunovNormContext::validate() const {
    if (!(eps > 0.0)) throw Error("Lyapunov norm context requires eps > 0");
    if (!(chi <= lambda)) throw Error("Lyapunov norm context requires chi <= lambda");
    if (truncation_N < 1) throw Error("truncation_N must be >= 1");
    if (!(tail_tol > 0.0)) throw Error("tail_tol must be > 0");
    if (!(ell > 1.0)) throw Error("ell must be > 1");
    if (!(rho > 0.0)) throw Error("rho must be > 0");
}

namespace {

double least_squares_slope(std::span<const double> ts, std::span<const double> ys) {
    const std::size_t n = ts.size();
    if (n < 2) return 0.0;
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += ts[i];
        ym += ys[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (ts[i] - tm) * (ys[i] - ym);
        den += (ts[i] - tm) * (ts[i] - tm);
    }
    return den == 0.0 ? 0.0 : num / den;
}

} // namespace

LyapNormValue lyap_vector_norm(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                               const BaseSystem& base, const BasePoint& x,
                               std::span<const double> u) {
    ctx.validate();
    if (static_cast<int>(u.size()) != gen.dim)
        throw Error("vector dimension does not match generator");
    const NormKind k = gen.norm;
    const double u_norm = vec_norm(u, k);
    if (u_norm == 0.0) return {0.0, true};

    LyapNormValue out;
    out.value = u_norm; // n = 0 term
    const int T = ctx.truncation_N;

    auto run_series = [&](bool forward) {
        std::vector<double> v(u.begin(), u.end());
        double lv = std::log(u_norm);
        for (double& c : v) c /= u_norm;
        BasePoint cur = x;
        for (int n = 1; n <= T; ++n) {
            if (!forward) cur = step(base, cur, -1);
            const auto pair = generator_pair_at(gen, base, cur);
            v = forward ? pair.first.apply(v) : pair.second.apply(v);
            if (forward) cur = step(base, cur, 1);
            const double m = vec_norm(v, k);
            lv += std::log(m);
            for (double& c : v) c /= m;
            const double weight = forward ? -(ctx.lambda + ctx.eps) * n : (ctx.chi - ctx.eps) * n;
            const double term = std::exp(lv + weight);
            out.value += term;
            if (!std::isfinite(out.value)) out.converged = false;
            if (n > T - 10 && !(term < ctx.tail_tol * out.value)) out.converged = false;
        }
    };
    run_series(true);
    run_series(false);
    return out;
}

LyapNormValue lyap_op_norm(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                           const BaseSystem& base, const Operator& a,
                           const BasePoint& x, const BasePoint& y, std::uint64_t seed) {
    const int d = a.dim();
    CounterRng rng = CounterRng::derive(seed, "lyap_op_norm");

    LyapNormValue best{0.0, true};
    std::vector<double> best_u;

    auto consider = [&](const std::vector<double>& u) {
        const LyapNormValue nx = lyap_vector_norm(ctx, gen, base, x, u);
        if (nx.value <= 0.0) return;
        const std::vector<double> au = a.apply(u);
        const LyapNormValue ny = lyap_vector_norm(ctx, gen, base, y, au);
        const double ratio = ny.value / nx.value;
        if (ratio > best.value) {
            best.value = ratio;
            best.converged = nx.converged && ny.converged;
            best_u = u;
        }
    };

    std::vector<double> u(static_cast<std::size_t>(d));
    for (int s = 0; s < 200; ++s) {
        for (double& c : u) c = rng.gaussian();
        if (vec_norm(u, gen.norm) == 0.0) u[0] = 1.0;
        consider(u);
    }
    if (d == 2) {
        for (int g = 0; g < 720; ++g) {
            const double th = 3.141592653589793 * g / 720.0;
            consider({std::cos(th), std::sin(th)});
        }
    }
    if (best_u.empty()) best_u.assign(static_cast<std::size_t>(d), 1.0);
    double h = 0.25;
    for (int it = 0; it < 50; ++it) {
        bool improved = false;
        const double scale = std::max(vec_norm(best_u, gen.norm), 1e-12);
        for (int c = 0; c < d && !improved; ++c) {
            for (double sgn : {1.0, -1.0}) {
                std::vector<double> u2 = best_u;
                u2[static_cast<std::size_t>(c)] += sgn * h * scale;
                const double prev = best.value;
                consider(u2);
                if (best.value > prev) {
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) h *= 0.5;
    }
    return best;
}

ContractionReport check_contraction(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                                    const BaseSystem& base, const BasePoint& x,
                                    std::int64_t steps, std::uint64_t seed) {
    ContractionReport report;
    report.slack = 10.0 * ctx.tail_tol;
    const double bound_fwd = std::exp(ctx.lambda + ctx.eps);
    const double bound_bwd = std::exp(-ctx.chi + ctx.eps);
    BasePoint cur = x;
    for (std::int64_t j = 0; j < steps; ++j) {
        const Operator a_fwd = generator_pair_at(gen, base, cur).first;
        const BasePoint fwd = step(base, cur, 1);
        const BasePoint bwd = step(base, cur, -1);
        // the -1 cocycle value at cur is A(f^{-1} x)^{-1}
        const Operator a_bwd = generator_pair_at(gen, base, bwd).second;
        const LyapNormValue nf = lyap_op_norm(ctx, gen, base, a_fwd, cur, fwd, seed + 2 * j);
        const LyapNormValue nb = lyap_op_norm(ctx, gen, base, a_bwd, cur, bwd, seed + 2 * j + 1);
        ContractionEntry e;
        e.step = j;
        e.forward_ratio = nf.value / bound_fwd;
        e.backward_ratio = nb.value / bound_bwd;
        e.forward_converged = nf.converged;
        e.backward_converged = nb.converged;
        report.max_forward_ratio = std::max(report.max_forward_ratio, e.forward_ratio);
        report.max_backward_ratio = std::max(report.max_backward_ratio, e.backward_ratio);
        if (nf.converged) {
            if (e.forward_ratio > 1.0 + report.slack) ++report.violations;
        } else {
            ++report.nonconverged;
        }
        if (nb.converged) {
            if (e.backward_ratio > 1.0 + report.slack) ++report.violations;
        } else {
            ++report.nonconverged;
        }
        report.entries.push_back(e);
        cur = fwd;
    }
    return report;
}

TemperednessReport temperedness_diagnostic(const LyapunovNormContext& ctx,
                                           const CocycleGenerator& gen, const BaseSystem& base,
                                           const BasePoint& x, std::int64_t N) {
    ctx.validate();
    TemperednessReport rep;
    rep.N = N;
    const int T = ctx.truncation_N;
    rep.M_eps_values.resize(static_cast<std::size_t>(2 * N + 1));
    rep.M_eps_prime_values.resize(static_cast<std::size_t>(2 * N + 1));
    const double half_eps = 0.5 * ctx.eps;
    const double tilde_denom = 1.0 - std::exp(-half_eps);
    double k_rho = 0.0;
    BasePoint cur = step(base, x, -N);
    for (std::int64_t n = -N; n <= N; ++n) {
        const auto fwd = prefix_log_norms(gen, base, cur, T).a;
        const auto bwd = prefix_log_norms_backward(gen, base, cur, T).a_tilde;
        double m_eps = 1.0, m_eps_p = 1.0, m_half = 1.0, m_half_p = 1.0;
        for (int j = 0; j <= T; ++j) {
            const double aj = fwd[static_cast<std::size_t>(j)];
            const double bj = bwd[static_cast<std::size_t>(j)]; // ln ||A^{-j}_x||
            m_eps = std::max(m_eps, std::exp(aj - (ctx.lambda + ctx.eps) * j));
            m_eps_p = std::max(m_eps_p, std::exp(bj + (ctx.chi - ctx.eps) * j));
            m_half = std::max(m_half, std::exp(aj - (ctx.lambda + half_eps) * j));
            m_half_p = std::max(m_half_p, std::exp(bj + (ctx.chi - half_eps) * j));
        }
        const auto idx = static_cast<std::size_t>(n + N);
        rep.M_eps_values[idx] = m_eps;
        rep.M_eps_prime_values[idx] = m_eps_p;
        const double m_tilde = (m_half + m_half_p) / tilde_denom;
        k_rho += m_tilde * std::exp(-ctx.rho * static_cast<double>(std::llabs(n)));
        if (n < N) cur = step(base, cur, 1);
    }
    rep.K_rho_truncated = k_rho;

    std::vector<double> ts, ys;
    for (std::int64_t t = (N + 1) / 2; t <= N; ++t) {
        ts.push_back(static_cast<double>(t));
        ys.push_back(std::log(rep.M_eps_values[static_cast<std::size_t>(t + N)]) /
                     static_cast<double>(t));
    }
    rep.forward_slope = least_squares_slope(ts, ys);
    ts.clear();
    ys.clear();
    for (std::int64_t t = (N + 1) / 2; t <= N; ++t) {
        ts.push_back(static_cast<double>(t));
        ys.push_back(std::log(rep.M_eps_values[static_cast<std::size_t>(N - t)]) /
                     static_cast<double>(t));
    }
    rep.backward_slope = least_squares_slope(ts, ys);
    return rep;
}

ShadowGrowthReport shadow_growth_check(const LyapunovNormContext& ctx, const CocycleGenerator& gen,
                                       const BaseSystem& base, const BasePoint& x,
                                       const BasePoint& p, std::int64_t m, double ell,
                                       double delta, double gamma) {
    ctx.validate();
    if (m < 1) throw Error("shadow_growth_check requires m >= 1");
    if (!(ell > 1.0)) throw Error("shadow_growth_check requires ell > 1");
    const auto profile = shadowing_profile(base, x, p, m);
    for (std::int64_t i = 0; i <= m; ++i) {
        const double env = delta * std::exp(-gamma * static_cast<double>(std::min(i, m - i)));
        if (profile[static_cast<std::size_t>(i)] > env * (1.0 + 1e-9) + 1e-300)
            throw ProfileViolated("orbit pair does not satisfy the closeness profile");
    }
    const double alpha = gen.holder.alpha;
    const PrefixLogNorms pref = prefix_log_norms(gen, base, p, m);
    ShadowGrowthReport rep;
    rep.forward_log_norms = pref.a;
    rep.backward_log_norms = pref.a_tilde;
    const double den = ell * std::pow(delta, alpha);
    const double log_ell = std::log(ell);
    for (std::int64_t n = 1; n <= m; ++n) {
        const double excess_f = pref.a[static_cast<std::size_t>(n)] - log_ell -
                                static_cast<double>(n) * (ctx.lambda + ctx.eps);
        if (excess_f > 0.0) {
            if (den > 0.0)
                rep.c_forward = std::max(rep.c_forward, excess_f / den);
            else
                ++rep.violations;
        }
        const double excess_b = pref.a_tilde[static_cast<std::size_t>(n)] - log_ell -
                                ctx.eps * static_cast<double>(std::min(n, m - n)) -
                                static_cast<double>(n) * (-ctx.chi + ctx.eps);
        if (excess_b > 0.0) {
            if (den > 0.0)
                rep.c_backward = std::max(rep.c_backward, excess_b / den);
            else
                ++rep.violations;
        }
    }
    return rep;
}

} // namespace coclab
