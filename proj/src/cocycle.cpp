#include "coclab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace coclab {

namespace {

double log_op_norm(const Operator& a, NormKind kind) {
    return std::log(op_norm(a, kind));
}

// Cheap upper bound ||A||_2 <= sqrt(||A||_1 ||A||_inf); exact norm only when
// the cheap bound cannot certify the declared limit.
void enforce_bound(const Operator& a, double limit, NormKind kind, const char* what) {
    const double tol = 1e-9;
    if (kind == NormKind::l2_induced) {
        const double cheap =
            0.5 * (std::log(op_norm(a, NormKind::l1_induced)) + std::log(op_norm(a, NormKind::linf_induced)));
        if (cheap <= limit + tol) return;
    }
    if (log_op_norm(a, kind) > limit + tol)
        throw BoundsViolation(std::string("generator value violates declared bound: ") + what);
}

Operator build_pattern(int dim) {
    Operator p(dim);
    for (int i = 0; i < dim; ++i) {
        p.at(i, i) = 1.0 / (i + 1);
        for (int j = i + 1; j < dim; ++j) {
            const double v = 1.0 / (i + j + 2);
            p.at(i, j) = v;
            p.at(j, i) = -v;
        }
    }
    return p;
}

Operator torus_smooth_value(const TorusSmoothGen& g, std::span<const double> coords, bool inverse) {
    double phase = 0.0;
    for (std::size_t j = 0; j < g.freq.size(); ++j)
        phase += static_cast<double>(g.freq[j]) * coords[j];
    const double c = std::cos(2.0 * std::numbers::pi * phase);
    const double s = (inverse ? -1.0 : 1.0) * g.eta * c;
    const Operator e = matrix_exp(g.pattern.scaled(s));
    return inverse ? e * g.a0_inv : g.a0 * e;
}

void fill_or_verify_bounds(CocycleGenerator& gen, double sup_log_a, double sup_log_ainv) {
    if (std::isnan(gen.holder.lambda_prime))
        gen.holder.lambda_prime = sup_log_a;
    else if (gen.holder.lambda_prime + 1e-9 < sup_log_a)
        throw ConfigError("declared lambda_prime below actual sup of ln||A(x)||");
    if (std::isnan(gen.holder.chi_prime))
        gen.holder.chi_prime = -sup_log_ainv;
    else if (-gen.holder.chi_prime + 1e-9 < sup_log_ainv)
        throw ConfigError("declared chi_prime above actual inf of -ln||A(x)^{-1}||");
}

} // namespace

CocycleGenerator make_constant_generator(Operator a, HolderData h, NormKind norm) {
    CocycleGenerator gen;
    gen.dim = a.dim();
    gen.holder = h;
    gen.norm = norm;
    Operator inv = invert(a);
    const double la = log_op_norm(a, norm);
    const double li = log_op_norm(inv, norm);
    gen.kind = ConstantGen{std::move(a), std::move(inv)};
    fill_or_verify_bounds(gen, la, li);
    return gen;
}

CocycleGenerator make_locally_constant_generator(int memory,
                                                 std::map<std::vector<int>, Operator> table,
                                                 HolderData h, NormKind norm) {
    if (memory < 0) throw ConfigError("locally constant memory must be >= 0");
    if (table.empty()) throw ConfigError("locally constant table is empty");
    CocycleGenerator gen;
    gen.dim = table.begin()->second.dim();
    gen.holder = h;
    gen.norm = norm;
    LocallyConstantGen lc;
    lc.memory = memory;
    double sup_a = -std::numeric_limits<double>::infinity();
    double sup_ai = -std::numeric_limits<double>::infinity();
    const std::size_t word_len = static_cast<std::size_t>(2 * memory + 1);
    for (auto& [word, op] : table) {
        if (word.size() != word_len)
            throw ConfigError("table word length does not match 2m+1");
        if (op.dim() != gen.dim) throw ConfigError("table operators have mixed dimensions");
        Operator inv = invert(op);
        sup_a = std::max(sup_a, log_op_norm(op, norm));
        sup_ai = std::max(sup_ai, log_op_norm(inv, norm));
        lc.table.emplace(word, std::make_pair(op, std::move(inv)));
    }
    gen.kind = std::move(lc);
    fill_or_verify_bounds(gen, sup_a, sup_ai);
    return gen;
}

CocycleGenerator make_torus_smooth_generator(Operator a0, double eta,
                                             std::vector<std::int64_t> freq, HolderData h,
                                             NormKind norm) {
    CocycleGenerator gen;
    gen.dim = a0.dim();
    gen.holder = h;
    gen.norm = norm;
    TorusSmoothGen g;
    g.a0_inv = invert(a0);
    g.a0 = std::move(a0);
    g.eta = eta;
    g.freq = std::move(freq);
    g.pattern = build_pattern(gen.dim);
    // |cos| <= 1 gives the analytic sup bound; a 1e4-point sweep verifies
    // declared values against actual samples.
    const double pat = op_norm(g.pattern, norm);
    const double sup_a = log_op_norm(g.a0, norm) + std::abs(eta) * pat;
    const double sup_ai = log_op_norm(g.a0_inv, norm) + std::abs(eta) * pat;
    if (!std::isnan(gen.holder.lambda_prime) || !std::isnan(gen.holder.chi_prime)) {
        CounterRng rng(0x5eedu);
        const std::size_t d = g.freq.size();
        std::vector<double> coords(std::max<std::size_t>(d, 1));
        for (int s = 0; s < 10000; ++s) {
            for (auto& c : coords) c = rng.next_double();
            const Operator v = torus_smooth_value(g, coords, false);
            const Operator vi = torus_smooth_value(g, coords, true);
            if (!std::isnan(gen.holder.lambda_prime) &&
                log_op_norm(v, norm) > gen.holder.lambda_prime + 1e-9)
                throw ConfigError("declared lambda_prime below sampled sup of ln||A(x)||");
            if (!std::isnan(gen.holder.chi_prime) &&
                log_op_norm(vi, norm) > -gen.holder.chi_prime + 1e-9)
                throw ConfigError("declared chi_prime above sampled inf of -ln||A(x)^{-1}||");
        }
    }
    gen.kind = std::move(g);
    if (std::isnan(gen.holder.lambda_prime)) gen.holder.lambda_prime = sup_a;
    if (std::isnan(gen.holder.chi_prime)) gen.holder.chi_prime = -sup_ai;
    return gen;
}

void validate_generator(const CocycleGenerator& gen, const BaseSystem& base) {
    if (!(gen.holder.alpha > 0.0) || gen.holder.alpha > 1.0)
        throw ConfigError("holder_alpha must be in (0, 1]");
    if (!(gen.holder.M > 0.0)) throw ConfigError("holder_M must be > 0");
    if (gen.is_locally_constant()) {
        if (!std::holds_alternative<ShiftSpace>(base))
            throw ConfigError("locally constant cocycle requires a shift base");
        const auto& s = std::get<ShiftSpace>(base);
        const auto& lc = std::get<LocallyConstantGen>(gen.kind);
        // enumerate transition-allowed words of length 2m+1
        const int len = 2 * lc.memory + 1;
        std::vector<int> word(static_cast<std::size_t>(len), 0);
        std::vector<int> stack;
        stack.reserve(static_cast<std::size_t>(len));
        // depth-first odometer over allowed words
        std::vector<int> w;
        std::function<void(int)> rec = [&](int depth) {
            if (depth == len) {
                if (!lc.table.count(w))
                    throw ConfigError("locally constant table misses an allowed word");
                return;
            }
            for (int sym = 0; sym < s.alphabet_size; ++sym) {
                if (depth > 0 && !s.allowed(w.back(), sym)) continue;
                w.push_back(sym);
                rec(depth + 1);
                w.pop_back();
            }
        };
        rec(0);
    }
    if (gen.is_torus_smooth()) {
        if (!std::holds_alternative<TorusMap>(base))
            throw ConfigError("torus_smooth cocycle requires a torus base");
        const auto& t = std::get<TorusMap>(base);
        const auto& g = std::get<TorusSmoothGen>(gen.kind);
        if (static_cast<int>(g.freq.size()) != t.dim)
            throw ConfigError("frequency vector length must equal torus dim");
    }
}

CocycleGenerator scale_generator(const CocycleGenerator& gen, double c) {
    if (!(c > 0.0)) throw Error("scale_generator requires c > 0");
    CocycleGenerator out = gen;
    const double lc = std::log(c);
    out.holder.lambda_prime += lc;
    out.holder.chi_prime += lc;
    out.holder.M *= std::max(c, 1.0 / c);
    if (auto* g = std::get_if<ConstantGen>(&out.kind)) {
        g->a = g->a.scaled(c);
        g->a_inv = g->a_inv.scaled(1.0 / c);
    } else if (auto* g2 = std::get_if<LocallyConstantGen>(&out.kind)) {
        for (auto& [w, pr] : g2->table) {
            pr.first = pr.first.scaled(c);
            pr.second = pr.second.scaled(1.0 / c);
        }
    } else if (auto* g3 = std::get_if<TorusSmoothGen>(&out.kind)) {
        g3->a0 = g3->a0.scaled(c);
        g3->a0_inv = g3->a0_inv.scaled(1.0 / c);
    }
    return out;
}

std::pair<Operator, Operator> generator_pair_at(const CocycleGenerator& gen,
                                                const BaseSystem& base, const BasePoint& x) {
    std::pair<Operator, Operator> out{Operator::identity(gen.dim), Operator::identity(gen.dim)};
    if (const auto* g = std::get_if<ConstantGen>(&gen.kind)) {
        out = {g->a, g->a_inv};
    } else if (const auto* lc = std::get_if<LocallyConstantGen>(&gen.kind)) {
        const auto* w = std::get_if<SymbolicWindow>(&x);
        if (!w) throw Error("locally constant generator needs a symbolic point");
        std::vector<int> word(static_cast<std::size_t>(2 * lc->memory + 1));
        for (int i = -lc->memory; i <= lc->memory; ++i)
            word[static_cast<std::size_t>(i + lc->memory)] = w->symbol(i);
        auto it = lc->table.find(word);
        if (it == lc->table.end()) throw MissingWord("word not covered by generator table");
        out = it->second;
    } else {
        const auto* g = std::get_if<TorusSmoothGen>(&gen.kind);
        const auto* p = std::get_if<TorusPoint>(&x);
        if (!p) throw Error("torus_smooth generator needs a torus point");
        out = {torus_smooth_value(*g, p->coords, false), torus_smooth_value(*g, p->coords, true)};
    }
    (void)base;
    if (gen.check_bounds) {
        enforce_bound(out.first, gen.holder.lambda_prime, gen.norm, "lambda_prime");
        enforce_bound(out.second, -gen.holder.chi_prime, gen.norm, "chi_prime");
    }
    return out;
}

Operator generator_at(const CocycleGenerator& gen, const BaseSystem& base, const BasePoint& x) {
    return generator_pair_at(gen, base, x).first;
}

CocyclePass cocycle_pass(const CocycleGenerator& gen, const BaseSystem& base,
                         const BasePoint& x, std::int64_t n) {
    if (n < 0) throw Error("cocycle_pass requires n >= 0");
    CocyclePass pass{ScaledOperator::identity(gen.dim), ScaledOperator::identity(gen.dim)};
    BasePoint cur = x;
    for (std::int64_t j = 0; j < n; ++j) {
        const auto [a, a_inv] = generator_pair_at(gen, base, cur);
        pass.forward.multiply_left(a);
        pass.inverse.multiply_right(a_inv);
        cur = step(base, cur, 1);
    }
    return pass;
}

ScaledOperator evaluate(const CocycleGenerator& gen, const BaseSystem& base,
                        const BasePoint& x, std::int64_t n) {
    if (n >= 0) return cocycle_pass(gen, base, x, n).forward;
    const BasePoint y = step(base, x, n);
    return cocycle_pass(gen, base, y, -n).inverse;
}

double log_norm(const CocycleGenerator& gen, const BaseSystem& base,
                const BasePoint& x, std::int64_t n) {
    return evaluate(gen, base, x, n).log_norm(gen.norm);
}

double log_inv_norm(const CocycleGenerator& gen, const BaseSystem& base,
                    const BasePoint& x, std::int64_t n) {
    if (n >= 0) return cocycle_pass(gen, base, x, n).inverse.log_norm(gen.norm);
    const BasePoint y = step(base, x, n);
    return cocycle_pass(gen, base, y, -n).forward.log_norm(gen.norm);
}

double distortion_log(const CocycleGenerator& gen, const BaseSystem& base,
                      const BasePoint& x, std::int64_t n) {
    if (n >= 0) {
        const CocyclePass pass = cocycle_pass(gen, base, x, n);
        return pass.forward.log_norm(gen.norm) + pass.inverse.log_norm(gen.norm);
    }
    const BasePoint y = step(base, x, n);
    const CocyclePass pass = cocycle_pass(gen, base, y, -n);
    return pass.forward.log_norm(gen.norm) + pass.inverse.log_norm(gen.norm);
}

PrefixLogNorms prefix_log_norms(const CocycleGenerator& gen, const BaseSystem& base,
                                const BasePoint& x, std::int64_t n) {
    PrefixLogNorms out;
    out.a.resize(static_cast<std::size_t>(n) + 1);
    out.a_tilde.resize(static_cast<std::size_t>(n) + 1);
    out.a[0] = 0.0;
    out.a_tilde[0] = 0.0;
    CocyclePass pass{ScaledOperator::identity(gen.dim), ScaledOperator::identity(gen.dim)};
    BasePoint cur = x;
    for (std::int64_t j = 1; j <= n; ++j) {
        const auto [a, a_inv] = generator_pair_at(gen, base, cur);
        pass.forward.multiply_left(a);
        pass.inverse.multiply_right(a_inv);
        cur = step(base, cur, 1);
        out.a[static_cast<std::size_t>(j)] = pass.forward.log_norm(gen.norm);
        out.a_tilde[static_cast<std::size_t>(j)] = pass.inverse.log_norm(gen.norm);
    }
    return out;
}

PrefixLogNorms prefix_log_norms_backward(const CocycleGenerator& gen, const BaseSystem& base,
                                         const BasePoint& x, std::int64_t n) {
    // b_j = a_j(f^{-j} x): extend the product one step into the past on the right.
    PrefixLogNorms out;
    out.a.resize(static_cast<std::size_t>(n) + 1);
    out.a_tilde.resize(static_cast<std::size_t>(n) + 1);
    out.a[0] = 0.0;
    out.a_tilde[0] = 0.0;
    CocyclePass pass{ScaledOperator::identity(gen.dim), ScaledOperator::identity(gen.dim)};
    BasePoint cur = x;
    for (std::int64_t j = 1; j <= n; ++j) {
        cur = step(base, cur, -1);
        const auto [a, a_inv] = generator_pair_at(gen, base, cur);
        pass.forward.multiply_right(a);
        pass.inverse.multiply_left(a_inv);
        out.a[static_cast<std::size_t>(j)] = pass.forward.log_norm(gen.norm);
        out.a_tilde[static_cast<std::size_t>(j)] = pass.inverse.log_norm(gen.norm);
    }
    return out;
}

SuffixNormTable suffix_log_norm_table(const CocycleGenerator& gen, const BaseSystem& base,
                                      const BasePoint& x, std::int64_t n, bool tilde) {
    SuffixNormTable table;
    table.n = n;
    table.rows.resize(static_cast<std::size_t>(n) + 1);
    BasePoint start = x;
    for (std::int64_t i = 0; i <= n; ++i) {
        const PrefixLogNorms pref = prefix_log_norms(gen, base, start, n - i);
        table.rows[static_cast<std::size_t>(i)] = tilde ? pref.a_tilde : pref.a;
        if (i < n) start = step(base, start, 1);
    }
    return table;
}

} // namespace coclab
