#include "coclab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "coclab/parallel.hpp"

namespace coclab {

namespace {

void check_distribution(std::span<const double> p, const char* what) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) throw IncompatibleSampler(std::string(what) + ": negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw IncompatibleSampler(std::string(what) + ": does not sum to 1");
}

// strong connectivity of the positive-support graph (forward and backward BFS)
bool support_irreducible(std::span<const double> rows, int n) {
    auto reach = [&](bool forward) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        while (!q.empty()) {
            const int a = q.front();
            q.pop();
            for (int b = 0; b < n; ++b) {
                const double w = forward ? rows[static_cast<std::size_t>(a) * n + b]
                                         : rows[static_cast<std::size_t>(b) * n + a];
                if (w > 0.0 && !seen[static_cast<std::size_t>(b)]) {
                    seen[static_cast<std::size_t>(b)] = 1;
                    q.push(b);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach(true) && reach(false);
}

} // namespace

void MeasureSampler::validate(const BaseSystem& base) const {
    if (std::holds_alternative<LebesgueTorusMeasure>(kind)) {
        if (!std::holds_alternative<TorusMap>(base))
            throw IncompatibleSampler("lebesgue_torus sampler requires a torus base");
        return;
    }
    if (!std::holds_alternative<ShiftSpace>(base))
        throw IncompatibleSampler("symbolic sampler requires a shift base");
    const auto& s = std::get<ShiftSpace>(base);
    const int a = s.alphabet_size;
    if (const auto* b = std::get_if<BernoulliMeasure>(&kind)) {
        if (static_cast<int>(b->probs.size()) != a)
            throw IncompatibleSampler("bernoulli probability count does not match alphabet");
        check_distribution(b->probs, "bernoulli probs");
        for (int i = 0; i < a; ++i)
            for (int j = 0; j < a; ++j)
                if (b->probs[static_cast<std::size_t>(i)] > 0.0 &&
                    b->probs[static_cast<std::size_t>(j)] > 0.0 && !s.allowed(i, j))
                    throw IncompatibleSampler("bernoulli support crosses a forbidden transition");
        return;
    }
    const auto& m = std::get<MarkovMeasure>(kind);
    if (m.rows.size() != static_cast<std::size_t>(a) * a)
        throw IncompatibleSampler("markov matrix size does not match alphabet");
    if (static_cast<int>(m.stationary.size()) != a)
        throw IncompatibleSampler("markov stationary vector size mismatch");
    for (int i = 0; i < a; ++i)
        check_distribution(std::span<const double>(m.rows.data() + static_cast<std::size_t>(i) * a,
                                                   static_cast<std::size_t>(a)),
                           "markov row");
    check_distribution(m.stationary, "markov stationary vector");
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < a; ++j)
            if (m.rows[static_cast<std::size_t>(i) * a + j] > 0.0 && !s.allowed(i, j))
                throw IncompatibleSampler("markov support not contained in SFT transitions");
    for (int j = 0; j < a; ++j) {
        double v = 0.0;
        for (int i = 0; i < a; ++i)
            v += m.stationary[static_cast<std::size_t>(i)] * m.rows[static_cast<std::size_t>(i) * a + j];
        if (std::abs(v - m.stationary[static_cast<std::size_t>(j)]) > 1e-10)
            throw IncompatibleSampler("stationary vector does not satisfy pi P = pi");
    }
    if (!support_irreducible(m.rows, a))
        throw IncompatibleSampler("markov support graph is not irreducible");
}

BasePoint sample_point(const MeasureSampler& sampler, const BaseSystem& base, std::uint64_t index) {
    sampler.validate(base);
    if (std::holds_alternative<LebesgueTorusMeasure>(sampler.kind)) {
        const auto& t = std::get<TorusMap>(base);
        CounterRng rng = CounterRng::derive(sampler.seed, "sample_pt", index);
        TorusPoint p;
        p.coords.resize(static_cast<std::size_t>(t.dim));
        for (double& c : p.coords) c = rng.next_double();
        return p;
    }
    const auto& s = std::get<ShiftSpace>(base);
    const int a = s.alphabet_size;
    SamplerExtension ext;
    ext.seed = CounterRng::mix(sampler.seed ^ CounterRng::mix(index ^ 0x77u));
    ext.alphabet = a;
    if (const auto* b = std::get_if<BernoulliMeasure>(&sampler.kind)) {
        ext.init_probs = b->probs;
        ext.fwd_rows.resize(static_cast<std::size_t>(a) * a);
        ext.bwd_rows.resize(static_cast<std::size_t>(a) * a);
        for (int i = 0; i < a; ++i)
            for (int j = 0; j < a; ++j) {
                ext.fwd_rows[static_cast<std::size_t>(i) * a + j] = b->probs[static_cast<std::size_t>(j)];
                ext.bwd_rows[static_cast<std::size_t>(i) * a + j] = b->probs[static_cast<std::size_t>(j)];
            }
    } else {
        const auto& m = std::get<MarkovMeasure>(sampler.kind);
        ext.init_probs = m.stationary;
        ext.fwd_rows = m.rows;
        // reversed chain: P~(prev | cur) = pi_prev P[prev][cur] / pi_cur
        ext.bwd_rows.assign(static_cast<std::size_t>(a) * a, 0.0);
        for (int cur = 0; cur < a; ++cur) {
            const double pc = m.stationary[static_cast<std::size_t>(cur)];
            if (pc > 0.0) {
                for (int prev = 0; prev < a; ++prev)
                    ext.bwd_rows[static_cast<std::size_t>(cur) * a + prev] =
                        m.stationary[static_cast<std::size_t>(prev)] *
                        m.rows[static_cast<std::size_t>(prev) * a + cur] / pc;
            } else {
                for (int prev = 0; prev < a; ++prev)
                    ext.bwd_rows[static_cast<std::size_t>(cur) * a + prev] = 1.0 / a;
            }
        }
    }
    return SymbolicWindow::sampled(std::move(ext));
}

ExponentPair estimate_exponents(const CocycleGenerator& gen, const BaseSystem& base,
                                const MeasureSampler& sampler, std::int64_t n, int replicas) {
    if (n < 1 || replicas < 1) throw Error("estimate requires n >= 1 and replicas >= 1");
    sampler.validate(base);
    ExponentPair out;
    out.replica_upper.resize(static_cast<std::size_t>(replicas));
    out.replica_lower.resize(static_cast<std::size_t>(replicas));
    parallel_for_index(replicas, [&](std::int64_t r) {
        const BasePoint x = sample_point(sampler, base, static_cast<std::uint64_t>(r));
        const CocyclePass pass = cocycle_pass(gen, base, x, n);
        out.replica_upper[static_cast<std::size_t>(r)] =
            pass.forward.log_norm(gen.norm) / static_cast<double>(n);
        out.replica_lower[static_cast<std::size_t>(r)] =
            -pass.inverse.log_norm(gen.norm) / static_cast<double>(n);
    });
    auto summarize = [&](const std::vector<double>& vals) {
        ExponentEstimate e;
        e.horizon_n = n;
        e.replicas = replicas;
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(replicas);
        e.value = mean;
        if (replicas > 1) {
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            e.stderr_v = std::sqrt(ss / (replicas - 1)) / std::sqrt(static_cast<double>(replicas));
        }
        return e;
    };
    out.upper = summarize(out.replica_upper);
    out.lower = summarize(out.replica_lower);
    return out;
}

ExponentEstimate estimate_upper(const CocycleGenerator& gen, const BaseSystem& base,
                                const MeasureSampler& sampler, std::int64_t n, int replicas) {
    return estimate_exponents(gen, base, sampler, n, replicas).upper;
}

ExponentEstimate estimate_lower(const CocycleGenerator& gen, const BaseSystem& base,
                                const MeasureSampler& sampler, std::int64_t n, int replicas) {
    return estimate_exponents(gen, base, sampler, n, replicas).lower;
}

SubadditiveSequence make_subadditive_sequence(const CocycleGenerator& gen, const BaseSystem& base,
                                              const BasePoint& x, std::int64_t n,
                                              SubadditiveKind kind, bool with_suffix_table) {
    SubadditiveSequence seq;
    seq.kind = kind;
    seq.x_ref = x;
    const bool backward = (kind == SubadditiveKind::b || kind == SubadditiveKind::b_tilde);
    const bool tilde = (kind == SubadditiveKind::a_tilde || kind == SubadditiveKind::b_tilde);
    const PrefixLogNorms pref = backward ? prefix_log_norms_backward(gen, base, x, n)
                                         : prefix_log_norms(gen, base, x, n);
    seq.values = tilde ? pref.a_tilde : pref.a;
    if (with_suffix_table) {
        if (backward) throw Error("suffix table is defined for the forward kinds only");
        seq.suffix = std::make_shared<SuffixNormTable>(
            suffix_log_norm_table(gen, base, x, n, tilde));
    }
    return seq;
}

std::vector<std::int64_t> km_good_times(const SubadditiveSequence& seq, double lambda_hat,
                                        double eps, std::int64_t L) {
    if (!(eps > 0.0)) throw Error("km_good_times requires eps > 0");
    if (L < 1) throw Error("km_good_times requires L >= 1");
    if (!seq.suffix) throw Error("km_good_times needs the suffix table");
    const auto n_max = static_cast<std::int64_t>(seq.values.size()) - 1;
    std::vector<std::int64_t> good;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        bool ok = true;
        for (std::int64_t i = L; i <= n; ++i) {
            const double suffix = seq.suffix->rows[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(n - i)];
            if (seq.values[static_cast<std::size_t>(n)] - suffix <
                (lambda_hat - eps) * static_cast<double>(i)) {
                ok = false;
                break;
            }
        }
        if (ok) good.push_back(n);
    }
    return good;
}

double gk_good_density(const SubadditiveSequence& seq, double lambda_hat,
                       std::span<const double> eps_schedule, std::int64_t N) {
    if (N < 1) throw Error("gk_good_density requires N >= 1");
    if (eps_schedule.empty()) throw Error("gk_good_density requires a nonempty schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0.0)) throw Error("eps schedule entries must be positive");
        if (i > 0 && eps_schedule[i] > eps_schedule[i - 1] + 1e-15)
            throw Error("eps schedule must be non-increasing");
    }
    if (!seq.suffix) throw Error("gk_good_density needs the suffix table");
    if (static_cast<std::int64_t>(seq.values.size()) - 1 < N - 1)
        throw Error("sequence shorter than requested N");
    std::int64_t count = 0;
    for (std::int64_t n = 0; n < N; ++n) {
        bool ok = true;
        for (std::int64_t i = 1; i <= n; ++i) {
            const double eps_i =
                eps_schedule[std::min<std::size_t>(static_cast<std::size_t>(i - 1),
                                                   eps_schedule.size() - 1)];
            const double suffix = seq.suffix->rows[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(n - i)];
            if (seq.values[static_cast<std::size_t>(n)] - suffix <
                (lambda_hat - eps_i) * static_cast<double>(i)) {
                ok = false;
                break;
            }
        }
        if (ok) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(N);
}

} // namespace coclab
