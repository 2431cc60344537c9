#include "coclab/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "coclab/parallel.hpp"

namespace coclab {

namespace {

using int128 = __int128;

bool is_minimal_rotation(const std::vector<int>& w) {
    const std::size_t k = w.size();
    for (std::size_t r = 1; r < k; ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            const int a = w[(i + r) % k];
            const int b = w[i];
            if (a < b) return false;
            if (a > b) break;
        }
    }
    return true;
}

std::vector<PeriodicOrbit> enumerate_shift_periodic(const ShiftSpace& s, std::int64_t k,
                                                    std::uint64_t budget) {
    double words = 1.0;
    for (std::int64_t i = 0; i < k; ++i) words *= s.alphabet_size;
    if (words > static_cast<double>(budget))
        throw BudgetExceeded("alphabet^k exceeds the enumeration budget");
    std::vector<PeriodicOrbit> out;
    std::vector<int> w;
    w.reserve(static_cast<std::size_t>(k));
    std::function<void()> rec = [&] {
        if (static_cast<std::int64_t>(w.size()) == k) {
            if (!s.allowed(w.back(), w.front())) return;
            if (!is_minimal_rotation(w)) return;
            out.push_back(PeriodicOrbit{SymbolicWindow::periodic_word(s, w), k, 0.0});
            return;
        }
        for (int sym = 0; sym < s.alphabet_size; ++sym) {
            if (!w.empty() && !s.allowed(w.back(), sym)) continue;
            w.push_back(sym);
            rec();
            w.pop_back();
        }
    };
    rec();
    return out;
}

// integer matrix helpers for the torus lattice sweep
std::vector<std::int64_t> int_mat_mul(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b, int n) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
            const int128 v = a[static_cast<std::size_t>(i) * n + l];
            if (v == 0) continue;
            for (int j = 0; j < n; ++j) {
                const int128 s = static_cast<int128>(c[static_cast<std::size_t>(i) * n + j]) +
                                 v * b[static_cast<std::size_t>(l) * n + j];
                if (s > std::numeric_limits<std::int64_t>::max() / 4 ||
                    s < std::numeric_limits<std::int64_t>::min() / 4)
                    throw BudgetExceeded("integer overflow in torus matrix power");
                c[static_cast<std::size_t>(i) * n + j] = static_cast<std::int64_t>(s);
            }
        }
    return c;
}

int128 int_det_small(const std::vector<std::int64_t>& m, int n) {
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
        det += ((c % 2 == 0) ? 1 : -1) * static_cast<int128>(m[static_cast<std::size_t>(c)]) *
               int_det_small(minor, n - 1);
    }
    return det;
}

std::vector<std::int64_t> int_adjugate_small(const std::vector<std::int64_t>& m, int n) {
    std::vector<std::int64_t> adj(static_cast<std::size_t>(n) * n);
    if (n == 1) {
        adj[0] = 1;
        return adj;
    }
    std::vector<std::int64_t> minor(static_cast<std::size_t>(n - 1) * (n - 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int mi = 0;
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                for (int c = 0; c < n; ++c)
                    if (c != j) minor[static_cast<std::size_t>(mi++)] = m[static_cast<std::size_t>(r) * n + c];
            }
            const int128 cof = (((i + j) % 2 == 0) ? 1 : -1) * int_det_small(minor, n - 1);
            adj[static_cast<std::size_t>(j) * n + i] = static_cast<std::int64_t>(cof);
        }
    return adj;
}

std::vector<PeriodicOrbit> enumerate_torus_periodic(const TorusMap& t, std::int64_t k,
                                                    std::uint64_t budget) {
    if (t.dim > 3) throw BudgetExceeded("torus enumeration supports dim <= 3");
    const int d = t.dim;
    // B = M^k - I, exactly
    std::vector<std::int64_t> mk(static_cast<std::size_t>(d) * d, 0);
    for (int i = 0; i < d; ++i) mk[static_cast<std::size_t>(i) * d + i] = 1;
    for (std::int64_t j = 0; j < k; ++j) mk = int_mat_mul(t.mat, mk, d);
    std::vector<std::int64_t> b = mk;
    for (int i = 0; i < d; ++i) b[static_cast<std::size_t>(i) * d + i] -= 1;
    const int128 det = int_det_small(b, d);
    if (det == 0) throw Error("M^k - I is singular; base is not hyperbolic");
    const std::int64_t sign = det > 0 ? 1 : -1;
    const int128 absdet = det > 0 ? det : -det;
    if (absdet > static_cast<int128>(budget))
        throw BudgetExceeded("|det(M^k - I)| exceeds the enumeration budget");
    const auto D = static_cast<std::int64_t>(absdet);
    std::vector<std::int64_t> adj = int_adjugate_small(b, d);
    for (auto& v : adj) {
        v *= sign;
        v %= D;
        if (v < 0) v += D;
    }
    // D^d must fit a packed 63-bit key
    int128 packed_max = 1;
    for (int i = 0; i < d; ++i) packed_max *= D;
    if (packed_max >= (static_cast<int128>(1) << 62))
        throw BudgetExceeded("torus residue lattice too large to enumerate");

    auto pack = [&](const std::vector<std::int64_t>& w) {
        std::uint64_t key = 0;
        for (int i = d - 1; i >= 0; --i)
            key = key * static_cast<std::uint64_t>(D) +
                  static_cast<std::uint64_t>(w[static_cast<std::size_t>(i)]);
        return key;
    };
    auto unpack = [&](std::uint64_t key) {
        std::vector<std::int64_t> w(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            w[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(key % static_cast<std::uint64_t>(D));
            key /= static_cast<std::uint64_t>(D);
        }
        return w;
    };

    // fixed points of f^k are w/D with w in the subgroup of (Z_D)^d generated
    // by the adjugate columns
    std::set<std::uint64_t> elems;
    std::vector<std::uint64_t> queue;
    elems.insert(0);
    queue.push_back(0);
    std::vector<std::int64_t> nw(static_cast<std::size_t>(d));
    while (!queue.empty()) {
        const auto w = unpack(queue.back());
        queue.pop_back();
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i)
                nw[static_cast<std::size_t>(i)] =
                    (w[static_cast<std::size_t>(i)] + adj[static_cast<std::size_t>(i) * d + j]) % D;
            const std::uint64_t key = pack(nw);
            if (elems.insert(key).second) queue.push_back(key);
        }
    }
    if (static_cast<std::int64_t>(elems.size()) != D)
        throw Error("torus lattice sweep found an unexpected number of solutions");
    // integer step w -> M w mod D; keep the lexicographically minimal element
    // of each cyclic class
    auto int_step = [&](const std::vector<std::int64_t>& w) {
        std::vector<std::int64_t> out(static_cast<std::size_t>(d), 0);
        for (int i = 0; i < d; ++i) {
            int128 s = 0;
            for (int j = 0; j < d; ++j)
                s += static_cast<int128>(t.at(i, j)) * w[static_cast<std::size_t>(j)];
            std::int64_t v = static_cast<std::int64_t>(s % D);
            if (v < 0) v += D;
            out[static_cast<std::size_t>(i)] = v;
        }
        return out;
    };
    std::vector<PeriodicOrbit> out;
    for (const std::uint64_t key : elems) {
        const auto w = unpack(key);
        bool minimal = true;
        auto cur = int_step(w);
        for (std::int64_t j = 1; j < k && minimal; ++j) {
            if (cur < w) minimal = false;
            cur = int_step(cur);
        }
        if (minimal && cur != w) throw Error("torus periodic candidate fails integer verification");
        if (!minimal) continue;
        TorusPoint p;
        p.coords.resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            p.coords[static_cast<std::size_t>(i)] =
                static_cast<double>(w[static_cast<std::size_t>(i)]) / static_cast<double>(D);
        out.push_back(PeriodicOrbit{p, k, 0.0});
    }
    std::sort(out.begin(), out.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        return std::get<TorusPoint>(a.point).coords < std::get<TorusPoint>(b.point).coords;
    });
    return out;
}

} // namespace

std::vector<PeriodicOrbit> enumerate_periodic(const BaseSystem& base, std::int64_t k,
                                              std::uint64_t budget) {
    if (k < 1) throw Error("enumerate_periodic requires k >= 1");
    if (std::holds_alternative<ShiftSpace>(base))
        return enumerate_shift_periodic(std::get<ShiftSpace>(base), k, budget);
    return enumerate_torus_periodic(std::get<TorusMap>(base), k, budget);
}

PeriodicScore score_periodic(const CocycleGenerator& gen, const BaseSystem& base,
                             const PeriodicOrbit& orbit) {
    const CocyclePass pass = cocycle_pass(gen, base, orbit.point, orbit.period_k);
    const double k = static_cast<double>(orbit.period_k);
    PeriodicScore s;
    s.upper_rate = pass.forward.log_norm(gen.norm) / k;
    s.lower_rate = -pass.inverse.log_norm(gen.norm) / k;
    s.upper_exponent = pass.forward.log_spectral_radius() / k;
    s.lower_exponent = -pass.inverse.log_spectral_radius() / k;
    s.ln_q = pass.forward.log_norm(gen.norm) + pass.inverse.log_norm(gen.norm);
    return s;
}

std::string orbit_label(const BaseSystem& base, const PeriodicOrbit& orbit) {
    if (std::holds_alternative<ShiftSpace>(base)) {
        const auto& w = std::get<SymbolicWindow>(orbit.point);
        std::string s;
        for (std::int64_t i = 0; i < orbit.period_k; ++i) {
            if (i) s.push_back(' ');
            s += std::to_string(w.symbol(i));
        }
        return s;
    }
    const auto& p = std::get<TorusPoint>(orbit.point);
    std::string s = "(";
    char buf[32];
    for (std::size_t i = 0; i < p.coords.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.coords[i]);
        if (i) s += ", ";
        s += buf;
    }
    s += ")";
    return s;
}

namespace {

ScoreRow make_row(const CocycleGenerator& gen, const BaseSystem& base, const PeriodicOrbit& orbit,
                  double lambda_hat, double chi_hat) {
    ScoreRow row;
    row.k = orbit.period_k;
    row.label = orbit_label(base, orbit);
    row.score = score_periodic(gen, base, orbit);
    row.residual = std::max(std::abs(lambda_hat - row.score.upper_rate),
                            std::abs(chi_hat - row.score.lower_rate));
    return row;
}

} // namespace

TheoremReport verify_main_theorem(const CocycleGenerator& gen, const BaseSystem& base,
                                  const MeasureSampler& sampler, const ExponentPair& exponents,
                                  double eps_target, std::int64_t k_max, std::int64_t N_min,
                                  TheoremMode mode, const ConstructiveOptions& copts,
                                  std::uint64_t budget) {
    if (!(eps_target > 0.0)) throw Error("verify_main_theorem requires eps_target > 0");
    TheoremReport rep;
    rep.mode = mode;
    rep.lambda_hat = exponents.upper.value;
    rep.chi_hat = exponents.lower.value;
    rep.eps_target = eps_target;
    rep.stderr_total = exponents.upper.stderr_v + exponents.lower.stderr_v;

    if (mode == TheoremMode::exhaustive) {
        bool have_winner = false;
        for (std::int64_t k = N_min + 1; k <= k_max; ++k) {
            const auto orbits = enumerate_periodic(base, k, budget);
            std::vector<ScoreRow> rows(orbits.size());
            parallel_for_index(static_cast<std::int64_t>(orbits.size()), [&](std::int64_t i) {
                rows[static_cast<std::size_t>(i)] =
                    make_row(gen, base, orbits[static_cast<std::size_t>(i)],
                             rep.lambda_hat, rep.chi_hat);
            });
            for (auto& row : rows) {
                if (!have_winner || row.residual < rep.winner.residual) {
                    rep.winner = row;
                    have_winner = true;
                }
                rep.table.push_back(std::move(row));
            }
        }
        if (!have_winner) throw Error("no periodic orbits in (N_min, k_max]");
    } else {
        const BasePoint x = sample_point(sampler, base, 0);
        const double alpha_gamma = gen.holder.alpha * expansion_rate(base);
        const double eps_prime = 3.0 * eps_target / alpha_gamma;
        rep.trace.push_back("eps_prime = 3 eps / (alpha gamma) = " + std::to_string(eps_prime));
        const auto seq = make_subadditive_sequence(gen, base, x, copts.orbit_N,
                                                   SubadditiveKind::a, /*with_suffix_table=*/true);
        const auto good = km_good_times(seq, rep.lambda_hat, eps_target, copts.L);
        rep.trace.push_back("good times found: " + std::to_string(good.size()));
        if (good.empty())
            rep.trace.push_back("stalled: no Karlsson-Margulis good times up to orbit_N");
        const double return_delta = copts.delta / std::max(copts.closing.D, 1.0);
        bool have_winner = false;
        for (const std::int64_t n : good) {
            if (n <= std::max(copts.L, N_min)) continue;
            const auto kret = find_return(base, x, n, eps_prime, return_delta);
            if (!kret) {
                rep.trace.push_back("n = " + std::to_string(n) +
                                    ": no return below delta/D in the recurrence window");
                continue;
            }
            PeriodicOrbit orbit{x, *kret, 0.0};
            try {
                orbit = close_orbit(base, x, *kret);
            } catch (const Error& e) {
                rep.trace.push_back("n = " + std::to_string(n) + ", k = " + std::to_string(*kret) +
                                    ": closing failed: " + e.what());
                continue;
            }
            ScoreRow row = make_row(gen, base, orbit, rep.lambda_hat, rep.chi_hat);
            rep.trace.push_back("n = " + std::to_string(n) + ", k = " + std::to_string(*kret) +
                                ": residual = " + std::to_string(row.residual));
            if (!have_winner || row.residual < rep.winner.residual) {
                rep.winner = row;
                have_winner = true;
            }
            rep.table.push_back(std::move(row));
            if (rep.winner.residual < eps_target + 2.0 * rep.stderr_total) break;
        }
        if (!have_winner) {
            rep.success = false;
            rep.trace.push_back("stalled: constructive recipe produced no periodic point");
            return rep;
        }
    }
    rep.success = rep.winner.residual < eps_target + 2.0 * rep.stderr_total;
    rep.one_sided_upper_ok = rep.winner.score.upper_exponent < rep.lambda_hat + eps_target;
    rep.one_sided_lower_ok = rep.winner.score.lower_exponent > rep.chi_hat - eps_target;
    return rep;
}

NormRatesReport corollary_norm_rates(const CocycleGenerator& gen, const BaseSystem& base,
                                     std::int64_t n_max, std::int64_t k_max, int torus_samples,
                                     std::uint64_t seed, std::uint64_t budget) {
    if (n_max < 1 || k_max < 1) throw Error("corollary_norm_rates requires n_max, k_max >= 1");
    NormRatesReport rep;
    rep.s_n.assign(static_cast<std::size_t>(n_max),
                   -std::numeric_limits<double>::infinity());
    rep.q_s_n.assign(static_cast<std::size_t>(n_max),
                     -std::numeric_limits<double>::infinity());

    const bool shift_base = std::holds_alternative<ShiftSpace>(base);
    if (gen.is_locally_constant() && shift_base) {
        // exact sup over allowed words: one depth-first sweep to n_max + 2m
        const auto& s = std::get<ShiftSpace>(base);
        const auto& lc = std::get<LocallyConstantGen>(gen.kind);
        const int m = lc.memory;
        const std::int64_t total_len = n_max + 2 * m;
        double count = 1.0;
        for (std::int64_t i = 0; i < total_len; ++i) count *= s.alphabet_size;
        if (count > static_cast<double>(budget))
            throw BudgetExceeded("word sweep exceeds budget in corollary_norm_rates");
        std::vector<int> w;
        std::vector<CocyclePass> stack; // stack[j] = product of the first j steps
        stack.push_back(CocyclePass{ScaledOperator::identity(gen.dim),
                                    ScaledOperator::identity(gen.dim)});
        std::function<void()> rec = [&] {
            const auto t = static_cast<std::int64_t>(w.size());
            if (t >= 2 * m + 1) {
                // step j = t - 2m - 1 uses the window w[j .. j+2m]
                const std::int64_t j = t - 2 * m - 1;
                std::vector<int> key(w.begin() + j, w.begin() + t);
                const auto it = lc.table.find(key);
                if (it == lc.table.end()) throw MissingWord("table gap in corollary sweep");
                CocyclePass next = stack.back();
                next.forward.multiply_left(it->second.first);
                next.inverse.multiply_right(it->second.second);
                const auto n = static_cast<std::size_t>(j + 1);
                const double a = next.forward.log_norm(gen.norm);
                const double at = next.inverse.log_norm(gen.norm);
                rep.s_n[n - 1] = std::max(rep.s_n[n - 1], a / static_cast<double>(n));
                rep.q_s_n[n - 1] = std::max(rep.q_s_n[n - 1], (a + at) / static_cast<double>(n));
                stack.push_back(std::move(next));
            }
            if (t == total_len) {
                if (t >= 2 * m + 1) stack.pop_back();
                return;
            }
            for (int sym = 0; sym < s.alphabet_size; ++sym) {
                if (!w.empty() && !s.allowed(w.back(), sym)) continue;
                w.push_back(sym);
                rec();
                w.pop_back();
            }
            if (t >= 2 * m + 1) stack.pop_back();
        };
        rec();
    } else {
        // sampled sup (exact for constant generators)
        const int samples = gen.is_constant() ? 1 : torus_samples;
        for (int sidx = 0; sidx < samples; ++sidx) {
            const BasePoint x = uniform_point(base, seed, static_cast<std::uint64_t>(sidx));
            const PrefixLogNorms pref = prefix_log_norms(gen, base, x, n_max);
            for (std::int64_t n = 1; n <= n_max; ++n) {
                const auto i = static_cast<std::size_t>(n);
                rep.s_n[i - 1] = std::max(rep.s_n[i - 1], pref.a[i] / static_cast<double>(n));
                rep.q_s_n[i - 1] =
                    std::max(rep.q_s_n[i - 1], (pref.a[i] + pref.a_tilde[i]) / static_cast<double>(n));
            }
        }
    }

    rep.t_k.assign(static_cast<std::size_t>(k_max), -std::numeric_limits<double>::infinity());
    rep.q_t_k.assign(static_cast<std::size_t>(k_max), -std::numeric_limits<double>::infinity());
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const auto orbits = enumerate_periodic(base, k, budget);
        for (const auto& orbit : orbits) {
            const PeriodicScore sc = score_periodic(gen, base, orbit);
            const auto i = static_cast<std::size_t>(k - 1);
            rep.t_k[i] = std::max(rep.t_k[i], sc.upper_rate);
            rep.q_t_k[i] = std::max(rep.q_t_k[i], sc.ln_q / static_cast<double>(k));
        }
    }
    const double best_t = *std::max_element(rep.t_k.begin(), rep.t_k.end());
    const double best_qt = *std::max_element(rep.q_t_k.begin(), rep.q_t_k.end());
    rep.gap = std::abs(rep.s_n.back() - best_t);
    rep.q_gap = std::abs(rep.q_s_n.back() - best_qt);
    return rep;
}

} // namespace coclab
