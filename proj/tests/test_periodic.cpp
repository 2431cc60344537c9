#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coclab/periodic.hpp"

using namespace coclab;

namespace {

ShiftSpace full_shift2() {
    ShiftSpace s;
    s.alphabet_size = 2;
    s.validate();
    return s;
}

TorusMap cat_map() {
    TorusMap t;
    t.dim = 2;
    t.mat = {2, 1, 1, 1};
    t.validate();
    return t;
}

HolderData nan_bounds() {
    HolderData h;
    h.alpha = 1.0;
    h.M = 4.0;
    h.lambda_prime = std::numeric_limits<double>::quiet_NaN();
    h.chi_prime = std::numeric_limits<double>::quiet_NaN();
    return h;
}

CocycleGenerator diag_pair_gen() {
    const double d0[] = {2.0, 0.5};
    const double d1[] = {0.5, 2.0};
    std::map<std::vector<int>, Operator> table;
    table.emplace(std::vector<int>{0}, Operator::diagonal(d0));
    table.emplace(std::vector<int>{1}, Operator::diagonal(d1));
    return make_locally_constant_generator(0, std::move(table), nan_bounds());
}

CocycleGenerator golden_pair_gen() {
    std::map<std::vector<int>, Operator> table;
    table.emplace(std::vector<int>{0}, Operator::from_rows({{1, 1}, {0, 1}}));
    table.emplace(std::vector<int>{1}, Operator::from_rows({{1, 0}, {1, 1}}));
    return make_locally_constant_generator(0, std::move(table), nan_bounds());
}

MeasureSampler bernoulli_half(std::uint64_t seed) {
    MeasureSampler m;
    m.kind = BernoulliMeasure{{0.5, 0.5}};
    m.seed = seed;
    return m;
}

std::vector<int> orbit_word(const PeriodicOrbit& orbit) {
    const auto& w = std::get<SymbolicWindow>(orbit.point);
    std::vector<int> out;
    for (std::int64_t i = 0; i < orbit.period_k; ++i) out.push_back(w.symbol(i));
    return out;
}

} // namespace

TEST_CASE("shift enumeration: small periods") {
    const BaseSystem base = full_shift2();
    const auto k1 = enumerate_periodic(base, 1);
    REQUIRE(k1.size() == 2);
    CHECK(orbit_word(k1[0]) == std::vector<int>{0});
    CHECK(orbit_word(k1[1]) == std::vector<int>{1});
    const auto k3 = enumerate_periodic(base, 3);
    CHECK(k3.size() == 4); // 000, 001, 011, 111
    std::set<std::vector<int>> words;
    for (const auto& orbit : k3) words.insert(orbit_word(orbit));
    CHECK(words.count({0, 0, 0}) == 1);
    CHECK(words.count({0, 0, 1}) == 1);
    CHECK(words.count({0, 1, 1}) == 1);
    CHECK(words.count({1, 1, 1}) == 1);
}

TEST_CASE("shift enumeration: cyclic classes account for all words") {
    const BaseSystem base = full_shift2();
    for (std::int64_t k = 1; k <= 12; ++k) {
        const auto orbits = enumerate_periodic(base, k);
        std::int64_t total = 0;
        for (const auto& orbit : orbits) {
            // class size = number of distinct rotations
            const auto w = orbit_word(orbit);
            std::set<std::vector<int>> rots;
            for (std::int64_t r = 0; r < k; ++r) {
                std::vector<int> rot;
                for (std::int64_t i = 0; i < k; ++i)
                    rot.push_back(w[static_cast<std::size_t>((i + r) % k)]);
                rots.insert(std::move(rot));
            }
            total += static_cast<std::int64_t>(rots.size());
        }
        CHECK(total == (std::int64_t{1} << k));
    }
}

TEST_CASE("shift enumeration honors transition constraints") {
    ShiftSpace s;
    s.alphabet_size = 2;
    s.transition = {1, 1, 1, 0}; // golden mean: 11 forbidden
    s.validate();
    const BaseSystem base = s;
    for (std::int64_t k = 1; k <= 10; ++k) {
        std::int64_t total = 0;
        for (const auto& orbit : enumerate_periodic(base, k)) {
            const auto w = orbit_word(orbit);
            for (std::int64_t i = 0; i < k; ++i)
                CHECK(s.allowed(w[static_cast<std::size_t>(i)],
                                w[static_cast<std::size_t>((i + 1) % k)]));
            std::set<std::vector<int>> rots;
            for (std::int64_t r = 0; r < k; ++r) {
                std::vector<int> rot;
                for (std::int64_t i = 0; i < k; ++i)
                    rot.push_back(w[static_cast<std::size_t>((i + r) % k)]);
                rots.insert(std::move(rot));
            }
            total += static_cast<std::int64_t>(rots.size());
        }
        // #periodic words of the golden-mean shift = Lucas numbers
        static const std::int64_t lucas[] = {0, 1, 3, 4, 7, 11, 18, 29, 47, 76, 123};
        CHECK(total == lucas[k]);
    }
}

TEST_CASE("torus enumeration: counts match |det(M^k - I)| exactly") {
    const BaseSystem base = cat_map();
    const auto& t = std::get<TorusMap>(base);
    // Lefschetz counts tr(M^k) - 2 for the cat map: 1, 5, 16, 45, 121, 320
    static const std::int64_t expected_points[] = {0, 1, 5, 16, 45, 121, 320};
    for (std::int64_t k = 1; k <= 6; ++k) {
        // independent denominator: D = |det(M^k - I)| via exact 2x2 integers
        std::int64_t m[4] = {1, 0, 0, 1};
        for (std::int64_t j = 0; j < k; ++j) {
            const std::int64_t n0 = t.mat[0] * m[0] + t.mat[1] * m[2];
            const std::int64_t n1 = t.mat[0] * m[1] + t.mat[1] * m[3];
            const std::int64_t n2 = t.mat[2] * m[0] + t.mat[3] * m[2];
            const std::int64_t n3 = t.mat[2] * m[1] + t.mat[3] * m[3];
            m[0] = n0;
            m[1] = n1;
            m[2] = n2;
            m[3] = n3;
        }
        const std::int64_t D = std::llabs((m[0] - 1) * (m[3] - 1) - m[1] * m[2]);
        CHECK(D == expected_points[k]);

        const auto orbits = enumerate_periodic(base, k);
        std::int64_t points = 0;
        std::set<std::pair<std::int64_t, std::int64_t>> seen;
        for (const auto& orbit : orbits) {
            CHECK(orbit.residual == 0.0);
            const double res = distance(base, step(base, orbit.point, k), orbit.point);
            CHECK(res <= 1e-9);
            // recover the exact residue vector and count the class in integers
            const auto& tp = std::get<TorusPoint>(orbit.point);
            std::int64_t w0 = std::llround(tp.coords[0] * static_cast<double>(D));
            std::int64_t w1 = std::llround(tp.coords[1] * static_cast<double>(D));
            CHECK(std::abs(tp.coords[0] * D - static_cast<double>(w0)) < 1e-6);
            CHECK(std::abs(tp.coords[1] * D - static_cast<double>(w1)) < 1e-6);
            std::set<std::pair<std::int64_t, std::int64_t>> cls;
            for (std::int64_t i = 0; i < k; ++i) {
                cls.insert({w0, w1});
                const std::int64_t v0 = ((t.mat[0] * w0 + t.mat[1] * w1) % D + D) % D;
                const std::int64_t v1 = ((t.mat[2] * w0 + t.mat[3] * w1) % D + D) % D;
                w0 = v0;
                w1 = v1;
            }
            points += static_cast<std::int64_t>(cls.size());
            CHECK(seen.insert(*cls.begin()).second);
        }
        CHECK(points == expected_points[k]);
    }
    CHECK(enumerate_periodic(base, 1).size() == 1); // origin only
}

TEST_CASE("score_periodic: frozen values") {
    const BaseSystem base = full_shift2();
    const auto& s = std::get<ShiftSpace>(base);
    const auto c3 = make_constant_generator(Operator::identity(2).scaled(3.0), nan_bounds());
    const PeriodicOrbit p1{SymbolicWindow::periodic_word(s, {0, 1}), 2, 0.0};
    const PeriodicScore sc1 = score_periodic(c3, base, p1);
    CHECK(sc1.upper_rate == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(sc1.lower_rate == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(sc1.upper_exponent == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(sc1.ln_q == doctest::Approx(0.0).epsilon(1e-10));

    const auto pair = diag_pair_gen();
    const PeriodicScore sc2 = score_periodic(pair, base, p1); // (01)^infty
    CHECK(sc2.upper_rate == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sc2.upper_exponent == doctest::Approx(0.0).epsilon(1e-12));
    const PeriodicOrbit p0{SymbolicWindow::periodic_word(s, {0}), 1, 0.0};
    CHECK(score_periodic(pair, base, p0).upper_rate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("score invariants and repetition invariance") {
    const BaseSystem base = full_shift2();
    const auto& s = std::get<ShiftSpace>(base);
    const auto gen = golden_pair_gen();
    for (std::int64_t k = 1; k <= 6; ++k) {
        for (const auto& orbit : enumerate_periodic(base, k)) {
            const PeriodicScore sc = score_periodic(gen, base, orbit);
            CHECK(sc.upper_exponent <= sc.upper_rate + 1e-9);
            CHECK(sc.lower_exponent >= sc.lower_rate - 1e-9);
            // traverse the same orbit twice
            std::vector<int> twice;
            const auto& w = std::get<SymbolicWindow>(orbit.point);
            for (std::int64_t i = 0; i < 2 * k; ++i)
                twice.push_back(w.symbol(i % k));
            const PeriodicOrbit doubled{SymbolicWindow::periodic_word(s, twice), 2 * k, 0.0};
            const PeriodicScore sc2 = score_periodic(gen, base, doubled);
            CHECK(sc2.upper_exponent == doctest::Approx(sc.upper_exponent).epsilon(1e-9));
            CHECK(sc2.lower_exponent == doctest::Approx(sc.lower_exponent).epsilon(1e-9));
            CHECK(sc2.upper_rate <= sc.upper_rate + 1e-9);
        }
    }
}

TEST_CASE("verify_main_theorem: conformal constant succeeds at the smallest period") {
    const BaseSystem base = full_shift2();
    const auto gen = make_constant_generator(Operator::identity(2).scaled(3.0), nan_bounds());
    const MeasureSampler m = bernoulli_half(17);
    const ExponentPair est = estimate_exponents(gen, base, m, 50, 1);
    const TheoremReport rep = verify_main_theorem(gen, base, m, est, 0.05, 6, 1);
    CHECK(rep.success);
    CHECK(rep.winner.k == 2); // smallest admissible k wins ties
    CHECK(rep.winner.residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.one_sided_upper_ok);
    CHECK(rep.one_sided_lower_ok);
}

TEST_CASE("verify_main_theorem: diagonal pair finds a balanced word") {
    const BaseSystem base = full_shift2();
    const auto gen = diag_pair_gen();
    const MeasureSampler m = bernoulli_half(19);
    const ExponentPair est = estimate_exponents(gen, base, m, 20000, 8);
    const TheoremReport rep = verify_main_theorem(gen, base, m, est, 0.05, 8, 1);
    CHECK(rep.success);
    CHECK(std::abs(rep.winner.score.upper_rate) < 0.05);
    CHECK(std::abs(rep.winner.score.lower_rate) < 0.05);
    // one-sided periodic-measure bounds hold whenever success is reported
    CHECK(rep.one_sided_upper_ok);
    CHECK(rep.one_sided_lower_ok);
    // honest failure mode: unreachable tolerance reports success = false
    const TheoremReport tight = verify_main_theorem(gen, base, m, est, 1e-12, 8, 1);
    if (std::abs(est.upper.value) > 1e-10 + 2 * tight.stderr_total) CHECK(!tight.success);
    CHECK(!tight.table.empty());
}

TEST_CASE("verify_main_theorem: constructive mode follows the proof recipe") {
    const BaseSystem base = full_shift2();
    const auto gen = diag_pair_gen();
    const MeasureSampler m = bernoulli_half(23);
    const ExponentPair est = estimate_exponents(gen, base, m, 20000, 8);
    ConstructiveOptions copts;
    copts.orbit_N = 600;
    copts.L = 8;
    copts.delta = 0.2;
    copts.closing = calibrate_closing(base, 20, 5);
    const TheoremReport rep = verify_main_theorem(gen, base, m, est, 0.25, 1 << 20, 1,
                                                  TheoremMode::constructive, copts);
    CHECK(!rep.trace.empty());
    REQUIRE(!rep.table.empty());
    CHECK(rep.winner.residual < 0.25 + 2 * rep.stderr_total + 0.3);
}

TEST_CASE("corollary_norm_rates: constant cocycle has zero gap") {
    const BaseSystem base = full_shift2();
    const auto gen = make_constant_generator(Operator::identity(2).scaled(2.0), nan_bounds());
    const NormRatesReport rep = corollary_norm_rates(gen, base, 8, 6);
    for (double v : rep.s_n) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    for (double v : rep.t_k) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(rep.gap == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(rep.q_gap == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("corollary_norm_rates: unipotent growth decays polynomially") {
    // constant unipotent over the full shift stands in for the one-symbol case
    const BaseSystem base = full_shift2();
    const auto gen =
        make_constant_generator(Operator::from_rows({{1, 1}, {0, 1}}), nan_bounds());
    const NormRatesReport rep = corollary_norm_rates(gen, base, 24, 12);
    for (std::size_t i = 1; i < rep.s_n.size(); ++i) CHECK(rep.s_n[i] <= rep.s_n[i - 1] + 1e-12);
    CHECK(rep.s_n.back() < 0.15);  // ln||B^24||/24, polynomial growth
    CHECK(rep.t_k.back() < 0.25);
}

TEST_CASE("corollary_norm_rates: golden pair reaches the joint spectral radius") {
    const BaseSystem base = full_shift2();
    const auto gen = golden_pair_gen();
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const NormRatesReport rep = corollary_norm_rates(gen, base, 12, 6);
    const double best_t = *std::max_element(rep.t_k.begin(), rep.t_k.end());
    CHECK(best_t == doctest::Approx(std::log(phi)).epsilon(1e-9));
    CHECK(rep.s_n.back() >= std::log(phi) - 1e-9);
    CHECK(rep.gap < 0.05);
}
