#include "coclab/harness.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "coclab/parallel.hpp"

namespace coclab {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return CounterRng::derive(seed, label).next_u64();
}

std::string iso_timestamp() {
    std::time_t t;
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::atoll(e));
    else
        t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json estimate_to_json(const ExponentEstimate& e) {
    return {{"value", e.value},
            {"stderr", e.stderr_v},
            {"n", e.horizon_n},
            {"replicas", e.replicas}};
}

json score_to_json(const PeriodicScore& s) {
    return {{"upper_rate", s.upper_rate},
            {"lower_rate", s.lower_rate},
            {"upper_exponent", s.upper_exponent},
            {"lower_exponent", s.lower_exponent},
            {"ln_Q", s.ln_q}};
}

json row_to_json(const ScoreRow& r) {
    json j = score_to_json(r.score);
    j["k"] = r.k;
    j["label"] = r.label;
    j["residual"] = r.residual;
    return j;
}

json theorem_to_json(const TheoremReport& t) {
    json j;
    j["mode"] = t.mode == TheoremMode::exhaustive ? "exhaustive" : "constructive";
    j["success"] = t.success;
    j["lambda_hat"] = t.lambda_hat;
    j["chi_hat"] = t.chi_hat;
    j["eps_target"] = t.eps_target;
    j["stderr_total"] = t.stderr_total;
    j["winner"] = row_to_json(t.winner);
    j["one_sided_upper_ok"] = t.one_sided_upper_ok;
    j["one_sided_lower_ok"] = t.one_sided_lower_ok;
    j["table_size"] = t.table.size();
    if (!t.trace.empty()) j["trace"] = t.trace;
    return j;
}

json contraction_to_json(const ContractionReport& c) {
    json entries = json::array();
    for (const auto& e : c.entries)
        entries.push_back({{"step", e.step},
                           {"forward_ratio", e.forward_ratio},
                           {"backward_ratio", e.backward_ratio},
                           {"forward_converged", e.forward_converged},
                           {"backward_converged", e.backward_converged}});
    return {{"slack", c.slack},
            {"violations", c.violations},
            {"nonconverged", c.nonconverged},
            {"max_forward_ratio", c.max_forward_ratio},
            {"max_backward_ratio", c.max_backward_ratio},
            {"entries", std::move(entries)}};
}

json temperedness_to_json(const TemperednessReport& t) {
    return {{"N", t.N},
            {"M_eps_values", t.M_eps_values},
            {"M_eps_prime_values", t.M_eps_prime_values},
            {"K_rho_truncated", t.K_rho_truncated},
            {"forward_slope", t.forward_slope},
            {"backward_slope", t.backward_slope}};
}

std::string witness_string(const std::vector<int>& word) {
    bool digits_ok = true;
    for (int s : word)
        if (s < 0 || s > 9) digits_ok = false;
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (!digits_ok && i) out.push_back(',');
        out += std::to_string(word[i]);
    }
    return out;
}

json bounds_to_json(const RadiusBounds& b) {
    return {{"lower", b.lower},
            {"upper", b.upper},
            {"depth", b.depth_reached},
            {"witness", witness_string(b.witness_word)}};
}

json corollary_to_json(const NormRatesReport& r) {
    return {{"s_n", r.s_n},   {"t_k", r.t_k},     {"q_s_n", r.q_s_n},
            {"q_t_k", r.q_t_k}, {"gap", r.gap},   {"q_gap", r.q_gap}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << text;
}

} // namespace

std::string tool_version_string() { return "cocycle-lab 0.1.0"; }

json ResultBundle::to_json() const {
    json j;
    j["exponents"] = {{"lambda_hat", estimate_to_json(exponents.upper)},
                      {"chi_hat", estimate_to_json(exponents.lower)}};
    if (has_theorem) j["theorem_report"] = theorem_to_json(theorem);
    if (has_norm_checks) {
        json reports = json::array();
        for (std::size_t i = 0; i < contraction.size(); ++i)
            reports.push_back({{"point", i},
                               {"contraction", contraction_to_json(contraction[i])},
                               {"temperedness", temperedness_to_json(temperedness[i])}});
        j["norm_reports"] = std::move(reports);
    }
    if (has_corollary) j["corollary"] = corollary_to_json(corollary);
    if (has_jsr)
        j["radius_bounds"] = {{"exhaustive", bounds_to_json(jsr_exhaustive)},
                              {"branch_and_bound", bounds_to_json(jsr_bb)}};
    j["stages"] = stages;
    j["provenance"] = {{"config_hash", config_hash_hex},
                       {"seed", seed},
                       {"tool_version", tool_version},
                       {"timestamp", timestamp}};
    return j;
}

ResultBundle run_experiment(const ExperimentConfig& config, const StageSelection& select,
                            bool write_files) {
    ResultBundle bundle;
    bundle.config_hash_hex = config_hash(config);
    bundle.seed = config.seed;
    bundle.tool_version = tool_version_string();
    bundle.timestamp = iso_timestamp();

    const auto& gen = config.cocycle;
    const auto& base = config.base;

    std::filesystem::path out_dir(config.output_dir);
    if (write_files) std::filesystem::create_directories(out_dir);

    const bool need_exponents =
        select.estimate || select.lyapnorm || select.periodic || select.corollary;

    if (need_exponents) {
        try {
            bundle.exponents = estimate_exponents(gen, base, config.measure, config.horizons.n,
                                                  config.horizons.replicas);
        } catch (const Error& e) {
            throw StageError("estimate", e.what());
        }
        bundle.stages.push_back("estimate");
        if (write_files && select.estimate) {
            std::string csv = "replica,n,a_n_over_n,a_tilde_n_over_n\n";
            for (int r = 0; r < config.horizons.replicas; ++r) {
                csv += std::to_string(r);
                csv += ',';
                csv += std::to_string(config.horizons.n);
                csv += ',';
                csv += fmt17(bundle.exponents.replica_upper[static_cast<std::size_t>(r)]);
                csv += ',';
                csv += fmt17(-bundle.exponents.replica_lower[static_cast<std::size_t>(r)]);
                csv += '\n';
            }
            write_text_file(out_dir / "exponents.csv", csv);
        }
    }

    bundle.norm_ctx = LyapunovNormContext{bundle.exponents.upper.value,
                                          bundle.exponents.lower.value,
                                          config.eps,
                                          config.horizons.truncation_N,
                                          config.lyap.tail_tol,
                                          config.lyap.ell,
                                          config.lyap.rho};

    if (select.lyapnorm) {
        try {
            MeasureSampler norm_sampler = config.measure;
            norm_sampler.seed = derive_seed(config.measure.seed, "norm_pts");
            const int points = config.lyap.check_points;
            bundle.contraction.resize(static_cast<std::size_t>(points));
            bundle.temperedness.resize(static_cast<std::size_t>(points));
            parallel_for_index(points, [&](std::int64_t i) {
                const BasePoint x = sample_point(norm_sampler, base, static_cast<std::uint64_t>(i));
                bundle.contraction[static_cast<std::size_t>(i)] =
                    check_contraction(bundle.norm_ctx, gen, base, x, config.lyap.contraction_steps,
                                      derive_seed(config.seed, "contraction") + static_cast<std::uint64_t>(i));
                bundle.temperedness[static_cast<std::size_t>(i)] = temperedness_diagnostic(
                    bundle.norm_ctx, gen, base, x, config.lyap.temperedness_N);
            });
            bundle.has_norm_checks = true;
        } catch (const Error& e) {
            throw StageError("lyapnorm", e.what());
        }
        bundle.stages.push_back("lyapnorm");
        if (write_files) {
            json j = json::array();
            for (std::size_t i = 0; i < bundle.contraction.size(); ++i)
                j.push_back({{"point", i},
                             {"contraction", contraction_to_json(bundle.contraction[i])},
                             {"temperedness", temperedness_to_json(bundle.temperedness[i])}});
            write_text_file(out_dir / "norm_checks.json", j.dump(2) + "\n");
            // per-time M values for plotting
            std::string csv = "point,n,M_eps,M_eps_prime\n";
            for (std::size_t i = 0; i < bundle.temperedness.size(); ++i) {
                const auto& t = bundle.temperedness[i];
                for (std::int64_t n = -t.N; n <= t.N; ++n) {
                    const auto idx = static_cast<std::size_t>(n + t.N);
                    csv += std::to_string(i);
                    csv += ',';
                    csv += std::to_string(n);
                    csv += ',';
                    csv += fmt17(t.M_eps_values[idx]);
                    csv += ',';
                    csv += fmt17(t.M_eps_prime_values[idx]);
                    csv += '\n';
                }
            }
            write_text_file(out_dir / "norm_checks.csv", csv);
        }
    }

    if (select.periodic) {
        try {
            ConstructiveOptions copts;
            copts.orbit_N = config.constructive.orbit_N;
            copts.L = config.constructive.L;
            copts.delta = config.constructive.delta;
            if (config.mode == TheoremMode::constructive)
                copts.closing = calibrate_closing(base, 32, derive_seed(config.seed, "calib"));
            bundle.theorem = verify_main_theorem(gen, base, config.measure, bundle.exponents,
                                                 config.eps, config.horizons.k_max,
                                                 config.horizons.N_min, config.mode, copts);
            bundle.has_theorem = true;
        } catch (const Error& e) {
            throw StageError("periodic", e.what());
        }
        bundle.stages.push_back("periodic");
        if (write_files) {
            std::string csv = "k,canonical_word_or_coords,upper_rate,lower_rate,upper_exponent,"
                              "lower_exponent,ln_Q\n";
            for (const auto& row : bundle.theorem.table) {
                csv += std::to_string(row.k);
                csv += ',';
                csv += csv_quote(row.label);
                csv += ',';
                csv += fmt17(row.score.upper_rate);
                csv += ',';
                csv += fmt17(row.score.lower_rate);
                csv += ',';
                csv += fmt17(row.score.upper_exponent);
                csv += ',';
                csv += fmt17(row.score.lower_exponent);
                csv += ',';
                csv += fmt17(row.score.ln_q);
                csv += '\n';
            }
            write_text_file(out_dir / "periodic_scores.csv", csv);
        }
    }

    if (select.corollary) {
        try {
            bundle.corollary =
                corollary_norm_rates(gen, base, config.horizons.depth, config.horizons.k_max,
                                     10000, derive_seed(config.seed, "corollary"));
            bundle.has_corollary = true;
        } catch (const Error& e) {
            throw StageError("corollary", e.what());
        }
        bundle.stages.push_back("corollary");
    }

    const bool jsr_applicable =
        gen.is_constant() ||
        (gen.is_locally_constant() && std::get<LocallyConstantGen>(gen.kind).memory == 0);
    if (select.jsr && jsr_applicable) {
        try {
            std::vector<Operator> ops;
            if (gen.is_constant()) {
                ops.push_back(std::get<ConstantGen>(gen.kind).a);
            } else {
                for (const auto& [word, pr] : std::get<LocallyConstantGen>(gen.kind).table)
                    ops.push_back(pr.first);
            }
            bundle.jsr_exhaustive = exhaustive_bounds(
                ops, std::min(config.horizons.depth,
                              static_cast<int>(20.0 / std::log2(static_cast<double>(ops.size()) + 1))),
                gen.norm);
            bundle.jsr_bb = branch_and_bound(ops, config.jsr.target_gap, config.jsr.max_depth, gen.norm);
            bundle.has_jsr = true;
        } catch (const Error& e) {
            throw StageError("jsr", e.what());
        }
        bundle.stages.push_back("jsr");
        if (write_files) {
            json j = {{"exhaustive", bounds_to_json(bundle.jsr_exhaustive)},
                      {"branch_and_bound", bounds_to_json(bundle.jsr_bb)}};
            write_text_file(out_dir / "jsr.json", j.dump(2) + "\n");
        }
    }

    if (write_files) write_text_file(out_dir / "bundle.json", bundle.to_json().dump(2) + "\n");
    return bundle;
}

} // namespace coclab
