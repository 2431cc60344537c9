#include "coclab/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace coclab {

namespace {

using nlohmann::json;

std::vector<std::vector<double>> matrix_rows(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    const std::size_t n = j.size();
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != n)
            throw ConfigError(std::string(what) + " has ragged or non-square rows");
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw ConfigError(std::string(what) + " has a non-numeric entry");
            r.push_back(v.get<double>());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

Operator operator_from_json(const json& j, const char* what) {
    return Operator::from_rows(matrix_rows(j, what));
}

json operator_to_json(const Operator& a) {
    json rows = json::array();
    for (int i = 0; i < a.dim(); ++i) {
        json row = json::array();
        for (int k = 0; k < a.dim(); ++k) row.push_back(a.at(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<int> word_from_key(const std::string& key) {
    std::vector<int> word;
    if (key.find(',') != std::string::npos) {
        std::size_t pos = 0;
        while (pos < key.size()) {
            const std::size_t next = key.find(',', pos);
            const std::string tok = key.substr(pos, next == std::string::npos ? next : next - pos);
            word.push_back(std::stoi(tok));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        return word;
    }
    for (char c : key) {
        if (c < '0' || c > '9') throw ConfigError("table key must be digits or comma-separated integers");
        word.push_back(c - '0');
    }
    return word;
}

std::string key_from_word(const std::vector<int>& word) {
    bool digits_ok = true;
    for (int s : word)
        if (s < 0 || s > 9) digits_ok = false;
    std::string key;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (!digits_ok && i) key.push_back(',');
        key += std::to_string(word[i]);
    }
    return key;
}

BaseSystem base_from_json(const json& j) {
    if (!j.contains("kind")) throw ConfigError("base.kind is required");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "full_shift" || kind == "sft") {
        ShiftSpace s;
        s.alphabet_size = j.value("alphabet_size", 2);
        s.metric_base = j.value("metric_base", 2.718281828459045);
        s.horizon = j.value("horizon", 256);
        if (kind == "sft") {
            if (!j.contains("transition")) throw ConfigError("sft base requires a transition matrix");
            const auto rows = matrix_rows(j.at("transition"), "base.transition");
            if (static_cast<int>(rows.size()) != s.alphabet_size)
                throw ConfigError("transition matrix size does not match alphabet_size");
            for (const auto& row : rows)
                for (double v : row) {
                    if (v != 0.0 && v != 1.0) throw ConfigError("transition entries must be 0 or 1");
                    s.transition.push_back(static_cast<std::uint8_t>(v));
                }
        }
        s.validate();
        return s;
    }
    if (kind == "torus") {
        TorusMap t;
        if (!j.contains("matrix")) throw ConfigError("torus base requires an integer matrix");
        const auto rows = matrix_rows(j.at("matrix"), "base.matrix");
        t.dim = static_cast<int>(rows.size());
        for (const auto& row : rows)
            for (double v : row) {
                if (v != std::floor(v)) throw ConfigError("torus matrix entries must be integers");
                t.mat.push_back(static_cast<std::int64_t>(v));
            }
        t.validate();
        return t;
    }
    throw ConfigError("unknown base kind: " + kind);
}

json base_to_json(const BaseSystem& base) {
    json j;
    if (const auto* s = std::get_if<ShiftSpace>(&base)) {
        j["kind"] = s->is_full() ? "full_shift" : "sft";
        j["alphabet_size"] = s->alphabet_size;
        j["metric_base"] = s->metric_base;
        j["horizon"] = s->horizon;
        if (!s->is_full()) {
            json rows = json::array();
            for (int a = 0; a < s->alphabet_size; ++a) {
                json row = json::array();
                for (int b = 0; b < s->alphabet_size; ++b) row.push_back(s->allowed(a, b) ? 1 : 0);
                rows.push_back(std::move(row));
            }
            j["transition"] = std::move(rows);
        }
        return j;
    }
    const auto& t = std::get<TorusMap>(base);
    j["kind"] = "torus";
    json rows = json::array();
    for (int i = 0; i < t.dim; ++i) {
        json row = json::array();
        for (int k = 0; k < t.dim; ++k) row.push_back(t.at(i, k));
        rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    return j;
}

CocycleGenerator cocycle_from_json(const json& j) {
    if (!j.contains("kind")) throw ConfigError("cocycle.kind is required");
    const std::string kind = j.at("kind").get<std::string>();
    HolderData h;
    h.alpha = j.value("holder_alpha", 1.0);
    h.M = j.value("holder_M", 1.0);
    h.lambda_prime = j.value("lambda_prime", std::numeric_limits<double>::quiet_NaN());
    h.chi_prime = j.value("chi_prime", std::numeric_limits<double>::quiet_NaN());
    const NormKind norm = norm_kind_from_string(j.value("norm", std::string("l2")));
    if (kind == "constant") {
        if (!j.contains("matrix")) throw ConfigError("constant cocycle requires a matrix");
        return make_constant_generator(operator_from_json(j.at("matrix"), "cocycle.matrix"), h, norm);
    }
    if (kind == "locally_constant") {
        if (!j.contains("table")) throw ConfigError("locally_constant cocycle requires a table");
        const int memory = j.value("memory", 0);
        std::map<std::vector<int>, Operator> table;
        for (const auto& [key, value] : j.at("table").items())
            table.emplace(word_from_key(key), operator_from_json(value, "cocycle.table entry"));
        return make_locally_constant_generator(memory, std::move(table), h, norm);
    }
    if (kind == "torus_smooth") {
        if (!j.contains("base_matrix")) throw ConfigError("torus_smooth cocycle requires base_matrix");
        const double eta = j.value("eta", 0.0);
        std::vector<std::int64_t> freq;
        if (j.contains("frequencies"))
            for (const auto& v : j.at("frequencies")) freq.push_back(v.get<std::int64_t>());
        return make_torus_smooth_generator(operator_from_json(j.at("base_matrix"), "cocycle.base_matrix"),
                                           eta, std::move(freq), h, norm);
    }
    throw ConfigError("unknown cocycle kind: " + kind);
}

json cocycle_to_json(const CocycleGenerator& gen) {
    json j;
    j["dim"] = gen.dim;
    j["holder_alpha"] = gen.holder.alpha;
    j["holder_M"] = gen.holder.M;
    j["lambda_prime"] = gen.holder.lambda_prime;
    j["chi_prime"] = gen.holder.chi_prime;
    j["norm"] = to_string(gen.norm);
    if (const auto* c = std::get_if<ConstantGen>(&gen.kind)) {
        j["kind"] = "constant";
        j["matrix"] = operator_to_json(c->a);
    } else if (const auto* lc = std::get_if<LocallyConstantGen>(&gen.kind)) {
        j["kind"] = "locally_constant";
        j["memory"] = lc->memory;
        json table;
        for (const auto& [word, pr] : lc->table) table[key_from_word(word)] = operator_to_json(pr.first);
        j["table"] = std::move(table);
    } else {
        const auto& g = std::get<TorusSmoothGen>(gen.kind);
        j["kind"] = "torus_smooth";
        j["base_matrix"] = operator_to_json(g.a0);
        j["eta"] = g.eta;
        j["frequencies"] = g.freq;
    }
    return j;
}

MeasureSampler measure_from_json(const json& j, std::uint64_t default_seed) {
    if (!j.contains("kind")) throw ConfigError("measure.kind is required");
    const std::string kind = j.at("kind").get<std::string>();
    MeasureSampler m;
    m.seed = j.value("seed", default_seed);
    if (kind == "bernoulli") {
        BernoulliMeasure b;
        if (!j.contains("probabilities")) throw ConfigError("bernoulli measure requires probabilities");
        for (const auto& v : j.at("probabilities")) b.probs.push_back(v.get<double>());
        m.kind = std::move(b);
        return m;
    }
    if (kind == "markov") {
        MarkovMeasure mk;
        if (!j.contains("transition_matrix") || !j.contains("stationary"))
            throw ConfigError("markov measure requires transition_matrix and stationary");
        for (const auto& row : matrix_rows(j.at("transition_matrix"), "measure.transition_matrix"))
            mk.rows.insert(mk.rows.end(), row.begin(), row.end());
        for (const auto& v : j.at("stationary")) mk.stationary.push_back(v.get<double>());
        m.kind = std::move(mk);
        return m;
    }
    if (kind == "lebesgue_torus") {
        m.kind = LebesgueTorusMeasure{};
        return m;
    }
    throw ConfigError("unknown measure kind: " + kind);
}

json measure_to_json(const MeasureSampler& m) {
    json j;
    j["seed"] = m.seed;
    if (const auto* b = std::get_if<BernoulliMeasure>(&m.kind)) {
        j["kind"] = "bernoulli";
        j["probabilities"] = b->probs;
    } else if (const auto* mk = std::get_if<MarkovMeasure>(&m.kind)) {
        j["kind"] = "markov";
        const auto a = static_cast<std::size_t>(mk->stationary.size());
        json rows = json::array();
        for (std::size_t i = 0; i < a; ++i) {
            json row = json::array();
            for (std::size_t k = 0; k < a; ++k) row.push_back(mk->rows[i * a + k]);
            rows.push_back(std::move(row));
        }
        j["transition_matrix"] = std::move(rows);
        j["stationary"] = mk->stationary;
    } else {
        j["kind"] = "lebesgue_torus";
    }
    return j;
}

} // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig c;
    if (!j.contains("base") || !j.contains("cocycle") || !j.contains("measure"))
        throw ConfigError("config requires base, cocycle, and measure sections");
    c.base = base_from_json(j.at("base"));
    c.cocycle = cocycle_from_json(j.at("cocycle"));
    c.seed = j.value("seed", std::uint64_t{0});
    c.measure = measure_from_json(j.at("measure"), c.seed);
    c.eps = j.value("eps", 0.1);
    if (!(c.eps > 0.0)) throw ConfigError("eps must be > 0");
    if (j.contains("horizons")) {
        const auto& h = j.at("horizons");
        c.horizons.n = h.value("n", c.horizons.n);
        c.horizons.replicas = h.value("replicas", c.horizons.replicas);
        c.horizons.k_max = h.value("k_max", c.horizons.k_max);
        c.horizons.N_min = h.value("N_min", c.horizons.N_min);
        c.horizons.truncation_N = h.value("truncation_N", c.horizons.truncation_N);
        c.horizons.depth = h.value("depth", c.horizons.depth);
    }
    if (c.horizons.n < 1 || c.horizons.replicas < 1 || c.horizons.k_max < 1 ||
        c.horizons.N_min < 0 || c.horizons.truncation_N < 1 || c.horizons.depth < 1)
        throw ConfigError("horizons must be positive");
    if (j.contains("lyap")) {
        const auto& l = j.at("lyap");
        c.lyap.tail_tol = l.value("tail_tol", c.lyap.tail_tol);
        c.lyap.ell = l.value("ell", c.lyap.ell);
        c.lyap.rho = l.value("rho", c.lyap.rho);
        c.lyap.check_points = l.value("check_points", c.lyap.check_points);
        c.lyap.contraction_steps = l.value("contraction_steps", c.lyap.contraction_steps);
        c.lyap.temperedness_N = l.value("temperedness_N", c.lyap.temperedness_N);
    }
    if (!(c.lyap.tail_tol > 0.0) || !(c.lyap.ell > 1.0) || !(c.lyap.rho > 0.0))
        throw ConfigError("lyap settings must be positive (ell > 1)");
    if (j.contains("jsr")) {
        const auto& s = j.at("jsr");
        c.jsr.target_gap = s.value("target_gap", c.jsr.target_gap);
        c.jsr.max_depth = s.value("max_depth", c.jsr.max_depth);
    }
    if (j.contains("constructive")) {
        const auto& s = j.at("constructive");
        c.constructive.orbit_N = s.value("orbit_N", c.constructive.orbit_N);
        c.constructive.L = s.value("L", c.constructive.L);
        c.constructive.delta = s.value("delta", c.constructive.delta);
    }
    const std::string mode = j.value("mode", std::string("exhaustive"));
    if (mode == "exhaustive")
        c.mode = TheoremMode::exhaustive;
    else if (mode == "constructive")
        c.mode = TheoremMode::constructive;
    else
        throw ConfigError("mode must be exhaustive or constructive");
    c.output_dir = j.value("output_dir", std::string("out"));
    validate_generator(c.cocycle, c.base);
    c.measure.validate(c.base);
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["base"] = base_to_json(c.base);
    j["cocycle"] = cocycle_to_json(c.cocycle);
    j["measure"] = measure_to_json(c.measure);
    j["eps"] = c.eps;
    j["horizons"] = {{"n", c.horizons.n},         {"replicas", c.horizons.replicas},
                     {"k_max", c.horizons.k_max}, {"N_min", c.horizons.N_min},
                     {"truncation_N", c.horizons.truncation_N}, {"depth", c.horizons.depth}};
    j["lyap"] = {{"tail_tol", c.lyap.tail_tol},
                 {"ell", c.lyap.ell},
                 {"rho", c.lyap.rho},
                 {"check_points", c.lyap.check_points},
                 {"contraction_steps", c.lyap.contraction_steps},
                 {"temperedness_N", c.lyap.temperedness_N}};
    j["jsr"] = {{"target_gap", c.jsr.target_gap}, {"max_depth", c.jsr.max_depth}};
    j["constructive"] = {{"orbit_N", c.constructive.orbit_N},
                         {"L", c.constructive.L},
                         {"delta", c.constructive.delta}};
    j["mode"] = c.mode == TheoremMode::exhaustive ? "exhaustive" : "constructive";
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    // output_dir does not affect the computation, so it does not affect the hash
    nlohmann::json j = config_to_json(config);
    j.erase("output_dir");
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace coclab
