#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coclab/harness.hpp"

using namespace coclab;

namespace {

const char* kMiniConfig = R"JSON({
  "base": {"kind": "full_shift", "alphabet_size": 2},
  "cocycle": {
    "kind": "locally_constant",
    "memory": 0,
    "table": {"0": [[2.0, 0.0], [0.0, 0.5]], "1": [[0.5, 0.0], [0.0, 2.0]]},
    "holder_alpha": 1.0,
    "holder_M": 4.0
  },
  "measure": {"kind": "bernoulli", "probabilities": [0.5, 0.5]},
  "eps": 0.1,
  "horizons": {"n": 2000, "replicas": 4, "k_max": 6, "N_min": 1, "truncation_N": 50, "depth": 6},
  "lyap": {"tail_tol": 0.001, "check_points": 2, "contraction_steps": 2, "temperedness_N": 30},
  "seed": 777,
  "output_dir": "harness_test_out"
})JSON";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig mini_config(const std::string& out_dir) {
    ExperimentConfig c = parse_config(nlohmann::json::parse(kMiniConfig));
    c.output_dir = out_dir;
    return c;
}

} // namespace

TEST_CASE("config round-trips through serialization bit-exactly") {
    const auto j1 = nlohmann::json::parse(kMiniConfig);
    const ExperimentConfig c1 = parse_config(j1);
    const std::string dump1 = config_to_json(c1).dump(2);
    const ExperimentConfig c2 = parse_config(nlohmann::json::parse(dump1));
    const std::string dump2 = config_to_json(c2).dump(2);
    CHECK(dump1 == dump2);
    CHECK(config_hash(c1) == config_hash(c2));
}

TEST_CASE("torus_smooth configs parse, validate, and round-trip") {
    const char* text = R"JSON({
      "base": {"kind": "torus", "matrix": [[2, 1], [1, 1]]},
      "cocycle": {
        "kind": "torus_smooth",
        "base_matrix": [[1.2, 0.1], [0.0, 0.9]],
        "eta": 0.15,
        "frequencies": [1, 2],
        "holder_alpha": 1.0,
        "holder_M": 40.0
      },
      "measure": {"kind": "lebesgue_torus"},
      "eps": 0.2,
      "horizons": {"n": 500, "replicas": 2, "k_max": 4, "N_min": 0, "truncation_N": 40, "depth": 4},
      "seed": 5150,
      "output_dir": "harness_test_out/smooth"
    })JSON";
    const ExperimentConfig c = parse_config(nlohmann::json::parse(text));
    CHECK(c.cocycle.is_torus_smooth());
    const std::string dump1 = config_to_json(c).dump(2);
    const std::string dump2 = config_to_json(parse_config(nlohmann::json::parse(dump1))).dump(2);
    CHECK(dump1 == dump2);
    // frequency length must match the torus dimension
    auto bad = nlohmann::json::parse(text);
    bad["cocycle"]["frequencies"] = {1, 2, 3};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    // a short estimate runs end to end
    const ExponentPair est = estimate_exponents(c.cocycle, c.base, c.measure, 500, 2);
    CHECK(std::isfinite(est.upper.value));
    CHECK(est.lower.value <= est.upper.value + 1e-12);
}

TEST_CASE("config validation rejects malformed input before any compute") {
    auto j = nlohmann::json::parse(kMiniConfig);
    j["eps"] = -1.0;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = nlohmann::json::parse(kMiniConfig);
    j["cocycle"]["table"]["0"] = nlohmann::json::array({{1.0, 2.0}, {3.0}});
    CHECK_THROWS_AS(parse_config(j), Error);
    j = nlohmann::json::parse(kMiniConfig);
    j["horizons"]["replicas"] = 0;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = nlohmann::json::parse(kMiniConfig);
    j["measure"]["probabilities"] = {0.9, 0.2};
    CHECK_THROWS_AS(parse_config(j), IncompatibleSampler);
}

TEST_CASE("full pipeline produces a sane bundle and all artifacts") {
    const std::string out = "harness_test_out/full";
    std::filesystem::remove_all(out);
    const ExperimentConfig c = mini_config(out);
    const ResultBundle bundle = run_experiment(c);
    CHECK(std::abs(bundle.exponents.upper.value) < 0.2);
    CHECK(bundle.has_theorem);
    CHECK(bundle.theorem.success);
    CHECK(bundle.has_corollary);
    CHECK(bundle.has_jsr);
    CHECK(bundle.stages ==
          std::vector<std::string>{"estimate", "lyapnorm", "periodic", "corollary", "jsr"});
    for (const char* f :
         {"exponents.csv", "periodic_scores.csv", "norm_checks.json", "jsr.json", "bundle.json"})
        CHECK(std::filesystem::exists(std::filesystem::path(out) / f));
    const auto j = nlohmann::json::parse(slurp(std::filesystem::path(out) / "bundle.json"));
    CHECK(j.contains("provenance"));
    CHECK(j["provenance"]["config_hash"] == config_hash(c));
}

TEST_CASE("estimate stage alone never touches periodic enumeration") {
    const std::string out = "harness_test_out/estimate_only";
    std::filesystem::remove_all(out);
    const ExperimentConfig c = mini_config(out);
    const ResultBundle bundle = run_experiment(c, StageSelection::only_estimate());
    CHECK(bundle.stages == std::vector<std::string>{"estimate"});
    CHECK(!bundle.has_theorem);
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "exponents.csv"));
    CHECK(!std::filesystem::exists(std::filesystem::path(out) / "periodic_scores.csv"));
}

TEST_CASE("reruns are byte-identical across worker thread counts") {
    setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    const std::string out1 = "harness_test_out/threads1";
    const std::string out8 = "harness_test_out/threads8";
    std::filesystem::remove_all(out1);
    std::filesystem::remove_all(out8);
    setenv("COCYCLE_LAB_THREADS", "1", 1);
    run_experiment(mini_config(out1));
    setenv("COCYCLE_LAB_THREADS", "8", 1);
    run_experiment(mini_config(out8));
    unsetenv("COCYCLE_LAB_THREADS");
    unsetenv("SOURCE_DATE_EPOCH");
    for (const char* f : {"exponents.csv", "periodic_scores.csv", "norm_checks.json",
                          "norm_checks.csv", "jsr.json", "bundle.json"}) {
        INFO("file: " << f);
        CHECK(slurp(std::filesystem::path(out1) / f) == slurp(std::filesystem::path(out8) / f));
    }
}

TEST_CASE("golden fixture bundle reproduces the frozen values") {
    // frozen once from this tool at seed 20240817, n = 1e5, 32 replicas
    ExperimentConfig cfg = load_config_file(std::string(COCLAB_FIXTURE_DIR) + "/diag_pair.json");
    cfg.output_dir = "harness_test_out/golden";
    StageSelection sel;
    sel.estimate = true;
    sel.periodic = true;
    sel.jsr = true;
    const ResultBundle bundle = run_experiment(cfg, sel, false);
    CHECK(bundle.exponents.upper.value == doctest::Approx(0.0017302686494727645).epsilon(1e-9));
    CHECK(bundle.exponents.lower.value == doctest::Approx(-0.0017302686494727645).epsilon(1e-9));
    CHECK(bundle.exponents.upper.stderr_v ==
          doctest::Approx(0.00022507876993038282).epsilon(1e-6));
    CHECK(bundle.theorem.winner.k == 2);
    CHECK(bundle.theorem.winner.label == "0 1");
    CHECK(bundle.theorem.success);
    CHECK(bundle.jsr_bb.lower == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bundle.jsr_bb.upper == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("golden-mean SFT with a Markov measure runs the full pipeline") {
    const char* text = R"JSON({
      "base": {"kind": "sft", "alphabet_size": 2, "transition": [[1, 1], [1, 0]]},
      "cocycle": {
        "kind": "locally_constant",
        "memory": 0,
        "table": {"0": [[2.0, 0.0], [0.0, 0.5]], "1": [[0.5, 0.0], [0.0, 2.0]]},
        "holder_alpha": 1.0,
        "holder_M": 4.0
      },
      "measure": {"kind": "markov",
                  "transition_matrix": [[0.5, 0.5], [1.0, 0.0]],
                  "stationary": [0.6666666666666666, 0.3333333333333333]},
      "eps": 0.2,
      "horizons": {"n": 2000, "replicas": 4, "k_max": 6, "N_min": 0, "truncation_N": 40, "depth": 6},
      "lyap": {"tail_tol": 0.001, "check_points": 2, "contraction_steps": 2, "temperedness_N": 25},
      "seed": 31,
      "output_dir": "harness_test_out/markov"
    })JSON";
    const ExperimentConfig cfg = parse_config(nlohmann::json::parse(text));
    const ResultBundle bundle = run_experiment(cfg, StageSelection::all(), false);
    // symbol 0 carries stationary weight 2/3, so the walk drifts upward
    CHECK(bundle.exponents.upper.value > 0.05);
    CHECK(bundle.exponents.lower.value < bundle.exponents.upper.value + 1e-12);
    CHECK(bundle.has_theorem);
    CHECK(!bundle.theorem.table.empty());
    for (const auto& row : bundle.theorem.table) {
        // no enumerated word may contain the forbidden 11 factor
        CHECK(row.label.find("1 1") == std::string::npos);
        CHECK(!(row.label.front() == '1' && row.label.back() == '1'));
    }
    CHECK(bundle.has_corollary);
    CHECK(bundle.has_jsr);
}

TEST_CASE("torus_smooth runs the pipeline without the JSR stage") {
    const char* text = R"JSON({
      "base": {"kind": "torus", "matrix": [[2, 1], [1, 1]]},
      "cocycle": {
        "kind": "torus_smooth",
        "base_matrix": [[2.0, 1.0], [1.0, 1.0]],
        "eta": 0.05,
        "frequencies": [1, 1],
        "holder_alpha": 1.0,
        "holder_M": 60.0
      },
      "measure": {"kind": "lebesgue_torus"},
      "eps": 0.2,
      "horizons": {"n": 300, "replicas": 2, "k_max": 3, "N_min": 0, "truncation_N": 30, "depth": 3},
      "lyap": {"tail_tol": 0.001, "check_points": 1, "contraction_steps": 1, "temperedness_N": 15},
      "seed": 88,
      "output_dir": "harness_test_out/smooth_run"
    })JSON";
    const ExperimentConfig cfg = parse_config(nlohmann::json::parse(text));
    const ResultBundle bundle = run_experiment(cfg, StageSelection::all(), false);
    CHECK(bundle.stages ==
          std::vector<std::string>{"estimate", "lyapnorm", "periodic", "corollary"});
    // a small perturbation of the cat matrix keeps the top exponent nearby
    CHECK(std::abs(bundle.exponents.upper.value - 0.9624) < 0.2);
    CHECK(bundle.has_theorem);
    CHECK(!bundle.has_jsr);
}

TEST_CASE("constructive mode runs through the config layer") {
    const char* text = R"JSON({
      "base": {"kind": "full_shift", "alphabet_size": 2},
      "cocycle": {
        "kind": "locally_constant",
        "memory": 0,
        "table": {"0": [[2.0, 0.0], [0.0, 0.5]], "1": [[0.5, 0.0], [0.0, 2.0]]},
        "holder_alpha": 1.0,
        "holder_M": 4.0
      },
      "measure": {"kind": "bernoulli", "probabilities": [0.5, 0.5]},
      "eps": 0.25,
      "mode": "constructive",
      "constructive": {"orbit_N": 600, "L": 8, "delta": 0.2},
      "horizons": {"n": 4000, "replicas": 4, "k_max": 1048576, "N_min": 1, "truncation_N": 40, "depth": 4},
      "lyap": {"tail_tol": 0.001, "check_points": 1, "contraction_steps": 1, "temperedness_N": 15},
      "seed": 23,
      "output_dir": "harness_test_out/constructive"
    })JSON";
    const ExperimentConfig cfg = parse_config(nlohmann::json::parse(text));
    StageSelection sel;
    sel.estimate = true;
    sel.periodic = true;
    const ResultBundle bundle = run_experiment(cfg, sel, false);
    CHECK(bundle.has_theorem);
    CHECK(bundle.theorem.mode == TheoremMode::constructive);
    CHECK(!bundle.theorem.trace.empty());
    CHECK(!bundle.theorem.table.empty());
}

TEST_CASE("pipeline failures name the stage") {
    ExperimentConfig c = mini_config("harness_test_out/fail");
    c.horizons.k_max = 2;
    c.horizons.N_min = 2; // empty periodic range
    try {
        run_experiment(c, StageSelection::all(), false);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "periodic");
    }
}
