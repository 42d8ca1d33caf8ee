#include <gtest/gtest.h>

#include "stosc/config.hpp"

using namespace stosc;
using nlohmann::json;

namespace {

json linear_doc() {
    return json::parse(R"({
        "model": {"type": "linear", "lambda": [[2, 0.5], [0.5, 1]], "pi": [[1, 0], [0, 1]],
                  "x0": [1, 0], "y0": [0, 0]},
        "scheme": "exact", "step": 0.1, "steps": 50, "seed": 3, "paths": 2
    })");
}

}  // namespace

TEST(Config, ParsesLinearDefaults) {
    const ExperimentConfig cfg = parse_config(linear_doc());
    EXPECT_TRUE(cfg.model.is_linear());
    EXPECT_EQ(cfg.model.dim(), 2);
    EXPECT_EQ(cfg.scheme, Scheme::exact);
    EXPECT_EQ(cfg.steps, 50u);
    EXPECT_EQ(cfg.seed, 3u);
    EXPECT_EQ(cfg.paths, 2u);
    EXPECT_EQ(cfg.epsilon, 0.2);
    EXPECT_EQ(cfg.pass_threshold, 0.9);
    EXPECT_EQ(cfg.checkpoints.kind, CheckpointSchedule::Kind::geometric);
    EXPECT_EQ(cfg.model.linear->x0()(0), 1.0);
}

TEST(Config, RejectsUnknownKeysEverywhere) {
    json doc = linear_doc();
    doc["colour"] = "blue";
    EXPECT_THROW((void)parse_config(doc), ConfigError);
    doc = linear_doc();
    doc["model"]["mass"] = 1;
    EXPECT_THROW((void)parse_config(doc), ConfigError);
    doc = linear_doc();
    doc["convergence"] = {{"paths", 3}};
    EXPECT_THROW((void)parse_config(doc), ConfigError);
}

TEST(Config, ExactRequiresLinearModel) {
    const json doc = json::parse(R"({
        "model": {"type": "pendulum-pair", "alpha": 1, "beta": 0.1, "sigma1": 0.5, "sigma2": 0.5},
        "scheme": "exact", "step": 0.001, "steps": 10
    })");
    try {
        (void)parse_config(doc);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("requires a linear model"), std::string::npos);
    }
}

TEST(Config, PendulumWithEulerParses) {
    const json doc = json::parse(R"({
        "model": {"type": "pendulum-pair", "alpha": 1, "beta": 0.1, "sigma1": 0.5, "sigma2": 0.5},
        "scheme": "em", "step": 0.001, "horizon": 200
    })");
    const ExperimentConfig cfg = parse_config(doc);
    EXPECT_EQ(cfg.steps, 200000u);
    EXPECT_EQ(cfg.model.nonlinear_spec().growth_constant, 1.2);
}

TEST(Config, HorizonRoundsUpToCover) {
    json doc = linear_doc();
    doc.erase("steps");
    doc["step"] = 0.01;
    doc["horizon"] = 12.566370614359172;
    EXPECT_EQ(parse_config(doc).steps, 1257u);
    doc["steps"] = 10;
    EXPECT_THROW((void)parse_config(doc), ConfigError);
}

TEST(Config, ValueValidation) {
    for (const auto& [key, value] : std::vector<std::pair<std::string, json>>{
             {"step", 0.0}, {"step", "fast"}, {"paths", 0}, {"epsilon", 1.0}, {"scheme", "rk4"},
             {"pass_threshold", 1.5}, {"seed", -1}, {"deltas", json::array({0.1, -0.1})},
             {"checkpoints", "some"}, {"checkpoints", {{"geometric", 1.0}}}}) {
        json doc = linear_doc();
        doc[key] = value;
        EXPECT_THROW((void)parse_config(doc), ConfigError) << key;
    }
    json doc = linear_doc();
    doc["model"]["lambda"] = json::parse("[[1, 2], [0, 1]]");
    EXPECT_THROW((void)parse_config(doc), ConfigError);
    doc = linear_doc();
    doc["model"]["lambda"] = json::parse("[[1, 1], [1, 1]]");
    EXPECT_THROW((void)parse_config(doc), ConfigError);
    doc = linear_doc();
    doc["model"]["pi"] = json::parse("[[1, 0], [0]]");
    EXPECT_THROW((void)parse_config(doc), ConfigError);
}

TEST(Config, QOnlyWithLL) {
    json doc = linear_doc();
    doc["q"] = json::parse("[[0], [0], [1], [1]]");
    EXPECT_THROW((void)parse_config(doc), ConfigError);
    doc["scheme"] = "ll";
    EXPECT_EQ(parse_config(doc).q->rows(), 4);
    doc["q"] = json::parse("[[0], [1]]");
    EXPECT_THROW((void)parse_config(doc), ConfigError);
}

TEST(Config, CustomDriftGrowthIsEnforced) {
    json doc = json::parse(R"({
        "model": {"type": "custom-drift", "family": "affine", "kx": [[1]], "pi": [[0.5]],
                  "growth_constant": 1.0},
        "scheme": "em", "step": 0.01, "steps": 10
    })");
    EXPECT_NO_THROW((void)parse_config(doc));
    doc["model"]["kx"] = json::parse("[[3]]");
    EXPECT_THROW((void)parse_config(doc), ConfigError);
    doc["model"] = json::parse(R"({"type": "custom-drift", "family": "sine", "k": [[1, 0.2], [0.2, 1]],
                                   "pi": [[1, 0], [0, 1]], "growth_constant": 1.2})");
    const ExperimentConfig cfg = parse_config(doc);
    EXPECT_EQ(cfg.model.dim(), 2);
    doc["model"]["family"] = "cubic";
    EXPECT_THROW((void)parse_config(doc), ConfigError);
}

TEST(Config, CheckpointSchedules) {
    json doc = linear_doc();
    doc["checkpoints"] = "all";
    EXPECT_EQ(parse_config(doc).checkpoints.resolve(5).size(), 6u);
    doc["checkpoints"] = json::array({1, 7, 100});
    EXPECT_EQ(parse_config(doc).checkpoints.resolve(50), (std::vector<std::size_t>{1, 7}));
    doc["checkpoints"] = {{"geometric", 2.0}};
    EXPECT_EQ(parse_config(doc).checkpoints.resolve(10), (std::vector<std::size_t>{1, 2, 4, 8, 10}));
}

TEST(Config, CanonicalFormRoundTrips) {
    for (const char* text : {
             R"({"model": {"type": "linear", "lambda": [[2, 0.5], [0.5, 1]], "pi": [[1], [0.3]]},
                 "scheme": "ll", "step": 0.1, "steps": 5, "q": [[0], [0], [1], [0.3]],
                 "checkpoints": [1, 2, 3]})",
             R"({"model": {"type": "pendulum-pair", "alpha": 1, "beta": 0.1, "sigma1": 0.5, "sigma2": 0.7,
                           "x0": [0.1, 0.2]},
                 "scheme": "em", "step": 0.001, "steps": 5, "checkpoints": "all", "threads": 3,
                 "output_dir": "x"})",
             R"({"model": {"type": "custom-drift", "family": "affine", "kx": [[0.5]], "ky": [[0.1]], "b": [0.2],
                           "pi": [[1]], "growth_constant": 1},
                 "scheme": "em", "step": 0.01, "steps": 5, "convergence": {"include_em": false}})"}) {
        const json once = to_json(parse_config(json::parse(text)));
        const json twice = to_json(parse_config(once));
        EXPECT_EQ(once.dump(), twice.dump());
        EXPECT_FALSE(once.contains("threads"));
        EXPECT_FALSE(once.contains("output_dir"));
    }
}

TEST(Config, LinearSpecReserializes) {
    const ExperimentConfig cfg = parse_config(linear_doc());
    const json model = to_json(*cfg.model.linear);
    const CoupledOscillatorSpec again = linear_spec_from_json(model);
    EXPECT_EQ(to_json(again).dump(), model.dump());
}

TEST(Config, LoadReportsMissingFileAndBadJson) {
    EXPECT_THROW((void)load_config("/nonexistent/config.json"), ConfigError);
}
