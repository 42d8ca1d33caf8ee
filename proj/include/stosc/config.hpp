#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "stosc/errors.hpp"
#include "stosc/models.hpp"
#include "stosc/trajectory.hpp"

namespace stosc {

/// Schema violation in an experiment config. Maps to exit code 2.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class ModelKind { linear, pendulum_pair, custom_drift };

/// Built-in drift families for "custom-drift" models:
///   affine: f(x, y) = Kx x + Ky y + b
///   sine:   f(x, y) = K sin(x)   (sin applied entrywise)
struct CustomDriftConfig {
    std::string family;  // "affine" | "sine"
    Mat kx;
    Mat ky;
    Vec offset;
    Mat k;
    Mat pi;
    double growth_constant = 1.0;
    Vec x0;
    Vec y0;
    double t0 = 0.0;
};

struct ModelConfig {
    ModelKind kind = ModelKind::linear;
    std::optional<CoupledOscillatorSpec> linear;
    std::optional<PendulumPairSpec> pendulum;
    std::optional<CustomDriftConfig> custom;

    [[nodiscard]] bool is_linear() const { return kind == ModelKind::linear; }
    [[nodiscard]] Eigen::Index dim() const;
    /// Nonlinear models only.
    [[nodiscard]] NonlinearDriftSpec nonlinear_spec() const;
};

struct CheckpointSchedule {
    enum class Kind { all, geometric, list } kind = Kind::geometric;
    double ratio = 1.2;
    std::vector<std::size_t> indices;

    /// Checkpoints for a series of steps + 1 samples (index 0..steps).
    [[nodiscard]] std::vector<std::size_t> resolve(std::size_t steps) const;
};

struct ConvergenceConfig {
    std::vector<double> steps{0.1, 0.05, 0.025};
    double horizon = 1.0;
    int refine_power = 6;
    bool include_em = true;
};

/// One experiment. Every output is a function of this value alone; `threads`
/// and `output_dir` affect where and how fast, never what.
struct ExperimentConfig {
    ModelConfig model;
    Scheme scheme = Scheme::exact;
    double step = 0.01;
    std::size_t steps = 100;
    std::uint64_t seed = 0;
    std::size_t paths = 1;
    CheckpointSchedule checkpoints;
    double epsilon = 0.2;
    std::vector<double> deltas{1.0, 0.5, 0.25, 0.1, 0.05, 0.025, 0.01};
    double pass_threshold = 0.9;
    std::optional<Mat> q;  // LL noise matrix override
    ConvergenceConfig convergence;
    std::string output_dir = "out";
    unsigned threads = 1;
};

/// Parses and validates. Unknown keys anywhere in the document are rejected;
/// `scheme: exact` requires a linear model; custom drifts must pass the
/// sampled growth check. Throws ConfigError with a diagnostic naming the key.
[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Canonical JSON (sorted keys, output location and thread count omitted).
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& cfg);
[[nodiscard]] nlohmann::json to_json(const CoupledOscillatorSpec& spec);
[[nodiscard]] CoupledOscillatorSpec linear_spec_from_json(const nlohmann::json& model);

}  // namespace stosc
