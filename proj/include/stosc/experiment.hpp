#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "stosc/config.hpp"
#include "stosc/trajectory.hpp"

namespace stosc {

inline constexpr std::string_view kToolName = "stosc";
inline constexpr std::string_view kToolVersion = "1.0.0";

// Bumped whenever a header or column meaning changes.
inline constexpr int kTrajectorySchema = 1;
inline constexpr int kLilSchema = 1;
inline constexpr int kConvergenceSchema = 1;
inline constexpr int kSignChangeSchema = 1;
inline constexpr int kManifestSchema = 1;

enum ExitCode : int { kExitOk = 0, kExitThreshold = 1, kExitConfig = 2, kExitInternal = 3 };

/// "%.17g"; round-trips every finite double. Non-finite values print as
/// "nan", "inf", "-inf".
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// "t,x1,..,xd,y1,..,yd" followed by one row per grid point.
[[nodiscard]] std::string trajectory_csv(const TrajectoryGrid& traj);

/// Path `path` of the experiment, drawn from stream (cfg.seed, path).
[[nodiscard]] TrajectoryGrid simulate_path(const ExperimentConfig& cfg, std::size_t path);

/// Collects output files and their digests; writes manifest.json last.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    [[nodiscard]] const nlohmann::json& inventory() const { return files_; }
    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    nlohmann::json files_ = nlohmann::json::array();
};

/// Manifest skeleton: tool, version, command, canonical config and its hash,
/// schema versions and per-path stream seeds.
[[nodiscard]] nlohmann::json base_manifest(const ExperimentConfig& cfg, std::string_view command);

// Each command writes into cfg.output_dir, logs a short summary to `log` and
// returns an exit code.
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify_lil(const ExperimentConfig& cfg, std::ostream& log);
int cmd_compare_integrators(const ExperimentConfig& cfg, std::ostream& log);
int cmd_sign_changes(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace stosc
