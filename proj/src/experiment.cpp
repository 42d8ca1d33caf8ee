#include "stosc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <openssl/evp.h>

#include "stosc/analysis.hpp"
#include "stosc/errors.hpp"
#include "stosc/exact.hpp"
#include "stosc/integrators.hpp"
#include "stosc/parallel.hpp"
#include "stosc/rng.hpp"

namespace stosc {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericError("sha256: digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(kHex[digest[k] >> 4]);
        out.push_back(kHex[digest[k] & 0xf]);
    }
    return out;
}

std::string trajectory_csv(const TrajectoryGrid& traj) {
    const Eigen::Index d = traj.dim();
    std::string out = "t";
    for (Eigen::Index i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
    for (Eigen::Index i = 1; i <= d; ++i) out += ",y" + std::to_string(i);
    out += '\n';
    for (Eigen::Index n = 0; n < traj.states.rows(); ++n) {
        out += format_double(traj.times(n));
        for (Eigen::Index c = 0; c < traj.states.cols(); ++c) {
            out += ',';
            out += format_double(traj.states(n, c));
        }
        out += '\n';
    }
    return out;
}

TrajectoryGrid simulate_path(const ExperimentConfig& cfg, std::size_t path) {
    RngStream rng(cfg.seed, path);
    switch (cfg.scheme) {
        case Scheme::exact: return sample_exact_path(*cfg.model.linear, cfg.step, cfg.steps, rng);
        case Scheme::ll: return ll_integrate(*cfg.model.linear, cfg.step, cfg.steps, rng, cfg.q);
        case Scheme::em:
            if (cfg.model.is_linear()) return em_integrate(*cfg.model.linear, cfg.step, cfg.steps, rng);
            return em_integrate(cfg.model.nonlinear_spec(), cfg.step, cfg.steps, rng);
    }
    throw PreconditionError("simulate_path: unknown scheme");
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void OutputSet::write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
    if (name != "manifest.json") {
        files_.push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }
}

json base_manifest(const ExperimentConfig& cfg, std::string_view command) {
    const json canonical = to_json(cfg);
    json paths = json::array();
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        const RngStream rng(cfg.seed, p);
        paths.push_back({{"path", p}, {"stream_id", rng.stream_id()}, {"engine_seed", rng.engine_seed()}});
    }
    return json{{"manifest_schema", kManifestSchema},
                {"tool", kToolName},
                {"version", kToolVersion},
                {"command", command},
                {"config", canonical},
                {"config_sha256", sha256_hex(canonical.dump())},
                {"root_seed", cfg.seed},
                {"paths", std::move(paths)}};
}

namespace {

void finish(OutputSet& out, json manifest) {
    manifest["files"] = out.inventory();
    out.write("manifest.json", manifest.dump(2) + "\n");
}

std::string path_file_name(std::size_t path) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "path_%05zu.csv", path);
    return buf;
}

template <class T>
std::string opt_field(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>) {
        return format_double(*v);
    } else {
        return std::to_string(*v);
    }
}

const CoupledOscillatorSpec& require_linear(const ExperimentConfig& cfg, const char* command) {
    if (!cfg.model.is_linear()) {
        throw ConfigError(std::string(command) + ": requires a linear model");
    }
    return *cfg.model.linear;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    std::vector<std::string> csv(cfg.paths);
    std::vector<std::optional<std::size_t>> diverged(cfg.paths);
    std::optional<bool> below_threshold;
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t p) {
        const TrajectoryGrid traj = simulate_path(cfg, p);
        csv[p] = trajectory_csv(traj);
        diverged[p] = traj.diverged_at;
        if (p == 0) below_threshold = traj.below_threshold;
    });

    OutputSet out(cfg.output_dir);
    for (std::size_t p = 0; p < cfg.paths; ++p) out.write(path_file_name(p), csv[p]);

    json manifest = base_manifest(cfg, "simulate");
    manifest["schemas"] = {{"trajectory", kTrajectorySchema}};
    if (below_threshold) manifest["ll_below_threshold"] = *below_threshold;
    json div = json::array();
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        if (diverged[p]) div.push_back({{"path", p}, {"step", *diverged[p]}});
    }
    if (!div.empty()) manifest["diverged"] = div;
    finish(out, std::move(manifest));

    log << "simulate: wrote " << cfg.paths << " path(s) to " << out.dir().string() << "\n";
    if (below_threshold && !*below_threshold) {
        log << "warning: LL stepsize is not below pi/max|lambda|; oscillation is not guaranteed\n";
    }
    return kExitOk;
}

int cmd_verify_lil(const ExperimentConfig& cfg, std::ostream& log) {
    const CoupledOscillatorSpec& spec = require_linear(cfg, "verify-lil");
    if (cfg.scheme == Scheme::em) {
        throw ConfigError("verify-lil: scheme \"em\" is unsupported (no closed-form s_n^2)");
    }
    const Eigen::Index d = spec.dim();
    std::vector<std::vector<double>> variance(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        variance[static_cast<std::size_t>(i)] =
            cfg.scheme == Scheme::exact
                ? exact_noise_variance(spec, cfg.step, i, cfg.steps)
                : ll_noise_variance(ll_coefficients(spec, i, cfg.q), cfg.step, cfg.steps);
    }
    const std::vector<std::size_t> checkpoints = cfg.checkpoints.resolve(cfg.steps);
    const bool all_indices = cfg.checkpoints.kind == CheckpointSchedule::Kind::all;

    std::vector<std::vector<LILReport>> reports(cfg.paths);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t p) {
        const TrajectoryGrid traj = simulate_path(cfg, p);
        for (Eigen::Index i = 0; i < d; ++i) {
            const std::vector<double> s = noise_part(traj, spec, i);
            LILReport rep = lil_envelope(s, variance[static_cast<std::size_t>(i)], cfg.epsilon, checkpoints);
            if (all_indices) {
                // Keep only the summary for dense schedules.
                rep.checkpoints.clear();
                rep.s.clear();
                rep.s2.clear();
                rep.z.clear();
                const auto hi = rep.running_max.empty() ? std::nullopt : rep.running_max.back();
                const auto lo = rep.running_min.empty() ? std::nullopt : rep.running_min.back();
                rep.running_max.assign(1, hi);
                rep.running_min.assign(1, lo);
            }
            reports[p].push_back(std::move(rep));
        }
    });

    std::string summary =
        "path,component,max_z,min_z,first_above,first_below,undefined_checkpoints,pass\n";
    std::string detail = "path,component,n,s,s2,z\n";
    std::vector<std::size_t> passed(static_cast<std::size_t>(d), 0);
    std::vector<std::size_t> all_undefined(static_cast<std::size_t>(d), 0);
    std::size_t passed_all = 0;
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        bool every = true;
        for (Eigen::Index i = 0; i < d; ++i) {
            const LILReport& r = reports[p][static_cast<std::size_t>(i)];
            const bool ok = r.two_sided_pass();
            every = every && ok;
            if (ok) ++passed[static_cast<std::size_t>(i)];
            if (!r.max_z()) ++all_undefined[static_cast<std::size_t>(i)];
            summary += std::to_string(p) + "," + std::to_string(i + 1) + "," + opt_field(r.max_z()) + "," +
                       opt_field(r.min_z()) + "," + opt_field(r.first_above) + "," +
                       opt_field(r.first_below) + "," + std::to_string(r.undefined) + "," +
                       (ok ? "1" : "0") + "\n";
            for (std::size_t k = 0; k < r.checkpoints.size(); ++k) {
                detail += std::to_string(p) + "," + std::to_string(i + 1) + "," +
                          std::to_string(r.checkpoints[k]) + "," + format_double(r.s[k]) + "," +
                          format_double(r.s2[k]) + "," + opt_field(r.z[k]) + "\n";
            }
        }
        if (every) ++passed_all;
    }

    const auto paths = static_cast<double>(cfg.paths);
    bool pass = true;
    std::string aggregate = "component,paths,passed,rate,threshold,pass,note\n";
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double rate = static_cast<double>(passed[k]) / paths;
        const bool ok = rate >= cfg.pass_threshold;
        pass = pass && ok;
        const std::string note = all_undefined[k] == cfg.paths ? "s_n^2 never exceeds e: Z undefined" : "";
        aggregate += std::to_string(i + 1) + "," + std::to_string(cfg.paths) + "," +
                     std::to_string(passed[k]) + "," + format_double(rate) + "," +
                     format_double(cfg.pass_threshold) + "," + (ok ? "1" : "0") + "," + note + "\n";
    }
    aggregate += "all," + std::to_string(cfg.paths) + "," + std::to_string(passed_all) + "," +
                 format_double(static_cast<double>(passed_all) / paths) + "," +
                 format_double(cfg.pass_threshold) + "," + (pass ? "1" : "0") + ",\n";

    OutputSet out(cfg.output_dir);
    out.write("lil_summary.csv", summary);
    out.write("lil_aggregate.csv", aggregate);
    if (!all_indices) out.write("lil_checkpoints.csv", detail);
    json manifest = base_manifest(cfg, "verify-lil");
    manifest["schemas"] = {{"lil", kLilSchema}};
    manifest["pass"] = pass;
    finish(out, std::move(manifest));

    for (Eigen::Index i = 0; i < d; ++i) {
        log << "verify-lil: component " << (i + 1) << " two-sided pass " << passed[static_cast<std::size_t>(i)]
            << "/" << cfg.paths << "\n";
    }
    log << "verify-lil: " << (pass ? "PASS" : "FAIL") << " (threshold " << cfg.pass_threshold << ")\n";
    return pass ? kExitOk : kExitThreshold;
}

int cmd_compare_integrators(const ExperimentConfig& cfg, std::ostream& log) {
    const CoupledOscillatorSpec& spec = require_linear(cfg, "compare-integrators");
    ConvergenceOptions opts;
    opts.steps = cfg.convergence.steps;
    opts.horizon = cfg.convergence.horizon;
    opts.paths = cfg.paths;
    opts.refine_power = cfg.convergence.refine_power;
    opts.root_seed = cfg.seed;
    opts.include_em = cfg.convergence.include_em;
    opts.threads = cfg.threads;
    ConvergenceStudy study;
    try {
        study = convergence_study(spec, opts);
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("compare-integrators: ") + e.what());
    }

    auto finite_or_empty = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    std::string csv = "row,scheme,h,strong_error,standard_error,observed_order\n";
    for (std::size_t k = 0; k < study.rows.size(); ++k) {
        const ConvergenceRow& r = study.rows[k];
        std::string local;
        if (k > 0 && study.rows[k - 1].scheme == r.scheme) {
            const ConvergenceRow& prev = study.rows[k - 1];
            local = finite_or_empty(std::log(r.strong_error / prev.strong_error) / std::log(r.h / prev.h));
        }
        csv += "point," + std::string(scheme_name(r.scheme)) + "," + format_double(r.h) + "," +
               format_double(r.strong_error) + "," + format_double(r.standard_error) + "," + local + "\n";
    }
    csv += "slope,ll,,,," + finite_or_empty(study.ll_order) + "\n";
    if (study.em_order) csv += "slope,em,,,," + finite_or_empty(*study.em_order) + "\n";

    OutputSet out(cfg.output_dir);
    out.write("convergence.csv", csv);
    json manifest = base_manifest(cfg, "compare-integrators");
    manifest["schemas"] = {{"convergence", kConvergenceSchema}};
    finish(out, std::move(manifest));

    log << "compare-integrators: LL order " << finite_or_empty(study.ll_order);
    if (study.em_order) log << ", EM order " << finite_or_empty(*study.em_order);
    log << "\n";
    return kExitOk;
}

int cmd_sign_changes(const ExperimentConfig& cfg, std::ostream& log) {
    const Eigen::Index d = cfg.model.dim();
    std::vector<std::size_t> horizons = cfg.checkpoints.resolve(cfg.steps);
    if (horizons.empty() || horizons.back() != cfg.steps) horizons.push_back(cfg.steps);

    std::vector<std::vector<SignChangeReport>> reports(cfg.paths);
    std::vector<std::optional<std::size_t>> diverged(cfg.paths);
    std::optional<bool> below_threshold;
    double t0 = 0.0;
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t p) {
        const TrajectoryGrid traj = simulate_path(cfg, p);
        for (Eigen::Index i = 0; i < d; ++i) reports[p].push_back(count_sign_changes(traj, i));
        diverged[p] = traj.diverged_at;
        if (p == 0) {
            below_threshold = traj.below_threshold;
            t0 = traj.times(0);
        }
    });

    std::string csv = "path,component,horizon_index,horizon_time,count\n";
    bool every_component_moves = true;
    std::vector<SignChangeReport> pooled;
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        for (const SignChangeReport& r : reports[p]) {
            for (const std::size_t n : horizons) {
                const auto count = static_cast<std::size_t>(
                    std::upper_bound(r.right_index.begin(), r.right_index.end(), n) - r.right_index.begin());
                csv += std::to_string(p) + "," + std::to_string(r.component + 1) + "," + std::to_string(n) +
                       "," + format_double(t0 + static_cast<double>(n) * cfg.step) + "," +
                       std::to_string(count) + "\n";
            }
            if (r.count == 0) every_component_moves = false;
            pooled.push_back(r);
        }
    }

    const SimpleZeroTable table = simple_zero_diagnostic(pooled, cfg.deltas);
    std::string zeros = "delta,below,total,fraction\n";
    for (const SimpleZeroRow& row : table.rows) {
        zeros += format_double(row.delta) + "," + std::to_string(row.below) + "," + std::to_string(row.total) +
                 "," + format_double(row.fraction) + "\n";
    }

    OutputSet out(cfg.output_dir);
    out.write("sign_changes.csv", csv);
    out.write("simple_zero.csv", zeros);
    json manifest = base_manifest(cfg, "sign-changes");
    manifest["schemas"] = {{"sign_changes", kSignChangeSchema}};
    manifest["simple_zero"] = {{"monotone", table.monotone}, {"nonvanishing", table.nonvanishing}};
    manifest["all_components_changed_sign"] = every_component_moves;
    if (below_threshold) manifest["ll_below_threshold"] = *below_threshold;
    json div = json::array();
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        if (diverged[p]) div.push_back({{"path", p}, {"step", *diverged[p]}});
    }
    if (!div.empty()) manifest["diverged"] = div;
    finish(out, std::move(manifest));

    log << "sign-changes: " << pooled.size() << " component path(s), "
        << (every_component_moves ? "every one changed sign" : "some never changed sign") << "\n";
    if (below_threshold && !*below_threshold) {
        log << "warning: LL stepsize is not below pi/max|lambda|; oscillation is not guaranteed\n";
    }
    return every_component_moves ? kExitOk : kExitThreshold;
}

}  // namespace stosc
