#include "stosc/config.hpp"

#include "stosc/analysis.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace stosc {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(where + ": expected a finite number");
    return out;
}

std::size_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(where + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

Vec vector_of(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        out(static_cast<Eigen::Index>(k)) = number(v[k], where + "[" + std::to_string(k) + "]");
    }
    return out;
}

// Row-major nested arrays.
Mat matrix_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) throw ConfigError(where + ": rows must be non-empty arrays");
    Mat out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
        if (!v[r].is_array() || v[r].size() != cols) {
            throw ConfigError(where + ": ragged matrix at row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                number(v[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    return out;
}

json json_of(const Vec& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

json json_of(const Mat& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

double optional_number(const json& obj, const std::string& key, double fallback,
                       const std::string& where) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

PendulumPairSpec pendulum_from_json(const json& m) {
    const std::string where = "model";
    reject_unknown(m, {"type", "alpha", "beta", "sigma1", "sigma2", "x0", "y0", "t0"}, where);
    PendulumPairSpec s;
    s.alpha = number(require(m, "alpha", where), "model.alpha");
    s.beta = number(require(m, "beta", where), "model.beta");
    s.sigma1 = number(require(m, "sigma1", where), "model.sigma1");
    s.sigma2 = number(require(m, "sigma2", where), "model.sigma2");
    s.x0 = m.contains("x0") ? vector_of(m.at("x0"), "model.x0") : Vec::Zero(2);
    s.y0 = m.contains("y0") ? vector_of(m.at("y0"), "model.y0") : Vec::Zero(2);
    s.t0 = optional_number(m, "t0", 0.0, where);
    try {
        s.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return s;
}

CustomDriftConfig custom_from_json(const json& m) {
    const std::string where = "model";
    reject_unknown(m, {"type", "family", "kx", "ky", "b", "k", "pi", "growth_constant", "x0", "y0", "t0"},
                   where);
    CustomDriftConfig c;
    c.family = require(m, "family", where).is_string() ? m.at("family").get<std::string>() : "";
    c.pi = matrix_of(require(m, "pi", where), "model.pi");
    const Eigen::Index d = c.pi.rows();
    auto square = [&](const char* key) {
        Mat out = matrix_of(require(m, key, where), std::string("model.") + key);
        if (out.rows() != d || out.cols() != d) {
            throw ConfigError(std::string("model.") + key + ": must be d x d with d = rows of pi");
        }
        return out;
    };
    if (c.family == "affine") {
        c.kx = square("kx");
        c.ky = m.contains("ky") ? square("ky") : Mat::Zero(d, d);
        c.offset = m.contains("b") ? vector_of(m.at("b"), "model.b") : Vec::Zero(d);
        if (c.offset.size() != d) throw ConfigError("model.b: must have length d");
    } else if (c.family == "sine") {
        c.k = square("k");
    } else {
        throw ConfigError("model.family: expected \"affine\" or \"sine\"");
    }
    c.growth_constant = number(require(m, "growth_constant", where), "model.growth_constant");
    c.x0 = m.contains("x0") ? vector_of(m.at("x0"), "model.x0") : Vec::Zero(d);
    c.y0 = m.contains("y0") ? vector_of(m.at("y0"), "model.y0") : Vec::Zero(d);
    c.t0 = optional_number(m, "t0", 0.0, where);
    return c;
}

NonlinearDriftSpec nonlinear_from_custom(const CustomDriftConfig& c) {
    NonlinearDriftSpec s;
    s.d = c.pi.rows();
    if (c.family == "affine") {
        s.drift = [kx = c.kx, ky = c.ky, b = c.offset](const Vec& x, const Vec& y) -> Vec {
            return kx * x + ky * y + b;
        };
    } else {
        s.drift = [k = c.k](const Vec& x, const Vec&) -> Vec { return k * x.array().sin().matrix(); };
    }
    s.pi = c.pi;
    s.growth_constant = c.growth_constant;
    s.x0 = c.x0;
    s.y0 = c.y0;
    s.t0 = c.t0;
    return s;
}

json model_to_json(const ModelConfig& m) {
    switch (m.kind) {
        case ModelKind::linear: return to_json(*m.linear);
        case ModelKind::pendulum_pair: {
            const PendulumPairSpec& s = *m.pendulum;
            return json{{"type", "pendulum-pair"}, {"alpha", s.alpha}, {"beta", s.beta},
                        {"sigma1", s.sigma1},      {"sigma2", s.sigma2}, {"x0", json_of(s.x0)},
                        {"y0", json_of(s.y0)},     {"t0", s.t0}};
        }
        case ModelKind::custom_drift: {
            const CustomDriftConfig& c = *m.custom;
            json out{{"type", "custom-drift"}, {"family", c.family}, {"pi", json_of(c.pi)},
                     {"growth_constant", c.growth_constant}, {"x0", json_of(c.x0)},
                     {"y0", json_of(c.y0)}, {"t0", c.t0}};
            if (c.family == "affine") {
                out["kx"] = json_of(c.kx);
                out["ky"] = json_of(c.ky);
                out["b"] = json_of(c.offset);
            } else {
                out["k"] = json_of(c.k);
            }
            return out;
        }
    }
    return {};
}

}  // namespace

Eigen::Index ModelConfig::dim() const {
    switch (kind) {
        case ModelKind::linear: return linear->dim();
        case ModelKind::pendulum_pair: return 2;
        case ModelKind::custom_drift: return custom->pi.rows();
    }
    return 0;
}

NonlinearDriftSpec ModelConfig::nonlinear_spec() const {
    if (kind == ModelKind::pendulum_pair) return make_pendulum_spec(*pendulum);
    if (kind == ModelKind::custom_drift) return nonlinear_from_custom(*custom);
    throw PreconditionError("nonlinear_spec: model is linear");
}

std::vector<std::size_t> CheckpointSchedule::resolve(std::size_t steps) const {
    switch (kind) {
        case Kind::all: {
            std::vector<std::size_t> out(steps + 1);
            for (std::size_t n = 0; n <= steps; ++n) out[n] = n;
            return out;
        }
        case Kind::geometric: return geometric_checkpoints(steps, ratio);
        case Kind::list: {
            std::vector<std::size_t> out;
            for (const std::size_t n : indices) {
                if (n <= steps) out.push_back(n);
            }
            return out;
        }
    }
    return {};
}

json to_json(const CoupledOscillatorSpec& spec) {
    return json{{"type", "linear"},           {"lambda", json_of(spec.lambda().matrix())},
                {"pi", json_of(spec.pi())},   {"x0", json_of(spec.x0())},
                {"y0", json_of(spec.y0())},   {"t0", spec.t0()}};
}

CoupledOscillatorSpec linear_spec_from_json(const json& m) {
    const std::string where = "model";
    reject_unknown(m, {"type", "lambda", "pi", "x0", "y0", "t0"}, where);
    Mat lambda = matrix_of(require(m, "lambda", where), "model.lambda");
    Mat pi = matrix_of(require(m, "pi", where), "model.pi");
    const Eigen::Index d = lambda.rows();
    Vec x0 = m.contains("x0") ? vector_of(m.at("x0"), "model.x0") : Vec::Zero(d);
    Vec y0 = m.contains("y0") ? vector_of(m.at("y0"), "model.y0") : Vec::Zero(d);
    const double t0 = optional_number(m, "t0", 0.0, where);
    try {
        return CoupledOscillatorSpec(SymMatrix(std::move(lambda)), std::move(pi), std::move(x0),
                                     std::move(y0), t0);
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

ExperimentConfig parse_config(const json& doc) {
    reject_unknown(doc,
                   {"model", "scheme", "step", "steps", "horizon", "seed", "paths", "checkpoints",
                    "epsilon", "deltas", "pass_threshold", "q", "convergence", "output_dir",
                    "threads"},
                   "config");
    ExperimentConfig cfg;

    const json& model = require(doc, "model", "config");
    const json& type = require(model, "type", "model");
    const std::string kind = type.is_string() ? type.get<std::string>() : "";
    if (kind == "linear") {
        cfg.model.kind = ModelKind::linear;
        cfg.model.linear = linear_spec_from_json(model);
    } else if (kind == "pendulum-pair") {
        cfg.model.kind = ModelKind::pendulum_pair;
        cfg.model.pendulum = pendulum_from_json(model);
    } else if (kind == "custom-drift") {
        cfg.model.kind = ModelKind::custom_drift;
        cfg.model.custom = custom_from_json(model);
        NonlinearDriftSpec spec = nonlinear_from_custom(*cfg.model.custom);
        try {
            spec.validate();
        } catch (const ValidationError& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
        const GrowthCheck check = growth_bound_check(spec);
        if (!check.pass) {
            throw ConfigError("model: drift violates |f| <= K1 (1 + |x| + |y|); sampled ratio " +
                              std::to_string(check.worst_ratio) + " > growth_constant " +
                              std::to_string(spec.growth_constant));
        }
    } else {
        throw ConfigError("model.type: expected \"linear\", \"pendulum-pair\" or \"custom-drift\"");
    }

    const json& scheme = require(doc, "scheme", "config");
    try {
        cfg.scheme = parse_scheme(scheme.is_string() ? scheme.get<std::string>() : "");
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("scheme: ") + e.what());
    }
    if (cfg.scheme == Scheme::exact && !cfg.model.is_linear()) {
        throw ConfigError("scheme: \"exact\" requires a linear model (no closed-form law otherwise)");
    }
    if (cfg.scheme == Scheme::ll && !cfg.model.is_linear()) {
        throw ConfigError("scheme: \"ll\" is only defined for the linear model; use \"em\"");
    }

    cfg.step = number(require(doc, "step", "config"), "step");
    if (!(cfg.step > 0.0)) throw ConfigError("step: must be > 0");
    if (doc.contains("steps") == doc.contains("horizon")) {
        throw ConfigError("config: give exactly one of \"steps\" and \"horizon\"");
    }
    if (doc.contains("steps")) {
        cfg.steps = count(doc.at("steps"), "steps");
    } else {
        const double horizon = number(doc.at("horizon"), "horizon");
        if (!(horizon > 0.0)) throw ConfigError("horizon: must be > 0");
        cfg.steps = static_cast<std::size_t>(std::ceil(horizon / cfg.step - 1e-9));
    }
    if (cfg.steps < 1) throw ConfigError("steps: must be >= 1");

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            throw ConfigError("seed: expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("paths")) cfg.paths = count(doc.at("paths"), "paths");
    if (cfg.paths < 1) throw ConfigError("paths: must be >= 1");

    if (doc.contains("checkpoints")) {
        const json& c = doc.at("checkpoints");
        if (c.is_string() && c.get<std::string>() == "all") {
            cfg.checkpoints.kind = CheckpointSchedule::Kind::all;
        } else if (c.is_array()) {
            cfg.checkpoints.kind = CheckpointSchedule::Kind::list;
            for (std::size_t k = 0; k < c.size(); ++k) {
                cfg.checkpoints.indices.push_back(count(c[k], "checkpoints[" + std::to_string(k) + "]"));
            }
        } else if (c.is_object()) {
            reject_unknown(c, {"geometric"}, "checkpoints");
            cfg.checkpoints.kind = CheckpointSchedule::Kind::geometric;
            cfg.checkpoints.ratio = number(require(c, "geometric", "checkpoints"), "checkpoints.geometric");
            if (!(cfg.checkpoints.ratio > 1.0)) throw ConfigError("checkpoints.geometric: must be > 1");
        } else {
            throw ConfigError("checkpoints: expected \"all\", {\"geometric\": r} or an index list");
        }
    }

    cfg.epsilon = optional_number(doc, "epsilon", cfg.epsilon, "config");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("epsilon: must lie in (0, 1)");
    if (doc.contains("deltas")) {
        const Vec d = vector_of(doc.at("deltas"), "deltas");
        if (d.size() == 0 || (d.array() <= 0.0).any()) throw ConfigError("deltas: must be positive");
        cfg.deltas.assign(d.data(), d.data() + d.size());
    }
    cfg.pass_threshold = optional_number(doc, "pass_threshold", cfg.pass_threshold, "config");
    if (!(cfg.pass_threshold >= 0.0 && cfg.pass_threshold <= 1.0)) {
        throw ConfigError("pass_threshold: must lie in [0, 1]");
    }
    if (doc.contains("q")) {
        if (cfg.scheme != Scheme::ll) throw ConfigError("q: only meaningful with scheme \"ll\"");
        Mat q = matrix_of(doc.at("q"), "q");
        if (q.rows() != 2 * cfg.model.dim()) throw ConfigError("q: must have 2d rows");
        cfg.q = std::move(q);
    }
    if (doc.contains("convergence")) {
        const json& c = doc.at("convergence");
        reject_unknown(c, {"steps", "horizon", "refine_power", "include_em"}, "convergence");
        if (c.contains("steps")) {
            const Vec s = vector_of(c.at("steps"), "convergence.steps");
            if (s.size() < 2 || (s.array() <= 0.0).any()) {
                throw ConfigError("convergence.steps: need at least two positive steps");
            }
            cfg.convergence.steps.assign(s.data(), s.data() + s.size());
        }
        cfg.convergence.horizon = optional_number(c, "horizon", cfg.convergence.horizon, "convergence");
        if (c.contains("refine_power")) {
            cfg.convergence.refine_power = static_cast<int>(count(c.at("refine_power"), "convergence.refine_power"));
        }
        if (c.contains("include_em")) {
            if (!c.at("include_em").is_boolean()) throw ConfigError("convergence.include_em: expected a boolean");
            cfg.convergence.include_em = c.at("include_em").get<bool>();
        }
    }
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigError("output_dir: expected a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("threads")) {
        cfg.threads = static_cast<unsigned>(std::max<std::size_t>(1, count(doc.at("threads"), "threads")));
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json out{{"model", model_to_json(cfg.model)},
             {"scheme", std::string(scheme_name(cfg.scheme))},
             {"step", cfg.step},
             {"steps", cfg.steps},
             {"seed", cfg.seed},
             {"paths", cfg.paths},
             {"epsilon", cfg.epsilon},
             {"deltas", cfg.deltas},
             {"pass_threshold", cfg.pass_threshold},
             {"convergence",
              {{"steps", cfg.convergence.steps},
               {"horizon", cfg.convergence.horizon},
               {"refine_power", cfg.convergence.refine_power},
               {"include_em", cfg.convergence.include_em}}}};
    switch (cfg.checkpoints.kind) {
        case CheckpointSchedule::Kind::all: out["checkpoints"] = "all"; break;
        case CheckpointSchedule::Kind::geometric:
            out["checkpoints"] = {{"geometric", cfg.checkpoints.ratio}};
            break;
        case CheckpointSchedule::Kind::list: out["checkpoints"] = cfg.checkpoints.indices; break;
    }
    if (cfg.q) out["q"] = json_of(*cfg.q);
    return out;
}

}  // namespace stosc
