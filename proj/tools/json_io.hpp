#pragma once

// JSON encodings of the CLI's file formats: generator specs, models, reports.

#include "json.hpp"
#include "lpsvm/lpsvm.hpp"

#include <Eigen/Core>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lpsvm::cli {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector vector_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + "[" + std::to_string(i) + "] is not a number");
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

inline Json read_json_file(const std::string& path) {
    auto in = csv::open_input(path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
}

inline void write_json_file(const std::string& path, const Json& j) {
    auto out = csv::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed writing '" + path + "'");
}

/// Rejects keys outside `allowed` and reports the first of `required` that is missing.
inline void check_keys(const Json& j, const std::string& what, const std::set<std::string>& allowed,
                       const std::vector<std::string>& required) {
    if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(what + ": unknown key '" + key + "'");
    for (const auto& key : required)
        if (!j.contains(key)) throw ConfigError(what + ": missing required key '" + key + "'");
}

template <class T>
T get_as(const Json& j, const std::string& key, const std::string& what) {
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(what + ": key '" + key + "' has the wrong type");
    }
}

// ---------------------------------------------------------------------------
// Schedules and generator specs

inline Json to_json(const CueSchedule& s) {
    Json out = Json::array();
    for (const auto& iv : s.intervals()) out.push_back({{"start", iv.start}, {"end_exclusive", iv.end}, {"tag", iv.tag}});
    return out;
}

inline CueSchedule schedule_from_json(const Json& j) {
    if (!j.is_array()) throw ConfigError("schedule must be an array of intervals");
    std::vector<CueInterval> ivs;
    for (const auto& item : j) {
        check_keys(item, "schedule interval", {"start", "end_exclusive", "tag"}, {"start", "end_exclusive", "tag"});
        ivs.push_back({get_as<std::size_t>(item, "start", "schedule interval"),
                       get_as<std::size_t>(item, "end_exclusive", "schedule interval"),
                       get_as<std::string>(item, "tag", "schedule interval")});
    }
    try {
        return CueSchedule(std::move(ivs));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

inline Json to_json(const SyntheticSpec& s) {
    Json out;
    out["channels"] = s.channels;
    out["active_channels"] = s.active_channels;
    out["baseline_rate"] = s.baseline_rate;
    out["active_rate"] = s.active_rate;
    out["noise_scale"] = s.noise_scale;
    out["schedule"] = to_json(s.schedule);
    out["seed"] = s.seed;
    if (!s.target.empty()) out["target"] = s.target;
    return out;
}

inline SyntheticSpec spec_from_json(const Json& j) {
    const std::string what = "generator spec";
    check_keys(j, what,
               {"channels", "active_channels", "baseline_rate", "active_rate", "noise_scale", "schedule", "seed", "target"},
               {"channels", "active_channels", "baseline_rate", "active_rate", "noise_scale", "schedule", "seed"});
    SyntheticSpec s;
    s.channels = get_as<std::size_t>(j, "channels", what);
    s.active_channels = get_as<std::vector<std::size_t>>(j, "active_channels", what);
    s.baseline_rate = get_as<double>(j, "baseline_rate", what);
    s.active_rate = get_as<double>(j, "active_rate", what);
    s.noise_scale = get_as<double>(j, "noise_scale", what);
    s.schedule = schedule_from_json(j.at("schedule"));
    s.seed = get_as<std::uint64_t>(j, "seed", what);
    if (j.contains("target")) s.target = get_as<std::string>(j, "target", what);
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Solver configuration and reports

inline Json to_json(const SolverConfig& c) {
    return {{"beta", c.beta},
            {"p", c.p},
            {"epsilon", c.epsilon},
            {"alpha", c.alpha},
            {"gamma_mode", to_string(c.gamma_mode)},
            {"t_mode", to_string(c.weight_mode)},
            {"max_iter", c.max_iter},
            {"tol", c.tol},
            {"warm_start", to_string(c.warm_start)}};
}

inline SolverConfig solver_config_from_json(const Json& j) {
    const std::string what = "solver config";
    check_keys(j, what, {"beta", "p", "epsilon", "alpha", "gamma_mode", "t_mode", "max_iter", "tol", "warm_start"},
               {"beta", "p", "epsilon", "alpha", "gamma_mode", "t_mode", "max_iter", "tol", "warm_start"});
    SolverConfig c;
    c.beta = get_as<double>(j, "beta", what);
    c.p = get_as<double>(j, "p", what);
    c.epsilon = get_as<double>(j, "epsilon", what);
    c.alpha = get_as<double>(j, "alpha", what);
    c.gamma_mode = parse_gamma_mode(get_as<std::string>(j, "gamma_mode", what));
    c.weight_mode = parse_weight_mode(get_as<std::string>(j, "t_mode", what));
    c.max_iter = get_as<int>(j, "max_iter", what);
    c.tol = get_as<double>(j, "tol", what);
    c.warm_start = parse_warm_start(get_as<std::string>(j, "warm_start", what));
    return c;
}

inline Json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"converged", r.converged},
            {"stationarity_residual", r.stationarity_residual},
            {"j_eps_history", r.j_eps_history},
            {"final_active_set", r.final_active_set}};
}

inline Json to_json(const BalancingConfig& c) {
    return {{"mu", c.mu},         {"beta0", c.beta0},
            {"tol", c.tol},       {"max_iter", c.max_iter},
            {"beta_tilde0", c.beta_tilde0}, {"beta_tilde1", c.beta_tilde1}};
}

inline Json to_json(const BalancingResult& r) {
    Json traj = Json::array();
    for (const auto& s : r.trajectory) traj.push_back({{"beta", s.beta}, {"phi", s.phi}, {"psi", s.psi}});
    return {{"method", "balancing"},
            {"beta", r.beta},
            {"converged", r.converged},
            {"oscillation", r.oscillation},
            {"trajectory", traj}};
}

inline Json to_json(const MorozovConfig& c) {
    return {{"delta", c.delta}, {"beta_lo", c.beta_lo}, {"beta_hi", c.beta_hi}, {"tol", c.tol}, {"max_iter", c.max_iter}};
}

inline Json to_json(const MorozovResult& r, const std::vector<std::pair<double, double>>& probes) {
    Json traj = Json::array();
    for (const auto& [beta, phi] : probes) traj.push_back({{"beta", beta}, {"phi", phi}});
    return {{"method", "morozov"},      {"beta", r.beta},         {"phi", r.phi},
            {"iterations", r.iterations}, {"converged", r.converged}, {"monotone", r.monotone},
            {"trajectory", traj}};
}

// ---------------------------------------------------------------------------
// Models

inline constexpr const char* kModelFormat = "lpsvm-model";

struct Model {
    std::string solver; ///< "psvm" or "sparse"
    Hyperplane plane;
    double beta = 1.0;
    std::optional<SolverConfig> config; ///< sparse solver only
    std::optional<Standardizer> standardizer;
    std::string movement; ///< empty when labels came from the data file
};

inline Json to_json(const Model& m) {
    Json out;
    out["format"] = kModelFormat;
    out["version"] = kVersion;
    out["solver"] = m.solver;
    out["movement"] = m.movement;
    out["channels"] = m.plane.channels();
    out["beta"] = m.beta;
    out["nu"] = 1.0 / m.beta;
    out["w"] = to_json(m.plane.w);
    out["gamma"] = m.plane.gamma;
    out["config"] = m.config ? to_json(*m.config) : Json(nullptr);
    if (m.standardizer)
        out["standardizer"] = {{"mean", to_json(m.standardizer->mean)}, {"scale", to_json(m.standardizer->scale)}};
    else
        out["standardizer"] = nullptr;
    return out;
}

inline Model model_from_json(const Json& j) {
    const std::string what = "model";
    check_keys(j, what, {"format", "version", "solver", "movement", "channels", "beta", "nu", "w", "gamma", "config", "standardizer"},
               {"format", "solver", "channels", "beta", "w", "gamma"});
    if (get_as<std::string>(j, "format", what) != kModelFormat) throw ConfigError("not an lpsvm model file");
    Model m;
    m.solver = get_as<std::string>(j, "solver", what);
    if (m.solver != "psvm" && m.solver != "sparse") throw ConfigError("model: unknown solver '" + m.solver + "'");
    if (j.contains("movement")) m.movement = get_as<std::string>(j, "movement", what);
    m.beta = get_as<double>(j, "beta", what);
    m.plane.w = vector_from_json(j.at("w"), "model.w");
    m.plane.gamma = get_as<double>(j, "gamma", what);
    if (get_as<std::size_t>(j, "channels", what) != static_cast<std::size_t>(m.plane.w.size()))
        throw ConfigError("model: channels does not match the length of w");
    if (j.contains("config") && !j.at("config").is_null()) m.config = solver_config_from_json(j.at("config"));
    if (j.contains("standardizer") && !j.at("standardizer").is_null()) {
        const auto& z = j.at("standardizer");
        check_keys(z, "model.standardizer", {"mean", "scale"}, {"mean", "scale"});
        Standardizer s{vector_from_json(z.at("mean"), "standardizer.mean"), vector_from_json(z.at("scale"), "standardizer.scale")};
        if (s.mean.size() != m.plane.w.size() || s.scale.size() != m.plane.w.size())
            throw ConfigError("model: standardizer length does not match w");
        m.standardizer = std::move(s);
    }
    if (!m.plane.finite()) throw ConfigError("model: nonfinite coefficients");
    return m;
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const MarginStats& s) {
    return {{"fraction_margin_ok", s.fraction_margin_ok},
            {"mean_pos_force", optional_json(s.mean_pos_force)},
            {"mean_neg_force", optional_json(s.mean_neg_force)},
            {"hinge_sum", s.hinge_sum}};
}

} // namespace lpsvm::cli
