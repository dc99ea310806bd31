#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecmlab/harness.hpp"
#include "ecmlab/params.hpp"

namespace ecmlab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Human-facing run description. Rates and volatility are annualized
// (252-day convention) and converted to per-step units at this boundary;
// jump parameters are already per step / relative.
struct RunConfig {
    struct Model {
        double annual_growth = 0.07;         // discount-rate growth per year
        double annual_normal_growth = 0.07;  // normal-price growth per year
        double annual_volatility = 0.17;
        double jump_probability = 0.01;
        double mean_jump_size = 0.3;
        double jump_size_std = 0.2;
        double annual_risk_free = 0.0;
        double initial_price = 1.0;
        bool operator==(const Model&) const = default;
    };
    struct Run {
        std::size_t sims = 10000;
        std::size_t horizon = 1250;
        std::uint64_t master_seed = 1;
        int workers = 0;  // 0 = use ECMLAB_WORKERS or hardware default
        std::string out_dir = "out";
        int jump_nodes = 7;
        int gauss_nodes = 21;
        bool operator==(const Run&) const = default;
    };
    struct Experiment {
        std::string family = "histogram";
        std::vector<std::size_t> horizons;
        std::string sweep_parameter = "volatility";
        std::vector<double> values;
        std::vector<double> error_sigmas;
        std::string error_parameter = "discount_rate";
        std::vector<std::string> strategies;
        std::string classical_kelly_drift = "log";  // "log" | "arithmetic"
        double sign_rate_limit = 0.10;
        std::size_t histogram_bins = 60;
        bool operator==(const Experiment&) const = default;
    };

    Model model;
    Run run;
    Experiment experiment;
    bool operator==(const RunConfig&) const = default;

    ModelParams to_model_params() const {
        ModelParams p;
        p.discount_rate = std::log1p(model.annual_growth) / kTradingDaysPerYear;
        p.normal_growth_rate = std::log1p(model.annual_normal_growth) / kTradingDaysPerYear;
        p.volatility = model.annual_volatility / std::sqrt(kTradingDaysPerYear);
        p.jump_prob = model.jump_probability;
        p.mean_jump_size = model.mean_jump_size;
        p.jump_size_std = model.jump_size_std;
        p.risk_free_rate = std::log1p(model.annual_risk_free) / kTradingDaysPerYear;
        p.initial_price = model.initial_price;
        try {
            p.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
        return p;
    }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_into(const nlohmann::json& obj, const std::string& where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        obj.at(key).get_to(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

}  // namespace detail

inline TargetParam target_param_from_name(const std::string& name) {
    if (name == "discount_rate") return TargetParam::discount_rate;
    if (name == "normal_growth_rate") return TargetParam::normal_growth_rate;
    if (name == "volatility") return TargetParam::volatility;
    if (name == "jump_prob") return TargetParam::jump_prob;
    if (name == "mean_jump_size") return TargetParam::mean_jump_size;
    throw ConfigError("unknown parameter name '" + name +
                      "' (expected discount_rate, normal_growth_rate, volatility, "
                      "jump_prob, or mean_jump_size)");
}

inline Family family_from_name(const std::string& name) {
    if (name == "histogram") return Family::histogram;
    if (name == "window-sweep") return Family::window_sweep;
    if (name == "param-sensitivity") return Family::param_sensitivity;
    if (name == "error-scan") return Family::error_scan;
    if (name == "sign-test") return Family::sign_test;
    throw ConfigError("unknown experiment family '" + name + "'");
}

inline const char* family_name(Family f) {
    switch (f) {
        case Family::histogram: return "histogram";
        case Family::window_sweep: return "window-sweep";
        case Family::param_sensitivity: return "param-sensitivity";
        case Family::error_scan: return "error-scan";
        case Family::sign_test: return "sign-test";
    }
    return "?";
}

inline RunConfig parse_config(const nlohmann::json& doc) {
    detail::require_keys(doc, "config", {"model", "run", "experiment"});
    RunConfig cfg;

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        detail::require_keys(m, "model",
                             {"annual_growth", "annual_normal_growth", "annual_volatility",
                              "jump_probability", "mean_jump_size", "jump_size_std",
                              "annual_risk_free", "initial_price"});
        detail::read_into(m, "model", "annual_growth", cfg.model.annual_growth);
        detail::read_into(m, "model", "annual_normal_growth", cfg.model.annual_normal_growth);
        detail::read_into(m, "model", "annual_volatility", cfg.model.annual_volatility);
        detail::read_into(m, "model", "jump_probability", cfg.model.jump_probability);
        detail::read_into(m, "model", "mean_jump_size", cfg.model.mean_jump_size);
        detail::read_into(m, "model", "jump_size_std", cfg.model.jump_size_std);
        detail::read_into(m, "model", "annual_risk_free", cfg.model.annual_risk_free);
        detail::read_into(m, "model", "initial_price", cfg.model.initial_price);
    }
    if (doc.contains("run")) {
        const auto& r = doc.at("run");
        detail::require_keys(r, "run",
                             {"sims", "horizon", "master_seed", "workers", "out_dir",
                              "jump_nodes", "gauss_nodes"});
        detail::read_into(r, "run", "sims", cfg.run.sims);
        detail::read_into(r, "run", "horizon", cfg.run.horizon);
        detail::read_into(r, "run", "master_seed", cfg.run.master_seed);
        detail::read_into(r, "run", "workers", cfg.run.workers);
        detail::read_into(r, "run", "out_dir", cfg.run.out_dir);
        detail::read_into(r, "run", "jump_nodes", cfg.run.jump_nodes);
        detail::read_into(r, "run", "gauss_nodes", cfg.run.gauss_nodes);
    }
    if (doc.contains("experiment")) {
        const auto& e = doc.at("experiment");
        detail::require_keys(e, "experiment",
                             {"family", "horizons", "sweep_parameter", "values",
                              "error_sigmas", "error_parameter", "strategies",
                              "classical_kelly_drift", "sign_rate_limit", "histogram_bins"});
        detail::read_into(e, "experiment", "family", cfg.experiment.family);
        detail::read_into(e, "experiment", "horizons", cfg.experiment.horizons);
        detail::read_into(e, "experiment", "sweep_parameter", cfg.experiment.sweep_parameter);
        detail::read_into(e, "experiment", "values", cfg.experiment.values);
        detail::read_into(e, "experiment", "error_sigmas", cfg.experiment.error_sigmas);
        detail::read_into(e, "experiment", "error_parameter", cfg.experiment.error_parameter);
        detail::read_into(e, "experiment", "strategies", cfg.experiment.strategies);
        detail::read_into(e, "experiment", "classical_kelly_drift",
                          cfg.experiment.classical_kelly_drift);
        detail::read_into(e, "experiment", "sign_rate_limit", cfg.experiment.sign_rate_limit);
        detail::read_into(e, "experiment", "histogram_bins", cfg.experiment.histogram_bins);
    }

    // validation beyond types
    if (cfg.run.sims < 1) throw ConfigError("run.sims must be >= 1");
    if (cfg.run.horizon < 1) throw ConfigError("run.horizon must be >= 1");
    if (cfg.run.jump_nodes < 1) throw ConfigError("run.jump_nodes must be >= 1");
    if (cfg.run.gauss_nodes < 3) throw ConfigError("run.gauss_nodes must be >= 3");
    if (cfg.experiment.classical_kelly_drift != "log" &&
        cfg.experiment.classical_kelly_drift != "arithmetic")
        throw ConfigError("experiment.classical_kelly_drift must be 'log' or 'arithmetic'");
    family_from_name(cfg.experiment.family);
    target_param_from_name(cfg.experiment.sweep_parameter);
    target_param_from_name(cfg.experiment.error_parameter);
    cfg.to_model_params();  // rejects out-of-range model values
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json doc;
    doc["model"] = {{"annual_growth", cfg.model.annual_growth},
                    {"annual_normal_growth", cfg.model.annual_normal_growth},
                    {"annual_volatility", cfg.model.annual_volatility},
                    {"jump_probability", cfg.model.jump_probability},
                    {"mean_jump_size", cfg.model.mean_jump_size},
                    {"jump_size_std", cfg.model.jump_size_std},
                    {"annual_risk_free", cfg.model.annual_risk_free},
                    {"initial_price", cfg.model.initial_price}};
    doc["run"] = {{"sims", cfg.run.sims},
                  {"horizon", cfg.run.horizon},
                  {"master_seed", cfg.run.master_seed},
                  {"workers", cfg.run.workers},
                  {"out_dir", cfg.run.out_dir},
                  {"jump_nodes", cfg.run.jump_nodes},
                  {"gauss_nodes", cfg.run.gauss_nodes}};
    doc["experiment"] = {{"family", cfg.experiment.family},
                         {"horizons", cfg.experiment.horizons},
                         {"sweep_parameter", cfg.experiment.sweep_parameter},
                         {"values", cfg.experiment.values},
                         {"error_sigmas", cfg.experiment.error_sigmas},
                         {"error_parameter", cfg.experiment.error_parameter},
                         {"strategies", cfg.experiment.strategies},
                         {"classical_kelly_drift", cfg.experiment.classical_kelly_drift},
                         {"sign_rate_limit", cfg.experiment.sign_rate_limit},
                         {"histogram_bins", cfg.experiment.histogram_bins}};
    return doc;
}

// Builds the harness plan from a validated config.
inline ExperimentPlan to_plan(const RunConfig& cfg) {
    ExperimentPlan plan;
    plan.family = family_from_name(cfg.experiment.family);
    plan.params = cfg.to_model_params();
    plan.sims = cfg.run.sims;
    plan.horizons = cfg.experiment.horizons;
    if (plan.horizons.empty() &&
        (plan.family == Family::param_sensitivity || plan.family == Family::error_scan))
        plan.horizons = {2500};
    plan.sweep_param = target_param_from_name(cfg.experiment.sweep_parameter);
    plan.sweep_values = cfg.experiment.values;
    plan.error.target = target_param_from_name(cfg.experiment.error_parameter);
    plan.error.sigma_e = cfg.experiment.error_sigmas;
    plan.sign.annual_rate_limit = cfg.experiment.sign_rate_limit;
    plan.ck_drift = cfg.experiment.classical_kelly_drift == "arithmetic"
                        ? DriftConvention::arithmetic_drift
                        : DriftConvention::log_drift;
    plan.master_seed = cfg.run.master_seed;
    plan.jump_nodes = cfg.run.jump_nodes;
    plan.gauss_nodes = cfg.run.gauss_nodes;
    plan.histogram_bins = cfg.experiment.histogram_bins;

    if (!cfg.experiment.strategies.empty()) {
        std::vector<StrategySpec> chosen;
        for (const auto& label : cfg.experiment.strategies) {
            bool found = false;
            for (const auto& spec : six_standard_strategies(plan.ck_drift)) {
                if (spec.label == label) {
                    chosen.push_back(spec);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw ConfigError("experiment.strategies: unknown label '" + label +
                                  "' (expected BH, FF60, CK-bounded, CK-unbounded, "
                                  "ECO-bounded, or ECO-unbounded)");
        }
        plan.strategies = std::move(chosen);
    }
    return plan;
}

}  // namespace ecmlab
