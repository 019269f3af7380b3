#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "controllers.hpp"
#include "dqn.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "params.hpp"
#include "pattern.hpp"

namespace tsc {

inline constexpr const char* kVersion = "1.0.0";

struct RunSection {
    std::string pattern = "P1";
    int episodes = 200;
    int runs = 100;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string model;
    std::string controller;
    std::vector<std::string> models;
    bool trace = false;
    unsigned workers = 1;
};

/// Everything a command needs; defaults are the published settings.
struct RunConfig {
    SimParams sim;
    AgentConfig agent;
    BaselineConfig baseline;
    RunSection run;

    void validate() const {
        sim.validate();
        agent.validate();
        baseline.validate();
        build_pattern(run.pattern); // throws ConfigError for unknown ids
        if (run.episodes < 1) throw ConfigError("run.episodes", "must be at least 1");
        if (run.runs < 1) throw ConfigError("run.runs", "must be at least 1");
        if (run.workers < 1) throw ConfigError("run.workers", "must be at least 1");
        if (!run.controller.empty()) parse_controller(run.controller);
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& section, const std::set<std::string>& known) {
    if (!obj.is_object()) throw ConfigError(section, "must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!known.contains(key)) throw ConfigError(section + "." + key, "unknown key");
}

template <class T>
void read(const nlohmann::json& obj, const std::string& section, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(section + "." + key, "has the wrong type");
    }
}

} // namespace detail

inline nlohmann::json to_json(const SimParams& p) {
    return {{"lane_length", p.lane_length},       {"vehicle_length", p.vehicle_length},
            {"min_gap", p.min_gap},               {"v_max", p.v_max},
            {"accel", p.accel},                   {"decel", p.decel},
            {"yellow_duration", p.yellow_duration}, {"phase_span", p.phase_span},
            {"time_step", p.time_step},           {"halt_threshold", p.halt_threshold},
            {"reaction_time", p.reaction_time},   {"driver_imperfection", p.driver_imperfection}};
}

inline void from_json_section(const nlohmann::json& j, SimParams& p) {
    const std::string s = "sim";
    detail::reject_unknown(j, s, {"lane_length", "vehicle_length", "min_gap", "v_max", "accel", "decel",
                                  "yellow_duration", "phase_span", "time_step", "halt_threshold", "reaction_time",
                                  "driver_imperfection"});
    detail::read(j, s, "lane_length", p.lane_length);
    detail::read(j, s, "vehicle_length", p.vehicle_length);
    detail::read(j, s, "min_gap", p.min_gap);
    detail::read(j, s, "v_max", p.v_max);
    detail::read(j, s, "accel", p.accel);
    detail::read(j, s, "decel", p.decel);
    detail::read(j, s, "yellow_duration", p.yellow_duration);
    detail::read(j, s, "phase_span", p.phase_span);
    detail::read(j, s, "time_step", p.time_step);
    detail::read(j, s, "halt_threshold", p.halt_threshold);
    detail::read(j, s, "reaction_time", p.reaction_time);
    detail::read(j, s, "driver_imperfection", p.driver_imperfection);
}

inline nlohmann::json to_json(const AgentConfig& a) {
    return {{"gamma", a.gamma},
            {"discount_unit", a.discount_unit == DiscountUnit::simulation_step ? "simulation_step" : "decision"},
            {"batch_size", a.batch_size},
            {"memory_capacity", a.memory_capacity},
            {"epsilon_start", a.epsilon.start},
            {"epsilon_end", a.epsilon.end},
            {"epsilon_decay_steps", a.epsilon.decay_steps},
            {"learning_rate", a.learning_rate},
            {"momentum", a.momentum},
            {"hidden", a.hidden}};
}

inline void from_json_section(const nlohmann::json& j, AgentConfig& a) {
    const std::string s = "agent";
    detail::reject_unknown(j, s, {"gamma", "discount_unit", "batch_size", "memory_capacity", "epsilon_start",
                                  "epsilon_end", "epsilon_decay_steps", "learning_rate", "momentum", "hidden"});
    detail::read(j, s, "gamma", a.gamma);
    std::string unit;
    detail::read(j, s, "discount_unit", unit);
    if (unit == "simulation_step") a.discount_unit = DiscountUnit::simulation_step;
    else if (unit == "decision") a.discount_unit = DiscountUnit::decision;
    else if (!unit.empty()) throw ConfigError("agent.discount_unit", "expected 'simulation_step' or 'decision'");
    detail::read(j, s, "batch_size", a.batch_size);
    detail::read(j, s, "memory_capacity", a.memory_capacity);
    detail::read(j, s, "epsilon_start", a.epsilon.start);
    detail::read(j, s, "epsilon_end", a.epsilon.end);
    detail::read(j, s, "epsilon_decay_steps", a.epsilon.decay_steps);
    detail::read(j, s, "learning_rate", a.learning_rate);
    detail::read(j, s, "momentum", a.momentum);
    detail::read(j, s, "hidden", a.hidden);
}

inline nlohmann::json to_json(const BaselineConfig& b) {
    std::vector<int> order;
    for (const Phase p : b.cycle_order) order.push_back(phase_number(p));
    return {{"cycle_order", order},
            {"cycle_green_total", b.cycle_green_total},
            {"min_green", b.min_green},
            {"max_green", b.max_green},
            {"max_time_gap", b.max_time_gap},
            {"time_loss_threshold", b.time_loss_threshold}};
}

inline void from_json_section(const nlohmann::json& j, BaselineConfig& b) {
    const std::string s = "baseline";
    detail::reject_unknown(j, s, {"cycle_order", "cycle_green_total", "min_green", "max_green", "max_time_gap",
                                  "time_loss_threshold"});
    std::vector<int> order;
    detail::read(j, s, "cycle_order", order);
    if (j.contains("cycle_order")) {
        b.cycle_order.clear();
        for (int n : order) {
            if (n < 1 || n > static_cast<int>(kNumPhases))
                throw ConfigError("baseline.cycle_order", "phase numbers must lie in 1..8");
            b.cycle_order.push_back(phase_at(static_cast<std::size_t>(n - 1)));
        }
    }
    detail::read(j, s, "cycle_green_total", b.cycle_green_total);
    detail::read(j, s, "min_green", b.min_green);
    detail::read(j, s, "max_green", b.max_green);
    detail::read(j, s, "max_time_gap", b.max_time_gap);
    detail::read(j, s, "time_loss_threshold", b.time_loss_threshold);
}

inline nlohmann::json to_json(const RunSection& r) {
    return {{"pattern", r.pattern}, {"episodes", r.episodes},     {"runs", r.runs},   {"seed", r.seed},
            {"out", r.out},         {"model", r.model},           {"controller", r.controller},
            {"models", r.models},   {"trace", r.trace},           {"workers", r.workers}};
}

inline void from_json_section(const nlohmann::json& j, RunSection& r) {
    const std::string s = "run";
    detail::reject_unknown(j, s, {"pattern", "episodes", "runs", "seed", "out", "model", "controller", "models", "trace",
                                  "workers"});
    detail::read(j, s, "pattern", r.pattern);
    detail::read(j, s, "episodes", r.episodes);
    detail::read(j, s, "runs", r.runs);
    detail::read(j, s, "seed", r.seed);
    detail::read(j, s, "out", r.out);
    detail::read(j, s, "model", r.model);
    detail::read(j, s, "controller", r.controller);
    detail::read(j, s, "models", r.models);
    detail::read(j, s, "trace", r.trace);
    detail::read(j, s, "workers", r.workers);
}

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"version", kVersion},
            {"sim", to_json(c.sim)},
            {"agent", to_json(c.agent)},
            {"baseline", to_json(c.baseline)},
            {"run", to_json(c.run)}};
}

/// Merge a {sim, agent, baseline, run} document into `c`. A top-level
/// "version" key (as written to effective_config.json) is accepted.
inline void apply_json(const nlohmann::json& doc, RunConfig& c) {
    detail::reject_unknown(doc, "config", {"version", "sim", "agent", "baseline", "run"});
    if (doc.contains("sim")) from_json_section(doc.at("sim"), c.sim);
    if (doc.contains("agent")) from_json_section(doc.at("agent"), c.agent);
    if (doc.contains("baseline")) from_json_section(doc.at("baseline"), c.baseline);
    if (doc.contains("run")) from_json_section(doc.at("run"), c.run);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw MissingArtifact("config file not found: " + path);
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    RunConfig c;
    apply_json(doc, c);
    return c;
}

} // namespace tsc
