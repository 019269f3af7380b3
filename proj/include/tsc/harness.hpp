#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "controllers.hpp"
#include "dqn.hpp"
#include "episode.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "pattern.hpp"
#include "qnet.hpp"
#include "stats.hpp"

namespace tsc {

enum class ControllerKind { fixed, gap, timeloss, rl };

inline const std::vector<std::string>& controller_names() {
    static const std::vector<std::string> names{"fixed", "gap", "timeloss", "rl"};
    return names;
}

inline std::string to_string(ControllerKind k) { return controller_names()[static_cast<std::size_t>(k)]; }

inline ControllerKind parse_controller(const std::string& name) {
    for (std::size_t i = 0; i < controller_names().size(); ++i)
        if (controller_names()[i] == name) return static_cast<ControllerKind>(i);
    throw ConfigError("controller", "unknown controller '" + name + "' (valid: fixed, gap, timeloss, rl)");
}

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

/// Fixed-time splits are computed from the pattern's time-averaged rates.
inline ControllerFactory baseline_factory(ControllerKind kind, const PatternSpec& pattern, const BaselineConfig& cfg,
                                          const SimParams& params) {
    switch (kind) {
    case ControllerKind::fixed: {
        const FixedTimeSchedule schedule = fixed_time_schedule(pattern, cfg, params);
        return [schedule] { return std::make_unique<FixedTimeController>(schedule); };
    }
    case ControllerKind::gap:
        return [cfg, params] { return std::make_unique<GapBasedController>(cfg, params); };
    case ControllerKind::timeloss:
        return [cfg, params] { return std::make_unique<TimeLossController>(cfg, params); };
    case ControllerKind::rl: break;
    }
    throw ConfigError("controller", "rl controller needs a model");
}

inline ControllerFactory rl_factory(const NetworkParams& net) {
    return [net] { return std::make_unique<RlController>(net); };
}

// -- evaluation ---------------------------------------------------------------

struct RunRecord {
    std::string controller;
    std::string pattern;
    std::uint64_t seed = 0;
    EpisodeResult result;
};

struct EvalStats {
    std::string controller;
    std::string pattern;
    std::vector<RunRecord> runs; // ordered by seed
    Summary queue;
    Summary wait;
};

/// Runs `runs` episodes with seeds seed_base + i. Each run owns its world and
/// controller, so runs may execute on `workers` threads; results are folded
/// in seed order either way.
inline EvalStats evaluate(const ControllerFactory& factory, const std::string& controller_name,
                          const PatternSpec& pattern, std::size_t runs, std::uint64_t seed_base,
                          const SimParams& params = {}, unsigned workers = 1) {
    if (runs == 0) throw ConfigError("run.runs", "must be at least 1");
    std::vector<EpisodeResult> results(runs);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < runs; i += stride) {
            auto c = factory();
            results[i] = run_episode(*c, pattern, seed_base + i, params);
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(runs)));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
    }

    EvalStats out;
    out.controller = controller_name;
    out.pattern = pattern.id;
    std::vector<double> q, w;
    for (std::size_t i = 0; i < runs; ++i) {
        out.runs.push_back({controller_name, pattern.id, seed_base + i, results[i]});
        q.push_back(results[i].avg_queue_length);
        w.push_back(results[i].avg_wait_time);
    }
    out.queue = summarize(std::move(q));
    out.wait = summarize(std::move(w));
    return out;
}

// -- training -----------------------------------------------------------------

struct LearningCurveRow {
    int episode = 0; // 1-based
    double avg_queue = 0.0;
    double avg_wait = 0.0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
};

struct TrainResult {
    ModelFile model;
    std::vector<LearningCurveRow> curve;
};

/// Called after every episode with the row just appended and the episode.
using EpisodeCallback = std::function<void(const LearningCurveRow&, const TrainingEpisode&)>;

/// Trains a fresh agent for `episodes` episodes. Per-episode arrival seeds are
/// split from the master seed, so the whole run is reproducible.
inline TrainResult train(const PatternSpec& pattern, int episodes, std::uint64_t master_seed,
                         const AgentConfig& agent_cfg = {}, const SimParams& params = {},
                         const EpisodeCallback& on_episode = {}) {
    if (episodes < 1) throw ConfigError("run.episodes", "must be at least 1");
    DqnAgent agent(agent_cfg, master_seed);
    TrainResult out;
    for (int e = 0; e < episodes; ++e) {
        const TrainingEpisode ep =
            run_training_episode(agent, pattern, split_seed(master_seed, kStreamEpisode, static_cast<std::uint64_t>(e)),
                                 params);
        out.curve.push_back({e + 1, ep.result.avg_queue_length, ep.result.avg_wait_time, ep.mean_loss, ep.epsilon_at_end});
        if (on_episode) on_episode(out.curve.back(), ep);
    }
    out.model = {agent.online(), master_seed, pattern.id};
    return out;
}

// -- experiments ----------------------------------------------------------------

struct GeneralizationCell {
    std::string train_pattern;
    std::string test_pattern;
    double mean_queue = 0.0;
    double mean_wait = 0.0;
    EvalStats stats;
};

struct GeneralizationMatrix {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<GeneralizationCell> cells; // row-major

    const GeneralizationCell& at(const std::string& train_id, const std::string& test_id) const {
        for (const auto& c : cells)
            if (c.train_pattern == train_id && c.test_pattern == test_id) return c;
        throw std::out_of_range("no generalization cell " + train_id + "/" + test_id);
    }
};

/// Evaluates every trained model on every test pattern.
inline GeneralizationMatrix generalization(const std::map<std::string, NetworkParams>& models,
                                           const std::vector<std::string>& train_ids,
                                           const std::vector<std::string>& test_ids, std::size_t runs,
                                           std::uint64_t seed_base, const SimParams& params = {},
                                           unsigned workers = 1) {
    std::vector<std::string> missing;
    for (const auto& id : train_ids)
        if (!models.contains(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::string msg = "missing trained models for:";
        for (const auto& m : missing) msg += " " + m;
        throw MissingArtifact(msg);
    }
    GeneralizationMatrix g{train_ids, test_ids, {}};
    for (const auto& tr : train_ids) {
        for (const auto& te : test_ids) {
            EvalStats s = evaluate(rl_factory(models.at(tr)), "rl", build_pattern(te), runs, seed_base, params, workers);
            g.cells.push_back({tr, te, s.queue.mean, s.wait.mean, std::move(s)});
        }
    }
    return g;
}

struct CompareResult {
    std::string pattern;
    std::vector<EvalStats> controllers; // fixed, gap, timeloss, rl
    // Median improvement of rl over each baseline, percent.
    std::map<std::string, double> queue_improvement;
    std::map<std::string, double> wait_improvement;

    const EvalStats& of(const std::string& name) const {
        for (const auto& c : controllers)
            if (c.controller == name) return c;
        throw std::out_of_range("no controller " + name);
    }
};

inline CompareResult compare(const PatternSpec& pattern, const NetworkParams& rl_net, std::size_t runs,
                             std::uint64_t seed_base, const BaselineConfig& cfg = {}, const SimParams& params = {},
                             unsigned workers = 1) {
    CompareResult r;
    r.pattern = pattern.id;
    for (const auto kind : {ControllerKind::fixed, ControllerKind::gap, ControllerKind::timeloss}) {
        r.controllers.push_back(
            evaluate(baseline_factory(kind, pattern, cfg, params), to_string(kind), pattern, runs, seed_base, params, workers));
    }
    r.controllers.push_back(evaluate(rl_factory(rl_net), "rl", pattern, runs, seed_base, params, workers));
    const EvalStats& rl = r.controllers.back();
    for (std::size_t i = 0; i + 1 < r.controllers.size(); ++i) {
        const auto& b = r.controllers[i];
        r.queue_improvement[b.controller] = improvement_percent(b.queue.median, rl.queue.median);
        r.wait_improvement[b.controller] = improvement_percent(b.wait.median, rl.wait.median);
    }
    return r;
}

// -- output ---------------------------------------------------------------------

inline void write_learning_curve_csv(std::ostream& os, const std::vector<LearningCurveRow>& rows) {
    os << "episode,avg_queue,avg_wait,mean_loss,epsilon\n";
    for (const auto& r : rows)
        os << r.episode << ',' << format_double(r.avg_queue) << ',' << format_double(r.avg_wait) << ','
           << format_double(r.mean_loss) << ',' << format_double(r.epsilon) << '\n';
}

inline void write_eval_runs_header(std::ostream& os) { os << "controller,pattern,seed,avg_queue,avg_wait\n"; }

inline void write_eval_runs_rows(std::ostream& os, const EvalStats& s) {
    for (const auto& r : s.runs)
        os << r.controller << ',' << r.pattern << ',' << r.seed << ',' << format_double(r.result.avg_queue_length) << ','
           << format_double(r.result.avg_wait_time) << '\n';
}

inline void write_generalization_csv(std::ostream& os, const GeneralizationMatrix& g) {
    os << "train_pattern,test_pattern,mean_queue,mean_wait\n";
    for (const auto& c : g.cells)
        os << c.train_pattern << ',' << c.test_pattern << ',' << format_double(c.mean_queue) << ','
           << format_double(c.mean_wait) << '\n';
}

inline nlohmann::json to_json(const Summary& s) {
    return {{"n", s.n}, {"mean", s.mean}, {"median", s.median}, {"q1", s.q1},
            {"q3", s.q3}, {"min", s.min}, {"max", s.max}};
}

inline nlohmann::json summary_json(const EvalStats& s) {
    return {{"controller", s.controller},
            {"pattern", s.pattern},
            {"avg_queue_length", to_json(s.queue)},
            {"avg_wait_time", to_json(s.wait)}};
}

inline nlohmann::json to_json(const CompareResult& r) {
    nlohmann::json controllers = nlohmann::json::array();
    for (const auto& c : r.controllers) controllers.push_back(summary_json(c));
    return {{"pattern", r.pattern},
            {"controllers", std::move(controllers)},
            {"median_improvement_percent",
             {{"avg_queue_length", r.queue_improvement}, {"avg_wait_time", r.wait_improvement}}},
            {"metric_notes",
             "avg_wait_time includes the accumulated wait of vehicles still present at episode end"}};
}

} // namespace tsc
