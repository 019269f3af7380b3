// Command-line front end: train, eval, compare, generalize.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <tsc/config.hpp>
#include <tsc/harness.hpp>

namespace fs = std::filesystem;
using namespace tsc;

namespace {

enum Exit { ok = 0, config_error = 2, missing_artifact = 3, runtime_failure = 4 };

struct Flags {
    std::string config;
    std::string pattern;
    int episodes = 0;
    int runs = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string model;
    std::string controller;
    std::vector<std::string> models;
    bool trace = false;
    unsigned workers = 0;
};

struct FlagOptions {
    CLI::Option* pattern = nullptr;
    CLI::Option* episodes = nullptr;
    CLI::Option* runs = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* model = nullptr;
    CLI::Option* controller = nullptr;
    CLI::Option* models = nullptr;
    CLI::Option* trace = nullptr;
    CLI::Option* workers = nullptr;
};

FlagOptions add_flags(CLI::App& cmd, Flags& f) {
    FlagOptions o;
    cmd.add_option("--config", f.config, "JSON file with sim/agent/baseline/run sections");
    o.pattern = cmd.add_option("--pattern", f.pattern, "traffic pattern P1..P4");
    o.episodes = cmd.add_option("--episodes", f.episodes, "training episodes");
    o.runs = cmd.add_option("--runs", f.runs, "evaluation runs");
    o.seed = cmd.add_option("--seed", f.seed, "master seed (train) or first evaluation seed");
    o.out = cmd.add_option("--out", f.out, "output directory");
    o.model = cmd.add_option("--model", f.model, "model.json, or a run directory holding one");
    o.controller = cmd.add_option("--controller", f.controller, "fixed, gap, timeloss or rl");
    o.models = cmd.add_option("--models", f.models, "comma-separated run directories or model files")->delimiter(',');
    o.trace = cmd.add_flag("--trace", f.trace, "write per-step trace.csv and decisions.csv");
    o.workers = cmd.add_option("--workers", f.workers, "threads for evaluation runs");
    return o;
}

RunConfig resolve(const Flags& f, const FlagOptions& o) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (o.pattern->count()) c.run.pattern = f.pattern;
    if (o.episodes->count()) c.run.episodes = f.episodes;
    if (o.runs->count()) c.run.runs = f.runs;
    if (o.seed->count()) c.run.seed = f.seed;
    if (o.out->count()) c.run.out = f.out;
    if (o.model->count()) c.run.model = f.model;
    if (o.controller->count()) c.run.controller = f.controller;
    if (o.models->count()) c.run.models = f.models;
    if (o.trace->count()) c.run.trace = f.trace;
    if (o.workers->count()) c.run.workers = f.workers;
    c.validate();
    return c;
}

fs::path prepare_out(const RunConfig& c) {
    const fs::path dir = c.run.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("run.out", "cannot create output directory " + dir.string());
    std::ofstream os(dir / "effective_config.json");
    if (!os) throw ConfigError("run.out", "output directory is not writable: " + dir.string());
    os << to_json(c).dump(2) << '\n';
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

fs::path model_path(const std::string& p) {
    const fs::path path = p;
    return path.extension() == ".json" ? path : path / "model.json";
}

ModelFile load_model(const std::string& p, const RunConfig& c) {
    return load_params(model_path(p).string(), c.agent.architecture());
}

void write_trace(const fs::path& dir, const std::string& suffix, Controller& controller, const PatternSpec& pattern,
                 std::uint64_t seed, const SimParams& params) {
    auto trace = open_out(dir / ("trace" + suffix + ".csv"));
    std::vector<DecisionRecord> decisions;
    write_trace_header(trace);
    run_episode(controller, pattern, seed, params, {&trace, &decisions});
    auto dec = open_out(dir / ("decisions" + suffix + ".csv"));
    write_decision_header(dec);
    for (const auto& d : decisions) write_decision_row(dec, d);
}

void print_summary(const EvalStats& s) {
    std::printf("%-9s %s  queue median %.3f mean %.3f | wait median %.2f mean %.2f  (n=%zu)\n", s.controller.c_str(),
                s.pattern.c_str(), s.queue.median, s.queue.mean, s.wait.median, s.wait.mean, s.queue.n);
}

int cmd_train(const RunConfig& c) {
    const fs::path dir = prepare_out(c);
    const PatternSpec pattern = build_pattern(c.run.pattern);
    const TrainResult r = train(pattern, c.run.episodes, c.run.seed, c.agent, c.sim,
                                [](const LearningCurveRow& row, const TrainingEpisode&) {
                                    if (row.episode % 10 == 0 || row.episode == 1)
                                        std::fprintf(stderr, "episode %4d  queue %.3f  wait %.2f  loss %.4g  eps %.3f\n",
                                                     row.episode, row.avg_queue, row.avg_wait, row.mean_loss, row.epsilon);
                                });
    save_params((dir / "model.json").string(), r.model);
    auto curve = open_out(dir / "learning_curve.csv");
    write_learning_curve_csv(curve, r.curve);
    if (c.run.trace) {
        RlController greedy(r.model.params);
        write_trace(dir, "", greedy, pattern, c.run.seed, c.sim);
    }
    return ok;
}

int cmd_eval(const RunConfig& c) {
    ControllerKind kind = c.run.controller.empty() ? ControllerKind::rl : parse_controller(c.run.controller);
    if (c.run.controller.empty() && c.run.model.empty())
        throw ConfigError("run.controller", "give --controller (fixed, gap, timeloss, rl) or --model");
    if (kind == ControllerKind::rl && c.run.model.empty())
        throw ConfigError("run.model", "the rl controller needs --model");
    const PatternSpec pattern = build_pattern(c.run.pattern);
    ControllerFactory factory;
    if (kind == ControllerKind::rl) factory = rl_factory(load_model(c.run.model, c).params);
    else factory = baseline_factory(kind, pattern, c.baseline, c.sim);

    const fs::path dir = prepare_out(c);
    const EvalStats s = evaluate(factory, to_string(kind), pattern, static_cast<std::size_t>(c.run.runs), c.run.seed,
                                 c.sim, c.run.workers);
    auto runs = open_out(dir / "eval_runs.csv");
    write_eval_runs_header(runs);
    write_eval_runs_rows(runs, s);
    auto summary = open_out(dir / "eval_summary.json");
    nlohmann::json j = summary_json(s);
    j["metric_notes"] = "avg_wait_time includes the accumulated wait of vehicles still present at episode end";
    summary << j.dump(2) << '\n';
    print_summary(s);
    if (c.run.trace) {
        auto controller = factory();
        write_trace(dir, "", *controller, pattern, c.run.seed, c.sim);
    }
    return ok;
}

int cmd_compare(const RunConfig& c) {
    if (c.run.model.empty()) throw ConfigError("run.model", "compare needs --model");
    const PatternSpec pattern = build_pattern(c.run.pattern);
    const ModelFile m = load_model(c.run.model, c);
    const fs::path dir = prepare_out(c);
    const CompareResult r =
        compare(pattern, m.params, static_cast<std::size_t>(c.run.runs), c.run.seed, c.baseline, c.sim, c.run.workers);
    auto runs = open_out(dir / "eval_runs.csv");
    write_eval_runs_header(runs);
    for (const auto& s : r.controllers) {
        write_eval_runs_rows(runs, s);
        print_summary(s);
    }
    auto summary = open_out(dir / "compare_summary.json");
    summary << to_json(r).dump(2) << '\n';
    for (const auto& [name, pct] : r.wait_improvement)
        std::printf("rl vs %-9s median queue %+.1f%%  median wait %+.1f%%\n", name.c_str(), r.queue_improvement.at(name),
                    pct);
    if (c.run.trace) {
        for (const auto kind : {ControllerKind::fixed, ControllerKind::gap, ControllerKind::timeloss, ControllerKind::rl}) {
            const ControllerFactory f = kind == ControllerKind::rl ? rl_factory(m.params)
                                                                   : baseline_factory(kind, pattern, c.baseline, c.sim);
            auto controller = f();
            write_trace(dir, "_" + to_string(kind), *controller, pattern, c.run.seed, c.sim);
        }
    }
    return ok;
}

int cmd_generalize(const RunConfig& c) {
    if (c.run.models.empty()) throw ConfigError("run.models", "generalize needs --models");
    std::vector<std::string> missing;
    for (const auto& p : c.run.models)
        if (!fs::exists(model_path(p))) missing.push_back(model_path(p).string());
    if (!missing.empty()) {
        std::string msg = "missing trained models:";
        for (const auto& m : missing) msg += " " + m;
        throw MissingArtifact(msg);
    }
    std::map<std::string, NetworkParams> models;
    std::vector<std::string> train_ids;
    for (const auto& p : c.run.models) {
        ModelFile m = load_model(p, c);
        if (m.trained_on_pattern.empty())
            throw MalformedModel(model_path(p).string() + " does not record its training pattern");
        if (models.contains(m.trained_on_pattern))
            throw ConfigError("run.models", "two models were trained on " + m.trained_on_pattern);
        train_ids.push_back(m.trained_on_pattern);
        models.emplace(m.trained_on_pattern, std::move(m.params));
    }
    const fs::path dir = prepare_out(c);
    const GeneralizationMatrix g = generalization(models, train_ids, pattern_ids(),
                                                  static_cast<std::size_t>(c.run.runs), c.run.seed, c.sim, c.run.workers);
    auto csv = open_out(dir / "generalization.csv");
    write_generalization_csv(csv, g);
    std::printf("%-6s", "train");
    for (const auto& te : g.test_ids) std::printf("  %-14s", te.c_str());
    std::printf("\n");
    for (const auto& tr : g.train_ids) {
        std::printf("%-6s", tr.c_str());
        for (const auto& te : g.test_ids) {
            const auto& cell = g.at(tr, te);
            std::printf("  %6.3f/%-7.2f", cell.mean_queue, cell.mean_wait);
        }
        std::printf("\n");
    }
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive traffic signal control: DQN training and baseline benchmarking"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Flags f;
    struct Command {
        CLI::App* app;
        FlagOptions opts;
        int (*run)(const RunConfig&);
    };
    std::vector<Command> commands;
    auto add = [&](const char* name, const char* help, int (*run)(const RunConfig&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands.push_back({sub, add_flags(*sub, f), run});
    };
    add("train", "train a DQN controller; writes model.json and learning_curve.csv", cmd_train);
    add("eval", "evaluate one controller; writes eval_runs.csv and eval_summary.json", cmd_eval);
    add("compare", "benchmark a model against the three baselines; writes compare_summary.json", cmd_compare);
    add("generalize", "evaluate trained models on every pattern; writes generalization.csv", cmd_generalize);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        for (const auto& cmd : commands)
            if (cmd.app->parsed()) return cmd.run(resolve(f, cmd.opts));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const MissingArtifact& e) {
        std::cerr << "missing artifact: " << e.what() << '\n';
        return missing_artifact;
    } catch (const MalformedModel& e) {
        std::cerr << "malformed model: " << e.what() << '\n';
        return missing_artifact;
    } catch (const ArchitectureMismatch& e) {
        std::cerr << "architecture mismatch: " << e.what() << '\n';
        return missing_artifact;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_failure;
    }
    return runtime_failure;
}
