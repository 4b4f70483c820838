// Command-line front end: train a reconfiguration agent, evaluate a single
// open set, enumerate the exhaustive ground truth, and compare a run
// against it.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridconf/dqn.hpp"
#include "gridconf/env.hpp"
#include "gridconf/grid_model.hpp"
#include "gridconf/oracle.hpp"
#include "gridconf/reliability.hpp"
#include "gridconf/run_io.hpp"

namespace {

using namespace gridconf;

std::string data_root() {
    if (const char* env = std::getenv("GRIDCONF_DATA_DIR")) return env;
#ifdef GRIDCONF_BUNDLED_DATA_DIR
    return GRIDCONF_BUNDLED_DATA_DIR;
#else
    return "data";
#endif
}

/// "33" and "69" name the bundled feeders; anything else is a directory path.
std::string resolve_dataset(const std::string& name) {
    if (name == "33") return data_root() + "/ieee33";
    if (name == "69") return data_root() + "/ieee69";
    return name;
}

std::vector<int> parse_open_list(const std::string& text) {
    std::vector<int> ids;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        try {
            size_t used = 0;
            ids.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("bad branch id '" + item + "' in --open");
        }
    }
    if (ids.empty()) throw ParseError("--open needs a comma-separated list of branch ids");
    return ids;
}

/// Reliability parameters as flags; each one set overrides the config file.
struct ReliabilityFlags {
    std::optional<double> lambda_min;
    std::optional<double> lambda_max;
    std::optional<double> repair_hours;

    void attach(CLI::App* cmd) {
        cmd->add_option("--lambda-min", lambda_min,
                        "failure rate of the least-impedance branch, f/yr (default 0.1)");
        cmd->add_option("--lambda-max", lambda_max,
                        "failure rate of the most-impedance branch, f/yr (default 0.4)");
        cmd->add_option("--repair-hours", repair_hours, "repair time per failure, hours (default 6)");
    }

    void apply(RunSettings& settings) const {
        if (lambda_min) settings.lambda_min = *lambda_min;
        if (lambda_max) settings.lambda_max = *lambda_max;
        if (repair_hours) settings.repair_hours = *repair_hours;
    }

    ReliabilityModel build(const Network& net) const {
        return assign_failure_rates(net, lambda_min.value_or(0.1), lambda_max.value_or(0.4),
                                    repair_hours.value_or(6.0));
    }
};

int cmd_train(const std::string& dataset, const std::string& config_path,
              const std::string& out_dir, std::optional<std::uint64_t> seed,
              std::optional<int> window, const ReliabilityFlags& rel) {
    const std::string dir = resolve_dataset(dataset);
    const Network net = load_network(dir);

    RunSettings settings = config_path.empty() ? RunSettings{} : load_run_settings(config_path);
    if (seed) settings.train.seed = *seed;
    if (window) settings.curve_window = *window;
    rel.apply(settings);

    const ReliabilityModel model =
        assign_failure_rates(net, settings.lambda_min, settings.lambda_max, settings.repair_hours);
    const double scale = settings.train.reward_scale ? *settings.train.reward_scale
                                                     : default_reward_scale(net, model);
    settings.train.reward_scale = scale;

    std::filesystem::create_directories(out_dir);
    const std::string started = now_iso8601();

    std::cout << "training on " << net.name << " (" << net.bus_count() << " buses, "
              << net.branch_count() << " branches), " << settings.train.episodes
              << " episodes, seed " << settings.train.seed << "\n";

    EpisodeCsvWriter episode_writer(out_dir + "/episodes.csv");
    const int progress_every = std::max(1, settings.train.episodes / 10);
    auto observer = [&](const EpisodeRecord& rec, const QFunction&, const QFunction&) {
        episode_writer.write(rec);
        if ((rec.episode + 1) % progress_every == 0)
            std::cout << "episode " << rec.episode + 1 << ": reward " << format_real(rec.reward)
                      << ", epsilon " << format_real(rec.epsilon) << "\n";
    };

    const TrainResult result = train(net, model, settings.train, observer);
    write_curves_csv(out_dir + "/curves.csv", result.episodes, settings.curve_window);

    nlohmann::json best_json;
    try {
        const auto [cfg, acp] = best_configuration(result.episodes);
        int best_episode = -1;
        for (const auto& rec : result.episodes)
            if (rec.acp && *rec.acp == acp && rec.open_edges == cfg.open_edges)
                best_episode = rec.episode;
        best_json["found"] = true;
        best_json["open_edges"] = cfg.open_edges;
        best_json["acp_mwh_per_year"] = acp;
        best_json["episode"] = best_episode;
        std::cout << "best configuration: open {" << join_ids(cfg.open_edges, ',') << "}, acp "
                  << format_real(acp) << " MWh/yr (episode " << best_episode << ")\n";
    } catch (const NotFoundError&) {
        best_json["found"] = false;
        std::cout << "no feasible configuration was reached; best.json marks found=false\n";
    }
    write_json_file(out_dir + "/best.json", best_json);

    nlohmann::json manifest;
    manifest["command"] = "train";
    manifest["dataset"] = dataset;
    manifest["dataset_path"] = dir;
    manifest["started_at"] = started;
    manifest["finished_at"] = now_iso8601();
    manifest["settings"] = settings_to_json(settings, scale);
    manifest["artifacts"] = {{"episodes", "episodes.csv"},
                             {"curves", "curves.csv"},
                             {"best", "best.json"}};
    write_json_file(out_dir + "/manifest.json", manifest);

    std::cout << "artifacts written to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& dataset, const std::string& open_list, bool as_json,
                 const ReliabilityFlags& rel) {
    const std::string dir = resolve_dataset(dataset);
    const Network net = load_network(dir);
    const ReliabilityModel model = rel.build(net);

    const Configuration cfg(parse_open_list(open_list));
    validate_configuration(net, cfg);
    const RewardOutcome outcome = terminal_reward(net, model, cfg, EnvParams{});

    // Verdicts are computed independently per constraint; `violated` names the
    // first one tripped in evaluation order (traversal before radiality).
    const bool traversing = all_nodes_traversed(net, cfg);
    const bool radial = is_radial(net, cfg);
    const char* violated = outcome.violated == Violation::traversal   ? "traversal"
                           : outcome.violated == Violation::radiality ? "radiality"
                                                                      : nullptr;
    if (as_json) {
        nlohmann::json j;
        j["dataset"] = net.name;
        j["open_edges"] = cfg.open_edges;
        j["constraints"] = {{"all_node_traversing", traversing}, {"radiality", radial}};
        j["feasible"] = outcome.feasible;
        j["violated"] = violated ? nlohmann::json(violated) : nlohmann::json(nullptr);
        j["acp_mwh_per_year"] = outcome.acp ? nlohmann::json(*outcome.acp) : nlohmann::json(nullptr);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "dataset: " << net.name << " (" << net.bus_count() << " buses, "
                  << net.branch_count() << " branches)\n";
        std::cout << "open edges: " << join_ids(cfg.open_edges, ',') << "\n";
        std::cout << "all-node-traversing: " << (traversing ? "satisfied" : "violated") << "\n";
        std::cout << "radiality: " << (radial ? "satisfied" : "violated") << "\n";
        if (outcome.feasible) {
            std::cout << "feasible: yes\n";
            std::cout << "acp: " << format_real(*outcome.acp) << " MWh/yr\n";
        } else {
            std::cout << "feasible: no (" << violated << " constraint violated)\n";
        }
    }
    return 0;
}

int cmd_enumerate(const std::string& dataset, int top_k, int workers, const std::string& out_path,
                  const ReliabilityFlags& rel) {
    const std::string dir = resolve_dataset(dataset);
    const Network net = load_network(dir);
    const ReliabilityModel model = rel.build(net);

    std::cout << "enumerating all " << net.tie_count() << "-subsets of " << net.branch_count()
              << " branches on " << net.name << " with " << workers << " worker(s)\n";
    const EnumerationReport report = enumerate_optimal(net, model, top_k, workers);

    std::cout << "combinations: " << report.total_combinations << ", feasible: "
              << report.feasible_count << ", wall time: " << format_real(report.wall_time_seconds)
              << " s\n";
    std::cout << "optimal: open {" << join_ids(report.best.open_edges, ',') << "}, acp "
              << format_real(report.best.acp) << " MWh/yr\n";
    for (size_t i = 0; i < report.top.size(); ++i)
        std::cout << "  #" << i + 1 << "  {" << join_ids(report.top[i].open_edges, ',') << "}  "
                  << format_real(report.top[i].acp) << "\n";

    write_json_file(out_path, report_to_json(report, net.name));
    std::cout << "report written to " << out_path << "\n";
    return 0;
}

int cmd_compare(const std::string& run_dir, const std::string& oracle_path) {
    const nlohmann::json best = load_json_file(run_dir + "/best.json");
    if (!best.value("found", false)) {
        std::cerr << "error: " << run_dir << "/best.json has no feasible configuration\n";
        return 1;
    }
    const std::vector<int> run_open = best.at("open_edges").get<std::vector<int>>();
    const double run_acp = best.at("acp_mwh_per_year").get<double>();

    const EnumerationReport oracle = report_from_json(load_json_file(oracle_path));
    const double gap = (run_acp - oracle.best.acp) / oracle.best.acp;
    const bool same_set = run_open == oracle.best.open_edges;

    std::cout << "run:    open {" << join_ids(run_open, ',') << "}, acp " << format_real(run_acp)
              << " MWh/yr\n";
    std::cout << "oracle: open {" << join_ids(oracle.best.open_edges, ',') << "}, acp "
              << format_real(oracle.best.acp) << " MWh/yr\n";
    std::cout << "acp gap: " << format_real(gap * 100.0) << " %\n";
    std::cout << "same open set: " << (same_set ? "yes" : "no") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reconfiguration tool for radial distribution networks"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a Q-learning agent");
    std::string train_dataset, train_config, train_out;
    std::optional<std::uint64_t> train_seed;
    std::optional<int> train_window;
    ReliabilityFlags train_rel;
    train_cmd->add_option("--dataset", train_dataset, "33, 69, or a dataset directory")->required();
    train_cmd->add_option("--config", train_config, "training config JSON");
    train_cmd->add_option("--out", train_out, "output directory for run artifacts")->required();
    train_cmd->add_option("--seed", train_seed, "RNG seed (overrides the config)");
    train_cmd->add_option("--window", train_window, "running-mean window for curves.csv");
    train_rel.attach(train_cmd);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate one open-edge set");
    std::string eval_dataset, eval_open;
    bool eval_json = false;
    ReliabilityFlags eval_rel;
    eval_cmd->add_option("--dataset", eval_dataset, "33, 69, or a dataset directory")->required();
    eval_cmd->add_option("--open", eval_open, "comma-separated open branch ids")->required();
    eval_cmd->add_flag("--json", eval_json, "print a JSON object instead of text");
    eval_rel.attach(eval_cmd);

    // enumerate
    auto* enum_cmd = app.add_subcommand("enumerate", "exhaustively rank all open sets");
    std::string enum_dataset, enum_out;
    int enum_top_k = 10;
    int enum_workers = 1;
    ReliabilityFlags enum_rel;
    enum_cmd->add_option("--dataset", enum_dataset, "33, 69, or a dataset directory")->required();
    enum_cmd->add_option("--top-k", enum_top_k, "feasible configurations to keep");
    enum_cmd->add_option("--workers", enum_workers, "worker threads");
    enum_cmd->add_option("--out", enum_out, "report JSON path")->required();
    enum_rel.attach(enum_cmd);

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "compare a training run against a report");
    std::string cmp_run, cmp_oracle;
    cmp_cmd->add_option("--run", cmp_run, "training run directory")->required();
    cmp_cmd->add_option("--oracle", cmp_oracle, "enumeration report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd)
            return cmd_train(train_dataset, train_config, train_out, train_seed, train_window,
                             train_rel);
        if (*eval_cmd) return cmd_evaluate(eval_dataset, eval_open, eval_json, eval_rel);
        if (*enum_cmd)
            return cmd_enumerate(enum_dataset, enum_top_k, enum_workers, enum_out, enum_rel);
        if (*cmp_cmd) return cmd_compare(cmp_run, cmp_oracle);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
