#pragma once
// Run artifacts: the training config file, episode log, learning curves,
// best-configuration summary, enumeration reports, and the run manifest.
// All floating-point text goes through format_real so values round-trip.

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridconf/dqn.hpp"
#include "gridconf/errors.hpp"
#include "gridconf/oracle.hpp"

namespace gridconf {

/// Shortest exact decimal form of a double (17 significant digits).
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join_ids(const std::vector<int>& ids, char sep = ';') {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out.push_back(sep);
        out += std::to_string(ids[i]);
    }
    return out;
}

inline std::string now_iso8601() {
    std::time_t t = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

/// Everything a training run needs beyond the dataset itself.
struct RunSettings {
    TrainConfig train;
    double lambda_min = 0.1;
    double lambda_max = 0.4;
    double repair_hours = 6.0;
    int curve_window = 100;
};

inline RunSettings parse_run_settings(const nlohmann::json& j, const std::string& origin) {
    if (!j.is_object()) throw ParseError(origin + ": config root must be a JSON object");
    RunSettings s;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "episodes") {
                s.train.episodes = value.get<int>();
            } else if (key == "alpha") {
                s.train.alpha = value.get<double>();
            } else if (key == "gamma") {
                s.train.gamma = value.get<double>();
            } else if (key == "epsilon_min") {
                s.train.epsilon_min = value.get<double>();
            } else if (key == "hidden") {
                s.train.hidden = value.get<std::vector<int>>();
            } else if (key == "sync_interval") {
                s.train.sync_interval = value.get<int>();
            } else if (key == "seed") {
                s.train.seed = value.get<std::uint64_t>();
            } else if (key == "penalty") {
                s.train.penalty = value.get<double>();
            } else if (key == "reward_scale") {
                if (value.is_null())
                    s.train.reward_scale.reset();
                else
                    s.train.reward_scale = value.get<double>();
            } else if (key == "target_sign") {
                s.train.target_sign = value.get<int>();
            } else if (key == "activation") {
                s.train.activation = activation_from_string(value.get<std::string>());
            } else if (key == "leak") {
                s.train.leak = value.get<double>();
            } else if (key == "lambda_min") {
                s.lambda_min = value.get<double>();
            } else if (key == "lambda_max") {
                s.lambda_max = value.get<double>();
            } else if (key == "repair_hours") {
                s.repair_hours = value.get<double>();
            } else if (key == "curve_window") {
                s.curve_window = value.get<int>();
            } else {
                throw ParseError(origin + ": unknown config key '" + key + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(origin + ": bad value for '" + key + "': " + e.what());
        }
    }
    if (s.curve_window < 1) throw ParseError(origin + ": curve_window must be >= 1");
    s.train.validate();
    return s;
}

inline RunSettings load_run_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return parse_run_settings(j, path);
}

/// Fully resolved settings as JSON for the run manifest.
inline nlohmann::json settings_to_json(const RunSettings& s, double resolved_reward_scale) {
    nlohmann::json j;
    j["episodes"] = s.train.episodes;
    j["alpha"] = s.train.alpha;
    j["gamma"] = s.train.gamma;
    j["epsilon_min"] = s.train.epsilon_min;
    j["hidden"] = s.train.hidden;
    j["sync_interval"] = s.train.sync_interval;
    j["seed"] = s.train.seed;
    j["penalty"] = s.train.penalty;
    j["reward_scale"] = resolved_reward_scale;
    j["target_sign"] = s.train.target_sign;
    j["activation"] = to_string(s.train.activation);
    j["leak"] = s.train.leak;
    j["lambda_min"] = s.lambda_min;
    j["lambda_max"] = s.lambda_max;
    j["repair_hours"] = s.repair_hours;
    j["curve_window"] = s.curve_window;
    return j;
}

/// Streams one CSV row per episode, flushed per line so partial runs keep
/// everything written so far.
class EpisodeCsvWriter {
public:
    explicit EpisodeCsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw NotFoundError("cannot open '" + path + "' for writing");
        out_ << "episode,reward,mse_loss,acp,epsilon,open_set\n";
        out_.flush();
    }

    void write(const EpisodeRecord& rec) {
        out_ << rec.episode << ',' << format_real(rec.reward) << ',' << format_real(rec.mse) << ',';
        if (rec.acp) out_ << format_real(*rec.acp);
        out_ << ',' << format_real(rec.epsilon) << ',' << join_ids(rec.open_edges) << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

inline void write_episodes_csv(const std::string& path, const std::vector<EpisodeRecord>& records) {
    EpisodeCsvWriter w(path);
    for (const auto& rec : records) w.write(rec);
}

/// Trailing-window running means. The ACP column averages only the feasible
/// episodes in the window and stays empty while there are none.
inline void write_curves_csv(const std::string& path, const std::vector<EpisodeRecord>& records,
                             int window) {
    if (window < 1) throw ValidationError("window must be >= 1");
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot open '" + path + "' for writing");
    out << "episode,reward_mean,mse_loss_mean,acp_mean\n";
    double reward_sum = 0.0, mse_sum = 0.0, acp_sum = 0.0;
    int acp_n = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        reward_sum += records[i].reward;
        mse_sum += records[i].mse;
        if (records[i].acp) {
            acp_sum += *records[i].acp;
            ++acp_n;
        }
        if (i >= static_cast<size_t>(window)) {
            const auto& old = records[i - static_cast<size_t>(window)];
            reward_sum -= old.reward;
            mse_sum -= old.mse;
            if (old.acp) {
                acp_sum -= *old.acp;
                --acp_n;
            }
        }
        const int n = static_cast<int>(std::min(i + 1, static_cast<size_t>(window)));
        out << records[i].episode << ',' << format_real(reward_sum / n) << ','
            << format_real(mse_sum / n) << ',';
        if (acp_n > 0) out << format_real(acp_sum / acp_n);
        out << '\n';
    }
}

inline nlohmann::json ranked_to_json(const RankedConfiguration& rc) {
    return {{"open_edges", rc.open_edges}, {"acp_mwh_per_year", rc.acp}};
}

inline RankedConfiguration ranked_from_json(const nlohmann::json& j) {
    RankedConfiguration rc;
    rc.open_edges = j.at("open_edges").get<std::vector<int>>();
    rc.acp = j.at("acp_mwh_per_year").get<double>();
    return rc;
}

inline nlohmann::json report_to_json(const EnumerationReport& report, const std::string& dataset) {
    nlohmann::json j;
    j["dataset"] = dataset;
    j["total_combinations"] = report.total_combinations;
    j["feasible_count"] = report.feasible_count;
    j["top_k"] = report.top_k;
    j["workers"] = report.workers;
    j["wall_time_seconds"] = report.wall_time_seconds;
    j["best"] = ranked_to_json(report.best);
    auto& top = j["top"] = nlohmann::json::array();
    for (const auto& rc : report.top) top.push_back(ranked_to_json(rc));
    return j;
}

inline EnumerationReport report_from_json(const nlohmann::json& j) {
    EnumerationReport report;
    report.total_combinations = j.at("total_combinations").get<std::uint64_t>();
    report.feasible_count = j.at("feasible_count").get<std::uint64_t>();
    report.top_k = j.at("top_k").get<int>();
    report.workers = j.at("workers").get<int>();
    report.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    report.best = ranked_from_json(j.at("best"));
    for (const auto& item : j.at("top")) report.top.push_back(ranked_from_json(item));
    return report;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

}  // namespace gridconf
