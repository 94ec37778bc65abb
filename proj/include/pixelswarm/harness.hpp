#pragma once

// Experiment sweeps, per-run artifacts, and offline aggregation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "engine.hpp"

namespace pixelswarm {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kCsvHeader =
    "tick,deciders,mean_nll,mean_competence,oracle_calls,stage,chosen_arm,reward,moves_completed,solved";

// ---------------------------------------------------------------- config I/O

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(known.begin(), known.end(), [&key](const char* k) { return key == k; }))
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

inline double read_theta(const json& v) {
    if (v.is_null() || (v.is_string() && (v == "inf" || v == "+inf" || v == "infinity")))
        return VerifierConfig::kAlwaysEscalate;
    if (!v.is_number()) throw std::invalid_argument("verifier.theta must be a number or \"inf\"");
    return v.get<double>();
}

inline json theta_json(double theta) { return std::isinf(theta) ? json("inf") : json(theta); }

}  // namespace detail

/// Applies the keys present in `j` on top of `cfg`. Unknown keys are errors.
inline EngineConfig config_from_json(const json& j, EngineConfig cfg = {}) {
    using detail::read;
    detail::reject_unknown(j,
                           {"ticks", "tick_rate_hz", "seed", "ablation", "algorithm", "advancement", "num_disks",
                            "map_mode", "early_stop", "oracle_max_retries", "snapshot_ticks", "grid", "composer",
                            "verifier", "stages", "reward", "backend", "bandit"},
                           "config");
    read(j, "ticks", cfg.ticks);
    read(j, "tick_rate_hz", cfg.tick_rate_hz);
    read(j, "seed", cfg.seed);
    read(j, "num_disks", cfg.num_disks);
    read(j, "early_stop", cfg.early_stop);
    read(j, "oracle_max_retries", cfg.oracle_max_retries);
    read(j, "snapshot_ticks", cfg.snapshot_ticks);
    if (j.contains("ablation")) cfg.ablation = parse_ablation(j.at("ablation").get<std::string>());
    if (j.contains("algorithm")) cfg.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("map_mode")) {
        const auto m = j.at("map_mode").get<std::string>();
        if (m == "banded_spiral") cfg.map_mode = MapMode::BandedSpiral;
        else if (m == "integer_spiral") cfg.map_mode = MapMode::IntegerSpiral;
        else throw std::invalid_argument("config: map_mode must be banded_spiral or integer_spiral");
    }
    if (const auto it = j.find("advancement"); it != j.end()) {
        detail::reject_unknown(*it, {"mode", "interval"}, "advancement");
        if (it->contains("mode")) {
            const auto m = it->at("mode").get<std::string>();
            if (m == "performance") cfg.advancement.mode = AdvanceMode::Performance;
            else if (m == "fixed_time") cfg.advancement.mode = AdvanceMode::FixedTime;
            else throw std::invalid_argument("advancement.mode must be performance or fixed_time");
        }
        read(*it, "interval", cfg.advancement.interval);
    }
    if (const auto it = j.find("grid"); it != j.end()) {
        detail::reject_unknown(*it, {"size_g", "eta", "eta_oracle", "alpha_pity", "initial_competence"}, "grid");
        read(*it, "size_g", cfg.grid.size_g);
        read(*it, "eta", cfg.grid.eta);
        read(*it, "eta_oracle", cfg.grid.eta_oracle);
        read(*it, "alpha_pity", cfg.grid.alpha_pity);
        read(*it, "initial_competence", cfg.grid.initial_competence);
        cfg.verifier.alpha_pity = cfg.grid.alpha_pity;
    }
    if (const auto it = j.find("composer"); it != j.end()) {
        detail::reject_unknown(*it, {"window_radius", "tau_green"}, "composer");
        read(*it, "window_radius", cfg.composer.window_radius);
        read(*it, "tau_green", cfg.composer.tau_green);
    }
    if (const auto it = j.find("verifier"); it != j.end()) {
        detail::reject_unknown(*it, {"gamma", "theta"}, "verifier");
        read(*it, "gamma", cfg.verifier.gamma);
        if (it->contains("theta")) cfg.verifier.theta = detail::read_theta(it->at("theta"));
    }
    if (const auto it = j.find("stages"); it != j.end()) {
        detail::reject_unknown(*it, {"tau", "table"}, "stages");
        if (const auto t = it->find("table"); t != it->end()) {
            std::vector<Stage> rows;
            for (const auto& r : *t) {
                detail::reject_unknown(r, {"index", "radius", "reach", "first_move", "last_move", "tau", "label"},
                                       "stages.table");
                Stage s;
                read(r, "index", s.index);
                read(r, "radius", s.radius);
                s.reach = s.radius;
                read(r, "reach", s.reach);
                read(r, "first_move", s.first_move);
                read(r, "last_move", s.last_move);
                read(r, "tau", s.tau);
                read(r, "label", s.label);
                rows.push_back(s);
            }
            cfg.stages = StageTable(std::move(rows));
        }
        if (it->contains("tau")) cfg.stages.set_tau(it->at("tau").get<double>());
    }
    if (const auto it = j.find("reward"); it != j.end()) {
        detail::reject_unknown(*it,
                               {"w_c", "w_n", "alpha_r", "beta_r", "lambda_r", "alpha_o", "beta_o", "gamma_o", "form"},
                               "reward");
        read(*it, "w_c", cfg.reward.w_c);
        read(*it, "w_n", cfg.reward.w_n);
        read(*it, "alpha_r", cfg.reward.alpha_r);
        read(*it, "beta_r", cfg.reward.beta_r);
        read(*it, "lambda_r", cfg.reward.lambda_r);
        read(*it, "alpha_o", cfg.reward.alpha_o);
        read(*it, "beta_o", cfg.reward.beta_o);
        read(*it, "gamma_o", cfg.reward.gamma_o);
        if (it->contains("form")) {
            const auto f = it->at("form").get<std::string>();
            if (f == "convex") cfg.reward.form = RewardForm::Convex;
            else if (f == "penalized") cfg.reward.form = RewardForm::Penalized;
            else throw std::invalid_argument("reward.form must be convex or penalized");
        }
    }
    if (const auto it = j.find("backend"); it != j.end()) {
        detail::reject_unknown(*it, {"w_comp", "w_ease", "floor", "ceiling", "miscalibration", "oracle_boost", "epsilon"},
                               "backend");
        read(*it, "w_comp", cfg.backend.w_comp);
        read(*it, "w_ease", cfg.backend.w_ease);
        read(*it, "floor", cfg.backend.floor);
        read(*it, "ceiling", cfg.backend.ceiling);
        read(*it, "miscalibration", cfg.backend.miscalibration);
        read(*it, "oracle_boost", cfg.backend.oracle_boost);
        read(*it, "epsilon", cfg.backend.epsilon);
    }
    if (const auto it = j.find("bandit"); it != j.end()) {
        detail::reject_unknown(*it, {"num_arms", "alpha0", "beta0", "epsilon"}, "bandit");
        read(*it, "num_arms", cfg.bandit.num_arms);
        read(*it, "alpha0", cfg.bandit.alpha0);
        read(*it, "beta0", cfg.bandit.beta0);
        read(*it, "epsilon", cfg.bandit.epsilon);
    }
    return cfg;
}

inline json config_to_json(const EngineConfig& c) {
    json stages = json::array();
    for (const auto& s : c.stages.stages())
        stages.push_back({{"index", s.index},
                          {"radius", s.radius},
                          {"reach", s.reach},
                          {"first_move", s.first_move},
                          {"last_move", s.last_move},
                          {"tau", s.tau},
                          {"label", s.label}});
    return {
        {"ticks", c.ticks},
        {"tick_rate_hz", c.tick_rate_hz},
        {"seed", c.seed},
        {"ablation", to_string(c.ablation)},
        {"algorithm", to_string(c.algorithm)},
        {"advancement", {{"mode", to_string(c.advancement.mode)}, {"interval", c.advancement.interval}}},
        {"num_disks", c.num_disks},
        {"map_mode", to_string(c.map_mode)},
        {"early_stop", c.early_stop},
        {"oracle_max_retries", c.oracle_max_retries},
        {"snapshot_ticks", c.snapshot_ticks},
        {"grid",
         {{"size_g", c.grid.size_g},
          {"eta", c.grid.eta},
          {"eta_oracle", c.grid.eta_oracle},
          {"alpha_pity", c.grid.alpha_pity},
          {"initial_competence", c.grid.initial_competence}}},
        {"composer", {{"window_radius", c.composer.window_radius}, {"tau_green", c.composer.tau_green}}},
        {"verifier", {{"gamma", c.verifier.gamma}, {"theta", detail::theta_json(c.verifier.theta)}}},
        {"stages", {{"table", stages}}},
        {"reward",
         {{"w_c", c.reward.w_c},
          {"w_n", c.reward.w_n},
          {"alpha_r", c.reward.alpha_r},
          {"beta_r", c.reward.beta_r},
          {"lambda_r", c.reward.lambda_r},
          {"alpha_o", c.reward.alpha_o},
          {"beta_o", c.reward.beta_o},
          {"gamma_o", c.reward.gamma_o},
          {"form", c.reward.form == RewardForm::Convex ? "convex" : "penalized"}}},
        {"backend",
         {{"w_comp", c.backend.w_comp},
          {"w_ease", c.backend.w_ease},
          {"floor", c.backend.floor},
          {"ceiling", c.backend.ceiling},
          {"miscalibration", c.backend.miscalibration},
          {"oracle_boost", c.backend.oracle_boost},
          {"epsilon", c.backend.epsilon}}},
        {"bandit",
         {{"num_arms", c.bandit.num_arms},
          {"alpha0", c.bandit.alpha0},
          {"beta0", c.bandit.beta0},
          {"epsilon", c.bandit.epsilon}}},
    };
}

inline json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------- CSV

inline std::string format_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string metrics_csv(const std::vector<TickMetrics>& metrics) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& m : metrics) {
        out += std::to_string(m.tick) + ',' + std::to_string(m.deciders) + ',' +
               (m.mean_nll ? format_float(*m.mean_nll) : std::string()) + ',' + format_float(m.mean_competence) +
               ',' + std::to_string(m.oracle_calls) + ',' + std::to_string(m.stage) + ',' +
               std::to_string(m.chosen_arm) + ',' + format_float(m.reward) + ',' + std::to_string(m.moves_completed) +
               ',' + (m.solved ? "1" : "0") + '\n';
    }
    return out;
}

inline void export_csv(const RunResult& result, const fs::path& path) { write_text_file(path, metrics_csv(result.metrics)); }

/// Parsed back from a metrics CSV; only the columns aggregation needs.
struct CsvRun {
    std::vector<int> chosen_arm;
    std::vector<std::int64_t> oracle_calls;
};

inline CsvRun read_metrics_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument(path.string() + ": unexpected header");
    CsvRun run;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (!line.empty() && line.back() == ',') cols.emplace_back();
        if (cols.size() != 10) throw std::invalid_argument(path.string() + ": malformed row '" + line + "'");
        run.oracle_calls.push_back(std::stoll(cols[4]));
        run.chosen_arm.push_back(std::stoi(cols[6]));
    }
    return run;
}

// ---------------------------------------------------------------- experiments

struct ExperimentSpec {
    std::string name = "default";
    std::vector<Algorithm> algorithms{Algorithm::TS, Algorithm::UCB1, Algorithm::EpsGreedy};
    std::vector<Ablation> ablations{Ablation::NllCurriculum, Ablation::CurriculumOnly, Ablation::BaseRL};
    std::vector<std::uint64_t> seeds;
    std::int64_t ticks = 2000;
    std::vector<std::int64_t> snapshot_ticks{200, 800, 1400, 1999};
    int regret_samples = 10'000;
    int jobs = 0;  // 0 = hardware concurrency
    EngineConfig base;

    ExperimentSpec() {
        for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
        base.early_stop = false;
    }

    void validate() const {
        if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..")
            throw std::invalid_argument("ExperimentSpec: name must be a plain directory name");
        if (algorithms.empty()) throw std::invalid_argument("ExperimentSpec: need at least one algorithm");
        if (ablations.empty()) throw std::invalid_argument("ExperimentSpec: need at least one ablation");
        if (seeds.empty()) throw std::invalid_argument("ExperimentSpec: need at least one seed");
        if (std::set(seeds.begin(), seeds.end()).size() != seeds.size())
            throw std::invalid_argument("ExperimentSpec: duplicate seeds");
        if (std::set(algorithms.begin(), algorithms.end()).size() != algorithms.size())
            throw std::invalid_argument("ExperimentSpec: duplicate algorithms");
        if (std::set(ablations.begin(), ablations.end()).size() != ablations.size())
            throw std::invalid_argument("ExperimentSpec: duplicate ablations");
        if (ticks < 1) throw std::invalid_argument("ExperimentSpec: ticks must be >= 1");
        if (regret_samples < 1) throw std::invalid_argument("ExperimentSpec: regret_samples must be >= 1");
        if (jobs < 0) throw std::invalid_argument("ExperimentSpec: jobs must be >= 0");
        cell_config(algorithms.front(), ablations.front(), seeds.front()).validate();
    }

    EngineConfig cell_config(Algorithm algo, Ablation abl, std::uint64_t seed) const {
        EngineConfig c = base;
        c.algorithm = algo;
        c.ablation = abl;
        c.seed = seed;
        c.ticks = ticks;
        c.snapshot_ticks = snapshot_ticks;
        return c;
    }
};

inline ExperimentSpec spec_from_json(const json& j) {
    detail::reject_unknown(j, {"name", "algorithms", "ablations", "seeds", "ticks", "snapshot_ticks", "regret_samples",
                               "jobs", "config"},
                           "experiment spec");
    ExperimentSpec s;
    detail::read(j, "name", s.name);
    if (j.contains("algorithms")) {
        s.algorithms.clear();
        for (const auto& a : j.at("algorithms")) s.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("ablations")) {
        s.ablations.clear();
        for (const auto& a : j.at("ablations")) s.ablations.push_back(parse_ablation(a.get<std::string>()));
    }
    detail::read(j, "seeds", s.seeds);
    detail::read(j, "ticks", s.ticks);
    detail::read(j, "snapshot_ticks", s.snapshot_ticks);
    detail::read(j, "regret_samples", s.regret_samples);
    detail::read(j, "jobs", s.jobs);
    if (j.contains("config")) s.base = config_from_json(j.at("config"), s.base);
    s.validate();
    return s;
}

inline std::string cell_name(Algorithm a, Ablation b) {
    return std::string(to_string(a)) + "-" + std::string(to_string(b));
}

inline std::string arm_label(int arm, int num_stages) {
    return "arm " + std::to_string(arm) + " → Stage " + std::to_string(arm_to_stage(arm, num_stages));
}

/// Everything about a run that is not in the CSV.
inline json run_sidecar(const EngineConfig& cfg, const RunResult& r, const std::vector<double>& true_means) {
    json stage_entry = json::object();
    for (const auto& [s, t] : r.stage_entry_ticks) stage_entry[std::to_string(s)] = t;
    json values = json::array();
    const int k = std::visit([](const auto& b) { return b.num_arms(); }, r.final_bandit);
    for (int a = 0; a < k; ++a) values.push_back(bandit_value(r.final_bandit, a));
    return {
        {"schema_version", kCsvSchemaVersion},
        {"columns", kCsvHeader},
        {"config", config_to_json(cfg)},
        {"ticks_run", static_cast<std::int64_t>(r.metrics.size())},
        {"stage_entry_ticks", stage_entry},
        {"move_completion_ticks", r.move_completion_ticks},
        {"solved_at", r.solved_at ? json(*r.solved_at) : json(nullptr)},
        {"oracle_total", r.oracle_total},
        {"true_means", true_means},
        {"true_means_method", "forced-arm one-tick reward on the tick-0 world"},
        {"arm_pulls", bandit_pulls(r.final_bandit)},
        {"arm_values", values},
        {"best_arm", best_arm(r.final_bandit)},
    };
}

struct CellFailure {
    std::string cell;
    std::uint64_t seed = 0;
    std::string error;
    bool invariant = false;
};

/// Runs one seed and writes its CSV and sidecar. Returns the posterior
/// snapshots for the cell's posteriors.json.
inline json run_cell_seed(const EngineConfig& cfg, int regret_samples, const fs::path& cell_dir) {
    Engine engine(cfg);
    const auto true_means = estimate_arm_means(engine, regret_samples);
    auto result = engine.run();
    const std::string stem = "seed-" + std::to_string(cfg.seed);
    export_csv(result, cell_dir / (stem + ".csv"));
    write_json_file(cell_dir / (stem + ".json"), run_sidecar(cfg, result, true_means));
    return result.posterior_snapshots;
}

// ---------------------------------------------------------------- aggregation

struct MeanCi {
    double mean = 0.0;
    std::optional<double> lo;
    std::optional<double> hi;
    std::size_t n = 0;
};

/// mean +- 1.96 * stderr; no interval for a single value.
inline MeanCi mean_ci(const std::vector<double>& xs) {
    MeanCi out;
    out.n = xs.size();
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
        out.lo = out.mean - 1.96 * se;
        out.hi = out.mean + 1.96 * se;
    }
    return out;
}

inline json to_json(const MeanCi& m) {
    return {{"mean", m.mean},
            {"ci95", m.lo ? json::array({*m.lo, *m.hi}) : json(nullptr)},
            {"n", m.n}};
}

inline json aggregate_cell(const fs::path& cell_dir) {
    std::vector<std::pair<std::uint64_t, fs::path>> runs;
    json failures = json::array();
    for (const auto& entry : fs::directory_iterator(cell_dir)) {
        const auto name = entry.path().filename().string();
        if (!name.starts_with("seed-")) continue;
        if (name.ends_with(".error.json")) {
            failures.push_back(read_json_file(entry.path()));
            continue;
        }
        if (entry.path().extension() != ".csv") continue;
        runs.emplace_back(std::stoull(name.substr(5)), entry.path());
    }
    std::sort(runs.begin(), runs.end());
    std::sort(failures.begin(), failures.end(),
              [](const json& a, const json& b) { return a.value("seed", 0ULL) < b.value("seed", 0ULL); });

    std::map<int, std::vector<double>> entry_ticks;
    std::map<int, json> censored;
    std::vector<std::vector<double>> regret_curves;
    std::vector<double> oracle_totals;
    std::vector<double> pulls_total;
    std::map<int, int> best_votes;
    int num_stages = 0;
    int num_arms = 0;
    json seeds = json::array();

    for (const auto& [seed, csv_path] : runs) {
        seeds.push_back(seed);
        auto side_path = csv_path;
        side_path.replace_extension(".json");
        const auto side = read_json_file(side_path);
        const auto csv = read_metrics_csv(csv_path);
        num_stages = static_cast<int>(side.at("config").at("stages").at("table").size());
        const auto true_means = side.at("true_means").get<std::vector<double>>();
        num_arms = static_cast<int>(true_means.size());

        const auto& entries = side.at("stage_entry_ticks");
        const auto ticks_run = side.at("ticks_run").get<std::int64_t>();
        for (int s = 1; s <= num_stages; ++s) {
            const auto key = std::to_string(s);
            if (entries.contains(key)) {
                entry_ticks[s].push_back(entries.at(key).get<double>());
            } else {
                censored[s].push_back({{"seed", seed}, {"censored_at", ticks_run}});
            }
        }
        regret_curves.push_back(cumulative_regret(csv.chosen_arm, true_means));
        std::int64_t oracle = 0;
        for (auto o : csv.oracle_calls) oracle += o;
        oracle_totals.push_back(static_cast<double>(oracle));
        pulls_total.resize(static_cast<std::size_t>(num_arms), 0.0);
        for (int a : csv.chosen_arm) pulls_total[static_cast<std::size_t>(a)] += 1.0;
        best_votes[side.at("best_arm").get<int>()] += 1;
    }

    json cell = {{"seeds", seeds}, {"failures", failures}};
    if (runs.empty()) return cell;

    json stages = json::object();
    for (int s = 1; s <= num_stages; ++s) {
        stages[std::to_string(s)] = {{"entry_tick", to_json(mean_ci(entry_ticks[s]))},
                                     {"censored", censored.count(s) ? censored[s] : json::array()}};
    }
    cell["stage_entry"] = stages;

    std::size_t longest = 0;
    for (const auto& c : regret_curves) longest = std::max(longest, c.size());
    json mean_curve = json::array();
    json lo_curve = json::array();
    json hi_curve = json::array();
    json n_curve = json::array();
    for (std::size_t t = 0; t < longest; ++t) {
        std::vector<double> xs;
        for (const auto& c : regret_curves)
            if (t < c.size()) xs.push_back(c[t]);
        const auto m = mean_ci(xs);
        mean_curve.push_back(m.mean);
        lo_curve.push_back(m.lo ? json(*m.lo) : json(nullptr));
        hi_curve.push_back(m.hi ? json(*m.hi) : json(nullptr));
        n_curve.push_back(m.n);
    }
    cell["regret"] = {{"mean", mean_curve}, {"ci95_low", lo_curve}, {"ci95_high", hi_curve}, {"n", n_curve}};
    cell["oracle_calls"] = to_json(mean_ci(oracle_totals));

    int best = 0;
    int votes = -1;
    for (const auto& [arm, v] : best_votes)
        if (v > votes) {
            best = arm;
            votes = v;
        }
    double total = 0.0;
    for (double p : pulls_total) total += p;
    cell["best_arm"] = {{"arm", best},
                        {"label", arm_label(best, num_stages)},
                        {"seeds_agreeing", votes},
                        {"selection_frequency", total > 0 ? pulls_total[static_cast<std::size_t>(best)] / total : 0.0}};
    return cell;
}

/// Rebuilds summary.json content from the files under an experiment dir.
inline json aggregate(const fs::path& experiment_dir) {
    if (!fs::is_directory(experiment_dir)) throw std::runtime_error("not a directory: " + experiment_dir.string());
    std::vector<fs::path> cells;
    for (const auto& entry : fs::directory_iterator(experiment_dir))
        if (entry.is_directory()) cells.push_back(entry.path());
    std::sort(cells.begin(), cells.end());
    json out = {{"schema_version", kCsvSchemaVersion},
                {"ci_method", "normal approximation: mean +/- 1.96 * stderr over seeds"},
                {"regret_definition", "pseudo-regret against Monte Carlo arm means of the tick-0 world"},
                {"cells", json::object()}};
    for (const auto& c : cells) out["cells"][c.filename().string()] = aggregate_cell(c);
    return out;
}

struct ExperimentOutcome {
    json summary;
    std::vector<CellFailure> failures;

    int exit_code() const {
        if (failures.empty()) return 0;
        for (const auto& f : failures)
            if (f.invariant) return 3;
        return 2;
    }
};

inline ExperimentOutcome run_experiment(const ExperimentSpec& spec, const fs::path& out_root) {
    spec.validate();
    const fs::path exp_dir = out_root / spec.name;
    fs::create_directories(exp_dir);

    struct Job {
        Algorithm algo;
        Ablation abl;
        std::uint64_t seed;
        std::size_t cell;
    };
    std::vector<Job> jobs;
    std::vector<std::pair<Algorithm, Ablation>> cells;
    for (auto a : spec.algorithms)
        for (auto b : spec.ablations) {
            cells.emplace_back(a, b);
            fs::create_directories(exp_dir / cell_name(a, b));
            for (auto s : spec.seeds) jobs.push_back({a, b, s, cells.size() - 1});
        }

    std::vector<json> snapshots(jobs.size());
    std::vector<std::optional<CellFailure>> failed(jobs.size());
    std::mutex mu;
    std::size_t next = 0;
    const auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mu);
                if (next >= jobs.size()) return;
                i = next++;
            }
            const auto& job = jobs[i];
            const auto dir = exp_dir / cell_name(job.algo, job.abl);
            try {
                snapshots[i] = run_cell_seed(spec.cell_config(job.algo, job.abl, job.seed), spec.regret_samples, dir);
            } catch (const std::exception& e) {
                const bool invariant = dynamic_cast<const InvariantViolation*>(&e) != nullptr;
                failed[i] = CellFailure{cell_name(job.algo, job.abl), job.seed, e.what(), invariant};
                write_json_file(dir / ("seed-" + std::to_string(job.seed) + ".error.json"),
                                {{"seed", job.seed}, {"error", e.what()}, {"invariant_violation", invariant}});
            }
        }
    };
    unsigned n_threads = spec.jobs > 0 ? static_cast<unsigned>(spec.jobs) : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    ExperimentOutcome outcome;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].first != Algorithm::TS) continue;
        json per_seed = json::object();
        for (std::size_t i = 0; i < jobs.size(); ++i)
            if (jobs[i].cell == c && !failed[i]) per_seed[std::to_string(jobs[i].seed)] = snapshots[i];
        write_json_file(exp_dir / cell_name(cells[c].first, cells[c].second) / "posteriors.json",
                        {{"snapshot_ticks", spec.snapshot_ticks}, {"seeds", per_seed}});
    }
    for (auto& f : failed)
        if (f) outcome.failures.push_back(*f);
    outcome.summary = aggregate(exp_dir);
    write_json_file(exp_dir / "summary.json", outcome.summary);
    return outcome;
}

}  // namespace pixelswarm
