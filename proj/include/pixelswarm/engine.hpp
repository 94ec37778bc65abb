#pragma once

// Closed-loop tick engine: assignment, local decisions, verifier gate,
// oracle resolution, region reward and bandit update, stage gating, Composer.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bandit.hpp"
#include "curriculum.hpp"
#include "decision.hpp"
#include "grid.hpp"
#include "hanoi.hpp"
#include "placement.hpp"
#include "remote_oracle.hpp"
#include "rng.hpp"
#include "stage_table.hpp"
#include "verifier.hpp"

namespace pixelswarm {

/// The Composer produced an illegal puzzle move, or some other state the
/// engine guarantees can never happen did.
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Ablation { NllCurriculum, CurriculumOnly, BaseRL };

inline std::string_view to_string(Ablation a) {
    switch (a) {
        case Ablation::NllCurriculum: return "nll";
        case Ablation::CurriculumOnly: return "curriculum";
        case Ablation::BaseRL: return "base";
    }
    return "?";
}

inline Ablation parse_ablation(std::string_view s) {
    if (s == "nll") return Ablation::NllCurriculum;
    if (s == "curriculum") return Ablation::CurriculumOnly;
    if (s == "base") return Ablation::BaseRL;
    throw std::invalid_argument("unknown ablation '" + std::string(s) + "' (expected nll|curriculum|base)");
}

struct EngineConfig {
    std::int64_t ticks = 2000;
    double tick_rate_hz = 20.0;  // recorded only; runs are logical time
    std::uint64_t seed = 0;
    Ablation ablation = Ablation::NllCurriculum;
    AdvancePolicy advancement;
    Algorithm algorithm = Algorithm::TS;
    int num_disks = 5;
    MapMode map_mode = MapMode::BandedSpiral;
    bool early_stop = true;
    int oracle_max_retries = 3;
    std::vector<std::int64_t> snapshot_ticks;

    GridConfig grid;
    ComposerConfig composer;
    VerifierConfig verifier;
    StageTable stages = StageTable::defaults();
    RewardWeights reward;
    SimBackendParams backend;
    BanditOptions bandit;

    void validate() const {
        if (ticks < 1) throw std::invalid_argument("EngineConfig: ticks must be >= 1");
        if (!(tick_rate_hz > 0.0)) throw std::invalid_argument("EngineConfig: tick_rate_hz must be > 0");
        if (num_disks < 1 || num_disks > 20) throw std::invalid_argument("EngineConfig: num_disks must be in 1..20");
        if (oracle_max_retries < 0) throw std::invalid_argument("EngineConfig: oracle_max_retries must be >= 0");
        if (advancement.mode == AdvanceMode::FixedTime && advancement.interval < 1)
            throw std::invalid_argument("EngineConfig: fixed-time interval must be >= 1");
        grid.validate();
        composer.validate();
        verifier.validate();
        stages.validate();
        reward.validate();
        backend.validate();
        if (verifier.alpha_pity != grid.alpha_pity)
            throw std::invalid_argument("EngineConfig: verifier and grid must share alpha_pity");
        if (stages.num_moves() != (1 << num_disks) - 1)
            throw std::invalid_argument("EngineConfig: stage table must cover exactly 2^n - 1 moves");
        if (bandit.num_arms < 1) throw std::invalid_argument("EngineConfig: need at least one arm");
        for (auto t : snapshot_ticks)
            if (t < 0) throw std::invalid_argument("EngineConfig: snapshot ticks must be >= 0");
    }
};

struct TickMetrics {
    std::int64_t tick = 0;
    std::int64_t deciders = 0;
    std::optional<double> mean_nll;
    double mean_competence = 0.0;
    std::int64_t oracle_calls = 0;
    int stage = 1;
    int chosen_arm = 0;
    double reward = 0.0;
    std::int64_t moves_completed = 0;
    bool solved = false;
};

struct RunResult {
    std::vector<TickMetrics> metrics;
    std::map<int, std::int64_t> stage_entry_ticks;
    std::vector<std::int64_t> move_completion_ticks;  // index k
    BanditState final_bandit = ThompsonSampling(1);
    std::optional<std::int64_t> solved_at;
    std::int64_t oracle_total = 0;
    nlohmann::json posterior_snapshots = nlohmann::json::array();

    std::vector<int> chosen_arms() const {
        std::vector<int> out;
        out.reserve(metrics.size());
        for (const auto& m : metrics) out.push_back(m.chosen_arm);
        return out;
    }
};

/// Resolves escalated agents. One entry per agent, same order; nullopt
/// leaves the agent waiting for the next tick.
class OracleBackend {
public:
    virtual ~OracleBackend() = default;
    virtual std::vector<std::optional<OracleVerdict>> resolve(const PixelGrid& grid, std::span<const std::size_t> agents,
                                                              std::int64_t tick) = 0;
};

class SimulatedOracle final : public OracleBackend {
public:
    SimulatedOracle(SimBackendParams params, std::uint64_t seed) : params_(params), seed_(seed) {}

    std::vector<std::optional<OracleVerdict>> resolve(const PixelGrid& grid, std::span<const std::size_t> agents,
                                                      std::int64_t tick) override {
        std::vector<std::optional<OracleVerdict>> out;
        out.reserve(agents.size());
        for (auto idx : agents) {
            const auto& a = grid[idx];
            CounterRng rng(seed_, StreamTag::OracleVerdict, static_cast<std::uint64_t>(a.coord.i),
                           static_cast<std::uint64_t>(a.coord.j), static_cast<std::uint64_t>(tick));
            out.emplace_back(simulated_oracle_verdict(a, grid.difficulty(idx), params_, rng));
        }
        return out;
    }

private:
    SimBackendParams params_;
    std::uint64_t seed_;
};

class RemoteOracle final : public OracleBackend {
public:
    RemoteOracle(VerdictTransport& transport, RouterConfig cfg) : transport_(transport), cfg_(cfg) { cfg_.validate(); }

    std::vector<std::optional<OracleVerdict>> resolve(const PixelGrid& grid, std::span<const std::size_t> agents,
                                                      std::int64_t) override {
        std::vector<DecisionRequest> reqs;
        reqs.reserve(agents.size());
        for (auto idx : agents) reqs.push_back(DecisionRequest::make(grid[idx].coord, grid[idx].category));
        auto outcome = remote_oracle_batch(reqs, cfg_, transport_);
        upstream_calls_ += outcome.upstream_calls;
        failed_calls_ += outcome.failed_calls;
        return std::move(outcome.verdicts);
    }

    std::int64_t upstream_calls() const noexcept { return upstream_calls_; }
    std::int64_t failed_calls() const noexcept { return failed_calls_; }

private:
    VerdictTransport& transport_;
    RouterConfig cfg_;
    std::int64_t upstream_calls_ = 0;
    std::int64_t failed_calls_ = 0;
};

struct CellDecision {
    double confidence = 0.0;
    double nll = 0.0;
    GateDecision gate = GateDecision::Escalate;
    bool local_success = false;
};

/// Local half of one agent's turn: backend call, NLL, verifier score.
inline CellDecision decide_cell(const Agent& agent, double d, const EngineConfig& cfg, CounterRng& rng) {
    const auto resp = simulated_slm_decide(agent, d, cfg.backend, rng);
    CellDecision out;
    out.confidence = resp.confidence;
    out.nll = nll(resp.confidence, cfg.backend.epsilon);
    out.gate = gate(verification_score(agent.competence, d, agent.attempts, resp.confidence, cfg.verifier),
                    cfg.verifier.theta);
    out.local_success = resp.success;
    return out;
}

class Engine {
public:
    explicit Engine(EngineConfig cfg, OracleBackend* oracle = nullptr)
        : cfg_(std::move(cfg)),
          grid_((cfg_.validate(), cfg_.grid)),
          partition_(cfg_.grid.size_g, cfg_.stages, cfg_.bandit.num_arms),
          bandit_(make_bandit(cfg_.algorithm, cfg_.bandit)),
          reference_(solve_reference(cfg_.num_disks)),
          hanoi_(new_state(cfg_.num_disks)) {
        map_ = build_move_map(cfg_.stages.num_moves(), cfg_.grid.size_g, cfg_.map_mode, cfg_.stages,
                              {.window_radius = cfg_.composer.window_radius});
        if (oracle == nullptr) {
            owned_oracle_ = std::make_unique<SimulatedOracle>(cfg_.backend, cfg_.seed);
            oracle_ = owned_oracle_.get();
        } else {
            oracle_ = oracle;
        }
        weights_ = cfg_.reward;
        if (cfg_.ablation != Ablation::NllCurriculum) {
            weights_.w_c = 1.0;
            weights_.w_n = 0.0;
            weights_.beta_r = 0.0;
        }
        stage_cells_.resize(static_cast<std::size_t>(cfg_.stages.num_stages()) + 1);
        for (std::size_t idx = 0; idx < grid_.num_agents(); ++idx) {
            const int s = partition_.stage_of_cell(idx);
            grid_[idx].category = s;
            stage_cells_[static_cast<std::size_t>(s)].push_back(idx);
        }
        deferrals_.assign(grid_.num_agents(), 0);
        tick_nll_.assign(grid_.num_agents(), std::nullopt);
        escalated_.assign(grid_.num_agents(), 0);

        if (cfg_.ablation == Ablation::BaseRL) {
            stage_ = cfg_.stages.num_stages();
            for (int s = 1; s <= stage_; ++s) result_.stage_entry_ticks[s] = 0;
        } else {
            result_.stage_entry_ticks[1] = 0;
        }
        result_.move_completion_ticks.reserve(map_.size());
    }

    const EngineConfig& config() const noexcept { return cfg_; }
    const PixelGrid& grid() const noexcept { return grid_; }
    PixelGrid& mutable_grid() noexcept { return grid_; }
    const MoveMap& move_map() const noexcept { return map_; }
    const RegionPartition& partition() const noexcept { return partition_; }
    const BanditState& bandit() const noexcept { return bandit_; }
    const HanoiState& hanoi() const noexcept { return hanoi_; }
    int stage() const noexcept { return stage_; }
    std::int64_t tick() const noexcept { return tick_; }
    int next_move() const noexcept { return next_move_; }
    bool solved() const noexcept { return result_.solved_at.has_value(); }
    const RewardWeights& effective_weights() const noexcept { return weights_; }

    bool finished() const noexcept { return tick_ >= cfg_.ticks || (cfg_.early_stop && solved()); }

    /// One tick with the bandit choosing the arm.
    TickMetrics step() {
        CounterRng brng(cfg_.seed, StreamTag::Bandit, static_cast<std::uint64_t>(tick_));
        return step_with_arm(bandit_select(bandit_, brng));
    }

    TickMetrics step_with_arm(int arm) {
        if (arm < 0 || arm >= partition_.num_arms()) throw std::out_of_range("Engine: arm out of range");
        const std::int64_t t = tick_;
        const double radius = cfg_.stages.stage(stage_).radius;
        const auto& focus = partition_.cells(arm);
        std::vector<char> in_focus(grid_.num_agents(), 0);
        for (auto idx : focus) in_focus[idx] = 1;

        // (1) assignment, row-major.
        std::vector<std::size_t> working;
        for (std::size_t idx = 0; idx < grid_.num_agents(); ++idx) {
            tick_nll_[idx].reset();
            escalated_[idx] = 0;
            if (grid_.difficulty(idx) > radius) continue;
            const auto st = grid_[idx].state;
            if (st == AgentState::WaitingOracle) continue;
            if (st == AgentState::Idle || st == AgentState::Failure || in_focus[idx]) {
                grid_[idx].state = AgentState::Working;
                working.push_back(idx);
            }
        }

        // (2)-(3) decide, score, gate.
        std::vector<std::size_t> new_escalations;
        std::vector<double> nlls;
        nlls.reserve(working.size());
        for (auto idx : working) {
            auto& a = grid_[idx];
            CounterRng rng(cfg_.seed, StreamTag::LocalDecision, static_cast<std::uint64_t>(a.coord.i),
                           static_cast<std::uint64_t>(a.coord.j), static_cast<std::uint64_t>(t));
            const auto dec = decide_cell(a, grid_.difficulty(idx), cfg_, rng);
            a.last_confidence = dec.confidence;
            a.last_nll = dec.nll;
            tick_nll_[idx] = dec.nll;
            nlls.push_back(dec.nll);
            if (dec.gate == GateDecision::ActLocally) {
                if (dec.local_success) {
                    a.state = AgentState::Success;
                    a.competence = competence_update(a.competence, cfg_.grid.eta);
                } else {
                    a = record_failure(a);
                }
            } else {
                a.attempts += 1;
                a.state = AgentState::WaitingOracle;
                escalated_[idx] = 1;
                new_escalations.push_back(idx);
            }
        }

        // (4) resolve every waiting agent, carried-over ones included.
        std::vector<std::size_t> waiting;
        for (std::size_t idx = 0; idx < grid_.num_agents(); ++idx)
            if (grid_[idx].state == AgentState::WaitingOracle) waiting.push_back(idx);
        if (!waiting.empty()) {
            const auto verdicts = oracle_->resolve(grid_, waiting, t);
            if (verdicts.size() != waiting.size())
                throw InvariantViolation("oracle backend returned the wrong number of verdicts");
            for (std::size_t n = 0; n < waiting.size(); ++n) {
                const auto idx = waiting[n];
                if (verdicts[n]) {
                    grid_[idx] = apply_oracle_verdict(grid_[idx], *verdicts[n], cfg_.grid.eta_oracle);
                    deferrals_[idx] = 0;
                } else if (++deferrals_[idx] > cfg_.oracle_max_retries) {
                    grid_[idx] = apply_oracle_verdict(grid_[idx], OracleVerdict{0}, cfg_.grid.eta_oracle);
                    deferrals_[idx] = 0;
                }
            }
        }

        // (5)-(6) region reward and bandit update.
        double reward = 0.0;
        if (!focus.empty()) {
            const auto stats = region_stats(grid_, focus, tick_nll_, escalated_);
            reward = cfg_.ablation == Ablation::BaseRL ? stats.mean_competence : region_reward(stats, weights_);
        }
        bandit_update(bandit_, arm, reward);

        TickMetrics m;
        m.tick = t;
        m.deciders = static_cast<std::int64_t>(working.size());
        m.mean_nll = mean_nll(nlls);
        m.oracle_calls = static_cast<std::int64_t>(new_escalations.size());
        m.stage = stage_;
        m.chosen_arm = arm;
        m.reward = reward;
        result_.oracle_total += m.oracle_calls;

        // Stage gating, evaluated apart from the arm choice.
        if (cfg_.ablation != Ablation::BaseRL && stage_ < cfg_.stages.num_stages()) {
            const auto& region = stage_cells_[static_cast<std::size_t>(stage_)];
            const std::int64_t elapsed = t + 1 - result_.stage_entry_ticks.at(stage_);
            if (!region.empty() &&
                stage_advance_check(grid_, region, cfg_.stages.stage(stage_).tau, cfg_.advancement, elapsed)) {
                ++stage_;
                result_.stage_entry_ticks[stage_] = t + 1;
            }
        }

        run_composer(t);

        m.mean_competence = grid_.mean_competence();
        m.moves_completed = next_move_;
        m.solved = solved();
        result_.metrics.push_back(m);

        if (std::find(cfg_.snapshot_ticks.begin(), cfg_.snapshot_ticks.end(), t) != cfg_.snapshot_ticks.end()) {
            if (const auto* ts = std::get_if<ThompsonSampling>(&bandit_))
                result_.posterior_snapshots.push_back(posterior_snapshot(*ts, t));
        }
        ++tick_;
        return m;
    }

    RunResult run() {
        while (!finished()) step();
        return finish();
    }

    RunResult finish() {
        result_.final_bandit = bandit_;
        return result_;
    }

    /// Reward arm k would earn if chosen on the current world, without
    /// touching it. Oracle verdicts come from the simulated model.
    double forced_arm_reward(int arm, std::uint64_t sample) const {
        const auto& cells = partition_.cells(arm);
        if (cells.empty()) return 0.0;
        const double radius = cfg_.stages.stage(stage_).radius;
        double comp = 0.0;
        double nll_sum = 0.0;
        std::int64_t deciders = 0;
        std::int64_t escalations = 0;
        for (auto idx : cells) {
            const auto& a = grid_[idx];
            double c = a.competence;
            if (grid_.difficulty(idx) <= radius && a.state != AgentState::WaitingOracle) {
                CounterRng rng(cfg_.seed, StreamTag::ArmEstimate, idx, sample, static_cast<std::uint64_t>(arm));
                const auto dec = decide_cell(a, grid_.difficulty(idx), cfg_, rng);
                nll_sum += dec.nll;
                ++deciders;
                if (dec.gate == GateDecision::ActLocally) {
                    if (dec.local_success) c = competence_update(c, cfg_.grid.eta);
                } else {
                    ++escalations;
                    if (rng.bernoulli(oracle_success_probability(a.competence, grid_.difficulty(idx), cfg_.backend)))
                        c = competence_update(c, cfg_.grid.eta_oracle);
                }
            }
            comp += c;
        }
        RegionStats stats;
        stats.population = static_cast<std::int64_t>(cells.size());
        stats.mean_competence = comp / static_cast<double>(cells.size());
        stats.oracle_count = escalations;
        if (deciders > 0) stats.mean_nll = nll_sum / static_cast<double>(deciders);
        return cfg_.ablation == Ablation::BaseRL ? stats.mean_competence : region_reward(stats, weights_);
    }

private:
    void run_composer(std::int64_t t) {
        if (next_move_ >= static_cast<int>(map_.size())) return;
        // One completion per tick keeps completion ticks strictly increasing.
        auto step = composer_step(grid_, map_, hanoi_, next_move_, reference_, cfg_.composer, 1);
        if (!step.errors.empty())
            throw InvariantViolation("composer produced an illegal move at index " + std::to_string(step.next_move_index) +
                                     ": " + std::string(to_string(step.errors.front())));
        for (int k : step.completed) {
            result_.move_completion_ticks.push_back(t);
            recycle_window(map_[static_cast<std::size_t>(k)].coord);
        }
        hanoi_ = std::move(step.state);
        next_move_ = step.next_move_index;
        if (next_move_ == static_cast<int>(map_.size()) && !result_.solved_at) {
            if (!is_solved(hanoi_)) throw InvariantViolation("all moves replayed but the puzzle is not solved");
            result_.solved_at = t;
        }
    }

    void recycle_window(Coord center) {
        const int w = cfg_.composer.window_radius;
        for (int di = -w; di <= w; ++di) {
            for (int dj = -w; dj <= w; ++dj) {
                const Coord c{center.i + di, center.j + dj};
                if (!grid_.in_bounds(c)) continue;
                auto& a = grid_.at(c);
                if (a.state == AgentState::Success || a.state == AgentState::Failure) a.state = AgentState::Idle;
            }
        }
    }

    EngineConfig cfg_;
    PixelGrid grid_;
    RegionPartition partition_;
    BanditState bandit_;
    std::vector<MoveSpec> reference_;
    HanoiState hanoi_;
    MoveMap map_;
    std::unique_ptr<OracleBackend> owned_oracle_;
    OracleBackend* oracle_ = nullptr;
    RewardWeights weights_;
    std::vector<std::vector<std::size_t>> stage_cells_;
    std::vector<int> deferrals_;
    std::vector<std::optional<double>> tick_nll_;
    std::vector<std::uint8_t> escalated_;
    int stage_ = 1;
    int next_move_ = 0;
    std::int64_t tick_ = 0;
    RunResult result_;
};

inline RunResult run(const EngineConfig& cfg, OracleBackend* oracle = nullptr) {
    Engine e(cfg, oracle);
    return e.run();
}

/// Pseudo-regret: running sum of max_k m_k - m_{a_t}.
inline std::vector<double> cumulative_regret(std::span<const int> arms, std::span<const double> true_means) {
    if (true_means.empty()) throw std::invalid_argument("cumulative_regret: need true means");
    const double best = *std::max_element(true_means.begin(), true_means.end());
    std::vector<double> out;
    out.reserve(arms.size());
    double acc = 0.0;
    for (int a : arms) {
        if (a < 0 || static_cast<std::size_t>(a) >= true_means.size())
            throw std::out_of_range("cumulative_regret: arm index out of range");
        acc += best - true_means[static_cast<std::size_t>(a)];
        out.push_back(acc);
    }
    return out;
}

/// Monte Carlo arm means on the engine's current (frozen) world.
inline std::vector<double> estimate_arm_means(const Engine& frozen, int samples = 10'000) {
    if (samples < 1) throw std::invalid_argument("estimate_arm_means: samples must be >= 1");
    std::vector<double> means;
    for (int k = 0; k < frozen.partition().num_arms(); ++k) {
        double sum = 0.0;
        for (int s = 0; s < samples; ++s) sum += frozen.forced_arm_reward(k, static_cast<std::uint64_t>(s));
        means.push_back(sum / samples);
    }
    return means;
}

}  // namespace pixelswarm
