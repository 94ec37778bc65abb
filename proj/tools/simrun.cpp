#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <pixelswarm/hanoi_bruteforce.hpp>
#include <pixelswarm/harness.hpp>

namespace ps = pixelswarm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitCellFailure = 2;
constexpr int kExitInvariant = 3;

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("SIMRUN_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(raw, &used);
        if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("SIMRUN_SEED is not an unsigned integer: ") + raw);
    }
}

struct RunArgs {
    std::string config;
    std::string algo = "ts";
    std::string ablation = "nll";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> ticks;
    std::string out = "out";
    std::string oracle_endpoint;
    int max_batch = 16;
    bool lenient = false;
};

int cmd_run(const RunArgs& args) {
    ps::EngineConfig cfg;
    if (!args.config.empty()) cfg = ps::config_from_json(ps::read_json_file(args.config));
    cfg.algorithm = ps::parse_algorithm(args.algo);
    cfg.ablation = ps::parse_ablation(args.ablation);
    if (args.seed) cfg.seed = *args.seed;
    if (auto s = env_seed()) cfg.seed = *s;
    if (args.ticks) cfg.ticks = *args.ticks;
    if (cfg.snapshot_ticks.empty()) cfg.snapshot_ticks = {200, 800, 1400, 1999};
    cfg.validate();

    std::unique_ptr<ps::HttpVerdictTransport> transport;
    std::unique_ptr<ps::RemoteOracle> remote;
    if (!args.oracle_endpoint.empty()) {
        ps::RouterConfig rc;
        rc.max_batch = args.max_batch;
        rc.strict = !args.lenient;
        rc.max_retries = cfg.oracle_max_retries;
        transport = std::make_unique<ps::HttpVerdictTransport>(args.oracle_endpoint,
                                                               std::chrono::milliseconds(rc.timeout_ms));
        remote = std::make_unique<ps::RemoteOracle>(*transport, rc);
    }

    ps::Engine engine(cfg, remote.get());
    const auto result = engine.run();
    const ps::fs::path dir(args.out);
    const std::string stem = "seed-" + std::to_string(cfg.seed);
    ps::export_csv(result, dir / (stem + ".csv"));
    ps::write_json_file(dir / (stem + ".json"), ps::run_sidecar(cfg, result, {}));
    ps::write_json_file(dir / "posteriors.json", {{"snapshot_ticks", cfg.snapshot_ticks},
                                                  {"seeds", {{std::to_string(cfg.seed), result.posterior_snapshots}}}});
    ps::write_json_file(dir / "move_map.json", engine.move_map().to_json());

    std::cout << "ticks=" << result.metrics.size() << " moves=" << result.metrics.back().moves_completed
              << " solved=" << (result.solved_at ? std::to_string(*result.solved_at) : std::string("no"))
              << " oracle_calls=" << result.oracle_total << " stage=" << result.metrics.back().stage << "\n";
    if (remote) std::cout << "upstream_calls=" << remote->upstream_calls() << " failed=" << remote->failed_calls() << "\n";
    return kExitOk;
}

int cmd_experiment(const std::string& spec_path, const std::string& out) {
    auto spec = ps::spec_from_json(ps::read_json_file(spec_path));
    if (auto s = env_seed()) spec.seeds = {*s};
    spec.validate();
    const auto outcome = ps::run_experiment(spec, out);
    for (const auto& f : outcome.failures)
        std::cerr << "cell " << f.cell << " seed " << f.seed << " failed: " << f.error << "\n";
    std::cout << "wrote " << (ps::fs::path(out) / spec.name / "summary.json").string() << "\n";
    return outcome.exit_code();
}

int cmd_aggregate(const std::string& dir) {
    const auto summary = ps::aggregate(dir);
    ps::write_json_file(ps::fs::path(dir) / "summary.json", summary);
    return kExitOk;
}

int cmd_validate_hanoi(int disks) {
    if (disks < 1 || disks > 20) throw std::invalid_argument("--disks must be in 1..20");
    bool ok = true;
    for (int n = 1; n <= disks; ++n) {
        const auto seq = ps::solve_reference(n);
        const auto report = ps::validate_sequence(n, seq);
        const bool len_ok = seq.size() == (std::size_t{1} << n) - 1;
        std::cout << "n=" << n << " moves=" << seq.size() << " valid=" << (report.valid && len_ok ? "yes" : "NO");
        ok = ok && report.valid && len_ok;
        if (n <= 3) {
            const auto bf = ps::brute_force_check(n);
            std::cout << " states=" << bf.states_visited << " checked=" << bf.moves_checked
                      << " mismatches=" << bf.mismatches;
            ok = ok && bf.mismatches == 0;
        }
        std::cout << "\n";
    }
    return ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curriculum-guided swarm simulator for the spatial Tower of Hanoi"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a single seed");
    run->add_option("--config", run_args.config, "Engine config JSON");
    run->add_option("--algo", run_args.algo, "ts|ucb1|eps")->check(CLI::IsMember({"ts", "ucb1", "eps"}));
    run->add_option("--ablation", run_args.ablation, "nll|curriculum|base")
        ->check(CLI::IsMember({"nll", "curriculum", "base"}));
    run->add_option("--seed", run_args.seed, "Master seed");
    run->add_option("--ticks", run_args.ticks, "Tick budget");
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--oracle-endpoint", run_args.oracle_endpoint, "Remote verdict service base URL");
    run->add_option("--max-batch", run_args.max_batch, "Escalations per upstream call")->check(CLI::PositiveNumber);
    run->add_flag("--lenient", run_args.lenient, "Treat malformed verdict replies as failures instead of aborting");

    std::string spec_path;
    std::string exp_out = "out";
    auto* exp = app.add_subcommand("experiment", "Run a multi-seed sweep");
    exp->add_option("--spec", spec_path, "Experiment spec JSON")->required();
    exp->add_option("--out", exp_out, "Output root");

    std::string agg_dir;
    auto* agg = app.add_subcommand("aggregate", "Rebuild summary.json from an experiment directory");
    agg->add_option("dir", agg_dir, "Experiment directory")->required();

    int disks = 8;
    auto* vh = app.add_subcommand("validate-hanoi", "Check the reference solver");
    vh->add_option("--disks", disks, "Largest disk count")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(run_args);
        if (*exp) return cmd_experiment(spec_path, exp_out);
        if (*agg) return cmd_aggregate(agg_dir);
        if (*vh) return cmd_validate_hanoi(disks);
    } catch (const ps::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitCellFailure;
    }
    return kExitOk;
}
