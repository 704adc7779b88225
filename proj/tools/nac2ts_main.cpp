#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nac2ts/harness.hpp"

namespace {

nac2ts::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return nac2ts::ExperimentConfig{};  // all defaults
    return nac2ts::ExperimentConfig::from_file(path);
}

void apply_overrides(nac2ts::ExperimentConfig& cfg, bool seed_set, long seed,
                     const std::string& out_dir, const std::string& preset) {
    if (seed_set) {
        if (seed < 0) throw nac2ts::ConfigError("config: --seed must be non-negative");
        cfg.seeds = {static_cast<std::uint64_t>(seed)};
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!preset.empty()) cfg.schedule = nac2ts::Schedule::preset(preset);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nac2ts: two-time-scale natural actor-critic on tabular MDPs"};
    app.require_subcommand(1);

    std::string config_path, out_dir, mdp_arg, preset;
    long seed = 0;
    std::vector<long> grid;

    auto* run_cmd = app.add_subcommand("run", "run the experiment and write per-seed traces");
    run_cmd->add_option("--config", config_path, "experiment config JSON file");
    auto* run_seed_opt = run_cmd->add_option("--seed", seed, "run a single seed");
    run_cmd->add_option("--out", out_dir, "output directory override");
    run_cmd->add_option("--preset", preset, "schedule preset override");

    auto* rate_cmd = app.add_subcommand("rate", "convergence rate study over a horizon grid");
    rate_cmd->add_option("--config", config_path, "experiment config JSON file");
    rate_cmd->add_option("--grid", grid, "comma-separated horizons")
        ->required()
        ->delimiter(',');
    rate_cmd->add_option("--out", out_dir, "output directory override");
    rate_cmd->add_option("--preset", preset, "schedule preset override");

    auto* solve_cmd = app.add_subcommand("solve", "exact optimal policy and values for an MDP");
    solve_cmd->add_option("--mdp", mdp_arg, "MDP JSON file or \"counterexample\"")->required();
    solve_cmd->add_option("--out", out_dir, "also write the solution JSON to this file");

    auto* verify_cmd =
        app.add_subcommand("verify", "run the numerical bound checks and write a report");
    verify_cmd->add_option("--config", config_path, "experiment config JSON file");
    verify_cmd->add_option("--out", out_dir, "output directory override");
    verify_cmd->add_option("--preset", preset, "schedule preset override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run_cmd) {
            nac2ts::ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, run_seed_opt->count() > 0, seed, out_dir, preset);
            nac2ts::ExperimentSummary s = nac2ts::run_experiment(cfg);
            std::cout << "wrote " << s.seeds.size() << " trace(s) to " << cfg.output_dir
                      << ", median final value gap " << fmt(s.median_final_value_gap) << "\n";
        } else if (*rate_cmd) {
            nac2ts::ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, false, 0, out_dir, preset);
            nac2ts::RateStudyResult r = nac2ts::rate_study(cfg, grid);
            std::cout << "rate study over " << r.points.size() << " horizon(s), log-log slope "
                      << fmt(r.loglog_slope) << ", results in " << cfg.output_dir << "\n";
        } else if (*solve_cmd) {
            nac2ts::MdpSource src;
            if (mdp_arg != "counterexample") {
                src.kind = nac2ts::MdpSource::Kind::File;
                src.path = mdp_arg;
            }
            std::string text = nac2ts::solve_to_json(nac2ts::make_mdp(src));
            if (!out_dir.empty()) {
                std::ofstream out(out_dir, std::ios::binary);
                if (!out) throw nac2ts::ConfigError("cannot open '" + out_dir + "' for writing");
                out << text << "\n";
            }
            std::cout << text << "\n";
        } else if (*verify_cmd) {
            nac2ts::ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, false, 0, out_dir, preset);
            std::vector<nac2ts::LemmaCheckResult> report = nac2ts::verify(cfg);
            long total = 0;
            for (const auto& r : report) {
                std::cout << r.lemma_id << ": " << r.instances << " instance(s), "
                          << r.violations << " violation(s), worst margin "
                          << fmt(r.worst_margin) << "\n";
                total += r.violations;
            }
            if (total > 0) {
                std::cerr << "verification failed: " << total << " violation(s)\n";
                return 2;
            }
            std::cout << "all checks passed, report in " << cfg.output_dir << "\n";
        }
    } catch (const nac2ts::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
