#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nac2ts/diagnostics.hpp"
#include "nac2ts/nac.hpp"

namespace nac2ts {

enum class CheckpointSpacing { Log, Linear };

/// Where the experiment MDP comes from: a builtin name, a JSON file, or the
/// random generator.
struct MdpSource {
    enum class Kind { Counterexample, File, Random } kind = Kind::Counterexample;
    double gamma = 0.95;  // counterexample discount
    std::string path;     // Kind::File
    // Kind::Random parameters
    int n_states = 5;
    int n_actions = 2;
    double random_gamma = 0.9;
    double smoothing = 0.01;
    std::uint64_t mdp_seed = 0;
};

/// Parsed experiment description. `from_json_text` / `from_file` validate
/// every field and throw ConfigError naming the offending one.
struct ExperimentConfig {
    MdpSource mdp_source;
    Schedule schedule = Schedule::preset("corollary_1_1");
    long T = 100000;
    std::vector<std::uint64_t> seeds = {0};
    std::uint64_t experiment_seed = 0;
    int checkpoint_count = 64;
    CheckpointSpacing spacing = CheckpointSpacing::Log;
    int initial_state = 0;
    std::string output_dir = "out";
    int watch_state = 0;
    int watch_action = 0;
    bool watch_explicit = false;  // user pinned the watched pair
    Vector initial_distribution;  // empty = uniform
    int n_threads = 0;            // 0 = hardware concurrency

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

/// Instantiate the configured MDP (builds, loads, or generates).
Mdp make_mdp(const MdpSource& source);

/// Checkpoint iterations: `count` log- or linearly-spaced points in [0, T],
/// always including 0 and T, sorted and deduplicated.
std::vector<long> make_checkpoints(int count, CheckpointSpacing spacing, long T);

struct SeedSummary {
    std::uint64_t seed = 0;
    double final_value_gap = 0.0;
    double final_pi_watch = 0.0;
    long output_index = 0;
};

struct ExperimentSummary {
    std::vector<SeedSummary> seeds;
    double median_final_value_gap = 0.0;
};

/// CSV text for one seed's trace; fixed header
/// t,value_gap,critic_error,theta_norm,min_policy_entry,pi_watch,kl_potential,seed
/// and %.17g round-trip formatting, so identical runs give identical bytes.
std::string trace_to_csv(const std::vector<TraceRow>& trace, std::uint64_t seed);

/// Runs every seed (worker pool, one stream per seed), writes
/// `trace_<seed>.csv` per seed plus `summary.json` under output_dir, and
/// returns the summary. File writing happens on the calling thread in seed
/// order, so parallel and serial execution produce identical bytes.
ExperimentSummary run_experiment(const ExperimentConfig& config);

struct RatePoint {
    long T = 0;
    double median_gap = 0.0;
    double iqr_gap = 0.0;
};

struct RateStudyResult {
    std::vector<RatePoint> points;
    double loglog_slope = 0.0;  // least-squares slope of log(median gap) vs log T
};

/// For each horizon in `t_grid` runs all seeds and evaluates the exact value
/// gap of the randomized-output policy pihat_{T_hat}. Writes `rate.csv` and
/// `rate_summary.json` under output_dir.
RateStudyResult rate_study(const ExperimentConfig& config, const std::vector<long>& t_grid);

/// Full verification suite on the configured MDP and schedule: instance-based
/// checks on freshly drawn random MDPs plus trace-based drift checks on a real
/// run. Writes `verify_report.json` (one entry per report id) and returns the
/// results. Callers treat any violation as exit-worthy.
std::vector<LemmaCheckResult> verify(const ExperimentConfig& config);

/// JSON for the verification report: [{"lemma_id", "instances", "violations",
/// "worst_margin"}, ...].
std::string report_to_json(const std::vector<LemmaCheckResult>& results);

/// JSON with "v_star" (per state), "pi_star" (action index per state),
/// "q_star" ([s][a]) and "gamma" for the `solve` subcommand.
std::string solve_to_json(const Mdp& mdp);

}  // namespace nac2ts
