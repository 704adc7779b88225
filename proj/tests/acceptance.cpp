// Acceptance gate: seven end-to-end criteria with pinned tolerances, one
// pass/fail line each. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nac2ts/harness.hpp"

using namespace nac2ts;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("nac2ts_acceptance_" + tag);
    fs::remove_all(p);
    return p;
}

// Final mixed-policy probability of the watched pair after a full run.
double final_watch_probability(const Mdp& mdp, const Schedule& sched, long T,
                               std::uint64_t seed) {
    TraceOptions opts;
    opts.checkpoints = {0, T};
    opts.watch_state = 0;
    opts.watch_action = 1;
    RandomStream rng(0, seed);
    RunResult rr = run(mdp, sched, T, QTable(mdp.n_states(), mdp.n_actions()), 0, opts, rng);
    return rr.trace.back().pi_watch;
}

Outcome criterion_exploration_separates() {
    auto start = std::chrono::steady_clock::now();
    Mdp mdp = build_counterexample(0.95);
    const long T = 100000;
    int stuck = 0, recovered = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        if (final_watch_probability(mdp, Schedule::preset("no_exploration"), T, seed) < 0.5)
            ++stuck;
        if (final_watch_probability(mdp, Schedule::preset("corollary_1_1"), T, seed) > 0.5)
            ++recovered;
    }
    double elapsed = seconds_since(start);
    Outcome o;
    o.pass = stuck >= 6 && recovered >= 8 && elapsed <= 60.0;
    o.detail = "greedy stuck " + std::to_string(stuck) + "/10 (need >=6), explored recovered " +
               std::to_string(recovered) + "/10 (need >=8), " + fmt("%.1fs", elapsed) +
               " (limit 60s)";
    return o;
}

Outcome criterion_exact_control() {
    Mdp mdp = build_counterexample(0.95);
    OptimalSolution opt = solve_optimal(mdp);
    bool patient = opt.policy.argmax_actions()[0] == 1;

    Vector p0 = Vector::Constant(4, 0.25);
    double best = -1.0;
    std::vector<int> actions(4, 0);
    for (int mask = 0; mask < 16; ++mask) {
        for (int s = 0; s < 4; ++s) actions[s] = (mask >> s) & 1;
        best = std::max(best, exact_v(mdp, Policy::deterministic(actions, 2), p0).aggregate);
    }
    double diff = std::abs(opt.value.aggregate - best);
    Outcome o;
    o.pass = patient && diff <= 1e-9;
    o.detail = std::string("optimal start action ") + (patient ? "1" : "0") +
               ", enumeration gap " + fmt("%.2e", diff) + " (tol 1e-9)";
    return o;
}

Outcome criterion_q_matches_monte_carlo() {
    auto start = std::chrono::steady_clock::now();
    RandomStream gen(777);
    const double gamma = 0.9;
    // horizon with discounted tail below 1e-4
    const int horizon =
        static_cast<int>(std::ceil(std::log(1e-4 * (1.0 - gamma)) / std::log(gamma)));
    const int episodes = 10000;
    int agreeing = 0;
    double worst_z = 0.0;
    for (int i = 0; i < 20; ++i) {
        Mdp mdp = build_random_ergodic(5, 2, gamma, 0.02, gen);
        Matrix probs(5, 2);
        for (int s = 0; s < 5; ++s) {
            double u = 0.1 + 0.8 * gen.next_uniform();
            probs(s, 0) = u;
            probs(s, 1) = 1.0 - u;
        }
        Policy pi(probs);
        const int s0 = i % 5, a0 = i % 2;
        double exact = exact_q(mdp, pi)(s0, a0, 2);

        RandomStream mc(778, static_cast<std::uint64_t>(i));
        double sum = 0.0, sumsq = 0.0;
        for (int e = 0; e < episodes; ++e) {
            double ret = 0.0, disc = 1.0;
            int s = s0, a = a0;
            for (int k = 0; k < horizon; ++k) {
                ret += disc * mdp.r(s, a);
                StepSample o = sample_step(mdp, pi, s, a, mc);
                s = o.s_next;
                a = o.a_next;
                disc *= gamma;
            }
            sum += ret;
            sumsq += ret * ret;
        }
        double mean = sum / episodes;
        double var = std::max(0.0, sumsq / episodes - mean * mean);
        double se = std::sqrt(var / episodes);
        double z = std::abs(mean - exact) / std::max(se, 1e-12);
        worst_z = std::max(worst_z, z);
        // 3 standard errors plus the truncation allowance
        if (std::abs(mean - exact) <= 3.0 * se + 1e-4) ++agreeing;
    }
    double elapsed = seconds_since(start);
    Outcome o;
    o.pass = agreeing == 20 && elapsed <= 120.0;
    o.detail = std::to_string(agreeing) + "/20 MDPs within 3 SE (worst z " +
               fmt("%.2f", worst_z) + "), " + fmt("%.1fs", elapsed) + " (limit 120s)";
    return o;
}

Outcome criterion_verification_clean() {
    auto start = std::chrono::steady_clock::now();
    fs::path dir = scratch_dir("verify");
    ExperimentConfig cfg;  // counterexample, corollary_1_1, T = 1e5
    cfg.output_dir = dir.string();
    std::vector<LemmaCheckResult> report = verify(cfg);
    long violations = 0, instances = 0;
    for (const auto& r : report) {
        violations += r.violations;
        instances += r.instances;
    }
    double elapsed = seconds_since(start);
    Outcome o;
    o.pass = report.size() == 10 && violations == 0 && elapsed <= 300.0;
    o.detail = std::to_string(report.size()) + " bounds, " + std::to_string(instances) +
               " instances, " + std::to_string(violations) + " violations, " +
               fmt("%.1fs", elapsed) + " (limit 300s)";
    fs::remove_all(dir);
    return o;
}

Outcome criterion_critic_tracks_fixed_policy() {
    auto start = std::chrono::steady_clock::now();
    Mdp mdp = build_counterexample(0.95);
    // actor frozen: beta == 0 keeps pi uniform, so pihat is uniform throughout
    Schedule sched = Schedule::relaxed(0.5, 0.0, 0.5, 0.5, 0.75, 0.0);
    QTable q_target = exact_q(mdp, Policy::uniform(4, 2));
    const long T = 1000000;
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TraceOptions opts;
        opts.checkpoints = {0, T};
        opts.watch_action = 1;
        RandomStream rng(0, seed);
        RunResult rr = run(mdp, sched, T, QTable(4, 2), 0, opts, rng);
        errors.push_back(
            (rr.trace.back().q_before.flat - q_target.flat).cwiseAbs().maxCoeff());
    }
    double med = median_of(errors);
    double limit = 0.05 * mdp.q_max();
    double elapsed = seconds_since(start);
    Outcome o;
    o.pass = med <= limit;
    o.detail = "median sup error " + fmt("%.3f", med) + " vs limit " + fmt("%.2f", limit) +
               ", " + fmt("%.1fs", elapsed);
    return o;
}

Outcome criterion_rate_decreases() {
    auto start = std::chrono::steady_clock::now();
    std::vector<long> grid{1000, 10000, 100000};
    bool all_monotone = true, all_small = true;
    std::string finals;
    for (std::uint64_t mdp_seed = 1; mdp_seed <= 3; ++mdp_seed) {
        fs::path dir = scratch_dir("rate_" + std::to_string(mdp_seed));
        ExperimentConfig cfg;
        cfg.mdp_source.kind = MdpSource::Kind::Random;
        cfg.mdp_source.mdp_seed = mdp_seed;
        cfg.schedule = Schedule::preset("corollary_1_2");
        cfg.seeds.clear();
        for (std::uint64_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
        cfg.output_dir = dir.string();
        RateStudyResult res = rate_study(cfg, grid);
        for (size_t i = 1; i < res.points.size(); ++i)
            all_monotone =
                all_monotone && res.points[i].median_gap <= res.points[i - 1].median_gap + 1e-12;
        double q_max = 1.0 / (1.0 - cfg.mdp_source.random_gamma);
        all_small = all_small && res.points.back().median_gap <= 0.2 * q_max;
        finals += (finals.empty() ? "" : "/") + fmt("%.3f", res.points.back().median_gap);
        fs::remove_all(dir);
    }
    double elapsed = seconds_since(start);
    Outcome o;
    o.pass = all_monotone && all_small && elapsed <= 600.0;
    o.detail = std::string(all_monotone ? "medians non-increasing" : "medians NOT monotone") +
               ", final gaps " + finals + " (limit 0.2 q_max = 2.0), " + fmt("%.1fs", elapsed) +
               " (limit 600s)";
    return o;
}

Outcome criterion_reruns_identical() {
    fs::path d1 = scratch_dir("det_a"), d2 = scratch_dir("det_b");
    ExperimentConfig cfg;
    cfg.T = 5000;
    cfg.seeds = {0, 1, 2};
    cfg.checkpoint_count = 16;
    cfg.output_dir = d1.string();
    run_experiment(cfg);
    cfg.output_dir = d2.string();
    cfg.n_threads = 2;  // thread count must not leak into the bytes
    run_experiment(cfg);
    bool same = true;
    for (std::uint64_t seed : cfg.seeds) {
        std::string name = "trace_" + std::to_string(seed) + ".csv";
        same = same && !slurp(d1 / name).empty() && slurp(d1 / name) == slurp(d2 / name);
    }
    same = same && slurp(d1 / "summary.json") == slurp(d2 / "summary.json");

    ExperimentConfig rate_cfg;
    rate_cfg.seeds = {0, 1, 2};
    rate_cfg.output_dir = (d1 / "rate").string();
    rate_study(rate_cfg, {100, 1000});
    std::string first_rate = slurp(d1 / "rate" / "rate.csv");
    rate_cfg.output_dir = (d2 / "rate").string();
    rate_study(rate_cfg, {100, 1000});
    same = same && !first_rate.empty() && first_rate == slurp(d2 / "rate" / "rate.csv");

    fs::remove_all(d1);
    fs::remove_all(d2);
    Outcome o;
    o.pass = same;
    o.detail = same ? "trace, summary and rate outputs byte-identical across reruns and threads"
                    : "byte mismatch between reruns";
    return o;
}

int run_criterion(int index, const char* name, Outcome (*fn)()) {
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", index, name,
                o.detail.c_str());
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

}  // namespace

int main() {
    int failures = 0;
    failures += run_criterion(1, "exploration separates the counterexample outcomes",
                              criterion_exploration_separates);
    failures += run_criterion(2, "exact solver finds the patient optimal policy",
                              criterion_exact_control);
    failures += run_criterion(3, "exact q values match Monte Carlo rollouts",
                              criterion_q_matches_monte_carlo);
    failures += run_criterion(4, "verification suite reports zero violations",
                              criterion_verification_clean);
    failures += run_criterion(5, "frozen-actor critic converges to its target",
                              criterion_critic_tracks_fixed_policy);
    failures += run_criterion(6, "value gap medians shrink with the horizon",
                              criterion_rate_decreases);
    failures += run_criterion(7, "experiment outputs are byte-stable",
                              criterion_reruns_identical);
    if (failures == 0) std::printf("acceptance: all 7 criteria passed\n");
    return failures;
}
