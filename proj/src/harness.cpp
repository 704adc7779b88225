#include "nac2ts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace nac2ts {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ConfigError("config: field '" + field + "' " + why);
}

double get_double(const json& j, const std::string& field) {
    if (!j.at(field).is_number()) bad_field(field, "must be a number");
    return j.at(field).get<double>();
}

long get_long(const json& j, const std::string& field) {
    if (!j.at(field).is_number_integer()) bad_field(field, "must be an integer");
    return j.at(field).get<long>();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw ConfigError("config: unknown field '" + where + it.key() + "'");
    }
}

MdpSource parse_mdp_source(const json& j) {
    MdpSource src;
    if (!j.contains("mdp_source")) return src;  // counterexample by default
    const json& m = j.at("mdp_source");
    if (m.is_string()) {
        std::string name = m.get<std::string>();
        if (name == "counterexample") {
            src.kind = MdpSource::Kind::Counterexample;
        } else {
            src.kind = MdpSource::Kind::File;
            src.path = name;
        }
        return src;
    }
    if (m.is_object() && m.contains("random")) {
        reject_unknown_keys(m, {"random"}, "mdp_source.");
        const json& r = m.at("random");
        reject_unknown_keys(r, {"n_states", "n_actions", "gamma", "smoothing", "seed"},
                            "mdp_source.random.");
        src.kind = MdpSource::Kind::Random;
        if (r.contains("n_states")) src.n_states = static_cast<int>(get_long(r, "n_states"));
        if (r.contains("n_actions")) src.n_actions = static_cast<int>(get_long(r, "n_actions"));
        if (r.contains("gamma")) src.random_gamma = get_double(r, "gamma");
        if (r.contains("smoothing")) src.smoothing = get_double(r, "smoothing");
        if (r.contains("seed")) {
            long s = get_long(r, "seed");
            if (s < 0) bad_field("mdp_source.random.seed", "must be non-negative");
            src.mdp_seed = static_cast<std::uint64_t>(s);
        }
        return src;
    }
    bad_field("mdp_source", "must be \"counterexample\", a file path, or {\"random\": {...}}");
}

Schedule parse_schedule(const json& j) {
    if (!j.contains("schedule")) return Schedule::preset("corollary_1_1");
    const json& s = j.at("schedule");
    if (!s.is_object()) bad_field("schedule", "must be an object");
    reject_unknown_keys(s,
                        {"preset", "alpha_base", "beta_base", "eps_base", "nu", "sigma", "xi",
                         "relax_validation"},
                        "schedule.");
    // Start from the preset (or the default one), then apply field overrides.
    double a = 0.5, b = 0.5, e = 0.5, nu = 0.5, sigma = 0.75, xi = 0.0;
    bool relaxed = false;
    if (s.contains("preset")) {
        if (!s.at("preset").is_string()) bad_field("schedule.preset", "must be a string");
        Schedule base = Schedule::preset(s.at("preset").get<std::string>());
        a = base.alpha_base();
        b = base.beta_base();
        e = base.eps_base();
        nu = base.nu();
        sigma = base.sigma();
        xi = base.xi();
        relaxed = base.is_relaxed();
    }
    if (s.contains("alpha_base")) a = get_double(s, "alpha_base");
    if (s.contains("beta_base")) b = get_double(s, "beta_base");
    if (s.contains("eps_base")) e = get_double(s, "eps_base");
    if (s.contains("nu")) nu = get_double(s, "nu");
    if (s.contains("sigma")) sigma = get_double(s, "sigma");
    if (s.contains("xi")) xi = get_double(s, "xi");
    if (s.contains("relax_validation")) {
        if (!s.at("relax_validation").is_boolean())
            bad_field("schedule.relax_validation", "must be a boolean");
        relaxed = s.at("relax_validation").get<bool>();
    }
    try {
        return relaxed ? Schedule::relaxed(a, b, e, nu, sigma, xi)
                       : Schedule::theorem_rates(a, b, e, nu, sigma, xi);
    } catch (const DomainError& err) {
        throw ConfigError(std::string("config: field 'schedule' invalid: ") + err.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j,
                        {"mdp_source", "gamma", "schedule", "T", "seeds", "experiment_seed",
                         "checkpoints", "initial_state", "output_dir", "watch",
                         "initial_distribution", "threads"},
                        "");
    ExperimentConfig cfg;
    cfg.mdp_source = parse_mdp_source(j);
    if (j.contains("gamma")) {
        if (cfg.mdp_source.kind != MdpSource::Kind::Counterexample)
            bad_field("gamma", "only applies to the counterexample source");
        cfg.mdp_source.gamma = get_double(j, "gamma");
    }
    cfg.schedule = parse_schedule(j);
    if (j.contains("T")) {
        cfg.T = get_long(j, "T");
        if (cfg.T < 0) bad_field("T", "must be >= 0");
    }
    if (j.contains("seeds")) {
        if (!j.at("seeds").is_array() || j.at("seeds").empty())
            bad_field("seeds", "must be a non-empty array");
        cfg.seeds.clear();
        for (const auto& v : j.at("seeds")) {
            if (!v.is_number_integer() || v.get<long>() < 0)
                bad_field("seeds", "entries must be non-negative integers");
            cfg.seeds.push_back(v.get<std::uint64_t>());
        }
        auto sorted = cfg.seeds;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            bad_field("seeds", "must not contain duplicates");
    }
    if (j.contains("experiment_seed")) {
        long s = get_long(j, "experiment_seed");
        if (s < 0) bad_field("experiment_seed", "must be non-negative");
        cfg.experiment_seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("checkpoints")) {
        const json& c = j.at("checkpoints");
        if (!c.is_object()) bad_field("checkpoints", "must be an object");
        reject_unknown_keys(c, {"count", "spacing"}, "checkpoints.");
        if (c.contains("count")) {
            cfg.checkpoint_count = static_cast<int>(get_long(c, "count"));
            if (cfg.checkpoint_count < 1) bad_field("checkpoints.count", "must be >= 1");
        }
        if (c.contains("spacing")) {
            if (!c.at("spacing").is_string()) bad_field("checkpoints.spacing", "must be a string");
            std::string sp = c.at("spacing").get<std::string>();
            if (sp == "log")
                cfg.spacing = CheckpointSpacing::Log;
            else if (sp == "linear")
                cfg.spacing = CheckpointSpacing::Linear;
            else
                bad_field("checkpoints.spacing", "must be \"log\" or \"linear\"");
        }
    }
    if (j.contains("initial_state")) {
        cfg.initial_state = static_cast<int>(get_long(j, "initial_state"));
        if (cfg.initial_state < 0) bad_field("initial_state", "must be >= 0");
    }
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) bad_field("output_dir", "must be a string");
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("watch")) {
        const json& w = j.at("watch");
        if (!w.is_object()) bad_field("watch", "must be an object");
        reject_unknown_keys(w, {"state", "action"}, "watch.");
        cfg.watch_state = static_cast<int>(get_long(w, "state"));
        cfg.watch_action = static_cast<int>(get_long(w, "action"));
        if (cfg.watch_state < 0 || cfg.watch_action < 0)
            bad_field("watch", "indices must be >= 0");
        cfg.watch_explicit = true;
    }
    if (j.contains("initial_distribution")) {
        const json& d = j.at("initial_distribution");
        if (!d.is_array() || d.empty())
            bad_field("initial_distribution", "must be a non-empty array");
        cfg.initial_distribution.resize(static_cast<Eigen::Index>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) {
            if (!d.at(i).is_number())
                bad_field("initial_distribution", "entries must be numbers");
            cfg.initial_distribution(static_cast<Eigen::Index>(i)) = d.at(i).get<double>();
        }
    }
    if (j.contains("threads")) {
        cfg.n_threads = static_cast<int>(get_long(j, "threads"));
        if (cfg.n_threads < 0) bad_field("threads", "must be >= 0");
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

Mdp make_mdp(const MdpSource& source) {
    switch (source.kind) {
        case MdpSource::Kind::Counterexample:
            return build_counterexample(source.gamma);
        case MdpSource::Kind::File:
            return load_mdp_json(source.path);
        case MdpSource::Kind::Random: {
            RandomStream rng(source.mdp_seed, 0x6d6470ULL);  // dedicated sub-stream
            return build_random_ergodic(source.n_states, source.n_actions, source.random_gamma,
                                        source.smoothing, rng);
        }
    }
    throw ConfigError("config: unrecognized mdp_source kind");
}

std::vector<long> make_checkpoints(int count, CheckpointSpacing spacing, long T) {
    if (count < 1) throw ConfigError("config: field 'checkpoints.count' must be >= 1");
    if (T < 0) throw ConfigError("config: field 'T' must be >= 0");
    std::vector<long> points{0, T};
    if (T >= 1 && count >= 2) {
        for (int i = 0; i < count; ++i) {
            double frac = static_cast<double>(i) / (count - 1);
            long t;
            if (spacing == CheckpointSpacing::Log) {
                t = std::lround(std::exp(frac * std::log(static_cast<double>(T))));
            } else {
                t = std::lround(frac * static_cast<double>(T));
            }
            points.push_back(std::clamp<long>(t, 0, T));
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Quantile with linear interpolation on the sorted sample.
double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double median(const std::vector<double>& v) { return quantile(v, 0.5); }

// Runs fn(0..n-1) on up to n_workers threads; first exception wins and is
// rethrown on the caller after all workers join.
void parallel_for(long n, int n_workers, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int workers = n_workers > 0 ? n_workers : hw;
    workers = static_cast<int>(std::min<long>(workers, n));
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                long i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    out << text;
}

struct PreparedExperiment {
    Mdp mdp;
    TraceOptions opts;
};

PreparedExperiment prepare(const ExperimentConfig& config, bool with_checkpoints) {
    Mdp mdp = make_mdp(config.mdp_source);
    if (config.initial_state >= mdp.n_states())
        throw ConfigError("config: field 'initial_state' out of range for the MDP");
    TraceOptions opts;
    if (with_checkpoints)
        opts.checkpoints = make_checkpoints(config.checkpoint_count, config.spacing, config.T);
    if (config.watch_explicit) {
        if (config.watch_state >= mdp.n_states() || config.watch_action >= mdp.n_actions())
            throw ConfigError("config: field 'watch' out of range for the MDP");
        opts.watch_state = config.watch_state;
        opts.watch_action = config.watch_action;
    } else {
        // Default to the pair the counterexample story is about: the optimal
        // but unrewarding-looking action at the start state.
        opts.watch_state = 0;
        opts.watch_action = std::min(1, mdp.n_actions() - 1);
    }
    if (config.initial_distribution.size()) {
        if (config.initial_distribution.size() != mdp.n_states())
            throw ConfigError("config: field 'initial_distribution' has wrong length");
        opts.eval_initial = config.initial_distribution;
    }
    return PreparedExperiment{std::move(mdp), std::move(opts)};
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceRow>& trace, std::uint64_t seed) {
    std::string out =
        "t,value_gap,critic_error,theta_norm,min_policy_entry,pi_watch,kl_potential,seed\n";
    for (const TraceRow& row : trace) {
        out += std::to_string(row.t);
        out += ',';
        out += format_double(row.value_gap);
        out += ',';
        out += format_double(row.critic_error);
        out += ',';
        out += format_double(row.theta_norm);
        out += ',';
        out += format_double(row.min_policy_entry);
        out += ',';
        out += format_double(row.pi_watch);
        out += ',';
        out += format_double(row.kl_potential);
        out += ',';
        out += std::to_string(seed);
        out += '\n';
    }
    return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
    PreparedExperiment prep = prepare(config, true);
    const long n_seeds = static_cast<long>(config.seeds.size());

    std::vector<std::string> csvs(n_seeds);
    std::vector<SeedSummary> summaries(n_seeds);
    parallel_for(n_seeds, config.n_threads, [&](long i) {
        std::uint64_t seed = config.seeds[static_cast<size_t>(i)];
        RandomStream rng(config.experiment_seed, seed);
        QTable q0(prep.mdp.n_states(), prep.mdp.n_actions());
        RunResult rr = run(prep.mdp, config.schedule, config.T, q0, config.initial_state,
                           prep.opts, rng);
        csvs[i] = trace_to_csv(rr.trace, seed);
        const TraceRow& last = rr.trace.back();
        summaries[i] = SeedSummary{seed, last.value_gap, last.pi_watch, rr.output_index};
    });

    // Single collector writes in seed order: parallel and serial runs produce
    // byte-identical files.
    std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output_dir '" + config.output_dir + "'");
    for (long i = 0; i < n_seeds; ++i)
        write_text_file(dir / ("trace_" + std::to_string(config.seeds[i]) + ".csv"), csvs[i]);

    ExperimentSummary summary;
    summary.seeds = std::move(summaries);
    std::vector<double> gaps;
    gaps.reserve(summary.seeds.size());
    for (const SeedSummary& s : summary.seeds) gaps.push_back(s.final_value_gap);
    summary.median_final_value_gap = median(gaps);

    json j;
    j["seeds"] = json::array();
    for (const SeedSummary& s : summary.seeds)
        j["seeds"].push_back({{"seed", s.seed},
                              {"final_value_gap", s.final_value_gap},
                              {"final_pi_watch", s.final_pi_watch},
                              {"output_index", s.output_index}});
    j["median_final_value_gap"] = summary.median_final_value_gap;
    write_text_file(dir / "summary.json", j.dump(2) + "\n");
    return summary;
}

RateStudyResult rate_study(const ExperimentConfig& config, const std::vector<long>& t_grid) {
    if (t_grid.empty()) throw ConfigError("rate study: field 'grid' must be non-empty");
    for (size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 1) throw ConfigError("rate study: grid horizons must be >= 1");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw ConfigError("rate study: grid must be strictly increasing");
    }
    PreparedExperiment prep = prepare(config, false);
    OptimalSolution opt = solve_optimal(prep.mdp);
    Vector p0 = prep.opts.eval_initial.size()
                    ? prep.opts.eval_initial
                    : Vector::Constant(prep.mdp.n_states(), 1.0 / prep.mdp.n_states());
    const double v_star = p0.dot(opt.value.values);

    RateStudyResult result;
    const long n_seeds = static_cast<long>(config.seeds.size());
    for (long horizon : t_grid) {
        std::vector<double> gaps(n_seeds);
        parallel_for(n_seeds, config.n_threads, [&](long i) {
            std::uint64_t seed = config.seeds[static_cast<size_t>(i)];
            RandomStream rng(config.experiment_seed, seed);
            QTable q0(prep.mdp.n_states(), prep.mdp.n_actions());
            RunResult rr = run(prep.mdp, config.schedule, horizon, q0, config.initial_state,
                               prep.opts, rng);
            gaps[i] = v_star - exact_v(prep.mdp, rr.output_policy, p0).aggregate;
        });
        RatePoint point;
        point.T = horizon;
        point.median_gap = median(gaps);
        point.iqr_gap = quantile(gaps, 0.75) - quantile(gaps, 0.25);
        result.points.push_back(point);
    }

    // Least-squares slope of log median gap against log T.
    if (result.points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const RatePoint& p : result.points) {
            double x = std::log(static_cast<double>(p.T));
            double y = std::log(std::max(p.median_gap, 1e-15));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double n = static_cast<double>(result.points.size());
        result.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output_dir '" + config.output_dir + "'");
    std::string csv = "T,median_value_gap,iqr_value_gap\n";
    for (const RatePoint& p : result.points) {
        csv += std::to_string(p.T);
        csv += ',';
        csv += format_double(p.median_gap);
        csv += ',';
        csv += format_double(p.iqr_gap);
        csv += '\n';
    }
    write_text_file(dir / "rate.csv", csv);
    json j;
    j["points"] = json::array();
    for (const RatePoint& p : result.points)
        j["points"].push_back(
            {{"T", p.T}, {"median_value_gap", p.median_gap}, {"iqr_value_gap", p.iqr_gap}});
    j["loglog_slope"] = result.loglog_slope;
    write_text_file(dir / "rate_summary.json", j.dump(2) + "\n");
    return result;
}

namespace {

Policy draw_policy(int n_states, int n_actions, RandomStream& rng) {
    Matrix probs(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        double total = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            probs(s, a) = -std::log(1.0 - rng.next_uniform());
            total += probs(s, a);
        }
        probs.row(s) /= total;
    }
    return Policy(std::move(probs));
}

LemmaCheckResult merge_results(const std::vector<LemmaCheckResult>& parts, std::string id) {
    LemmaCheckResult merged{std::move(id), 0, 0, 0.0};
    bool any = false;
    for (const LemmaCheckResult& p : parts) {
        merged.instances += p.instances;
        merged.violations += p.violations;
        if (p.instances) {
            merged.worst_margin = any ? std::min(merged.worst_margin, p.worst_margin)
                                      : p.worst_margin;
            any = true;
        }
    }
    return merged;
}

}  // namespace

std::vector<LemmaCheckResult> verify(const ExperimentConfig& config) {
    PreparedExperiment prep = prepare(config, true);
    const Mdp& mdp = prep.mdp;
    // Diagnostics draws come from a dedicated sub-stream so they never
    // interfere with experiment streams.
    RandomStream rng(config.experiment_seed, 0x76657269667900ULL);

    // Trace-based checks ride on a real run with the configured schedule.
    std::uint64_t run_seed = config.seeds.front();
    RandomStream run_rng(config.experiment_seed, run_seed);
    QTable q0(mdp.n_states(), mdp.n_actions());
    RunResult rr =
        run(mdp, config.schedule, config.T, q0, config.initial_state, prep.opts, run_rng);

    std::vector<LemmaCheckResult> report;
    report.push_back(check_q_function_drift(mdp, config.schedule, rr.trace));
    report.push_back(check_theta_drift(mdp, config.schedule, rr.trace));

    {
        std::vector<LemmaCheckResult> parts;
        for (int i = 0; i < 20; ++i) {
            double gamma = 0.6 + 0.35 * rng.next_uniform();
            Mdp random_mdp = build_random_ergodic(4, 2, gamma, 0.02, rng);
            Policy pi = draw_policy(4, 2, rng);
            double eps = 0.05 + 0.95 * rng.next_uniform();
            parts.push_back(check_negative_drift(random_mdp, pi, eps, 5, rng));
        }
        report.push_back(merge_results(parts, "5.4"));
    }

    report.push_back(check_value_bounds(100, rr.trace, mdp.q_max(), rng));

    {
        std::vector<LemmaCheckResult> parts;
        for (int i = 0; i < 5; ++i) {
            double gamma = 0.6 + 0.35 * rng.next_uniform();
            Mdp random_mdp = build_random_ergodic(5, 2, gamma, 0.02, rng);
            parts.push_back(check_q_lipschitz(random_mdp, 20, rng));
        }
        report.push_back(merge_results(parts, "5.10"));
    }

    report.push_back(check_policy_drift(mdp, config.schedule, rr.trace));
    report.push_back(check_critic_step(mdp, config.schedule, rr.trace));

    {
        std::vector<LemmaCheckResult> parts;
        for (int i = 0; i < 20; ++i) {
            double gamma = 0.6 + 0.35 * rng.next_uniform();
            Mdp random_mdp = build_random_ergodic(5, 2, gamma, 0.02, rng);
            parts.push_back(check_performance_difference(random_mdp, 1, 1e-8, rng));
        }
        report.push_back(merge_results(parts, "PDL"));
    }

    report.push_back(check_gamma_mean(20, 1e-10, rng));
    report.push_back(
        check_mixing_certificate(induced_kernel(mdp, Policy::uniform(mdp.n_states(),
                                                                     mdp.n_actions())),
                                 64));

    std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output_dir '" + config.output_dir + "'");
    write_text_file(dir / "verify_report.json", report_to_json(report) + "\n");
    return report;
}

std::string report_to_json(const std::vector<LemmaCheckResult>& results) {
    json j = json::array();
    for (const LemmaCheckResult& r : results)
        j.push_back({{"lemma_id", r.lemma_id},
                     {"instances", r.instances},
                     {"violations", r.violations},
                     {"worst_margin", r.worst_margin}});
    return j.dump(2);
}

std::string solve_to_json(const Mdp& mdp) {
    OptimalSolution opt = solve_optimal(mdp);
    json j;
    j["gamma"] = mdp.gamma();
    j["v_star"] = json::array();
    for (int s = 0; s < mdp.n_states(); ++s) j["v_star"].push_back(opt.value.values(s));
    j["pi_star"] = opt.policy.argmax_actions();
    j["q_star"] = json::array();
    for (int s = 0; s < mdp.n_states(); ++s) {
        json row = json::array();
        for (int a = 0; a < mdp.n_actions(); ++a)
            row.push_back(opt.q(s, a, mdp.n_actions()));
        j["q_star"].push_back(std::move(row));
    }
    return j.dump(2);
}

}  // namespace nac2ts
