#include "nac2ts/nac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nac2ts/diagnostics.hpp"

namespace nac2ts {

Schedule::Schedule(double alpha_base, double beta_base, double eps_base, double nu,
                   double sigma, double xi, bool relaxed)
    : alpha_base_(alpha_base),
      beta_base_(beta_base),
      eps_base_(eps_base),
      nu_(nu),
      sigma_(sigma),
      xi_(xi),
      relaxed_(relaxed) {
    // Hard invariants that even ablations keep: the critic convexity argument
    // needs alpha_t <= 1 and the policy mixture needs eps_t <= 1.
    if (!(alpha_base_ >= 0.0 && alpha_base_ <= 1.0))
        throw DomainError("Schedule: alpha_base must lie in [0,1]");
    if (!(eps_base_ >= 0.0 && eps_base_ <= 1.0))
        throw DomainError("Schedule: eps_base must lie in [0,1]");
    if (!(beta_base_ >= 0.0) || !std::isfinite(beta_base_))
        throw DomainError("Schedule: beta_base must be non-negative");
    if (!(nu_ >= 0.0) || !(sigma_ >= 0.0) || !(xi_ >= 0.0) || !std::isfinite(nu_) ||
        !std::isfinite(sigma_) || !std::isfinite(xi_))
        throw DomainError("Schedule: exponents must be finite and non-negative");
}

Schedule Schedule::theorem_rates(double alpha_base, double beta_base, double eps_base,
                                 double nu, double sigma, double xi) {
    if (!(alpha_base > 0.0)) throw DomainError("Schedule: alpha_base must be positive");
    if (!(beta_base > 0.0)) throw DomainError("Schedule: beta_base must be positive");
    if (!(eps_base > 0.0))
        throw DomainError("Schedule: eps_base must be positive (use relaxed() for eps == 0)");
    if (!(0.0 <= xi && xi < nu && nu < sigma && sigma < 1.0))
        throw DomainError("Schedule: exponents must satisfy 0 <= xi < nu < sigma < 1");
    return Schedule(alpha_base, beta_base, eps_base, nu, sigma, xi, false);
}

Schedule Schedule::relaxed(double alpha_base, double beta_base, double eps_base, double nu,
                           double sigma, double xi) {
    return Schedule(alpha_base, beta_base, eps_base, nu, sigma, xi, true);
}

Schedule Schedule::preset(const std::string& name) {
    if (name == "corollary_1_1") return theorem_rates(0.5, 0.5, 0.5, 0.5, 0.75, 0.0);
    if (name == "corollary_1_2")
        return theorem_rates(0.5, 0.5, 0.5, 0.5, 5.0 / 6.0, 1.0 / 6.0);
    if (name == "no_exploration") return relaxed(0.5, 0.5, 0.0, 0.5, 0.75, 0.0);
    throw ConfigError("Schedule: unknown preset '" + name + "'");
}

double Schedule::alpha_at(long t) const {
    if (t < 0) throw DomainError("Schedule::alpha_at: t must be >= 0");
    return alpha_base_ / std::pow(static_cast<double>(t + 1), nu_);
}

double Schedule::beta_at(long t) const {
    if (t < 0) throw DomainError("Schedule::beta_at: t must be >= 0");
    return beta_base_ / std::pow(static_cast<double>(t + 1), sigma_);
}

double Schedule::eps_at(long t) const {
    if (t < 0) return 0.0;
    return eps_base_ / std::pow(static_cast<double>(t + 1), xi_);
}

StepSizes schedule_at(const Schedule& sched, long t) {
    return StepSizes{sched.alpha_at(t), sched.beta_at(t), sched.eps_at(t)};
}

void critic_update(QTable& q, const Mdp& mdp, const StepSample& o, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("critic_update: alpha must lie in [0,1]");
    const int A = mdp.n_actions();
    if (q.flat.size() != mdp.n_states() * A)
        throw ShapeError("critic_update: Q table shape does not match MDP");
    const int i = flat_index(o.s, o.a, A);
    const int j = flat_index(o.s_next, o.a_next, A);
    q.flat(i) += alpha * (mdp.r(o.s, o.a) + mdp.gamma() * q.flat(j) - q.flat(i));
}

void actor_update(PolicyLogits& logits, const QTable& q, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw DomainError("actor_update: beta must be non-negative");
    const int S = logits.n_states(), A = logits.n_actions();
    if (q.flat.size() != S * A)
        throw ShapeError("actor_update: Q table shape does not match logits");
    logits.z() += beta * Eigen::Map<const Matrix>(q.flat.data(), S, A);
}

long sample_output_index(const std::vector<double>& betas, RandomStream& rng) {
    if (betas.empty()) throw DomainError("sample_output_index: empty weight vector");
    return rng.sample_categorical(betas);
}

namespace {

Vector uniform_distribution(int n) { return Vector::Constant(n, 1.0 / n); }

void validate_checkpoints(const std::vector<long>& cks, long T) {
    for (size_t i = 0; i < cks.size(); ++i) {
        if (cks[i] < 0 || cks[i] > T)
            throw ConfigError("run: checkpoint " + std::to_string(cks[i]) +
                              " outside [0, T]");
        if (i > 0 && cks[i] <= cks[i - 1])
            throw ConfigError("run: checkpoints must be strictly increasing");
    }
}

}  // namespace

RunResult run(const Mdp& mdp, const Schedule& sched, long T, const QTable& q0,
              int initial_state, const TraceOptions& opts, RandomStream& rng) {
    const int S = mdp.n_states(), A = mdp.n_actions();
    if (T < 0) throw DomainError("run: T must be >= 0");
    if (initial_state < 0 || initial_state >= S)
        throw DomainError("run: initial_state out of range");
    if (q0.flat.size() != S * A) throw ShapeError("run: q0 shape does not match MDP");
    if (q0.flat.size() && (q0.flat.minCoeff() < 0.0 || q0.flat.maxCoeff() > mdp.q_max() + 1e-12))
        throw DomainError("run: q0 entries must lie in [0, 1/(1-gamma)]");
    validate_checkpoints(opts.checkpoints, T);
    if (opts.watch_state < 0 || opts.watch_state >= S || opts.watch_action < 0 ||
        opts.watch_action >= A)
        throw DomainError("run: watched pair out of range");
    Vector eval_initial = uniform_distribution(S);
    if (opts.eval_initial.size()) {
        if (opts.eval_initial.size() != S)
            throw ShapeError("run: eval_initial has wrong length");
        double sum = 0.0;
        for (Eigen::Index i = 0; i < opts.eval_initial.size(); ++i) {
            if (!std::isfinite(opts.eval_initial(i)) || opts.eval_initial(i) < 0.0)
                throw DomainError("run: eval_initial entries must be non-negative");
            sum += opts.eval_initial(i);
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw DomainError("run: eval_initial must sum to 1");
        eval_initial = opts.eval_initial / sum;
    }

    // Exact references for checkpoint metrics, computed once per run.
    const bool tracing = !opts.checkpoints.empty();
    Policy pi_star = Policy::uniform(S, A);
    VisitationDistribution d_star;
    double v_star_agg = 0.0;
    if (tracing) {
        OptimalSolution opt = solve_optimal(mdp);
        pi_star = opt.policy;
        d_star = discounted_visitation(mdp, pi_star, eval_initial);
        v_star_agg = eval_initial.dot(opt.value.values);
    }

    // Output index first: P(T_hat = i) = beta_i / sum_j beta_j depends only on
    // the schedule, and drawing it now means we keep a single policy snapshot
    // instead of all T+1. An all-zero actor schedule (critic-only ablation)
    // leaves T_hat undefined, so we pin it to T while still consuming one draw.
    std::vector<double> betas(static_cast<size_t>(T) + 1);
    for (long t = 0; t <= T; ++t) betas[static_cast<size_t>(t)] = sched.beta_at(t);
    double beta_total = 0.0;
    for (double b : betas) beta_total += b;
    long t_hat;
    if (beta_total > 0.0) {
        t_hat = sample_output_index(betas, rng);
    } else {
        rng.next_uniform();
        t_hat = T;
    }

    NacState st(S, A);
    st.q = q0;
    st.state = initial_state;
    // A_0 ~ pi_0 = uniform (pihat_0 equals it).
    st.action = rng.sample_categorical(
        std::span<const double>{st.pi_hat.probs().data() + initial_state * A,
                                static_cast<size_t>(A)});

    RunResult result{st.pi_hat, t_hat, {}, st};
    result.trace.reserve(opts.checkpoints.size());

    size_t next_ckpt = 0;
    for (long t = 0; t <= T; ++t) {
        if (t == t_hat) result.output_policy = st.pi_hat;
        const StepSizes ss = schedule_at(sched, t);
        const StepSample o = sample_step(mdp, st.pi_hat, st.state, st.action, rng);

        const bool at_ckpt = next_ckpt < opts.checkpoints.size() &&
                             opts.checkpoints[next_ckpt] == t;
        std::optional<TraceRow> row;
        if (at_ckpt) {
            row = TraceRow{.t = t,
                           .obs = o,
                           .pi_hat = st.pi_hat,
                           .pi_hat_prev = st.pi_hat_prev,
                           .pi = st.logits.materialize(),
                           .q_before = st.q,
                           .q_after = QTable{},  // filled in after the critic step
                           .alpha_t = ss.alpha,
                           .beta_t = ss.beta,
                           .eps_t = ss.eps};
        }

        critic_update(st.q, mdp, o, ss.alpha);

        if (at_ckpt) {
            row->q_after = st.q;
            QTable q_cur = exact_q(mdp, row->pi_hat);
            QTable q_prev = exact_q(mdp, row->pi_hat_prev);
            Vector v_cur(S);
            for (int s = 0; s < S; ++s) {
                double acc = 0.0;
                for (int a = 0; a < A; ++a) acc += row->pi_hat(s, a) * q_cur(s, a, A);
                v_cur(s) = acc;
            }
            row->value_gap = v_star_agg - eval_initial.dot(v_cur);
            row->critic_error = (row->q_after.flat - q_cur.flat).norm();
            row->theta_norm = (row->q_before.flat - q_prev.flat).norm();
            row->min_policy_entry = row->pi_hat.probs().minCoeff();
            row->pi_watch = row->pi_hat(opts.watch_state, opts.watch_action);
            // Without exploration the trained policy can lose all mass on an
            // optimal action; the KL potential then diverges, which is exactly
            // the failure signal, so record it as +inf instead of erroring out.
            try {
                row->kl_potential = kl_potential(row->pi_hat, pi_star, d_star);
            } catch (const DomainError&) {
                row->kl_potential = std::numeric_limits<double>::infinity();
            }
            result.trace.push_back(std::move(*row));
            ++next_ckpt;
        }

        actor_update(st.logits, st.q, ss.beta);
        st.pi_hat_prev = std::move(st.pi_hat);
        st.pi_hat = mix_epsilon_greedy(st.logits.materialize(), ss.eps);
        st.state = o.s_next;
        st.action = o.a_next;
        st.t = t + 1;
    }

    result.final_state = std::move(st);
    return result;
}

}  // namespace nac2ts
