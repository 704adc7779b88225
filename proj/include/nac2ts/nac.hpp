#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nac2ts/exact.hpp"
#include "nac2ts/mdp.hpp"
#include "nac2ts/rng.hpp"

namespace nac2ts {

/// Polynomially decaying step sizes
///   alpha_t = alpha / (t+1)^nu   (critic)
///   beta_t  = beta  / (t+1)^sigma (actor)
///   eps_t   = eps   / (t+1)^xi    (exploration),  eps_t := 0 for t < 0.
///
/// The two-time-scale rate analysis needs 0 <= xi < nu < sigma < 1 with
/// positive bases and alpha, eps <= 1; `theorem_rates` enforces that.
/// `relaxed` skips the ordering/positivity checks for ablations (eps == 0,
/// beta == 0) but always keeps alpha <= 1 and eps <= 1, which the
/// Q-boundedness induction requires.
class Schedule {
  public:
    static Schedule theorem_rates(double alpha_base, double beta_base, double eps_base,
                                  double nu, double sigma, double xi);
    static Schedule relaxed(double alpha_base, double beta_base, double eps_base, double nu,
                            double sigma, double xi);
    /// Named presets: "corollary_1_1" (xi=0, nu=1/2, sigma=3/4),
    /// "corollary_1_2" (xi=1/6, nu=1/2, sigma=5/6), "no_exploration"
    /// (corollary_1_1 rates with eps == 0, relaxed). Bases default to 1/2.
    static Schedule preset(const std::string& name);

    double alpha_at(long t) const;
    double beta_at(long t) const;
    double eps_at(long t) const;  // returns 0 for t < 0

    double alpha_base() const { return alpha_base_; }
    double beta_base() const { return beta_base_; }
    double eps_base() const { return eps_base_; }
    double nu() const { return nu_; }
    double sigma() const { return sigma_; }
    double xi() const { return xi_; }
    bool is_relaxed() const { return relaxed_; }

  private:
    Schedule(double alpha_base, double beta_base, double eps_base, double nu, double sigma,
             double xi, bool relaxed);

    double alpha_base_, beta_base_, eps_base_;
    double nu_, sigma_, xi_;
    bool relaxed_;
};

/// Mutable algorithm state between iterations: at time t it holds Q_t, the
/// actor logits of pi_t, the mixed policies pihat_t and pihat_{t-1}, and the
/// pending (S_t, A_t).
struct NacState {
    long t = 0;
    QTable q;
    PolicyLogits logits;
    Policy pi_hat;
    Policy pi_hat_prev;
    int state = 0;
    int action = 0;

    NacState(int n_states, int n_actions)
        : q(n_states, n_actions),
          logits(n_states, n_actions),
          pi_hat(Policy::uniform(n_states, n_actions)),
          pi_hat_prev(Policy::uniform(n_states, n_actions)) {}
};

/// Everything recorded at a checkpoint iteration t. The first block feeds the
/// CSV trace; the snapshots make one-step drift checks possible from a single
/// row (each row carries both the t-1 and t policies and both Q_t and Q_{t+1}).
struct TraceRow {
    long t = 0;
    double value_gap = 0.0;         // V*(P0) - V^{pihat_t}(P0)
    double critic_error = 0.0;      // ||Q_{t+1} - Q^{pihat_t}||_2
    double theta_norm = 0.0;        // ||Q_t - Q^{pihat_{t-1}}||_2
    double min_policy_entry = 0.0;  // min entry of pihat_t
    double pi_watch = 0.0;          // pihat_t at the watched pair
    double kl_potential = 0.0;      // E_{d*}[KL(pi* || pihat_t)]

    StepSample obs;       // (S_t, A_t, S_{t+1}, A_{t+1})
    Policy pi_hat;        // pihat_t
    Policy pi_hat_prev;   // pihat_{t-1}
    Policy pi;            // unmixed pi_t
    QTable q_before;      // Q_t
    QTable q_after;       // Q_{t+1}
    double alpha_t = 0.0, beta_t = 0.0, eps_t = 0.0;
};

struct RunResult {
    Policy output_policy;  // pihat_{T_hat}
    long output_index = 0;
    std::vector<TraceRow> trace;
    NacState final_state;  // state after the last iteration (t = T+1)
};

/// Checkpointing and metric options for run().
struct TraceOptions {
    std::vector<long> checkpoints;  // sorted unique iterations in [0, T]
    int watch_state = 0;
    int watch_action = 0;
    Vector eval_initial;  // initial distribution for the value gap; empty = uniform
};

/// alpha_t, beta_t, eps_t evaluated together at iteration t.
struct StepSizes {
    double alpha, beta, eps;
};
StepSizes schedule_at(const Schedule& sched, long t);

/// One critic step: the observed pair moves toward its TD target
///   Q(s,a) += alpha [R(s,a) + gamma Q(s',a') - Q(s,a)],
/// every other entry is untouched.
void critic_update(QTable& q, const Mdp& mdp, const StepSample& o, double alpha);

/// One actor step: logits gain beta * Q over all pairs, i.e. the
/// multiplicative-weights update pi <- pi .* exp(beta Q) / Z per state.
void actor_update(PolicyLogits& logits, const QTable& q, double beta);

/// Randomized output index with P(i) = beta_i / sum_j beta_j over 0..T.
/// All-zero weights are a DomainError.
long sample_output_index(const std::vector<double>& betas, RandomStream& rng);

/// Full training run, iterations t = 0..T inclusive:
///   sample (S_{t+1}, A_{t+1}) under pihat_t, critic update, actor update,
///   then mix pihat_{t+1} = eps_t/|A| + (1 - eps_t) pi_{t+1}.
/// Returns pihat_{T_hat} with T_hat ~ beta weights (drawn up front; its law
/// depends only on the schedule). Checkpoint metrics use the exact solvers.
/// q0 entries must lie in [0, 1/(1-gamma)].
RunResult run(const Mdp& mdp, const Schedule& sched, long T, const QTable& q0,
              int initial_state, const TraceOptions& opts, RandomStream& rng);

}  // namespace nac2ts
