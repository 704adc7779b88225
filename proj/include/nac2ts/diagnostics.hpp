#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nac2ts/exact.hpp"
#include "nac2ts/mdp.hpp"
#include "nac2ts/nac.hpp"

namespace nac2ts {

/// Geometric mixing certificate: tv(tau) <= m * rho^tau for every measured tau,
/// where tv(tau) is the worst-state total-variation distance between the
/// tau-step kernel row and the stationary distribution.
struct MixingEstimate {
    double m = 0.0;
    double rho = 0.0;
    std::vector<double> tv_curve;  // tv_curve[k] = tv(k+1)
};

/// Problem constants used by the drift bounds. mu_min is absent when the
/// evaluated policy does not induce an ergodic chain.
struct ConstantsReport {
    double q_max = 0.0;    // 1/(1-gamma)
    double delta_q = 0.0;  // 2 q_max + 1, sup norm of a critic TD step at alpha=1
    double l1 = 0.0;       // q_max sqrt(|A||S|)   (actor drift)
    double l2 = 0.0;       // gamma |S||A|/(1-gamma)^2  (Q^pi Lipschitz constant)
    double l3 = 0.0;       // xi sqrt(|S|) (1/sqrt(|A|) + 1)  (exploration drift)
    std::optional<double> mu_min;
};

/// Outcome of one numerical check suite. `worst_margin` is the most binding
/// signed slack: bound - value for inequality checks, tolerance - |residual|
/// for identity checks. Negative margins beyond a 1e-9-scale float allowance
/// count as violations.
struct LemmaCheckResult {
    std::string lemma_id;
    long instances = 0;
    long violations = 0;
    double worst_margin = 0.0;
};

ConstantsReport constants_report(const Mdp& mdp, const Schedule& sched, const Policy& pi);

/// KL-divergence potential E_{s ~ d_star}[KL(pi_star(.|s) || pi(.|s))].
/// pi must put positive mass wherever pi_star does (else DomainError);
/// 0 log 0 terms are dropped.
double kl_potential(const Policy& pi, const Policy& pi_star, const VisitationDistribution& d_star);

/// Fits tv(tau) over tau = 1..tau_max: rho by least squares on log tv over the
/// tail half, m as the smallest constant making m rho^tau dominate the whole
/// measured curve. Non-ergodic kernels are an ErgodicityError.
MixingEstimate estimate_mixing(const TransitionKernel& kernel, int tau_max);

/// Certificate quality check (report id "mixing"): fit on tau_max, then
/// re-measure out to 2*tau_max and count dominance failures.
LemmaCheckResult check_mixing_certificate(const TransitionKernel& kernel, int tau_max);

/// Negative drift of the mean critic field (report id "5.4"): for the
/// eps-mixed policy, theta^T A_bar theta <= -(1-gamma)(eps/|A|) mu_min ||theta||^2
/// over `n_samples` Gaussian theta draws (plus theta = 0).
LemmaCheckResult check_negative_drift(const Mdp& mdp, const Policy& pi, double eps,
                                      int n_samples, RandomStream& rng);

/// Value-function Lipschitz bound (report id "5.10"):
/// ||Q^{pi1} - Q^{pi2}|| <= L2 ||pi1 - pi2|| over random policy pairs.
LemmaCheckResult check_q_lipschitz(const Mdp& mdp, int n_pairs, RandomStream& rng);

/// Sampling-policy drift (report id "5.11"): each trace row with t >= 2 checks
/// ||pihat_t - pihat_{t-1}|| <= L1 beta_{t-1} + L3 eps_{t-2}/(t-1).
LemmaCheckResult check_policy_drift(const Mdp& mdp, const Schedule& sched,
                                    const std::vector<TraceRow>& trace);

/// Critic-target drift (report id "5.3"): squared one-step change of
/// theta_t = Q_t - Q^{pihat_{t-1}} against
/// 2 alpha_t^2 delta_q^2 + 4 L2^2 L3^2 eps_{t-2}^2/(t-1)^2 + 4 L2^2 L1^2 beta_{t-1}^2.
LemmaCheckResult check_theta_drift(const Mdp& mdp, const Schedule& sched,
                                   const std::vector<TraceRow>& trace);

/// Drift of the evaluated value function (report id "5.2"):
/// ||Q^{pihat_t} - Q^{pihat_{t-1}}|| <= L2 (L3 eps_{t-2}/(t-1) + L1 beta_{t-1}).
LemmaCheckResult check_q_function_drift(const Mdp& mdp, const Schedule& sched,
                                        const std::vector<TraceRow>& trace);

/// One-step critic movement (report id "C.7-6"): ||Q_{t+1} - Q_t|| <= alpha_t delta_q.
LemmaCheckResult check_critic_step(const Mdp& mdp, const Schedule& sched,
                                   const std::vector<TraceRow>& trace);

/// Range bounds (report id "5.5"): exact Q and V of random (MDP, policy)
/// instances lie in [0, q_max], ||Q^pi|| <= sqrt(|S||A|) q_max, and every
/// trace iterate satisfies ||Q_t||_inf <= q_max.
LemmaCheckResult check_value_bounds(int n_instances, const std::vector<TraceRow>& trace,
                                    double q_max_trace, RandomStream& rng);

/// Performance-difference identity (report id "PDL"), |lhs - rhs| <= tol:
/// V^{pi1}(P0) - V^{pi2}(P0) = 1/(1-gamma) sum_{s,a} d^{pi1}(s) pi1(a|s)
///                             (Q^{pi2}(s,a) - V^{pi2}(s)).
LemmaCheckResult check_performance_difference(const Mdp& mdp, int n_pairs, double tol,
                                              RandomStream& rng);

/// Stationary mean of the Gamma instrument is zero (report id "Gamma-mean"):
/// exhaustive tuple enumeration over random (MDP, mixed policy, theta)
/// instances, |mean| <= tol.
LemmaCheckResult check_gamma_mean(int n_instances, double tol, RandomStream& rng);

}  // namespace nac2ts
