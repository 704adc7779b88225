#pragma once

#include <Eigen/Dense>

#include "nac2ts/mdp.hpp"

namespace nac2ts {

/// Action-value table stored flat over state-action pairs (flat_index layout).
struct QTable {
    Vector flat;

    QTable() = default;
    QTable(int n_states, int n_actions) : flat(Vector::Zero(n_states * n_actions)) {}
    explicit QTable(Vector values) : flat(std::move(values)) {}

    double operator()(int s, int a, int n_actions) const {
        return flat(flat_index(s, a, n_actions));
    }
    double& at(int s, int a, int n_actions) { return flat(flat_index(s, a, n_actions)); }
    double sup_norm() const { return flat.size() ? flat.cwiseAbs().maxCoeff() : 0.0; }
};

/// Per-state values plus their average under the initial distribution used to
/// produce them.
struct ValueTable {
    Vector values;
    double aggregate = 0.0;
};

/// Discounted state-visitation weights d(s) = (1-gamma) sum_k gamma^k P(S_k = s).
struct VisitationDistribution {
    Vector weights;
};

/// Deterministic optimal policy with its value function.
struct OptimalSolution {
    Policy policy;
    ValueTable value;
    QTable q;
};

/// Policy evaluation by direct linear solve of (I - gamma P Pi) Q = R over the
/// flat state-action space. Residual is checked to 1e-10 in sup norm.
QTable exact_q(const Mdp& mdp, const Policy& pi);

/// V(s) = sum_a pi(a|s) Q^pi(s,a); aggregate taken against `initial`.
ValueTable exact_v(const Mdp& mdp, const Policy& pi, const Vector& initial);

/// Solves d^T = (1-gamma) initial^T + gamma d^T K for the induced kernel K.
VisitationDistribution discounted_visitation(const Mdp& mdp, const Policy& pi,
                                             const Vector& initial);

/// Policy iteration with lowest-action-index tie-breaking. The returned value
/// satisfies the optimality equations to 1e-10; `value.aggregate` is taken
/// against the uniform initial distribution.
OptimalSolution solve_optimal(const Mdp& mdp);

/// The linear-algebra objects behind the critic recursion
///   Q_{t+1} = Q_t + alpha_t (r(O_t) + A(O_t) Q_t)
/// for observed tuples O = (s,a,s',a'): the sparse per-sample matrix A(O), the
/// per-sample reward vector r(O), and the stationary mean
/// A_bar = M (gamma P_pi - I) under the sampling policy.
class GammaInstruments {
  public:
    static GammaInstruments build(const Mdp& mdp, const Policy& pi);

    int dim() const { return static_cast<int>(a_bar_.rows()); }
    int n_actions() const { return n_actions_; }
    const Eigen::MatrixXd& a_bar() const { return a_bar_; }
    /// Stationary weight mu(s) pi(a|s) of each flat pair.
    const Vector& pair_weights() const { return pair_weights_; }

    /// Dense |S||A| x |S||A| realization of A(O); it has at most two nonzeros.
    Eigen::MatrixXd a_of(const StepSample& o) const;
    /// r(O): R(s,a) at the observed pair, zero elsewhere.
    Vector r_of(const StepSample& o) const;
    /// (A(O) v) evaluated without materializing A(O).
    double a_apply_at_pair(const StepSample& o, const Vector& v) const;
    /// R at the observed pair.
    double reward_at(const StepSample& o) const;

  private:
    GammaInstruments(Eigen::MatrixXd a_bar, Vector pair_weights, Vector reward_flat,
                     double gamma, int n_actions);

    Eigen::MatrixXd a_bar_;
    Vector pair_weights_;
    Vector reward_flat_;
    double gamma_;
    int n_actions_;
};

/// Gamma(pi, theta, O) = theta^T (r(O) + A(O) Q^pi) + theta^T (A(O) - A_bar) theta.
/// Its mean over the stationary tuple distribution is exactly zero; the
/// verification suite checks that numerically.
double gamma_value(const GammaInstruments& inst, const QTable& q_pi, const Vector& theta,
                   const StepSample& o);

}  // namespace nac2ts
