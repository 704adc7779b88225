#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nac2ts/errors.hpp"
#include "nac2ts/rng.hpp"

namespace nac2ts {

// Row-major everywhere: a row is a distribution we sample from, so it has to
// be contiguous in memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Flat state-action index; all |S||A|-dimensional objects use this layout.
inline int flat_index(int s, int a, int n_actions) { return s * n_actions + a; }

/// One observed transition: state, action, next state, next action.
struct StepSample {
    int s = 0;
    int a = 0;
    int s_next = 0;
    int a_next = 0;
};

/// Row-stochastic matrix over states. Rows within 1e-9 of unit mass are
/// renormalized at construction; anything further off is rejected.
class TransitionKernel {
  public:
    explicit TransitionKernel(Matrix rows);

    int n_states() const { return static_cast<int>(rows_.rows()); }
    const Matrix& rows() const { return rows_; }
    double operator()(int s, int s_next) const { return rows_(s, s_next); }

  private:
    Matrix rows_;
};

/// Stochastic policy, one simplex row per state. Same normalization rule as
/// TransitionKernel.
class Policy {
  public:
    explicit Policy(Matrix probs);

    static Policy uniform(int n_states, int n_actions);
    /// One-hot policy from per-state action indices.
    static Policy deterministic(const std::vector<int>& actions, int n_actions);

    int n_states() const { return static_cast<int>(probs_.rows()); }
    int n_actions() const { return static_cast<int>(probs_.cols()); }
    const Matrix& probs() const { return probs_; }
    double operator()(int s, int a) const { return probs_(s, a); }

    /// Greedy action per state, lowest index on ties.
    std::vector<int> argmax_actions() const;

  private:
    Matrix probs_;
};

/// Policy parameterized by accumulated logits z(s,a); the multiplicative-weights
/// actor adds to z instead of renormalizing probabilities, which stays exact
/// after arbitrarily many updates.
class PolicyLogits {
  public:
    PolicyLogits(int n_states, int n_actions) : z_(Matrix::Zero(n_states, n_actions)) {}
    explicit PolicyLogits(Matrix z) : z_(std::move(z)) {}

    int n_states() const { return static_cast<int>(z_.rows()); }
    int n_actions() const { return static_cast<int>(z_.cols()); }
    Matrix& z() { return z_; }
    const Matrix& z() const { return z_; }

    /// Row-wise softmax with row-max subtraction.
    Policy materialize() const;

  private:
    Matrix z_;
};

/// Finite MDP with rewards in [0,1] and 0 < gamma < 1. Transition rows live in
/// a (|S||A|) x |S| table indexed by flat_index.
class Mdp {
  public:
    Mdp(Matrix transition, Matrix reward, double gamma);

    int n_states() const { return static_cast<int>(reward_.rows()); }
    int n_actions() const { return static_cast<int>(reward_.cols()); }
    double gamma() const { return gamma_; }
    const Matrix& transition() const { return transition_; }
    const Matrix& reward() const { return reward_; }
    double p(int s, int a, int s_next) const {
        return transition_(flat_index(s, a, n_actions()), s_next);
    }
    double r(int s, int a) const { return reward_(s, a); }
    /// Upper bound 1/(1-gamma) on any discounted value.
    double q_max() const { return 1.0 / (1.0 - gamma_); }

  private:
    Matrix transition_;
    Matrix reward_;
    double gamma_;
};

/// eps-greedy mixture eps/|A| + (1-eps)*pi. eps outside [0,1] is a DomainError.
Policy mix_epsilon_greedy(const Policy& pi, double eps);

/// State chain K(s,s') = sum_a pi(a|s) P(s'|s,a) induced by following pi.
TransitionKernel induced_kernel(const Mdp& mdp, const Policy& pi);

/// Irreducible and aperiodic on the positive-support graph.
bool is_ergodic(const TransitionKernel& kernel);

/// Stationary distribution of an ergodic kernel: least-squares solve of
/// (P^T - I) mu = 0 with sum(mu) = 1 appended, power-iteration fallback.
/// Throws ErgodicityError for reducible or periodic chains, SolverError if
/// neither route reaches `tol`.
Vector stationary_distribution(const TransitionKernel& kernel, double tol = 1e-10);

/// Draw s' ~ P(.|s,a) and a' ~ pi(.|s') with one uniform each.
StepSample sample_step(const Mdp& mdp, const Policy& pi, int s, int a, RandomStream& rng);

/// Four-state, two-action chain whose optimal action at state 0 is action 1,
/// but whose reward structure baits a greedy agent into action 0. Used as the
/// exploration stress test throughout.
Mdp build_counterexample(double gamma = 0.95);

/// Random MDP with every transition entry floored at `smoothing` (after a
/// Dirichlet-like row draw) so any policy induces an ergodic chain. Rewards
/// uniform in [0,1]. Requires smoothing * n_states < 1.
Mdp build_random_ergodic(int n_states, int n_actions, double gamma, double smoothing,
                         RandomStream& rng);

/// JSON serialization: {"n_states", "n_actions", "gamma", "transition", "reward"}
/// with transition nested [s][a][s'] and reward [s][a]. Loading runs full
/// construction-time validation, so doctored files are rejected.
std::string mdp_to_json_text(const Mdp& mdp);
Mdp mdp_from_json_text(const std::string& text);
void save_mdp_json(const Mdp& mdp, const std::string& path);
Mdp load_mdp_json(const std::string& path);

}  // namespace nac2ts
