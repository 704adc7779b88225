#include "nac2ts/exact.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace nac2ts {

namespace {

void check_policy_shape(const Mdp& mdp, const Policy& pi, const char* where) {
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions())
        throw ShapeError(std::string(where) + ": policy shape does not match MDP");
}

Vector checked_distribution(const Vector& initial, int n_states, const char* where) {
    if (initial.size() != n_states)
        throw ShapeError(std::string(where) + ": initial distribution has wrong length");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < initial.size(); ++i) {
        if (!std::isfinite(initial(i)) || initial(i) < 0.0)
            throw DomainError(std::string(where) + ": initial distribution entry negative");
        sum += initial(i);
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DomainError(std::string(where) + ": initial distribution does not sum to 1");
    return initial / sum;
}

// pi as a |S| x |S||A| selection matrix: Pi(s', (s',a')) = pi(a'|s').
Eigen::MatrixXd selection_matrix(const Policy& pi) {
    const int S = pi.n_states(), A = pi.n_actions();
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(S, S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) sel(s, flat_index(s, a, A)) = pi(s, a);
    return sel;
}

Vector reward_flat(const Mdp& mdp) {
    const int S = mdp.n_states(), A = mdp.n_actions();
    Vector r(S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) r(flat_index(s, a, A)) = mdp.r(s, a);
    return r;
}

}  // namespace

QTable exact_q(const Mdp& mdp, const Policy& pi) {
    check_policy_shape(mdp, pi, "exact_q");
    const int n = mdp.n_states() * mdp.n_actions();
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) -
                             mdp.gamma() * (mdp.transition() * selection_matrix(pi));
    Vector r = reward_flat(mdp);
    Vector q = system.partialPivLu().solve(r);
    double residual = (system * q - r).cwiseAbs().maxCoeff();
    if (!q.allFinite() || residual > 1e-10)
        throw SolverError("exact_q: linear solve residual " + std::to_string(residual) +
                          " exceeds 1e-10");
    return QTable(std::move(q));
}

ValueTable exact_v(const Mdp& mdp, const Policy& pi, const Vector& initial) {
    check_policy_shape(mdp, pi, "exact_v");
    Vector p0 = checked_distribution(initial, mdp.n_states(), "exact_v");
    QTable q = exact_q(mdp, pi);
    const int S = mdp.n_states(), A = mdp.n_actions();
    Vector v(S);
    for (int s = 0; s < S; ++s) {
        double acc = 0.0;
        for (int a = 0; a < A; ++a) acc += pi(s, a) * q(s, a, A);
        v(s) = acc;
    }
    double aggregate = p0.dot(v);
    return ValueTable{std::move(v), aggregate};
}

VisitationDistribution discounted_visitation(const Mdp& mdp, const Policy& pi,
                                             const Vector& initial) {
    check_policy_shape(mdp, pi, "discounted_visitation");
    Vector p0 = checked_distribution(initial, mdp.n_states(), "discounted_visitation");
    const int S = mdp.n_states();
    TransitionKernel k = induced_kernel(mdp, pi);
    // d^T = (1-gamma) p0^T + gamma d^T K  <=>  (I - gamma K^T) d = (1-gamma) p0
    Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(S, S) - mdp.gamma() * k.rows().transpose();
    Vector rhs = (1.0 - mdp.gamma()) * p0;
    Vector d = system.partialPivLu().solve(rhs);
    double residual = (system * d - rhs).cwiseAbs().maxCoeff();
    if (!d.allFinite() || residual > 1e-10)
        throw SolverError("discounted_visitation: solve residual exceeds 1e-10");
    if (std::abs(d.sum() - 1.0) > 1e-9)
        throw SolverError("discounted_visitation: weights do not sum to 1");
    return VisitationDistribution{std::move(d)};
}

OptimalSolution solve_optimal(const Mdp& mdp) {
    const int S = mdp.n_states(), A = mdp.n_actions();
    std::vector<int> actions(S, 0);
    Vector v = Vector::Zero(S);
    const long max_rounds = 100000;
    long round = 0;
    for (;; ++round) {
        if (round >= max_rounds)
            throw SolverError("solve_optimal: policy iteration failed to settle");
        // Evaluate the current deterministic policy.
        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
        Vector r_pi(S);
        for (int s = 0; s < S; ++s) {
            system.row(s) -=
                mdp.gamma() * mdp.transition().row(flat_index(s, actions[s], A));
            r_pi(s) = mdp.r(s, actions[s]);
        }
        v = system.partialPivLu().solve(r_pi);
        // Greedy improvement, lowest action index on ties.
        std::vector<int> next(S);
        for (int s = 0; s < S; ++s) {
            int best = 0;
            double best_val = -1.0;
            for (int a = 0; a < A; ++a) {
                double val = mdp.r(s, a) +
                             mdp.gamma() * mdp.transition().row(flat_index(s, a, A)).dot(v);
                if (val > best_val) {
                    best_val = val;
                    best = a;
                }
            }
            next[s] = best;
        }
        if (next == actions) break;
        actions = std::move(next);
    }

    QTable q(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            q.at(s, a, A) = mdp.r(s, a) +
                            mdp.gamma() * mdp.transition().row(flat_index(s, a, A)).dot(v);
    double bellman_residual = 0.0;
    for (int s = 0; s < S; ++s) {
        double best = -1.0;
        for (int a = 0; a < A; ++a) best = std::max(best, q(s, a, A));
        bellman_residual = std::max(bellman_residual, std::abs(v(s) - best));
    }
    if (bellman_residual > 1e-10)
        throw SolverError("solve_optimal: optimality residual " +
                          std::to_string(bellman_residual) + " exceeds 1e-10");
    Vector uniform = Vector::Constant(S, 1.0 / S);
    return OptimalSolution{Policy::deterministic(actions, A),
                           ValueTable{v, uniform.dot(v)}, std::move(q)};
}

GammaInstruments::GammaInstruments(Eigen::MatrixXd a_bar, Vector pair_weights,
                                   Vector reward, double gamma, int n_actions)
    : a_bar_(std::move(a_bar)),
      pair_weights_(std::move(pair_weights)),
      reward_flat_(std::move(reward)),
      gamma_(gamma),
      n_actions_(n_actions) {}

GammaInstruments GammaInstruments::build(const Mdp& mdp, const Policy& pi) {
    check_policy_shape(mdp, pi, "GammaInstruments::build");
    const int S = mdp.n_states(), A = mdp.n_actions(), n = S * A;
    TransitionKernel k = induced_kernel(mdp, pi);
    Vector mu = stationary_distribution(k);  // throws if the policy chain is not ergodic
    Vector w(n);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) w(flat_index(s, a, A)) = mu(s) * pi(s, a);
    // Pair chain P_pi[(s,a),(s',a')] = P(s'|s,a) pi(a'|s').
    Eigen::MatrixXd pair_chain = mdp.transition() * selection_matrix(pi);
    Eigen::MatrixXd a_bar =
        w.asDiagonal() * (mdp.gamma() * pair_chain - Eigen::MatrixXd::Identity(n, n));
    return GammaInstruments(std::move(a_bar), std::move(w), reward_flat(mdp), mdp.gamma(), A);
}

Eigen::MatrixXd GammaInstruments::a_of(const StepSample& o) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
    int i = flat_index(o.s, o.a, n_actions_);
    int j = flat_index(o.s_next, o.a_next, n_actions_);
    m(i, j) += gamma_;
    m(i, i) -= 1.0;
    return m;
}

Vector GammaInstruments::r_of(const StepSample& o) const {
    Vector r = Vector::Zero(dim());
    int i = flat_index(o.s, o.a, n_actions_);
    r(i) = reward_flat_(i);
    return r;
}

double GammaInstruments::a_apply_at_pair(const StepSample& o, const Vector& v) const {
    int i = flat_index(o.s, o.a, n_actions_);
    int j = flat_index(o.s_next, o.a_next, n_actions_);
    return gamma_ * v(j) - v(i);
}

double GammaInstruments::reward_at(const StepSample& o) const {
    return reward_flat_(flat_index(o.s, o.a, n_actions_));
}

double gamma_value(const GammaInstruments& inst, const QTable& q_pi, const Vector& theta,
                   const StepSample& o) {
    if (theta.size() != inst.dim() || q_pi.flat.size() != inst.dim())
        throw ShapeError("gamma_value: theta or q_pi length does not match instruments");
    int i = flat_index(o.s, o.a, inst.n_actions());
    double linear = theta(i) * (inst.reward_at(o) + inst.a_apply_at_pair(o, q_pi.flat));
    double quad_sample = theta(i) * inst.a_apply_at_pair(o, theta);
    double quad_mean = theta.dot(inst.a_bar() * theta);
    return linear + quad_sample - quad_mean;
}

}  // namespace nac2ts
