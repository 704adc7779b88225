#include "nac2ts/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace nac2ts {

namespace {

// Shared simplex rule: entries non-negative, row mass within 1e-9 of one
// (renormalized in place), anything further off is rejected.
void validate_simplex_rows(Matrix& rows, const char* what) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            double v = rows(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw InvariantError(std::string(what) + ": negative or non-finite entry in row " +
                                     std::to_string(i));
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvariantError(std::string(what) + ": row " + std::to_string(i) +
                                 " sums to " + std::to_string(sum) + ", not 1");
        rows.row(i) /= sum;
    }
}

std::span<const double> row_span(const Matrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<size_t>(m.cols())};
}

}  // namespace

TransitionKernel::TransitionKernel(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() != rows_.cols() || rows_.rows() == 0)
        throw ShapeError("TransitionKernel: matrix must be square and non-empty");
    validate_simplex_rows(rows_, "TransitionKernel");
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
    if (probs_.rows() == 0 || probs_.cols() == 0)
        throw ShapeError("Policy: empty probability table");
    validate_simplex_rows(probs_, "Policy");
}

Policy Policy::uniform(int n_states, int n_actions) {
    if (n_states <= 0 || n_actions <= 0) throw ShapeError("Policy::uniform: non-positive size");
    return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Policy Policy::deterministic(const std::vector<int>& actions, int n_actions) {
    if (actions.empty() || n_actions <= 0)
        throw ShapeError("Policy::deterministic: empty action list");
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
    for (size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions)
            throw DomainError("Policy::deterministic: action index out of range");
        p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return Policy(std::move(p));
}

std::vector<int> Policy::argmax_actions() const {
    std::vector<int> out(n_states());
    for (int s = 0; s < n_states(); ++s) {
        int best = 0;
        for (int a = 1; a < n_actions(); ++a)
            if (probs_(s, a) > probs_(s, best)) best = a;
        out[s] = best;
    }
    return out;
}

Policy PolicyLogits::materialize() const {
    Matrix p(z_.rows(), z_.cols());
    for (Eigen::Index s = 0; s < z_.rows(); ++s) {
        double zmax = z_.row(s).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index a = 0; a < z_.cols(); ++a) {
            p(s, a) = std::exp(z_(s, a) - zmax);
            sum += p(s, a);
        }
        p.row(s) /= sum;  // sum >= 1 because the max ends up as exp(0)
    }
    return Policy(std::move(p));
}

Mdp::Mdp(Matrix transition, Matrix reward, double gamma)
    : transition_(std::move(transition)), reward_(std::move(reward)), gamma_(gamma) {
    const auto S = reward_.rows();
    const auto A = reward_.cols();
    if (S == 0 || A == 0) throw ShapeError("Mdp: empty reward table");
    if (transition_.rows() != S * A || transition_.cols() != S)
        throw ShapeError("Mdp: transition must be (|S||A|) x |S| with flat_index rows");
    if (!(gamma_ > 0.0 && gamma_ < 1.0))
        throw DomainError("Mdp: gamma must lie strictly in (0, 1)");
    for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index a = 0; a < A; ++a) {
            double r = reward_(s, a);
            if (!std::isfinite(r) || r < 0.0 || r > 1.0)
                throw InvariantError("Mdp: reward(" + std::to_string(s) + "," +
                                     std::to_string(a) + ") = " + std::to_string(r) +
                                     " outside [0,1]");
        }
    validate_simplex_rows(transition_, "Mdp transition");
}

Policy mix_epsilon_greedy(const Policy& pi, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw DomainError("mix_epsilon_greedy: eps = " + std::to_string(eps) +
                          " outside [0,1]");
    Matrix mixed = ((1.0 - eps) * pi.probs().array() + eps / pi.n_actions()).matrix();
    return Policy(std::move(mixed));
}

TransitionKernel induced_kernel(const Mdp& mdp, const Policy& pi) {
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions())
        throw ShapeError("induced_kernel: policy shape does not match MDP");
    Matrix k = Matrix::Zero(mdp.n_states(), mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_actions(); ++a)
            k.row(s) += pi(s, a) * mdp.transition().row(flat_index(s, a, mdp.n_actions()));
    return TransitionKernel(std::move(k));
}

namespace {

std::vector<int> bfs_levels(const Matrix& rows, bool reverse) {
    const int n = static_cast<int>(rows.rows());
    std::vector<int> level(n, -1);
    std::vector<int> queue{0};
    level[0] = 0;
    for (size_t head = 0; head < queue.size(); ++head) {
        int u = queue[head];
        for (int v = 0; v < n; ++v) {
            double w = reverse ? rows(v, u) : rows(u, v);
            if (w > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return level;
}

}  // namespace

bool is_ergodic(const TransitionKernel& kernel) {
    const Matrix& rows = kernel.rows();
    const int n = kernel.n_states();
    auto fwd = bfs_levels(rows, false);
    auto bwd = bfs_levels(rows, true);
    for (int v = 0; v < n; ++v)
        if (fwd[v] < 0 || bwd[v] < 0) return false;  // reducible
    // Period = gcd of (level(u) + 1 - level(v)) over all support edges; the
    // chain is aperiodic iff that gcd is 1.
    long long g = 0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (rows(u, v) > 0.0) g = std::gcd(g, static_cast<long long>(fwd[u]) + 1 - fwd[v]);
    return g == 1;
}

Vector stationary_distribution(const TransitionKernel& kernel, double tol) {
    if (!is_ergodic(kernel))
        throw ErgodicityError("stationary_distribution: kernel is reducible or periodic");
    const int n = kernel.n_states();
    const Matrix& k = kernel.rows();

    auto acceptable = [&](const Vector& mu) {
        if (!mu.allFinite() || mu.minCoeff() <= 0.0) return false;
        if (std::abs(mu.sum() - 1.0) > tol) return false;
        Vector residual = k.transpose() * mu - mu;
        return residual.cwiseAbs().maxCoeff() <= tol;
    };

    // (P^T - I) mu = 0 with the mass constraint appended; consistent
    // overdetermined system, so least squares recovers it exactly.
    Eigen::MatrixXd a(n + 1, n);
    a.topRows(n) = k.transpose() - Matrix::Identity(n, n);
    a.row(n).setOnes();
    Vector b = Vector::Zero(n + 1);
    b(n) = 1.0;
    Vector mu = a.colPivHouseholderQr().solve(b);
    if (acceptable(mu)) return mu;

    // Ill-conditioned solve; fall back to power iteration, which preserves
    // positivity and converges for ergodic kernels.
    mu = Vector::Constant(n, 1.0 / n);
    const long max_iters = 2'000'000;
    for (long it = 0; it < max_iters; ++it) {
        Vector next = k.transpose() * mu;
        next /= next.sum();
        double delta = (next - mu).cwiseAbs().sum();
        mu = next;
        if (delta < tol * 1e-2 && acceptable(mu)) return mu;
    }
    if (acceptable(mu)) return mu;
    throw SolverError("stationary_distribution: neither direct solve nor power iteration "
                      "reached the requested tolerance");
}

StepSample sample_step(const Mdp& mdp, const Policy& pi, int s, int a, RandomStream& rng) {
    if (pi.n_states() != mdp.n_states() || pi.n_actions() != mdp.n_actions())
        throw ShapeError("sample_step: policy shape does not match MDP");
    if (s < 0 || s >= mdp.n_states() || a < 0 || a >= mdp.n_actions())
        throw DomainError("sample_step: state or action index out of range");
    int s_next = rng.sample_categorical(
        row_span(mdp.transition(), flat_index(s, a, mdp.n_actions())));
    int a_next = rng.sample_categorical(row_span(pi.probs(), s_next));
    return StepSample{s, a, s_next, a_next};
}

Mdp build_counterexample(double gamma) {
    const int S = 4, A = 2;
    Matrix p = Matrix::Zero(S * A, S);
    // Action 0: strong pull back to state 0, except state 3 which holds.
    p(flat_index(0, 0, A), 0) = 0.999;
    p(flat_index(0, 0, A), 1) = 0.001;
    p(flat_index(1, 0, A), 0) = 0.999;
    p(flat_index(1, 0, A), 2) = 0.001;
    p(flat_index(2, 0, A), 0) = 0.999;
    p(flat_index(2, 0, A), 3) = 0.001;
    p(flat_index(3, 0, A), 3) = 0.999;
    p(flat_index(3, 0, A), 0) = 0.001;
    // Action 1: march down the chain toward state 3.
    p(flat_index(0, 1, A), 1) = 1.0;
    p(flat_index(1, 1, A), 2) = 0.999;
    p(flat_index(1, 1, A), 0) = 0.001;
    p(flat_index(2, 1, A), 3) = 0.999;
    p(flat_index(2, 1, A), 0) = 0.001;
    p(flat_index(3, 1, A), 0) = 0.999;
    p(flat_index(3, 1, A), 3) = 0.001;

    Matrix r = Matrix::Zero(S, A);
    r(0, 0) = 0.1;  // immediate bait
    r(3, 0) = 1.0;  // real prize, reachable only via action 1
    return Mdp(std::move(p), std::move(r), gamma);
}

Mdp build_random_ergodic(int n_states, int n_actions, double gamma, double smoothing,
                         RandomStream& rng) {
    if (n_states <= 0 || n_actions <= 0)
        throw ShapeError("build_random_ergodic: non-positive size");
    if (!(smoothing > 0.0))
        throw DomainError("build_random_ergodic: smoothing must be positive");
    if (smoothing * n_states >= 1.0)
        throw DomainError("build_random_ergodic: smoothing * n_states must be < 1");

    Matrix p(n_states * n_actions, n_states);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            Vector e(n_states);
            for (int j = 0; j < n_states; ++j) e(j) = -std::log1p(-rng.next_uniform());
            double total = e.sum();
            Eigen::Index row = flat_index(s, a, n_actions);
            if (total < 1e-12) {
                p.row(row).setConstant(1.0 / n_states);
            } else {
                for (int j = 0; j < n_states; ++j)
                    p(row, j) = std::max(e(j) / total, smoothing);
                p.row(row) /= p.row(row).sum();
            }
        }
    Matrix r(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) r(s, a) = rng.next_uniform();
    return Mdp(std::move(p), std::move(r), gamma);
}

std::string mdp_to_json_text(const Mdp& mdp) {
    nlohmann::json j;
    j["n_states"] = mdp.n_states();
    j["n_actions"] = mdp.n_actions();
    j["gamma"] = mdp.gamma();
    nlohmann::json trans = nlohmann::json::array();
    for (int s = 0; s < mdp.n_states(); ++s) {
        nlohmann::json per_state = nlohmann::json::array();
        for (int a = 0; a < mdp.n_actions(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (int s2 = 0; s2 < mdp.n_states(); ++s2) row.push_back(mdp.p(s, a, s2));
            per_state.push_back(std::move(row));
        }
        trans.push_back(std::move(per_state));
    }
    j["transition"] = std::move(trans);
    nlohmann::json rew = nlohmann::json::array();
    for (int s = 0; s < mdp.n_states(); ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < mdp.n_actions(); ++a) row.push_back(mdp.r(s, a));
        rew.push_back(std::move(row));
    }
    j["reward"] = std::move(rew);
    return j.dump(2);
}

Mdp mdp_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mdp json: parse failure: ") + e.what());
    }
    for (const char* field : {"n_states", "n_actions", "gamma", "transition", "reward"})
        if (!j.contains(field))
            throw ConfigError(std::string("mdp json: missing field '") + field + "'");
    int S, A;
    double gamma;
    try {
        S = j.at("n_states").get<int>();
        A = j.at("n_actions").get<int>();
        gamma = j.at("gamma").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mdp json: bad scalar field: ") + e.what());
    }
    if (S <= 0 || A <= 0) throw ConfigError("mdp json: n_states and n_actions must be positive");
    const auto& jt = j.at("transition");
    const auto& jr = j.at("reward");
    if (!jt.is_array() || static_cast<int>(jt.size()) != S)
        throw ConfigError("mdp json: field 'transition' must have n_states outer entries");
    if (!jr.is_array() || static_cast<int>(jr.size()) != S)
        throw ConfigError("mdp json: field 'reward' must have n_states rows");
    Matrix p(S * A, S), r(S, A);
    try {
        for (int s = 0; s < S; ++s) {
            if (static_cast<int>(jt.at(s).size()) != A)
                throw ConfigError("mdp json: field 'transition' must have n_actions rows per state");
            if (static_cast<int>(jr.at(s).size()) != A)
                throw ConfigError("mdp json: field 'reward' must have n_actions entries per state");
            for (int a = 0; a < A; ++a) {
                const auto& row = jt.at(s).at(a);
                if (static_cast<int>(row.size()) != S)
                    throw ConfigError("mdp json: transition rows must have n_states entries");
                for (int s2 = 0; s2 < S; ++s2)
                    p(flat_index(s, a, A), s2) = row.at(s2).get<double>();
                r(s, a) = jr.at(s).at(a).get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mdp json: bad array entry: ") + e.what());
    }
    return Mdp(std::move(p), std::move(r), gamma);
}

void save_mdp_json(const Mdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_mdp_json: cannot open '" + path + "' for writing");
    out << mdp_to_json_text(mdp) << '\n';
}

Mdp load_mdp_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_mdp_json: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return mdp_from_json_text(buf.str());
}

}  // namespace nac2ts
