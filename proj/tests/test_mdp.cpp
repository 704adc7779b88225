#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "nac2ts/mdp.hpp"

using namespace nac2ts;

namespace {

Mdp two_state_one_action(double p01, double p10, double r0, double r1, double gamma) {
    Matrix transition(2, 2);
    transition << 1.0 - p01, p01, p10, 1.0 - p10;
    Matrix reward(2, 1);
    reward << r0, r1;
    return Mdp(transition, reward, gamma);
}

}  // namespace

TEST_CASE("flat pair index is row major") {
    CHECK(flat_index(0, 0, 3) == 0);
    CHECK(flat_index(0, 2, 3) == 2);
    CHECK(flat_index(2, 1, 3) == 7);
}

TEST_CASE("random stream is deterministic per key and differs across keys") {
    RandomStream a(0, 7), b(0, 7), c(0, 8), d(1, 7);
    bool same = true, diff_run = false, diff_exp = false;
    for (int i = 0; i < 64; ++i) {
        std::uint64_t va = a.next_u64();
        same = same && (va == b.next_u64());
        diff_run = diff_run || (va != c.next_u64());
        diff_exp = diff_exp || (va != d.next_u64());
    }
    CHECK(same);
    CHECK(diff_run);
    CHECK(diff_exp);
}

TEST_CASE("uniforms live in the half-open unit interval") {
    RandomStream rng(42);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.next_uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("categorical sampling matches its weights") {
    RandomStream rng(1234);
    std::vector<double> w{0.2, 0.0, 0.5, 0.3};
    const int n = 40000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) ++counts[rng.sample_categorical(w)];
    CHECK(counts[1] == 0);
    for (int k : {0, 2, 3}) {
        double p = w[k];
        double se = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(counts[k] / static_cast<double>(n) - p) < 3.0 * se);
    }
}

TEST_CASE("categorical sampling rejects bad weight vectors") {
    RandomStream rng(5);
    std::vector<double> zero{0.0, 0.0};
    std::vector<double> negative{0.5, -0.1};
    std::vector<double> empty;
    CHECK_THROWS_AS(rng.sample_categorical(zero), DomainError);
    CHECK_THROWS_AS(rng.sample_categorical(negative), DomainError);
    CHECK_THROWS_AS(rng.sample_categorical(empty), DomainError);
}

TEST_CASE("transition kernel validates and renormalizes rows") {
    Matrix good(2, 2);
    good << 0.5, 0.5 + 5e-10, 1.0, 0.0;  // tiny excess mass gets renormalized
    TransitionKernel k(good);
    CHECK(k.rows().row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));

    Matrix off(2, 2);
    off << 0.6, 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(TransitionKernel{off}, InvariantError);

    Matrix neg(2, 2);
    neg << 1.2, -0.2, 0.5, 0.5;
    CHECK_THROWS_AS(TransitionKernel{neg}, InvariantError);
}

TEST_CASE("policy factories and argmax") {
    Policy u = Policy::uniform(3, 4);
    CHECK(u.n_states() == 3);
    CHECK(u.n_actions() == 4);
    CHECK(u(2, 3) == doctest::Approx(0.25));

    Policy det = Policy::deterministic({2, 0}, 3);
    CHECK(det(0, 2) == 1.0);
    CHECK(det(0, 0) == 0.0);
    CHECK(det(1, 0) == 1.0);
    CHECK(det.argmax_actions() == std::vector<int>{2, 0});

    CHECK_THROWS_AS(Policy::deterministic({3}, 3), DomainError);

    Matrix tied(1, 3);
    tied << 0.4, 0.4, 0.2;
    CHECK(Policy(tied).argmax_actions() == std::vector<int>{0});  // lowest index wins ties
}

TEST_CASE("logits materialize to a softmax and are shift invariant") {
    Matrix z(2, 2);
    z << std::log(2.0), 0.0, 1000.0, 1000.0 + std::log(3.0);
    Policy pi = PolicyLogits(z).materialize();
    CHECK(pi(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(pi(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // huge common offset must not overflow
    CHECK(pi(1, 1) == doctest::Approx(0.75).epsilon(1e-14));

    Matrix shifted = z;
    shifted.row(0).array() += 123.5;
    Policy pi2 = PolicyLogits(shifted).materialize();
    CHECK((pi.probs() - pi2.probs()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("epsilon mixing interpolates toward uniform") {
    Matrix p(1, 2);
    p << 1.0, 0.0;
    Policy pi(p);
    Policy half = mix_epsilon_greedy(pi, 0.5);
    CHECK(half(0, 0) == doctest::Approx(0.75));
    CHECK(half(0, 1) == doctest::Approx(0.25));
    CHECK((mix_epsilon_greedy(pi, 0.0).probs() - pi.probs()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(mix_epsilon_greedy(pi, 1.0)(0, 0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mix_epsilon_greedy(pi, 1.5), DomainError);
    CHECK_THROWS_AS(mix_epsilon_greedy(pi, -0.1), DomainError);
}

TEST_CASE("mdp construction rejects bad rewards and discounts") {
    Matrix transition(2, 2);
    transition << 1.0, 0.0, 0.0, 1.0;
    Matrix reward(2, 1);
    reward << 0.5, 0.5;
    CHECK_NOTHROW(Mdp(transition, reward, 0.9));
    Matrix hot = reward;
    hot(0, 0) = 1.5;
    CHECK_THROWS_AS(Mdp(transition, hot, 0.9), InvariantError);
    Matrix cold = reward;
    cold(1, 0) = -0.1;
    CHECK_THROWS_AS(Mdp(transition, cold, 0.9), InvariantError);
    CHECK_THROWS_AS(Mdp(transition, reward, 1.0), DomainError);
    CHECK_THROWS_AS(Mdp(transition, reward, 0.0), DomainError);
    CHECK(Mdp(transition, reward, 0.95).q_max() == doctest::Approx(20.0));
}

TEST_CASE("induced kernel averages transitions over the policy") {
    // two states, two actions with easily distinguished rows
    Matrix transition(4, 2);
    transition << 1.0, 0.0,   // (s0,a0)
                  0.0, 1.0,   // (s0,a1)
                  0.3, 0.7,   // (s1,a0)
                  0.9, 0.1;   // (s1,a1)
    Matrix reward = Matrix::Zero(2, 2);
    Mdp mdp(transition, reward, 0.9);
    Matrix probs(2, 2);
    probs << 0.25, 0.75, 0.5, 0.5;
    TransitionKernel k = induced_kernel(mdp, Policy(probs));
    CHECK(k(0, 0) == doctest::Approx(0.25));
    CHECK(k(0, 1) == doctest::Approx(0.75));
    CHECK(k(1, 0) == doctest::Approx(0.5 * 0.3 + 0.5 * 0.9));
    CHECK(k(1, 1) == doctest::Approx(0.5 * 0.7 + 0.5 * 0.1));
}

TEST_CASE("ergodicity detects reducible and periodic chains") {
    Matrix mixing(2, 2);
    mixing << 0.7, 0.3, 0.6, 0.4;
    CHECK(is_ergodic(TransitionKernel(mixing)));

    Matrix identity(2, 2);
    identity << 1.0, 0.0, 0.0, 1.0;  // reducible
    CHECK_FALSE(is_ergodic(TransitionKernel(identity)));

    Matrix swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;  // period two
    CHECK_FALSE(is_ergodic(TransitionKernel(swap)));

    Matrix absorbing(2, 2);
    absorbing << 1.0, 0.0, 0.5, 0.5;  // state 1 cannot be re-entered
    CHECK_FALSE(is_ergodic(TransitionKernel(absorbing)));
}

TEST_CASE("stationary distribution matches the two-state closed form") {
    Matrix rows(2, 2);
    rows << 0.7, 0.3, 0.6, 0.4;  // p=0.3, q=0.6 -> mu = (q, p)/(p+q)
    Vector mu = stationary_distribution(TransitionKernel(rows));
    CHECK(mu(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(mu(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-12));

    Matrix swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    CHECK_THROWS_AS(stationary_distribution(TransitionKernel(swap)), ErgodicityError);
}

TEST_CASE("stationary distribution is a fixed point on a bigger chain") {
    RandomStream rng(99);
    Mdp mdp = build_random_ergodic(6, 3, 0.9, 0.01, rng);
    TransitionKernel k = induced_kernel(mdp, Policy::uniform(6, 3));
    Vector mu = stationary_distribution(k);
    Vector after = k.rows().transpose() * mu;
    CHECK((after - mu).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sample_step frequencies follow the kernel and policy") {
    // one state, two actions: transition rows for (s0,a0), (s0,a1) are trivial
    Matrix tr(2, 1);
    tr << 1.0, 1.0;
    Matrix reward = Matrix::Zero(1, 2);
    Mdp mdp(tr, reward, 0.5);
    Matrix probs(1, 2);
    probs << 0.3, 0.7;
    Policy pi(probs);
    RandomStream rng(2024);
    const int n = 30000;
    int a1 = 0;
    for (int i = 0; i < n; ++i) {
        StepSample o = sample_step(mdp, pi, 0, 0, rng);
        CHECK(o.s == 0);
        CHECK(o.a == 0);
        CHECK(o.s_next == 0);
        a1 += o.a_next == 1;
    }
    double se = std::sqrt(0.7 * 0.3 / n);
    CHECK(std::abs(a1 / static_cast<double>(n) - 0.7) < 3.0 * se);
}

TEST_CASE("sample_step validates indices") {
    Mdp mdp = build_counterexample();
    Policy pi = Policy::uniform(4, 2);
    RandomStream rng(1);
    CHECK_THROWS_AS(sample_step(mdp, pi, 4, 0, rng), DomainError);
    CHECK_THROWS_AS(sample_step(mdp, pi, 0, 2, rng), DomainError);
}

TEST_CASE("counterexample chain has the published structure") {
    Mdp mdp = build_counterexample();
    CHECK(mdp.n_states() == 4);
    CHECK(mdp.n_actions() == 2);
    CHECK(mdp.gamma() == doctest::Approx(0.95));

    // action 0 pulls hard toward state 0, with a slow leak down the chain
    CHECK(mdp.p(0, 0, 0) == doctest::Approx(0.999));
    CHECK(mdp.p(0, 0, 1) == doctest::Approx(0.001));
    CHECK(mdp.p(1, 0, 0) == doctest::Approx(0.999));
    CHECK(mdp.p(1, 0, 2) == doctest::Approx(0.001));
    CHECK(mdp.p(2, 0, 0) == doctest::Approx(0.999));
    CHECK(mdp.p(2, 0, 3) == doctest::Approx(0.001));
    CHECK(mdp.p(3, 0, 3) == doctest::Approx(0.999));
    CHECK(mdp.p(3, 0, 0) == doctest::Approx(0.001));

    // action 1 marches down the chain
    CHECK(mdp.p(0, 1, 1) == doctest::Approx(1.0));
    CHECK(mdp.p(1, 1, 2) == doctest::Approx(0.999));
    CHECK(mdp.p(2, 1, 3) == doctest::Approx(0.999));
    CHECK(mdp.p(3, 1, 0) == doctest::Approx(0.999));

    // bait reward at the start, real prize at the end of the chain
    CHECK(mdp.r(0, 0) == doctest::Approx(0.1));
    CHECK(mdp.r(3, 0) == doctest::Approx(1.0));
    CHECK(mdp.r(0, 1) == 0.0);
    CHECK(mdp.r(1, 0) == 0.0);
    CHECK(mdp.r(2, 1) == 0.0);

    CHECK(is_ergodic(induced_kernel(mdp, Policy::uniform(4, 2))));
    CHECK(build_counterexample(0.9).gamma() == doctest::Approx(0.9));
}

TEST_CASE("random ergodic generator respects its floor and rejects bad smoothing") {
    RandomStream rng(7);
    Mdp mdp = build_random_ergodic(5, 2, 0.9, 0.02, rng);
    CHECK(mdp.transition().minCoeff() > 0.0);
    for (int row = 0; row < 10; ++row)
        CHECK(mdp.transition().row(row).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mdp.reward().minCoeff() >= 0.0);
    CHECK(mdp.reward().maxCoeff() <= 1.0);
    for (int trials = 0; trials < 5; ++trials) {
        Mdp m = build_random_ergodic(4, 3, 0.8, 0.05, rng);
        CHECK(is_ergodic(induced_kernel(m, Policy::uniform(4, 3))));
    }
    CHECK_THROWS_AS(build_random_ergodic(5, 2, 0.9, 0.2, rng), DomainError);
    CHECK_THROWS_AS(build_random_ergodic(5, 2, 0.9, -0.01, rng), DomainError);
}

TEST_CASE("random ergodic generator is deterministic in the stream") {
    RandomStream r1(11), r2(11);
    Mdp a = build_random_ergodic(5, 2, 0.9, 0.02, r1);
    Mdp b = build_random_ergodic(5, 2, 0.9, 0.02, r2);
    CHECK((a.transition() - b.transition()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.reward() - b.reward()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mdp json round trip is exact") {
    Mdp mdp = build_counterexample(0.93);
    Mdp back = mdp_from_json_text(mdp_to_json_text(mdp));
    CHECK(back.gamma() == mdp.gamma());
    CHECK((back.transition() - mdp.transition()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.reward() - mdp.reward()).cwiseAbs().maxCoeff() == 0.0);

    auto path = std::filesystem::temp_directory_path() / "nac2ts_mdp_roundtrip.json";
    save_mdp_json(mdp, path.string());
    Mdp loaded = load_mdp_json(path.string());
    CHECK((loaded.transition() - mdp.transition()).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("mdp json loading rejects malformed input") {
    CHECK_THROWS_AS(mdp_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(mdp_from_json_text("{}"), ConfigError);
    CHECK_THROWS_AS(mdp_from_json_text(R"({"n_states":2,"n_actions":1,"gamma":0.9})"),
                    ConfigError);
    // structurally fine but semantically bad: reward above 1
    std::string hot = R"({"n_states":1,"n_actions":1,"gamma":0.5,
                          "transition":[[[1.0]]],"reward":[[2.0]]})";
    CHECK_THROWS_AS(mdp_from_json_text(hot), InvariantError);
    CHECK_THROWS_AS(load_mdp_json("/nonexistent/mdp.json"), ConfigError);
}

TEST_CASE("two state one action helper sanity") {
    Mdp mdp = two_state_one_action(1.0, 1.0, 1.0, 0.0, 0.5);
    CHECK(mdp.p(0, 0, 1) == 1.0);
    CHECK(mdp.r(0, 0) == 1.0);
}
