#include <doctest.h>

#include "qmarg/classical.hpp"

using namespace qmarg;

namespace {

// Marginal by explicit digit enumeration.
std::vector<double> enumerate_marginal(const std::vector<double>& p, const std::vector<int>& arity,
                                       const std::vector<int>& keep) {
    int out_size = 1;
    for (int v : keep) out_size *= arity[static_cast<size_t>(v)];
    std::vector<double> out(static_cast<size_t>(out_size), 0.0);
    for (size_t flat = 0; flat < p.size(); ++flat) {
        std::vector<int> digit(arity.size());
        size_t x = flat;
        for (int v = static_cast<int>(arity.size()) - 1; v >= 0; --v) {
            digit[static_cast<size_t>(v)] = static_cast<int>(x % static_cast<size_t>(arity[static_cast<size_t>(v)]));
            x /= static_cast<size_t>(arity[static_cast<size_t>(v)]);
        }
        int idx = 0;
        for (int v : keep) idx = idx * arity[static_cast<size_t>(v)] + digit[static_cast<size_t>(v)];
        out[static_cast<size_t>(idx)] += p[flat];
    }
    return out;
}

}  // namespace

TEST_CASE("joint distribution validation") {
    CHECK_THROWS_AS(JointDistribution({2}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution({2}, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution({2, 2}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution({1}, {1.0}), std::invalid_argument);
    CHECK_NOTHROW(JointDistribution({2, 3}, std::vector<double>(6, 1.0 / 6.0)));
}

TEST_CASE("marginals agree with digit enumeration") {
    SeededRng rng(1);
    const JointDistribution p = dirichlet_joint(3, 3, rng);
    const std::vector<std::vector<int>> keeps{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
    for (const auto& keep : keeps) {
        const auto got = classical_marginal(p, keep).probabilities();
        const auto ref = enumerate_marginal(p.probabilities(), p.arity(), keep);
        REQUIRE(got.size() == ref.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-15);
    }
    CHECK_THROWS_AS(classical_marginal(p, std::vector<int>{}), std::invalid_argument);
    CHECK_THROWS_AS(classical_marginal(p, std::vector<int>{0, 0}), std::invalid_argument);
}

TEST_CASE("alternating deviation") {
    const auto v = alternating_deviation(2, 3);
    const std::vector<double> expect{1, -1, 0, -1, 1, 0, 0, 0, 0};
    CHECK(v == expect);
    const auto w = alternating_deviation(3, 2);
    double l1 = 0.0;
    for (double x : w) l1 += std::abs(x);
    CHECK(l1 == 8.0);
    const std::vector<int> arity{2, 2, 2};
    for (const std::vector<int>& keep : {std::vector<int>{0, 1}, std::vector<int>{0, 2}, std::vector<int>{1, 2}}) {
        for (double m : marginal_sums(w, arity, keep)) CHECK(m == 0.0);
    }
}

TEST_CASE("uniform counterexample") {
    const JointDistribution p = uniform_joint(3, 2);
    CHECK(max_admissible_epsilon(p) == doctest::Approx(0.125));
    const CounterexamplePair c = counterexample_pair(p, 0.05);
    CHECK(c.max_marginal_difference < 1e-14);
    CHECK(c.l1_distance == doctest::Approx(0.4));
    CHECK(c.l1_distance >= 0.05 * 8.0 * (1.0 - 1e-12));
    CHECK(max_leave_one_out_difference(c.p, c.q) == c.max_marginal_difference);
    CHECK(c.epsilon == 0.05);
}

TEST_CASE("epsilon beyond the simplex is rejected with the admissible maximum") {
    const JointDistribution p = uniform_joint(2, 2);
    try {
        counterexample_pair(p, 0.3);
        FAIL("expected EpsilonTooLarge");
    } catch (const EpsilonTooLarge& e) {
        CHECK(e.max_admissible() == doctest::Approx(0.25));
    }
    CHECK_THROWS_AS(counterexample_pair(p, 0.0), EpsilonTooLarge);
    CHECK_NOTHROW(counterexample_pair(p, 0.25));
}

TEST_CASE("dirichlet samples: positive, normalized, reproducible") {
    SeededRng a(5), b(5);
    for (int t = 0; t < 10; ++t) {
        const JointDistribution p = dirichlet_joint(3, 2, a);
        const JointDistribution q = dirichlet_joint(3, 2, b);
        CHECK(p.probabilities() == q.probabilities());
        double s = 0.0;
        for (double x : p.probabilities()) {
            CHECK(x > 0.0);
            s += x;
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("random counterexamples keep every leave-one-out marginal") {
    SeededRng rng(6);
    for (int n = 2; n <= 4; ++n) {
        for (int d = 2; d <= 3; ++d) {
            const JointDistribution p = dirichlet_joint(n, d, rng);
            const double eps = 0.5 * max_admissible_epsilon(p);
            const CounterexamplePair c = counterexample_pair(p, eps);
            CHECK(c.max_marginal_difference < 1e-14);
            CHECK(c.l1_distance > 0.0);
            for (double x : c.q.probabilities()) CHECK(x >= 0.0);
            // The full joint is not pinned.
            std::vector<int> all(static_cast<size_t>(n));
            for (int v = 0; v < n; ++v) all[static_cast<size_t>(v)] = v;
            const auto fp = classical_marginal(c.p, all).probabilities();
            const auto fq = classical_marginal(c.q, all).probabilities();
            CHECK(fp != fq);
        }
    }
}
