#include <doctest.h>

#include <chrono>

#include "qmarg/bounds.hpp"
#include "support/oracles.hpp"

using namespace qmarg;

TEST_CASE("reduced parameter counts: direct evaluations") {
    CHECK(count_reduced_params(3, 2, 2) == 36);
    CHECK(count_reduced_params(3, 1, 2) == 9);
    CHECK(count_reduced_params(3, 3, 2) == 63);
    CHECK(count_reduced_params(1, 1, 2) == 3);
    CHECK(count_reduced_params(2, 1, 3) == 16);
    CHECK(pure_param_count(3, 2) == 14);
    CHECK(pure_param_count(1, 3) == 4);
    CHECK_THROWS_AS(count_reduced_params(3, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(count_reduced_params(3, 4, 2), std::invalid_argument);
    CHECK_THROWS_AS(pure_param_count(0, 2), std::invalid_argument);
}

TEST_CASE("reduced parameter counts satisfy the binomial identity exactly") {
    for (int d = 2; d <= 5; ++d) {
        for (int n = 1; n <= 20; ++n) {
            const BigInt expect = boost::multiprecision::pow(BigInt(d), 2 * n);
            CHECK(count_reduced_params(n, n, d) + 1 == expect);
        }
    }
    // Far beyond 64-bit range.
    CHECK(to_string(count_reduced_params(40, 40, 5) + 1) == to_string(boost::multiprecision::pow(BigInt(25), 40)));
}

TEST_CASE("reduced parameter counts match a floating-point sum for small cases") {
    for (int d = 2; d <= 4; ++d) {
        for (int n = 1; n <= 8; ++n) {
            for (int k = 1; k <= n; ++k) {
                double s = 0.0;
                for (int r = 1; r <= k; ++r) s += oracle::binomial(n, r) * std::pow(d * d - 1.0, r);
                CHECK(count_reduced_params(n, k, d).convert_to<double>() == doctest::Approx(s).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("bounds rows") {
    const BoundsRow r = bounds_row(3, 2, 2);
    CHECK(r.reduced_param_count == 36);
    CHECK(r.pure_param_count == 14);
    CHECK(r.sufficient_by_count);
    CHECK_FALSE(bounds_row(3, 1, 2).sufficient_by_count);
}

TEST_CASE("binary entropy and the root condition") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
    CHECK(binary_entropy(0.2) == doctest::Approx(binary_entropy(0.8)));
    CHECK_THROWS_AS(binary_entropy(1.5), std::invalid_argument);
    CHECK(lower_bound_condition(0.25, 3) < 0.0);
    CHECK(lower_bound_condition(0.26, 3) > 0.0);
    CHECK(lower_bound_condition(0.5, 2) == doctest::Approx(std::log(2.0) + 0.5 * std::log(3.0) - std::log(2.0)));
}

TEST_CASE("alpha lower: qubit root") {
    const auto t0 = std::chrono::steady_clock::now();
    const AlphaSolution s = solve_alpha_lower(2);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(s.alpha >= 0.1885);
    CHECK(s.alpha <= 0.1895);
    CHECK(std::abs(s.residual) < 1e-12);
    CHECK(std::abs(lower_bound_condition(s.alpha, 2)) < 1e-12);
    CHECK(s.lo <= s.alpha);
    CHECK(s.alpha <= s.hi);
    CHECK(secs < 1.0);
    CHECK_THROWS_AS(solve_alpha_lower(1), std::invalid_argument);
}

TEST_CASE("alpha lower: monotone in d and tending to one half") {
    double prev = 0.0;
    for (int d = 2; d <= 50; ++d) {
        const double a = solve_alpha_lower(d).alpha;
        CHECK(a >= prev);
        CHECK(a < 0.5);
        prev = a;
    }
    CHECK(solve_alpha_lower(1000).alpha == doctest::Approx(0.450188).epsilon(1e-5));
    const double far = solve_alpha_lower(std::int64_t{1} << 50).alpha;
    CHECK(far > 0.49);
    CHECK(far < 0.5);
}

TEST_CASE("finite-n fraction") {
    const FiniteFraction f = finite_n_lower_fraction(3, 2);
    CHECK(f.k == 2);
    CHECK(f.fraction == doctest::Approx(2.0 / 3.0));
    for (int n = 1; n <= 12; ++n) {
        const FiniteFraction g = finite_n_lower_fraction(n, 2);
        CHECK(count_reduced_params(n, g.k, 2) >= pure_param_count(n, 2));
        if (g.k > 1) CHECK(count_reduced_params(n, g.k - 1, 2) < pure_param_count(n, 2));
    }
}

TEST_CASE("geometric bound dominates the exact count") {
    for (int d : {2, 3}) {
        const double q = d * d - 1.0;
        for (double alpha : {0.1, 0.2, 0.3, 0.45}) {
            if (!(alpha < q / (q + 1.0))) continue;
            for (int n = 4; n <= 30; n += 2) {
                const int k = static_cast<int>(std::floor(n * alpha));
                const double g = geometric_bound(n, alpha, d);
                if (k == 0) {
                    CHECK(g == 0.0);
                    continue;
                }
                CHECK(g >= count_reduced_params(n, k, d).convert_to<double>() * (1.0 - 1e-12));
            }
        }
    }
    CHECK_THROWS_AS(geometric_bound(10, 0.9, 2), std::invalid_argument);
}

TEST_CASE("alpha upper table") {
    const auto rows = alpha_upper_table(5, 2);
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) {
        CHECK(r.total_parties == 3 * r.m + 1);
        CHECK(r.marginal_order == 2 * r.m + 1);
        CHECK(r.fraction == doctest::Approx((2.0 * r.m + 1) / (3.0 * r.m + 1)));
        CHECK(r.fraction > kAlphaUpperLimit);
    }
    for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].fraction < rows[i - 1].fraction);
    CHECK(rows.front().fraction == doctest::Approx(0.75));
}
