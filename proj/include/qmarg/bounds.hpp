// bounds.hpp
// Parameter counting for the reduced states of up to k of n d-level parties
// against the 2 d^n - 2 real parameters of a pure state, the asymptotic
// entropy condition for the smallest sufficient fraction, and the table of
// fractions reached by the tripartite construction.

#pragma once

#include <cstdint>

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qmarg {

using BigInt = boost::multiprecision::cpp_int;

struct BoundsRow {
    int n = 0;
    int d = 0;
    int k = 0;
    BigInt reduced_param_count;
    BigInt pure_param_count;
    bool sufficient_by_count = false;
};

// sum_{r=1}^{k} C(n, r) (d^2 - 1)^r. Requires 1 <= k <= n, d >= 2.
BigInt count_reduced_params(int n, int k, int d);

// 2 d^n - 2. Requires n >= 1, d >= 2.
BigInt pure_param_count(int n, int d);

BoundsRow bounds_row(int n, int k, int d);

// Geometric-series upper bound on count_reduced_params(n, floor(n alpha), d):
// C(n, k) q^k * q(1 - alpha) / (q(1 - alpha) - alpha), q = d^2 - 1,
// k = floor(n alpha). Zero when k = 0 (empty sum). Requires
// 0 < alpha < q / (q + 1).
double geometric_bound(int n, double alpha, int d);

// Natural-log binary entropy, H(0) = H(1) = 0.
double binary_entropy(double x);

// H(alpha) + alpha ln(d^2 - 1) - ln d.
double lower_bound_condition(double alpha, std::int64_t d);

struct AlphaSolution {
    std::int64_t d = 0;
    double alpha = 0.0;
    double residual = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
};

// Bisection for the unique root of lower_bound_condition in (0, 1/2].
AlphaSolution solve_alpha_lower(std::int64_t d, double tol = 1e-14);

struct FiniteFraction {
    int n = 0;
    int d = 0;
    int k = 0;
    double fraction = 0.0;
};

// Smallest k with count_reduced_params(n, k, d) >= pure_param_count(n, d).
FiniteFraction finite_n_lower_fraction(int n, int d);

struct UpperRow {
    int m = 0;
    int total_parties = 0;   // 3m + 1
    int marginal_order = 0;  // 2m + 1
    double fraction = 0.0;
};

std::vector<UpperRow> alpha_upper_table(int m_max, int d);

inline constexpr double kAlphaUpperLimit = 2.0 / 3.0;

std::string to_string(const BigInt& v);

}  // namespace qmarg
