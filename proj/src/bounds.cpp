#include "qmarg/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace qmarg {

namespace {

BigInt binomial(int n, int r) {
    if (r < 0 || r > n) return 0;
    r = std::min(r, n - r);
    BigInt c = 1;
    for (int i = 1; i <= r; ++i) {
        c *= n - r + i;
        c /= i;
    }
    return c;
}

BigInt power(BigInt base, int e) {
    BigInt out = 1;
    while (e > 0) {
        if (e & 1) out *= base;
        base *= base;
        e >>= 1;
    }
    return out;
}

}  // namespace

BigInt count_reduced_params(int n, int k, int d) {
    if (d < 2) throw std::invalid_argument("count_reduced_params needs d >= 2");
    if (n < 1 || k < 1 || k > n) throw std::invalid_argument("count_reduced_params needs 1 <= k <= n");
    const BigInt q = BigInt(d) * d - 1;
    BigInt sum = 0;
    BigInt c = 1;   // C(n, r)
    BigInt qr = 1;  // q^r
    for (int r = 1; r <= k; ++r) {
        c = c * (n - r + 1) / r;
        qr *= q;
        sum += c * qr;
    }
    return sum;
}

BigInt pure_param_count(int n, int d) {
    if (n < 1 || d < 2) throw std::invalid_argument("pure_param_count needs n >= 1, d >= 2");
    return 2 * power(BigInt(d), n) - 2;
}

BoundsRow bounds_row(int n, int k, int d) {
    BoundsRow row;
    row.n = n;
    row.d = d;
    row.k = k;
    row.reduced_param_count = count_reduced_params(n, k, d);
    row.pure_param_count = pure_param_count(n, d);
    row.sufficient_by_count = row.reduced_param_count >= row.pure_param_count;
    return row;
}

double geometric_bound(int n, double alpha, int d) {
    if (n < 1 || d < 2) throw std::invalid_argument("geometric_bound needs n >= 1, d >= 2");
    const double q = static_cast<double>(d) * d - 1.0;
    if (!(alpha > 0.0) || !(alpha < q / (q + 1.0))) {
        throw std::invalid_argument("geometric_bound needs 0 < alpha < (d^2-1)/d^2");
    }
    const int k = static_cast<int>(std::floor(n * alpha));
    if (k == 0) return 0.0;
    const BigInt top = binomial(n, k) * power(BigInt(d) * d - 1, k);
    return top.convert_to<double>() * q * (1.0 - alpha) / (q * (1.0 - alpha) - alpha);
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary_entropy needs 0 <= x <= 1");
    auto term = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };
    return term(x) + term(1.0 - x);
}

double lower_bound_condition(double alpha, std::int64_t d) {
    const double q = static_cast<double>(d) * d - 1.0;
    return binary_entropy(alpha) + alpha * std::log(q) - std::log(static_cast<double>(d));
}

AlphaSolution solve_alpha_lower(std::int64_t d, double tol) {
    if (d < 2) throw std::invalid_argument("solve_alpha_lower needs d >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_alpha_lower needs tol > 0");
    // The condition is increasing on (0, 1/2], negative near 0, positive at 1/2.
    double lo = 1e-300;
    double hi = 0.5;
    AlphaSolution out;
    out.d = d;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (lower_bound_condition(mid, d) < 0.0 ? lo : hi) = mid;
        ++out.iterations;
    }
    out.lo = lo;
    out.hi = hi;
    out.alpha = 0.5 * (lo + hi);
    out.residual = std::abs(lower_bound_condition(out.alpha, d));
    return out;
}

FiniteFraction finite_n_lower_fraction(int n, int d) {
    if (n < 1) throw std::invalid_argument("finite_n_lower_fraction needs n >= 1");
    const BigInt target = pure_param_count(n, d);
    for (int k = 1; k <= n; ++k) {
        if (count_reduced_params(n, k, d) >= target) {
            return {n, d, k, static_cast<double>(k) / n};
        }
    }
    // The full set of marginals always suffices: d^{2n} - 1 >= 2 d^n - 2.
    return {n, d, n, 1.0};
}

std::vector<UpperRow> alpha_upper_table(int m_max, int d) {
    if (m_max < 1) throw std::invalid_argument("alpha_upper_table needs m_max >= 1");
    if (d < 2) throw std::invalid_argument("alpha_upper_table needs d >= 2");
    std::vector<UpperRow> rows;
    for (int m = 1; m <= m_max; ++m) {
        rows.push_back({m, 3 * m + 1, 2 * m + 1, (2.0 * m + 1.0) / (3.0 * m + 1.0)});
    }
    return rows;
}

std::string to_string(const BigInt& v) { return v.str(); }

}  // namespace qmarg
