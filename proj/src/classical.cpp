#include "qmarg/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qmarg {

namespace {

std::size_t product(std::span<const int> arity) {
    std::size_t n = 1;
    for (int a : arity) n *= static_cast<std::size_t>(a);
    return n;
}

}  // namespace

JointDistribution::JointDistribution(std::vector<int> arity, std::vector<double> probabilities)
    : arity_(std::move(arity)), probs_(std::move(probabilities)) {
    if (arity_.empty()) throw std::invalid_argument("joint distribution needs at least one variable");
    for (int a : arity_) {
        if (a < 2) throw std::invalid_argument("variable arity must be >= 2");
    }
    if (probs_.size() != product(arity_)) throw std::invalid_argument("probability table has wrong size");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw std::invalid_argument("probabilities must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
}

std::vector<double> marginal_sums(std::span<const double> values, std::span<const int> arity,
                                  std::span<const int> keep) {
    if (keep.empty()) throw std::invalid_argument("marginal needs a non-empty subset");
    std::vector<int> kept(keep.begin(), keep.end());
    std::sort(kept.begin(), kept.end());
    if (std::adjacent_find(kept.begin(), kept.end()) != kept.end() || kept.front() < 0 ||
        kept.back() >= static_cast<int>(arity.size())) {
        throw std::invalid_argument("marginal subset out of range or repeated");
    }
    std::vector<int> out_arity;
    for (int v : kept) out_arity.push_back(arity[static_cast<size_t>(v)]);
    std::vector<double> out(product(out_arity), 0.0);
    std::vector<int> digits(arity.size(), 0);
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        std::size_t rem = flat;
        for (int v = static_cast<int>(arity.size()) - 1; v >= 0; --v) {
            digits[static_cast<size_t>(v)] = static_cast<int>(rem % static_cast<size_t>(arity[static_cast<size_t>(v)]));
            rem /= static_cast<size_t>(arity[static_cast<size_t>(v)]);
        }
        std::size_t idx = 0;
        for (int v : kept) idx = idx * static_cast<size_t>(arity[static_cast<size_t>(v)]) + digits[static_cast<size_t>(v)];
        out[idx] += values[flat];
    }
    return out;
}

JointDistribution classical_marginal(const JointDistribution& p, std::span<const int> keep) {
    std::vector<int> kept(keep.begin(), keep.end());
    auto sums = marginal_sums(p.probabilities(), p.arity(), kept);
    std::sort(kept.begin(), kept.end());
    std::vector<int> out_arity;
    for (int v : kept) out_arity.push_back(p.arity()[static_cast<size_t>(v)]);
    return JointDistribution(std::move(out_arity), std::move(sums));
}

std::vector<double> alternating_deviation(int n, int d) {
    if (n < 1 || d < 2) throw std::invalid_argument("alternating_deviation needs n >= 1, d >= 2");
    std::vector<double> v(static_cast<size_t>(d), 0.0);
    v[0] = 1.0;
    v[1] = -1.0;
    std::vector<double> out{1.0};
    for (int i = 0; i < n; ++i) {
        std::vector<double> next;
        next.reserve(out.size() * v.size());
        for (double a : out) {
            for (double b : v) next.push_back(a * b);
        }
        out = std::move(next);
    }
    return out;
}

EpsilonTooLarge::EpsilonTooLarge(double requested, double max_admissible)
    : std::invalid_argument("epsilon " + std::to_string(requested) + " not admissible; maximum is " +
                            std::to_string(max_admissible)),
      max_admissible_(max_admissible) {}

double max_leave_one_out_difference(const JointDistribution& p, const JointDistribution& q) {
    if (p.arity() != q.arity()) throw std::invalid_argument("distributions have different shapes");
    const int n = p.variables();
    if (n == 1) return 0.0;
    double worst = 0.0;
    for (int drop = 0; drop < n; ++drop) {
        std::vector<int> keep;
        for (int v = 0; v < n; ++v) {
            if (v != drop) keep.push_back(v);
        }
        const auto mp = marginal_sums(p.probabilities(), p.arity(), keep);
        const auto mq = marginal_sums(q.probabilities(), q.arity(), keep);
        for (std::size_t i = 0; i < mp.size(); ++i) worst = std::max(worst, std::abs(mp[i] - mq[i]));
    }
    return worst;
}

namespace {

int common_arity(const JointDistribution& p) {
    const int d = p.arity().front();
    if (std::any_of(p.arity().begin(), p.arity().end(), [d](int a) { return a != d; })) {
        throw std::invalid_argument("counterexample needs equal arities");
    }
    return d;
}

double admissible_limit(const JointDistribution& p, const std::vector<double>& delta) {
    double max_eps = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (delta[i] < 0.0) max_eps = std::min(max_eps, p.probabilities()[i] / -delta[i]);
    }
    return max_eps;
}

}  // namespace

double max_admissible_epsilon(const JointDistribution& p) {
    const int d = common_arity(p);
    return admissible_limit(p, alternating_deviation(p.variables(), d));
}

CounterexamplePair counterexample_pair(const JointDistribution& p, double epsilon) {
    const int n = p.variables();
    const int d = common_arity(p);
    auto delta = alternating_deviation(n, d);
    const double max_eps = admissible_limit(p, delta);
    if (!(epsilon > 0.0) || epsilon > max_eps) throw EpsilonTooLarge(epsilon, max_eps);

    std::vector<double> q(delta.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::max(0.0, p.probabilities()[i] + epsilon * delta[i]);
    JointDistribution qd(p.arity(), std::move(q));

    double l1 = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) l1 += std::abs(p.probabilities()[i] - qd.probabilities()[i]);
    const double diff = max_leave_one_out_difference(p, qd);
    return CounterexamplePair{p, std::move(qd), std::move(delta), epsilon, max_eps, diff, l1};
}

JointDistribution dirichlet_joint(int n, int d, SeededRng& rng) {
    if (n < 1 || d < 2) throw std::invalid_argument("joint distribution needs n >= 1, d >= 2");
    std::size_t size = 1;
    for (int i = 0; i < n; ++i) size *= static_cast<std::size_t>(d);
    std::vector<double> w(size);
    for (auto& x : w) x = -std::log(rng.uniform_open0());
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    return JointDistribution(std::vector<int>(static_cast<size_t>(n), d), std::move(w));
}

JointDistribution uniform_joint(int n, int d) {
    if (n < 1 || d < 2) throw std::invalid_argument("joint distribution needs n >= 1, d >= 2");
    std::size_t size = 1;
    for (int i = 0; i < n; ++i) size *= static_cast<std::size_t>(d);
    return JointDistribution(std::vector<int>(static_cast<size_t>(n), d),
                             std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

CounterexamplePair counterexample_pair(int n, int d, double epsilon, SeededRng& rng) {
    return counterexample_pair(dirichlet_joint(n, d, rng), epsilon);
}

}  // namespace qmarg
