// classical.hpp
// Joint distributions of n discrete variables: marginals of all n-1
// variable subsets never pin the joint, since a product of zero-sum
// vectors vanishes under every single-variable sum.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "qmarg/tensor.hpp"

namespace qmarg {

class JointDistribution {
public:
    // Row-major, first variable slowest. Entries >= 0, sum 1 within 1e-12.
    JointDistribution(std::vector<int> arity, std::vector<double> probabilities);

    const std::vector<int>& arity() const { return arity_; }
    const std::vector<double>& probabilities() const { return probs_; }
    int variables() const { return static_cast<int>(arity_.size()); }

private:
    std::vector<int> arity_;
    std::vector<double> probs_;
};

// Sum over the variables not in `keep` (non-empty, in range).
std::vector<double> marginal_sums(std::span<const double> values, std::span<const int> arity,
                                  std::span<const int> keep);
JointDistribution classical_marginal(const JointDistribution& p, std::span<const int> keep);

// (x) over n copies of v = (1, -1, 0, ..., 0) of length d.
std::vector<double> alternating_deviation(int n, int d);

class EpsilonTooLarge : public std::invalid_argument {
public:
    EpsilonTooLarge(double requested, double max_admissible);
    double max_admissible() const { return max_admissible_; }

private:
    double max_admissible_;
};

struct CounterexamplePair {
    JointDistribution p;
    JointDistribution q;
    std::vector<double> deviation;
    double epsilon = 0.0;
    double max_admissible_epsilon = 0.0;
    double max_marginal_difference = 0.0;  // over all (n-1)-subsets
    double l1_distance = 0.0;
};

// Largest epsilon keeping p + epsilon * alternating_deviation non-negative.
double max_admissible_epsilon(const JointDistribution& p);

// Flat Dirichlet over d^n outcomes (strictly positive almost surely).
JointDistribution dirichlet_joint(int n, int d, SeededRng& rng);
JointDistribution uniform_joint(int n, int d);

// q = p + epsilon * alternating_deviation. Throws EpsilonTooLarge when
// epsilon <= 0 or q would leave the simplex.
CounterexamplePair counterexample_pair(const JointDistribution& p, double epsilon);
// p drawn from a flat Dirichlet over d^n outcomes.
CounterexamplePair counterexample_pair(int n, int d, double epsilon, SeededRng& rng);

// Max over all (n-1)-variable subsets of the largest marginal difference.
double max_leave_one_out_difference(const JointDistribution& p, const JointDistribution& q);

}  // namespace qmarg
