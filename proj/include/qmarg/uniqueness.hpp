// uniqueness.hpp
// Linear consistency test for tripartite pure states. Any purification
// |psi> of the AB and AC marginals of sum a_ijk |ijk> can be written both as
// sum a_ijl |ijk>|e_lk> and as sum a_irk |ijk>|f_rj>; equating coefficients
// of |ijk> gives one homogeneous equation per (i,j,k) in the environment
// vectors e(l,k), f(r,j). When the only solutions are e(l,k) = delta_lk e,
// f(r,j) = delta_rj e, the purification is the original state times an
// environment state, so the two marginals pin the state.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmarg/linalg.hpp"
#include "qmarg/tensor.hpp"

namespace qmarg {

struct TripartiteShape {
    int M = 1;  // party A
    int N = 1;  // party B
    int P = 1;  // party C

    bool satisfies_bound() const { return M >= N + P - 1; }
    Index rows() const { return Index{M} * N * P; }
    Index cols() const { return Index{P} * P + Index{N} * N; }

    bool operator==(const TripartiteShape&) const = default;
};

// Columns: all e(l,k) in (l,k) lexicographic order, then all f(r,j).
// Labels are zero-based.
inline Index e_column(const TripartiteShape& s, int l, int k) { return Index{l} * s.P + k; }
inline Index f_column(const TripartiteShape& s, int r, int j) { return Index{s.P} * s.P + Index{r} * s.N + j; }
// Row of the equation for basis ket |i j k>.
inline Index equation_row(const TripartiteShape& s, int i, int j, int k) {
    return (Index{i} * s.N + j) * s.P + k;
}

struct ConsistencyMatrix {
    TripartiteShape shape;
    Eigen::MatrixXcd K;

    std::string column_label(Index col) const;
};

TripartiteShape tripartite_shape(const AmplitudeTensor& a);

ConsistencyMatrix build_consistency_matrix(const AmplitudeTensor& a);

Eigen::VectorXcd identity_pattern_vector(const TripartiteShape& shape);

enum class LinearVerdict { UniqueLinear, Degenerate };
std::string to_string(LinearVerdict v);

struct UniquenessVerdict {
    Index null_dim = 0;
    bool identity_pattern_match = false;
    // Distance of the unit identity-pattern vector from the computed kernel.
    double residual = 0.0;
    LinearVerdict verdict = LinearVerdict::Degenerate;
    Eigen::MatrixXcd kernel_basis;
    Eigen::VectorXd singular_values;
};

struct LinearTolerances {
    // Singular values <= rank_relative * sigma_max count as zero.
    double rank_relative = 1e-8;
    // Maximum distance between the identity pattern and the kernel.
    double pattern_residual = 1e-8;
};

UniquenessVerdict check_linear_uniqueness(const AmplitudeTensor& a, const LinearTolerances& tol = {});

struct EliminationStep {
    int index = 0;          // 1-based
    std::string block;      // e.g. "|i,0,2>"
    Index equations = 0;
    Index unknowns = 0;
    Index rank = 0;
    Index expected_rank = 0;
    std::vector<std::string> solved;     // unknowns fixed by this step
    std::vector<std::string> surviving;  // free directions left by this step
    double deviation = 0.0;              // max |solution - identity pattern|
};

struct EliminationReport {
    TripartiteShape shape;
    std::vector<EliminationStep> steps;
    bool completed = false;
    std::optional<int> rank_deficient_step;
    // e(l,k) and f(r,j) in units of e(0,0); filled when completed.
    Eigen::VectorXcd solution;
    double max_deviation = 0.0;
    // Verdict implied by a completed elimination (UniqueLinear); Degenerate
    // when aborted.
    LinearVerdict verdict = LinearVerdict::Degenerate;
};

// Replays the block elimination: block |i,0,0> fixes e(.,0), f(.,0) up to
// e(0,0) = f(0,0); blocks |i,0,k> (k >= 1) fix e(.,k); blocks |i,j,0>
// (j >= 1) fix f(.,j). Each block is solved by least squares. Requires
// M >= N + P - 1 (std::invalid_argument otherwise).
EliminationReport sequential_elimination_trace(const AmplitudeTensor& a, double rank_relative = 1e-8);

struct PartySplit {
    TripartiteShape shape;
    int marginal_party_count = 0;
    int total_parties = 0;
    double fraction() const { return static_cast<double>(marginal_party_count) / total_parties; }
};

// N = P = d^m, M = d^(m+1): 3m+1 d-level parties, with the AB and AC
// marginals each covering 2m+1 of them. Throws std::overflow_error when
// d^(3m+1) exceeds max_total_dim.
PartySplit party_split(int m, int d, Index max_total_dim = 4096);

}  // namespace qmarg
