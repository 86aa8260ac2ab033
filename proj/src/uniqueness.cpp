#include "qmarg/uniqueness.hpp"

#include <cmath>
#include <stdexcept>

namespace qmarg {

namespace {

std::string e_label(int l, int k) { return "e(" + std::to_string(l) + "," + std::to_string(k) + ")"; }
std::string f_label(int r, int j) { return "f(" + std::to_string(r) + "," + std::to_string(j) + ")"; }

Index numerical_rank(const Eigen::MatrixXcd& m, double rank_relative) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    Index r = 0;
    while (r < s.size() && s[r] > rank_relative * s[0]) ++r;
    return r;
}

Eigen::VectorXcd least_squares(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b) {
    return a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

}  // namespace

std::string ConsistencyMatrix::column_label(Index col) const {
    const Index pp = Index{shape.P} * shape.P;
    if (col < 0 || col >= shape.cols()) throw std::out_of_range("column out of range");
    if (col < pp) return e_label(static_cast<int>(col / shape.P), static_cast<int>(col % shape.P));
    col -= pp;
    return f_label(static_cast<int>(col / shape.N), static_cast<int>(col % shape.N));
}

TripartiteShape tripartite_shape(const AmplitudeTensor& a) {
    const auto& sig = a.signature();
    if (sig.parties() != 3) {
        throw std::invalid_argument("linear uniqueness test needs a tripartite state, got " +
                                    std::to_string(sig.parties()) + " parties");
    }
    return {sig.dim(0), sig.dim(1), sig.dim(2)};
}

ConsistencyMatrix build_consistency_matrix(const AmplitudeTensor& a) {
    const TripartiteShape s = tripartite_shape(a);
    const auto& amp = a.amplitudes();
    auto at = [&](int i, int j, int k) { return amp[equation_row(s, i, j, k)]; };

    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(s.rows(), s.cols());
    for (int i = 0; i < s.M; ++i) {
        for (int j = 0; j < s.N; ++j) {
            for (int k = 0; k < s.P; ++k) {
                const Index row = equation_row(s, i, j, k);
                for (int l = 0; l < s.P; ++l) K(row, e_column(s, l, k)) += at(i, j, l);
                for (int r = 0; r < s.N; ++r) K(row, f_column(s, r, j)) -= at(i, r, k);
            }
        }
    }
    return {s, std::move(K)};
}

Eigen::VectorXcd identity_pattern_vector(const TripartiteShape& s) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(s.cols());
    for (int l = 0; l < s.P; ++l) v[e_column(s, l, l)] = 1.0;
    for (int r = 0; r < s.N; ++r) v[f_column(s, r, r)] = 1.0;
    return v / std::sqrt(static_cast<double>(s.P + s.N));
}

std::string to_string(LinearVerdict v) {
    return v == LinearVerdict::UniqueLinear ? "UNIQUE_LINEAR" : "DEGENERATE";
}

UniquenessVerdict check_linear_uniqueness(const AmplitudeTensor& a, const LinearTolerances& tol) {
    const ConsistencyMatrix cm = build_consistency_matrix(a);
    const auto rank = rank_and_nullspace(cm.K, TolPolicy::relative_to_max(tol.rank_relative));
    const Eigen::VectorXcd v = identity_pattern_vector(cm.shape);

    UniquenessVerdict out;
    out.null_dim = rank.null_basis.cols();
    out.kernel_basis = rank.null_basis;
    out.singular_values = rank.singular_values;
    const Eigen::VectorXcd in_kernel = rank.null_basis * (rank.null_basis.adjoint() * v);
    out.residual = (v - in_kernel).norm();
    out.identity_pattern_match = out.residual < tol.pattern_residual;
    out.verdict = (out.null_dim == 1 && out.identity_pattern_match) ? LinearVerdict::UniqueLinear
                                                                    : LinearVerdict::Degenerate;
    return out;
}

EliminationReport sequential_elimination_trace(const AmplitudeTensor& a, double rank_relative) {
    const TripartiteShape s = tripartite_shape(a);
    if (!s.satisfies_bound()) {
        throw std::invalid_argument("block elimination needs M >= N + P - 1");
    }
    const auto& amp = a.amplitudes();
    auto at = [&](int i, int j, int k) { return amp[equation_row(s, i, j, k)]; };

    EliminationReport rep;
    rep.shape = s;
    Eigen::VectorXcd sol = Eigen::VectorXcd::Zero(s.cols());
    const Eigen::VectorXcd pattern = identity_pattern_vector(s) * std::sqrt(static_cast<double>(s.P + s.N));

    auto abort_at = [&](EliminationStep step) {
        rep.rank_deficient_step = step.index;
        rep.steps.push_back(std::move(step));
        return rep;
    };

    // Block |i,0,0>: sum_l a_i0l e(l,0) - sum_r a_ir0 f(r,0) = 0.
    {
        EliminationStep step;
        step.index = 1;
        step.block = "|i,0,0>";
        Eigen::MatrixXcd B(s.M, s.P + s.N);
        for (int i = 0; i < s.M; ++i) {
            for (int l = 0; l < s.P; ++l) B(i, l) = at(i, 0, l);
            for (int r = 0; r < s.N; ++r) B(i, s.P + r) = -at(i, r, 0);
        }
        step.equations = s.M;
        step.unknowns = s.P + s.N;
        step.expected_rank = s.N + s.P - 1;
        const auto rk = rank_and_nullspace(B, TolPolicy::relative_to_max(rank_relative));
        step.rank = rk.rank;
        if (step.rank < step.expected_rank) return abort_at(std::move(step));

        // One-dimensional kernel; scale so that e(0,0) = 1.
        Eigen::VectorXcd kv = rk.null_basis.col(0);
        if (std::abs(kv[0]) == 0.0) return abort_at(std::move(step));
        kv /= kv[0];
        for (int l = 0; l < s.P; ++l) sol[e_column(s, l, 0)] = kv[l];
        for (int r = 0; r < s.N; ++r) sol[f_column(s, r, 0)] = kv[s.P + r];
        for (int l = 1; l < s.P; ++l) step.solved.push_back(e_label(l, 0));
        for (int r = 1; r < s.N; ++r) step.solved.push_back(f_label(r, 0));
        step.solved.push_back(e_label(0, 0) + "-" + f_label(0, 0));
        step.surviving.push_back(e_label(0, 0) + "=" + f_label(0, 0));
        double dev = 0.0;
        for (int l = 0; l < s.P; ++l) dev = std::max(dev, std::abs(kv[l] - pattern[e_column(s, l, 0)]));
        for (int r = 0; r < s.N; ++r) dev = std::max(dev, std::abs(kv[s.P + r] - pattern[f_column(s, r, 0)]));
        step.deviation = dev;
        rep.steps.push_back(std::move(step));
    }

    // Blocks |i,0,k>: sum_l a_i0l e(l,k) = sum_r a_irk f(r,0).
    Eigen::MatrixXcd A0(s.M, s.P);
    for (int i = 0; i < s.M; ++i) {
        for (int l = 0; l < s.P; ++l) A0(i, l) = at(i, 0, l);
    }
    const Index rank_a0 = numerical_rank(A0, rank_relative);
    for (int k = 1; k < s.P; ++k) {
        EliminationStep step;
        step.index = static_cast<int>(rep.steps.size()) + 1;
        step.block = "|i,0," + std::to_string(k) + ">";
        step.equations = s.M;
        step.unknowns = s.P;
        step.expected_rank = s.P;
        step.rank = rank_a0;
        if (step.rank < step.expected_rank) return abort_at(std::move(step));
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(s.M);
        for (int i = 0; i < s.M; ++i) {
            for (int r = 0; r < s.N; ++r) rhs[i] += at(i, r, k) * sol[f_column(s, r, 0)];
        }
        const Eigen::VectorXcd x = least_squares(A0, rhs);
        double dev = 0.0;
        for (int l = 0; l < s.P; ++l) {
            sol[e_column(s, l, k)] = x[l];
            dev = std::max(dev, std::abs(x[l] - pattern[e_column(s, l, k)]));
            step.solved.push_back(e_label(l, k));
        }
        step.deviation = dev;
        rep.steps.push_back(std::move(step));
    }

    // Blocks |i,j,0>: sum_l a_ijl e(l,0) = sum_r a_ir0 f(r,j).
    Eigen::MatrixXcd B0(s.M, s.N);
    for (int i = 0; i < s.M; ++i) {
        for (int r = 0; r < s.N; ++r) B0(i, r) = at(i, r, 0);
    }
    const Index rank_b0 = numerical_rank(B0, rank_relative);
    for (int j = 1; j < s.N; ++j) {
        EliminationStep step;
        step.index = static_cast<int>(rep.steps.size()) + 1;
        step.block = "|i," + std::to_string(j) + ",0>";
        step.equations = s.M;
        step.unknowns = s.N;
        step.expected_rank = s.N;
        step.rank = rank_b0;
        if (step.rank < step.expected_rank) return abort_at(std::move(step));
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(s.M);
        for (int i = 0; i < s.M; ++i) {
            for (int l = 0; l < s.P; ++l) rhs[i] += at(i, j, l) * sol[e_column(s, l, 0)];
        }
        const Eigen::VectorXcd x = least_squares(B0, rhs);
        double dev = 0.0;
        for (int r = 0; r < s.N; ++r) {
            sol[f_column(s, r, j)] = x[r];
            dev = std::max(dev, std::abs(x[r] - pattern[f_column(s, r, j)]));
            step.solved.push_back(f_label(r, j));
        }
        step.deviation = dev;
        rep.steps.push_back(std::move(step));
    }

    rep.completed = true;
    rep.solution = sol;
    rep.max_deviation = (sol - pattern).cwiseAbs().maxCoeff();
    rep.verdict = LinearVerdict::UniqueLinear;
    return rep;
}

PartySplit party_split(int m, int d, Index max_total_dim) {
    if (m < 1) throw std::invalid_argument("party_split needs m >= 1");
    if (d < 2) throw std::invalid_argument("party_split needs d >= 2");
    Index dm = 1;
    Index total = 1;
    for (int p = 0; p < 3 * m + 1; ++p) {
        total *= d;
        if (total > max_total_dim) {
            throw std::overflow_error("total dimension d^(3m+1) exceeds cap " + std::to_string(max_total_dim));
        }
        if (p < m) dm *= d;
    }
    PartySplit out;
    out.shape = {static_cast<int>(dm * d), static_cast<int>(dm), static_cast<int>(dm)};
    out.marginal_party_count = 2 * m + 1;
    out.total_parties = 3 * m + 1;
    return out;
}

}  // namespace qmarg
