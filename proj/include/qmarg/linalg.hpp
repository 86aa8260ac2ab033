// linalg.hpp
// Hermitian eigendecomposition and SVD-based numerical rank / kernel.

#pragma once

#include <optional>

#include <Eigen/Dense>

namespace qmarg {

// Singular values at or below the threshold count as zero.
//   default:  max(rows, cols) * machine epsilon * sigma_max
//   relative: relative * sigma_max
//   absolute: absolute (takes precedence over relative)
struct TolPolicy {
    std::optional<double> relative;
    std::optional<double> absolute;

    static TolPolicy relative_to_max(double r) { return TolPolicy{r, std::nullopt}; }

    double threshold(double sigma_max, Eigen::Index rows, Eigen::Index cols) const;
};

struct EigenSystem {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXcd vectors;  // unitary, columns match values
};

// Throws std::invalid_argument if the input is non-Hermitian beyond
// 1e-10 * max(1, max |entry|).
EigenSystem hermitian_eigen(const Eigen::MatrixXcd& m);

template <typename Matrix>
struct RankResult {
    Eigen::Index rank = 0;
    Matrix null_basis;                // orthonormal columns spanning the kernel
    Eigen::VectorXd singular_values;  // descending
    double threshold = 0.0;
};

RankResult<Eigen::MatrixXcd> rank_and_nullspace(const Eigen::MatrixXcd& m, const TolPolicy& tol = {});
RankResult<Eigen::MatrixXd> rank_and_nullspace(const Eigen::MatrixXd& m, const TolPolicy& tol = {});

}  // namespace qmarg
