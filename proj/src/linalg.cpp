#include "qmarg/linalg.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace qmarg {

double TolPolicy::threshold(double sigma_max, Eigen::Index rows, Eigen::Index cols) const {
    if (absolute) return *absolute;
    if (relative) return *relative * sigma_max;
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

EigenSystem hermitian_eigen(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eigen needs a square matrix");
    if (m.size() > 0) {
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw std::invalid_argument("hermitian_eigen: matrix is not Hermitian");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigen: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

template <typename Matrix>
RankResult<Matrix> rank_impl(const Matrix& m, const TolPolicy& tol) {
    RankResult<Matrix> out;
    const Eigen::Index cols = m.cols();
    if (m.rows() == 0 || cols == 0) {
        out.null_basis = Matrix::Identity(cols, cols);
        out.singular_values.resize(0);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    const double smax = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
    out.threshold = tol.threshold(smax, m.rows(), cols);
    Eigen::Index r = 0;
    while (r < out.singular_values.size() && out.singular_values[r] > out.threshold) ++r;
    out.rank = r;
    out.null_basis = svd.matrixV().rightCols(cols - r);
    return out;
}

}  // namespace

RankResult<Eigen::MatrixXcd> rank_and_nullspace(const Eigen::MatrixXcd& m, const TolPolicy& tol) {
    return rank_impl(m, tol);
}

RankResult<Eigen::MatrixXd> rank_and_nullspace(const Eigen::MatrixXd& m, const TolPolicy& tol) {
    return rank_impl(m, tol);
}

}  // namespace qmarg
