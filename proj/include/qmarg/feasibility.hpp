// feasibility.hpp
// Uniqueness among all density matrices: the states consistent with a set
// of prescribed marginals form the intersection of an affine subspace of
// Hermitian matrices with the PSD cone. Dykstra's alternating projections
// find the point of that intersection nearest to a start; starting from
// perturbations of the original state along the constraint kernel exposes
// any second consistent state.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmarg/tensor.hpp"

namespace qmarg {

// Real coordinates of a Hermitian matrix, isometric for the Hilbert-Schmidt
// inner product: diagonal entries, then sqrt(2) Re / sqrt(2) Im of each
// upper off-diagonal entry in row-major order.
Eigen::VectorXd pack_hermitian(const Eigen::MatrixXcd& h);
Eigen::MatrixXcd unpack_hermitian(const Eigen::VectorXd& x, Index side);

struct MarginalConstraint {
    std::vector<int> subset;  // ascending
    Eigen::MatrixXcd target;
};

class MarginalConstraintSet {
public:
    MarginalConstraintSet(PartySignature sig, std::vector<MarginalConstraint> constraints);

    static MarginalConstraintSet from_state(const Eigen::MatrixXcd& rho, const PartySignature& sig,
                                            const std::vector<std::vector<int>>& subsets);
    static MarginalConstraintSet from_state(const DensityMatrix& rho, const std::vector<std::vector<int>>& subsets);

    const PartySignature& signature() const { return sig_; }
    const std::vector<MarginalConstraint>& constraints() const { return constraints_; }
    std::vector<std::vector<int>> subsets() const;

    // Largest Frobenius-norm deviation of any marginal of m from its target.
    double max_residual(const Eigen::MatrixXcd& m) const;

private:
    PartySignature sig_;
    std::vector<MarginalConstraint> constraints_;
};

// The linear map X -> (partial traces onto each subset) in packed
// coordinates. Rows are the stacked packed outputs, columns the packed input.
Eigen::MatrixXd constraint_map_matrix(const PartySignature& sig, const std::vector<std::vector<int>>& subsets);

// Orthonormal (Hilbert-Schmidt) basis of Hermitian Delta with every
// constrained partial trace zero. Traceless whenever at least one subset is
// given, since every marginal carries the trace.
std::vector<Eigen::MatrixXcd> constraint_nullspace(const PartySignature& sig,
                                                   const std::vector<std::vector<int>>& subsets);

class InconsistentConstraints : public std::runtime_error {
public:
    explicit InconsistentConstraints(double residual);
    double residual() const { return residual_; }

private:
    double residual_;
};

// Orthogonal projection onto {Y Hermitian : Tr Y = 1, marginals match}.
class AffineProjector {
public:
    // Throws InconsistentConstraints when the marginals admit no common
    // Hermitian extension (least-squares residual above 1e-9).
    explicit AffineProjector(const MarginalConstraintSet& constraints);
    // Projector for {x : map * x = rhs} in coordinates of a space of
    // Hermitian matrices of the given side.
    AffineProjector(const Eigen::MatrixXd& map, const Eigen::VectorXd& rhs, Index side);

    Index side() const { return side_; }
    Index kernel_dim() const { return packed_dim() - range_.cols(); }
    Index packed_dim() const { return side_ * side_; }
    double least_squares_residual() const { return residual_; }

    // In-place projection of packed coordinates.
    void project(Eigen::VectorXd& x) const;
    // Remove the constrained component: x - Q Q^T x.
    void project_kernel(Eigen::VectorXd& x) const;
    Eigen::MatrixXcd project(const Eigen::MatrixXcd& x) const;

    // Hilbert-Schmidt distance from x to the affine set.
    double distance(const Eigen::VectorXd& x) const;

private:
    Index side_ = 0;
    Eigen::MatrixXd range_;   // orthonormal basis of the constrained directions
    Eigen::VectorXd offset_;  // minimum-norm point of the affine set
    double residual_ = 0.0;
    mutable Eigen::VectorXd scratch_;
};

Eigen::MatrixXcd project_affine(const Eigen::MatrixXcd& x, const MarginalConstraintSet& constraints);

// Nearest PSD matrix in Hilbert-Schmidt norm (negative eigenvalues clamped).
Eigen::MatrixXcd project_psd(const Eigen::MatrixXcd& x);

struct ProjectionConfig {
    int max_iterations = 5000;
    double convergence_tol = 1e-9;
    double distinctness_tol = 1e-4;
    int restarts = 8;
    double perturbation_scale = 0.1;
    std::uint64_t seed = 0x5eed;

    // Throws std::invalid_argument when a field is non-positive or
    // convergence_tol >= distinctness_tol.
    void validate() const;
};

struct DykstraResult {
    DensityMatrix fixed_point;
    double affine_residual = 0.0;  // HS distance of fixed_point to the affine set
    double psd_residual = 0.0;     // max(0, -lambda_min(fixed_point))
    double last_step = 0.0;        // trace-norm bound on the last step
    int iterations = 0;
    bool converged = false;
};

// Stacked packed marginal targets followed by the unit trace.
Eigen::VectorXd constraint_rhs(const MarginalConstraintSet& constraints);

DykstraResult dykstra_solve(const Eigen::MatrixXcd& start, const MarginalConstraintSet& constraints,
                            const ProjectionConfig& config);
DykstraResult dykstra_solve(const Eigen::MatrixXcd& start, const MarginalConstraintSet& constraints,
                            const AffineProjector& projector, const ProjectionConfig& config);

enum class FeasibilityOutcome { Unique, NonUnique, Inconclusive };
std::string to_string(FeasibilityOutcome v);

struct RestartRecord {
    int iterations = 0;
    bool converged = false;
    double distance_to_state = 0.0;
    double affine_residual = 0.0;
};

struct FeasibilityVerdict {
    FeasibilityOutcome verdict = FeasibilityOutcome::Inconclusive;
    // For NON_UNIQUE: the original state followed by distinct consistent
    // states; all pairwise trace distances exceed distinctness_tol.
    std::vector<DensityMatrix> witnesses;
    double max_marginal_residual = 0.0;
    std::vector<double> pairwise_distances;  // upper triangle, row-major
    std::vector<RestartRecord> restarts;
    Index kernel_dim = 0;
    // Dimension of the subspace carrying every consistent state (the
    // intersection of supp(target) x traced space over all constraints).
    Index support_dim = 0;
    std::string note;
};

FeasibilityVerdict uniqueness_probe(const AmplitudeTensor& state, const std::vector<std::vector<int>>& subsets,
                                    const ProjectionConfig& config = {});

struct SurveyTrial {
    int trial = 0;
    FeasibilityOutcome verdict = FeasibilityOutcome::Inconclusive;
    double max_distance = 0.0;
    int max_iterations = 0;
    double seconds = 0.0;
};

struct SurveyStats {
    int trials = 0;
    int unique = 0;
    int non_unique = 0;
    int inconclusive = 0;
    double fraction_unique() const { return trials ? static_cast<double>(unique) / trials : 0.0; }
    double fraction_non_unique() const { return trials ? static_cast<double>(non_unique) / trials : 0.0; }
    double fraction_inconclusive() const { return trials ? static_cast<double>(inconclusive) / trials : 0.0; }
    std::vector<SurveyTrial> records;
    double seconds = 0.0;
};

// Runs uniqueness_probe on Haar samples; trial t draws its state from
// SeededRng(config.seed).fork(t) and its restarts from a second fork.
SurveyStats genericity_survey(const PartySignature& sig, const std::vector<std::vector<int>>& subsets, int trials,
                              const ProjectionConfig& config = {});

}  // namespace qmarg
