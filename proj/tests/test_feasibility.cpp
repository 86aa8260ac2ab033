#include <doctest.h>

#include "qmarg/feasibility.hpp"
#include "qmarg/linalg.hpp"
#include "support/oracles.hpp"

using namespace qmarg;
using Subsets = std::vector<std::vector<int>>;

namespace {

const Subsets kPairs{{0, 1}, {0, 2}, {1, 2}};

// Complex map vec(X) -> (stacked vec of each partial trace, trace), built
// column by column from the enumeration partial trace.
Eigen::MatrixXcd complex_map(const std::vector<int>& dims, const Subsets& subsets) {
    int D = 1;
    for (int d : dims) D *= d;
    std::vector<Eigen::MatrixXcd> blocks;
    int rows = 1;
    for (const auto& s : subsets) {
        int ds = 1;
        for (int p : s) ds *= dims[static_cast<size_t>(p)];
        rows += ds * ds;
    }
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, D * D);
    for (int a = 0; a < D; ++a) {
        for (int b = 0; b < D; ++b) {
            Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(D, D);
            E(a, b) = 1.0;
            int r = 0;
            for (const auto& s : subsets) {
                const Eigen::MatrixXcd t = oracle::partial_trace(E, dims, s);
                for (Eigen::Index i = 0; i < t.size(); ++i) A(r + i, a * D + b) = t(i);
                r += static_cast<int>(t.size());
            }
            A(r, a * D + b) = (a == b) ? 1.0 : 0.0;
        }
    }
    return A;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
    Eigen::VectorXcd v(m.size());
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index b = 0; b < m.cols(); ++b) v[a * m.cols() + b] = m(a, b);
    }
    return v;
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index D) {
    Eigen::MatrixXcd m(D, D);
    for (Eigen::Index a = 0; a < D; ++a) {
        for (Eigen::Index b = 0; b < D; ++b) m(a, b) = v[a * D + b];
    }
    return m;
}

Eigen::MatrixXcd ghz_mixture() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(8, 8);
    m(0, 0) = m(7, 7) = 0.5;
    return m;
}

}  // namespace

TEST_CASE("packed coordinates are an isometry") {
    SeededRng rng(1);
    for (Index side : {1, 2, 5}) {
        const Eigen::MatrixXcd a = random_hermitian(side, rng);
        const Eigen::MatrixXcd b = random_hermitian(side, rng);
        const Eigen::VectorXd pa = pack_hermitian(a);
        CHECK(pa.size() == side * side);
        CHECK(std::abs(pa.dot(pack_hermitian(b)) - (a * b).trace().real()) < 1e-12);
        CHECK((unpack_hermitian(pa, side) - a).norm() < 1e-14);
    }
    CHECK_THROWS_AS(unpack_hermitian(Eigen::VectorXd::Zero(5), 2), std::invalid_argument);
}

TEST_CASE("constraint kernel dimension equals the uncovered Bloch-term count") {
    const std::vector<std::pair<int, Subsets>> cases{
        {2, {{0}, {1}}},
        {2, {{0}}},
        {3, kPairs},
        {3, {{0, 1}, {0, 2}}},
        {3, {{0}, {1}, {2}}},
        {3, {{0, 1}, {2}}},
        {4, {{0, 1, 2}, {0, 1, 3}}},
        {4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}},
    };
    for (const auto& [n, subsets] : cases) {
        const PartySignature sig(std::vector<int>(static_cast<size_t>(n), 2));
        const auto basis = constraint_nullspace(sig, subsets);
        CHECK(static_cast<long>(basis.size()) == oracle::bloch_kernel_count(n, 2, subsets));
    }
    CHECK(constraint_nullspace(PartySignature{3, 3}, {{0}, {1}}).size() == oracle::bloch_kernel_count(2, 3, {{0}, {1}}));
    CHECK(constraint_nullspace(PartySignature{2, 2, 2}, kPairs).size() == 27);
    CHECK(constraint_nullspace(PartySignature{2, 2}, {{0}, {1}}).size() == 9);
}

TEST_CASE("constraint kernel elements are traceless with vanishing marginals") {
    const PartySignature sig{2, 3, 2};
    const Subsets subs{{0, 1}, {2}};
    const auto basis = constraint_nullspace(sig, subs);
    REQUIRE_FALSE(basis.empty());
    for (size_t i = 0; i < basis.size(); ++i) {
        CHECK(std::abs(basis[i].trace()) < 1e-12);
        CHECK((basis[i] - basis[i].adjoint()).norm() < 1e-14);
        for (const auto& s : subs) CHECK(partial_trace(basis[i], sig, s).norm() < 1e-12);
        for (size_t j = 0; j < basis.size(); ++j) {
            CHECK(std::abs((basis[i] * basis[j]).trace().real() - (i == j ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("affine projection agrees with the complex pseudoinverse oracle") {
    const std::vector<int> dims{2, 2};
    const PartySignature sig(dims);
    const Subsets subs{{0}, {1}};
    SeededRng rng(2);
    const DensityMatrix rho = to_density(haar_random_state(sig, rng));
    const auto cs = MarginalConstraintSet::from_state(rho, subs);
    const Eigen::MatrixXcd A = complex_map(dims, subs);
    const Eigen::MatrixXcd Apinv = A.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXcd b = A * vec(rho.matrix());
    const AffineProjector proj(cs);
    CHECK(proj.kernel_dim() == 9);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::MatrixXcd x = random_hermitian(4, rng);
        const Eigen::MatrixXcd ref = unvec(vec(x) - Apinv * (A * vec(x) - b), 4);
        const Eigen::MatrixXcd got = proj.project(x);
        CHECK((got - ref).norm() < 1e-10);
        CHECK((project_affine(x, cs) - ref).norm() < 1e-10);
        CHECK(cs.max_residual(got) < 1e-12);
        CHECK(std::abs(got.trace().real() - 1.0) < 1e-12);
    }
}

TEST_CASE("affine projection is idempotent and self-adjoint on differences") {
    SeededRng rng(3);
    const PartySignature sig{2, 2, 2};
    const DensityMatrix rho = to_density(haar_random_state(sig, rng));
    const AffineProjector proj(MarginalConstraintSet::from_state(rho, kPairs));
    CHECK(proj.kernel_dim() == 27);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd x = pack_hermitian(random_hermitian(8, rng));
        Eigen::VectorXd y = pack_hermitian(random_hermitian(8, rng));
        Eigen::VectorXd px = x, py = y;
        proj.project(px);
        proj.project(py);
        Eigen::VectorXd ppx = px;
        proj.project(ppx);
        CHECK((ppx - px).norm() < 1e-12);
        CHECK(proj.distance(px) < 1e-12);
        CHECK(std::abs(proj.distance(x) - (x - px).norm()) < 1e-12);
        // The linear part (P x - P 0) is an orthogonal projector.
        Eigen::VectorXd p0 = Eigen::VectorXd::Zero(x.size());
        proj.project(p0);
        CHECK(std::abs((px - p0).dot(y) - x.dot(py - p0)) < 1e-10);
        Eigen::VectorXd k = x;
        proj.project_kernel(k);
        CHECK((k - (px - p0)).norm() < 1e-10);
    }
}

TEST_CASE("inconsistent marginals are rejected") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 0) = 1.0;
    Eigen::MatrixXcd ab = Eigen::MatrixXcd::Zero(4, 4);
    ab(2, 2) = ab(3, 3) = 0.5;  // |1><1| x I/2: party 0 is |1>, not |0>
    const MarginalConstraintSet cs(PartySignature{2, 2}, {{{0}, a}, {{0, 1}, ab}});
    CHECK_THROWS_AS(AffineProjector{cs}, InconsistentConstraints);
    try {
        AffineProjector p(cs);
    } catch (const InconsistentConstraints& e) {
        CHECK(e.residual() > 0.5);
    }
    CHECK_THROWS_AS(MarginalConstraintSet(PartySignature{2, 2}, {{{0}, ab}}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalConstraintSet(PartySignature{2, 2}, {{{0}, 2.0 * a}}), std::invalid_argument);
}

TEST_CASE("PSD projection") {
    SeededRng rng(4);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXcd x = random_hermitian(5, rng);
        const Eigen::MatrixXcd p = project_psd(x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        CHECK((project_psd(p) - p).norm() < 1e-12);
        // Variational inequality: <x - p, q - p> <= 0 for every PSD q.
        for (int t = 0; t < 5; ++t) {
            Eigen::MatrixXcd g = random_hermitian(5, rng);
            const Eigen::MatrixXcd q = g * g;
            CHECK(((x - p) * (q - p)).trace().real() <= 1e-10);
        }
    }
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(3, 3);
    CHECK((project_psd(id) - id).norm() == 0.0);
    CHECK(project_psd(-id).norm() == 0.0);
}

TEST_CASE("projection config validation") {
    ProjectionConfig c;
    CHECK_NOTHROW(c.validate());
    c.convergence_tol = 1e-3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.restarts = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.max_iterations = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("dykstra: a consistent state is a fixed point") {
    SeededRng rng(5);
    const DensityMatrix rho = to_density(haar_random_state(PartySignature{2, 2, 2}, rng));
    const auto cs = MarginalConstraintSet::from_state(rho, kPairs);
    const DykstraResult r = dykstra_solve(rho.matrix(), cs, ProjectionConfig{});
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(trace_distance(r.fixed_point.matrix(), rho.matrix()) < 1e-9);
}

TEST_CASE("dykstra output is a consistent density matrix") {
    // Full-rank target: the reduction of a pure state on 2 x 2 x 2 x 8.
    SeededRng rng(6);
    const DensityMatrix big = to_density(haar_random_state(PartySignature{2, 2, 2, 8}, rng));
    const DensityMatrix rho = partial_trace(big, std::vector<int>{0, 1, 2});
    REQUIRE(hermitian_eigen(rho.matrix()).values[0] > 1e-4);
    const auto cs = MarginalConstraintSet::from_state(rho, {{0, 1}, {1, 2}});
    const AffineProjector proj(cs);
    for (int rep = 0; rep < 3; ++rep) {
        const Eigen::MatrixXcd start = random_hermitian(8, rng);
        const DykstraResult r = dykstra_solve(start, cs, proj, ProjectionConfig{});
        CHECK(r.converged);
        CHECK(cs.max_residual(r.fixed_point.matrix()) < 1e-8);
        CHECK(r.psd_residual < 1e-10);
        CHECK(r.affine_residual < 1e-8);
    }
    CHECK_THROWS_AS(dykstra_solve(Eigen::MatrixXcd::Identity(4, 4), cs, proj, ProjectionConfig{}),
                    std::invalid_argument);
}

TEST_CASE("dykstra from the maximally mixed state reaches the GHZ mixture") {
    // Consistent states for GHZ pairs are [[1/2, c], [c*, 1/2]] on span{000, 111}
    // with |c| <= 1/2; the one nearest to I/8 has c = 0.
    const DensityMatrix ghz = to_density(ghz_state(PartySignature{2, 2, 2}));
    const auto cs = MarginalConstraintSet::from_state(ghz, kPairs);
    const DykstraResult r = dykstra_solve(Eigen::MatrixXcd::Identity(8, 8) / 8.0, cs, ProjectionConfig{});
    CHECK(r.converged);
    CHECK((r.fixed_point.matrix() - ghz_mixture()).norm() < 1e-7);
    CHECK(trace_distance(r.fixed_point.matrix(), ghz.matrix()) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cs.max_residual(ghz_mixture()) < 1e-15);
}

TEST_CASE("probe: GHZ with pair marginals is NON_UNIQUE") {
    const auto ghz = ghz_state(PartySignature{2, 2, 2});
    const FeasibilityVerdict v = uniqueness_probe(ghz, kPairs);
    CHECK(v.verdict == FeasibilityOutcome::NonUnique);
    CHECK(v.kernel_dim == 27);
    CHECK(v.support_dim == 2);
    REQUIRE(v.witnesses.size() >= 2);
    const DensityMatrix rho = to_density(ghz);
    CHECK((v.witnesses[0].matrix() - rho.matrix()).norm() < 1e-15);
    const auto cs = MarginalConstraintSet::from_state(rho, kPairs);
    for (size_t i = 1; i < v.witnesses.size(); ++i) {
        CHECK(cs.max_residual(v.witnesses[i].matrix()) < 1e-9);
        CHECK(trace_distance(v.witnesses[i].matrix(), rho.matrix()) > 1e-4);
    }
    CHECK(trace_distance(v.witnesses[1].matrix(), rho.matrix()) >= 0.2);
    for (double d : v.pairwise_distances) CHECK(d > 1e-4);
    CHECK(v.pairwise_distances.size() == v.witnesses.size() * (v.witnesses.size() - 1) / 2);
    CHECK(v.max_marginal_residual < 1e-9);
    CHECK(to_string(v.verdict) == "NON_UNIQUE");
}

TEST_CASE("probe: generic 3-qubit states are UNIQUE from pair marginals") {
    SeededRng rng(7);
    for (int t = 0; t < 3; ++t) {
        const FeasibilityVerdict v = uniqueness_probe(haar_random_state(PartySignature{2, 2, 2}, rng), kPairs);
        CHECK(v.verdict == FeasibilityOutcome::Unique);
        CHECK(v.support_dim >= 1);
        CHECK(v.support_dim < 8);
        CHECK(v.restarts.size() == 8);
        for (const auto& r : v.restarts) {
            CHECK(r.converged);
            CHECK(r.distance_to_state < 1e-4);
        }
        CHECK(v.witnesses.empty());
    }
}

TEST_CASE("probe: W state is UNIQUE from pair marginals") {
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(8);
    w[1] = w[2] = w[4] = 1.0;
    const FeasibilityVerdict v = uniqueness_probe(AmplitudeTensor::normalized(PartySignature{2, 2, 2}, w), kPairs);
    CHECK(v.verdict == FeasibilityOutcome::Unique);
}

TEST_CASE("probe: a party outside every subset gives an analytic witness") {
    SeededRng rng(8);
    const auto a = haar_random_state(PartySignature{2, 3, 2}, rng);
    const FeasibilityVerdict v = uniqueness_probe(a, {{0, 1}});
    CHECK(v.verdict == FeasibilityOutcome::NonUnique);
    REQUIRE(v.witnesses.size() == 2);
    const auto cs = MarginalConstraintSet::from_state(to_density(a), {{0, 1}});
    CHECK(cs.max_residual(v.witnesses[1].matrix()) < 1e-12);
    CHECK(v.pairwise_distances.at(0) > 1e-4);
    CHECK(v.note.find("party 2") != std::string::npos);
}

TEST_CASE("probe: product states are pinned by their single-party marginals") {
    const auto prod = basis_state(PartySignature{2, 2, 2}, std::vector<int>{0, 1, 0});
    const FeasibilityVerdict v = uniqueness_probe(prod, {{0}, {1}, {2}});
    CHECK(v.verdict == FeasibilityOutcome::Unique);
    CHECK(v.support_dim == 1);
}

TEST_CASE("probe: the full subset leaves a trivial kernel") {
    SeededRng rng(9);
    const FeasibilityVerdict v = uniqueness_probe(haar_random_state(PartySignature{2, 2}, rng), {{0, 1}});
    CHECK(v.verdict == FeasibilityOutcome::Unique);
    CHECK(v.kernel_dim == 0);
    CHECK(v.restarts.empty());
}

TEST_CASE("genericity survey is reproducible") {
    ProjectionConfig cfg;
    cfg.seed = 12;
    cfg.restarts = 3;
    const SurveyStats a = genericity_survey(PartySignature{2, 2, 2}, kPairs, 3, cfg);
    const SurveyStats b = genericity_survey(PartySignature{2, 2, 2}, kPairs, 3, cfg);
    CHECK(a.trials == 3);
    CHECK(a.unique + a.non_unique + a.inconclusive == 3);
    CHECK(a.unique == b.unique);
    REQUIRE(a.records.size() == 3);
    for (size_t t = 0; t < 3; ++t) {
        CHECK(a.records[t].trial == b.records[t].trial);
        CHECK(a.records[t].verdict == b.records[t].verdict);
        CHECK(a.records[t].max_distance == b.records[t].max_distance);
    }
    CHECK_THROWS_AS(genericity_survey(PartySignature{2, 2, 2}, kPairs, 0, cfg), std::invalid_argument);
}
