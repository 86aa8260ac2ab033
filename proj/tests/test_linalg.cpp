#include <doctest.h>

#include "qmarg/linalg.hpp"
#include "qmarg/tensor.hpp"
#include "support/oracles.hpp"

using namespace qmarg;

TEST_CASE("hermitian eigenvalues agree with the characteristic-polynomial oracle") {
    oracle::Xoshiro xo(31);
    for (int side : {1, 2, 3, 5, 6}) {
        for (int rep = 0; rep < 5; ++rep) {
            const oracle::Mat h = oracle::random_hermitian(side, xo);
            const EigenSystem es = hermitian_eigen(h);
            const auto ref = oracle::charpoly_eigenvalues(h);
            for (int i = 0; i < side; ++i) CHECK(std::abs(es.values[i] - ref[static_cast<size_t>(i)]) < 1e-8);
            for (int i = 1; i < side; ++i) CHECK(es.values[i - 1] <= es.values[i]);
            const Eigen::MatrixXcd rebuilt = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
            CHECK((rebuilt - h).norm() < 1e-10 * (1.0 + h.norm()));
            CHECK((es.vectors.adjoint() * es.vectors - Eigen::MatrixXcd::Identity(side, side)).norm() < 1e-12);
        }
    }
}

TEST_CASE("hermitian eigen rejects non-Hermitian input") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3);
    m(0, 2) = 0.5;
    CHECK_THROWS_AS(hermitian_eigen(m), std::invalid_argument);
}

TEST_CASE("rank and nullspace examples") {
    Eigen::MatrixXd a(3, 3);
    a << 1, 2, 3, 2, 4, 6, 1, 0, 1;
    const auto r = rank_and_nullspace(a);
    CHECK(r.rank == 2);
    REQUIRE(r.null_basis.cols() == 1);
    CHECK((a * r.null_basis).norm() < 1e-12);
    CHECK(std::abs(r.null_basis.norm() - 1.0) < 1e-12);

    CHECK(rank_and_nullspace(Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 4))).rank == 0);
    CHECK(rank_and_nullspace(Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 4))).null_basis.cols() == 4);

    Eigen::MatrixXd wide(2, 4);
    wide << 1, 0, 0, 0, 0, 1, 0, 0;
    const auto w = rank_and_nullspace(wide);
    CHECK(w.rank == 2);
    CHECK(w.null_basis.cols() == 2);
    CHECK((wide * w.null_basis).norm() < 1e-14);

    Eigen::MatrixXd near(2, 2);
    near << 1, 0, 0, 1e-9;
    CHECK(rank_and_nullspace(near).rank == 2);
    CHECK(rank_and_nullspace(near, TolPolicy::relative_to_max(1e-8)).rank == 1);
    CHECK(rank_and_nullspace(near, TolPolicy{std::nullopt, 0.5}).rank == 1);
    CHECK(rank_and_nullspace(near, TolPolicy{1e-12, 2.0}).rank == 0);
}

TEST_CASE("complex rank on a product of random factors") {
    SeededRng rng(3);
    for (int k : {1, 2, 4}) {
        Eigen::MatrixXcd left(6, k), right(k, 5);
        for (Eigen::Index i = 0; i < left.size(); ++i) left(i) = rng.complex_normal();
        for (Eigen::Index i = 0; i < right.size(); ++i) right(i) = rng.complex_normal();
        const Eigen::MatrixXcd m = left * right;
        const auto r = rank_and_nullspace(m, TolPolicy::relative_to_max(1e-10));
        CHECK(r.rank == k);
        CHECK(r.null_basis.cols() == 5 - k);
        CHECK((m * r.null_basis).norm() < 1e-10 * m.norm());
        CHECK(r.singular_values.size() == 5);
    }
}

TEST_CASE("tolerance policy thresholds") {
    CHECK(TolPolicy{}.threshold(2.0, 3, 4) == doctest::Approx(4 * std::numeric_limits<double>::epsilon() * 2.0));
    CHECK(TolPolicy::relative_to_max(1e-3).threshold(5.0, 1, 1) == doctest::Approx(5e-3));
    CHECK(TolPolicy{1e-3, 0.25}.threshold(5.0, 1, 1) == 0.25);
}
