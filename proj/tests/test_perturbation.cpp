#include <doctest.h>

#include <cmath>

#include "gnnstab/error.hpp"
#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"
#include "gnnstab/perturbation.hpp"
#include "helpers.hpp"

using namespace gnnstab;
using namespace gnnstab::testing;

TEST_CASE("absolute_perturb") {
    const GraphShiftOperator s = random_weighted_graph(6, 0.5, 7);

    SUBCASE("zero error is a no-op") {
        CHECK(max_abs(subtract(absolute_perturb(s, Matrix(6, 6)).matrix(), s.matrix())) == 0.0);
    }
    SUBCASE("identity error shifts every eigenvalue") {
        const GraphShiftOperator shifted = absolute_perturb(s, scale(Matrix::identity(6), 0.1));
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(shifted.eig().values[i] == doctest::Approx(s.eig().values[i] + 0.1));
        }
    }
    SUBCASE("the change has exactly the error's norm") {
        const Matrix e = random_symmetric(6, 8);
        const GraphShiftOperator s_hat = absolute_perturb(s, e);
        const double moved = operator_norm(subtract(s_hat.matrix(), s.matrix()));
        CHECK(rel_diff(moved, operator_norm(e)) <= 1e-12);
    }
    SUBCASE("asymmetric error is rejected") {
        Matrix bad(6, 6);
        bad(0, 1) = 1.0;
        CHECK_THROWS_AS(absolute_perturb(s, bad), ValidationError);
    }
}

TEST_CASE("relative_perturb") {
    const GraphShiftOperator s = random_weighted_graph(5, 0.6, 9);

    SUBCASE("zero error is a no-op") {
        CHECK(max_abs(subtract(relative_perturb(s, Matrix(5, 5)).matrix(), s.matrix())) == 0.0);
    }
    SUBCASE("E = (eps/2) I scales the whole graph by (1 + eps)") {
        const double eps = 0.25;  // dyadic, so both routes round identically
        const GraphShiftOperator s_hat = relative_perturb(s, scale(Matrix::identity(5), eps / 2));
        CHECK(max_abs(subtract(s_hat.matrix(), scale(s.matrix(), 1.0 + eps))) == 0.0);
    }
    SUBCASE("diagonal error perturbs entries by s_ij (E_ii + E_jj)") {
        const Matrix e = random_diagonal_error(5, 0.3, 10);
        const GraphShiftOperator s_hat = relative_perturb(s, e);
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                const double expected = s.matrix()(i, j) * (1.0 + e(i, i) + e(j, j));
                CHECK(s_hat.matrix()(i, j) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("dilate") {
    const GraphShiftOperator s = random_weighted_graph(6, 0.5, 11);

    SUBCASE("zero dilation is a no-op") {
        CHECK(max_abs(subtract(dilate(s, 0.0).matrix(), s.matrix())) == 0.0);
    }
    SUBCASE("eigenvalues scale, eigenvectors are shared") {
        const GraphShiftOperator d = dilate(s, 0.5);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(d.eig().values[i] == doctest::Approx(1.5 * s.eig().values[i]));
        }
        CHECK(max_abs(subtract(d.eig().vectors, s.eig().vectors)) == 0.0);
    }
    SUBCASE("equals the relative perturbation with a scaled identity") {
        for (double eps : {0.5, 0.25, 0.0625}) {
            const GraphShiftOperator via_dilate = dilate(s, eps);
            const GraphShiftOperator via_relative =
                relative_perturb(s, scale(Matrix::identity(6), eps / 2));
            CHECK(max_abs(subtract(via_dilate.matrix(), via_relative.matrix())) == 0.0);
        }
    }
    SUBCASE("eps at or below -1 is rejected") {
        CHECK_THROWS_AS(dilate(s, -1.0), ValidationError);
    }
}

TEST_CASE("random_diagonal_error") {
    CHECK_THROWS_AS(random_diagonal_error(4, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(random_diagonal_error(4, 1.5, 1), ValidationError);

    SUBCASE("eps = 1 draws uniformly on [0, 1]") {
        const Matrix e = random_diagonal_error(1000, 1.0, 3);
        double lo = 1.0, hi = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < 1000; ++i) {
            lo = std::min(lo, e(i, i));
            hi = std::max(hi, e(i, i));
            mean += e(i, i) / 1000.0;
        }
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
        CHECK(mean == doctest::Approx(0.5).epsilon(0.05));
    }
    SUBCASE("all draws stay in the prescribed interval") {
        const double eps = 0.2;
        const Matrix e = random_diagonal_error(1000, eps, 4);
        for (std::size_t i = 0; i < 1000; ++i) {
            CHECK(e(i, i) >= (1.0 - eps) * eps);
            CHECK(e(i, i) <= eps);
        }
    }
    SUBCASE("satisfies the structural proximity it was built for") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const double eps = 0.05 + 0.04 * static_cast<double>(seed);
            const Matrix e = random_diagonal_error(40, std::min(eps, 1.0), 50 + seed);
            CHECK(structural_gap(e) <= std::min(eps, 1.0) * (1.0 + 1e-12));
            CHECK(operator_norm(e) <= std::min(eps, 1.0));
        }
    }
}

TEST_CASE("structural_gap") {
    CHECK(structural_gap(scale(Matrix::identity(5), 3.0)) == doctest::Approx(0.0));
    CHECK(structural_gap(scale(Matrix::identity(5), -3.0)) == doctest::Approx(0.0));
    CHECK(structural_gap(Matrix::diagonal(Vector{1.0, -1.0})) == doctest::Approx(2.0));
    CHECK_THROWS_AS(structural_gap(Matrix(3, 3)), ValidationError);

    SUBCASE("scale invariance") {
        const Matrix e = random_symmetric(6, 33);
        const double gap = structural_gap(e);
        for (double c : {2.0, -0.5, 10.0}) {
            CHECK(structural_gap(scale(e, c)) == doctest::Approx(gap).epsilon(1e-9));
        }
    }
}

TEST_CASE("eigenvector_misalignment") {
    const GraphShiftOperator s = random_weighted_graph(8, 0.5, 55);

    SUBCASE("a positive multiple of S is perfectly aligned") {
        const MisalignmentReport report = eigenvector_misalignment(s, scale(s.matrix(), 0.3));
        CHECK(report.delta <= 1e-9);
    }
    SUBCASE("a dilation error reports delta = 0 exactly") {
        const MisalignmentReport report =
            eigenvector_misalignment(s, scale(Matrix::identity(8), 0.05));
        CHECK(report.delta == 0.0);
        CHECK(report.u_minus_v_norm == 0.0);
    }
    SUBCASE("delta always lies in [0, 8]") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Matrix e = random_symmetric(8, 200 + seed);
            const MisalignmentReport report = eigenvector_misalignment(s, e);
            CHECK(report.delta >= 0.0);
            CHECK(report.delta <= 8.0);
            const double expected = (report.u_minus_v_norm + 1.0) * (report.u_minus_v_norm + 1.0) - 1.0;
            CHECK(report.delta == doctest::Approx(expected));
        }
    }
}

TEST_CASE("lemma1_decompose") {
    const GraphShiftOperator s = random_weighted_graph(8, 0.5, 66);
    const Matrix& v = s.eig().vectors;

    SUBCASE("an error sharing the eigenbasis has no residual part") {
        const Matrix e = scale(s.matrix(), 0.4);
        const auto [e_v, e_u] = lemma1_decompose(e, v);
        CHECK(operator_norm(e_u) <= 1e-9 * operator_norm(e));
        CHECK(max_abs(subtract(add(e_v, e_u), e)) <= 1e-12);
    }
    SUBCASE("zero error decomposes to zero") {
        const auto [e_v, e_u] = lemma1_decompose(Matrix(8, 8), v);
        CHECK(max_abs(e_v) == 0.0);
        CHECK(max_abs(e_u) == 0.0);
    }
    SUBCASE("the residual obeys the misalignment bound on random pairs") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const GraphShiftOperator graph = random_weighted_graph(12, 0.4, 300 + seed);
            const Matrix e = random_symmetric(12, 400 + seed);
            const auto [e_v, e_u] = lemma1_decompose(e, graph.eig().vectors);
            const double delta = eigenvector_misalignment(graph, e).delta;
            CHECK(operator_norm(e_u) <=
                  operator_norm(e) * (delta * (1.0 + 1e-9) + 1e-9));
            CHECK(max_abs(subtract(add(e_v, e_u), e)) <= 1e-10 * std::max(1.0, max_abs(e)));
        }
    }
}
