#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "gnnstab/data.hpp"
#include "gnnstab/error.hpp"
#include "gnnstab/graph.hpp"
#include "helpers.hpp"

using namespace gnnstab;
using namespace gnnstab::testing;

TEST_CASE("gso validates symmetry and caches the eigendecomposition") {
    CHECK_THROWS_AS(GraphShiftOperator(Matrix(2, 2, Vector{0, 1, 2, 0})), ValidationError);

    const GraphShiftOperator s = random_weighted_graph(8, 0.5, 42);
    const EigenSystem& first = s.eig();
    const EigenSystem& second = s.eig();
    CHECK(&first == &second);
    CHECK(std::is_sorted(first.values.begin(), first.values.end()));
}

TEST_CASE("permutation is a bijection with a doubly stochastic 0/1 matrix") {
    CHECK_THROWS_AS(Permutation(std::vector<std::size_t>{0, 0, 1}), ValidationError);
    CHECK_THROWS_AS(Permutation(std::vector<std::size_t>{0, 3}), ValidationError);

    const Permutation p = random_permutation(30, 9);
    const Matrix pm = p.to_matrix();
    for (std::size_t i = 0; i < pm.rows(); ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < pm.cols(); ++j) {
            row += pm(i, j);
            col += pm(j, i);
        }
        CHECK(row == 1.0);
        CHECK(col == 1.0);
    }
}

TEST_CASE("permute_signal basics") {
    const Vector x{1.0, 2.0, 3.0};
    CHECK(permute_signal(x, Permutation::identity(3)) == x);
    CHECK(permute_signal(x, Permutation({2, 1, 0})) == Vector{3.0, 2.0, 1.0});

    const Permutation p = random_permutation(3, 5);
    CHECK(permute_signal(permute_signal(x, p), p.inverse()) == x);
    CHECK_THROWS_AS(permute_signal(Vector{1.0}, p), ValidationError);
}

TEST_CASE("permute_signal matches the matrix definition x_hat = P^T x") {
    const Permutation p = random_permutation(7, 13);
    const Vector x = random_vector(7, 14);
    const Vector direct = permute_signal(x, p);
    const Vector via_matrix = matvec(transpose(p.to_matrix()), x);
    CHECK(max_abs_diff(direct, via_matrix) == 0.0);
}

TEST_CASE("permute_gso relabels and preserves spectra") {
    const GraphShiftOperator s = random_weighted_graph(6, 0.6, 21);

    SUBCASE("identity permutation leaves S unchanged") {
        const GraphShiftOperator same = permute_gso(s, Permutation::identity(6));
        CHECK(max_abs(subtract(same.matrix(), s.matrix())) == 0.0);
    }
    SUBCASE("two-node symmetric graph is invariant under the swap") {
        Matrix two(2, 2);
        two(0, 1) = 3.0;
        two(1, 0) = 3.0;
        const GraphShiftOperator pair(two);
        const GraphShiftOperator swapped = permute_gso(pair, Permutation({1, 0}));
        CHECK(max_abs(subtract(swapped.matrix(), pair.matrix())) == 0.0);
    }
    SUBCASE("matches the matrix definition P^T S P") {
        const Permutation p = random_permutation(6, 22);
        const Matrix pm = p.to_matrix();
        const Matrix expected = matmul(transpose(pm), matmul(s.matrix(), pm));
        CHECK(max_abs(subtract(permute_gso(s, p).matrix(), expected)) == 0.0);
    }
    SUBCASE("eigenvalues are preserved") {
        const Permutation p = random_permutation(6, 23);
        const GraphShiftOperator permuted = permute_gso(s, p);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(std::abs(permuted.eig().values[i] - s.eig().values[i]) <= 1e-9);
        }
    }
    SUBCASE("permuting back is exact") {
        const Permutation p = random_permutation(6, 24);
        const GraphShiftOperator back = permute_gso(permute_gso(s, p), p.inverse());
        CHECK(max_abs(subtract(back.matrix(), s.matrix())) == 0.0);
    }
    SUBCASE("size mismatch") {
        CHECK_THROWS_AS(permute_gso(s, random_permutation(5, 1)), ValidationError);
    }
}

TEST_CASE("random_permutation is seeded and uniform-ish") {
    CHECK_THROWS_AS(random_permutation(0, 1), ValidationError);
    CHECK(random_permutation(1, 99).mapping() == std::vector<std::size_t>{0});
    CHECK(random_permutation(64, 7).mapping() == random_permutation(64, 7).mapping());

    const Permutation p = random_permutation(100, 7);
    std::set<std::size_t> seen(p.mapping().begin(), p.mapping().end());
    CHECK(seen.size() == 100);
}

namespace {

// Straight per-pair Pearson over common raters, quadratic and obvious.
double pearson_pair_oracle(const RatingMatrix& ratings, std::size_t a, std::size_t b) {
    std::vector<double> xs, ys;
    for (const Rating& r1 : ratings.entries) {
        if (r1.item != a) continue;
        for (const Rating& r2 : ratings.entries) {
            if (r2.item == b && r2.user == r1.user) {
                xs.push_back(r1.value);
                ys.push_back(r2.value);
            }
        }
    }
    if (xs.size() < 2) return 0.0;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double num = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        vx += (xs[i] - mx) * (xs[i] - mx);
        vy += (ys[i] - my) * (ys[i] - my);
    }
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return num / std::sqrt(vx * vy);
}

}  // namespace

TEST_CASE("pearson_correlation") {
    SUBCASE("identical non-constant rating vectors correlate at 1") {
        RatingMatrix r;
        r.n_users = 2;
        r.n_items = 2;
        r.entries = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 4.0}, {1, 1, 4.0}};
        const Matrix c = pearson_correlation(r);
        CHECK(c(0, 1) == doctest::Approx(1.0));
        CHECK(c(0, 0) == 0.0);
    }
    SUBCASE("no common raters gives 0 and a diagnostic count") {
        RatingMatrix r;
        r.n_users = 2;
        r.n_items = 2;
        r.entries = {{0, 0, 5.0}, {1, 1, 3.0}};
        PearsonDiagnostics diag;
        const Matrix c = pearson_correlation(r, &diag);
        CHECK(c(0, 1) == 0.0);
        CHECK(diag.low_overlap_pairs == 1);
    }
    SUBCASE("hand dataset matches the per-pair oracle") {
        RatingMatrix r;
        r.n_users = 4;
        r.n_items = 3;
        r.entries = {{0, 0, 1.0}, {0, 1, 2.0}, {0, 2, 5.0}, {1, 0, 2.0}, {1, 1, 3.0},
                     {1, 2, 4.0}, {2, 0, 4.0}, {2, 1, 3.0}, {3, 1, 1.0}, {3, 2, 2.0}};
        const Matrix c = pearson_correlation(r);
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = 0; b < 3; ++b) {
                if (a == b) continue;
                CHECK(c(a, b) == doctest::Approx(pearson_pair_oracle(r, a, b)).epsilon(1e-12));
            }
        }
    }
    SUBCASE("values stay within [-1, 1] on synthetic data") {
        const RatingMatrix r = synthetic_ratings(40, 15, 3, 0.3, 0.6, 5);
        const Matrix c = pearson_correlation(r);
        CHECK(max_abs(c) <= 1.0);
    }
}

TEST_CASE("build_knn_graph") {
    SUBCASE("k = N-1 keeps everything") {
        Matrix sim = random_symmetric(5, 31);
        for (std::size_t i = 0; i < 5; ++i) sim(i, i) = 0.0;
        const GraphShiftOperator g = build_knn_graph(sim, 4);
        CHECK(max_abs(subtract(g.matrix(), sim)) == 0.0);
    }
    SUBCASE("star-shaped similarity with k=1 connects every spoke to the hub") {
        const std::size_t n = 6;
        Matrix sim(n, n);
        for (std::size_t i = 1; i < n; ++i) {
            sim(0, i) = 10.0 + static_cast<double>(i);
            sim(i, 0) = sim(0, i);
        }
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                sim(i, j) = 0.5;
                sim(j, i) = 0.5;
            }
        const GraphShiftOperator g = build_knn_graph(sim, 1);
        for (std::size_t i = 1; i < n; ++i) {
            CHECK(g.matrix()(i, 0) == sim(i, 0));
        }
        // The hub keeps only its single best spoke plus the union edges.
        CHECK(g.matrix()(1, 2) == 0.0);
    }
    SUBCASE("output is exactly symmetric with at least k neighbors per row") {
        Rng rng(8);
        const std::size_t n = 12;
        Matrix sim(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = rng.uniform(0.1, 1.0);
                sim(i, j) = v;
                sim(j, i) = v;
            }
        const GraphShiftOperator g = build_knn_graph(sim, 3);
        CHECK(max_abs(subtract(g.matrix(), transpose(g.matrix()))) == 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t nonzero = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (g.matrix()(i, j) != 0.0) ++nonzero;
            }
            CHECK(nonzero >= 3);
            CHECK(g.matrix()(i, i) == 0.0);
        }
    }
    SUBCASE("k must be below N") {
        CHECK_THROWS_AS(build_knn_graph(Matrix(4, 4), 4), ValidationError);
    }
}

TEST_CASE("eig memoization is safe under concurrent readers") {
    const GraphShiftOperator s = random_weighted_graph(24, 0.4, 911);
    std::vector<const EigenSystem*> seen(4, nullptr);
    std::vector<std::thread> readers;
    for (std::size_t t = 0; t < seen.size(); ++t) {
        readers.emplace_back([&s, &seen, t] { seen[t] = &s.eig(); });
    }
    for (std::thread& reader : readers) reader.join();
    for (const EigenSystem* sys : seen) CHECK(sys == seen[0]);
    CHECK(std::is_sorted(seen[0]->values.begin(), seen[0]->values.end()));
}

TEST_CASE("laplacian has zero row sums and nonnegative spectrum") {
    const GraphShiftOperator l = laplacian(random_weighted_graph(10, 0.4, 17));
    for (std::size_t i = 0; i < 10; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 10; ++j) row += l.matrix()(i, j);
        CHECK(std::abs(row) <= 1e-12);
    }
    CHECK(l.eig().values.front() >= -1e-10);
}
