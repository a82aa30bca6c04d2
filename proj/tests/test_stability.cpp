#include <doctest.h>

#include <cmath>

#include "gnnstab/error.hpp"
#include "gnnstab/gnn.hpp"
#include "gnnstab/graph.hpp"
#include "gnnstab/perturbation.hpp"
#include "gnnstab/spectral.hpp"
#include "gnnstab/stability.hpp"
#include "helpers.hpp"

using namespace gnnstab;
using namespace gnnstab::testing;

TEST_CASE("filter_distance trivial cases") {
    const GraphShiftOperator s = random_weighted_graph(7, 0.5, 5);
    CHECK(filter_distance(random_bounded_taps(4, 3.0, 6), s, s) == 0.0);

    const GraphShiftOperator other = random_weighted_graph(7, 0.5, 7);
    CHECK(filter_distance(FilterTaps{{1.0}}, s, other) == 0.0);
    CHECK_THROWS_AS(
        filter_distance(FilterTaps{{1.0}}, s, random_weighted_graph(6, 0.5, 8)),
        ValidationError);
}

TEST_CASE("filter_distance under dilation matches the shared-eigenvector closed form") {
    const GraphShiftOperator s = random_weighted_graph(9, 0.5, 9);
    const FilterTaps h = random_bounded_taps(5, s.eig().values.back(), 10);
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        const GraphShiftOperator s_hat = dilate(s, eps);
        const double measured = filter_distance(h, s, s_hat);
        double closed_form = 0.0;
        for (double lambda : s.eig().values) {
            closed_form = std::max(closed_form, std::abs(eval_response(h, lambda) -
                                                         eval_response(h, (1.0 + eps) * lambda)));
        }
        CHECK(std::abs(measured - closed_form) <= 1e-9 * std::max(1.0, closed_form));
    }
}

TEST_CASE("eigen-greedy matching recovers a pure relabeling of an anchored graph") {
    // Make the leading eigenvector's magnitude profile unambiguous by
    // weighting one hub strongly.
    Matrix m(6, 6);
    Rng rng(77);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) {
            const double w = rng.uniform(0.1, 0.5) + (i == 0 ? 2.0 : 0.0);
            m(i, j) = w;
            m(j, i) = w;
        }
    const GraphShiftOperator s{std::move(m)};
    const Permutation p = random_permutation(6, 78);
    const GraphShiftOperator s_hat = permute_gso(s, p);
    const FilterTaps h = random_bounded_taps(4, s.eig().values.back(), 79);

    const double greedy = filter_distance(h, s, s_hat, Matching::eigen_greedy);
    CHECK(greedy <= 1e-9);
    // Identity matching sees a genuinely different operator here.
    CHECK(filter_distance(h, s, s_hat, Matching::identity) > 1e-3);
}

TEST_CASE("gnn_distance") {
    const GraphShiftOperator s = random_weighted_graph(8, 0.5, 11);
    const GnnModel model = init_model(3, 4, Nonlinearity::relu, 12);
    std::vector<Vector> signals{random_vector(8, 13), random_vector(8, 14)};

    SUBCASE("same graph, zero distance") {
        CHECK(gnn_distance(model, s, s, signals) == 0.0);
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(gnn_distance(model, s, s, {}), ValidationError);
        CHECK_THROWS_AS(gnn_distance(model, s, s, {Vector(8, 0.0)}), ValidationError);
    }
    SUBCASE("single-filter identity model reduces to the filter action") {
        GnnModel linear = init_model(1, 4, Nonlinearity::identity, 15);
        const GraphShiftOperator s_hat = dilate(s, 0.05);
        const double network = gnn_distance(linear, s, s_hat, signals);
        double direct = 0.0;
        const FilterTaps& h = linear.layers[0].taps(0, 0);
        for (const Vector& x : signals) {
            const Vector diff = subtract(apply_filter(h, s, x), apply_filter(h, s_hat, x));
            direct = std::max(direct, norm(diff) / norm(x));
        }
        CHECK(network == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("bound formulas") {
    CHECK(bound_absolute(1.0, 0.0, 50, 0.0) == 0.0);
    CHECK(bound_absolute(1.0, 0.0, 123, 0.1) == doctest::Approx(0.1));
    CHECK(bound_absolute(2.0, 3.0, 4, 0.05) == doctest::Approx(0.7));

    CHECK(bound_relative(1.0, 1.0, 9, 0.0) == 0.0);
    CHECK(bound_relative(1.0, 0.0, 9, 0.1) == doctest::Approx(0.2));
    CHECK(bound_relative(1.0, 1.0, 9, 0.1) == doctest::Approx(0.8));

    CHECK(bound_structural(1.0, 0.0) == 0.0);
    CHECK(bound_structural(0.0, 0.3) == 0.0);
    CHECK(bound_structural(3.0, 0.01) == doctest::Approx(0.06));

    CHECK(bound_gnn(2.0, 1, 1, 0.5) == doctest::Approx(1.0));
    CHECK(bound_gnn(2.0, 2, 64, 0.0) == 0.0);
    CHECK(bound_gnn(2.0, 2, 64, 0.01) == doctest::Approx(2.56));
}

TEST_CASE("delta_for_model returns the per-model filter stability constant") {
    CHECK(delta_for_model(BoundModel::absolute, 1.0, 0.0, 100) == doctest::Approx(1.0));
    CHECK(delta_for_model(BoundModel::relative_structural, 1.0, 5.0, 100) == doctest::Approx(2.0));
    CHECK(delta_for_model(BoundModel::relative, 1.0, 0.0, 100) == doctest::Approx(2.0));
    CHECK(delta_for_model(BoundModel::absolute, 2.0, 1.0, 4) == doctest::Approx(2.0 * 3.0));
}

TEST_CASE("first_order_residual") {
    const GraphShiftOperator s = random_weighted_graph(8, 0.5, 21);

    SUBCASE("zero error, zero residual") {
        const FilterTaps h = random_bounded_taps(5, s.eig().values.back(), 22);
        CHECK(first_order_residual(h, s, Matrix(8, 8), PerturbationModel::absolute) == 0.0);
    }
    SUBCASE("two taps have no quadratic term under the absolute model") {
        const FilterTaps h{{0.4, -0.9}};
        const Matrix e = scale(random_symmetric(8, 23), 0.1);
        CHECK(first_order_residual(h, s, e, PerturbationModel::absolute) <= 1e-12);
    }
    SUBCASE("halving the error quarters the residual") {
        for (PerturbationModel model :
             {PerturbationModel::absolute, PerturbationModel::relative}) {
            double ratio_sum = 0.0;
            const int trials = 5;
            for (int t = 0; t < trials; ++t) {
                const FilterTaps h = random_bounded_taps(5, s.eig().values.back(), 30 + t);
                const Matrix direction = random_symmetric_error(8, 1.0, 40 + t);
                const double eps = 1e-3;
                const double small = first_order_residual(h, s, scale(direction, eps), model);
                const double large =
                    first_order_residual(h, s, scale(direction, 2.0 * eps), model);
                REQUIRE(small > 0.0);
                ratio_sum += large / small;
            }
            const double mean_ratio = ratio_sum / trials;
            CHECK(mean_ratio >= 3.5);
            CHECK(mean_ratio <= 4.5);
        }
    }
}

TEST_CASE("sweep") {
    const GraphShiftOperator s = random_weighted_graph(12, 0.5, 51);
    const Architecture arch{"gnn", init_model(3, 4, Nonlinearity::relu, 52)};
    const std::vector<Vector> probes{random_vector(12, 53), random_vector(12, 54)};

    SUBCASE("eps zero rows measure zero") {
        for (PerturbationModel model : {PerturbationModel::absolute, PerturbationModel::relative,
                                        PerturbationModel::dilation}) {
            const auto records = sweep(s, model, {0.0}, {arch}, probes, 55);
            REQUIRE(records.size() == 1);
            CHECK(records[0].filter.measured_distance == 0.0);
            CHECK(records[0].gnn.measured_distance == 0.0);
            CHECK(records[0].filter.bound == 0.0);
        }
    }
    SUBCASE("bounds are monotone along an ascending eps grid") {
        const auto records =
            sweep(s, PerturbationModel::dilation, {1e-3, 1e-2, 1e-1, 0.5}, {arch}, probes, 56);
        for (std::size_t i = 1; i < records.size(); ++i) {
            CHECK(records[i].filter.bound >= records[i - 1].filter.bound);
            CHECK(records[i].gnn.bound >= records[i - 1].gnn.bound);
        }
    }
    SUBCASE("deterministic per seed") {
        const auto a = sweep(s, PerturbationModel::relative, {1e-2, 1e-1}, {arch}, probes, 57);
        const auto b = sweep(s, PerturbationModel::relative, {1e-2, 1e-1}, {arch}, probes, 57);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].filter.measured_distance == b[i].filter.measured_distance);
            CHECK(a[i].gnn.measured_distance == b[i].gnn.measured_distance);
            CHECK(a[i].filter.bound == b[i].filter.bound);
            CHECK(a[i].filter.delta == b[i].filter.delta);
        }
    }
    SUBCASE("relative-model rows respect the structural bound at small eps") {
        const auto records =
            sweep(s, PerturbationModel::relative, {1e-3, 1e-2, 0.05}, {arch}, probes, 58);
        for (const SweepRecord& r : records) {
            const double c = r.filter.c;
            const double eps = r.filter.eps;
            CHECK(r.filter.measured_distance <= 2.0 * c * eps + 5.0 * c * eps * eps);
        }
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(sweep(s, PerturbationModel::relative, {}, {arch}, probes, 1),
                        ValidationError);
        CHECK_THROWS_AS(sweep(s, PerturbationModel::relative, {0.1, 0.01}, {arch}, probes, 1),
                        ValidationError);
        CHECK_THROWS_AS(sweep(s, PerturbationModel::relative, {0.1}, {}, probes, 1),
                        ValidationError);
    }
}

TEST_CASE("dilating an integral Lipschitz filter stays within 2 C eps (1 + eps)") {
    const GraphShiftOperator s = laplacian(random_weighted_graph(10, 0.4, 61));
    const double lambda_max = s.eig().values.back();
    const FilterTaps flat = flat_top_taps(lambda_max);

    for (double eps : {0.01, 0.1, 0.3, 0.5}) {
        const GraphShiftOperator s_hat = dilate(s, eps);
        const Interval interval{0.0, (1.0 + eps) * lambda_max};
        const double c = integral_lipschitz_constant(flat, interval);
        const double measured = filter_distance(flat, s, s_hat);
        CHECK(measured <= 2.0 * c * eps * (1.0 + eps));
    }
}

TEST_CASE("a sharp high-frequency filter is less stable than the flat-top filter") {
    // The two-bump pair the sharp-filter demo constructs: narrow band pass
    // at lambda_N versus the flat-top comparison filter.
    const GraphShiftOperator s = laplacian(random_weighted_graph(14, 0.4, 62));
    const double lambda_max = s.eig().values.back();
    const FilterTaps sharp = sharp_bandpass_taps(lambda_max, 1.1);
    const FilterTaps flat = flat_top_taps(lambda_max);

    for (double eps : {0.05, 0.1}) {
        const GraphShiftOperator s_hat = dilate(s, eps);
        CHECK(filter_distance(sharp, s, s_hat) >= filter_distance(flat, s, s_hat));
    }
}

TEST_CASE("looseness ratios exceed one on measured sweep rows") {
    const GraphShiftOperator s = random_weighted_graph(16, 0.4, 63);
    const Architecture arch{"linear", init_model(4, 5, Nonlinearity::identity, 64)};
    const std::vector<Vector> probes{random_vector(16, 65)};

    for (PerturbationModel model : {PerturbationModel::absolute, PerturbationModel::relative,
                                    PerturbationModel::dilation}) {
        const auto records = sweep(s, model, {1e-3, 1e-2, 1e-1, 1.0}, {arch}, probes, 66);
        for (const SweepRecord& r : records) {
            if (r.filter.measured_distance > 0.0) CHECK(r.filter.looseness_ratio > 1.0);
            if (r.gnn.measured_distance > 0.0) CHECK(r.gnn.looseness_ratio > 1.0);
        }
    }
}
