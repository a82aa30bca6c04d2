#ifndef GNNSTAB_TESTS_HELPERS_HPP_
#define GNNSTAB_TESTS_HELPERS_HPP_

#include <cmath>
#include <cstdint>

#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"
#include "gnnstab/rng.hpp"
#include "gnnstab/spectral.hpp"

namespace gnnstab::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Vector data(rows * cols);
    for (double& v : data) v = rng.normal();
    return Matrix(rows, cols, std::move(data));
}

inline Matrix random_symmetric(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = rng.normal();
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

// Taps with responses of order one on [0, lambda_max]: coefficient k decays
// like lambda_max^-k so high powers do not dominate.
inline FilterTaps random_bounded_taps(std::size_t order, double lambda_max, std::uint64_t seed) {
    Rng rng(seed);
    Vector taps(order);
    double scale = 1.0;
    for (std::size_t k = 0; k < order; ++k) {
        taps[k] = rng.uniform(-1.0, 1.0) * scale;
        scale /= std::max(1.0, lambda_max);
    }
    return FilterTaps{std::move(taps)};
}

// Random member of the integral-Lipschitz-friendly family whose derivative
// vanishes at both ends of [lo, hi]: h'(lambda) = a (lambda - lo)
// (lambda - hi) (lambda - mu) with an interior mu. The response is steep in
// the middle of the band and flattens toward both spectral edges, so its
// |lambda h'| maximum sits strictly inside the interval.
inline FilterTaps random_flat_end_taps(double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    const double span = hi - lo;
    const double mu = lo + span * rng.uniform(0.25, 0.75);
    const double a = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 1.5) * 6.0 /
                     (span * span * span);
    const double c0 = rng.uniform(-0.5, 0.5);
    // Antiderivative of (x - lo)(x - hi)(x - mu).
    const double s2 = lo * hi + mu * (lo + hi);
    const double s3 = lo + hi + mu;
    return FilterTaps{Vector{c0, -a * lo * hi * mu, a * s2 / 2.0, -a * s3 / 3.0, a / 4.0}};
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a[i] - b[i]));
    return best;
}

}  // namespace gnnstab::testing

#endif  // GNNSTAB_TESTS_HELPERS_HPP_
