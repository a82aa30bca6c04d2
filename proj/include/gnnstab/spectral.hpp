#ifndef GNNSTAB_SPECTRAL_HPP_
#define GNNSTAB_SPECTRAL_HPP_

#include <cstddef>

#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"

namespace gnnstab {

// Polynomial filter coefficients h_0 ... h_{K-1}. The same taps describe the
// node-domain operator H(S) = sum_k h_k S^k and the scalar frequency
// response h(lambda) = sum_k h_k lambda^k.
struct FilterTaps {
    Vector taps;

    std::size_t order() const { return taps.size(); }
};

FilterTaps validated_taps(Vector taps);

struct Interval {
    double lo;
    double hi;
};

// Default working interval for constant estimation: [min(0, lambda_1),
// lambda_N], so the region around lambda = 0 is always covered.
Interval default_interval(const GraphShiftOperator& s);

// Graph Fourier transform: x_tilde = V^T x for an orthonormal V.
Vector gft(const Matrix& v, const Vector& x);

// Inverse transform: x = V x_tilde.
Vector igft(const Matrix& v, const Vector& xt);

// h(lambda), Horner.
double eval_response(const FilterTaps& h, double lambda);

// h'(lambda), Horner on the shifted coefficients k * h_k.
double eval_response_deriv(const FilterTaps& h, double lambda);

// max |h'(lambda)| over a uniform grid on the interval. Valid as the
// polynomial's Lipschitz constant up to grid resolution; no root-finding on
// h'' is attempted.
double lipschitz_constant(const FilterTaps& h, Interval interval, std::size_t grid = 10001);

// max |lambda * h'(lambda)| over the same kind of grid.
double integral_lipschitz_constant(const FilterTaps& h, Interval interval,
                                   std::size_t grid = 10001);

// Taps divided by the grid maximum of |h(lambda)|, so the normalized
// response peaks at 1. Idempotent.
FilterTaps normalize_response(const FilterTaps& h, Interval interval, std::size_t grid = 10001);

}  // namespace gnnstab

#endif  // GNNSTAB_SPECTRAL_HPP_
