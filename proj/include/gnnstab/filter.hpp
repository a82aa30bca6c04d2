#ifndef GNNSTAB_FILTER_HPP_
#define GNNSTAB_FILTER_HPP_

#include <cstddef>
#include <vector>

#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"
#include "gnnstab/spectral.hpp"

namespace gnnstab {

// Bank of f_out * f_in polynomial filters sharing one tap count K.
// taps(f, g) filters input feature g into output feature f.
class FilterBank {
  public:
    FilterBank() = default;
    FilterBank(std::size_t f_in, std::size_t f_out, std::size_t order);
    FilterBank(std::size_t f_in, std::size_t f_out, std::vector<FilterTaps> taps);

    std::size_t f_in() const { return f_in_; }
    std::size_t f_out() const { return f_out_; }
    std::size_t order() const { return order_; }

    const FilterTaps& taps(std::size_t f, std::size_t g) const { return taps_[f * f_in_ + g]; }
    FilterTaps& taps(std::size_t f, std::size_t g) { return taps_[f * f_in_ + g]; }

    const std::vector<FilterTaps>& all_taps() const { return taps_; }
    std::vector<FilterTaps>& all_taps() { return taps_; }

  private:
    std::size_t f_in_ = 0;
    std::size_t f_out_ = 0;
    std::size_t order_ = 0;
    std::vector<FilterTaps> taps_;  // row-major: [f][g]
};

// z = sum_k h_k S^k x by iterated shifts (x, Sx, S^2 x, ...); K-1 matvecs,
// no matrix powers are materialized.
Vector apply_filter(const FilterTaps& h, const GraphShiftOperator& s, const Vector& x);

// Dense H(S) = sum_k h_k S^k via Horner in matrix form.
Matrix filter_matrix(const FilterTaps& h, const GraphShiftOperator& s);

// Column f of the output is sum_g H^{fg}(S) X[:, g]. The shift sequence of
// each input column is computed once and shared across output features.
Matrix apply_bank(const FilterBank& bank, const GraphShiftOperator& s, const Matrix& x);

// Narrow band-pass used by the sharp-filter demo: h(lambda) = c * lambda^3 *
// (root - lambda) with the root placed at root_factor * lambda_peak and c
// normalizing h(lambda_peak) = 1. A dilation by (root_factor - 1) moves the
// peak eigenvalue exactly onto the root, collapsing the response there.
FilterTaps sharp_bandpass_taps(double lambda_peak, double root_factor);

// Integral-Lipschitz-friendly comparison filter: h(lambda) = 2 lambda /
// lambda_max - (lambda / lambda_max)^2, which is steep near 0 and has
// h'(lambda_max) = 0.
FilterTaps flat_top_taps(double lambda_max);

}  // namespace gnnstab

#endif  // GNNSTAB_FILTER_HPP_
