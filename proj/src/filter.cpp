#include "gnnstab/filter.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "gnnstab/error.hpp"

namespace gnnstab {

FilterBank::FilterBank(std::size_t f_in, std::size_t f_out, std::size_t order)
    : f_in_(f_in), f_out_(f_out), order_(order) {
    if (f_in == 0 || f_out == 0 || order == 0) {
        throw ValidationError("filter bank dimensions and tap count must be positive");
    }
    taps_.assign(f_in * f_out, FilterTaps{Vector(order, 0.0)});
}

FilterBank::FilterBank(std::size_t f_in, std::size_t f_out, std::vector<FilterTaps> taps)
    : f_in_(f_in), f_out_(f_out), taps_(std::move(taps)) {
    if (f_in == 0 || f_out == 0 || taps_.size() != f_in * f_out) {
        throw ValidationError("filter bank tap grid does not match f_in * f_out");
    }
    order_ = taps_[0].order();
    for (const FilterTaps& t : taps_) {
        if (t.order() != order_ || t.order() == 0) {
            throw ValidationError("all filters in a bank must share one tap count");
        }
    }
}

Vector apply_filter(const FilterTaps& h, const GraphShiftOperator& s, const Vector& x) {
    if (x.size() != s.size()) {
        std::ostringstream msg;
        msg << "apply_filter length mismatch: graph has " << s.size() << " nodes, signal "
            << x.size();
        throw ValidationError(msg.str());
    }
    if (h.taps.empty()) throw ValidationError("apply_filter: empty taps");

    Vector acc = scale(x, h.taps[0]);
    Vector shifted = x;
    for (std::size_t k = 1; k < h.taps.size(); ++k) {
        shifted = matvec(s.matrix(), shifted);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h.taps[k] * shifted[i];
    }
    return acc;
}

Matrix filter_matrix(const FilterTaps& h, const GraphShiftOperator& s) {
    if (h.taps.empty()) throw ValidationError("filter_matrix: empty taps");
    const std::size_t n = s.size();
    const std::size_t order = h.taps.size();

    Matrix acc = scale(Matrix::identity(n), h.taps[order - 1]);
    for (std::size_t k = order - 1; k > 0; --k) {
        acc = matmul(s.matrix(), acc);
        for (std::size_t i = 0; i < n; ++i) acc(i, i) += h.taps[k - 1];
    }
    return acc;
}

Matrix apply_bank(const FilterBank& bank, const GraphShiftOperator& s, const Matrix& x) {
    if (x.rows() != s.size() || x.cols() != bank.f_in()) {
        std::ostringstream msg;
        msg << "apply_bank shape mismatch: graph " << s.size() << " nodes, bank expects "
            << bank.f_in() << " input features, got " << x.rows() << "x" << x.cols();
        throw ValidationError(msg.str());
    }
    const std::size_t n = s.size();
    Matrix out(n, bank.f_out());

    Vector shifted(n);
    for (std::size_t g = 0; g < bank.f_in(); ++g) {
        for (std::size_t i = 0; i < n; ++i) shifted[i] = x(i, g);
        for (std::size_t k = 0; k < bank.order(); ++k) {
            if (k > 0) shifted = matvec(s.matrix(), shifted);
            for (std::size_t f = 0; f < bank.f_out(); ++f) {
                const double hk = bank.taps(f, g).taps[k];
                if (hk == 0.0) continue;
                for (std::size_t i = 0; i < n; ++i) out(i, f) += hk * shifted[i];
            }
        }
    }
    return out;
}

FilterTaps sharp_bandpass_taps(double lambda_peak, double root_factor) {
    if (lambda_peak <= 0.0 || root_factor <= 1.0) {
        throw ValidationError("sharp_bandpass_taps: need lambda_peak > 0 and root_factor > 1");
    }
    const double root = root_factor * lambda_peak;
    const double peak_value = std::pow(lambda_peak, 3) * (root - lambda_peak);
    const double c = 1.0 / peak_value;
    // c * (root * lambda^3 - lambda^4)
    return FilterTaps{Vector{0.0, 0.0, 0.0, c * root, -c}};
}

FilterTaps flat_top_taps(double lambda_max) {
    if (lambda_max <= 0.0) throw ValidationError("flat_top_taps: need lambda_max > 0");
    return FilterTaps{Vector{0.0, 2.0 / lambda_max, -1.0 / (lambda_max * lambda_max)}};
}

}  // namespace gnnstab
