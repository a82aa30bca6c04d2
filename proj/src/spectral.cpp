#include "gnnstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "gnnstab/error.hpp"

namespace gnnstab {

FilterTaps validated_taps(Vector taps) {
    if (taps.empty()) throw ValidationError("filter taps must contain at least one coefficient");
    for (double t : taps)
        if (!std::isfinite(t)) throw ValidationError("filter taps must be finite");
    return FilterTaps{std::move(taps)};
}

Interval default_interval(const GraphShiftOperator& s) {
    const EigenSystem& eig = s.eig();
    if (eig.values.empty()) return Interval{0.0, 0.0};
    return Interval{std::min(0.0, eig.values.front()), eig.values.back()};
}

Vector gft(const Matrix& v, const Vector& x) {
    if (v.rows() != v.cols() || v.rows() != x.size()) {
        std::ostringstream msg;
        msg << "gft shape mismatch: basis " << v.rows() << "x" << v.cols() << ", signal "
            << x.size();
        throw ValidationError(msg.str());
    }
    Vector out(x.size(), 0.0);
    for (std::size_t i = 0; i < v.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < v.rows(); ++j) acc += v(j, i) * x[j];
        out[i] = acc;
    }
    return out;
}

Vector igft(const Matrix& v, const Vector& xt) {
    if (v.rows() != v.cols() || v.cols() != xt.size()) {
        std::ostringstream msg;
        msg << "igft shape mismatch: basis " << v.rows() << "x" << v.cols() << ", coefficients "
            << xt.size();
        throw ValidationError(msg.str());
    }
    return matvec(v, xt);
}

double eval_response(const FilterTaps& h, double lambda) {
    double acc = 0.0;
    for (std::size_t k = h.taps.size(); k > 0; --k) acc = acc * lambda + h.taps[k - 1];
    return acc;
}

double eval_response_deriv(const FilterTaps& h, double lambda) {
    double acc = 0.0;
    for (std::size_t k = h.taps.size(); k > 1; --k) {
        acc = acc * lambda + static_cast<double>(k - 1) * h.taps[k - 1];
    }
    return acc;
}

namespace {

void check_interval(Interval interval, std::size_t grid) {
    if (!(interval.lo <= interval.hi)) {
        std::ostringstream msg;
        msg << "empty interval [" << interval.lo << ", " << interval.hi << "]";
        throw ValidationError(msg.str());
    }
    if (grid < 2) throw ValidationError("grid must have at least 2 points");
}

template <typename F>
double grid_max(F&& f, Interval interval, std::size_t grid) {
    const double step = (interval.hi - interval.lo) / static_cast<double>(grid - 1);
    double best = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double lambda = interval.lo + step * static_cast<double>(i);
        best = std::max(best, f(lambda));
    }
    return best;
}

}  // namespace

double lipschitz_constant(const FilterTaps& h, Interval interval, std::size_t grid) {
    check_interval(interval, grid);
    return grid_max([&](double l) { return std::abs(eval_response_deriv(h, l)); }, interval, grid);
}

double integral_lipschitz_constant(const FilterTaps& h, Interval interval, std::size_t grid) {
    check_interval(interval, grid);
    return grid_max([&](double l) { return std::abs(l * eval_response_deriv(h, l)); }, interval,
                    grid);
}

FilterTaps normalize_response(const FilterTaps& h, Interval interval, std::size_t grid) {
    check_interval(interval, grid);
    const double peak =
        grid_max([&](double l) { return std::abs(eval_response(h, l)); }, interval, grid);
    if (peak == 0.0) {
        throw ValidationError("normalize_response: response is zero on the whole grid");
    }
    Vector scaled(h.taps.size());
    for (std::size_t k = 0; k < h.taps.size(); ++k) scaled[k] = h.taps[k] / peak;
    return FilterTaps{std::move(scaled)};
}

}  // namespace gnnstab
