#include "gnnstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "gnnstab/error.hpp"
#include "gnnstab/rng.hpp"

namespace gnnstab {

namespace {

void check_same_size(const GraphShiftOperator& s, const GraphShiftOperator& s_hat,
                     const char* op) {
    if (s.size() != s_hat.size()) {
        std::ostringstream msg;
        msg << op << ": graphs have " << s.size() << " and " << s_hat.size() << " nodes";
        throw ValidationError(msg.str());
    }
}

// Node correspondence from greedily matching the magnitude rankings of the
// leading eigenvectors. perm[i] = node of S_hat paired with node i of S.
std::vector<std::size_t> eigen_greedy_matching(const GraphShiftOperator& s,
                                               const GraphShiftOperator& s_hat) {
    const std::size_t n = s.size();
    const Matrix& v = s.eig().vectors;
    const Matrix& v_hat = s_hat.eig().vectors;

    auto rank_by_leading = [n](const Matrix& basis) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(basis(a, n - 1)) > std::abs(basis(b, n - 1));
        });
        return idx;
    };
    const std::vector<std::size_t> order_s = rank_by_leading(v);
    const std::vector<std::size_t> order_hat = rank_by_leading(v_hat);

    std::vector<std::size_t> perm(n);
    for (std::size_t r = 0; r < n; ++r) perm[order_s[r]] = order_hat[r];
    return perm;
}

Matrix remap(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(perm[i], perm[j]);
    return out;
}

}  // namespace

double filter_distance(const FilterTaps& h, const GraphShiftOperator& s,
                       const GraphShiftOperator& s_hat, Matching matching) {
    check_same_size(s, s_hat, "filter_distance");
    const Matrix hs = filter_matrix(h, s);
    Matrix hs_hat = filter_matrix(h, s_hat);
    if (matching == Matching::eigen_greedy) {
        hs_hat = remap(hs_hat, eigen_greedy_matching(s, s_hat));
    }
    return operator_norm(subtract(hs, hs_hat));
}

std::vector<double> bank_filter_distances(const FilterBank& bank, const GraphShiftOperator& s,
                                          const GraphShiftOperator& s_hat) {
    check_same_size(s, s_hat, "bank_filter_distances");
    const std::size_t n = s.size();
    const std::size_t order = bank.order();

    // Shift powers shared by every filter of the bank.
    std::vector<Matrix> pow_s, pow_hat;
    pow_s.reserve(order);
    pow_hat.reserve(order);
    pow_s.push_back(Matrix::identity(n));
    pow_hat.push_back(Matrix::identity(n));
    for (std::size_t k = 1; k < order; ++k) {
        pow_s.push_back(matmul(s.matrix(), pow_s[k - 1]));
        pow_hat.push_back(matmul(s_hat.matrix(), pow_hat[k - 1]));
    }

    std::vector<double> distances;
    distances.reserve(bank.all_taps().size());
    for (const FilterTaps& h : bank.all_taps()) {
        Matrix diff(n, n);
        for (std::size_t k = 0; k < order; ++k) {
            if (h.taps[k] == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    diff(i, j) += h.taps[k] * (pow_s[k](i, j) - pow_hat[k](i, j));
        }
        distances.push_back(operator_norm(diff));
    }
    return distances;
}

double gnn_distance(const GnnModel& model, const GraphShiftOperator& s,
                    const GraphShiftOperator& s_hat, const std::vector<Vector>& signals) {
    check_same_size(s, s_hat, "gnn_distance");
    if (signals.empty()) throw ValidationError("gnn_distance: signal set is empty");

    double worst = 0.0;
    for (const Vector& x : signals) {
        const double xn = norm(x);
        if (xn == 0.0) throw ValidationError("gnn_distance: signal with zero norm");
        const Matrix phi = hidden_output(model, s, x);
        const Matrix phi_hat = hidden_output(model, s_hat, x);
        worst = std::max(worst, frobenius_norm(subtract(phi, phi_hat)) / xn);
    }
    return worst;
}

double bound_absolute(double c, double delta, std::size_t n, double eps) {
    return c * (1.0 + delta * std::sqrt(static_cast<double>(n))) * eps;
}

double bound_relative(double c, double delta, std::size_t n, double eps) {
    return 2.0 * c * (1.0 + delta * std::sqrt(static_cast<double>(n))) * eps;
}

double bound_structural(double c, double eps) { return 2.0 * c * eps; }

double bound_gnn(double delta_const, std::size_t layers, std::size_t width, double eps) {
    return delta_const * static_cast<double>(layers) *
           std::pow(static_cast<double>(width), static_cast<double>(layers) - 1.0) * eps;
}

double delta_for_model(BoundModel model, double c, double delta, std::size_t n) {
    switch (model) {
        case BoundModel::absolute:
            return c * (1.0 + delta * std::sqrt(static_cast<double>(n)));
        case BoundModel::relative:
            return 2.0 * c * (1.0 + delta * std::sqrt(static_cast<double>(n)));
        case BoundModel::relative_structural:
            return 2.0 * c;
    }
    throw ValidationError("delta_for_model: unknown model");
}

double first_order_residual(const FilterTaps& h, const GraphShiftOperator& s, const Matrix& e,
                            PerturbationModel model) {
    if (e.rows() != s.size() || e.cols() != s.size()) {
        throw ValidationError("first_order_residual: error matrix size mismatch");
    }
    const std::size_t n = s.size();
    const std::size_t order = h.taps.size();

    std::vector<Matrix> pow_s;
    pow_s.reserve(order + 1);
    pow_s.push_back(Matrix::identity(n));
    for (std::size_t k = 1; k <= order; ++k) pow_s.push_back(matmul(s.matrix(), pow_s[k - 1]));

    Matrix first_order(n, n);
    for (std::size_t k = 1; k < order; ++k) {
        if (h.taps[k] == 0.0) continue;
        for (std::size_t r = 0; r < k; ++r) {
            Matrix term = model == PerturbationModel::absolute
                              ? matmul(pow_s[r], matmul(e, pow_s[k - r - 1]))
                              : add(matmul(pow_s[r], matmul(e, pow_s[k - r])),
                                    matmul(pow_s[r + 1], matmul(e, pow_s[k - r - 1])));
            first_order = add(first_order, scale(term, h.taps[k]));
        }
    }

    const GraphShiftOperator s_hat = model == PerturbationModel::absolute
                                         ? absolute_perturb(s, e)
                                         : relative_perturb(s, e);
    const Matrix diff = subtract(filter_matrix(h, s_hat), filter_matrix(h, s));
    return operator_norm(subtract(diff, first_order));
}

StabilityReport make_report(double eps, double measured, double bound, PerturbationModel model,
                            double c, double delta, std::size_t n, std::size_t layers,
                            std::size_t width) {
    StabilityReport report;
    report.eps = eps;
    report.measured_distance = measured;
    report.bound = bound;
    report.model = model;
    report.c = c;
    report.delta = delta;
    report.n = n;
    report.layers = layers;
    report.width = width;
    report.looseness_ratio = bound / std::max(measured, 1e-15);
    return report;
}

Interval sweep_interval(const GraphShiftOperator& s, PerturbationModel model, double eps_max) {
    const Interval base = default_interval(s);
    if (model == PerturbationModel::absolute) {
        return Interval{base.lo - eps_max, base.hi + eps_max};
    }
    // Relative models rescale the spectrum by at most (1 + 2 eps).
    const double factor = 1.0 + 2.0 * eps_max;
    return Interval{std::min(base.lo, base.lo * factor), std::max(base.hi, base.hi * factor)};
}

std::vector<SweepRecord> sweep(const GraphShiftOperator& s, PerturbationModel model,
                               const std::vector<double>& eps_list,
                               const std::vector<Architecture>& architectures,
                               const std::vector<Vector>& probe_signals, std::uint64_t seed) {
    if (eps_list.empty()) throw ValidationError("sweep: eps list is empty");
    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        if (eps_list[i] < eps_list[i - 1]) {
            throw ValidationError("sweep: eps list must be ascending");
        }
    }
    if (architectures.empty()) throw ValidationError("sweep: no architectures given");

    const std::size_t n = s.size();
    const Interval interval = sweep_interval(s, model, eps_list.back());

    const BoundModel bound_model = model == PerturbationModel::absolute
                                       ? BoundModel::absolute
                                       : (model == PerturbationModel::relative
                                              ? BoundModel::relative
                                              : BoundModel::relative_structural);

    // Per-architecture constants: the worst (integral) Lipschitz constant
    // across the hidden bank filters, and the layer/width accounting that
    // treats the readout as a final one-tap layer of width 1.
    struct ArchInfo {
        double c = 0.0;
        std::size_t layers = 0;
        std::size_t width = 0;
    };
    std::vector<ArchInfo> infos;
    infos.reserve(architectures.size());
    for (const Architecture& arch : architectures) {
        arch.model.validate();
        ArchInfo info;
        for (const FilterBank& bank : arch.model.layers) {
            info.width = std::max(info.width, bank.f_out());
            for (const FilterTaps& h : bank.all_taps()) {
                const double c = model == PerturbationModel::absolute
                                     ? lipschitz_constant(h, interval)
                                     : integral_lipschitz_constant(h, interval);
                info.c = std::max(info.c, c);
            }
        }
        info.layers = arch.model.layers.size() + 1;
        infos.push_back(info);
    }

    std::vector<SweepRecord> records;
    records.reserve(eps_list.size() * architectures.size());
    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
        const double eps = eps_list[ei];
        const PerturbationSpec spec =
            draw_perturbation(model, n, eps, substream_seed(seed, ei));
        const GraphShiftOperator s_hat = apply_perturbation(s, spec);

        const double eps_measured = eps > 0.0 ? operator_norm(spec.error) : 0.0;
        const double delta =
            eps > 0.0 ? eigenvector_misalignment(s, spec.error).delta : 0.0;

        for (std::size_t ai = 0; ai < architectures.size(); ++ai) {
            const Architecture& arch = architectures[ai];
            const ArchInfo& info = infos[ai];

            double measured_filter = 0.0;
            for (const FilterBank& bank : arch.model.layers) {
                const std::vector<double> dists = bank_filter_distances(bank, s, s_hat);
                for (double d : dists) measured_filter = std::max(measured_filter, d);
            }
            const double measured_gnn = gnn_distance(arch.model, s, s_hat, probe_signals);

            const double delta_const = delta_for_model(bound_model, info.c, delta, n);
            const double filter_bound = delta_const * eps_measured;
            const double network_bound =
                bound_gnn(delta_const, info.layers, info.width, eps_measured);

            SweepRecord record;
            record.eps_nominal = eps;
            record.filter = make_report(eps_measured, measured_filter, filter_bound, model,
                                        info.c, delta, n, 1, 1);
            record.gnn = make_report(eps_measured, measured_gnn, network_bound, model, info.c,
                                     delta, n, info.layers, info.width);
            record.arch = arch.name;
            record.seed = seed;
            records.push_back(std::move(record));
        }
    }
    return records;
}

}  // namespace gnnstab
