#include "gnnstab/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "gnnstab/error.hpp"
#include "gnnstab/rng.hpp"

namespace gnnstab {

std::string to_string(PerturbationModel model) {
    switch (model) {
        case PerturbationModel::absolute: return "absolute";
        case PerturbationModel::relative: return "relative";
        case PerturbationModel::dilation: return "dilation";
    }
    return "unknown";
}

PerturbationModel parse_perturbation_model(const std::string& name) {
    if (name == "absolute") return PerturbationModel::absolute;
    if (name == "relative") return PerturbationModel::relative;
    if (name == "dilation") return PerturbationModel::dilation;
    throw ValidationError("unknown perturbation model: " + name);
}

namespace {

void check_error_matrix(const GraphShiftOperator& s, const Matrix& e, const char* op) {
    if (e.rows() != s.size() || e.cols() != s.size()) {
        std::ostringstream msg;
        msg << op << ": error matrix is " << e.rows() << "x" << e.cols() << ", graph has "
            << s.size() << " nodes";
        throw ValidationError(msg.str());
    }
    const double tol = 1e-12 * std::max(1.0, max_abs(e));
    for (std::size_t i = 0; i < e.rows(); ++i) {
        for (std::size_t j = i + 1; j < e.cols(); ++j) {
            if (std::abs(e(i, j) - e(j, i)) > tol) {
                std::ostringstream msg;
                msg << op << ": error matrix asymmetric at (" << i << ", " << j << ")";
                throw ValidationError(msg.str());
            }
        }
    }
}

// True when E is a scalar multiple of the identity up to roundoff.
bool is_scaled_identity(const Matrix& e) {
    const std::size_t n = e.rows();
    if (n == 0) return true;
    const double scale = std::max(1e-300, max_abs(e));
    const double tol = 1e-12 * scale;
    const double d = e(0, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double expected = (i == j) ? d : 0.0;
            if (std::abs(e(i, j) - expected) > tol) return false;
        }
    }
    return true;
}

}  // namespace

PerturbationSpec draw_perturbation(PerturbationModel model, std::size_t n, double eps,
                                   std::uint64_t seed) {
    if (!(eps >= 0.0)) throw ValidationError("draw_perturbation: eps must be nonnegative");
    PerturbationSpec spec;
    spec.model = model;
    spec.nominal_eps = eps;
    if (eps == 0.0) {
        spec.error = Matrix(n, n);
        return spec;
    }
    switch (model) {
        case PerturbationModel::absolute:
            spec.error = random_symmetric_error(n, eps, seed);
            break;
        case PerturbationModel::relative:
            spec.error = random_diagonal_error(n, eps, seed);
            break;
        case PerturbationModel::dilation:
            spec.error = scale(Matrix::identity(n), eps / 2.0);
            break;
    }
    return spec;
}

GraphShiftOperator apply_perturbation(const GraphShiftOperator& s, const PerturbationSpec& spec) {
    switch (spec.model) {
        case PerturbationModel::absolute:
            return absolute_perturb(s, spec.error);
        case PerturbationModel::relative:
            return relative_perturb(s, spec.error);
        case PerturbationModel::dilation:
            return dilate(s, spec.nominal_eps);
    }
    throw ValidationError("apply_perturbation: unknown model");
}

GraphShiftOperator absolute_perturb(const GraphShiftOperator& s, const Matrix& e) {
    check_error_matrix(s, e, "absolute_perturb");
    return GraphShiftOperator(add(s.matrix(), e), s.kind());
}

GraphShiftOperator relative_perturb(const GraphShiftOperator& s, const Matrix& e) {
    check_error_matrix(s, e, "relative_perturb");
    const Matrix es = matmul(e, s.matrix());
    const Matrix se = matmul(s.matrix(), e);
    return GraphShiftOperator(add(s.matrix(), add(es, se)), s.kind());
}

GraphShiftOperator dilate(const GraphShiftOperator& s, double eps) {
    if (eps <= -1.0) {
        std::ostringstream msg;
        msg << "dilate: eps must be greater than -1, got " << eps;
        throw ValidationError(msg.str());
    }
    const EigenSystem& eig = s.eig();
    EigenSystem scaled;
    scaled.values.resize(eig.values.size());
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
        scaled.values[i] = (1.0 + eps) * eig.values[i];
    }
    scaled.vectors = eig.vectors;
    return GraphShiftOperator(scale(s.matrix(), 1.0 + eps), s.kind(), std::move(scaled));
}

Matrix random_diagonal_error(std::size_t n, double eps, std::uint64_t seed) {
    if (!(eps > 0.0) || eps > 1.0) {
        std::ostringstream msg;
        msg << "random_diagonal_error: eps must be in (0, 1], got " << eps;
        throw ValidationError(msg.str());
    }
    Rng rng(seed);
    Matrix e(n, n);
    for (std::size_t i = 0; i < n; ++i) e(i, i) = rng.uniform((1.0 - eps) * eps, eps);
    return e;
}

Matrix random_symmetric_error(std::size_t n, double eps, std::uint64_t seed) {
    if (!(eps >= 0.0)) throw ValidationError("random_symmetric_error: eps must be nonnegative");
    Rng rng(seed);
    Matrix e(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = rng.normal();
            e(i, j) = v;
            e(j, i) = v;
        }
    }
    if (eps == 0.0) return Matrix(n, n);
    const double nrm = operator_norm(e);
    if (nrm == 0.0) return e;
    return scale(e, eps / nrm);
}

double structural_gap(const Matrix& e) {
    if (e.rows() != e.cols()) throw ValidationError("structural_gap: matrix must be square");
    const double nrm = operator_norm(e);
    if (nrm == 0.0) throw ValidationError("structural_gap: error matrix is zero");
    const Matrix normalized = scale(e, 1.0 / nrm);
    const Matrix eye = Matrix::identity(e.rows());
    return std::min(operator_norm(subtract(normalized, eye)),
                    operator_norm(add(normalized, eye)));
}

std::pair<Matrix, Vector> aligned_error_eigensystem(const Matrix& e, const Matrix& v) {
    if (e.rows() != v.rows() || e.cols() != v.cols()) {
        throw ValidationError("aligned_error_eigensystem: shape mismatch between E and V");
    }
    const std::size_t n = e.rows();

    if (is_scaled_identity(e)) {
        // Free eigenbasis: pick V itself. Eigenvalues are the common
        // diagonal value.
        Vector m(n, n > 0 ? e(0, 0) : 0.0);
        return {v, std::move(m)};
    }

    EigenSystem sys = sym_eig(e);  // ascending order
    Matrix u = std::move(sys.vectors);
    for (std::size_t col = 0; col < n; ++col) {
        double d = 0.0;
        for (std::size_t row = 0; row < n; ++row) d += u(row, col) * v(row, col);
        if (d < 0.0) {
            for (std::size_t row = 0; row < n; ++row) u(row, col) = -u(row, col);
        }
    }
    return {std::move(u), std::move(sys.values)};
}

MisalignmentReport eigenvector_misalignment(const GraphShiftOperator& s, const Matrix& e) {
    check_error_matrix(s, e, "eigenvector_misalignment");
    const Matrix& v = s.eig().vectors;
    const auto [u, m] = aligned_error_eigensystem(e, v);

    double nrm = operator_norm(subtract(u, v));
    // ||U - V|| <= ||U|| + ||V|| = 2 for orthonormal bases; trim roundoff so
    // delta stays within [0, 8].
    nrm = std::min(nrm, 2.0);
    MisalignmentReport report;
    report.u_minus_v_norm = nrm;
    report.delta = (nrm + 1.0) * (nrm + 1.0) - 1.0;
    return report;
}

std::pair<Matrix, Matrix> lemma1_decompose(const Matrix& e, const Matrix& v) {
    const auto [u, m] = aligned_error_eigensystem(e, v);
    const std::size_t n = e.rows();

    // E_V = V M V^T with M in the aligned (ascending) order.
    Matrix vm(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) vm(i, j) = v(i, j) * m[j];
    const Matrix e_v = matmul(vm, transpose(v));
    const Matrix e_u = subtract(e, e_v);

    double nrm = operator_norm(subtract(u, v));
    nrm = std::min(nrm, 2.0);
    const double delta = (nrm + 1.0) * (nrm + 1.0) - 1.0;
    const double e_norm = operator_norm(e);
    // The 1e-9 * ||E|| floor absorbs roundoff when delta is (near) zero.
    const double allowed = e_norm * (delta * (1.0 + 1e-9) + 1e-9);
    const double e_u_norm = operator_norm(e_u);
    if (e_u_norm > allowed) {
        std::ostringstream msg;
        msg << "lemma1_decompose: ||E_U|| = " << e_u_norm << " exceeds ||E|| * delta = "
            << e_norm * delta;
        throw ConvergenceError(msg.str(), e_u_norm);
    }
    return {e_v, e_u};
}

}  // namespace gnnstab
