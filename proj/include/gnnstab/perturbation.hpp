#ifndef GNNSTAB_PERTURBATION_HPP_
#define GNNSTAB_PERTURBATION_HPP_

#include <cstdint>
#include <string>
#include <utility>

#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"

namespace gnnstab {

enum class PerturbationModel { absolute, relative, dilation };

std::string to_string(PerturbationModel model);
PerturbationModel parse_perturbation_model(const std::string& name);

// One drawn perturbation. `error` is the symmetric error matrix E (for the
// dilation model, E = (eps/2) I). `nominal_eps` is the requested size; the
// actual operator norm of E is always recomputed where it matters.
struct PerturbationSpec {
    PerturbationModel model;
    Matrix error;
    double nominal_eps = 0.0;
};

// delta = (||U - V|| + 1)^2 - 1 for the aligned eigenbases of E and S.
// Always within [0, 8].
struct MisalignmentReport {
    double delta = 0.0;
    double u_minus_v_norm = 0.0;
};

// Seeded draw of one perturbation of nominal size eps: dense symmetric for
// the absolute model, the diagonal interval recipe for the relative model,
// (eps/2) I for a dilation. eps = 0 draws the zero perturbation.
PerturbationSpec draw_perturbation(PerturbationModel model, std::size_t n, double eps,
                                   std::uint64_t seed);

// Builds S_hat from a drawn perturbation: S + E, S + (ES + SE), or the exact
// dilation respectively.
GraphShiftOperator apply_perturbation(const GraphShiftOperator& s, const PerturbationSpec& spec);

// S_hat = S + E.
GraphShiftOperator absolute_perturb(const GraphShiftOperator& s, const Matrix& e);

// S_hat = S + (E S + S E).
GraphShiftOperator relative_perturb(const GraphShiftOperator& s, const Matrix& e);

// S_hat = (1 + eps) S. Equals relative_perturb(S, (eps/2) I) exactly; the
// result shares S's eigenvectors with eigenvalues scaled by (1 + eps).
GraphShiftOperator dilate(const GraphShiftOperator& s, double eps);

// Diagonal error with entries i.i.d. uniform on [(1 - eps) eps, eps] for
// eps in (0, 1]. By construction ||E|| <= eps and E is within relative
// spread eps of a scaled identity.
Matrix random_diagonal_error(std::size_t n, double eps, std::uint64_t seed);

// Dense symmetric error with operator norm exactly eps (Gaussian entries,
// rescaled). Used to draw absolute and unstructured relative perturbations.
Matrix random_symmetric_error(std::size_t n, double eps, std::uint64_t seed);

// min(||E/||E|| - I||, ||E/||E|| + I||): how far E is from a scaled
// identity. Scale-invariant; zero exactly for E = c I.
double structural_gap(const Matrix& e);

// Aligned eigendecomposition of E against the reference basis V: columns
// ordered by E's ascending eigenvalues, each column's sign chosen to
// minimize ||u_i - v_i||. When E is a scalar multiple of the identity the
// eigenbasis is free and U := V is returned, which makes dilations report
// delta = 0. Returns (U, eigenvalues of E in the aligned order).
std::pair<Matrix, Vector> aligned_error_eigensystem(const Matrix& e, const Matrix& v);

MisalignmentReport eigenvector_misalignment(const GraphShiftOperator& s, const Matrix& e);

// E = E_V + E_U with E_V = V M V^T (M = eigenvalues of E, aligned order).
// Checks the guarantee ||E_U|| <= ||E|| * delta up to floating-point slack
// before returning.
std::pair<Matrix, Matrix> lemma1_decompose(const Matrix& e, const Matrix& v);

}  // namespace gnnstab

#endif  // GNNSTAB_PERTURBATION_HPP_
