#ifndef GNNSTAB_STABILITY_HPP_
#define GNNSTAB_STABILITY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gnnstab/filter.hpp"
#include "gnnstab/gnn.hpp"
#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"
#include "gnnstab/perturbation.hpp"
#include "gnnstab/spectral.hpp"

namespace gnnstab {

// How the node correspondence between S and S_hat is chosen when measuring
// operator distances. `identity` is exact for constructed perturbations,
// which never relabel nodes. `eigen_greedy` matches nodes by the magnitude
// ranking of the leading eigenvectors; it is a heuristic upper bound on the
// true minimum over permutations, never below it.
enum class Matching { identity, eigen_greedy };

// ||H(S) - P^T H(S_hat) P|| for the matching rule above.
double filter_distance(const FilterTaps& h, const GraphShiftOperator& s,
                       const GraphShiftOperator& s_hat, Matching matching = Matching::identity);

// Distances of every filter in a bank at once, sharing the shift-power
// computation across filters. Identity matching.
std::vector<double> bank_filter_distances(const FilterBank& bank, const GraphShiftOperator& s,
                                          const GraphShiftOperator& s_hat);

// max over signals of ||Phi(S, x) - Phi(S_hat, x)||_F / ||x||, identity
// node correspondence. An empirical lower bound on the operator-distance
// supremum (it probes finitely many signals).
double gnn_distance(const GnnModel& model, const GraphShiftOperator& s,
                    const GraphShiftOperator& s_hat, const std::vector<Vector>& signals);

// First-order stability bounds. The O(eps^2) remainder is deliberately not
// folded in; first_order_residual verifies its scaling separately.
double bound_absolute(double c, double delta, std::size_t n, double eps);
double bound_relative(double c, double delta, std::size_t n, double eps);
double bound_structural(double c, double eps);

// Delta * L * F^(L-1) * eps for an architecture with L layers and F features
// per hidden layer.
double bound_gnn(double delta_const, std::size_t layers, std::size_t width, double eps);

enum class BoundModel { absolute, relative, relative_structural };

// The per-filter stability constant Delta: C (1 + delta sqrt(N)) under the
// absolute model, 2 C (1 + delta sqrt(N)) under the relative model, 2 C
// under the structurally constrained relative model.
double delta_for_model(BoundModel model, double c, double delta, std::size_t n);

// ||H(S_hat) - H(S) - T1(E)|| where T1 is the analytic first-order term of
// the expansion of H around S (one-sided products for the absolute model,
// the two-sided sum for the relative model; dilation is relative with
// E = (eps/2) I). Scales quadratically in ||E||.
double first_order_residual(const FilterTaps& h, const GraphShiftOperator& s, const Matrix& e,
                            PerturbationModel model);

// One measured-versus-bound comparison.
struct StabilityReport {
    double eps = 0.0;  // operator norm of the drawn E (recomputed, not nominal)
    double measured_distance = 0.0;
    double bound = 0.0;
    PerturbationModel model = PerturbationModel::relative;
    double c = 0.0;
    double delta = 0.0;
    std::size_t n = 0;
    std::size_t layers = 0;
    std::size_t width = 0;
    double looseness_ratio = 0.0;  // bound / max(measured, 1e-15)
};

StabilityReport make_report(double eps, double measured, double bound, PerturbationModel model,
                            double c, double delta, std::size_t n, std::size_t layers,
                            std::size_t width);

struct Architecture {
    std::string name;
    GnnModel model;
};

// One sweep row: filter-level and network-level reports for one drawn
// perturbation applied to one architecture.
struct SweepRecord {
    double eps_nominal = 0.0;
    StabilityReport filter;
    StabilityReport gnn;
    std::string arch;
    std::uint64_t seed = 0;
};

// Interval covering the spectra of S and of every perturbation drawn at
// sizes up to eps_max, so that constants estimated on it are valid at all
// instantiated frequencies of the sweep.
Interval sweep_interval(const GraphShiftOperator& s, PerturbationModel model, double eps_max);

// Per eps: draw E for the model (dense symmetric for absolute, the diagonal
// interval recipe for relative, (eps/2) I for dilation), build S_hat without
// recomputing any graph structure, measure filter and network distances
// against the probe signals, and attach the first-order bounds with delta
// recomputed from the drawn E. Deterministic per seed; rows depend only on
// the inputs and seed, not on evaluation order.
std::vector<SweepRecord> sweep(const GraphShiftOperator& s, PerturbationModel model,
                               const std::vector<double>& eps_list,
                               const std::vector<Architecture>& architectures,
                               const std::vector<Vector>& probe_signals, std::uint64_t seed);

}  // namespace gnnstab

#endif  // GNNSTAB_STABILITY_HPP_
