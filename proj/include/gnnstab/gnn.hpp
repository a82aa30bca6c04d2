#ifndef GNNSTAB_GNN_HPP_
#define GNNSTAB_GNN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gnnstab/data.hpp"
#include "gnnstab/filter.hpp"
#include "gnnstab/graph.hpp"
#include "gnnstab/linalg.hpp"

namespace gnnstab {

enum class Nonlinearity { relu, identity };

std::string to_string(Nonlinearity nl);
Nonlinearity parse_nonlinearity(const std::string& name);

// Layered graph neural network: each layer applies a filter bank followed by
// the pointwise nonlinearity; a linear readout maps the features at one
// target node to a scalar. The bound calculator accepts any depth; training
// supports a single hidden bank plus readout.
struct GnnModel {
    std::vector<FilterBank> layers;
    Nonlinearity nonlinearity = Nonlinearity::relu;
    Vector readout;  // length = output width of the last layer

    std::size_t input_width() const { return layers.empty() ? 0 : layers.front().f_in(); }
    std::size_t output_width() const { return layers.empty() ? 0 : layers.back().f_out(); }

    // Adjacent layer widths must agree and the readout must match the final
    // width. Throws ValidationError otherwise.
    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::size_t epochs = 40;
    std::size_t batch_size = 5;
    double il_penalty_weight = 0.0;  // rho; 0 disables the penalty
    std::uint64_t seed = 0;

    void validate() const;
};

Vector relu(const Vector& v);
Matrix apply_nonlinearity(Nonlinearity nl, const Matrix& m);

// sigma(apply_bank(bank, S, X)) entrywise.
Matrix layer_forward(const FilterBank& bank, const GraphShiftOperator& s, const Matrix& x,
                     Nonlinearity nl);

// Hidden output Phi(S, x): the N x F_L feature matrix after all layers.
Matrix hidden_output(const GnnModel& model, const GraphShiftOperator& s, const Vector& x);

struct ForwardResult {
    Matrix features;    // Phi(S, x), for stability measurement
    double prediction;  // readout applied to the features at the target node
};

ForwardResult forward(const GnnModel& model, const GraphShiftOperator& s, const Vector& x,
                      std::size_t target_node);

// ||P^T Phi(S, x) - Phi(P^T S P, P^T x)||_F / max(1, ||Phi(S, x)||_F).
// Asserted on the hidden output; the node-anchored readout scalar is
// equivariant only jointly with relabeling the target index.
double equivariance_check(const GnnModel& model, const GraphShiftOperator& s, const Vector& x,
                          const Permutation& p);

// 0.5 r^2 for |r| < 1, |r| - 0.5 otherwise, with r = pred - target.
double smooth_l1(double pred, double target);

// rho * sum over all filters of max_i (lambda_i h'(lambda_i))^2, evaluated
// at the training graph's eigenvalues. Ties in the max take the lowest
// index, which is also the subgradient convention used during training.
double il_penalty(const GnnModel& model, const Vector& eigenvalues, double rho);

// Largest |lambda_i h'(lambda_i)| across all filters of the model at the
// given frequencies (the model's empirical integral-Lipschitz constant).
double max_il_constant(const GnnModel& model, const Vector& eigenvalues);

// Single hidden bank 1 -> f_hidden with `order` taps plus readout, taps and
// readout i.i.d. uniform on [-a, a] with a = 1/sqrt(f_in * K). Deterministic
// per seed.
GnnModel init_model(std::size_t f_hidden, std::size_t order, Nonlinearity nl, std::uint64_t seed);

// Objective value and gradients of mean smooth-L1 over the given samples
// plus the IL penalty. Gradient layout matches the bank's tap grid; exposed
// so the finite-difference tests exercise exactly what training uses.
struct Gradients {
    double loss = 0.0;
    std::vector<Vector> bank_taps;  // per filter [f * f_in + g], length K
    Vector readout;
};

Gradients compute_gradients(const GnnModel& model, const GraphShiftOperator& s,
                            const std::vector<const Vector*>& signals,
                            const std::vector<double>& labels, std::size_t target_node,
                            double rho, const Vector& eigenvalues);

struct TrainResult {
    GnnModel model;
    std::vector<double> epoch_loss;  // mean batch objective per epoch
};

// ADAM with bias correction over seeded shuffled batches of the train split.
// Exact reverse-mode gradients of the readout/nonlinearity/bank/penalty
// composition. Aborts with TrainingError (epoch, batch, parameter norms) on
// a non-finite loss.
TrainResult train(GnnModel model, const GraphShiftOperator& s, const LabeledDataset& data,
                  const TrainConfig& config);

// Root mean squared prediction error over one split of the dataset.
double rmse(const GnnModel& model, const GraphShiftOperator& s, const LabeledDataset& data,
            SplitTag split);

// gft(V, sigma(x)): how a pointwise nonlinearity spreads a signal's spectrum.
Vector spillage_spectrum(Nonlinearity nl, const Matrix& v, const Vector& x);

// Flat text serialization, 17 significant digits, bit-exact round trip.
void save_model(const GnnModel& model, const std::string& path);
GnnModel load_model(const std::string& path);

}  // namespace gnnstab

#endif  // GNNSTAB_GNN_HPP_
