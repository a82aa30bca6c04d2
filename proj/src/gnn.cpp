#include "gnnstab/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <utility>

#include "gnnstab/error.hpp"
#include "gnnstab/rng.hpp"
#include "gnnstab/spectral.hpp"

namespace gnnstab {

std::string to_string(Nonlinearity nl) {
    return nl == Nonlinearity::relu ? "relu" : "identity";
}

Nonlinearity parse_nonlinearity(const std::string& name) {
    if (name == "relu") return Nonlinearity::relu;
    if (name == "identity") return Nonlinearity::identity;
    throw ValidationError("unknown nonlinearity: " + name);
}

void GnnModel::validate() const {
    if (layers.empty()) throw ValidationError("model must have at least one layer");
    for (std::size_t l = 1; l < layers.size(); ++l) {
        if (layers[l].f_in() != layers[l - 1].f_out()) {
            std::ostringstream msg;
            msg << "layer " << l << " expects " << layers[l].f_in() << " input features, layer "
                << l - 1 << " produces " << layers[l - 1].f_out();
            throw ValidationError(msg.str());
        }
    }
    if (readout.size() != output_width()) {
        std::ostringstream msg;
        msg << "readout length " << readout.size() << " does not match output width "
            << output_width();
        throw ValidationError(msg.str());
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw ValidationError("forgetting factors must lie in (0, 1)");
    }
    if (batch_size == 0) throw ValidationError("batch_size must be positive");
    if (il_penalty_weight < 0.0) throw ValidationError("il_penalty_weight must be nonnegative");
}

Vector relu(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i]);
    return out;
}

Matrix apply_nonlinearity(Nonlinearity nl, const Matrix& m) {
    if (nl == Nonlinearity::identity) return m;
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = std::max(0.0, m(i, j));
    return out;
}

Matrix layer_forward(const FilterBank& bank, const GraphShiftOperator& s, const Matrix& x,
                     Nonlinearity nl) {
    return apply_nonlinearity(nl, apply_bank(bank, s, x));
}

Matrix hidden_output(const GnnModel& model, const GraphShiftOperator& s, const Vector& x) {
    model.validate();
    if (model.input_width() != 1) {
        throw ValidationError("hidden_output: model expects a single input feature");
    }
    Matrix features(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) features(i, 0) = x[i];
    for (const FilterBank& bank : model.layers) {
        features = layer_forward(bank, s, features, model.nonlinearity);
    }
    return features;
}

ForwardResult forward(const GnnModel& model, const GraphShiftOperator& s, const Vector& x,
                      std::size_t target_node) {
    if (target_node >= s.size()) {
        std::ostringstream msg;
        msg << "forward: target node " << target_node << " out of range for " << s.size()
            << " nodes";
        throw ValidationError(msg.str());
    }
    ForwardResult result{hidden_output(model, s, x), 0.0};
    double pred = 0.0;
    for (std::size_t f = 0; f < model.readout.size(); ++f) {
        pred += model.readout[f] * result.features(target_node, f);
    }
    result.prediction = pred;
    return result;
}

double equivariance_check(const GnnModel& model, const GraphShiftOperator& s, const Vector& x,
                          const Permutation& p) {
    const Matrix phi = hidden_output(model, s, x);
    const Matrix phi_hat = hidden_output(model, permute_gso(s, p), permute_signal(x, p));

    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < phi.rows(); ++i) {
        for (std::size_t f = 0; f < phi.cols(); ++f) {
            const double d = phi(p[i], f) - phi_hat(i, f);
            diff += d * d;
            ref += phi(i, f) * phi(i, f);
        }
    }
    return std::sqrt(diff) / std::max(1.0, std::sqrt(ref));
}

double smooth_l1(double pred, double target) {
    const double r = pred - target;
    const double a = std::abs(r);
    return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

namespace {

double smooth_l1_deriv(double r) {
    if (r > 1.0) return 1.0;
    if (r < -1.0) return -1.0;
    return r;
}

double relu_deriv(double z) { return z > 0.0 ? 1.0 : 0.0; }

// Index of the eigenvalue maximizing (lambda h'(lambda))^2, lowest index on
// ties, together with the attained lambda * h'(lambda).
std::pair<std::size_t, double> il_argmax(const FilterTaps& h, const Vector& eigenvalues) {
    std::size_t arg = 0;
    double best = -1.0;
    double best_g = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        const double g = eigenvalues[i] * eval_response_deriv(h, eigenvalues[i]);
        if (g * g > best) {
            best = g * g;
            best_g = g;
            arg = i;
        }
    }
    return {arg, best_g};
}

}  // namespace

double il_penalty(const GnnModel& model, const Vector& eigenvalues, double rho) {
    if (rho == 0.0) return 0.0;
    if (eigenvalues.empty()) throw ValidationError("il_penalty: no eigenvalues supplied");
    double acc = 0.0;
    for (const FilterBank& bank : model.layers) {
        for (const FilterTaps& h : bank.all_taps()) {
            const auto [arg, g] = il_argmax(h, eigenvalues);
            (void)arg;
            acc += g * g;
        }
    }
    return rho * acc;
}

double max_il_constant(const GnnModel& model, const Vector& eigenvalues) {
    double best = 0.0;
    for (const FilterBank& bank : model.layers) {
        for (const FilterTaps& h : bank.all_taps()) {
            for (double lambda : eigenvalues) {
                best = std::max(best, std::abs(lambda * eval_response_deriv(h, lambda)));
            }
        }
    }
    return best;
}

GnnModel init_model(std::size_t f_hidden, std::size_t order, Nonlinearity nl,
                    std::uint64_t seed) {
    if (f_hidden == 0 || order == 0) {
        throw ValidationError("init_model: hidden width and tap count must be positive");
    }
    Rng rng(seed);
    GnnModel model;
    model.nonlinearity = nl;

    FilterBank bank(1, f_hidden, order);
    const double a_taps = 1.0 / std::sqrt(static_cast<double>(order));  // f_in = 1
    for (std::size_t f = 0; f < f_hidden; ++f) {
        for (std::size_t k = 0; k < order; ++k) {
            bank.taps(f, 0).taps[k] = rng.uniform(-a_taps, a_taps);
        }
    }
    model.layers.push_back(std::move(bank));

    const double a_readout = 1.0 / std::sqrt(static_cast<double>(f_hidden));  // one tap
    model.readout.resize(f_hidden);
    for (std::size_t f = 0; f < f_hidden; ++f) model.readout[f] = rng.uniform(-a_readout, a_readout);
    model.validate();
    return model;
}

Gradients compute_gradients(const GnnModel& model, const GraphShiftOperator& s,
                            const std::vector<const Vector*>& signals,
                            const std::vector<double>& labels, std::size_t target_node,
                            double rho, const Vector& eigenvalues) {
    model.validate();
    if (model.layers.size() != 1 || model.input_width() != 1) {
        throw ValidationError(
            "compute_gradients: training supports a single hidden bank with one input feature");
    }
    if (signals.empty() || signals.size() != labels.size()) {
        throw ValidationError("compute_gradients: empty or mismatched sample set");
    }
    if (target_node >= s.size()) {
        throw ValidationError("compute_gradients: target node out of range");
    }

    const FilterBank& bank = model.layers[0];
    const std::size_t width = bank.f_out();
    const std::size_t order = bank.order();
    const double inv_n = 1.0 / static_cast<double>(signals.size());

    Gradients grads;
    grads.bank_taps.assign(width, Vector(order, 0.0));
    grads.readout.assign(width, 0.0);

    Vector shifted;
    Vector shifts_at_target(order);
    for (std::size_t sample = 0; sample < signals.size(); ++sample) {
        const Vector& x = *signals[sample];
        if (x.size() != s.size()) {
            throw ValidationError("compute_gradients: signal length does not match the graph");
        }

        // Only the target node's value of each shifted signal reaches the
        // loss, but the shifts themselves need full matvecs.
        shifted = x;
        shifts_at_target[0] = x[target_node];
        for (std::size_t k = 1; k < order; ++k) {
            shifted = matvec(s.matrix(), shifted);
            shifts_at_target[k] = shifted[target_node];
        }

        double pred = 0.0;
        Vector pre(width);
        for (std::size_t f = 0; f < width; ++f) {
            const Vector& taps = bank.taps(f, 0).taps;
            double z = 0.0;
            for (std::size_t k = 0; k < order; ++k) z += taps[k] * shifts_at_target[k];
            pre[f] = z;
            const double act =
                model.nonlinearity == Nonlinearity::relu ? std::max(0.0, z) : z;
            pred += model.readout[f] * act;
        }

        const double r = pred - labels[sample];
        grads.loss += smooth_l1(pred, labels[sample]) * inv_n;
        const double g = smooth_l1_deriv(r) * inv_n;
        for (std::size_t f = 0; f < width; ++f) {
            const double act =
                model.nonlinearity == Nonlinearity::relu ? std::max(0.0, pre[f]) : pre[f];
            grads.readout[f] += g * act;
            const double sigma_prime =
                model.nonlinearity == Nonlinearity::relu ? relu_deriv(pre[f]) : 1.0;
            const double coef = g * model.readout[f] * sigma_prime;
            if (coef == 0.0) continue;
            for (std::size_t k = 0; k < order; ++k) {
                grads.bank_taps[f][k] += coef * shifts_at_target[k];
            }
        }
    }

    if (rho > 0.0) {
        if (eigenvalues.empty()) {
            throw ValidationError("compute_gradients: penalty requested without eigenvalues");
        }
        for (std::size_t f = 0; f < width; ++f) {
            const auto [arg, g] = il_argmax(bank.taps(f, 0), eigenvalues);
            grads.loss += rho * g * g;
            const double lambda = eigenvalues[arg];
            double lambda_pow = lambda;  // lambda^k
            for (std::size_t k = 1; k < order; ++k) {
                grads.bank_taps[f][k] += rho * 2.0 * g * static_cast<double>(k) * lambda_pow;
                lambda_pow *= lambda;
            }
        }
    }
    return grads;
}

TrainResult train(GnnModel model, const GraphShiftOperator& s, const LabeledDataset& data,
                  const TrainConfig& config) {
    model.validate();
    config.validate();
    if (model.layers.size() != 1 || model.input_width() != 1) {
        throw ValidationError("train: architecture must be a single hidden bank plus readout");
    }
    const std::vector<std::size_t> train_idx = data.indices_of(SplitTag::train);
    if (train_idx.empty()) throw ValidationError("train: dataset has no training samples");
    if (data.target_item >= s.size()) {
        throw ValidationError("train: dataset target item out of range for the graph");
    }

    const Vector eigenvalues =
        config.il_penalty_weight > 0.0 ? s.eig().values : Vector{};

    FilterBank& bank = model.layers[0];
    const std::size_t width = bank.f_out();
    const std::size_t order = bank.order();
    const std::size_t n_params = width * order + width;

    Vector adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    std::uint64_t step = 0;

    TrainResult result;
    Rng shuffle_rng(config.seed);
    std::vector<std::size_t> epoch_order = train_idx;
    std::vector<const Vector*> batch_signals;
    std::vector<double> batch_labels;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(epoch_order);

        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < epoch_order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, epoch_order.size());
            batch_signals.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch_signals.push_back(&data.signals[epoch_order[i]]);
                batch_labels.push_back(data.labels[epoch_order[i]]);
            }

            const Gradients grads =
                compute_gradients(model, s, batch_signals, batch_labels, data.target_item,
                                  config.il_penalty_weight, eigenvalues);
            if (!std::isfinite(grads.loss)) {
                double tap_norm = 0.0;
                for (std::size_t f = 0; f < width; ++f)
                    for (double t : bank.taps(f, 0).taps) tap_norm += t * t;
                std::ostringstream msg;
                msg << "train: non-finite loss at epoch " << epoch << ", batch " << n_batches
                    << " (tap norm " << std::sqrt(tap_norm) << ", readout norm "
                    << norm(model.readout) << ")";
                throw TrainingError(msg.str());
            }
            loss_sum += grads.loss;
            ++n_batches;

            ++step;
            const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            std::size_t p = 0;
            auto adam_update = [&](double& param, double grad) {
                adam_m[p] = config.beta1 * adam_m[p] + (1.0 - config.beta1) * grad;
                adam_v[p] = config.beta2 * adam_v[p] + (1.0 - config.beta2) * grad * grad;
                const double m_hat = adam_m[p] / bias1;
                const double v_hat = adam_v[p] / bias2;
                param -= config.learning_rate * m_hat / (std::sqrt(v_hat) + 1e-8);
                ++p;
            };
            for (std::size_t f = 0; f < width; ++f) {
                Vector& taps = bank.taps(f, 0).taps;
                for (std::size_t k = 0; k < order; ++k) adam_update(taps[k], grads.bank_taps[f][k]);
            }
            for (std::size_t f = 0; f < width; ++f) adam_update(model.readout[f], grads.readout[f]);
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(n_batches));
    }

    result.model = std::move(model);
    return result;
}

double rmse(const GnnModel& model, const GraphShiftOperator& s, const LabeledDataset& data,
            SplitTag split) {
    const std::vector<std::size_t> idx = data.indices_of(split);
    if (idx.empty()) throw ValidationError("rmse: split has no samples");
    double acc = 0.0;
    for (std::size_t i : idx) {
        const double pred = forward(model, s, data.signals[i], data.target_item).prediction;
        const double err = pred - data.labels[i];
        acc += err * err;
    }
    return std::sqrt(acc / static_cast<double>(idx.size()));
}

Vector spillage_spectrum(Nonlinearity nl, const Matrix& v, const Vector& x) {
    const Vector transformed = nl == Nonlinearity::relu ? relu(x) : x;
    return gft(v, transformed);
}

void save_model(const GnnModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path);
    if (!out) throw ValidationError("save_model: cannot open " + path);
    out << std::setprecision(17);
    out << "gnnstab-model 1\n";
    out << "nonlinearity " << to_string(model.nonlinearity) << "\n";
    out << "layers " << model.layers.size() << "\n";
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const FilterBank& bank = model.layers[l];
        out << "layer " << l << " f_in " << bank.f_in() << " f_out " << bank.f_out() << " taps "
            << bank.order() << "\n";
        for (std::size_t f = 0; f < bank.f_out(); ++f) {
            for (std::size_t g = 0; g < bank.f_in(); ++g) {
                out << "filter " << f << " " << g;
                for (double t : bank.taps(f, g).taps) out << " " << t;
                out << "\n";
            }
        }
    }
    out << "readout";
    for (double w : model.readout) out << " " << w;
    out << "\n";
    if (!out) throw ValidationError("save_model: write failed for " + path);
}

GnnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_model: cannot open " + path);

    auto fail = [&path](const std::string& why) -> ValidationError {
        return ValidationError("load_model: " + path + ": " + why);
    };

    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "gnnstab-model" || version != 1) {
        throw fail("bad header");
    }
    GnnModel model;
    std::string nl_name;
    if (!(in >> word >> nl_name) || word != "nonlinearity") throw fail("missing nonlinearity");
    model.nonlinearity = parse_nonlinearity(nl_name);

    std::size_t n_layers = 0;
    if (!(in >> word >> n_layers) || word != "layers" || n_layers == 0) throw fail("bad layers");

    for (std::size_t l = 0; l < n_layers; ++l) {
        std::size_t idx = 0, f_in = 0, f_out = 0, order = 0;
        std::string kw_f_in, kw_f_out, kw_taps;
        if (!(in >> word >> idx >> kw_f_in >> f_in >> kw_f_out >> f_out >> kw_taps >> order) ||
            word != "layer" || idx != l || kw_f_in != "f_in" || kw_f_out != "f_out" ||
            kw_taps != "taps") {
            throw fail("bad layer header");
        }
        FilterBank bank(f_in, f_out, order);
        for (std::size_t f = 0; f < f_out; ++f) {
            for (std::size_t g = 0; g < f_in; ++g) {
                std::size_t rf = 0, rg = 0;
                if (!(in >> word >> rf >> rg) || word != "filter" || rf != f || rg != g) {
                    throw fail("bad filter line");
                }
                for (std::size_t k = 0; k < order; ++k) {
                    if (!(in >> bank.taps(f, g).taps[k])) throw fail("bad tap value");
                }
                bank.taps(f, g) = validated_taps(std::move(bank.taps(f, g).taps));
            }
        }
        model.layers.push_back(std::move(bank));
    }
    if (!(in >> word) || word != "readout") throw fail("missing readout");
    model.readout.resize(model.output_width());
    for (double& w : model.readout) {
        if (!(in >> w)) throw fail("bad readout value");
    }
    model.validate();
    return model;
}

}  // namespace gnnstab
