#ifndef GNNSTAB_CLI_HPP_
#define GNNSTAB_CLI_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gnnstab/data.hpp"
#include "gnnstab/gnn.hpp"
#include "gnnstab/graph.hpp"
#include "gnnstab/stability.hpp"

namespace gnnstab {

// Resolved key=value pairs echoed as `# key=value` lines into every output
// file, so any run can be reproduced from its own artifacts.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double v);

void write_csv(const std::string& path, const ConfigEcho& config, const std::string& header,
               const std::vector<std::string>& rows);

struct SyntheticDataConfig {
    std::size_t n_users = 200;
    std::size_t n_items = 100;
    std::size_t rank = 5;
    double noise_sd = 0.5;
    double density = 0.3;
};

// Data/graph preparation shared by the commands: load or generate ratings,
// pick the target item, build the labeled dataset, and build the item graph
// from every user except the held-out test samples.
struct PipelineOptions {
    std::string source = "synthetic";  // ratings path, or "synthetic"
    std::string target = "auto";       // 1-based item id, or "auto" (most rated)
    std::size_t knn = 10;
    double train_frac = 0.9;
    double val_frac = 0.1;
    std::uint64_t seed = 1;
    SyntheticDataConfig synth;
};

struct Pipeline {
    RatingMatrix ratings;
    LabeledDataset dataset;
    GraphShiftOperator graph;
};

Pipeline build_pipeline(const PipelineOptions& options);

// Initializes and trains one of the named architectures on the pipeline's
// training split: `linear` (identity nonlinearity), `gnn` (ReLU), `gnn-il`
// (ReLU with the integral-Lipschitz penalty at weight rho_il).
struct ArchitectureOptions {
    std::string name = "gnn";
    std::size_t width = 64;
    std::size_t taps = 5;
    std::size_t epochs = 40;
    double learning_rate = 0.005;
    double rho_il = 1.0;
    std::uint64_t seed = 1;
};

Architecture make_architecture(const ArchitectureOptions& options, const GraphShiftOperator& s,
                               const LabeledDataset& data);

struct SweepOptions {
    PipelineOptions pipeline;
    ArchitectureOptions arch;
    std::string model = "relative";  // absolute | relative | dilation
    double eps_lo = 1e-3;
    double eps_hi = 1.0;
    std::size_t eps_points = 6;
    std::uint64_t seed = 1;
    std::string out = "sweep.csv";
};

void run_sweep(const SweepOptions& options);

struct TrainOptions {
    PipelineOptions pipeline;
    ArchitectureOptions arch;
    double rho = 0.0;  // overrides arch.rho_il for the trained model
    std::string out = "model.txt";
};

void run_train(const TrainOptions& options);

struct EvaluateOptions {
    std::string model_path;
    PipelineOptions pipeline;
    std::string graph_source;  // ratings source for the graph; empty = same as data
    std::string split = "test";
};

void run_evaluate(const EvaluateOptions& options);

struct EstimationSweepOptions {
    PipelineOptions pipeline;
    ArchitectureOptions arch;
    std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::uint64_t seed = 1;
    std::string out = "estimation.csv";
};

void run_estimation_sweep(const EstimationSweepOptions& options);

struct DemoOptions {
    std::string demo = "dilation";  // dilation | sharp-filters | spillage
    std::size_t n = 24;
    double eps = 0.1;
    std::uint64_t seed = 1;
    std::string out = "demo.csv";
};

void run_demo(const DemoOptions& options);

// log-spaced grid `lo:hi:points`.
std::vector<double> parse_eps_grid(const std::string& text);

std::vector<double> parse_fraction_list(const std::string& text);

}  // namespace gnnstab

#endif  // GNNSTAB_CLI_HPP_
