#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gnnstab/cli.hpp"
#include "gnnstab/error.hpp"

namespace {

void add_config_support(CLI::App* cmd) {
    // Placeholder so --help documents the flag; the expansion happens before
    // CLI11 sees the argument list.
    cmd->add_option("--config", "flat key=value config file (one option per line)");
}

// Replaces `--config <file>` with the file's `key=value` lines expanded to
// `--key=value` tokens in place. Unknown keys then fail flag parsing, which
// is exactly the strictness a config file should get.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc) {
            path = argv[++i];
        } else if (arg.rfind("--config=", 0) == 0) {
            path = arg.substr(9);
        } else {
            args.push_back(std::move(arg));
            continue;
        }
        std::ifstream in(path);
        if (!in) throw gnnstab::ValidationError("cannot open config file " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (line.find('=') == std::string::npos) {
                throw gnnstab::ValidationError("config file " + path +
                                               ": expected key=value, got '" + line + "'");
            }
            args.push_back("--" + line);
        }
    }
    return args;
}

void add_pipeline_flags(CLI::App* cmd, gnnstab::PipelineOptions& pipeline,
                        const std::string& source_flag) {
    cmd->add_option(source_flag, pipeline.source, "ratings file (u.data format) or 'synthetic'")
        ->capture_default_str();
    cmd->add_option("--target", pipeline.target, "1-based target item id, or 'auto' (most rated)")
        ->capture_default_str();
    cmd->add_option("--k", pipeline.knn, "nearest neighbors kept per item")
        ->capture_default_str();
    cmd->add_option("--train-frac", pipeline.train_frac, "fraction of samples for train+val")
        ->capture_default_str();
    cmd->add_option("--val-frac", pipeline.val_frac, "fraction of train+val used for validation")
        ->capture_default_str();
    cmd->add_option("--users", pipeline.synth.n_users, "synthetic data: user count")
        ->capture_default_str();
    cmd->add_option("--items", pipeline.synth.n_items, "synthetic data: item count")
        ->capture_default_str();
    cmd->add_option("--rank", pipeline.synth.rank, "synthetic data: latent rank")
        ->capture_default_str();
    cmd->add_option("--noise-sd", pipeline.synth.noise_sd, "synthetic data: noise level")
        ->capture_default_str();
    cmd->add_option("--density", pipeline.synth.density, "synthetic data: rating density")
        ->capture_default_str();
}

void add_arch_flags(CLI::App* cmd, gnnstab::ArchitectureOptions& arch) {
    cmd->add_option("--arch", arch.name, "architecture: linear, gnn or gnn-il")
        ->capture_default_str();
    cmd->add_option("--width", arch.width, "hidden feature count")->capture_default_str();
    cmd->add_option("--taps", arch.taps, "filter tap count")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph filter and GNN stability toolkit"};
    app.require_subcommand(1);

    gnnstab::SweepOptions sweep;
    std::string sweep_grid = "1e-3:1:6";
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "perturbation sweep with bounds");
    add_config_support(sweep_cmd);
    add_pipeline_flags(sweep_cmd, sweep.pipeline, "--graph");
    add_arch_flags(sweep_cmd, sweep.arch);
    sweep_cmd->add_option("--model", sweep.model, "perturbation model: absolute, relative, dilation")
        ->capture_default_str();
    sweep_cmd->add_option("--eps-grid", sweep_grid, "log-spaced grid lo:hi:points")
        ->capture_default_str();
    sweep_cmd->add_option("--epochs", sweep.arch.epochs, "training epochs for the architecture")
        ->capture_default_str();
    sweep_cmd->add_option("--rho-il", sweep.arch.rho_il, "penalty weight for the gnn-il arch")
        ->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "run seed")->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "output CSV")->capture_default_str();

    gnnstab::TrainOptions train;
    CLI::App* train_cmd = app.add_subcommand("train", "train an architecture, save the model");
    add_config_support(train_cmd);
    add_pipeline_flags(train_cmd, train.pipeline, "--data");
    add_arch_flags(train_cmd, train.arch);
    train_cmd->add_option("--rho", train.rho, "integral-Lipschitz penalty weight")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train.arch.epochs, "training epochs")->capture_default_str();
    train_cmd->add_option("--lr", train.arch.learning_rate, "ADAM learning rate")
        ->capture_default_str();
    train_cmd->add_option("--seed", train.arch.seed, "run seed")->capture_default_str();
    train_cmd->add_option("--out", train.out, "model output path (loss CSV: <out>.loss.csv)")
        ->capture_default_str();

    gnnstab::EvaluateOptions evaluate;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "report RMSE of a saved model");
    add_config_support(eval_cmd);
    eval_cmd->add_option("--model", evaluate.model_path, "model file")->required();
    add_pipeline_flags(eval_cmd, evaluate.pipeline, "--data");
    eval_cmd->add_option("--graph", evaluate.graph_source,
                         "ratings source for the graph (default: same as --data)");
    eval_cmd->add_option("--split", evaluate.split, "test or val")->capture_default_str();
    eval_cmd->add_option("--seed", evaluate.pipeline.seed, "run seed")->capture_default_str();

    gnnstab::EstimationSweepOptions estimation;
    std::string fractions_text = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    CLI::App* est_cmd =
        app.add_subcommand("estimation-sweep", "graph estimation error vs the 90% reference");
    add_config_support(est_cmd);
    add_pipeline_flags(est_cmd, estimation.pipeline, "--data");
    add_arch_flags(est_cmd, estimation.arch);
    est_cmd->add_option("--fractions", fractions_text, "comma-separated user fractions")
        ->capture_default_str();
    est_cmd->add_option("--epochs", estimation.arch.epochs, "training epochs")
        ->capture_default_str();
    est_cmd->add_option("--seed", estimation.seed, "run seed")->capture_default_str();
    est_cmd->add_option("--out", estimation.out, "output CSV")->capture_default_str();

    gnnstab::DemoOptions demo;
    CLI::App* demo_cmd = app.add_subcommand("demo", "dilation, sharp-filters or spillage demo");
    add_config_support(demo_cmd);
    demo_cmd->add_option("--demo", demo.demo, "dilation, sharp-filters or spillage")
        ->capture_default_str();
    demo_cmd->add_option("--n", demo.n, "demo graph size")->capture_default_str();
    demo_cmd->add_option("--eps", demo.eps, "dilation size")->capture_default_str();
    demo_cmd->add_option("--seed", demo.seed, "run seed")->capture_default_str();
    demo_cmd->add_option("--out", demo.out, "output CSV")->capture_default_str();

    try {
        std::vector<std::string> args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11's vector overload pops from the back
        app.parse(std::move(args));
    } catch (const gnnstab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (sweep_cmd->parsed()) {
            const std::vector<double> grid = gnnstab::parse_eps_grid(sweep_grid);
            sweep.eps_lo = grid.front();
            sweep.eps_hi = grid.back();
            sweep.eps_points = grid.size();
            sweep.arch.seed = sweep.seed;
            sweep.pipeline.seed = sweep.seed;
            gnnstab::run_sweep(sweep);
        } else if (train_cmd->parsed()) {
            train.pipeline.seed = train.arch.seed;
            if (train.arch.name == "gnn-il" && train.rho == 0.0) train.rho = train.arch.rho_il;
            gnnstab::run_train(train);
        } else if (eval_cmd->parsed()) {
            gnnstab::run_evaluate(evaluate);
        } else if (est_cmd->parsed()) {
            estimation.fractions = gnnstab::parse_fraction_list(fractions_text);
            estimation.arch.seed = estimation.seed;
            estimation.pipeline.seed = estimation.seed;
            gnnstab::run_estimation_sweep(estimation);
        } else if (demo_cmd->parsed()) {
            gnnstab::run_demo(demo);
        }
    } catch (const gnnstab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
