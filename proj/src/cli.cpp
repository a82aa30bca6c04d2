#include "gnnstab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gnnstab/error.hpp"
#include "gnnstab/perturbation.hpp"
#include "gnnstab/rng.hpp"
#include "gnnstab/spectral.hpp"

namespace gnnstab {

namespace {

constexpr std::uint64_t kUserShuffleStream = 7;
constexpr std::uint64_t kArchInitStream = 101;
constexpr std::uint64_t kTrainStream = 102;

std::string format_size(std::size_t v) { return std::to_string(v); }

void append_pipeline_config(ConfigEcho& echo, const PipelineOptions& p) {
    echo.emplace_back("data", p.source);
    echo.emplace_back("target", p.target);
    echo.emplace_back("knn", format_size(p.knn));
    echo.emplace_back("train_frac", format_double(p.train_frac));
    echo.emplace_back("val_frac", format_double(p.val_frac));
    echo.emplace_back("pipeline_seed", std::to_string(p.seed));
    echo.emplace_back("synthetic_users", format_size(p.synth.n_users));
    echo.emplace_back("synthetic_items", format_size(p.synth.n_items));
    echo.emplace_back("synthetic_rank", format_size(p.synth.rank));
    echo.emplace_back("synthetic_noise_sd", format_double(p.synth.noise_sd));
    echo.emplace_back("synthetic_density", format_double(p.synth.density));
}

void append_arch_config(ConfigEcho& echo, const ArchitectureOptions& a) {
    echo.emplace_back("arch", a.name);
    echo.emplace_back("width", format_size(a.width));
    echo.emplace_back("taps", format_size(a.taps));
    echo.emplace_back("epochs", format_size(a.epochs));
    echo.emplace_back("learning_rate", format_double(a.learning_rate));
    echo.emplace_back("rho_il", format_double(a.rho_il));
    echo.emplace_back("arch_seed", std::to_string(a.seed));
}

}  // namespace

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(12) << v;
    return out.str();
}

void write_csv(const std::string& path, const ConfigEcho& config, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file " + path);
    for (const auto& [key, value] : config) out << "# " << key << "=" << value << "\n";
    out << header << "\n";
    for (const std::string& row : rows) out << row << "\n";
    if (!out) throw ValidationError("write failed for " + path);
}

Pipeline build_pipeline(const PipelineOptions& options) {
    Pipeline pipe;
    if (options.source == "synthetic") {
        pipe.ratings = synthetic_ratings(options.synth.n_users, options.synth.n_items,
                                         options.synth.rank, options.synth.noise_sd,
                                         options.synth.density, options.seed);
    } else {
        pipe.ratings = parse_movielens(options.source);
    }

    std::size_t target = 0;
    if (options.target == "auto") {
        target = most_rated_item(pipe.ratings);
    } else {
        long long id = 0;
        try {
            id = std::stoll(options.target);
        } catch (const std::exception&) {
            throw ValidationError("target must be 'auto' or a 1-based item id, got '" +
                                  options.target + "'");
        }
        if (id < 1 || static_cast<std::size_t>(id) > pipe.ratings.n_items) {
            throw ValidationError("target item id out of range: " + options.target);
        }
        target = static_cast<std::size_t>(id - 1);
    }

    pipe.dataset = make_labeled_dataset(pipe.ratings, target, options.train_frac,
                                        options.val_frac, options.seed);

    // Graph support comes from everything except the held-out test users, so
    // their ratings never shape the similarity structure they are evaluated
    // on.
    std::vector<bool> is_test_user(pipe.ratings.n_users, false);
    for (std::size_t i = 0; i < pipe.dataset.splits.size(); ++i) {
        if (pipe.dataset.splits[i] == SplitTag::test) {
            is_test_user[pipe.dataset.user_ids[i]] = true;
        }
    }
    std::vector<std::size_t> graph_users;
    for (std::size_t u = 0; u < pipe.ratings.n_users; ++u) {
        if (!is_test_user[u]) graph_users.push_back(u);
    }
    pipe.graph = graph_from_split(pipe.ratings, graph_users, options.knn);
    return pipe;
}

Architecture make_architecture(const ArchitectureOptions& options, const GraphShiftOperator& s,
                               const LabeledDataset& data) {
    Nonlinearity nl;
    double rho = 0.0;
    if (options.name == "linear") {
        nl = Nonlinearity::identity;
    } else if (options.name == "gnn") {
        nl = Nonlinearity::relu;
    } else if (options.name == "gnn-il") {
        nl = Nonlinearity::relu;
        rho = options.rho_il;
    } else {
        throw ValidationError("unknown architecture '" + options.name +
                              "' (expected linear, gnn or gnn-il)");
    }

    GnnModel model =
        init_model(options.width, options.taps, nl, substream_seed(options.seed, kArchInitStream));
    TrainConfig config;
    config.learning_rate = options.learning_rate;
    config.epochs = options.epochs;
    config.il_penalty_weight = rho;
    config.seed = substream_seed(options.seed, kTrainStream);

    if (config.epochs > 0) {
        model = train(std::move(model), s, data, config).model;
    }
    return Architecture{options.name, std::move(model)};
}

std::vector<double> parse_eps_grid(const std::string& text) {
    double lo = 0.0, hi = 0.0;
    long long points = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> points) || c1 != ':' || c2 != ':' || !in.eof()) {
        throw ValidationError("eps grid must be lo:hi:points, got '" + text + "'");
    }
    if (!(lo > 0.0) || hi < lo || points < 1) {
        throw ValidationError("eps grid needs 0 < lo <= hi and points >= 1");
    }
    std::vector<double> grid;
    if (points == 1) {
        grid.push_back(lo);
        return grid;
    }
    const double ratio = std::log(hi / lo);
    for (long long i = 0; i < points; ++i) {
        grid.push_back(lo * std::exp(ratio * static_cast<double>(i) /
                                     static_cast<double>(points - 1)));
    }
    return grid;
}

std::vector<double> parse_fraction_list(const std::string& text) {
    std::vector<double> fractions;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            fractions.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ValidationError("bad fraction '" + token + "'");
        }
        if (!(fractions.back() > 0.0) || fractions.back() > 1.0) {
            throw ValidationError("fractions must lie in (0, 1]");
        }
    }
    if (fractions.empty()) throw ValidationError("fraction list is empty");
    return fractions;
}

void run_sweep(const SweepOptions& options) {
    const std::vector<double> eps_list = [&] {
        std::ostringstream grid;
        grid << format_double(options.eps_lo) << ":" << format_double(options.eps_hi) << ":"
             << options.eps_points;
        return parse_eps_grid(grid.str());
    }();

    Pipeline pipe = build_pipeline(options.pipeline);
    const Architecture arch = make_architecture(options.arch, pipe.graph, pipe.dataset);

    std::vector<Vector> probes;
    for (std::size_t i : pipe.dataset.indices_of(SplitTag::test)) {
        probes.push_back(pipe.dataset.signals[i]);
    }
    if (probes.empty()) throw ValidationError("sweep: no test signals to probe with");

    const PerturbationModel model = parse_perturbation_model(options.model);
    const std::vector<SweepRecord> records =
        sweep(pipe.graph, model, eps_list, {arch}, probes, options.seed);

    ConfigEcho echo;
    echo.emplace_back("command", "sweep");
    echo.emplace_back("model", options.model);
    echo.emplace_back("eps_lo", format_double(options.eps_lo));
    echo.emplace_back("eps_hi", format_double(options.eps_hi));
    echo.emplace_back("eps_points", format_size(options.eps_points));
    echo.emplace_back("seed", std::to_string(options.seed));
    echo.emplace_back("out", options.out);
    append_arch_config(echo, options.arch);
    append_pipeline_config(echo, options.pipeline);

    std::vector<std::string> rows;
    for (const SweepRecord& r : records) {
        std::ostringstream row;
        row << format_double(r.eps_nominal) << "," << format_double(r.filter.measured_distance)
            << "," << format_double(r.gnn.measured_distance) << ","
            << format_double(r.filter.bound) << "," << format_double(r.gnn.bound) << ","
            << format_double(r.filter.c) << "," << format_double(r.filter.delta) << ","
            << r.filter.n << "," << r.gnn.layers << "," << r.gnn.width << ","
            << to_string(r.filter.model) << "," << r.arch << "," << r.seed;
        rows.push_back(row.str());
    }
    write_csv(options.out, echo,
              "eps,measured_filter_dist,measured_gnn_dist,bound_filter,bound_gnn,C,delta,N,L,F,"
              "model,arch,seed",
              rows);
    std::cout << "sweep: wrote " << rows.size() << " rows to " << options.out << "\n";
}

void run_train(const TrainOptions& options) {
    Pipeline pipe = build_pipeline(options.pipeline);

    ArchitectureOptions arch_options = options.arch;
    arch_options.rho_il = options.rho;
    Nonlinearity nl =
        arch_options.name == "linear" ? Nonlinearity::identity : Nonlinearity::relu;
    if (arch_options.name != "linear" && arch_options.name != "gnn" &&
        arch_options.name != "gnn-il") {
        throw ValidationError("unknown architecture '" + arch_options.name + "'");
    }
    const double rho = arch_options.name == "gnn-il" ? options.rho : 0.0;

    GnnModel model = init_model(arch_options.width, arch_options.taps, nl,
                                substream_seed(arch_options.seed, kArchInitStream));
    TrainConfig config;
    config.learning_rate = arch_options.learning_rate;
    config.epochs = arch_options.epochs;
    config.il_penalty_weight = rho;
    config.seed = substream_seed(arch_options.seed, kTrainStream);

    TrainResult result{std::move(model), {}};
    if (config.epochs > 0) {
        result = train(std::move(result.model), pipe.graph, pipe.dataset, config);
    }
    save_model(result.model, options.out);

    const double il_constant = max_il_constant(result.model, pipe.graph.eig().values);

    ConfigEcho echo;
    echo.emplace_back("command", "train");
    echo.emplace_back("rho", format_double(options.rho));
    echo.emplace_back("out", options.out);
    echo.emplace_back("max_il_constant", format_double(il_constant));
    append_arch_config(echo, arch_options);
    append_pipeline_config(echo, options.pipeline);

    std::vector<std::string> rows;
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        rows.push_back(std::to_string(e) + "," + format_double(result.epoch_loss[e]));
    }
    write_csv(options.out + ".loss.csv", echo, "epoch,mean_loss", rows);
    std::cout << "train: model " << options.out << ", max integral-Lipschitz constant "
              << format_double(il_constant) << "\n";
}

void run_evaluate(const EvaluateOptions& options) {
    const GnnModel model = load_model(options.model_path);

    Pipeline pipe = build_pipeline(options.pipeline);
    GraphShiftOperator graph = pipe.graph;
    if (!options.graph_source.empty() && options.graph_source != options.pipeline.source) {
        PipelineOptions graph_options = options.pipeline;
        graph_options.source = options.graph_source;
        graph = build_pipeline(graph_options).graph;
    }

    SplitTag split;
    if (options.split == "test") {
        split = SplitTag::test;
    } else if (options.split == "val") {
        split = SplitTag::val;
    } else {
        throw ValidationError("split must be test or val, got '" + options.split + "'");
    }

    const double error = rmse(model, graph, pipe.dataset, split);
    const std::size_t count = pipe.dataset.indices_of(split).size();
    const std::string arch =
        model.nonlinearity == Nonlinearity::identity ? "linear" : "gnn";
    std::cout << arch << "," << options.split << "," << format_double(error) << "," << count
              << "\n";
}

void run_estimation_sweep(const EstimationSweepOptions& options) {
    Pipeline pipe = build_pipeline(options.pipeline);
    const RatingMatrix& ratings = pipe.ratings;

    // Nested user subsets from one seeded shuffle: the 90% prefix is the
    // reference graph, smaller fractions are prefixes of the same order, so
    // fraction 0.9 reproduces the reference exactly.
    std::vector<std::size_t> user_order(ratings.n_users);
    std::iota(user_order.begin(), user_order.end(), 0);
    Rng rng(substream_seed(options.seed, kUserShuffleStream));
    rng.shuffle(user_order);

    auto prefix_users = [&user_order, &ratings](double fraction) {
        const std::size_t count = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(fraction * static_cast<double>(ratings.n_users))));
        return std::vector<std::size_t>(user_order.begin(),
                                        user_order.begin() + std::min(count, user_order.size()));
    };

    const GraphShiftOperator reference = graph_from_split(ratings, prefix_users(0.9),
                                                          options.pipeline.knn);
    const Architecture arch = make_architecture(options.arch, reference, pipe.dataset);

    std::vector<Vector> probes;
    for (std::size_t i : pipe.dataset.indices_of(SplitTag::test)) {
        probes.push_back(pipe.dataset.signals[i]);
    }
    if (probes.empty()) throw ValidationError("estimation sweep: no test signals");

    // Constants for the bound: the estimation error enters as an absolute
    // perturbation E = S_hat - S_ref of the reference support.
    const double reference_norm = operator_norm(reference.matrix());
    const std::size_t n = reference.size();
    std::size_t layers = arch.model.layers.size() + 1;
    std::size_t width = 0;
    for (const FilterBank& bank : arch.model.layers) width = std::max(width, bank.f_out());

    struct Row {
        double fraction;
        double measured;
        double bound;
        double rel_dist;
    };
    std::vector<Row> rows_data;
    double eps_max = 0.0;
    std::vector<Matrix> errors;
    std::vector<GraphShiftOperator> graphs;
    for (double fraction : options.fractions) {
        GraphShiftOperator s_hat =
            graph_from_split(ratings, prefix_users(fraction), options.pipeline.knn);
        Matrix e = subtract(s_hat.matrix(), reference.matrix());
        eps_max = std::max(eps_max, operator_norm(e));
        errors.push_back(std::move(e));
        graphs.push_back(std::move(s_hat));
    }

    Interval interval = default_interval(reference);
    interval.lo -= eps_max;
    interval.hi += eps_max;
    double c = 0.0;
    for (const FilterBank& bank : arch.model.layers) {
        for (const FilterTaps& h : bank.all_taps()) {
            c = std::max(c, lipschitz_constant(h, interval));
        }
    }

    for (std::size_t i = 0; i < options.fractions.size(); ++i) {
        const double eps = operator_norm(errors[i]);
        const double measured = gnn_distance(arch.model, reference, graphs[i], probes);
        const double delta = eps > 0.0 ? eigenvector_misalignment(reference, errors[i]).delta : 0.0;
        const double bound =
            bound_gnn(delta_for_model(BoundModel::absolute, c, delta, n), layers, width, eps);
        rows_data.push_back(Row{options.fractions[i], measured, bound,
                                reference_norm > 0.0 ? eps / reference_norm : 0.0});
    }

    ConfigEcho echo;
    echo.emplace_back("command", "estimation-sweep");
    {
        std::ostringstream fractions;
        for (std::size_t i = 0; i < options.fractions.size(); ++i) {
            if (i > 0) fractions << ";";
            fractions << format_double(options.fractions[i]);
        }
        echo.emplace_back("fractions", fractions.str());
    }
    echo.emplace_back("seed", std::to_string(options.seed));
    echo.emplace_back("out", options.out);
    append_arch_config(echo, options.arch);
    append_pipeline_config(echo, options.pipeline);

    std::vector<std::string> rows;
    for (const Row& r : rows_data) {
        rows.push_back(format_double(r.fraction) + "," + format_double(r.measured) + "," +
                       format_double(r.bound) + "," + format_double(r.rel_dist));
    }
    write_csv(options.out, echo, "fraction,measured_gnn_dist,bound_gnn,rel_dist", rows);
    std::cout << "estimation-sweep: wrote " << rows.size() << " rows to " << options.out << "\n";
}

void run_demo(const DemoOptions& options) {
    if (options.eps <= -1.0) throw ValidationError("demo: eps must be greater than -1");
    // The Laplacian of a random weighted graph: nonnegative spectrum and an
    // oscillatory top eigenvector, so lambda_N genuinely is the highest
    // frequency.
    const GraphShiftOperator s = laplacian(random_weighted_graph(options.n, 0.3, options.seed));
    const EigenSystem& eig = s.eig();
    const double lambda_max = eig.values.back();
    if (lambda_max <= 0.0) {
        throw ValidationError("demo: graph has no positive top eigenvalue; try another seed");
    }

    ConfigEcho echo;
    echo.emplace_back("command", "demo");
    echo.emplace_back("demo", options.demo);
    echo.emplace_back("n", format_size(options.n));
    echo.emplace_back("eps", format_double(options.eps));
    echo.emplace_back("seed", std::to_string(options.seed));
    echo.emplace_back("out", options.out);

    std::vector<std::string> rows;
    if (options.demo == "dilation") {
        const FilterTaps flat = flat_top_taps(lambda_max);
        for (double lambda : eig.values) {
            rows.push_back(format_double(lambda) + "," + format_double(eval_response(flat, lambda)) +
                           "," + format_double(eval_response(flat, (1.0 + options.eps) * lambda)));
        }
        write_csv(options.out, echo, "lambda,before,after", rows);

        const GraphShiftOperator dilated = dilate(s, options.eps);
        const FilterTaps sharp = sharp_bandpass_taps(lambda_max, 1.1);
        const double flat_dist = filter_distance(flat, s, dilated);
        const double sharp_dist = filter_distance(sharp, s, dilated);
        std::cout << "dilation demo: eps=" << format_double(options.eps)
                  << " flat-top filter distance " << format_double(flat_dist)
                  << ", sharp filter distance " << format_double(sharp_dist) << "\n";
    } else if (options.demo == "sharp-filters") {
        // Narrow pass band at lambda_N with the response root 10% above it: a
        // 10% dilation moves the top eigenvalue exactly onto the root.
        const FilterTaps sharp = sharp_bandpass_taps(lambda_max, 1.1);
        for (double lambda : eig.values) {
            rows.push_back(format_double(lambda) + "," +
                           format_double(eval_response(sharp, lambda)) + "," +
                           format_double(eval_response(sharp, (1.0 + options.eps) * lambda)));
        }
        write_csv(options.out, echo, "lambda,before,after", rows);

        const double before = eval_response(sharp, lambda_max);
        const double after = eval_response(sharp, (1.0 + options.eps) * lambda_max);
        const double drop = before != 0.0 ? 1.0 - std::abs(after) / std::abs(before) : 0.0;
        std::cout << "sharp-filters demo: pass-band response " << format_double(before) << " -> "
                  << format_double(after) << " (drop " << format_double(100.0 * drop) << "%)\n";
    } else if (options.demo == "spillage") {
        Vector x(options.n);
        for (std::size_t i = 0; i < options.n; ++i) x[i] = eig.vectors(i, options.n - 1);
        const Vector before = gft(eig.vectors, x);
        const Vector after = spillage_spectrum(Nonlinearity::relu, eig.vectors, x);
        for (std::size_t i = 0; i < options.n; ++i) {
            rows.push_back(std::to_string(i) + "," + format_double(before[i]) + "," +
                           format_double(after[i]));
        }
        write_csv(options.out, echo, "index,before,after", rows);

        std::size_t nonzero = 0;
        for (double v : after) {
            if (std::abs(v) > 1e-8) ++nonzero;
        }
        std::cout << "spillage demo: " << nonzero << " of " << options.n
                  << " frequency coefficients above 1e-8 after relu\n";
    } else {
        throw ValidationError("unknown demo '" + options.demo +
                              "' (expected dilation, sharp-filters or spillage)");
    }
}

}  // namespace gnnstab
