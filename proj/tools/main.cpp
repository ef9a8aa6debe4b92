// lpsvm command-line front end: generate, train, evaluate, heatmap.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include "CLI11.hpp"
#include "commands.hpp"

#include <Eigen/Core>

#include <iostream>

using namespace lpsvm;
using namespace lpsvm::cli;

namespace {

std::string versions_of_eigen() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
           std::to_string(EIGEN_MINOR_VERSION);
}

/// Every option of `sub` with its effective value, in declaration order.
Json provenance(const CLI::App& sub) {
    Json options;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt == sub.get_help_ptr()) continue;
        const std::string key = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
        if (opt->get_expected_min() == 0) {
            options[key] = opt->count() > 0;
        } else if (opt->count() > 0) {
            options[key] = opt->results().size() == 1 ? Json(opt->results().front()) : Json(opt->results());
        } else if (!opt->get_default_str().empty()) {
            options[key] = opt->get_default_str();
        } else {
            options[key] = nullptr;
        }
    }
    return {{"command", sub.get_name()},
            {"versions",
             {{"lpsvm", kVersion},
              {"eigen", versions_of_eigen()},
              {"cli11", CLI11_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                    "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
            {"generator", kGeneratorName},
            {"options", options}};
}

bool any_given(const CLI::App& sub, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (sub.count(n) > 0) return true;
    return false;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse and proximal linear SVMs for firing-rate classification"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "Read options from a key=value file ([command] sections or command.key lines)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    // generate
    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic firing-rate dataset");
    auto* g_spec = g->add_option("--spec", gen.spec_file, "Generator spec (JSON)")->check(CLI::ExistingFile);
    auto* g_bench = g->add_flag("--benchmark", gen.benchmark, "Use the built-in 96-channel benchmark");
    g_spec->excludes(g_bench);
    g->add_option("--out", gen.out_dir, "Output directory")->required();

    // train
    TrainOptions tr;
    std::string gamma_mode = "indicator", t_mode = "lp", warm_start = "psvm";
    auto* t = app.add_subcommand("train", "Fit a classifier");
    t->add_option("--data", tr.data, "Feature CSV with a label column")->required()->check(CLI::ExistingFile);
    t->add_option("--schedule", tr.schedule, "Cue schedule CSV")->check(CLI::ExistingFile);
    t->add_option("--movement,--movements", tr.movement, "One-vs-rest target movement, or 'all'");
    t->add_option("--label-column", tr.label_column, "Name of the label column")->capture_default_str();
    t->add_option("--solver", tr.solver, "psvm or sparse")->capture_default_str();
    t->add_option("--beta", tr.beta, "Regularization parameter");
    t->add_option("--nu", tr.nu, "PSVM parameter, equivalent to --beta 1/nu");
    t->add_option("--p", tr.sparse.p, "Exponent of the weight penalty, in (0, 2]")->capture_default_str();
    t->add_option("--eps", tr.sparse.epsilon, "Smoothing of |w|^p near zero")->capture_default_str();
    t->add_option("--alpha", tr.sparse.alpha, "Weight of the -1 class in the hinge term, in (0, 1]")->capture_default_str();
    t->add_option("--gamma-mode", gamma_mode, "indicator, residual or all-active")->capture_default_str();
    t->add_option("--t-mode", t_mode, "Weight-penalty matrix: lp or identity")->capture_default_str();
    t->add_option("--warm-start", warm_start, "psvm or zero")->capture_default_str();
    t->add_option("--max-iter", tr.sparse.max_iter, "Iteration limit of the sparse solver")->capture_default_str();
    t->add_option("--tol", tr.sparse.tol, "Step tolerance of the sparse solver")->capture_default_str();
    t->add_option("--select", tr.select, "none, balancing or morozov")->capture_default_str();
    t->add_option("--mu", tr.mu, "Balancing ratio mu");
    t->add_option("--beta0", tr.beta0, "Balancing starting value")->capture_default_str();
    t->add_option("--delta", tr.delta, "Noise level for the discrepancy principle");
    t->add_option("--beta-lo", tr.beta_lo, "Lower end of the discrepancy bracket")->capture_default_str();
    t->add_option("--beta-hi", tr.beta_hi, "Upper end of the discrepancy bracket")->capture_default_str();
    t->add_option("--select-tol", tr.select_tol, "Selector tolerance (default: selector's own)");
    t->add_option("--select-max-iter", tr.select_max_iter, "Selector iteration limit (default: selector's own)");
    t->add_option("--train-cues", tr.train_cues, "Train on bins before the (N+1)-th cue of the movement");
    t->add_flag("--zscore", tr.zscore, "Standardize channels on the training bins");
    t->add_option("--out", tr.out_dir, "Output directory")->required();

    // evaluate
    EvaluateOptions ev;
    auto* e = app.add_subcommand("evaluate", "Compute forces and performance measures");
    e->add_option("--model", ev.model, "model.json from train")->required()->check(CLI::ExistingFile);
    e->add_option("--data", ev.data, "Feature CSV with a label column")->required()->check(CLI::ExistingFile);
    e->add_option("--schedule", ev.schedule, "Cue schedule CSV")->check(CLI::ExistingFile);
    e->add_option("--movement", ev.movement, "Relabel one-vs-rest (default: the model's movement)");
    e->add_option("--label-column", ev.label_column, "Name of the label column")->capture_default_str();
    e->add_option("--train-cues", ev.train_cues, "Evaluate only the bins from the (N+1)-th cue on");
    e->add_option("--window", ev.window, "Half-width of the summed measure")->capture_default_str();
    e->add_option("--measure", ev.measure, "sign, summed or averaged")->capture_default_str();
    e->add_option("--intervals", ev.intervals, "Intervals for averaging: auto, schedule or sign-runs")->capture_default_str();
    e->add_option("--out", ev.out_dir, "Output directory")->required();

    // heatmap
    HeatmapOptions hm;
    auto* h = app.add_subcommand("heatmap", "Place model weights on the electrode grid");
    h->add_option("--model", hm.model, "model.json from train")->required()->check(CLI::ExistingFile);
    h->add_option("--map", hm.map, "10x10 electrode map CSV (default: row-major identity)")->check(CLI::ExistingFile);
    h->add_option("--transform", hm.transform, "raw, abs or log_abs")->capture_default_str();
    h->add_option("--format", hm.format, "csv or pgm")->capture_default_str();
    h->add_option("--out", hm.out, "Output file; provenance goes to <out>.run.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (g->parsed()) {
            run_generate(gen, provenance(*g));
        } else if (t->parsed()) {
            tr.sparse.gamma_mode = parse_gamma_mode(gamma_mode);
            tr.sparse.weight_mode = parse_weight_mode(t_mode);
            tr.sparse.warm_start = parse_warm_start(warm_start);
            tr.sparse_flags_given =
                any_given(*t, {"--p", "--eps", "--alpha", "--gamma-mode", "--t-mode", "--warm-start", "--max-iter", "--tol"});
            tr.balancing_flags_given = any_given(*t, {"--beta0"});
            tr.morozov_flags_given = any_given(*t, {"--beta-lo", "--beta-hi"});
            tr.select_tuning_given = any_given(*t, {"--select-tol", "--select-max-iter"});
            run_train(tr, provenance(*t));
        } else if (e->parsed()) {
            run_evaluate(ev, provenance(*e));
        } else if (h->parsed()) {
            run_heatmap(hm, provenance(*h));
        }
    } catch (const ConfigError& err) {
        std::cerr << "configuration error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
