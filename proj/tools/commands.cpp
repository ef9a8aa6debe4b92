#include "commands.hpp"

#include <filesystem>
#include <future>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace lpsvm::cli {
namespace {

void prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

Dataset load_dataset(const std::string& data, const std::optional<std::string>& schedule, const std::string& label_column) {
    Dataset ds = load_csv(data, label_column);
    if (schedule) ds = ds.with_schedule(load_schedule(*schedule));
    return ds;
}

// ---------------------------------------------------------------------------
// train

void check_train_options(const TrainOptions& o) {
    if (o.solver != "psvm" && o.solver != "sparse") throw ConfigError("--solver must be psvm or sparse");
    if (o.beta && o.nu) throw ConfigError("--beta and --nu are mutually exclusive");
    if (o.nu && !(*o.nu > 0.0)) throw ConfigError("--nu must be positive");
    if (o.solver == "psvm" && o.sparse_flags_given) throw ConfigError("sparse solver flags given with --solver psvm");

    if (o.select != "none" && o.select != "balancing" && o.select != "morozov")
        throw ConfigError("--select must be none, balancing or morozov");
    if (o.select != "none" && (o.beta || o.nu))
        throw ConfigError("--beta/--nu fix the parameter; drop them when --select is " + o.select);
    if (o.select == "balancing" && !o.mu) throw ConfigError("--select balancing requires --mu");
    if (o.select != "balancing" && (o.mu || o.balancing_flags_given))
        throw ConfigError("--mu and --beta0 apply only to --select balancing");
    if (o.select == "morozov" && !o.delta) throw ConfigError("--select morozov requires --delta");
    if (o.select != "morozov" && (o.delta || o.morozov_flags_given))
        throw ConfigError("--delta, --beta-lo and --beta-hi apply only to --select morozov");
    if (o.select == "none" && o.select_tuning_given) throw ConfigError("--select-tol/--select-max-iter need --select");

    if (o.movement && !o.schedule) throw ConfigError("--movement requires --schedule");
    if (o.train_cues && !o.movement) throw ConfigError("--train-cues requires --movement");

    SolverConfig probe = o.sparse;
    probe.beta = 1.0;
    probe.validate();
    if (o.select == "balancing") {
        BalancingConfig b;
        b.mu = *o.mu;
        b.beta0 = o.beta0;
        b.validate();
    }
    if (o.select == "morozov") {
        MorozovConfig m;
        m.delta = *o.delta;
        m.beta_lo = o.beta_lo;
        m.beta_hi = o.beta_hi;
        m.validate();
    }
}

struct TrainOutcome {
    Model model;
    Json report;
};

TrainOutcome train_one(const TrainOptions& o, const Dataset& full, const std::optional<std::string>& movement) {
    Dataset ds = movement ? relabel_one_vs_rest(full, *movement) : full;
    Json report;
    if (o.train_cues) {
        auto split = split_by_cues(ds, *movement, *o.train_cues);
        report["train_bins"] = {0, split.split_index};
        ds = std::move(split.train);
    }
    std::optional<Standardizer> z;
    if (o.zscore) {
        z = Standardizer::fit(ds);
        ds = z->apply(ds);
    }
    const Matrix h = build_augmented(ds);

    SolverConfig cfg = o.sparse;
    cfg.beta = o.beta ? *o.beta : (o.nu ? 1.0 / *o.nu : 1.0);

    // Functional values used by the selectors, matching each solver's objective.
    const auto sparse_fn = sparse_probe(h, ds.labels(), cfg);
    const auto psvm_fn = psvm_probe(h);
    const auto probe = [&](double beta) { return o.solver == "psvm" ? psvm_fn(beta) : sparse_fn(beta); };

    if (o.select == "balancing") {
        BalancingConfig b;
        b.mu = *o.mu;
        b.beta0 = o.beta0;
        if (o.select_tol > 0.0) b.tol = o.select_tol;
        if (o.select_max_iter > 0) b.max_iter = o.select_max_iter;
        const auto result = balancing_select(probe, b);
        report["selection"] = to_json(result);
        report["selection"]["config"] = to_json(b);
        cfg.beta = result.beta;
    } else if (o.select == "morozov") {
        MorozovConfig m;
        m.delta = *o.delta;
        m.beta_lo = o.beta_lo;
        m.beta_hi = o.beta_hi;
        if (o.select_tol > 0.0) m.tol = o.select_tol;
        if (o.select_max_iter > 0) m.max_iter = o.select_max_iter;
        std::vector<std::pair<double, double>> probes;
        const auto result = morozov_select(
            [&](double beta) {
                const double phi = probe(beta).phi;
                probes.emplace_back(beta, phi);
                return phi;
            },
            m);
        report["selection"] = to_json(result, probes);
        report["selection"]["config"] = to_json(m);
        cfg.beta = result.beta;
    } else {
        report["selection"] = {{"method", "none"}, {"beta", cfg.beta}};
    }

    Model model;
    model.solver = o.solver;
    model.beta = cfg.beta;
    model.standardizer = z;
    model.movement = movement.value_or("");
    if (o.solver == "psvm") {
        const double nu = 1.0 / cfg.beta;
        model.plane = solve_psvm(h, nu);
        const Vector u = model.plane.stacked();
        report["solve"] = {{"objective", psvm_objective(h, u, nu)},
                           {"stationarity_residual", psvm_stationarity_residual(h, u, nu)}};
    } else {
        auto solution = solve_sparse(h, ds.labels(), cfg);
        model.plane = solution.hyperplane;
        model.config = cfg;
        report["solve"] = to_json(solution.report);
        report["solve"]["nonzero_weights"] = count_nonzero(model.plane.w);
    }
    if (!model.plane.finite()) throw Error("solver produced nonfinite coefficients");
    report["train_margin_stats"] = to_json(margin_stats(ds, model.plane));
    Json head = {{"solver", o.solver}, {"movement", model.movement}, {"beta", model.beta}};
    head.update(report);
    return {std::move(model), std::move(head)};
}

// ---------------------------------------------------------------------------
// evaluate

double agreement(const Vector& values, const Vector& labels) {
    Index hits = 0;
    for (Index i = 0; i < values.size(); ++i) hits += sgn(values(i)) == labels(i);
    return values.size() ? static_cast<double>(hits) / static_cast<double>(values.size()) : 0.0;
}

} // namespace

void run_generate(const GenerateOptions& opt, Json run_record) {
    if (opt.benchmark == opt.spec_file.has_value()) throw ConfigError("give exactly one of --spec or --benchmark");
    const SyntheticSpec spec = opt.benchmark ? benchmark::spec() : spec_from_json(read_json_file(*opt.spec_file));
    spec.validate();
    prepare_dir(opt.out_dir);

    const auto gen = generate_synthetic(spec);
    save_csv(join(opt.out_dir, "data.csv"), gen.dataset);
    save_schedule(join(opt.out_dir, "schedule.csv"), spec.schedule);
    write_json_file(join(opt.out_dir, "truth.json"), {{"generator", kGeneratorName},
                                                      {"seed", spec.seed},
                                                      {"movement", spec.target_movement()},
                                                      {"active_channels", gen.ground_truth}});
    run_record["seed"] = spec.seed;
    run_record["spec"] = to_json(spec);
    write_json_file(join(opt.out_dir, "run.json"), run_record);
}

void run_train(const TrainOptions& opt, Json run_record) {
    check_train_options(opt);
    prepare_dir(opt.out_dir);
    const Dataset full = load_dataset(opt.data, opt.schedule, opt.label_column);

    if (opt.movement && *opt.movement == "all") {
        const auto movements = full.schedule()->movements();
        if (movements.empty()) throw ConfigError("schedule has no movement intervals");
        std::vector<std::future<TrainOutcome>> jobs;
        for (const auto& mv : movements)
            jobs.push_back(std::async(std::launch::async, [&opt, &full, mv] { return train_one(opt, full, mv); }));
        Json index = Json::array();
        for (std::size_t k = 0; k < movements.size(); ++k) {
            const auto outcome = jobs[k].get();
            const auto dir = join(opt.out_dir, movements[k]);
            prepare_dir(dir);
            write_json_file(join(dir, "model.json"), to_json(outcome.model));
            write_json_file(join(dir, "report.json"), outcome.report);
            index.push_back(movements[k]);
        }
        run_record["movements"] = index;
    } else {
        const auto outcome = train_one(opt, full, opt.movement);
        write_json_file(join(opt.out_dir, "model.json"), to_json(outcome.model));
        write_json_file(join(opt.out_dir, "report.json"), outcome.report);
    }
    write_json_file(join(opt.out_dir, "run.json"), run_record);
}

void run_evaluate(const EvaluateOptions& opt, Json run_record) {
    const auto kind = parse_performance_kind(opt.measure);
    if (opt.intervals != "auto" && opt.intervals != "schedule" && opt.intervals != "sign-runs")
        throw ConfigError("--intervals must be auto, schedule or sign-runs");
    if (opt.intervals == "schedule" && !opt.schedule) throw ConfigError("--intervals schedule requires --schedule");
    if (opt.movement && !opt.schedule) throw ConfigError("--movement requires --schedule");
    if (opt.train_cues && !opt.schedule) throw ConfigError("--train-cues requires --schedule");
    const Model model = model_from_json(read_json_file(opt.model));
    prepare_dir(opt.out_dir);

    Dataset ds = load_dataset(opt.data, opt.schedule, opt.label_column);
    if (ds.channels() != model.plane.channels())
        throw ConfigError("model has " + std::to_string(model.plane.channels()) + " channels, data has " +
                          std::to_string(ds.channels()));
    std::optional<std::string> movement = opt.movement;
    if (!movement && opt.schedule && !model.movement.empty()) movement = model.movement;
    if (movement) ds = relabel_one_vs_rest(ds, *movement);
    std::size_t offset = 0;
    if (opt.train_cues) {
        if (!movement) throw ConfigError("--train-cues needs a movement (flag or model)");
        auto split = split_by_cues(ds, *movement, *opt.train_cues);
        offset = split.split_index;
        ds = std::move(split.test);
    }
    if (model.standardizer) ds = model.standardizer->apply(ds);

    const ForceSeries f = force(ds, model.plane);
    const auto summed = summed_performance(f, opt.window);
    const bool use_schedule = opt.intervals == "schedule" || (opt.intervals == "auto" && ds.schedule());
    const CueSchedule intervals = use_schedule ? *ds.schedule() : sign_run_schedule(f);
    const auto averaged = averaged_performance(f, intervals);

    {
        auto out = csv::open_output(join(opt.out_dir, "forces.csv"));
        write_forces_csv(out, f, summed, averaged, ds.labels());
        if (!out) throw Error("failed writing forces.csv");
    }

    Json per_interval = Json::array();
    std::size_t interval_hits = 0;
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        const auto& iv = intervals.intervals()[k];
        const double p = averaged.values(static_cast<Index>(k));
        const double label = ds.labels()(static_cast<Index>(iv.start));
        interval_hits += sgn(p) == label;
        per_interval.push_back({{"start", iv.start + offset},
                                {"end_exclusive", iv.end + offset},
                                {"tag", iv.tag},
                                {"label", label},
                                {"p_tilde", p},
                                {"sign", sgn(p)}});
    }
    double score = 0.0;
    switch (kind) {
    case PerformanceKind::pointwise_sign: score = agreement(f.values, ds.labels()); break;
    case PerformanceKind::summed: score = agreement(summed.values, ds.labels()); break;
    case PerformanceKind::interval_averaged:
        score = intervals.size() ? static_cast<double>(interval_hits) / static_cast<double>(intervals.size()) : 0.0;
        break;
    }

    Json metrics;
    metrics["rows"] = ds.rows();
    metrics["first_bin"] = offset;
    metrics["window"] = opt.window;
    metrics["interval_source"] = use_schedule ? "schedule" : "sign-runs";
    metrics["margin_stats"] = to_json(margin_stats(ds, model.plane));
    metrics["performance"] = {{"measure", to_string(kind)}, {"agreement", score}};
    metrics["intervals"] = per_interval;
    write_json_file(join(opt.out_dir, "metrics.json"), metrics);
    write_json_file(join(opt.out_dir, "run.json"), run_record);
}

void run_heatmap(const HeatmapOptions& opt, Json run_record) {
    const auto transform = parse_transform(opt.transform);
    const auto format = parse_grid_format(opt.format);
    const Model model = model_from_json(read_json_file(opt.model));
    const auto channels = static_cast<std::size_t>(model.plane.channels());
    const ElectrodeMap map = opt.map ? load_electrode_map(*opt.map) : ElectrodeMap::identity(channels);
    map.validate(channels);
    const auto parent = fs::path(opt.out).parent_path();
    if (!parent.empty()) prepare_dir(parent.string());

    export_grid(map_weights(model.plane.w, map, transform), format, opt.out);
    write_json_file(opt.out + ".run.json", run_record);
}

} // namespace lpsvm::cli
