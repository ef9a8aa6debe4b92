#pragma once

#include "json_io.hpp"

#include <optional>
#include <string>

namespace lpsvm::cli {

struct GenerateOptions {
    std::optional<std::string> spec_file;
    bool benchmark = false;
    std::string out_dir;
};

struct TrainOptions {
    std::string data;
    std::optional<std::string> schedule;
    std::optional<std::string> movement; ///< "all" trains one model per movement
    std::string label_column = "label";
    std::string solver = "sparse";
    std::optional<double> beta;
    std::optional<double> nu;
    SolverConfig sparse;
    std::string select = "none";
    std::optional<double> mu;
    double beta0 = 1.0;
    double select_tol = -1.0; ///< negative: the selector's own default
    int select_max_iter = -1;
    std::optional<double> delta;
    double beta_lo = 1e-6;
    double beta_hi = 1e6;
    std::optional<std::size_t> train_cues;
    bool zscore = false;
    std::string out_dir;
    bool sparse_flags_given = false;  ///< any of --p/--eps/--alpha/... on the command line
    bool balancing_flags_given = false; ///< --beta0
    bool morozov_flags_given = false;   ///< --beta-lo/--beta-hi
    bool select_tuning_given = false;   ///< --select-tol/--select-max-iter
};

struct EvaluateOptions {
    std::string model;
    std::string data;
    std::optional<std::string> schedule;
    std::optional<std::string> movement;
    std::string label_column = "label";
    std::optional<std::size_t> train_cues;
    std::size_t window = 5;
    std::string measure = "averaged";
    std::string intervals = "auto";
    std::string out_dir;
};

struct HeatmapOptions {
    std::string model;
    std::optional<std::string> map;
    std::string transform = "abs";
    std::string format = "pgm";
    std::string out;
};

/// Each command validates its options, writes its outputs and then `run_record`
/// as the provenance file.
void run_generate(const GenerateOptions& opt, Json run_record);
void run_train(const TrainOptions& opt, Json run_record);
void run_evaluate(const EvaluateOptions& opt, Json run_record);
void run_heatmap(const HeatmapOptions& opt, Json run_record);

} // namespace lpsvm::cli
