#pragma once

#include <map>
#include <optional>

#include "cola/baseline.hpp"
#include "cola/metrics.hpp"
#include "cola/refine.hpp"

namespace cola {

// Declarative `key = value` configuration file ('#' comments). Keys are
// documented in the README; unknown keys are an error.
struct ConfigFile {
    std::map<std::string, std::string> values;

    static ConfigFile parse(const std::string& path);

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key, double dflt) const;
    int get_int(const std::string& key, int dflt) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma separated
};

struct SweepConfig {
    // Dataset: synthetic parameters or csv path + schema path.
    bool synthetic = true;
    int synth_n = 100;
    int synth_d = 10;
    double synth_separation = 4.0;
    std::uint64_t synth_seed = 1;
    std::string data_csv, data_schema;
    double split_ratio = 0.7;

    PredictorKind model_kind = PredictorKind::Logistic;
    std::map<std::string, double> model_hyper;

    std::string ce_kind = "knn";  // knn | sample | external
    int ce_k = 1;
    int ce_m = 0;  // sample ce count; 0 -> n
    int target_class = 1;
    std::string ce_file;  // external

    std::vector<MethodId> methods;
    ValueMode value_mode = ValueMode::Max;
    SelectPolicy policy = SelectPolicy::Sample;
    std::vector<DivergenceKind> divergences;
    std::vector<int> c_grid;  // strictly increasing, nonnegative
    int runs = 1;
    std::uint64_t base_seed = 0;
    EstimatorConfig estimator;

    static SweepConfig from_file(const ConfigFile& file);
    void validate() const;
};

struct SweepRecord {
    std::string scenario;
    std::string method;
    DivergenceKind divergence;
    int C = 0;
    int run = 0;
    double value = 0.0;   // D(f(z), y*)
    double effect = 0.0;
    int modified_cells = 0;
    double frob_ratio = std::numeric_limits<double>::quiet_NaN();
    std::string error;  // nonempty when this cell failed
};

struct SweepSummaryRow {
    std::string method;
    DivergenceKind divergence;
    int C = 0;
    double mean = 0.0;
    double ci_half_width = 0.0;  // 99.9% normal approximation
    double mean_effect = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<SweepSummaryRow> summary;
    int failures = 0;
};

// Prepared scenario shared by the sweep and the optimal baseline.
struct Scenario {
    FeatureSchema schema;
    EncodingStats stats;
    Predictor model;
    Eigen::MatrixXd train;  // background
    Eigen::MatrixXd x;      // factual test rows (predicted non-target class)
    CEResult ce;
    Eigen::VectorXd fx;
    Eigen::VectorXd ystar;
    std::string name;
};

Scenario build_scenario(const SweepConfig& config);

SweepResult run_sweep(const SweepConfig& config);

struct ThresholdSummary {
    std::string method;
    double threshold = 0.0;
    DivergenceKind divergence = DivergenceKind::OtW1;
    bool reached = false;
    double mean_modified = 0.0;
    double se_modified = 0.0;
    double mean_frob_ratio = 0.0;
    double unreached_fraction = 0.0;  // of runs
};

// Per run, the smallest grid C whose effect reaches the threshold; averaged
// modified-cell counts over the runs that reach it.
std::vector<ThresholdSummary> summarize_effect_threshold(const SweepResult& result,
                                                         double threshold,
                                                         DivergenceKind divergence);

// Optimal MeanD curve over the C grid (exact alignment required).
std::vector<std::pair<int, double>> optimal_curve(const Scenario& scenario,
                                                  const std::vector<int>& c_grid,
                                                  ValueMode value_mode, int cap = 12);

void write_sweep_csv(const std::string& path, const SweepResult& result);
void write_summary_json(const std::string& path, const SweepResult& result,
                        const std::vector<ThresholdSummary>& thresholds);

}  // namespace cola
