#include "cola/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cola {

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// z quantile for the 99.9% two-sided interval.
constexpr double kZ9995 = 3.2905267314918945;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file not found: " + path);
    ConfigFile cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        if (!cfg.values.emplace(key, value).second)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
    }
    return cfg;
}

std::string ConfigFile::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        throw ValidationError("config: missing required key '" + key + "'");
    return it->second;
}

std::string ConfigFile::get_or(const std::string& key, const std::string& dflt) const {
    auto it = values.find(key);
    return it == values.end() ? dflt : it->second;
}

double ConfigFile::get_double(const std::string& key, double dflt) const {
    auto it = values.find(key);
    return it == values.end() ? dflt : std::stod(it->second);
}

int ConfigFile::get_int(const std::string& key, int dflt) const {
    auto it = values.find(key);
    return it == values.end() ? dflt : std::stoi(it->second);
}

std::vector<std::string> ConfigFile::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

SweepConfig SweepConfig::from_file(const ConfigFile& file) {
    static const std::set<std::string> known = {
        "dataset",     "synth_n",    "synth_d",     "synth_separation", "synth_seed",
        "data_csv",    "data_schema", "split_ratio", "model",            "ce",
        "ce_k",        "ce_m",       "ce_file",     "target_class",     "methods",
        "value_mode",  "policy",     "divergences", "c_grid",           "runs",
        "base_seed",   "estimator",  "exact_cap",   "m_shap"};
    for (const auto& [key, value] : file.values)
        if (!known.count(key) && key.rfind("hyper_", 0) != 0)
            throw ValidationError("config: unknown key '" + key + "'");

    SweepConfig cfg;
    const std::string dataset = file.get_or("dataset", "synthetic");
    if (dataset == "synthetic") {
        cfg.synthetic = true;
        cfg.synth_n = file.get_int("synth_n", 100);
        cfg.synth_d = file.get_int("synth_d", 10);
        cfg.synth_separation = file.get_double("synth_separation", 4.0);
        cfg.synth_seed = static_cast<std::uint64_t>(file.get_int("synth_seed", 1));
    } else if (dataset == "csv") {
        cfg.synthetic = false;
        cfg.data_csv = file.get("data_csv");
        cfg.data_schema = file.get("data_schema");
    } else {
        throw ValidationError("config: dataset must be 'synthetic' or 'csv'");
    }
    cfg.split_ratio = file.get_double("split_ratio", 0.7);
    cfg.model_kind = predictor_kind_from_string(file.get_or("model", "logistic"));
    for (const auto& [key, value] : file.values)
        if (key.rfind("hyper_", 0) == 0) cfg.model_hyper[key.substr(6)] = std::stod(value);
    cfg.ce_kind = file.get_or("ce", "knn");
    cfg.ce_k = file.get_int("ce_k", 1);
    cfg.ce_m = file.get_int("ce_m", 0);
    cfg.ce_file = file.get_or("ce_file", "");
    cfg.target_class = file.get_int("target_class", 1);
    for (const std::string& m : file.get_list("methods"))
        cfg.methods.push_back(method_from_string(m));
    cfg.value_mode = value_mode_from_string(file.get_or("value_mode", "max"));
    cfg.policy = select_policy_from_string(file.get_or("policy", "sample"));
    for (const std::string& d : file.get_list("divergences"))
        cfg.divergences.push_back(divergence_from_string(d));
    for (const std::string& c : file.get_list("c_grid")) cfg.c_grid.push_back(std::stoi(c));
    cfg.runs = file.get_int("runs", 1);
    cfg.base_seed = static_cast<std::uint64_t>(file.get_int("base_seed", 0));
    const std::string est = file.get_or("estimator", "exact");
    cfg.estimator.estimator = est == "sampled" ? ShapEstimator::Sampled : ShapEstimator::Exact;
    if (est != "exact" && est != "sampled")
        throw ValidationError("config: estimator must be 'exact' or 'sampled'");
    cfg.estimator.exact_cap = file.get_int("exact_cap", 12);
    cfg.estimator.m_shap = file.get_int("m_shap", 4096);
    cfg.validate();
    return cfg;
}

void SweepConfig::validate() const {
    if (methods.empty()) throw ValidationError("config: no methods given");
    if (divergences.empty()) throw ValidationError("config: no divergences given");
    if (c_grid.empty()) throw ValidationError("config: empty c_grid");
    for (size_t t = 0; t < c_grid.size(); ++t) {
        if (c_grid[t] < 0) throw ValidationError("config: c_grid entries must be >= 0");
        if (t > 0 && c_grid[t] <= c_grid[t - 1])
            throw ValidationError("config: c_grid must be strictly increasing");
    }
    if (runs < 1) throw ValidationError("config: runs must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw ValidationError("config: split_ratio must lie in (0, 1)");
}

Scenario build_scenario(const SweepConfig& config) {
    DataTable table = config.synthetic
                          ? synth_two_gaussians(config.synth_n, config.synth_d,
                                                config.synth_separation, config.synth_seed)
                          : load_csv(config.data_csv, load_schema(config.data_schema));
    auto [train_table, test_table] = split(table, config.split_ratio, config.synthetic
                                                                          ? config.synth_seed
                                                                          : config.base_seed);
    EncodingStats stats = compute_stats(train_table);
    EncodedMatrix train_enc = encode(train_table, stats, table.schema);
    EncodedMatrix test = encode(test_table, stats, table.schema);

    Scenario sc;
    sc.schema = table.schema;
    sc.stats = stats;
    sc.model = train(config.model_kind, train_enc.values, labels_vector(train_table),
                     config.model_hyper, config.base_seed);
    sc.train = train_enc.values;

    // Factuals: test rows the model does not already place in the target class.
    Eigen::VectorXd p_test = sc.model.predict(test.values);
    std::vector<int> factual_rows;
    for (Eigen::Index i = 0; i < p_test.size(); ++i)
        if ((p_test(i) >= 0.5 ? 1 : 0) != config.target_class)
            factual_rows.push_back(static_cast<int>(i));
    if (factual_rows.empty())
        throw ValidationError("scenario: no factual rows (all predicted as target class)");
    sc.x = Eigen::MatrixXd(factual_rows.size(), test.cols());
    for (size_t i = 0; i < factual_rows.size(); ++i)
        sc.x.row(i) = test.values.row(factual_rows[i]);

    if (config.ce_kind == "knn") {
        sc.ce = knn_ce(sc.model, sc.x, sc.train, config.target_class, config.ce_k);
    } else if (config.ce_kind == "sample") {
        const int m = config.ce_m > 0 ? config.ce_m : static_cast<int>(sc.x.rows());
        sc.ce = sample_ce(sc.model, sc.train, config.target_class, m, config.base_seed);
    } else if (config.ce_kind == "external") {
        sc.ce = load_external_ce(config.ce_file, sc.schema, stats, sc.model,
                                 config.target_class);
    } else {
        throw ValidationError("config: ce must be 'knn', 'sample', or 'external'");
    }
    sc.fx = sc.model.predict(sc.x);
    sc.ystar = sc.model.predict(sc.ce.r);
    sc.name = config.synthetic
                  ? "synth_n" + std::to_string(config.synth_n) + "_d" +
                        std::to_string(config.synth_d)
                  : config.data_csv;
    sc.name += "_" + to_string(config.model_kind) + "_" + config.ce_kind;
    return sc;
}

SweepResult run_sweep(const SweepConfig& config) {
    Scenario sc = build_scenario(config);
    ColaOptions options;
    options.value_mode = config.value_mode;
    options.policy = config.policy;
    options.estimator = config.estimator;
    options.background = &sc.train;

    SweepResult result;
    for (MethodId method : config.methods) {
        for (int run = 0; run < config.runs; ++run) {
            const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(run);
            std::string prepare_error;
            ColaState state;
            try {
                state = cola_prepare(sc.model, sc.x, sc.ce, method, sc.schema, options, seed);
            } catch (const std::exception& e) {
                prepare_error = e.what();
            }

            // Alignment reference for the Frobenius ratio: the coupling's
            // matching when deterministic, otherwise per-row argmax.
            Eigen::MatrixXd r_aligned;
            if (prepare_error.empty()) {
                r_aligned = Eigen::MatrixXd(sc.x.rows(), sc.x.cols());
                for (Eigen::Index i = 0; i < sc.x.rows(); ++i) {
                    Eigen::Index j = 0;
                    if (state.coupling.matching) {
                        j = (*state.coupling.matching)[i];
                    } else {
                        state.coupling.p.row(i).maxCoeff(&j);
                    }
                    r_aligned.row(i) = sc.ce.r.row(j);
                }
            }

            for (int C : config.c_grid) {
                SweepRecord base;
                base.scenario = sc.name;
                base.method = to_string(method);
                base.C = C;
                base.run = run;
                if (!prepare_error.empty()) {
                    base.error = prepare_error;
                    for (DivergenceKind kind : config.divergences) {
                        SweepRecord rec = base;
                        rec.divergence = kind;
                        rec.value = std::numeric_limits<double>::quiet_NaN();
                        rec.effect = std::numeric_limits<double>::quiet_NaN();
                        result.records.push_back(rec);
                        ++result.failures;
                    }
                    continue;
                }
                try {
                    ActionPlan plan = cola_select(state, sc.x, C, seed, sc.schema, options);
                    Eigen::VectorXd fz = sc.model.predict(plan.z);
                    double frob = std::numeric_limits<double>::quiet_NaN();
                    const double denom = (r_aligned - sc.x).norm();
                    if (denom > 0.0) frob = (plan.z - sc.x).norm() / denom;
                    for (DivergenceKind kind : config.divergences) {
                        SweepRecord rec = base;
                        rec.divergence = kind;
                        DivergenceSpec spec{kind};
                        rec.value = divergence(spec, fz, sc.ystar);
                        rec.effect = counterfactual_effect(sc.fx, fz, sc.ystar, spec);
                        rec.modified_cells = plan.budget_used;
                        rec.frob_ratio = frob;
                        result.records.push_back(rec);
                    }
                } catch (const std::exception& e) {
                    for (DivergenceKind kind : config.divergences) {
                        SweepRecord rec = base;
                        rec.divergence = kind;
                        rec.error = e.what();
                        rec.value = std::numeric_limits<double>::quiet_NaN();
                        rec.effect = std::numeric_limits<double>::quiet_NaN();
                        result.records.push_back(rec);
                        ++result.failures;
                    }
                }
            }
        }
    }

    // Summary: mean and 99.9% CI per (method, divergence, C).
    for (MethodId method : config.methods) {
        for (DivergenceKind kind : config.divergences) {
            for (int C : config.c_grid) {
                std::vector<double> values, effects;
                for (const SweepRecord& rec : result.records) {
                    if (rec.method != to_string(method) || rec.divergence != kind ||
                        rec.C != C || !rec.error.empty())
                        continue;
                    values.push_back(rec.value);
                    effects.push_back(rec.effect);
                }
                if (values.empty()) continue;
                SweepSummaryRow row;
                row.method = to_string(method);
                row.divergence = kind;
                row.C = C;
                const double n = static_cast<double>(values.size());
                double mean = 0.0;
                for (double v : values) mean += v;
                mean /= n;
                double ss = 0.0;
                for (double v : values) ss += (v - mean) * (v - mean);
                const double se = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
                row.mean = mean;
                row.ci_half_width = kZ9995 * se;
                double me = 0.0;
                for (double e : effects) me += e;
                row.mean_effect = me / n;
                result.summary.push_back(row);
            }
        }
    }
    return result;
}

std::vector<ThresholdSummary> summarize_effect_threshold(const SweepResult& result,
                                                         double threshold,
                                                         DivergenceKind divergence) {
    // method -> run -> (C -> record)
    std::map<std::string, std::map<int, std::vector<const SweepRecord*>>> grouped;
    for (const SweepRecord& rec : result.records) {
        if (rec.divergence != divergence || !rec.error.empty()) continue;
        grouped[rec.method][rec.run].push_back(&rec);
    }
    std::vector<ThresholdSummary> out;
    for (auto& [method, runs] : grouped) {
        ThresholdSummary ts;
        ts.method = method;
        ts.threshold = threshold;
        ts.divergence = divergence;
        std::vector<double> modified, frob;
        int unreached = 0;
        for (auto& [run, records] : runs) {
            std::vector<const SweepRecord*> sorted = records;
            std::sort(sorted.begin(), sorted.end(),
                      [](const SweepRecord* a, const SweepRecord* b) { return a->C < b->C; });
            const SweepRecord* hit = nullptr;
            for (const SweepRecord* rec : sorted) {
                if (rec->effect >= threshold) {
                    hit = rec;
                    break;
                }
            }
            if (!hit) {
                ++unreached;
                continue;
            }
            modified.push_back(static_cast<double>(hit->modified_cells));
            if (std::isfinite(hit->frob_ratio)) frob.push_back(hit->frob_ratio);
        }
        ts.unreached_fraction = runs.empty() ? 0.0
                                             : static_cast<double>(unreached) /
                                                   static_cast<double>(runs.size());
        ts.reached = !modified.empty();
        if (ts.reached) {
            const double n = static_cast<double>(modified.size());
            double mean = 0.0;
            for (double v : modified) mean += v;
            mean /= n;
            double ss = 0.0;
            for (double v : modified) ss += (v - mean) * (v - mean);
            ts.mean_modified = mean;
            ts.se_modified = modified.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
            if (!frob.empty()) {
                double fm = 0.0;
                for (double v : frob) fm += v;
                ts.mean_frob_ratio = fm / static_cast<double>(frob.size());
            }
        }
        out.push_back(ts);
    }
    return out;
}

std::vector<std::pair<int, double>> optimal_curve(const Scenario& scenario,
                                                  const std::vector<int>& c_grid,
                                                  ValueMode, int cap) {
    if (!scenario.ce.pairing)
        throw ValidationError("optimal_curve: scenario lacks an exact alignment");
    const std::vector<int>& pairing = *scenario.ce.pairing;
    Eigen::MatrixXd q(scenario.x.rows(), scenario.x.cols());
    for (Eigen::Index i = 0; i < scenario.x.rows(); ++i)
        q.row(i) = scenario.ce.r.row(pairing[i]);
    const double ystar_mean = scenario.ystar.mean();
    std::vector<SubsetProfile> profiles =
        enumerate_profiles(scenario.model, scenario.x, q, scenario.schema, ystar_mean, cap);
    std::vector<std::pair<int, double>> curve;
    for (int C : c_grid) {
        BaselineSolution sol = solve_min_abs_sum(profiles, C);
        // The objective is |sum g| = n * MeanD.
        curve.emplace_back(C, sol.objective / static_cast<double>(scenario.x.rows()));
    }
    return curve;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "scenario,method,divergence,C,run,value,effect,modified_cells,frob_ratio\n";
    for (const SweepRecord& rec : result.records) {
        out << rec.scenario << ',' << rec.method << ',' << to_string(rec.divergence) << ','
            << rec.C << ',' << rec.run << ',' << fmt(rec.value) << ',' << fmt(rec.effect)
            << ',' << rec.modified_cells << ',' << fmt(rec.frob_ratio) << '\n';
    }
}

void write_summary_json(const std::string& path, const SweepResult& result,
                        const std::vector<ThresholdSummary>& thresholds) {
    nlohmann::json doc;
    doc["summary"] = nlohmann::json::array();
    for (const SweepSummaryRow& row : result.summary) {
        doc["summary"].push_back({{"method", row.method},
                                  {"divergence", to_string(row.divergence)},
                                  {"C", row.C},
                                  {"mean", row.mean},
                                  {"ci_half_width", row.ci_half_width},
                                  {"mean_effect", row.mean_effect}});
    }
    doc["thresholds"] = nlohmann::json::array();
    for (const ThresholdSummary& ts : thresholds) {
        nlohmann::json entry = {{"method", ts.method},
                                {"threshold", ts.threshold},
                                {"divergence", to_string(ts.divergence)},
                                {"reached", ts.reached},
                                {"unreached_fraction", ts.unreached_fraction}};
        if (ts.reached) {
            entry["mean_modified"] = ts.mean_modified;
            entry["se_modified"] = ts.se_modified;
            entry["mean_frob_ratio"] = ts.mean_frob_ratio;
        }
        doc["thresholds"].push_back(entry);
    }
    doc["failures"] = result.failures;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace cola
