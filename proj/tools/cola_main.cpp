#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cola/sweep.hpp"

namespace fs = std::filesystem;
using namespace cola;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int seed = -1;  // overrides base_seed when >= 0
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override base_seed");
}

SweepConfig load_config(const CommonArgs& args) {
    SweepConfig cfg = SweepConfig::from_file(ConfigFile::parse(args.config_path));
    if (args.seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(args.seed);
    return cfg;
}

fs::path ensure_out(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_attribution_csv(const fs::path& path, const Eigen::MatrixXd& m,
                           const FeatureSchema& schema) {
    std::ofstream out(path);
    for (int g = 0; g < schema.num_features(); ++g) {
        out << schema.columns()[g].name;
        out << (g + 1 < schema.num_features() ? ',' : '\n');
    }
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 < m.cols() ? ',' : '\n');
        }
    }
}

int run_train(const CommonArgs& args) {
    SweepConfig cfg = load_config(args);
    Scenario sc = build_scenario(cfg);
    const fs::path dir = ensure_out(args);
    sc.model.save((dir / "model.txt").string());
    std::cout << "model written to " << (dir / "model.txt").string() << '\n';
    return 0;
}

int run_ce(const CommonArgs& args) {
    SweepConfig cfg = load_config(args);
    Scenario sc = build_scenario(cfg);
    const fs::path dir = ensure_out(args);
    EncodedMatrix enc{sc.ce.r, sc.schema, sc.stats};
    std::vector<int> labels(sc.ce.count(), sc.ce.target_class);
    DataTable decoded = decode(enc, &labels);
    write_csv((dir / "ce.csv").string(), decoded);
    std::cout << sc.ce.count() << " counterfactual rows written to "
              << (dir / "ce.csv").string() << '\n';
    return 0;
}

ColaOptions make_options(const SweepConfig& cfg, const Scenario& sc) {
    ColaOptions options;
    options.value_mode = cfg.value_mode;
    options.policy = cfg.policy;
    options.estimator = cfg.estimator;
    options.background = &sc.train;
    return options;
}

int run_attribute(const CommonArgs& args) {
    SweepConfig cfg = load_config(args);
    Scenario sc = build_scenario(cfg);
    ColaOptions options = make_options(cfg, sc);
    const fs::path dir = ensure_out(args);
    for (MethodId method : cfg.methods) {
        ColaState state =
            cola_prepare(sc.model, sc.x, sc.ce, method, sc.schema, options, cfg.base_seed);
        const std::string tag = to_string(method);
        write_attribution_csv(dir / ("phi_" + tag + ".csv"), state.attribution.phi, sc.schema);
        write_attribution_csv(dir / ("varphi_" + tag + ".csv"), state.attribution.varphi,
                              sc.schema);
    }
    std::cout << "attributions written to " << dir.string() << '\n';
    return 0;
}

int run_refine(const CommonArgs& args) {
    SweepConfig cfg = load_config(args);
    Scenario sc = build_scenario(cfg);
    ColaOptions options = make_options(cfg, sc);
    const fs::path dir = ensure_out(args);
    const MethodId method = cfg.methods.front();
    const int C = cfg.c_grid.back();
    ActionPlan plan =
        cola::cola(sc.model, sc.x, sc.ce, method, C, cfg.base_seed, sc.schema, options);

    std::ofstream mask_out(dir / "mask.csv");
    for (Eigen::Index i = 0; i < plan.mask.rows(); ++i) {
        for (Eigen::Index j = 0; j < plan.mask.cols(); ++j)
            mask_out << plan.mask(i, j) << (j + 1 < plan.mask.cols() ? ',' : '\n');
    }
    EncodedMatrix enc{plan.z, sc.schema, sc.stats};
    std::vector<int> labels(static_cast<int>(plan.z.rows()), cfg.target_class);
    write_csv((dir / "refined.csv").string(), decode(enc, &labels));
    std::cout << "plan with " << plan.budget_used << " modified cells written to "
              << dir.string() << '\n';
    return 0;
}

int run_sweep_cmd(const CommonArgs& args) {
    SweepConfig cfg = load_config(args);
    const fs::path dir = ensure_out(args);
    SweepResult result = run_sweep(cfg);
    write_sweep_csv((dir / "sweep.csv").string(), result);
    std::vector<ThresholdSummary> thresholds;
    for (double threshold : {0.8, 1.0}) {
        auto rows = summarize_effect_threshold(result, threshold, cfg.divergences.front());
        thresholds.insert(thresholds.end(), rows.begin(), rows.end());
    }
    write_summary_json((dir / "summary.json").string(), result, thresholds);
    std::cout << result.records.size() << " records written to " << dir.string();
    if (result.failures > 0) std::cout << " (" << result.failures << " failed cells)";
    std::cout << '\n';
    return 0;
}

int run_baseline(const CommonArgs& args) {
    SweepConfig cfg = load_config(args);
    Scenario sc = build_scenario(cfg);
    if (sc.schema.num_features() > cfg.estimator.exact_cap)
        throw ValidationError("baseline: " + std::to_string(sc.schema.num_features()) +
                              " features exceeds the enumeration cap of " +
                              std::to_string(cfg.estimator.exact_cap));
    const fs::path dir = ensure_out(args);
    auto curve = optimal_curve(sc, cfg.c_grid, cfg.value_mode, cfg.estimator.exact_cap);
    std::ofstream out(dir / "optimal.csv");
    out << "scenario,method,divergence,C,run,value,effect,modified_cells,frob_ratio\n";
    DivergenceSpec mean_d{DivergenceKind::MeanD};
    const double base = divergence(mean_d, sc.fx, sc.ystar);
    char buf[64];
    for (const auto& [C, value] : curve) {
        const double effect = base == 0.0 ? 1.0 : 1.0 - value / base;
        out << sc.name << ",Optimal,mean_d," << C << ",0,";
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", effect);
        out << buf << ',' << C << ",nan\n";
    }
    std::cout << "optimal curve written to " << (dir / "optimal.csv").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterfactual refinement toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model from a config");
    CLI::App* ce_cmd = app.add_subcommand("ce", "generate counterfactuals");
    CLI::App* attr_cmd = app.add_subcommand("attribute", "compute attribution matrices");
    CLI::App* refine_cmd = app.add_subcommand("refine", "run one refinement");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a budget sweep");
    CLI::App* baseline_cmd = app.add_subcommand("baseline", "exact optimal curve");
    for (CLI::App* cmd : {train_cmd, ce_cmd, attr_cmd, refine_cmd, sweep_cmd, baseline_cmd})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train_cmd->parsed()) return run_train(args);
        if (ce_cmd->parsed()) return run_ce(args);
        if (attr_cmd->parsed()) return run_attribute(args);
        if (refine_cmd->parsed()) return run_refine(args);
        if (sweep_cmd->parsed()) return run_sweep_cmd(args);
        if (baseline_cmd->parsed()) return run_baseline(args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
