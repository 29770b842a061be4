#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "mignn/fd.hpp"
#include "mignn/harness.hpp"
#include "mignn/train.hpp"

namespace fs = std::filesystem;
using namespace mignn;

namespace {

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path,
                      std::string& seeds_csv, std::string& second_order) {
    cmd->add_option("--data", cfg.data, "dataset directory (tud) or file (jsonl)");
    cmd->add_option("--format", cfg.format, "tud | jsonl | synth");
    cmd->add_option("--dataset", cfg.dataset, "collection name, e.g. COX2");
    cmd->add_option("--arch", cfg.arch, "sgc | gcn | sage");
    cmd->add_option("--alpha", cfg.hp.inner_lr, "task-adaptation learning rate")
        ->each([&cfg](const std::string&) { cfg.alpha_explicit = true; });
    cmd->add_option("--steps", cfg.hp.inner_steps, "task-adaptation gradient steps");
    cmd->add_option("--lambda", cfg.hp.lambda, "scaling/shifting regularization weight");
    cmd->add_option("--batch", cfg.hp.batch_size, "graphs per meta-batch");
    cmd->add_option("--max-epochs", cfg.hp.max_epochs, "epoch limit");
    cmd->add_option("--patience", cfg.hp.patience, "early-stopping patience");
    cmd->add_option("--seeds", seeds_csv, "comma-separated seed list");
    cmd->add_option("--second-order", second_order, "on | off");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--config", config_path, "key=value file; overrides flags");
}

void finalize_config(RunConfig& cfg, const std::string& config_path, const std::string& seeds_csv,
                     const std::string& second_order) {
    if (!seeds_csv.empty()) apply_override(cfg, "seeds", seeds_csv);
    if (!second_order.empty()) apply_override(cfg, "second_order", second_order);
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    apply_dataset_defaults(cfg);
    cfg.validate();
}

void write_reports(const RunConfig& cfg, const std::vector<MethodMetrics>& rows,
                   const MetaState* state) {
    fs::create_directories(cfg.out_dir);
    write_metrics_csv((fs::path(cfg.out_dir) / "metrics.csv").string(), rows);
    write_summary_json((fs::path(cfg.out_dir) / "summary.json").string(), cfg, rows);
    if (state != nullptr)
        save_checkpoint((fs::path(cfg.out_dir) / "checkpoint.bin").string(), *state);
    for (const MethodMetrics& m : rows) {
        std::cout << method_name(m.method) << ": accuracy " << m.acc_mean * 100.0 << " +- "
                  << m.acc_half * 100.0 << ", micro-F1 " << m.f1_mean * 100.0 << " +- "
                  << m.f1_half * 100.0 << "\n";
    }
}

int run_selftest() {
    Rng rng(12345);
    int failures = 0;
    const auto report = [&](const char* name, double err, double tol) {
        const bool ok = err <= tol;
        std::cout << (ok ? "pass" : "FAIL") << "  " << name << "  max_rel_err=" << err
                  << " tol=" << tol << "\n";
        if (!ok) ++failures;
    };

    {
        Tensor x({2, 3}, {0.3, -0.8, 1.2, 0.5, -0.1, 0.9});
        Tensor w({3, 2}, {0.2, -0.4, 0.7, 0.1, -0.3, 0.6});
        Tensor t = Tensor::zeros({2, 2});
        t.mutable_data()[0] = 1.0;
        t.mutable_data()[3] = 1.0;
        report("cross_entropy(tanh(x w))",
               fd_check([&](const Tensor& v) {
                   return softmax_cross_entropy_rows(tanh(matmul(v, w)), t);
               }, x), 1e-5);
        report("second_order cross_entropy(tanh(x w))",
               fd_check_second_order([&](const Tensor& v) {
                   return softmax_cross_entropy_rows(tanh(matmul(v, w)), t);
               }, x), 1e-4);
    }
    {
        SynthParams sp;
        sp.n_graphs = 4;
        sp.nodes_min = 6;
        sp.nodes_max = 8;
        sp.feature_dim = 3;
        sp.num_categories = 2;
        GraphCollection c = synth_collection(sp, 7);
        EncoderSpec spec;
        spec.input_dim = 3;
        spec.hidden_dim = 4;
        spec.output_dim = 2;
        HyperParams hp;
        hp.inner_lr = 0.2;
        hp.inner_steps = 2;
        hp.lambda = 0.01;
        Graph& g = c.graphs[0];
        PreparedGraph prep = prepare_graph(spec, g);
        Rng prng(3);
        EpisodeSplit split = sample_episode(g, 0.5, prng);
        GraphPrior phi = GraphPrior::init(3, 8, spec.param_dim(), prng);
        for (double& v : phi.w_g2) v = 0.02 * prng.normal();
        for (double& v : phi.w_b2) v = 0.02 * prng.normal();
        ParamVector theta = init_params(spec, prng);

        const auto objective_wrt_theta = [&](const Tensor& th) {
            Tape* tape = Tape::active();
            PriorLeaves leaves = tape ? make_prior_leaves(*tape, phi) : prior_constants(phi);
            return episode_objective(spec, prep, g, split, th, &leaves, hp, false, 2);
        };
        Tensor th({theta.dim()}, theta.values);
        report("episode objective d/dtheta (2-step, second order)",
               fd_check(objective_wrt_theta, th), 1e-4);
    }

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meta-inductive node classification across graphs"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, seeds_csv, second_order;
    std::string method_flag = "mignn";
    std::string sweep_param = "lambda";
    std::string sweep_values = "0.0001,0.01,1,100";
    std::string checkpoint_path;
    double shift_delta = 0.0;

    CLI::App* train_cmd = app.add_subcommand("train", "train MI-GNN and write a checkpoint");
    add_common_flags(train_cmd, cfg, config_path, seeds_csv, second_order);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a saved checkpoint");
    add_common_flags(eval_cmd, cfg, config_path, seeds_csv, second_order);
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint.bin path")->required();

    CLI::App* baseline_cmd = app.add_subcommand("baseline", "run one baseline method");
    add_common_flags(baseline_cmd, cfg, config_path, seeds_csv, second_order);
    baseline_cmd->add_option("--method", method_flag,
                             "mignn | induct | transduct | finetune_agf | knn | meta_gnn | "
                             "graph_only | task_only");

    CLI::App* ablate_cmd = app.add_subcommand("ablate", "MI-GNN against its ablations");
    add_common_flags(ablate_cmd, cfg, config_path, seeds_csv, second_order);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sensitivity table");
    add_common_flags(sweep_cmd, cfg, config_path, seeds_csv, second_order);
    sweep_cmd->add_option("--param", sweep_param, "lambda | inner_steps");
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values");

    CLI::App* case_cmd = app.add_subcommand("casestudy", "per-similarity-group comparison");
    add_common_flags(case_cmd, cfg, config_path, seeds_csv, second_order);
    case_cmd->add_option("--shift", shift_delta, "feature shift for the synthetic fixture");

    CLI::App* selftest_cmd = app.add_subcommand("selftest", "gradient-check suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (selftest_cmd->parsed()) return run_selftest();

        finalize_config(cfg, config_path, seeds_csv, second_order);
        GraphCollection full = load_collection(cfg);

        if (train_cmd->parsed()) {
            MetaState state;
            const MethodMetrics m = run_many(cfg, Method::MiGnn, full, &state);
            write_reports(cfg, {m}, &state);
        } else if (eval_cmd->parsed()) {
            MetaState state = load_checkpoint(checkpoint_path);
            std::vector<SeedResult> per_seed;
            for (std::uint64_t seed : cfg.seeds) {
                auto parts = partition_graphs(full, cfg.ratios, seed);
                const auto episodes = eval_episodes_for_seed(parts[2], state.hp, seed);
                EvalCounts counts = evaluate(parts[2], episodes, state, state.hp);
                per_seed.push_back({counts.accuracy(), counts.micro_f1(), 0.0});
            }
            write_reports(cfg, {aggregate(Method::MiGnn, cfg.seeds, per_seed)}, nullptr);
        } else if (baseline_cmd->parsed()) {
            cfg.method = method_flag;
            cfg.validate();
            MetaState state;
            const MethodMetrics m = run_many(cfg, parse_method(method_flag), full, &state);
            write_reports(cfg, {m}, state.theta.values.empty() ? nullptr : &state);
        } else if (ablate_cmd->parsed()) {
            std::vector<MethodMetrics> rows;
            MetaState state;
            rows.push_back(run_many(cfg, Method::MiGnn, full, &state));
            for (Method m : {Method::TaskOnly, Method::GraphOnly, Method::FinetuneAgf})
                rows.push_back(run_many(cfg, m, full));
            write_reports(cfg, rows, &state);
        } else if (sweep_cmd->parsed()) {
            std::vector<double> values;
            for (const std::string& tok : [&] {
                     std::vector<std::string> out;
                     std::stringstream ss(sweep_values);
                     std::string t;
                     while (std::getline(ss, t, ',')) out.push_back(t);
                     return out;
                 }())
                values.push_back(std::stod(tok));
            const auto rows = sweep(cfg, sweep_param, values, full);
            fs::create_directories(cfg.out_dir);
            write_sweep_csv((fs::path(cfg.out_dir) / "sweep.csv").string(), sweep_param, rows);
            for (const SweepRow& r : rows)
                std::cout << sweep_param << "=" << r.value << ": accuracy "
                          << r.metrics.acc_mean * 100.0 << " +- " << r.metrics.acc_half * 100.0
                          << "\n";
        } else if (case_cmd->parsed()) {
            const std::uint64_t seed = cfg.seeds[0];
            auto parts = partition_graphs(full, cfg.ratios, seed);
            if (shift_delta != 0.0) shift_last_third_features(parts[2], shift_delta);
            EncoderSpec spec = make_spec(cfg, full);
            MetaState mignn_state = train_mignn(parts[0], parts[1], spec, cfg.hp, seed, true);
            MetaState induct_state = train_supervised(parts[0], parts[1], spec, cfg.hp, seed);
            const CaseStudyResult r =
                similarity_case_study(parts[0], parts[2], mignn_state, induct_state, cfg.hp, seed);
            fs::create_directories(cfg.out_dir);
            std::ofstream out(fs::path(cfg.out_dir) / "casestudy.csv", std::ios::binary);
            out << "group,size,transduct,induct,mignn\n";
            const char* names[3] = {"high", "medium", "low"};
            for (std::size_t g = 0; g < 3; ++g) {
                const CaseStudyGroup& row = r.groups[g];
                out << names[g] << "," << row.size << "," << row.transduct_acc << ","
                    << row.induct_acc << "," << row.mignn_acc << "\n";
                std::cout << names[g] << " similarity: transduct " << row.transduct_acc * 100.0
                          << ", induct " << row.induct_acc * 100.0 << ", mignn "
                          << row.mignn_acc * 100.0 << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
