#include "mignn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace mignn {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt10(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (format != "tud" && format != "jsonl" && format != "synth")
        throw ConfigError("format must be tud, jsonl or synth");
    if (format == "tud" && dataset.empty()) throw ConfigError("tud format needs a dataset name");
    if (format != "synth" && data.empty()) throw ConfigError("a data path is required");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (knn_k != 1) throw ConfigError("only k=1 nearest neighbors is supported");
    parse_method(method);
    parse_arch(arch);
    hp.validate();
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "data") cfg.data = value;
    else if (key == "format") cfg.format = value;
    else if (key == "dataset") cfg.dataset = value;
    else if (key == "arch") cfg.arch = value;
    else if (key == "method") cfg.method = value;
    else if (key == "out") cfg.out_dir = value;
    else if (key == "alpha") { cfg.hp.inner_lr = std::stod(value); cfg.alpha_explicit = true; }
    else if (key == "steps") cfg.hp.inner_steps = std::stoul(value);
    else if (key == "lambda") cfg.hp.lambda = std::stod(value);
    else if (key == "outer_lr") cfg.hp.outer_lr = std::stod(value);
    else if (key == "batch") cfg.hp.batch_size = std::stoul(value);
    else if (key == "max_epochs") cfg.hp.max_epochs = std::stoul(value);
    else if (key == "patience") cfg.hp.patience = std::stoul(value);
    else if (key == "second_order") cfg.hp.second_order = (value == "on" || value == "1" || value == "true");
    else if (key == "support_fraction") cfg.hp.support_fraction = std::stod(value);
    else if (key == "hyper_hidden") cfg.hp.hyper_hidden = std::stoul(value);
    else if (key == "fixed_episode") cfg.hp.fixed_episode = (value == "on" || value == "1" || value == "true");
    else if (key == "standardize") cfg.standardize = (value == "on" || value == "1" || value == "true");
    else if (key == "row_normalize") cfg.row_normalize = (value == "on" || value == "1" || value == "true");
    else if (key == "sgc_collapsed") cfg.sgc_collapsed_flag = (value == "on" || value == "1" || value == "true");
    else if (key == "seeds") {
        cfg.seeds.clear();
        for (const std::string& tok : split_list(value)) cfg.seeds.push_back(std::stoull(tok));
    }
    else if (key == "synth_graphs") cfg.synth.n_graphs = std::stoul(value);
    else if (key == "synth_nodes_min") cfg.synth.nodes_min = std::stoul(value);
    else if (key == "synth_nodes_max") cfg.synth.nodes_max = std::stoul(value);
    else if (key == "synth_dim") cfg.synth.feature_dim = std::stoul(value);
    else if (key == "synth_classes") cfg.synth.num_categories = std::stoul(value);
    else if (key == "synth_homophily") cfg.synth.homophily = std::stod(value);
    else if (key == "synth_seed") cfg.synth_seed = std::stoull(value);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + " line " + std::to_string(line_no) + ": expected key=value");
        try {
            apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::exception& e) {
            throw ConfigError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void apply_dataset_defaults(RunConfig& cfg) {
    if (cfg.alpha_explicit) return;
    // task-adaptation rate: 0.005 for the molecule collections, 0.5 elsewhere
    if (cfg.format == "tud" && (cfg.dataset == "COX2" || cfg.dataset == "DHFR"))
        cfg.hp.inner_lr = 0.005;
    else
        cfg.hp.inner_lr = 0.5;
}

GraphCollection load_collection(const RunConfig& cfg) {
    if (cfg.format == "tud") {
        TudOptions opt;
        opt.standardize = cfg.standardize;
        opt.row_normalize = cfg.row_normalize;
        return load_tudataset(cfg.data, cfg.dataset, opt);
    }
    if (cfg.format == "jsonl") return load_jsonl(cfg.data);
    return synth_collection(cfg.synth, cfg.synth_seed);
}

EncoderSpec make_spec(const RunConfig& cfg, const GraphCollection& c) {
    EncoderSpec spec;
    spec.arch = parse_arch(cfg.arch);
    spec.input_dim = c.feature_dim;
    spec.hidden_dim = 16;
    spec.output_dim = c.num_categories;
    spec.propagation_steps = 2;
    spec.sgc_collapsed = cfg.sgc_collapsed_flag;
    return spec;
}

std::string config_canonical_text(const RunConfig& cfg) {
    std::ostringstream o;
    o << "format=" << cfg.format << "\ndata=" << cfg.data << "\ndataset=" << cfg.dataset
      << "\narch=" << cfg.arch << "\nmethod=" << cfg.method
      << "\nalpha=" << fmt(cfg.hp.inner_lr) << "\nsteps=" << cfg.hp.inner_steps
      << "\nlambda=" << fmt(cfg.hp.lambda) << "\nouter_lr=" << fmt(cfg.hp.outer_lr)
      << "\nbatch=" << cfg.hp.batch_size << "\nmax_epochs=" << cfg.hp.max_epochs
      << "\npatience=" << cfg.hp.patience << "\nsecond_order=" << (cfg.hp.second_order ? 1 : 0)
      << "\nsupport_fraction=" << fmt(cfg.hp.support_fraction)
      << "\nhyper_hidden=" << cfg.hp.hyper_hidden
      << "\nfixed_episode=" << (cfg.hp.fixed_episode ? 1 : 0)
      << "\nstandardize=" << (cfg.standardize ? 1 : 0)
      << "\nrow_normalize=" << (cfg.row_normalize ? 1 : 0)
      << "\nsgc_collapsed=" << (cfg.sgc_collapsed_flag ? 1 : 0) << "\nseeds=";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        o << (i ? "," : "") << cfg.seeds[i];
    o << "\n";
    return o.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = config_canonical_text(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

MethodMetrics aggregate(Method method, const std::vector<std::uint64_t>& seeds,
                        const std::vector<SeedResult>& per_seed) {
    MethodMetrics m;
    m.method = method;
    m.seeds = seeds;
    m.per_seed = per_seed;
    std::vector<double> accs, f1s;
    for (const SeedResult& r : per_seed) {
        accs.push_back(r.accuracy);
        f1s.push_back(r.micro_f1);
    }
    if (per_seed.size() >= 2) {
        std::tie(m.acc_mean, m.acc_half) = confidence_interval(accs);
        std::tie(m.f1_mean, m.f1_half) = confidence_interval(f1s);
    } else if (per_seed.size() == 1) {
        m.acc_mean = accs[0];
        m.f1_mean = f1s[0];
    }
    return m;
}

MethodMetrics run_many(const RunConfig& cfg, Method method, const GraphCollection& full,
                       MetaState* first_state) {
    std::vector<SeedResult> results;
    double film_norm_sum = 0.0;
    std::size_t film_norm_count = 0;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const std::uint64_t seed = cfg.seeds[i];
        auto parts = partition_graphs(full, cfg.ratios, seed);
        EncoderSpec spec = make_spec(cfg, full);
        MetaState state;
        results.push_back(
            run_method(method, parts[0], parts[1], parts[2], spec, cfg.hp, seed, &state));
        if (state.use_film && !state.theta.values.empty()) {
            film_norm_sum += mean_film_norms(state, parts[2]);
            ++film_norm_count;
        }
        if (i == 0 && first_state != nullptr) *first_state = state;
    }
    MethodMetrics m = aggregate(method, cfg.seeds, results);
    if (film_norm_count > 0) m.film_norms = film_norm_sum / static_cast<double>(film_norm_count);
    return m;
}

void write_metrics_csv(const std::string& path, const std::vector<MethodMetrics>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!out) throw LoadError("cannot write " + path);
    out << "method,seed,accuracy,micro_f1\n";
    for (const MethodMetrics& m : rows)
        for (std::size_t i = 0; i < m.per_seed.size(); ++i)
            out << method_name(m.method) << "," << m.seeds[i] << ","
                << fmt10(m.per_seed[i].accuracy) << "," << fmt10(m.per_seed[i].micro_f1) << "\n";
}

void write_summary_json(const std::string& path, const RunConfig& cfg,
                        const std::vector<MethodMetrics>& rows) {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash(cfg);
    j["config"] = nlohmann::ordered_json::object();
    {
        std::istringstream text(config_canonical_text(cfg));
        std::string line;
        while (std::getline(text, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) j["config"][line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    j["seeds"] = cfg.seeds;
    j["methods"] = nlohmann::ordered_json::array();
    for (const MethodMetrics& m : rows) {
        nlohmann::ordered_json row;
        row["method"] = method_name(m.method);
        row["accuracy_mean"] = m.acc_mean;
        row["accuracy_ci95_half_width"] = m.acc_half;
        row["micro_f1_mean"] = m.f1_mean;
        row["micro_f1_ci95_half_width"] = m.f1_half;
        row["film_norms_mean"] = m.film_norms;
        double runtime = 0.0;
        for (const SeedResult& r : m.per_seed) runtime += r.runtime_sec;
        row["runtime_sec_total"] = runtime;
        nlohmann::ordered_json per_seed = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < m.per_seed.size(); ++i) {
            per_seed.push_back({{"seed", m.seeds[i]},
                                {"accuracy", m.per_seed[i].accuracy},
                                {"micro_f1", m.per_seed[i].micro_f1}});
        }
        row["per_seed"] = per_seed;
        j["methods"].push_back(row);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::string& param,
                            const std::vector<double>& values, const GraphCollection& full) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (param != "lambda" && param != "inner_steps")
        throw ConfigError("sweep parameter must be lambda or inner_steps");
    std::vector<SweepRow> rows;
    for (double v : values) {
        RunConfig cfg = base;
        if (param == "lambda")
            cfg.hp.lambda = v;
        else
            cfg.hp.inner_steps = static_cast<std::size_t>(v);
        rows.push_back({v, run_many(cfg, parse_method(cfg.method), full)});
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::string& param,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path);
    out << param << ",accuracy_mean,accuracy_ci95,micro_f1_mean,micro_f1_ci95,film_norms\n";
    for (const SweepRow& r : rows)
        out << fmt10(r.value) << "," << fmt10(r.metrics.acc_mean) << ","
            << fmt10(r.metrics.acc_half) << "," << fmt10(r.metrics.f1_mean) << ","
            << fmt10(r.metrics.f1_half) << "," << fmt10(r.metrics.film_norms) << "\n";
}

CaseStudyResult similarity_case_study(GraphCollection& train, GraphCollection& test,
                                      const MetaState& mignn_state,
                                      const MetaState& induct_state, const HyperParams& hp,
                                      std::uint64_t seed) {
    const std::size_t n = test.graphs.size();
    if (n < 3) throw ContractError("case study needs at least 3 test graphs");

    // graph embeddings under the trained attention pooling
    const auto embed = [&](Graph& g) {
        Tape tape;
        Tape::Activate scope(tape);
        PriorLeaves leaves = make_prior_leaves(tape, mignn_state.phi);
        return graph_embedding(g, leaves.w_att).detach();
    };
    std::vector<Tensor> train_embeds;
    for (Graph& g : train.graphs) train_embeds.push_back(embed(g));

    std::vector<double> similarity(n);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor e = embed(test.graphs[i]);
        double total = 0.0;
        for (const Tensor& t : train_embeds) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < e.numel(); ++j) {
                const double diff = e[j] - t[j];
                d2 += diff * diff;
            }
            total += -std::sqrt(d2);
        }
        similarity[i] = total / static_cast<double>(train.graphs.size());
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return similarity[a] > similarity[b]; });

    const std::size_t third = n / 3;  // remainder stays in the middle group
    std::array<std::vector<std::size_t>, 3> groups;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t g = pos < third ? 0 : (pos < n - third ? 1 : 2);
        groups[g].push_back(order[pos]);
    }

    const std::vector<EvalEpisode> episodes = eval_episodes_for_seed(test, hp, seed);

    HyperParams frozen = hp;
    frozen.inner_steps = 0;
    const auto group_counts = [&](const std::vector<std::size_t>& members,
                                  const Predictor& predictor) {
        std::vector<EvalEpisode> subset;
        for (const EvalEpisode& ep : episodes)
            if (std::find(members.begin(), members.end(), ep.graph_index) != members.end())
                subset.push_back(ep);
        return evaluate_with(test, subset, predictor);
    };

    CaseStudyResult result;
    for (std::size_t g = 0; g < 3; ++g) {
        CaseStudyGroup& row = result.groups[g];
        row.size = groups[g].size();
        row.mignn_acc = group_counts(groups[g], [&](std::size_t, Graph& gr,
                                                    const EpisodeSplit& split) {
                            return predict(gr, split, mignn_state, hp);
                        }).accuracy();
        row.induct_acc = group_counts(groups[g], [&](std::size_t, Graph& gr,
                                                     const EpisodeSplit& split) {
                             return predict(gr, split, induct_state, frozen);
                         }).accuracy();
        row.transduct_acc =
            group_counts(groups[g], [&](std::size_t gi, Graph& gr, const EpisodeSplit& split) {
                ParamVector theta =
                    train_transduct(gr, split.support, mignn_state.spec, hp,
                                    Rng(seed).fork(100 + gi).next_u64(), kTransductEpochs);
                Tensor logits = gather_rows(
                    forward_logits(mignn_state.spec, prepare_graph(mignn_state.spec, gr),
                                   Tensor({theta.dim()}, theta.values)),
                    split.query);
                Predictions p;
                if (test.multi_label)
                    p.decisions = threshold_rows(logits);
                else
                    p.categories = argmax_rows(logits);
                return p;
            }).accuracy();
    }
    return result;
}

void shift_last_third_features(GraphCollection& c, double delta) {
    const std::size_t n = c.graphs.size();
    const std::size_t third = n / 3;
    for (std::size_t i = n - third; i < n; ++i) {
        Graph& g = c.graphs[i];
        std::vector<double> shifted = g.features.data();
        for (double& v : shifted) v += delta;
        g.features = Tensor(g.features.shape(), std::move(shifted));
        g.cached_adjacency.reset();
        g.cached_neighbor_mean.reset();
    }
}

}  // namespace mignn
