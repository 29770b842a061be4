#ifndef MIGNN_HARNESS_HPP
#define MIGNN_HARNESS_HPP

#include "mignn/baselines.hpp"
#include "mignn/loaders.hpp"

namespace mignn {

struct RunConfig {
    std::string data;            // directory (tud), file (jsonl), unused (synth)
    std::string format = "tud";  // tud | jsonl | synth
    std::string dataset;         // collection name for tud
    std::string arch = "sgc";
    std::string method = "mignn";
    HyperParams hp;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::string out_dir = "runs/out";
    std::array<double, 3> ratios = {0.6, 0.2, 0.2};
    bool standardize = true;
    bool row_normalize = false;
    SynthParams synth;
    std::uint64_t synth_seed = 91;
    int knn_k = 1;  // fixed to 1-NN; validated
    bool sgc_collapsed_flag = false;
    bool alpha_explicit = false;

    void validate() const;
};

// key=value text, '#' comments; values override the current config
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// task-adaptation rate defaults follow the dataset family unless --alpha was given
void apply_dataset_defaults(RunConfig& cfg);

GraphCollection load_collection(const RunConfig& cfg);
EncoderSpec make_spec(const RunConfig& cfg, const GraphCollection& c);

// FNV-1a over the canonical config text, for reproducibility audits
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_canonical_text(const RunConfig& cfg);

struct MethodMetrics {
    Method method;
    std::vector<std::uint64_t> seeds;
    std::vector<SeedResult> per_seed;
    double acc_mean = 0.0, acc_half = 0.0;
    double f1_mean = 0.0, f1_half = 0.0;
    double film_norms = 0.0;  // mean ||gamma||+||beta|| on test graphs (film methods)
};

MethodMetrics aggregate(Method method, const std::vector<std::uint64_t>& seeds,
                        const std::vector<SeedResult>& per_seed);

// one full multi-seed run of a method; repartitions per seed; optionally
// keeps the first seed's trained state
MethodMetrics run_many(const RunConfig& cfg, Method method, const GraphCollection& full,
                       MetaState* first_state = nullptr);

void write_metrics_csv(const std::string& path, const std::vector<MethodMetrics>& rows);
void write_summary_json(const std::string& path, const RunConfig& cfg,
                        const std::vector<MethodMetrics>& rows);

// hyperparameter sweep over lambda or inner_steps; one multi-seed run per value
struct SweepRow {
    double value;
    MethodMetrics metrics;
};
std::vector<SweepRow> sweep(const RunConfig& base, const std::string& param,
                            const std::vector<double>& values, const GraphCollection& full);
void write_sweep_csv(const std::string& path, const std::string& param,
                     const std::vector<SweepRow>& rows);

// ---- similarity case study ---------------------------------------------------

struct CaseStudyGroup {
    std::size_t size = 0;
    double transduct_acc = 0.0;
    double induct_acc = 0.0;
    double mignn_acc = 0.0;
};

struct CaseStudyResult {
    std::array<CaseStudyGroup, 3> groups;  // high, medium, low similarity
};

// Splits test graphs into similarity thirds (remainder to the middle group)
// using the trained attention pooling, then reports per-group accuracy for
// the transductive, inductive and meta-inductive methods.
CaseStudyResult similarity_case_study(GraphCollection& train, GraphCollection& test,
                                      const MetaState& mignn_state,
                                      const MetaState& induct_state, const HyperParams& hp,
                                      std::uint64_t seed);

// Case-study fixture: displaces the node features of the last third of the
// collection's graphs, producing a low-similarity test subpopulation.
void shift_last_third_features(GraphCollection& c, double delta);

}  // namespace mignn

#endif
