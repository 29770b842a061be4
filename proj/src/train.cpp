#include "mignn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mignn {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct EpisodePlan {
    std::vector<EpisodeSplit> fixed;  // aligned with graphs; empty when resampling
};

struct ValReport {
    double objective = std::numeric_limits<double>::quiet_NaN();
    double query_loss = std::numeric_limits<double>::quiet_NaN();
    double accuracy = std::numeric_limits<double>::quiet_NaN();
};

double checked_value(const Tensor& t, std::size_t epoch, std::size_t graph_idx) {
    const double v = t.value();
    if (!std::isfinite(v))
        throw TrainError("objective diverged (non-finite) at epoch " + std::to_string(epoch) +
                         ", graph " + std::to_string(graph_idx));
    return v;
}

// shared training skeleton: per-graph objective, summed over a batch, one
// Adam step; the kept state and the patience counter follow validation
// accuracy on fixed episodes
template <typename ObjectiveFn, typename ValFn>
void optimize(MetaState& state, std::size_t n_train, const HyperParams& hp, Rng& shuffle_rng,
              ObjectiveFn&& objective, ValFn&& validate) {
    ParamBundle params = state.trainables();
    state.opt.m.assign(params.total(), 0.0);
    state.opt.v.assign(params.total(), 0.0);
    state.opt.step = 0;

    ParamVector best_theta = state.theta;
    GraphPrior best_phi = state.phi;
    double best_acc = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    std::size_t bad_epochs = 0;

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_obj = 0.0;

        for (std::size_t start = 0; start < n_train; start += hp.batch_size) {
            const std::size_t end = std::min(start + hp.batch_size, n_train);
            std::vector<std::vector<double>> grads(params.entries.size());
            for (std::size_t a = 0; a < params.entries.size(); ++a)
                grads[a].assign(params.entries[a].values->size(), 0.0);

            for (std::size_t pos = start; pos < end; ++pos)
                epoch_obj += objective(order[pos], epoch, grads);

            adam_step(state.opt, params, grads, hp.outer_lr);
        }

        const ValReport report = validate();
        state.log.push_back({epoch, epoch_obj / static_cast<double>(n_train), report.objective,
                             report.query_loss, report.accuracy});

        if (std::isfinite(report.accuracy)) {
            if (report.accuracy > best_acc) {
                best_acc = report.accuracy;
                best_theta = state.theta;
                best_phi = state.phi;
                have_best = true;
                bad_epochs = 0;
            } else if (++bad_epochs >= hp.patience) {
                break;
            }
        }
    }

    if (have_best) {
        state.theta = best_theta;
        state.phi = best_phi;
    }
}

void accumulate(std::vector<double>& into, const Tensor& grad) {
    const auto& g = grad.data();
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += g[i];
}

}  // namespace

std::size_t ParamBundle::total() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.values->size();
    return n;
}

void adam_step(AdamState& opt, const ParamBundle& params,
               const std::vector<std::vector<double>>& grads, double lr) {
    ++opt.step;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(opt.step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(opt.step));
    std::size_t off = 0;
    for (std::size_t a = 0; a < params.entries.size(); ++a) {
        std::vector<double>& p = *params.entries[a].values;
        const std::vector<double>& g = grads[a];
        for (std::size_t i = 0; i < p.size(); ++i) {
            double& m = opt.m[off + i];
            double& v = opt.v[off + i];
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g[i];
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g[i] * g[i];
            p[i] -= lr * (m / c1) / (std::sqrt(v / c2) + kAdamEps);
        }
        off += p.size();
    }
}

ParamBundle MetaState::trainables() {
    ParamBundle b;
    b.entries.push_back({"theta", &theta.values});
    if (use_film)
        for (const auto& a : phi.arrays()) b.entries.push_back({a.name, a.values});
    return b;
}

MetaState train_mignn(GraphCollection& train_graphs, GraphCollection& val_graphs,
                      const EncoderSpec& spec, const HyperParams& hp, std::uint64_t seed,
                      bool use_film) {
    hp.validate();
    if (train_graphs.graphs.empty()) throw ContractError("training collection is empty");

    MetaState state;
    state.spec = spec;
    state.hp = hp;
    state.use_film = use_film;
    state.multi_label = train_graphs.multi_label;
    state.seed = seed;

    Rng root(seed);
    Rng init_rng = root.fork(1);
    Rng episode_rng = root.fork(2);
    Rng shuffle_rng = root.fork(3);
    Rng val_rng = root.fork(4);

    state.theta = init_params(spec, init_rng);
    state.phi = GraphPrior::init(spec.input_dim, hp.hyper_hidden, state.theta.dim(), init_rng);

    const std::size_t n_train = train_graphs.graphs.size();
    std::vector<PreparedGraph> train_prep, val_prep;
    for (Graph& g : train_graphs.graphs) {
        if (g.labeled_nodes().size() < 2)
            throw ContractError("every training graph needs at least 2 labeled nodes");
        train_prep.push_back(prepare_graph(spec, g));
    }
    for (Graph& g : val_graphs.graphs) val_prep.push_back(prepare_graph(spec, g));

    EpisodePlan plan;
    if (hp.fixed_episode) {
        for (Graph& g : train_graphs.graphs)
            plan.fixed.push_back(sample_episode(g, hp.support_fraction, episode_rng));
    }

    // validation episodes are drawn once so early stopping compares like with like
    std::vector<std::pair<std::size_t, EpisodeSplit>> val_episodes;
    for (std::size_t i = 0; i < val_graphs.graphs.size(); ++i) {
        if (val_graphs.graphs[i].labeled_nodes().size() < 2) continue;
        val_episodes.push_back({i, sample_episode(val_graphs.graphs[i], hp.support_fraction, val_rng)});
    }

    const bool multi = train_graphs.multi_label;
    const std::size_t ncat = train_graphs.num_categories;

    const auto objective = [&](std::size_t gi, std::size_t epoch,
                               std::vector<std::vector<double>>& grads) {
        Graph& g = train_graphs.graphs[gi];
        const EpisodeSplit split =
            hp.fixed_episode ? plan.fixed[gi] : sample_episode(g, hp.support_fraction, episode_rng);

        Tape tape;
        Tape::Activate scope(tape);
        Tensor theta_leaf = tape.leaf({state.theta.dim()}, state.theta.values);
        PriorLeaves leaves;
        if (use_film) leaves = make_prior_leaves(tape, state.phi);

        Tensor obj = episode_objective(spec, train_prep[gi], g, split, theta_leaf,
                                       use_film ? &leaves : nullptr, hp, multi, ncat);
        const double value = checked_value(obj, epoch, gi);

        std::vector<Tensor> wrt = {theta_leaf};
        if (use_film)
            for (const Tensor& t : leaves.all()) wrt.push_back(t);
        const std::vector<Tensor> g_out = backward(obj, wrt);
        for (std::size_t a = 0; a < g_out.size(); ++a) accumulate(grads[a], g_out[a]);
        return value;
    };

    HyperParams val_hp = hp;
    val_hp.second_order = false;  // same values, cheaper tape
    const auto validate = [&]() -> ValReport {
        if (val_episodes.empty()) return {};
        ValReport report;
        double obj_sum = 0.0, query_sum = 0.0;
        std::size_t correct = 0, total = 0;
        for (const auto& [gi, split] : val_episodes) {
            Graph& g = val_graphs.graphs[gi];
            Tape tape;
            Tape::Activate scope(tape);
            Tensor theta_leaf = tape.leaf({state.theta.dim()}, state.theta.values);
            PriorLeaves leaves;
            if (use_film) leaves = make_prior_leaves(tape, state.phi);
            EpisodeTrace trace;
            Tensor obj = episode_objective(spec, val_prep[gi], g, split, theta_leaf,
                                           use_film ? &leaves : nullptr, val_hp, multi, ncat,
                                           &trace);
            obj_sum += obj.value();
            query_sum += trace.query_loss;
            const Predictions pred = predict(g, split, state, val_hp);
            for (std::size_t r = 0; r < split.query.size(); ++r) {
                if (multi) {
                    const auto& truth = g.label_bits[split.query[r]];
                    for (std::size_t c = 0; c < ncat; ++c) {
                        ++total;
                        if ((pred.decisions[r][c] != 0) == (truth[c] != 0)) ++correct;
                    }
                } else {
                    ++total;
                    if (pred.categories[r] == g.label_index[split.query[r]]) ++correct;
                }
            }
        }
        const double n = static_cast<double>(val_episodes.size());
        report.objective = obj_sum / n;
        report.query_loss = query_sum / n;
        report.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / total;
        return report;
    };

    optimize(state, n_train, hp, shuffle_rng, objective, validate);
    return state;
}

MetaState train_supervised(GraphCollection& train_graphs, GraphCollection& val_graphs,
                           const EncoderSpec& spec, const HyperParams& hp, std::uint64_t seed) {
    hp.validate();
    if (train_graphs.graphs.empty()) throw ContractError("training collection is empty");

    MetaState state;
    state.spec = spec;
    state.hp = hp;
    state.use_film = false;
    state.multi_label = train_graphs.multi_label;
    state.seed = seed;

    Rng root(seed);
    Rng init_rng = root.fork(1);
    Rng shuffle_rng = root.fork(3);

    state.theta = init_params(spec, init_rng);
    state.phi = GraphPrior::init(spec.input_dim, hp.hyper_hidden, state.theta.dim(), init_rng);

    const std::size_t n_train = train_graphs.graphs.size();
    std::vector<PreparedGraph> train_prep, val_prep;
    std::vector<std::vector<std::size_t>> train_nodes, val_nodes;
    for (Graph& g : train_graphs.graphs) {
        train_prep.push_back(prepare_graph(spec, g));
        train_nodes.push_back(g.labeled_nodes());
    }
    for (Graph& g : val_graphs.graphs) {
        val_prep.push_back(prepare_graph(spec, g));
        val_nodes.push_back(g.labeled_nodes());
    }

    const bool multi = train_graphs.multi_label;
    const std::size_t ncat = train_graphs.num_categories;

    const auto objective = [&](std::size_t gi, std::size_t epoch,
                               std::vector<std::vector<double>>& grads) {
        if (train_nodes[gi].empty()) return 0.0;
        Tape tape;
        Tape::Activate scope(tape);
        Tensor theta_leaf = tape.leaf({state.theta.dim()}, state.theta.values);
        Tensor loss = loss_on_nodes(spec, train_prep[gi], train_graphs.graphs[gi],
                                    train_nodes[gi], theta_leaf, multi, ncat);
        const double value = checked_value(loss, epoch, gi);
        accumulate(grads[0], backward(loss, {theta_leaf})[0]);
        return value;
    };

    const auto validate = [&]() -> ValReport {
        ValReport report;
        double sum = 0.0;
        std::size_t counted = 0, correct = 0, total = 0;
        for (std::size_t gi = 0; gi < val_graphs.graphs.size(); ++gi) {
            if (val_nodes[gi].empty()) continue;
            Tensor theta_const({state.theta.dim()}, state.theta.values);
            Tensor logits = forward_logits(spec, val_prep[gi], theta_const);
            Tensor rows = gather_rows(logits, val_nodes[gi]);
            if (multi) {
                Tensor targets = binary_targets(val_graphs.graphs[gi], val_nodes[gi], ncat);
                sum += sigmoid_bce(rows, targets).value();
                const auto bits = threshold_rows(rows);
                for (std::size_t r = 0; r < val_nodes[gi].size(); ++r)
                    for (std::size_t c = 0; c < ncat; ++c) {
                        ++total;
                        if ((bits[r][c] != 0) ==
                            (val_graphs.graphs[gi].label_bits[val_nodes[gi][r]][c] != 0))
                            ++correct;
                    }
            } else {
                Tensor targets = one_hot_targets(val_graphs.graphs[gi], val_nodes[gi], ncat);
                sum += softmax_cross_entropy_rows(rows, targets).value();
                const auto cats = argmax_rows(rows);
                for (std::size_t r = 0; r < val_nodes[gi].size(); ++r) {
                    ++total;
                    if (cats[r] == val_graphs.graphs[gi].label_index[val_nodes[gi][r]]) ++correct;
                }
            }
            ++counted;
        }
        if (counted == 0) return report;
        report.objective = sum / static_cast<double>(counted);
        report.query_loss = report.objective;
        report.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / total;
        return report;
    };

    optimize(state, n_train, hp, shuffle_rng, objective, validate);
    return state;
}

ParamVector train_transduct(Graph& g, const std::vector<std::size_t>& support,
                            const EncoderSpec& spec, const HyperParams& hp, std::uint64_t seed,
                            std::size_t epochs) {
    if (support.empty()) throw ContractError("transductive training needs support nodes");
    Rng init_rng = Rng(seed).fork(1);
    ParamVector theta = init_params(spec, init_rng);
    PreparedGraph prep = prepare_graph(spec, g);

    AdamState opt;
    opt.m.assign(theta.dim(), 0.0);
    opt.v.assign(theta.dim(), 0.0);

    ParamBundle bundle;
    bundle.entries.push_back({"theta", &theta.values});

    const bool multi = !g.label_bits.empty();
    const std::size_t ncat = spec.output_dim;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        Tape tape;
        Tape::Activate scope(tape);
        Tensor theta_leaf = tape.leaf({theta.dim()}, theta.values);
        Tensor loss = loss_on_nodes(spec, prep, g, support, theta_leaf, multi, ncat);
        checked_value(loss, epoch, 0);
        std::vector<std::vector<double>> grads(1);
        grads[0] = backward(loss, {theta_leaf})[0].data();
        adam_step(opt, bundle, grads, hp.outer_lr);
    }
    return theta;
}

Predictions predict(Graph& g, const EpisodeSplit& split, const MetaState& state,
                    const HyperParams& hp) {
    if (split.support.empty()) throw ContractError("predict: support set is empty");

    PreparedGraph prep = prepare_graph(state.spec, g);
    Tape tape;
    Tape::Activate scope(tape);
    Tensor theta_leaf = tape.leaf({state.theta.dim()}, state.theta.values);

    HyperParams local = hp;
    local.second_order = false;  // adaptation values are identical, tape is smaller

    Tensor theta_i = theta_leaf;
    if (state.use_film) {
        PriorLeaves leaves = make_prior_leaves(tape, state.phi);
        FilmFactors factors = film(graph_embedding(g, leaves.w_att), leaves, local.leaky_slope);
        theta_i = graph_adapt(theta_leaf, factors);
    }
    Tensor adapted = task_adapt(state.spec, prep, g, split, theta_i, local, state.multi_label,
                                state.spec.output_dim);
    Tensor logits = gather_rows(forward_logits(state.spec, prep, adapted), split.query);

    Predictions out;
    if (state.multi_label)
        out.decisions = threshold_rows(logits);
    else
        out.categories = argmax_rows(logits);
    return out;
}

// ---- checkpoint io ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'I', 'G', 'N', 'N', 'C', 'P', '1'};

void write_u32(std::ostream& o, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    o.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& o, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    o.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& o, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    write_u64(o, v);
}

void write_string(std::ostream& o, const std::string& s) {
    write_u32(o, static_cast<std::uint32_t>(s.size()));
    o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_array(std::ostream& o, const std::string& name, const std::vector<double>& v,
                 std::vector<std::uint64_t> dims) {
    write_string(o, name);
    write_u32(o, static_cast<std::uint32_t>(dims.size()));
    for (std::uint64_t d : dims) write_u64(o, d);
    for (double x : v) write_f64(o, x);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) {
    const std::uint64_t v = read_u64(in);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

std::string read_string(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string config_text(const MetaState& s) {
    std::ostringstream o;
    o << "arch=" << arch_name(s.spec.arch) << "\n";
    o << "input_dim=" << s.spec.input_dim << "\n";
    o << "hidden_dim=" << s.spec.hidden_dim << "\n";
    o << "output_dim=" << s.spec.output_dim << "\n";
    o << "propagation_steps=" << s.spec.propagation_steps << "\n";
    o << "sgc_collapsed=" << (s.spec.sgc_collapsed ? 1 : 0) << "\n";
    o << "biases=" << (s.spec.biases ? 1 : 0) << "\n";
    o << "leaky_slope=" << fmt_double(s.spec.leaky_slope) << "\n";
    o << "inner_lr=" << fmt_double(s.hp.inner_lr) << "\n";
    o << "inner_steps=" << s.hp.inner_steps << "\n";
    o << "lambda=" << fmt_double(s.hp.lambda) << "\n";
    o << "outer_lr=" << fmt_double(s.hp.outer_lr) << "\n";
    o << "batch_size=" << s.hp.batch_size << "\n";
    o << "max_epochs=" << s.hp.max_epochs << "\n";
    o << "patience=" << s.hp.patience << "\n";
    o << "second_order=" << (s.hp.second_order ? 1 : 0) << "\n";
    o << "support_fraction=" << fmt_double(s.hp.support_fraction) << "\n";
    o << "hyper_hidden=" << s.hp.hyper_hidden << "\n";
    o << "fixed_episode=" << (s.hp.fixed_episode ? 1 : 0) << "\n";
    o << "use_film=" << (s.use_film ? 1 : 0) << "\n";
    o << "multi_label=" << (s.multi_label ? 1 : 0) << "\n";
    return o.str();
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace

void save_checkpoint(const std::string& path, const MetaState& state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path);
    out.write(kMagic, 8);
    write_u32(out, 1);  // version
    write_u64(out, state.seed);
    write_string(out, config_text(state));

    MetaState& s = const_cast<MetaState&>(state);
    std::vector<std::pair<std::string, std::pair<const std::vector<double>*,
                                                 std::vector<std::uint64_t>>>> arrays;
    arrays.push_back({"theta", {&s.theta.values, {s.theta.dim()}}});
    for (const auto& a : s.phi.arrays())
        arrays.push_back({a.name, {a.values, {a.shape[0], a.shape[1]}}});
    arrays.push_back({"adam_m", {&s.opt.m, {s.opt.m.size()}}});
    arrays.push_back({"adam_v", {&s.opt.v, {s.opt.v.size()}}});
    const std::vector<double> step = {static_cast<double>(s.opt.step)};
    write_u32(out, static_cast<std::uint32_t>(arrays.size() + 1));
    for (const auto& [name, av] : arrays) write_array(out, name, *av.first, av.second);
    write_array(out, "adam_step", step, {1});
    if (!out) throw LoadError("failed writing " + path);
}

MetaState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw LoadError(path + " is not a checkpoint file");
    const std::uint32_t version = read_u32(in);
    if (version != 1) throw LoadError("unsupported checkpoint version");

    MetaState s;
    s.seed = read_u64(in);
    const auto kv = parse_kv(read_string(in));
    const auto get = [&](const char* k) {
        const auto it = kv.find(k);
        if (it == kv.end()) throw LoadError(std::string("checkpoint missing key ") + k);
        return it->second;
    };
    s.spec.arch = parse_arch(get("arch"));
    s.spec.input_dim = std::stoul(get("input_dim"));
    s.spec.hidden_dim = std::stoul(get("hidden_dim"));
    s.spec.output_dim = std::stoul(get("output_dim"));
    s.spec.propagation_steps = std::stoul(get("propagation_steps"));
    s.spec.sgc_collapsed = get("sgc_collapsed") == "1";
    s.spec.biases = get("biases") == "1";
    s.spec.leaky_slope = std::stod(get("leaky_slope"));
    s.hp.inner_lr = std::stod(get("inner_lr"));
    s.hp.inner_steps = std::stoul(get("inner_steps"));
    s.hp.lambda = std::stod(get("lambda"));
    s.hp.outer_lr = std::stod(get("outer_lr"));
    s.hp.batch_size = std::stoul(get("batch_size"));
    s.hp.max_epochs = std::stoul(get("max_epochs"));
    s.hp.patience = std::stoul(get("patience"));
    s.hp.second_order = get("second_order") == "1";
    s.hp.support_fraction = std::stod(get("support_fraction"));
    s.hp.hyper_hidden = std::stoul(get("hyper_hidden"));
    s.hp.fixed_episode = get("fixed_episode") == "1";
    s.hp.leaky_slope = s.spec.leaky_slope;
    s.use_film = get("use_film") == "1";
    s.multi_label = get("multi_label") == "1";

    s.theta.arch = s.spec.arch;
    s.theta.shapes = s.spec.param_shapes();
    s.phi.input_dim = s.spec.input_dim;
    s.phi.hidden_dim = s.hp.hyper_hidden;
    s.phi.param_dim = s.spec.param_dim();

    const std::uint32_t n_arrays = read_u32(in);
    std::map<std::string, std::vector<double>> loaded;
    for (std::uint32_t a = 0; a < n_arrays; ++a) {
        const std::string name = read_string(in);
        const std::uint32_t ndim = read_u32(in);
        std::size_t numel = 1;
        for (std::uint32_t i = 0; i < ndim; ++i) numel *= read_u64(in);
        std::vector<double> v(numel);
        for (double& x : v) x = read_f64(in);
        loaded[name] = std::move(v);
    }
    if (!in) throw LoadError("truncated checkpoint " + path);

    const auto take = [&](const char* name) {
        const auto it = loaded.find(name);
        if (it == loaded.end()) throw LoadError(std::string("checkpoint missing array ") + name);
        return it->second;
    };
    s.theta.values = take("theta");
    if (s.theta.dim() != s.spec.param_dim())
        throw LoadError("checkpoint theta length does not match the encoder spec");
    for (auto& a : s.phi.arrays()) *a.values = take(a.name);
    s.opt.m = take("adam_m");
    s.opt.v = take("adam_v");
    s.opt.step = static_cast<std::size_t>(take("adam_step")[0]);
    return s;
}

}  // namespace mignn
