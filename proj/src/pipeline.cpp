#include "cascnet/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"
#include "cascnet/rng.hpp"

#include "json.hpp"

namespace fs = std::filesystem;

namespace cascnet {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t joint_key(const NodePair& a, const NodePair& d) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.u)) << 48) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.v)) << 32) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(d.u)) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(d.v));
}

} // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("config." + field + ": " + why);
    };
    if (graph_model != "erdos-renyi" && graph_model != "barabasi-albert" &&
        graph_model != "watts-strogatz")
        fail("graph_model", "unknown model \"" + graph_model + "\"");
    if (nodes < 2) fail("nodes", "must be >= 2");
    if (cascade != "threshold" && cascade != "shortest-path")
        fail("cascade", "must be threshold or shortest-path");
    if (load_mode != "single-path" && load_mode != "all-paths-fractional")
        fail("load_mode", "must be single-path or all-paths-fractional");
    if (pool_size < 2 || pool_size > nodes) fail("pool_size", "must lie in [2, nodes]");
    if (subspaces < 0) fail("subspaces", "must be >= 0");
    if (trials < 0) fail("trials", "must be >= 0");
    if (cap_factor < 0.0) fail("cap_factor", "must be >= 0");
    if (embed_dim < 1 || hidden_dim < 1 || hidden_layers < 1)
        fail("embed_dim/hidden_dim/hidden_layers", "must be positive");
    if (epochs < 1 || batch_size < 1) fail("epochs/batch_size", "must be positive");
    if (learning_rate < 0.0) fail("learning_rate", "must be >= 0");
    if (optimizer != "adam" && optimizer != "sgd") fail("optimizer", "must be adam or sgd");
    if (cfda_weight < 0.0 || cfda_weight > 1.0) fail("cfda_weight", "must lie in [0, 1]");
    if (val_size < 1) fail("val_size", "must be positive");
    if (samples_per_cell < 1) fail("samples_per_cell", "must be positive");
    if (arm_pool < 1) fail("arm_pool", "must be positive");
    if (eval_plays < 1 || selfplay_plays < 1) fail("eval_plays/selfplay_plays", "positive");
    if (ne_budget < 1) fail("ne_budget", "must be positive");
    if (out_dir.empty()) fail("out_dir", "must not be empty");
    const std::int64_t grid = static_cast<std::int64_t>(pool_size) * (pool_size - 1) / 2;
    if (trials > grid * grid) fail("trials", "exceeds (pool_size choose 2)^2");
}

CascadeKind ExperimentConfig::cascade_kind() const {
    return cascade == "threshold" ? CascadeKind::Threshold : CascadeKind::ShortestPath;
}

LoadMode ExperimentConfig::load_mode_enum() const {
    return load_mode == "single-path" ? LoadMode::SinglePath : LoadMode::AllPathsFractional;
}

int ExperimentConfig::resolved_subspaces() const { return subspaces > 0 ? subspaces : 3 * nodes; }

std::int64_t ExperimentConfig::resolved_trials() const {
    const std::int64_t grid = static_cast<std::int64_t>(pool_size) * (pool_size - 1) / 2;
    return trials > 0 ? trials : grid * grid;
}

std::int64_t ExperimentConfig::resolved_pulls() const {
    if (pulls > 0) return pulls;
    if (nodes <= 25) return 50000;
    if (nodes <= 100) return 200000;
    return 500000;
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.learning_rate = learning_rate;
    tc.optimizer = optimizer == "adam" ? Optimizer::Adam : Optimizer::SGD;
    tc.seed = train_seed;
    tc.cfda_weight = cfda_weight;
    tc.threads = threads;
    return tc;
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["graph"] = {{"model", c.graph_model}, {"nodes", c.nodes},     {"er_p", c.er_p},
                  {"ba_m", c.ba_m},         {"ws_k", c.ws_k},       {"ws_beta", c.ws_beta},
                  {"seed", c.graph_seed}};
    j["cascade"] = c.cascade;
    j["load_mode"] = c.load_mode;
    j["features"] = {{"alpha", c.capacity_alpha}, {"c0", c.capacity_c0}, {"seed", c.feature_seed}};
    j["data"] = {{"pool_size", c.pool_size},
                 {"subspaces", c.subspaces},
                 {"trials", c.trials},
                 {"cap_factor", c.cap_factor},
                 {"seed", c.data_seed}};
    j["train"] = {{"embed_dim", c.embed_dim},         {"hidden_dim", c.hidden_dim},
                  {"hidden_layers", c.hidden_layers}, {"epochs", c.epochs},
                  {"batch_size", c.batch_size},       {"learning_rate", c.learning_rate},
                  {"optimizer", c.optimizer},         {"cfda_weight", c.cfda_weight},
                  {"seed", c.train_seed}};
    j["eval"] = {{"val_size", c.val_size},
                 {"samples_per_cell", c.samples_per_cell},
                 {"pulls", c.pulls},
                 {"arm_pool", c.arm_pool},
                 {"ucb_c", c.ucb_c},
                 {"eval_plays", c.eval_plays},
                 {"selfplay_plays", c.selfplay_plays},
                 {"k_candidates", c.k_candidates},
                 {"ne_budget", c.ne_budget},
                 {"seed", c.eval_seed}};
    j["out"] = c.out_dir;
    j["threads"] = c.threads;
    return j;
}

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("graph")) {
        const auto& g = j.at("graph");
        maybe_get(g, "model", c.graph_model);
        maybe_get(g, "nodes", c.nodes);
        maybe_get(g, "er_p", c.er_p);
        maybe_get(g, "ba_m", c.ba_m);
        maybe_get(g, "ws_k", c.ws_k);
        maybe_get(g, "ws_beta", c.ws_beta);
        maybe_get(g, "seed", c.graph_seed);
    }
    maybe_get(j, "cascade", c.cascade);
    maybe_get(j, "load_mode", c.load_mode);
    if (j.contains("features")) {
        const auto& f = j.at("features");
        maybe_get(f, "alpha", c.capacity_alpha);
        maybe_get(f, "c0", c.capacity_c0);
        maybe_get(f, "seed", c.feature_seed);
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        maybe_get(d, "pool_size", c.pool_size);
        maybe_get(d, "subspaces", c.subspaces);
        maybe_get(d, "trials", c.trials);
        maybe_get(d, "cap_factor", c.cap_factor);
        maybe_get(d, "seed", c.data_seed);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        maybe_get(t, "embed_dim", c.embed_dim);
        maybe_get(t, "hidden_dim", c.hidden_dim);
        maybe_get(t, "hidden_layers", c.hidden_layers);
        maybe_get(t, "epochs", c.epochs);
        maybe_get(t, "batch_size", c.batch_size);
        maybe_get(t, "learning_rate", c.learning_rate);
        maybe_get(t, "optimizer", c.optimizer);
        maybe_get(t, "cfda_weight", c.cfda_weight);
        maybe_get(t, "seed", c.train_seed);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        maybe_get(e, "val_size", c.val_size);
        maybe_get(e, "samples_per_cell", c.samples_per_cell);
        maybe_get(e, "pulls", c.pulls);
        maybe_get(e, "arm_pool", c.arm_pool);
        maybe_get(e, "ucb_c", c.ucb_c);
        maybe_get(e, "eval_plays", c.eval_plays);
        maybe_get(e, "selfplay_plays", c.selfplay_plays);
        maybe_get(e, "k_candidates", c.k_candidates);
        maybe_get(e, "ne_budget", c.ne_budget);
        maybe_get(e, "seed", c.eval_seed);
    }
    maybe_get(j, "out", c.out_dir);
    maybe_get(j, "threads", c.threads);
    return c;
}

} // namespace

std::string ExperimentConfig::to_json() const { return config_to_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config: invalid JSON");
    return config_from_json(j);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

Instance make_instance(const ExperimentConfig& config) {
    config.validate();
    GraphModel model = config.graph_model == "erdos-renyi"     ? GraphModel::ErdosRenyi
                       : config.graph_model == "barabasi-albert" ? GraphModel::BarabasiAlbert
                                                                 : GraphModel::WattsStrogatz;
    GraphParams params;
    params.er_p = config.er_p;
    params.ba_m = config.ba_m;
    params.ws_k = config.ws_k;
    params.ws_beta = config.ws_beta;
    Graph graph = generate_graph(model, params, config.nodes, config.graph_seed);
    if (config.cascade_kind() == CascadeKind::Threshold) {
        NodeFeatures features = generate_thresholds(config.nodes, config.feature_seed);
        return Instance{std::move(graph), std::move(features), CascadeKind::Threshold,
                        config.load_mode_enum()};
    }
    CapacityParams cp{config.capacity_alpha, config.capacity_c0};
    NodeFeatures features = generate_capacities(graph, cp, config.load_mode_enum());
    return Instance{std::move(graph), std::move(features), CascadeKind::ShortestPath,
                    config.load_mode_enum()};
}

std::vector<TrialRecord> build_validation_set(
    const CascadeModel& model, const std::vector<const std::vector<TrialRecord>*>& exclude,
    int size, std::uint64_t seed, int threads) {
    const int n = model.graph->node_count();
    const std::int64_t na = static_cast<std::int64_t>(n) * (n - 1) / 2;
    const std::uint64_t domain = static_cast<std::uint64_t>(na) * static_cast<std::uint64_t>(na);

    std::unordered_set<std::uint64_t> seen;
    for (const auto* set : exclude)
        for (const auto& rec : *set) seen.insert(joint_key(rec.alpha_a, rec.alpha_d));

    ActionSpace full = ActionSpace::full(n);
    IndexPermutation perm(domain, mix_seed(seed, 0x56414c53u));
    std::vector<std::uint64_t> cells;
    for (std::uint64_t i = 0; i < perm.padded_size(); ++i) {
        std::uint64_t img = perm.permute(i);
        if (img >= domain) continue;
        const NodePair& atk = full.action(static_cast<int>(img / na));
        const NodePair& def = full.action(static_cast<int>(img % na));
        if (seen.count(joint_key(atk, def))) continue;
        cells.push_back(img);
        if (cells.size() == static_cast<std::size_t>(size)) break;
    }

    std::vector<TrialRecord> val(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t i) {
        TrialRecord& rec = val[i];
        rec.alpha_a = full.action(static_cast<int>(cells[i] / na));
        rec.alpha_d = full.action(static_cast<int>(cells[i] % na));
        rec.subspace_id = -1;
        rec.provenance = Provenance::Factual;
        rec.omega = run_cascade(model, initial_failures(rec.alpha_a, rec.alpha_d)).omega;
    });
    return val;
}

void write_metrics_csv(const std::vector<MethodMetrics>& rows, const std::string& run_id,
                       int nodes, const std::string& cascade, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "run_id,method,n_nodes,cascade,kl,exploitability,val_err,wall_time_s\n";
    out.precision(10);
    for (const auto& row : rows) {
        out << run_id << "," << row.method << "," << nodes << "," << cascade << ",";
        if (row.kl) out << *row.kl;
        out << ",";
        if (row.exploitability) out << *row.exploitability;
        out << ",";
        if (row.val_err) out << *row.val_err;
        out << "," << row.wall_s << "\n";
    }
}

std::string content_hash(const std::vector<std::string>& paths,
                         const std::vector<std::string>& extra_content) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a offset basis
    auto mix = [&h](const char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 1099511628211ULL;
        }
    };
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("content_hash: cannot open " + path);
        char buf[4096];
        while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
            mix(buf, static_cast<std::size_t>(in.gcount()));
    }
    for (const auto& text : extra_content) mix(text.data(), text.size());
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

void cmd_gen(const ExperimentConfig& config) {
    Instance inst = make_instance(config);
    fs::create_directories(config.out_dir);
    save_edge_list(inst.graph, config.out_dir + "/edges.txt");
    save_features(inst.features, config.out_dir + "/features.txt");
    std::ofstream cfg(config.out_dir + "/config.resolved.json");
    cfg << config.to_json() << "\n";
}

namespace {

SynthesizedStrategy to_synthesized(const MixedStrategy& mixed, StrategySource source) {
    SynthesizedStrategy s;
    s.source = source;
    for (std::size_t i = 0; i < mixed.probs.size(); ++i) {
        if (mixed.probs[i] > 0.0) {
            s.support.push_back(static_cast<int>(i));
            s.probs.push_back(mixed.probs[i]);
        }
    }
    return s;
}

struct EvalContext {
    const ExperimentConfig& config;
    const Instance& inst;
    ActionSpace full;
    std::optional<NESolution> exact_ne;
    const PayoffMatrix* true_matrix = nullptr;
    std::vector<TrialRecord> val_set;
};

MethodMetrics evaluate_method(EvalContext& ctx, const std::string& name,
                              const SynthesizedStrategy& atk, const SynthesizedStrategy& def,
                              const Predictor* predictor, Clock::time_point method_start) {
    MethodMetrics row;
    row.method = name;
    CascadeModel model = ctx.inst.model();

    if (ctx.exact_ne) {
        MixedStrategy matk = atk.to_mixed(ctx.full.size());
        MixedStrategy mdef = def.to_mixed(ctx.full.size());
        row.kl = kl_to_ne(matk, ctx.exact_ne->pi_a) + kl_to_ne(mdef, ctx.exact_ne->pi_d);
    }

    ExploiterConfig ec;
    ec.arm_pool_size = ctx.config.arm_pool;
    ec.pulls_budget = ctx.config.resolved_pulls();
    ec.ucb_c = ctx.config.ucb_c;
    ec.seed = mix_seed(ctx.config.eval_seed, std::hash<std::string>{}(name));
    ec.eval_plays = ctx.config.eval_plays;
    ec.selfplay_plays = ctx.config.selfplay_plays;
    ec.threads = ctx.config.threads;
    ec.true_matrix = ctx.true_matrix;
    row.exploitability = exploitability(model, atk, def, ec).delta;

    if (predictor && !ctx.val_set.empty())
        row.val_err = predictor->validation_error(ctx.val_set, ctx.inst.features.values(),
                                                  ctx.config.threads);
    row.wall_s = seconds_since(method_start);
    return row;
}

void write_plot_data(const ExperimentConfig& config, const CascadeModel& model,
                     const std::vector<TrialRecord>& factual) {
    fs::create_directories(config.out_dir + "/plotdata");
    {
        std::ofstream out(config.out_dir + "/plotdata/matrix_size.csv");
        out << "n_nodes,matrix_entries\n";
        for (int n : {5, 10, 25, 50, 100, 250, 500, 1000}) {
            double pairs = static_cast<double>(n) * (n - 1) / 2.0;
            out.precision(0);
            out << n << "," << std::fixed << pairs * pairs << "\n";
            out.unsetf(std::ios_base::fixed);
        }
    }
    {
        // counterfactual yield at three factual volumes (pre-cap)
        std::ofstream out(config.out_dir + "/plotdata/cfac_growth.csv");
        out << "n_factual,n_counterfactual_precap\n";
        for (double frac : {0.25, 0.5, 1.0}) {
            std::size_t take = static_cast<std::size_t>(frac * factual.size());
            if (take < 2) continue;
            std::vector<TrialRecord> subset(factual.begin(), factual.begin() + take);
            CfdaOptions opt;
            opt.cap_factor = 0.0;       // pre-cap yield
            opt.max_pairs = 20'000'000; // bounded stream on large instances
            opt.load_mode = config.load_mode_enum();
            opt.threads = config.threads;
            auto [cfac, stats] = generate_counterfactual_dataset(model, subset,
                                                                 config.data_seed, opt);
            out << take << "," << stats.n_cfac << "\n";
        }
    }
}

} // namespace

namespace {

PipelineResult run_pipeline(const ExperimentConfig& config, std::string& stage) {
    fs::create_directories(config.out_dir);
    fs::create_directories(config.out_dir + "/models");
    fs::create_directories(config.out_dir + "/strategies");

    nlohmann::json timings;
    PipelineResult result;

    // --- gen ---
    stage = "gen";
    auto t0 = Clock::now();
    Instance inst = make_instance(config);
    CascadeModel model = inst.model();
    save_edge_list(inst.graph, config.out_dir + "/edges.txt");
    save_features(inst.features, config.out_dir + "/features.txt");
    {
        std::ofstream cfg(config.out_dir + "/config.resolved.json");
        cfg << config.to_json() << "\n";
    }
    timings["gen_s"] = seconds_since(t0);

    // --- factual data ---
    stage = "factual";
    t0 = Clock::now();
    const int p = config.resolved_subspaces();
    const std::int64_t q = config.resolved_trials();
    auto spaces = partition_subaction_spaces(config.nodes, config.pool_size, p,
                                             config.data_seed, nullptr);
    FactualStats fac_stats;
    auto factual_raw = generate_factual_dataset(model, spaces, q, config.data_seed,
                                                config.threads, &fac_stats);
    auto [factual, removed] = deduplicate(std::move(factual_raw));
    result.n_factual = static_cast<std::int64_t>(factual.size());
    timings["factual_s"] = seconds_since(t0);
    timings["factual_dedup_removed"] = removed;

    // --- counterfactual data ---
    stage = "cfda";
    t0 = Clock::now();
    CfdaOptions cfda_opt;
    cfda_opt.cap_factor = config.cap_factor;
    cfda_opt.load_mode = config.load_mode_enum();
    cfda_opt.threads = config.threads;
    cfda_opt.factual_wall_ms = fac_stats.wall_ms;
    auto [counterfactual, cfda_stats] =
        generate_counterfactual_dataset(model, factual, config.data_seed, cfda_opt);
    result.n_counterfactual = cfda_stats.n_cfac;
    save_cfda_stats(cfda_stats, config.out_dir + "/cfda_stats.json");
    save_dataset_jsonl(factual, config.out_dir + "/dataset.jsonl");
    append_dataset_jsonl(counterfactual, config.out_dir + "/dataset.jsonl");
    DatasetMeta meta{config.graph_seed, config.cascade, config.pool_size, p, q};
    save_dataset_meta(meta, config.out_dir + "/dataset.meta.json");
    timings["cfda_s"] = seconds_since(t0);

    // --- unpartitioned ablation data ---
    stage = "uniform-data";
    t0 = Clock::now();
    auto uniform_data = generate_uniform_dataset(
        model, static_cast<std::int64_t>(p) * q, mix_seed(config.data_seed, 0x4e4eu),
        config.threads);
    save_dataset_jsonl(uniform_data, config.out_dir + "/dataset.uniform.jsonl");
    timings["uniform_data_s"] = seconds_since(t0);

    // --- exact NE when the full matrix fits the budget ---
    stage = "exact-ne";
    EvalContext ctx{config, inst, ActionSpace::full(config.nodes), std::nullopt, nullptr, {}};
    PayoffMatrix full_matrix;
    const std::int64_t full_entries =
        static_cast<std::int64_t>(ctx.full.size()) * ctx.full.size();
    t0 = Clock::now();
    if (full_entries <= config.ne_budget) {
        full_matrix = build_payoff_matrix(model, ctx.full, ctx.full, config.ne_budget,
                                          config.threads);
        ctx.true_matrix = &full_matrix;
        ctx.exact_ne = solve_zero_sum_ne(full_matrix);
        result.exact_ne_feasible = true;
        save_strategy_json(ctx.exact_ne->pi_a, ctx.full,
                           config.out_dir + "/strategies/exact_ne_atk.json");
        save_strategy_json(ctx.exact_ne->pi_d, ctx.full,
                           config.out_dir + "/strategies/exact_ne_def.json");
    } else {
        std::cerr << "exact NE infeasible: " << full_entries << " entries exceed budget "
                  << config.ne_budget << "\n";
    }
    timings["exact_ne_s"] = seconds_since(t0);

    // --- shared validation set (excludes every variant's training actions) ---
    stage = "validation-set";
    t0 = Clock::now();
    ctx.val_set = build_validation_set(
        model, {&factual, &counterfactual, &uniform_data}, config.val_size,
        config.eval_seed, config.threads);
    timings["val_set_s"] = seconds_since(t0);

    // --- methods ---
    auto train_variant = [&](const std::string& name, const std::vector<TrialRecord>& data) {
        auto start = Clock::now();
        Predictor pred(config.nodes, config.embed_dim, config.hidden_dim, config.hidden_layers,
                       config.train_seed);
        pred.train(data, inst.features.values(), config.train_config());
        pred.save_checkpoint(config.out_dir + "/models/" + name + ".ckpt");
        SynthesisOptions so;
        so.k_candidates = config.k_candidates;
        so.threads = config.threads;
        auto [atk, def] = synthesize_from_predictor(pred, ctx.full, inst.features.values(),
                                                    config.eval_seed, so);
        save_strategy_json(atk.to_mixed(ctx.full.size()), ctx.full,
                           config.out_dir + "/strategies/" + name + "_atk.json");
        save_strategy_json(def.to_mixed(ctx.full.size()), ctx.full,
                           config.out_dir + "/strategies/" + name + "_def.json");
        result.rows.push_back(
            evaluate_method(ctx, name, atk, def, &pred, start));
    };

    stage = "evaluate";
    if (result.exact_ne_feasible) {
        auto start = Clock::now();
        SynthesizedStrategy atk = to_synthesized(ctx.exact_ne->pi_a, StrategySource::ExactNE);
        SynthesizedStrategy def = to_synthesized(ctx.exact_ne->pi_d, StrategySource::ExactNE);
        result.rows.push_back(evaluate_method(ctx, "exact-ne", atk, def, nullptr, start));
    }

    {
        // strategy-restricted baseline: uniform vs EWM-TOPSIS top-2
        auto start = Clock::now();
        CentralityTable table = centralities(inst.graph);
        EwmTopsisResult ranking = ewm_topsis_ranking(table);
        save_ranking_csv(table, ranking, config.out_dir + "/ranking.csv");
        std::vector<MetaAction> metas = {
            {"uniform", uniform_strategy(ctx.full)},
            {"ewm-topsis", heuristic_strategy(ranking, PairRule::TopTwo, ctx.full)}};
        RestrictedStrategyGame game = restricted_strategy_ne(
            model, metas, metas, config.samples_per_cell, config.eval_seed, config.threads);
        SynthesizedStrategy atk =
            to_synthesized(game.induced_attacker(ctx.full.size()), StrategySource::Baseline);
        SynthesizedStrategy def =
            to_synthesized(game.induced_defender(ctx.full.size()), StrategySource::Baseline);
        save_strategy_json(atk.to_mixed(ctx.full.size()), ctx.full,
                           config.out_dir + "/strategies/wang2023_atk.json");
        save_strategy_json(def.to_mixed(ctx.full.size()), ctx.full,
                           config.out_dir + "/strategies/wang2023_def.json");
        result.rows.push_back(evaluate_method(ctx, "wang2023", atk, def, nullptr, start));
    }

    train_variant("nn", uniform_data);
    train_variant("nn-subact", factual);
    {
        std::vector<TrialRecord> combined = factual;
        combined.insert(combined.end(), counterfactual.begin(), counterfactual.end());
        train_variant("nn-subact-cfda", combined);
    }

    // --- artifacts ---
    stage = "artifacts";
    write_plot_data(config, model, factual);
    // hash the experiment identity: inputs plus the config with the
    // execution-only fields (threads, output path) canonicalized away
    ExperimentConfig canonical = config;
    canonical.threads = 0;
    canonical.out_dir = "";
    std::string run_id = content_hash(
        {config.out_dir + "/edges.txt", config.out_dir + "/features.txt"},
        {canonical.to_json()});
    write_metrics_csv(result.rows, run_id, config.nodes, config.cascade,
                      config.out_dir + "/metrics.csv");
    {
        std::ofstream out(config.out_dir + "/inputs.hash");
        out << run_id << "\n";
    }
    {
        nlohmann::json summary;
        summary["run_id"] = run_id;
        summary["exact_ne"] = result.exact_ne_feasible ? "solved" : "infeasible";
        summary["n_factual"] = result.n_factual;
        summary["n_counterfactual"] = result.n_counterfactual;
        summary["val_set_size"] = ctx.val_set.size();
        summary["seeds"] = {{"graph", config.graph_seed},
                            {"features", config.feature_seed},
                            {"data", config.data_seed},
                            {"train", config.train_seed},
                            {"eval", config.eval_seed}};
        std::ofstream out(config.out_dir + "/summary.json");
        out << summary.dump(2) << "\n";
    }
    {
        std::ofstream out(config.out_dir + "/timings.json");
        out << timings.dump(2) << "\n";
    }
    return result;
}

} // namespace

PipelineResult cmd_pipeline(const ExperimentConfig& config) {
    config.validate();
    std::string stage = "setup";
    try {
        return run_pipeline(config, stage);
    } catch (const std::exception& e) {
        // partial artifacts stay in out_dir for inspection
        throw Error("stage " + stage + ": " + e.what());
    }
}

} // namespace cascnet
