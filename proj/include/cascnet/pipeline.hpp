#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascnet/cfda.hpp"
#include "cascnet/exploit.hpp"
#include "cascnet/predictor.hpp"
#include "cascnet/strategy.hpp"

namespace cascnet {

/// Fully resolved experiment description. Every seed is explicit; the
/// struct round-trips through JSON losslessly.
struct ExperimentConfig {
    // graph
    std::string graph_model = "erdos-renyi";
    int nodes = 25;
    double er_p = 0.0; // 0: default 2 ln(N) / N
    int ba_m = 2;
    int ws_k = 4;
    double ws_beta = 0.1;
    std::uint64_t graph_seed = 1;

    // cascade + features
    std::string cascade = "threshold"; // or "shortest-path"
    std::string load_mode = "single-path"; // or "all-paths-fractional"
    double capacity_alpha = 0.25;
    double capacity_c0 = 1.0;
    std::uint64_t feature_seed = 2;

    // data generation
    int pool_size = 5;
    int subspaces = 0;        // 0: triple the node count
    std::int64_t trials = 0;  // 0: exhaustive (M choose 2)^2
    double cap_factor = 10.0;
    std::uint64_t data_seed = 3;

    // predictor
    int embed_dim = 64;
    int hidden_dim = 256;
    int hidden_layers = 3;
    int epochs = 60;
    int batch_size = 128;
    double learning_rate = 1e-3;
    std::string optimizer = "adam";
    double cfda_weight = 1.0;
    std::uint64_t train_seed = 4;

    // evaluation
    int val_size = 10000;
    int samples_per_cell = 2000;
    std::int64_t pulls = 0; // 0: by size (50k @ N<=25, 200k @ N<=100, 500k above)
    int arm_pool = 512;
    double ucb_c = 1.4142135623730951;
    int eval_plays = 5000;
    int selfplay_plays = 10000;
    int k_candidates = 0; // 0: auto by N
    std::int64_t ne_budget = 120000;
    std::uint64_t eval_seed = 5;

    // run
    std::string out_dir = "run";
    int threads = 0;

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    CascadeKind cascade_kind() const;
    LoadMode load_mode_enum() const;
    int resolved_subspaces() const;
    std::int64_t resolved_trials() const;
    std::int64_t resolved_pulls() const;
    TrainConfig train_config() const;
};

/// Graph + features owned together so a CascadeModel can be formed on demand.
struct Instance {
    Graph graph;
    NodeFeatures features;
    CascadeKind kind;
    LoadMode load_mode;

    CascadeModel model() const { return CascadeModel(kind, graph, features, load_mode); }
};

Instance make_instance(const ExperimentConfig& config);

/// Joint actions drawn uniformly from the full space, excluding every joint
/// action present in the given datasets, labeled by true simulation.
std::vector<TrialRecord> build_validation_set(
    const CascadeModel& model, const std::vector<const std::vector<TrialRecord>*>& exclude,
    int size, std::uint64_t seed, int threads = 0);

struct MethodMetrics {
    std::string method;
    std::optional<double> kl;             // summed attacker + defender KL to exact NE
    std::optional<double> exploitability;
    std::optional<double> val_err;
    double wall_s = 0.0;
};

struct PipelineResult {
    std::vector<MethodMetrics> rows;
    bool exact_ne_feasible = false;
    std::int64_t n_factual = 0;
    std::int64_t n_counterfactual = 0;
};

/// Writes the input graph and feature files for a config.
void cmd_gen(const ExperimentConfig& config);

/// Full experiment: gen, factual + counterfactual data, the three predictor
/// variants, baselines, evaluation, metrics and plot data.
PipelineResult cmd_pipeline(const ExperimentConfig& config);

void write_metrics_csv(const std::vector<MethodMetrics>& rows, const std::string& run_id,
                       int nodes, const std::string& cascade, const std::string& path);

/// FNV-1a 64 content hash over files plus optional raw strings, hex encoded.
std::string content_hash(const std::vector<std::string>& paths,
                         const std::vector<std::string>& extra_content = {});

} // namespace cascnet
