#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cascnet/datagen.hpp"

namespace cascnet {

enum class Optimizer { SGD, Adam };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 128;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 0;
    double val_fraction = 0.0;  // optional seeded holdout monitored per epoch
    double cfda_weight = 1.0;   // loss weight of counterfactual records
    int threads = 1;            // gradient blocks evaluate in parallel; results
                                // are identical for any thread count
};

struct TrainResult {
    std::vector<double> loss_history; // weighted mean BCE per epoch
    std::vector<double> val_history;  // holdout Brier per epoch (val_fraction > 0)
};

/// Pair-embedding MLP over the full (N choose 2) action space. Each action
/// pair embeds as the sum of its two nodes' learned rows (a linear encoder
/// of the pair's multi-hot encoding, so every pair receives a unique,
/// generalizing embedding); attacker and defender actions use separate
/// tables. The two pair embeddings are concatenated with the node feature
/// vector and passed through a ReLU stack with sigmoid outputs, one failure
/// probability per node.
///
/// Parameters are double precision internally; checkpoints store float32.
class Predictor {
public:
    Predictor(int nodes, int embed_dim, int hidden_dim, int hidden_layers, std::uint64_t seed);

    int nodes() const { return n_; }
    int embed_dim() const { return b_; }
    int hidden_dim() const { return h_; }
    int hidden_layers() const { return static_cast<int>(weights_.size()) - 1; }
    std::uint64_t init_seed() const { return seed_; }

    /// Per-node failure probabilities, all strictly inside (0, 1).
    Eigen::VectorXd forward(const NodePair& alpha_a, const NodePair& alpha_d,
                            const std::vector<double>& x) const;

    /// Mean predicted failure probability: expected |Omega| / N.
    double predicted_payoff(const NodePair& alpha_a, const NodePair& alpha_d,
                            const std::vector<double>& x) const;

    /// Batched predicted payoffs (one GEMM pass per chunk).
    std::vector<double> predicted_payoffs(const std::vector<std::pair<NodePair, NodePair>>& duels,
                                          const std::vector<double>& x, int threads = 0) const;

    /// Minimizes mean per-node binary cross-entropy with Adam or SGD.
    /// Deterministic for a fixed config seed. Throws NonFiniteLoss with
    /// diagnostics if the loss leaves the reals.
    TrainResult train(const std::vector<TrialRecord>& dataset, const std::vector<double>& x,
                      const TrainConfig& config);

    /// Brier score: squared error between probabilities and the multi-hot
    /// labels, averaged over nodes then records.
    double validation_error(const std::vector<TrialRecord>& val_set,
                            const std::vector<double>& x, int threads = 0) const;

    /// Weighted BCE and its gradient in parameters() layout; exposed for
    /// finite-difference verification.
    std::pair<double, std::vector<double>> loss_and_gradient(
        const std::vector<TrialRecord>& batch, const std::vector<double>& x,
        double cfda_weight = 1.0) const;

    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& flat);
    std::size_t parameter_count() const;

    /// Binary checkpoint: little-endian uint64 header length, JSON header
    /// (dims, seed, input scale), then float32 parameter blocks in
    /// parameters() order.
    void save_checkpoint(const std::string& path) const;
    static Predictor load_checkpoint(const std::string& path);

private:
    struct Layer {
        Eigen::MatrixXd w; // in x out
        Eigen::VectorXd bias;
    };

    struct BlockGrad;

    void check_pair(const NodePair& p) const;
    Eigen::MatrixXd assemble_inputs(const std::vector<TrialRecord>& records, std::size_t lo,
                                    std::size_t hi, const Eigen::VectorXd& scaled_x) const;
    // forward + backward over records [lo, hi); losses land in per-record
    // slots, gradients in the block accumulator
    void block_pass(const std::vector<TrialRecord>& records, std::size_t lo, std::size_t hi,
                    const Eigen::VectorXd& scaled_x, const std::vector<double>& weights,
                    double weight_total, BlockGrad& grad, std::vector<double>& loss_slots) const;

    int n_;
    int b_;
    int h_;
    std::uint64_t seed_;
    double input_scale_ = 1.0;
    Eigen::MatrixXd emb_atk_; // (N choose 2) x b
    Eigen::MatrixXd emb_def_;
    std::vector<Layer> weights_;
};

} // namespace cascnet
