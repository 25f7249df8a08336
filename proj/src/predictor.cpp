#include "cascnet/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"
#include "cascnet/rng.hpp"

#include "json.hpp"

namespace cascnet {

namespace {

constexpr int kGradBlocks = 8; // fixed so the reduction order never depends on threads

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

} // namespace

struct Predictor::BlockGrad {
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;
    std::vector<std::pair<int, Eigen::VectorXd>> emb_atk_rows;
    std::vector<std::pair<int, Eigen::VectorXd>> emb_def_rows;

    void init_like(const std::vector<Layer>& layers) {
        dw.resize(layers.size());
        db.resize(layers.size());
        for (std::size_t l = 0; l < layers.size(); ++l) {
            dw[l] = Eigen::MatrixXd::Zero(layers[l].w.rows(), layers[l].w.cols());
            db[l] = Eigen::VectorXd::Zero(layers[l].bias.size());
        }
        emb_atk_rows.clear();
        emb_def_rows.clear();
    }
};

Predictor::Predictor(int nodes, int embed_dim, int hidden_dim, int hidden_layers,
                     std::uint64_t seed)
    : n_(nodes), b_(embed_dim), h_(hidden_dim), seed_(seed) {
    if (nodes < 2 || embed_dim < 1 || hidden_dim < 1 || hidden_layers < 1)
        throw InvalidParams("Predictor: dimensions must be positive (N >= 2)");

    // Pair embeddings compose per-node rows: embedding({u, v}) =
    // row_u + row_v, one table per role. This is the linear encoder of the
    // multi-hot action encoding, so pairs sharing a node embed nearby and
    // actions never seen in training still receive informed embeddings.
    Rng rng(mix_seed(seed, 0x454d4244u));
    emb_atk_.resize(n_, b_);
    emb_def_.resize(n_, b_);
    for (int r = 0; r < n_; ++r)
        for (int c = 0; c < b_; ++c) emb_atk_(r, c) = 0.1 * rng.normal();
    for (int r = 0; r < n_; ++r)
        for (int c = 0; c < b_; ++c) emb_def_(r, c) = 0.1 * rng.normal();

    std::vector<int> dims;
    dims.push_back(2 * b_ + n_);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(h_);
    dims.push_back(n_);
    weights_.resize(dims.size() - 1);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        int in = dims[l], out = dims[l + 1];
        double limit = std::sqrt(6.0 / (in + out)); // Glorot uniform
        weights_[l].w.resize(in, out);
        for (int i = 0; i < in; ++i)
            for (int j = 0; j < out; ++j)
                weights_[l].w(i, j) = limit * (2.0 * rng.uniform01() - 1.0);
        weights_[l].bias = Eigen::VectorXd::Zero(out);
    }
}

void Predictor::check_pair(const NodePair& p) const {
    if (p.u < 0 || p.v >= n_)
        throw IndexOutOfRange("predictor: node pair outside [0, N)");
}

Eigen::MatrixXd Predictor::assemble_inputs(const std::vector<TrialRecord>& records,
                                           std::size_t lo, std::size_t hi,
                                           const Eigen::VectorXd& scaled_x) const {
    const std::size_t rows = hi - lo;
    Eigen::MatrixXd in(rows, 2 * b_ + n_);
    for (std::size_t r = 0; r < rows; ++r) {
        const TrialRecord& rec = records[lo + r];
        check_pair(rec.alpha_a);
        check_pair(rec.alpha_d);
        in.block(r, 0, 1, b_) = emb_atk_.row(rec.alpha_a.u) + emb_atk_.row(rec.alpha_a.v);
        in.block(r, b_, 1, b_) = emb_def_.row(rec.alpha_d.u) + emb_def_.row(rec.alpha_d.v);
        in.block(r, 2 * b_, 1, n_) = scaled_x.transpose();
    }
    return in;
}

Eigen::VectorXd Predictor::forward(const NodePair& alpha_a, const NodePair& alpha_d,
                                   const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_)
        throw DimensionMismatch("forward: feature vector length != N");
    check_pair(alpha_a);
    check_pair(alpha_d);
    Eigen::VectorXd act(2 * b_ + n_);
    act.segment(0, b_) = (emb_atk_.row(alpha_a.u) + emb_atk_.row(alpha_a.v)).transpose();
    act.segment(b_, b_) = (emb_def_.row(alpha_d.u) + emb_def_.row(alpha_d.v)).transpose();
    for (int i = 0; i < n_; ++i) act(2 * b_ + i) = x[i] * input_scale_;
    for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
        act = (weights_[l].w.transpose() * act + weights_[l].bias).cwiseMax(0.0);
    }
    Eigen::VectorXd logits = weights_.back().w.transpose() * act + weights_.back().bias;
    for (int i = 0; i < n_; ++i) logits(i) = sigmoid(logits(i));
    return logits;
}

double Predictor::predicted_payoff(const NodePair& alpha_a, const NodePair& alpha_d,
                                   const std::vector<double>& x) const {
    return forward(alpha_a, alpha_d, x).mean();
}

std::vector<double> Predictor::predicted_payoffs(
    const std::vector<std::pair<NodePair, NodePair>>& duels, const std::vector<double>& x,
    int threads) const {
    if (static_cast<int>(x.size()) != n_)
        throw DimensionMismatch("predicted_payoffs: feature vector length != N");
    Eigen::VectorXd scaled_x(n_);
    for (int i = 0; i < n_; ++i) scaled_x(i) = x[i] * input_scale_;

    std::vector<double> out(duels.size());
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (duels.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(duels.size(), lo + kChunk);
        Eigen::MatrixXd act(hi - lo, 2 * b_ + n_);
        for (std::size_t r = lo; r < hi; ++r) {
            check_pair(duels[r].first);
            check_pair(duels[r].second);
            act.block(r - lo, 0, 1, b_) =
                emb_atk_.row(duels[r].first.u) + emb_atk_.row(duels[r].first.v);
            act.block(r - lo, b_, 1, b_) =
                emb_def_.row(duels[r].second.u) + emb_def_.row(duels[r].second.v);
            act.block(r - lo, 2 * b_, 1, n_) = scaled_x.transpose();
        }
        for (std::size_t l = 0; l + 1 < weights_.size(); ++l)
            act = ((act * weights_[l].w).rowwise() + weights_[l].bias.transpose()).cwiseMax(0.0);
        Eigen::MatrixXd logits =
            (act * weights_.back().w).rowwise() + weights_.back().bias.transpose();
        for (std::size_t r = lo; r < hi; ++r) {
            double acc = 0.0;
            for (int j = 0; j < n_; ++j) acc += sigmoid(logits(r - lo, j));
            out[r] = acc / n_;
        }
    });
    return out;
}

void Predictor::block_pass(const std::vector<TrialRecord>& records, std::size_t lo,
                           std::size_t hi, const Eigen::VectorXd& scaled_x,
                           const std::vector<double>& weights, double weight_total,
                           BlockGrad& grad, std::vector<double>& loss_slots) const {
    if (lo >= hi) return;
    const std::size_t rows = hi - lo;
    const std::size_t nlayers = weights_.size();

    std::vector<Eigen::MatrixXd> acts(nlayers + 1);
    std::vector<Eigen::MatrixXd> pre(nlayers);
    acts[0] = assemble_inputs(records, lo, hi, scaled_x);
    for (std::size_t l = 0; l < nlayers; ++l) {
        pre[l] = (acts[l] * weights_[l].w).rowwise() + weights_[l].bias.transpose();
        acts[l + 1] = l + 1 < nlayers ? pre[l].cwiseMax(0.0) : pre[l];
    }

    // fused sigmoid + BCE; gradients normalized by node count and the batch
    // weight total so the batch loss is a weighted mean
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(rows, n_);
    for (std::size_t r = 0; r < rows; ++r) {
        const TrialRecord& rec = records[lo + r];
        double w = weights[lo + r];
        double loss = 0.0;
        std::size_t oi = 0;
        for (int j = 0; j < n_; ++j) {
            double y = 0.0;
            if (oi < rec.omega.size() && rec.omega[oi] == j) {
                y = 1.0;
                ++oi;
            }
            double z = pre[nlayers - 1](r, j);
            loss += softplus(z) - y * z;
            dz(r, j) = (sigmoid(z) - y) * w / (n_ * weight_total);
        }
        loss_slots[lo + r] = loss / n_;
    }

    for (std::size_t l = nlayers; l-- > 0;) {
        grad.dw[l].noalias() += acts[l].transpose() * dz;
        grad.db[l] += dz.colwise().sum().transpose();
        if (l == 0) break;
        Eigen::MatrixXd da = dz * weights_[l].w.transpose();
        dz = da.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    Eigen::MatrixXd din = dz * weights_[0].w.transpose();
    for (std::size_t r = 0; r < rows; ++r) {
        const TrialRecord& rec = records[lo + r];
        Eigen::VectorXd atk_g = din.block(r, 0, 1, b_).transpose();
        Eigen::VectorXd def_g = din.block(r, b_, 1, b_).transpose();
        // the pair embedding is a sum, so both node rows share the gradient
        grad.emb_atk_rows.emplace_back(rec.alpha_a.u, atk_g);
        grad.emb_atk_rows.emplace_back(rec.alpha_a.v, std::move(atk_g));
        grad.emb_def_rows.emplace_back(rec.alpha_d.u, def_g);
        grad.emb_def_rows.emplace_back(rec.alpha_d.v, std::move(def_g));
    }
}

namespace {

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::int64_t t = 0;
};

// lazy per-row Adam for the embedding tables: moments advance only when a
// row receives gradient, with bias correction from the row's own step count
struct SparseAdam {
    std::vector<Eigen::VectorXd> m;
    std::vector<Eigen::VectorXd> v;
    std::vector<std::int64_t> t;

    void init(std::int64_t rows, int cols) {
        m.assign(rows, Eigen::VectorXd::Zero(cols));
        v.assign(rows, Eigen::VectorXd::Zero(cols));
        t.assign(rows, 0);
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

} // namespace

TrainResult Predictor::train(const std::vector<TrialRecord>& dataset,
                             const std::vector<double>& x, const TrainConfig& config) {
    if (dataset.empty()) throw InvalidParams("train: dataset is empty");
    if (static_cast<int>(x.size()) != n_) throw DimensionMismatch("train: feature length != N");
    if (config.epochs < 1 || config.batch_size < 1 || config.learning_rate < 0.0 ||
        config.cfda_weight < 0.0 || config.cfda_weight > 1.0)
        throw InvalidParams("train: invalid hyperparameters");

    double max_abs = 1.0;
    for (double xi : x) max_abs = std::max(max_abs, std::fabs(xi));
    input_scale_ = 1.0 / max_abs;
    Eigen::VectorXd scaled_x(n_);
    for (int i = 0; i < n_; ++i) scaled_x(i) = x[i] * input_scale_;

    // seeded holdout for optional per-epoch monitoring
    std::vector<int> order;
    std::vector<TrialRecord> holdout;
    {
        std::vector<int> all(dataset.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        if (config.val_fraction > 0.0) {
            Rng rng(mix_seed(config.seed, 0x484f4c44u));
            rng.shuffle(all);
            std::size_t held = std::min(dataset.size() - 1,
                                        static_cast<std::size_t>(config.val_fraction *
                                                                 dataset.size()));
            for (std::size_t i = 0; i < held; ++i) holdout.push_back(dataset[all[i]]);
            all.erase(all.begin(), all.begin() + held);
        }
        std::sort(all.begin(), all.end());
        order = std::move(all);
    }

    std::vector<double> weights(dataset.size(), 1.0);
    for (std::size_t i = 0; i < dataset.size(); ++i)
        if (dataset[i].provenance == Provenance::Counterfactual)
            weights[i] = config.cfda_weight;

    std::vector<AdamState> adam(weights_.size() * 2);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        adam[2 * l].m = Eigen::VectorXd::Zero(weights_[l].w.size());
        adam[2 * l].v = Eigen::VectorXd::Zero(weights_[l].w.size());
        adam[2 * l + 1].m = Eigen::VectorXd::Zero(weights_[l].bias.size());
        adam[2 * l + 1].v = Eigen::VectorXd::Zero(weights_[l].bias.size());
    }
    SparseAdam emb_adam_atk, emb_adam_def;
    if (config.optimizer == Optimizer::Adam) {
        emb_adam_atk.init(emb_atk_.rows(), b_);
        emb_adam_def.init(emb_def_.rows(), b_);
    }
    std::int64_t adam_t = 0;

    TrainResult result;
    std::vector<double> loss_slots(dataset.size(), 0.0);
    std::vector<TrialRecord> batch;
    std::vector<double> batch_weights;
    std::vector<BlockGrad> blocks(kGradBlocks);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<int> shuffled(order);
        Rng erng(mix_seed(config.seed, 0x45504f43u, static_cast<std::uint64_t>(epoch)));
        erng.shuffle(shuffled);

        for (std::size_t begin = 0; begin < shuffled.size();
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(shuffled.size(), begin + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            batch_weights.clear();
            double weight_total = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                batch.push_back(dataset[shuffled[k]]);
                batch_weights.push_back(weights[shuffled[k]]);
                weight_total += weights[shuffled[k]];
            }
            if (weight_total <= 0.0) continue; // all-zero-weight batch

            const std::size_t bsz = batch.size();
            std::vector<double> batch_losses(bsz, 0.0);
            const std::size_t per_block = (bsz + kGradBlocks - 1) / kGradBlocks;
            parallel_for(kGradBlocks, config.threads, [&](std::size_t blk) {
                blocks[blk].init_like(weights_);
                std::size_t lo = blk * per_block;
                std::size_t hi = std::min(bsz, lo + per_block);
                if (lo < hi)
                    block_pass(batch, lo, hi, scaled_x, batch_weights, weight_total,
                               blocks[blk], batch_losses);
            });

            double batch_loss = 0.0;
            for (std::size_t k = 0; k < bsz; ++k)
                batch_loss += batch_weights[k] * batch_losses[k];
            batch_loss /= weight_total;
            if (!std::isfinite(batch_loss))
                throw NonFiniteLoss("train: non-finite loss at epoch " + std::to_string(epoch) +
                                    ", batch offset " + std::to_string(begin));
            for (std::size_t k = begin; k < end; ++k)
                loss_slots[shuffled[k]] = batch_losses[k - begin];

            // reduce dense gradients in fixed block order
            for (int blk = 1; blk < kGradBlocks; ++blk)
                for (std::size_t l = 0; l < weights_.size(); ++l) {
                    blocks[0].dw[l] += blocks[blk].dw[l];
                    blocks[0].db[l] += blocks[blk].db[l];
                }
            // aggregate sparse embedding gradients in block order
            std::map<int, Eigen::VectorXd> atk_rows, def_rows;
            for (int blk = 0; blk < kGradBlocks; ++blk) {
                for (auto& [row, g] : blocks[blk].emb_atk_rows) {
                    auto [it, fresh] = atk_rows.try_emplace(row, g);
                    if (!fresh) it->second += g;
                }
                for (auto& [row, g] : blocks[blk].emb_def_rows) {
                    auto [it, fresh] = def_rows.try_emplace(row, g);
                    if (!fresh) it->second += g;
                }
            }

            const double lr = config.learning_rate;
            if (config.optimizer == Optimizer::SGD) {
                for (std::size_t l = 0; l < weights_.size(); ++l) {
                    weights_[l].w -= lr * blocks[0].dw[l];
                    weights_[l].bias -= lr * blocks[0].db[l];
                }
                for (auto& [row, g] : atk_rows) emb_atk_.row(row) -= lr * g.transpose();
                for (auto& [row, g] : def_rows) emb_def_.row(row) -= lr * g.transpose();
            } else {
                ++adam_t;
                const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t));
                const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t));
                for (std::size_t l = 0; l < weights_.size(); ++l) {
                    auto step = [&](AdamState& st, Eigen::Map<Eigen::VectorXd> param,
                                    const Eigen::VectorXd& g) {
                        st.m = kBeta1 * st.m + (1.0 - kBeta1) * g;
                        st.v = kBeta2 * st.v + (1.0 - kBeta2) * g.cwiseProduct(g);
                        param -= lr * (st.m / bc1).cwiseQuotient(
                                          ((st.v / bc2).cwiseSqrt().array() + kAdamEps).matrix());
                    };
                    Eigen::Map<Eigen::VectorXd> wmap(weights_[l].w.data(),
                                                     weights_[l].w.size());
                    Eigen::Map<Eigen::VectorXd> gmap(blocks[0].dw[l].data(),
                                                     blocks[0].dw[l].size());
                    step(adam[2 * l], wmap, gmap);
                    Eigen::Map<Eigen::VectorXd> bmap(weights_[l].bias.data(),
                                                     weights_[l].bias.size());
                    step(adam[2 * l + 1], bmap, blocks[0].db[l]);
                }
                auto sparse_step = [&](SparseAdam& st, Eigen::MatrixXd& table,
                                       std::map<int, Eigen::VectorXd>& rows) {
                    for (auto& [row, g] : rows) {
                        std::int64_t t = ++st.t[row];
                        st.m[row] = kBeta1 * st.m[row] + (1.0 - kBeta1) * g;
                        st.v[row] = kBeta2 * st.v[row] + (1.0 - kBeta2) * g.cwiseProduct(g);
                        double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
                        double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
                        table.row(row) -=
                            (lr * (st.m[row] / c1)
                                      .cwiseQuotient(((st.v[row] / c2).cwiseSqrt().array() +
                                                      kAdamEps)
                                                         .matrix()))
                                .transpose();
                    }
                };
                sparse_step(emb_adam_atk, emb_atk_, atk_rows);
                sparse_step(emb_adam_def, emb_def_, def_rows);
            }
        }

        // canonical-order reduction keeps the history identical across
        // shuffles of equal-loss epochs and across thread counts
        double epoch_loss = 0.0, epoch_weight = 0.0;
        for (int idx : order) {
            epoch_loss += weights[idx] * loss_slots[idx];
            epoch_weight += weights[idx];
        }
        result.loss_history.push_back(epoch_weight > 0.0 ? epoch_loss / epoch_weight : 0.0);
        if (!holdout.empty())
            result.val_history.push_back(validation_error(holdout, x, config.threads));
    }
    return result;
}

double Predictor::validation_error(const std::vector<TrialRecord>& val_set,
                                   const std::vector<double>& x, int threads) const {
    if (val_set.empty()) throw InvalidParams("validation_error: empty validation set");
    if (static_cast<int>(x.size()) != n_)
        throw DimensionMismatch("validation_error: feature length != N");
    Eigen::VectorXd scaled_x(n_);
    for (int i = 0; i < n_; ++i) scaled_x(i) = x[i] * input_scale_;

    std::vector<double> slots(val_set.size());
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (val_set.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(val_set.size(), lo + kChunk);
        Eigen::MatrixXd act = assemble_inputs(val_set, lo, hi, scaled_x);
        for (std::size_t l = 0; l + 1 < weights_.size(); ++l)
            act = ((act * weights_[l].w).rowwise() + weights_[l].bias.transpose()).cwiseMax(0.0);
        Eigen::MatrixXd logits =
            (act * weights_.back().w).rowwise() + weights_.back().bias.transpose();
        for (std::size_t r = lo; r < hi; ++r) {
            const TrialRecord& rec = val_set[r];
            double acc = 0.0;
            std::size_t oi = 0;
            for (int j = 0; j < n_; ++j) {
                double y = 0.0;
                if (oi < rec.omega.size() && rec.omega[oi] == j) {
                    y = 1.0;
                    ++oi;
                }
                double d = sigmoid(logits(r - lo, j)) - y;
                acc += d * d;
            }
            slots[r] = acc / n_;
        }
    });
    double total = 0.0;
    for (double s : slots) total += s;
    return total / val_set.size();
}

std::pair<double, std::vector<double>> Predictor::loss_and_gradient(
    const std::vector<TrialRecord>& batch, const std::vector<double>& x,
    double cfda_weight) const {
    if (batch.empty()) throw InvalidParams("loss_and_gradient: empty batch");
    Eigen::VectorXd scaled_x(n_);
    for (int i = 0; i < n_; ++i) scaled_x(i) = x[i] * input_scale_;
    std::vector<double> weights(batch.size(), 1.0);
    double weight_total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].provenance == Provenance::Counterfactual) weights[i] = cfda_weight;
        weight_total += weights[i];
    }
    BlockGrad grad;
    grad.init_like(weights_);
    std::vector<double> losses(batch.size(), 0.0);
    block_pass(batch, 0, batch.size(), scaled_x, weights, weight_total, grad, losses);

    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) loss += weights[i] * losses[i];
    loss /= weight_total;

    std::vector<double> flat(parameter_count(), 0.0);
    std::size_t off = 0;
    auto emb_grad = [&](const Eigen::MatrixXd& table,
                        const std::vector<std::pair<int, Eigen::VectorXd>>& rows) {
        for (const auto& [row, g] : rows)
            for (int c = 0; c < b_; ++c) flat[off + static_cast<std::size_t>(row) * b_ + c] += g(c);
        off += static_cast<std::size_t>(table.rows()) * b_;
    };
    emb_grad(emb_atk_, grad.emb_atk_rows);
    emb_grad(emb_def_, grad.emb_def_rows);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (int i = 0; i < grad.dw[l].rows(); ++i)
            for (int j = 0; j < grad.dw[l].cols(); ++j)
                flat[off++] = grad.dw[l](i, j);
        for (int j = 0; j < grad.db[l].size(); ++j) flat[off++] = grad.db[l](j);
    }
    return {loss, std::move(flat)};
}

std::size_t Predictor::parameter_count() const {
    std::size_t count = static_cast<std::size_t>(emb_atk_.size() + emb_def_.size());
    for (const auto& layer : weights_)
        count += static_cast<std::size_t>(layer.w.size() + layer.bias.size());
    return count;
}

std::vector<double> Predictor::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::int64_t r = 0; r < emb_atk_.rows(); ++r)
        for (int c = 0; c < b_; ++c) flat.push_back(emb_atk_(r, c));
    for (std::int64_t r = 0; r < emb_def_.rows(); ++r)
        for (int c = 0; c < b_; ++c) flat.push_back(emb_def_(r, c));
    for (const auto& layer : weights_) {
        for (int i = 0; i < layer.w.rows(); ++i)
            for (int j = 0; j < layer.w.cols(); ++j) flat.push_back(layer.w(i, j));
        for (int j = 0; j < layer.bias.size(); ++j) flat.push_back(layer.bias(j));
    }
    return flat;
}

void Predictor::set_parameters(const std::vector<double>& flat) {
    if (flat.size() != parameter_count())
        throw DimensionMismatch("set_parameters: wrong parameter count");
    std::size_t off = 0;
    for (std::int64_t r = 0; r < emb_atk_.rows(); ++r)
        for (int c = 0; c < b_; ++c) emb_atk_(r, c) = flat[off++];
    for (std::int64_t r = 0; r < emb_def_.rows(); ++r)
        for (int c = 0; c < b_; ++c) emb_def_(r, c) = flat[off++];
    for (auto& layer : weights_) {
        for (int i = 0; i < layer.w.rows(); ++i)
            for (int j = 0; j < layer.w.cols(); ++j) layer.w(i, j) = flat[off++];
        for (int j = 0; j < layer.bias.size(); ++j) layer.bias(j) = flat[off++];
    }
}

void Predictor::save_checkpoint(const std::string& path) const {
    nlohmann::json header;
    header["format"] = "cascnet-predictor-v1";
    header["nodes"] = n_;
    header["embed"] = b_;
    header["hidden"] = h_;
    header["layers"] = hidden_layers();
    header["seed"] = seed_;
    header["input_scale"] = input_scale_;
    std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    std::uint64_t len = head.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    std::vector<double> flat = parameters();
    std::vector<float> block(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) block[i] = static_cast<float>(flat[i]);
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(block.size() * sizeof(float)));
}

Predictor Predictor::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string head(len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(len));
    nlohmann::json header = nlohmann::json::parse(head);
    if (header.at("format").get<std::string>() != "cascnet-predictor-v1")
        throw ParseError("unknown checkpoint format", 0);

    Predictor model(header.at("nodes").get<int>(), header.at("embed").get<int>(),
                    header.at("hidden").get<int>(), header.at("layers").get<int>(),
                    header.at("seed").get<std::uint64_t>());
    model.input_scale_ = header.at("input_scale").get<double>();
    std::vector<float> block(model.parameter_count());
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(block.size() * sizeof(float)));
    if (!in) throw ParseError("checkpoint truncated", 0);
    std::vector<double> flat(block.begin(), block.end());
    model.set_parameters(flat);
    return model;
}

} // namespace cascnet
