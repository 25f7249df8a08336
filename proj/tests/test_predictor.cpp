#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "cascnet/errors.hpp"
#include "cascnet/predictor.hpp"
#include "oracles.hpp"

using namespace cascnet;

namespace {

std::vector<TrialRecord> toy_dataset(int n, int count, std::uint64_t seed) {
    Graph g = oracle::random_connected_graph(n, 0.5, seed);
    NodeFeatures phi = generate_thresholds(n, seed + 1);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    auto spaces = partition_subaction_spaces(n, std::min(n, 4), 8, seed + 2);
    auto records = generate_factual_dataset(model, spaces, 9, seed + 2);
    if (static_cast<int>(records.size()) > count) records.resize(count);
    return records;
}

std::vector<double> toy_features(int n, std::uint64_t seed) {
    return generate_thresholds(n, seed + 1).values();
}

} // namespace

TEST_CASE("forward: output range and zeroed final layer") {
    Predictor model(6, 4, 8, 2, 1);
    auto x = toy_features(6, 0);
    auto out = model.forward(NodePair(0, 1), NodePair(2, 3), x);
    REQUIRE(out.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(out(i) > 0.0);
        CHECK(out(i) < 1.0);
    }

    // zero the output layer: every probability becomes exactly sigmoid(0)
    auto params = model.parameters();
    const std::size_t tail = 8 * 6 + 6; // last layer weights + bias
    for (std::size_t i = params.size() - tail; i < params.size(); ++i) params[i] = 0.0;
    model.set_parameters(params);
    auto mid = model.forward(NodePair(0, 1), NodePair(2, 3), x);
    for (int i = 0; i < 6; ++i) CHECK(mid(i) == 0.5);
    CHECK(model.predicted_payoff(NodePair(0, 1), NodePair(2, 3), x) == doctest::Approx(0.5));
}

TEST_CASE("forward: separate tables make roles asymmetric") {
    Predictor model(8, 4, 8, 2, 3);
    auto x = toy_features(8, 5);
    auto ab = model.forward(NodePair(0, 1), NodePair(2, 3), x);
    auto ba = model.forward(NodePair(2, 3), NodePair(0, 1), x);
    CHECK((ab - ba).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("forward: invalid pair rejected") {
    Predictor model(6, 4, 8, 2, 1);
    auto x = toy_features(6, 0);
    CHECK_THROWS_AS(model.forward(NodePair(0, 7), NodePair(1, 2), x), IndexOutOfRange);
}

TEST_CASE("gradient matches central finite differences on the toy model") {
    Predictor model(6, 4, 8, 2, 7);
    auto data = toy_dataset(6, 12, 21);
    REQUIRE(!data.empty());
    data[1].provenance = Provenance::Counterfactual; // exercise record weighting
    auto x = toy_features(6, 21);

    auto [loss, grad] = model.loss_and_gradient(data, x, 0.7);
    CHECK(std::isfinite(loss));
    auto params = model.parameters();
    const double step = 1e-3;

    // group boundaries: both embeddings, then alternating W / bias blocks
    const std::size_t emb = 6 * 4; // N x b node rows
    const std::size_t d_in = 2 * 4 + 6;
    std::vector<std::pair<std::size_t, std::size_t>> groups = {
        {0, emb},                                        // attacker embeddings
        {emb, emb},                                      // defender embeddings
        {2 * emb, d_in * 8},                             // W0
        {2 * emb + d_in * 8, 8},                         // b0
        {2 * emb + d_in * 8 + 8, 8 * 8},                 // W1
        {2 * emb + d_in * 8 + 8 + 8 * 8, 8},             // b1
        {2 * emb + d_in * 8 + 8 + 8 * 8 + 8, 8 * 6},     // W_out
        {2 * emb + d_in * 8 + 8 + 8 * 8 + 8 + 8 * 6, 6}, // b_out
    };
    REQUIRE(groups.back().first + groups.back().second == params.size());

    // verify the first live direction of every parameter group
    int groups_checked = 0;
    for (auto [base, len] : groups) {
        std::size_t idx = base;
        while (idx < base + len && std::fabs(grad[idx]) < 1e-7) ++idx;
        REQUIRE(idx < base + len); // every group sees gradient on this batch
        auto plus = params, minus = params;
        plus[idx] += step;
        minus[idx] -= step;
        model.set_parameters(plus);
        double lp = model.loss_and_gradient(data, x, 0.7).first;
        model.set_parameters(minus);
        double lm = model.loss_and_gradient(data, x, 0.7).first;
        model.set_parameters(params);
        double fd = (lp - lm) / (2.0 * step);
        CHECK(std::fabs(fd - grad[idx]) / std::max(1e-8, std::fabs(grad[idx])) < 1e-4);
        ++groups_checked;
    }
    CHECK(groups_checked == 8);
}

TEST_CASE("train: single record memorized") {
    Predictor model(6, 4, 8, 2, 11);
    auto data = toy_dataset(6, 1, 33);
    auto x = toy_features(6, 33);
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.05;
    cfg.seed = 1;
    auto result = model.train(data, x, cfg);
    CHECK(result.loss_history.back() < 0.01);
}

TEST_CASE("train: lr = 0 keeps the loss history constant") {
    Predictor model(6, 4, 8, 2, 13);
    auto data = toy_dataset(6, 20, 44);
    auto x = toy_features(6, 44);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 0.0;
    cfg.seed = 9;
    auto result = model.train(data, x, cfg);
    for (double l : result.loss_history) CHECK(l == result.loss_history.front());
}

TEST_CASE("train: identical seeds give bit-identical histories; thread count irrelevant") {
    auto data = toy_dataset(6, 30, 55);
    auto x = toy_features(6, 55);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.batch_size = 8;
    cfg.seed = 17;

    Predictor m1(6, 4, 8, 2, 19);
    cfg.threads = 1;
    auto r1 = m1.train(data, x, cfg);
    Predictor m2(6, 4, 8, 2, 19);
    cfg.threads = 4;
    auto r2 = m2.train(data, x, cfg);
    REQUIRE(r1.loss_history.size() == r2.loss_history.size());
    for (std::size_t i = 0; i < r1.loss_history.size(); ++i)
        CHECK(r1.loss_history[i] == r2.loss_history[i]);
    auto p1 = m1.parameters();
    auto p2 = m2.parameters();
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("train: loss decreases on a learnable dataset") {
    Predictor model(8, 8, 16, 2, 23);
    auto data = toy_dataset(8, 60, 66);
    auto x = toy_features(8, 66);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 16;
    cfg.learning_rate = 3e-3;
    cfg.seed = 3;
    auto result = model.train(data, x, cfg);
    CHECK(result.loss_history.back() < 0.5 * result.loss_history.front());
    // smoothed monotonicity: 5-epoch window means never increase much
    for (std::size_t i = 10; i + 5 < result.loss_history.size(); i += 5) {
        double w0 = 0.0, w1 = 0.0;
        for (int k = 0; k < 5; ++k) {
            w0 += result.loss_history[i - 5 + k];
            w1 += result.loss_history[i + k];
        }
        CHECK(w1 <= w0 * 1.05);
    }
}

TEST_CASE("validation_error: perfect and coin-flip predictors") {
    auto data = toy_dataset(6, 10, 77);
    auto x = toy_features(6, 77);
    Predictor model(6, 4, 8, 2, 29);

    // coin predictor: zero the output layer
    auto params = model.parameters();
    for (std::size_t i = params.size() - (8 * 6 + 6); i < params.size(); ++i) params[i] = 0.0;
    model.set_parameters(params);
    CHECK(model.validation_error(data, x) == doctest::Approx(0.25));

    // overfit on one record: its own label scores ~0
    Predictor memor(6, 4, 8, 2, 31);
    std::vector<TrialRecord> one = {data[0]};
    TrainConfig cfg;
    cfg.epochs = 600;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.05;
    auto history = memor.train(one, x, cfg);
    CHECK(memor.validation_error(one, x) < 1e-3);
}

TEST_CASE("predicted_payoff equals the label rate for a memorized record") {
    auto data = toy_dataset(8, 1, 88);
    auto x = toy_features(8, 88);
    Predictor model(8, 4, 8, 2, 37);
    TrainConfig cfg;
    cfg.epochs = 800;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.05;
    model.train(data, x, cfg);
    double expected = static_cast<double>(data[0].omega.size()) / 8.0;
    CHECK(model.predicted_payoff(data[0].alpha_a, data[0].alpha_d, x) ==
          doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("checkpoint round-trips through float32") {
    Predictor model(7, 4, 8, 2, 41);
    auto data = toy_dataset(7, 15, 99);
    auto x = toy_features(7, 99);
    TrainConfig cfg;
    cfg.epochs = 3;
    model.train(data, x, cfg);

    auto path = (std::filesystem::temp_directory_path() / "cascnet_model.ckpt").string();
    model.save_checkpoint(path);
    Predictor loaded = Predictor::load_checkpoint(path);
    CHECK(loaded.nodes() == 7);
    CHECK(loaded.embed_dim() == 4);
    auto a = model.forward(data[0].alpha_a, data[0].alpha_d, x);
    auto b = loaded.forward(data[0].alpha_a, data[0].alpha_d, x);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5); // float32 quantization only
}

TEST_CASE("predicted_payoffs batch matches single forwards") {
    Predictor model(8, 4, 8, 2, 43);
    auto x = toy_features(8, 43);
    std::vector<std::pair<NodePair, NodePair>> duels;
    for (int i = 0; i < 20; ++i)
        duels.emplace_back(NodePair(i % 7, 7), NodePair((i + 1) % 6, 6));
    auto batch = model.predicted_payoffs(duels, x);
    for (std::size_t i = 0; i < duels.size(); ++i)
        CHECK(batch[i] ==
              doctest::Approx(model.predicted_payoff(duels[i].first, duels[i].second, x))
                  .epsilon(1e-12));
}
