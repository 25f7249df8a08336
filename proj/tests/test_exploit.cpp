#include "doctest.h"

#include <cmath>

#include "cascnet/errors.hpp"
#include "cascnet/exploit.hpp"
#include "cascnet/pipeline.hpp"
#include "oracles.hpp"

using namespace cascnet;

namespace {

SynthesizedStrategy pure_strategy(int action) {
    SynthesizedStrategy s;
    s.support = {action};
    s.probs = {1.0};
    return s;
}

SynthesizedStrategy from_mixed(const MixedStrategy& m) {
    SynthesizedStrategy s;
    for (std::size_t i = 0; i < m.probs.size(); ++i)
        if (m.probs[i] > 0.0) {
            s.support.push_back(static_cast<int>(i));
            s.probs.push_back(m.probs[i]);
        }
    return s;
}

} // namespace

TEST_CASE("UCB1 concentrates on the better arm") {
    // two deterministic arms with payoffs 1 and 0 against a fixed ego:
    // emulate via a 2-node-pair game where one attack wipes the graph
    Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    NodeFeatures phi = NodeFeatures::thresholds({0.5, 0.5, 0.5, 0.5});
    CascadeModel model(CascadeKind::Threshold, g, phi);
    ActionSpace full = ActionSpace::full(4);
    // ego defender always defends (2,3); attacking (0,1) fails the whole
    // cycle, attacking (2,3) achieves nothing
    SynthesizedStrategy ego_def = pure_strategy(full.index_of(NodePair(2, 3)));

    ExploiterConfig cfg;
    cfg.pulls_budget = 10000;
    cfg.seed = 3;
    cfg.arm_pool_size = 600;
    auto result = train_exploiter(model, ego_def, Side::Defender, cfg);
    CHECK(result.arm_action == full.index_of(NodePair(0, 1)));
    CHECK(result.mean_payoff == doctest::Approx(1.0));
}

TEST_CASE("single-arm pool returns that arm") {
    Graph g = oracle::random_connected_graph(6, 0.5, 4);
    NodeFeatures phi = generate_thresholds(6, 5);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    SynthesizedStrategy ego = pure_strategy(0);
    ExploiterConfig cfg;
    cfg.pulls_budget = 50;
    cfg.arm_pool_size = 1;
    cfg.seed = 8;
    auto result = train_exploiter(model, ego, Side::Defender, cfg);
    CHECK(result.arm_pool.size() == 1);
    CHECK(result.arm_action == result.arm_pool[0]);
}

TEST_CASE("exploiting an exact NE yields roughly the game value") {
    Graph g = oracle::random_connected_graph(8, 0.4, 12);
    NodeFeatures phi = generate_thresholds(8, 13);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    ActionSpace full = ActionSpace::full(8);
    PayoffMatrix truth = build_payoff_matrix(model, full, full);
    NESolution ne = solve_zero_sum_ne(truth);

    ExploiterConfig cfg;
    cfg.pulls_budget = 30000;
    cfg.seed = 21;
    cfg.true_matrix = &truth;
    auto vs_def = train_exploiter(model, from_mixed(ne.pi_d), Side::Defender, cfg);
    CHECK(std::fabs(vs_def.mean_payoff - ne.value) < 0.015);
}

TEST_CASE("exploitability: Eq. 12 arithmetic and NE near-zero") {
    ExploitabilityReport r;
    r.delta_xd = 0.3;
    r.delta_g = 0.1;
    r.delta_xa = -0.05;
    r.delta = (r.delta_xd - r.delta_g) + (r.delta_xa + r.delta_g);
    CHECK(r.delta == doctest::Approx(0.25));

    Graph g = oracle::random_connected_graph(8, 0.4, 31);
    NodeFeatures phi = generate_thresholds(8, 32);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    ActionSpace full = ActionSpace::full(8);
    PayoffMatrix truth = build_payoff_matrix(model, full, full);
    NESolution ne = solve_zero_sum_ne(truth);

    ExploiterConfig cfg;
    cfg.pulls_budget = 20000;
    cfg.seed = 5;
    cfg.true_matrix = &truth;
    auto report = exploitability(model, from_mixed(ne.pi_a), from_mixed(ne.pi_d), cfg);
    CHECK(report.delta == doctest::Approx((report.delta_xd - report.delta_g) +
                                          (report.delta_xa + report.delta_g)));
    CHECK(report.delta <= 0.02); // MC noise only

    // uniform ego pair is strictly more exploitable on a game with spread
    auto uniform_report = exploitability(model, from_mixed(MixedStrategy::uniform(full.size())),
                                         from_mixed(MixedStrategy::uniform(full.size())), cfg);
    CHECK(uniform_report.delta > report.delta);
}

TEST_CASE("kl_to_ne") {
    MixedStrategy a = MixedStrategy::uniform(4);
    CHECK(kl_to_ne(a, a) == doctest::Approx(0.0).epsilon(1e-9));

    MixedStrategy point = MixedStrategy::pure(0, 4);
    MixedStrategy off;
    off.probs = {0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3};
    double kl = kl_to_ne(point, off);
    // mass on an action the NE never plays: ~ln(1/(eps/4))
    CHECK(kl > 15.0);
    CHECK(std::isfinite(kl));

    // asymmetry on a random pair
    MixedStrategy p, q;
    p.probs = {0.7, 0.2, 0.1};
    q.probs = {0.1, 0.3, 0.6};
    CHECK(kl_to_ne(p, q) != doctest::Approx(kl_to_ne(q, p)));
    CHECK(kl_to_ne(p, q) >= 0.0);

    MixedStrategy wrong;
    wrong.probs = {0.5, 0.5};
    CHECK_THROWS_AS(kl_to_ne(p, wrong), DimensionMismatch);
}

TEST_CASE("a richer arm pool never hurts the exploiter (statistically)") {
    Graph g = oracle::random_connected_graph(10, 0.35, 41);
    NodeFeatures phi = generate_thresholds(10, 42);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    ActionSpace full = ActionSpace::full(10);
    SynthesizedStrategy ego = from_mixed(MixedStrategy::uniform(full.size()));

    double full_pool_total = 0.0, small_pool_total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ExploiterConfig big;
        big.pulls_budget = 8000;
        big.arm_pool_size = full.size();
        big.seed = seed;
        full_pool_total += train_exploiter(model, ego, Side::Defender, big).mean_payoff;
        ExploiterConfig small = big;
        small.arm_pool_size = 5;
        small_pool_total += train_exploiter(model, ego, Side::Defender, small).mean_payoff;
    }
    CHECK(full_pool_total >= small_pool_total - 1e-9);
}
