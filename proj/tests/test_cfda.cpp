#include "doctest.h"

#include <set>

#include "cascnet/cfda.hpp"
#include "cascnet/errors.hpp"
#include "oracles.hpp"

using namespace cascnet;

namespace {

TrialRecord make_record(const NodePair& atk, const NodePair& def, std::vector<Node> omega,
                        int sub) {
    TrialRecord rec;
    rec.alpha_a = atk;
    rec.alpha_d = def;
    rec.omega = std::move(omega);
    rec.subspace_id = sub;
    return rec;
}

} // namespace

TEST_CASE("attribute_threshold: components, merge discard, single seed") {
    // two separate chains meeting nowhere: 0-1-2 and 4-5, node 3 isolates them
    Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}});
    // trial with seeds {0, 5}, omega {0,1,5} has two components {0,1}, {5}
    TrialRecord rec = make_record(NodePair(0, 5), NodePair(2, 3), {0, 1, 5}, 0);
    auto result = attribute_threshold(rec, g);
    REQUIRE(result.attributed());
    CHECK(result.attribution->seeds == std::vector<Node>{0, 5});
    CHECK(result.attribution->omega_v[0] == std::vector<Node>{0, 1});
    CHECK(result.attribution->omega_v[1] == std::vector<Node>{5});

    // merged: both seeds in one component
    TrialRecord merged = make_record(NodePair(0, 2), NodePair(4, 5), {0, 1, 2}, 1);
    auto mres = attribute_threshold(merged, g);
    CHECK(!mres.attributed());
    CHECK(mres.discard == DiscardReason::Merged);

    // single seed owns the whole cascade
    TrialRecord single = make_record(NodePair(0, 2), NodePair(2, 5), {0, 1}, 2);
    auto sres = attribute_threshold(single, g);
    REQUIRE(sres.attributed());
    CHECK(sres.attribution->seeds == std::vector<Node>{0});
    CHECK(sres.attribution->omega_v[0] == std::vector<Node>{0, 1});

    // fully defended
    TrialRecord defended = make_record(NodePair(0, 1), NodePair(0, 1), {}, 3);
    CHECK(attribute_threshold(defended, g).discard == DiscardReason::EmptyTheta);
}

TEST_CASE("attribute_shortest_path: single-seed gamma, two-seed discard") {
    Graph path(3, {{0, 1}, {1, 2}});
    NodeFeatures caps = generate_capacities(path, {});
    // seed b=1: pair (0,2) disconnects, all deltas end up zero or negative
    TrialRecord rec = make_record(NodePair(0, 1), NodePair(0, 2), {1}, 0);
    auto result = attribute_shortest_path(rec, path, caps);
    REQUIRE(result.attributed());
    const auto& gamma = result.attribution->gamma_v[0];
    CHECK(gamma[0] == doctest::Approx(0.0)); // load 0 before and after
    CHECK(gamma[2] == doctest::Approx(0.0));
    CHECK(result.attribution->lambda_sum[0] == doctest::Approx(1.0)); // lambda_1 = 1

    TrialRecord defended = make_record(NodePair(0, 1), NodePair(0, 1), {}, 2);
    CHECK(attribute_shortest_path(defended, path, caps).discard == DiscardReason::EmptyTheta);

    // disjoint attack and defense leaves two seeds: not separable
    Graph path4(4, {{0, 1}, {1, 2}, {2, 3}});
    NodeFeatures caps4 = generate_capacities(path4, {});
    TrialRecord two = make_record(NodePair(0, 3), NodePair(1, 2), {0, 3}, 1);
    CHECK(attribute_shortest_path(two, path4, caps4).discard == DiscardReason::Inseparable);
}

TEST_CASE("propose_counterfactual: construction and defense synthesis") {
    Attribution a1;
    a1.subspace_id = 3;
    a1.alpha_d = NodePair(10, 11);
    a1.seeds = {0};
    a1.omega_v = {{0, 1}};
    Attribution a2;
    a2.subspace_id = 7;
    a2.alpha_d = NodePair(12, 13);
    a2.seeds = {5};
    a2.omega_v = {{5, 6}};

    auto cand = propose_counterfactual(a1, a2, 42);
    CHECK(cand.alpha_a_hat == NodePair(0, 5));
    CHECK(cand.omega_hat == std::vector<Node>{0, 1, 5, 6});
    CHECK(!cand.contributions_overlap);
    CHECK(!cand.alpha_d_hat.contains(0));
    CHECK(!cand.alpha_d_hat.contains(5));
    // defense drew one node from each source defense
    CHECK((cand.alpha_d_hat.contains(10) || cand.alpha_d_hat.contains(11)));
    CHECK((cand.alpha_d_hat.contains(12) || cand.alpha_d_hat.contains(13)));

    // overlapping contributions get flagged for downstream rejection
    Attribution a3 = a2;
    a3.omega_v = {{1, 5}};
    auto flagged = propose_counterfactual(a1, a3, 42);
    CHECK(flagged.contributions_overlap);

    // same subspace violates the precondition
    Attribution a4 = a2;
    a4.subspace_id = 3;
    CHECK_THROWS_AS(propose_counterfactual(a1, a4, 0), InvalidParams);

    // every defense combination collides with the seeds
    Attribution a5 = a1;
    a5.alpha_d = NodePair(0, 5);
    Attribution a6 = a2;
    a6.subspace_id = 9;
    a6.alpha_d = NodePair(0, 5);
    CHECK_THROWS_AS(propose_counterfactual(a5, a6, 1), NoValidDefense);
}

TEST_CASE("validate_threshold: frontier rule") {
    // node 4 has neighbors {0, 1, 2, 3}; omega_hat = {0, 1} gives it 2/4
    Graph g(6, {{0, 4}, {1, 4}, {2, 4}, {3, 4}, {2, 5}});
    CounterfactualCandidate cand;
    cand.v = 0;
    cand.w = 1;
    cand.alpha_a_hat = NodePair(0, 1);
    cand.alpha_d_hat = NodePair(2, 3);
    cand.omega_hat = {0, 1};

    NodeFeatures reject_phi = NodeFeatures::thresholds({0.9, 0.9, 0.9, 0.9, 0.5, 0.9});
    CHECK(validate_threshold(cand, g, reject_phi) == Validation::Reject); // 0.5 >= 2/4

    NodeFeatures accept_phi = NodeFeatures::thresholds({0.9, 0.9, 0.9, 0.9, 0.51, 0.9});
    CHECK(validate_threshold(cand, g, accept_phi) == Validation::Accept);

    // omega_hat = V accepts vacuously
    CounterfactualCandidate all;
    all.alpha_a_hat = NodePair(0, 1);
    all.alpha_d_hat = NodePair(2, 3);
    all.omega_hat = {0, 1, 2, 3, 4, 5};
    CHECK(validate_threshold(all, g, reject_phi) == Validation::Accept);
}

TEST_CASE("validate_shortest_path: fast bound and strict recheck") {
    // theta graph: two endpoints joined by three disjoint paths
    //   s=0, t=1; path A via 2; path B via 3; path C via 4,5
    Graph g(6, {{0, 2}, {2, 1}, {0, 3}, {3, 1}, {0, 4}, {4, 5}, {5, 1}});
    std::vector<double> lambda = shortest_path_loads(g, {});

    auto make_attr = [&](Node seed, int sub) {
        Attribution attr;
        attr.subspace_id = sub;
        attr.alpha_d = NodePair(0, 1);
        attr.seeds = {seed};
        attr.omega_v = {{seed}};
        std::vector<double> loads = shortest_path_loads(g, {seed});
        std::vector<double> gamma(6);
        for (Node n = 0; n < 6; ++n) gamma[n] = loads[n] - lambda[n];
        attr.gamma_v = {gamma};
        attr.lambda_sum = {lambda[seed]};
        return attr;
    };

    CounterfactualCandidate cand;
    cand.v = 2;
    cand.w = 4;
    cand.alpha_a_hat = NodePair(2, 4);
    cand.alpha_d_hat = NodePair(0, 1);
    cand.omega_hat = {2, 4};
    Attribution attr_v = make_attr(2, 0);
    Attribution attr_w = make_attr(4, 1);

    // huge capacities: fast bound accepts outright
    NodeFeatures huge = NodeFeatures::capacities(std::vector<double>(6, 60.0), lambda);
    CHECK(validate_shortest_path(cand, attr_v, 0, attr_w, 0, g, huge,
                                 SpValidationMode::Fast) == Validation::Accept);
    // fast acceptance implies the same verdict under strict
    CHECK(validate_shortest_path(cand, attr_v, 0, attr_w, 0, g, huge,
                                 SpValidationMode::Strict) == Validation::Accept);

    // tight capacity on the surviving bridge node 3: removing both 2 and 4
    // forces every 0-1 unit through it; single removals stay within capacity
    std::vector<double> tight(6);
    for (Node n = 0; n < 6; ++n) tight[n] = lambda[n] + 1.0;
    std::vector<double> loads_both = shortest_path_loads(g, {2, 4});
    REQUIRE(loads_both[3] > tight[3]); // the union genuinely overloads node 3
    NodeFeatures caps = NodeFeatures::capacities(tight, lambda);
    CHECK(validate_shortest_path(cand, attr_v, 0, attr_w, 0, g, caps,
                                 SpValidationMode::Strict) == Validation::Reject);
}

TEST_CASE("generate_counterfactual_dataset: cap, determinism, empty input") {
    Graph g = oracle::random_connected_graph(30, 0.2, 17);
    NodeFeatures phi = generate_thresholds(30, 18);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    auto spaces = partition_subaction_spaces(30, 5, 40, 19);
    auto [factual, removed] = deduplicate(generate_factual_dataset(model, spaces, 100, 19));

    CfdaOptions opt;
    opt.cap_factor = 0.5;
    auto [cfac, stats] = generate_counterfactual_dataset(model, factual, 7, opt);
    CHECK(stats.n_fac == static_cast<std::int64_t>(factual.size()));
    CHECK(stats.n_cfac == static_cast<std::int64_t>(cfac.size()));
    // abundant candidates: the cap binds exactly
    CHECK(stats.n_cfac == std::llround(0.5 * static_cast<double>(factual.size())));
    for (const auto& rec : cfac) {
        CHECK(rec.provenance == Provenance::Counterfactual);
        CHECK(initial_failures(rec.alpha_a, rec.alpha_d) ==
              std::vector<Node>{rec.alpha_a.u, rec.alpha_a.v});
    }

    // thread-count invariance
    CfdaOptions opt1 = opt, opt4 = opt;
    opt1.threads = 1;
    opt4.threads = 4;
    auto [c1, s1] = generate_counterfactual_dataset(model, factual, 7, opt1);
    auto [c4, s4] = generate_counterfactual_dataset(model, factual, 7, opt4);
    REQUIRE(c1.size() == c4.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1[i].alpha_a == c4[i].alpha_a);
        CHECK(c1[i].alpha_d == c4[i].alpha_d);
        CHECK(c1[i].omega == c4[i].omega);
    }

    auto [none, zstats] = generate_counterfactual_dataset(model, {}, 7, opt);
    CHECK(none.empty());
    CHECK(zstats.n_cfac == 0);
}

TEST_CASE("accepted threshold counterfactuals replay exactly") {
    Graph g = oracle::random_connected_graph(40, 0.15, 23);
    NodeFeatures phi = generate_thresholds(40, 24);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    auto spaces = partition_subaction_spaces(40, 5, 60, 25);
    auto [factual, removed] = deduplicate(generate_factual_dataset(model, spaces, 100, 25));

    CfdaOptions opt;
    opt.cap_factor = 2.0;
    auto [cfac, stats] = generate_counterfactual_dataset(model, factual, 11, opt);
    REQUIRE(cfac.size() > 50);
    for (const auto& rec : cfac) {
        auto replay = run_cascade(model, initial_failures(rec.alpha_a, rec.alpha_d));
        CHECK(replay.omega == rec.omega); // Prop 1 is iff: labels are exact
    }
}

TEST_CASE("accepted shortest-path counterfactuals are steady") {
    Graph g = oracle::random_connected_graph(20, 0.25, 31);
    NodeFeatures caps = generate_capacities(g, {.alpha = 0.15, .c0 = 1.0});
    CascadeModel model(CascadeKind::ShortestPath, g, caps);
    auto spaces = partition_subaction_spaces(20, 5, 30, 32);
    auto [factual, removed] = deduplicate(generate_factual_dataset(model, spaces, 100, 32));

    CfdaOptions opt;
    opt.cap_factor = 1.0;
    auto [cfac, stats] = generate_counterfactual_dataset(model, factual, 13, opt);
    REQUIRE(!cfac.empty());
    for (const auto& rec : cfac)
        CHECK(single_round(model, rec.omega).empty());
}
