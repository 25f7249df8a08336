#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascnet/strategy.hpp"

namespace cascnet {

struct ExploiterConfig {
    int arm_pool_size = 512;     // cap before the arm pool gets subsampled
    std::int64_t pulls_budget = 50000;
    double ucb_c = 1.4142135623730951; // sqrt(2)
    std::uint64_t seed = 0;
    int eval_plays = 5000;       // fresh evaluation batch for the chosen arm
    int selfplay_plays = 10000;  // ego-vs-ego batch for delta_g
    int threads = 0;
    const PayoffMatrix* true_matrix = nullptr; // when available (N <= 25),
                                               // best responses join the pool
};

struct ExploiterResult {
    SynthesizedStrategy strategy; // pure: the empirical best arm
    int arm_action = -1;          // action index in the full space
    double mean_payoff = 0.0;     // exploiter's own payoff on the fresh batch
    std::vector<int> arm_pool;
};

/// UCB1 over a pool of pure actions against samples of the fixed ego
/// strategy. Returns the empirically best arm and its mean payoff over a
/// fresh evaluation batch (the exploiter's own payoff: attacker payoff when
/// exploiting the defender, defender payoff when exploiting the attacker).
ExploiterResult train_exploiter(const CascadeModel& model, const SynthesizedStrategy& ego,
                                Side side_to_exploit, const ExploiterConfig& config);

struct ExploitabilityReport {
    double delta_g = 0.0;  // ego-vs-ego mean attacker payoff
    double delta_xd = 0.0; // attacker payoff of the exploiter facing ego defender
    double delta_xa = 0.0; // defender payoff of the exploiter facing ego attacker
    double delta = 0.0;    // (delta_xd - delta_g) + (delta_xa + delta_g)
    std::int64_t pulls = 0;
    std::vector<int> arm_pool_attacker;
    std::vector<int> arm_pool_defender;
};

/// Trains one exploiter per side and combines their payoffs into the
/// exploitability estimate.
ExploitabilityReport exploitability(const CascadeModel& model, const SynthesizedStrategy& ego_atk,
                                    const SynthesizedStrategy& ego_def,
                                    const ExploiterConfig& config);

/// KL(method || ne_eps) for one player, with ne_eps = (1-eps) ne +
/// eps uniform, eps = 1e-9. Callers sum the two players' values.
double kl_to_ne(const MixedStrategy& method_strategy, const MixedStrategy& ne_strategy);

void save_exploitability_json(const ExploitabilityReport& report, const std::string& path);

} // namespace cascnet
