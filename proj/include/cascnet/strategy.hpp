#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cascnet/game.hpp"
#include "cascnet/predictor.hpp"

namespace cascnet {

enum class StrategySource { PredictorLP, Baseline, ExactNE };

/// Mixed strategy with an explicit support over a parent action space.
struct SynthesizedStrategy {
    std::vector<int> support;   // action indices into the parent space
    std::vector<double> probs;  // matching probabilities, sum to 1
    StrategySource source = StrategySource::Baseline;

    /// Dense distribution over the parent space.
    MixedStrategy to_mixed(int space_size) const;
};

/// Equal probability on every action of the space.
SynthesizedStrategy uniform_strategy(const ActionSpace& space);

class Rng;

/// Draws an action index from the strategy's support (inverse CDF).
int sample_action(const SynthesizedStrategy& strategy, Rng& rng);

struct EwmTopsisResult {
    std::vector<double> weights; // per centrality column, sum to 1
    std::vector<double> scores;  // TOPSIS relative closeness per node
    std::vector<Node> ranking;   // nodes by descending score, index tie-break
};

/// Entropy-weighted TOPSIS over the four centrality columns. Min-max
/// normalizes each column, weights by (1 - entropy), and scores by relative
/// closeness to the ideal point. Degenerate (constant) columns get weight 0.
EwmTopsisResult ewm_topsis_ranking(const CentralityTable& table);

enum class PairRule { TopTwo, TopWeightedSampling };

/// TopTwo: deterministic pair of the two best-ranked nodes.
/// TopWeightedSampling: pair sampled with probability proportional to the
/// product of the nodes' scores.
SynthesizedStrategy heuristic_strategy(const EwmTopsisResult& ranking, PairRule rule,
                                       const ActionSpace& space, std::uint64_t seed = 0);

/// The strategy-restricted game: named sampling policies as meta-actions.
struct MetaAction {
    std::string name;
    SynthesizedStrategy sampler; // distribution over the full action space
};

struct RestrictedStrategyGame {
    std::vector<MetaAction> attacker_metas;
    std::vector<MetaAction> defender_metas;
    PayoffMatrix payoff; // Monte-Carlo mean payoffs per meta pair
    MixedStrategy ne_attacker;
    MixedStrategy ne_defender;
    double value = 0.0;

    /// Meta mixture flattened to a distribution over the full action space.
    MixedStrategy induced_attacker(int space_size) const;
    MixedStrategy induced_defender(int space_size) const;
};

/// Estimates each cell by Monte-Carlo mean payoff of sampled meta-action
/// pairs, then solves the small game exactly (closed form for 2x2).
RestrictedStrategyGame restricted_strategy_ne(const CascadeModel& model,
                                              const std::vector<MetaAction>& metas_a,
                                              const std::vector<MetaAction>& metas_d,
                                              int samples_per_cell, std::uint64_t seed,
                                              int threads = 0);

/// Exact NE of a 2x2 zero-sum game (saddle point or closed-form mix).
NESolution solve_2x2(const PayoffMatrix& p);

struct SynthesisOptions {
    int k_candidates = 0;           // 0: auto by N (full at 25, 200 at 100, 400 above)
    std::int64_t max_entries = 1 << 20;
    int threads = 0;
};

/// Candidate-restricted strategy synthesis from a trained predictor: pools
/// the top-(k/2) actions by predicted unopposed payoff plus (k/2) uniform
/// samples per side, prices the k x k duel matrix with the predictor, and
/// returns the zero-sum NE over that support.
std::pair<SynthesizedStrategy, SynthesizedStrategy> synthesize_from_predictor(
    const Predictor& model, const ActionSpace& space, const std::vector<double>& x,
    std::uint64_t seed, const SynthesisOptions& options = {});

/// Same construction with an arbitrary payoff oracle standing in for the
/// predictor; lets tests plug the true payoff function in.
std::pair<SynthesizedStrategy, SynthesizedStrategy> synthesize_from_oracle(
    const std::function<double(const NodePair&, const NodePair&)>& payoff,
    const ActionSpace& space, std::uint64_t seed, const SynthesisOptions& options = {});

/// Rankings CSV: node, four centralities, column weights, score, rank.
void save_ranking_csv(const CentralityTable& table, const EwmTopsisResult& result,
                      const std::string& path);

} // namespace cascnet
