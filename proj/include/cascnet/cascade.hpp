#pragma once

#include <vector>

#include "cascnet/features.hpp"
#include "cascnet/graph.hpp"

namespace cascnet {

enum class CascadeKind { Threshold, ShortestPath };

/// A cascade model binds a graph to node features of the matching kind.
/// Pure view type; cascades over the same graph may run concurrently.
struct CascadeModel {
    CascadeKind kind;
    const Graph* graph;
    const NodeFeatures* features;
    LoadMode load_mode = LoadMode::SinglePath;

    CascadeModel(CascadeKind kind, const Graph& g, const NodeFeatures& f,
                 LoadMode mode = LoadMode::SinglePath);
};

struct CascadeOutcome {
    std::vector<Node> theta;               // seed set, sorted
    std::vector<std::vector<Node>> rounds; // new failures per round, sorted
    std::vector<Node> omega;               // theta plus all rounds, sorted

    int round_count() const { return static_cast<int>(rounds.size()); }
};

/// One synchronous round: every node outside omega_t that meets its failure
/// criterion against omega_t. Threshold: failed-neighbor fraction >= phi_v
/// (isolated nodes never fail). ShortestPath: recomputed load > k_v.
std::vector<Node> single_round(const CascadeModel& model, const std::vector<Node>& omega_t);

/// Iterates single_round from the seed set until steady state.
CascadeOutcome run_cascade(const CascadeModel& model, const std::vector<Node>& theta);

} // namespace cascnet
