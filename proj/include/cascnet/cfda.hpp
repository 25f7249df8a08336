#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascnet/datagen.hpp"

namespace cascnet {

enum class DiscardReason {
    None,
    EmptyTheta,     // fully defended trial, nothing to attribute
    Merged,         // threshold: both seeds share one failed component
    Inseparable,    // shortest-path: two-seed cascade cannot be split
};

/// Per-seed decomposition of one factual trial's failure set.
struct Attribution {
    int trial_index = -1;
    int subspace_id = -1;
    NodePair alpha_d;                       // source trial's defense action
    std::vector<Node> seeds;                // attributed seeds of the source trial
    std::vector<std::vector<Node>> omega_v; // contribution set per seed, sorted
    // ShortestPath only: load delta gamma_v(n) = l_n(Omega_v) - lambda_n per
    // seed (NaN on removed nodes), and the summed baseline load of Omega_v.
    std::vector<std::vector<double>> gamma_v;
    std::vector<double> lambda_sum;
};

struct AttributionResult {
    std::optional<Attribution> attribution;
    DiscardReason discard = DiscardReason::None;

    bool attributed() const { return attribution.has_value(); }
};

/// Threshold trials decompose along the connected components of G[Omega];
/// a two-seed trial whose cascades merged is discarded.
AttributionResult attribute_threshold(const TrialRecord& trial, const Graph& g);

/// Shortest-path trials attribute only from single-seed cascades (one APSP
/// on G - Omega gives the load deltas); two-seed trials are discarded.
AttributionResult attribute_shortest_path(const TrialRecord& trial, const Graph& g,
                                          const NodeFeatures& features,
                                          LoadMode mode = LoadMode::SinglePath);

struct CounterfactualCandidate {
    Node v = -1;
    Node w = -1;                  // seeds from the two source attributions
    NodePair alpha_a_hat;         // {v, w}
    NodePair alpha_d_hat;         // one defended node from each source, disjoint from {v, w}
    std::vector<Node> omega_hat;  // Omega_v union Omega_w, sorted
    bool contributions_overlap = false; // Omega_v and Omega_w intersect: reject downstream
};

/// Combines one seed from each attribution into a candidate trial. The two
/// attributions must come from different subspaces. Throws NoValidDefense
/// when no pair of source-defense nodes avoids {v, w}.
CounterfactualCandidate propose_counterfactual(const Attribution& attr1,
                                               const Attribution& attr2, std::uint64_t seed);

enum class Validation { Accept, Reject };
enum class SpValidationMode { Fast, Strict };

/// Accepts iff no node outside omega_hat meets its threshold against
/// omega_hat (a single round of checking).
Validation validate_threshold(const CounterfactualCandidate& cand, const Graph& g,
                              const NodeFeatures& features);

/// Fast: accepts when either directional capacity bound holds (baseline +
/// own-seed load delta + other side's summed baseline load stays within
/// capacity everywhere outside omega_hat). Strict: candidates failing Fast
/// get the exact one-round steadiness check via a single APSP.
Validation validate_shortest_path(const CounterfactualCandidate& cand, const Attribution& attr1,
                                  int seed_idx1, const Attribution& attr2, int seed_idx2,
                                  const Graph& g, const NodeFeatures& features,
                                  SpValidationMode mode = SpValidationMode::Strict,
                                  LoadMode load_mode = LoadMode::SinglePath);

struct CfdaStats {
    std::int64_t n_fac = 0;
    std::int64_t n_cfac = 0;
    double ms_per_fac = 0.0;
    double ms_per_cfac = 0.0;
    std::int64_t pairs_examined = 0;
    std::map<std::string, std::int64_t> reject_reasons;
};

struct CfdaOptions {
    double cap_factor = 10.0;      // accepted cap = cap_factor * |factual|; <= 0 disables
    std::int64_t max_pairs = 0;    // cap on examined pairs; <= 0 exhausts the stream
    SpValidationMode sp_mode = SpValidationMode::Strict;
    LoadMode load_mode = LoadMode::SinglePath;
    int threads = 0;
    double factual_wall_ms = 0.0;  // measured factual generation time, for stats
};

/// Streams random cross-subspace trial pairs (without replacement, seeded),
/// attributes, proposes and validates, stopping at the cap or when the pair
/// stream is exhausted. Candidate evaluation runs in parallel chunks that
/// commit in stream order, so output is thread-count invariant.
std::pair<std::vector<TrialRecord>, CfdaStats> generate_counterfactual_dataset(
    const CascadeModel& model, const std::vector<TrialRecord>& factual, std::uint64_t seed,
    const CfdaOptions& options = {});

void save_cfda_stats(const CfdaStats& stats, const std::string& path);

} // namespace cascnet
