#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascnet/game.hpp"

namespace cascnet {

/// A restricted game over a small node pool.
struct SubactionSpace {
    int id = 0;
    std::vector<Node> node_pool;        // M distinct nodes
    std::vector<NodePair> actions;      // (M choose 2) pairs, lexicographic
};

enum class Provenance { Factual, Counterfactual };

/// One simulated (or synthesized) engagement.
struct TrialRecord {
    NodePair alpha_a;
    NodePair alpha_d;
    std::vector<Node> omega;            // failed nodes, sorted (multi-hot support)
    int subspace_id = -1;               // -1 when drawn from the full space
    Provenance provenance = Provenance::Factual;
};

/// p pools of M nodes drawn uniformly without replacement (pools are
/// independent, so overlap between them is possible). Deterministic per
/// seed. Nodes missed by every pool are reported through uncovered (and a
/// warning on stderr) when requested.
std::vector<SubactionSpace> partition_subaction_spaces(int n, int m, int p, std::uint64_t seed,
                                                       std::vector<Node>* uncovered = nullptr);

struct FactualStats {
    std::int64_t trials = 0;
    double wall_ms = 0.0;
};

/// q trials per space. When q equals (M choose 2)^2 every joint action in
/// the space is played exactly once, in canonical order; otherwise q joint
/// actions are sampled uniformly without replacement. Spaces generate in
/// parallel; per-space RNG streams keep results thread-count invariant.
std::vector<TrialRecord> generate_factual_dataset(const CascadeModel& model,
                                                  const std::vector<SubactionSpace>& spaces,
                                                  std::int64_t q, std::uint64_t seed,
                                                  int threads = 0,
                                                  FactualStats* stats = nullptr);

/// Uniform joint actions from the full space, the unpartitioned ablation.
std::vector<TrialRecord> generate_uniform_dataset(const CascadeModel& model, std::int64_t count,
                                                  std::uint64_t seed, int threads = 0,
                                                  FactualStats* stats = nullptr);

/// Keeps the first occurrence of each (alpha_a, alpha_d) joint action.
std::pair<std::vector<TrialRecord>, std::int64_t> deduplicate(std::vector<TrialRecord> records);

/// JSON-lines: {"atk":[u,v],"def":[u,v],"omega":[...],"sub":id,"src":"fac"|"cfac"}
void save_dataset_jsonl(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> load_dataset_jsonl(const std::string& path);
void append_dataset_jsonl(const std::vector<TrialRecord>& records, const std::string& path);

struct DatasetMeta {
    std::uint64_t graph_seed = 0;
    std::string cascade;
    int pool_size = 0;
    int subspaces = 0;
    std::int64_t trials_per_space = 0;
};

void save_dataset_meta(const DatasetMeta& meta, const std::string& path);

} // namespace cascnet
