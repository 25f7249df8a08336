#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cascnet {

using Node = int;

/// Undirected simple graph. Immutable after construction; safe for
/// unrestricted concurrent reads.
class Graph {
public:
    Graph(int node_count, std::vector<std::pair<Node, Node>> edges);

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    /// Edges as (u, v) with u < v, sorted lexicographically.
    const std::vector<std::pair<Node, Node>>& edges() const { return edges_; }

    /// Sorted neighbor list of v.
    const std::vector<Node>& neighbors(Node v) const { return adj_[v]; }

    int degree(Node v) const { return static_cast<int>(adj_[v].size()); }

    bool has_edge(Node u, Node v) const;

    bool is_connected() const;

private:
    int n_;
    std::vector<std::pair<Node, Node>> edges_;
    std::vector<std::vector<Node>> adj_;
};

enum class GraphModel { ErdosRenyi, BarabasiAlbert, WattsStrogatz };

struct GraphParams {
    double er_p = 0.0;   // ErdosRenyi edge probability; <= 0 means 2 ln(N) / N
    int ba_m = 2;        // BarabasiAlbert attachments per new node
    int ws_k = 4;        // WattsStrogatz ring degree (even)
    double ws_beta = 0.1; // WattsStrogatz rewiring probability
};

/// Samples a connected graph; retries up to a bounded budget when the model
/// can produce disconnected graphs. Deterministic for a fixed seed.
Graph generate_graph(GraphModel model, const GraphParams& params, int n, std::uint64_t seed);

/// Edge-list text format: first line N, then one "u v" pair per line.
Graph load_edge_list(const std::string& path);
void save_edge_list(const Graph& g, const std::string& path);

/// Maximal connected sets of `subset` within the induced subgraph G[subset].
/// Components are ordered by smallest member; members sorted ascending.
std::vector<std::vector<Node>> connected_components(const Graph& g,
                                                    const std::vector<Node>& subset);

enum class LoadMode { SinglePath, AllPathsFractional };

/// Per-node shortest-path transit loads on G - removed. Entries for removed
/// nodes are NaN. SinglePath counts one deterministic (lexicographically
/// smallest) path per connected unordered pair; AllPathsFractional splits
/// each pair's unit of load equally across all tied shortest paths.
std::vector<double> shortest_path_loads(const Graph& g, const std::vector<Node>& removed,
                                        LoadMode mode = LoadMode::SinglePath);

struct CentralityTable {
    std::vector<double> degree;
    std::vector<double> closeness;
    std::vector<double> betweenness;
    std::vector<double> eigenvector;
};

/// Degree, closeness, betweenness (fractional credit across tied shortest
/// paths), and eigenvector centrality (power iteration, unit-max normalized).
/// Requires a connected graph.
CentralityTable centralities(const Graph& g);

} // namespace cascnet
