#include "cascnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "cascnet/errors.hpp"
#include "cascnet/rng.hpp"

namespace cascnet {

namespace {
constexpr int kDistInf = std::numeric_limits<int>::max();
constexpr int kConnectRetries = 200;
} // namespace

Graph::Graph(int node_count, std::vector<std::pair<Node, Node>> edges) : n_(node_count) {
    if (n_ < 1) throw InvalidParams("Graph: node_count must be positive");
    std::set<std::pair<Node, Node>> dedup;
    for (auto [u, v] : edges) {
        if (u == v) throw SelfLoopError(u, 0);
        if (u < 0 || v < 0 || u >= n_ || v >= n_)
            throw InvalidParams("Graph: edge endpoint out of range");
        if (u > v) std::swap(u, v);
        dedup.emplace(u, v);
    }
    edges_.assign(dedup.begin(), dedup.end());
    adj_.resize(n_);
    for (auto [u, v] : edges_) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

bool Graph::has_edge(Node u, Node v) const {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
    const auto& nb = adj_[u];
    return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::is_connected() const {
    if (n_ == 0) return true;
    std::vector<char> seen(n_, 0);
    std::queue<Node> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        Node u = q.front();
        q.pop();
        for (Node w : adj_[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                q.push(w);
            }
        }
    }
    return count == n_;
}

namespace {

Graph sample_erdos_renyi(int n, double p, Rng& rng) {
    std::vector<std::pair<Node, Node>> edges;
    for (Node u = 0; u < n; ++u)
        for (Node v = u + 1; v < n; ++v)
            if (rng.uniform01() < p) edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

Graph sample_barabasi_albert(int n, int m, Rng& rng) {
    // m-clique core, then preferential attachment via the repeated-ends list.
    std::vector<std::pair<Node, Node>> edges;
    std::vector<Node> ends;
    int core = std::max(m, 1);
    for (Node u = 0; u < core && u < n; ++u)
        for (Node v = u + 1; v < core; ++v) {
            edges.emplace_back(u, v);
            ends.push_back(u);
            ends.push_back(v);
        }
    if (core == 1 && n > 1) ends.push_back(0);
    for (Node v = core; v < n; ++v) {
        std::set<Node> targets;
        int guard = 0;
        while (static_cast<int>(targets.size()) < std::min(m, v)) {
            Node t = ends.empty() ? static_cast<Node>(rng.below(v))
                                  : ends[rng.below(ends.size())];
            targets.insert(t);
            if (++guard > 50 * m) {
                while (static_cast<int>(targets.size()) < std::min(m, v))
                    targets.insert(static_cast<Node>(rng.below(v)));
            }
        }
        for (Node t : targets) {
            edges.emplace_back(t, v);
            ends.push_back(t);
            ends.push_back(v);
        }
    }
    return Graph(n, std::move(edges));
}

Graph sample_watts_strogatz(int n, int k, double beta, Rng& rng) {
    if (k >= n) throw InvalidParams("WattsStrogatz: k must be < N");
    std::set<std::pair<Node, Node>> edges;
    auto norm = [](Node a, Node b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); };
    for (Node u = 0; u < n; ++u)
        for (int j = 1; j <= k / 2; ++j) edges.insert(norm(u, (u + j) % n));
    std::vector<std::pair<Node, Node>> ring(edges.begin(), edges.end());
    for (auto [u, v] : ring) {
        if (rng.uniform01() >= beta) continue;
        // rewire the far end of (u, v)
        int guard = 0;
        while (guard++ < 100) {
            Node w = static_cast<Node>(rng.below(n));
            if (w == u || edges.count(norm(u, w))) continue;
            edges.erase(norm(u, v));
            edges.insert(norm(u, w));
            break;
        }
    }
    return Graph(n, std::vector<std::pair<Node, Node>>(edges.begin(), edges.end()));
}

} // namespace

Graph generate_graph(GraphModel model, const GraphParams& params, int n, std::uint64_t seed) {
    if (n < 2) throw InvalidParams("generate_graph: N must be >= 2");
    switch (model) {
        case GraphModel::ErdosRenyi: {
            double p = params.er_p > 0.0 ? params.er_p : std::min(1.0, 2.0 * std::log(n) / n);
            if (p <= 0.0 || p > 1.0) throw InvalidParams("ErdosRenyi: p must be in (0, 1]");
            for (int attempt = 0; attempt < kConnectRetries; ++attempt) {
                Rng rng(mix_seed(seed, 0x45520000u, attempt));
                Graph g = sample_erdos_renyi(n, p, rng);
                if (g.is_connected()) return g;
            }
            throw UnconnectableParams("ErdosRenyi: no connected sample within retry budget");
        }
        case GraphModel::BarabasiAlbert: {
            if (params.ba_m < 1 || params.ba_m >= n)
                throw InvalidParams("BarabasiAlbert: m must be in [1, N)");
            Rng rng(mix_seed(seed, 0x42410000u));
            Graph g = sample_barabasi_albert(n, params.ba_m, rng);
            if (!g.is_connected())
                throw UnconnectableParams("BarabasiAlbert: disconnected sample");
            return g;
        }
        case GraphModel::WattsStrogatz: {
            if (params.ws_k < 2 || params.ws_k % 2 != 0)
                throw InvalidParams("WattsStrogatz: k must be even and >= 2");
            if (params.ws_beta < 0.0 || params.ws_beta > 1.0)
                throw InvalidParams("WattsStrogatz: beta must be in [0, 1]");
            for (int attempt = 0; attempt < kConnectRetries; ++attempt) {
                Rng rng(mix_seed(seed, 0x57530000u, attempt));
                Graph g = sample_watts_strogatz(n, params.ws_k, params.ws_beta, rng);
                if (g.is_connected()) return g;
            }
            throw UnconnectableParams("WattsStrogatz: no connected sample within retry budget");
        }
    }
    throw InvalidParams("generate_graph: unknown model");
}

Graph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<std::pair<Node, Node>> edges;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        if (n < 0) {
            if (!(ss >> n) || n < 1) throw ParseError("expected positive node count", lineno);
            continue;
        }
        Node u, v;
        if (!(ss >> u)) {
            std::string rest;
            if (ss >> rest) throw ParseError("expected \"u v\"", lineno);
            continue; // blank line
        }
        if (!(ss >> v)) throw ParseError("expected \"u v\"", lineno);
        if (u == v) throw SelfLoopError(u, lineno);
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw ParseError("node index out of range", lineno);
        edges.emplace_back(u, v);
    }
    if (n < 0) throw ParseError("empty edge-list file", 0);
    return Graph(n, std::move(edges));
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << g.node_count() << "\n";
    for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
}

std::vector<std::vector<Node>> connected_components(const Graph& g,
                                                    const std::vector<Node>& subset) {
    std::vector<char> in_subset(g.node_count(), 0);
    for (Node v : subset) in_subset[v] = 1;
    std::vector<char> seen(g.node_count(), 0);
    std::vector<std::vector<Node>> comps;
    std::vector<Node> order(subset);
    std::sort(order.begin(), order.end());
    for (Node s : order) {
        if (seen[s]) continue;
        std::vector<Node> comp;
        std::queue<Node> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty()) {
            Node u = q.front();
            q.pop();
            comp.push_back(u);
            for (Node w : g.neighbors(u)) {
                if (in_subset[w] && !seen[w]) {
                    seen[w] = 1;
                    q.push(w);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

namespace {

// BFS distances from src on G - removed (removed nodes get kDistInf).
void bfs_dist(const Graph& g, Node src, const std::vector<char>& removed,
              std::vector<int>& dist) {
    std::fill(dist.begin(), dist.end(), kDistInf);
    if (removed[src]) return;
    std::queue<Node> q;
    q.push(src);
    dist[src] = 0;
    while (!q.empty()) {
        Node u = q.front();
        q.pop();
        for (Node w : g.neighbors(u)) {
            if (!removed[w] && dist[w] == kDistInf) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
}

std::vector<double> loads_single_path(const Graph& g, const std::vector<char>& removed) {
    const int n = g.node_count();
    std::vector<double> load(n, 0.0);
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, kDistInf));
    for (Node s = 0; s < n; ++s)
        if (!removed[s]) bfs_dist(g, s, removed, dist[s]);

    // For each unordered pair, walk the lexicographically smallest shortest
    // path greedily: from the current node step to the smallest neighbor
    // that still decreases the distance to the target.
    for (Node s = 0; s < n; ++s) {
        if (removed[s]) continue;
        for (Node t = s + 1; t < n; ++t) {
            if (removed[t]) continue;
            int d = dist[s][t];
            if (d == kDistInf || d <= 1) continue;
            Node cur = s;
            while (dist[cur][t] > 1) {
                int want = dist[cur][t] - 1;
                for (Node w : g.neighbors(cur)) {
                    if (!removed[w] && dist[w][t] == want) {
                        cur = w;
                        break;
                    }
                }
                if (cur != t) load[cur] += 1.0;
            }
        }
    }
    for (Node v = 0; v < n; ++v)
        if (removed[v]) load[v] = std::numeric_limits<double>::quiet_NaN();
    return load;
}

// Brandes accumulation restricted to the surviving subgraph. Each unordered
// pair contributes one unit of load split across its tied shortest paths.
std::vector<double> loads_all_paths(const Graph& g, const std::vector<char>& removed) {
    const int n = g.node_count();
    std::vector<double> load(n, 0.0);
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<Node>> preds(n);
    std::vector<Node> order;
    order.reserve(n);

    for (Node s = 0; s < n; ++s) {
        if (removed[s]) continue;
        std::fill(dist.begin(), dist.end(), kDistInf);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();

        std::queue<Node> q;
        dist[s] = 0;
        sigma[s] = 1.0;
        q.push(s);
        while (!q.empty()) {
            Node u = q.front();
            q.pop();
            order.push_back(u);
            for (Node w : g.neighbors(u)) {
                if (removed[w]) continue;
                if (dist[w] == kDistInf) {
                    dist[w] = dist[u] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[u] + 1) {
                    sigma[w] += sigma[u];
                    preds[w].push_back(u);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node w = *it;
            for (Node u : preds[w]) delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
            if (w != s) load[w] += delta[w];
        }
    }
    // each pair was counted from both endpoints
    for (Node v = 0; v < n; ++v) load[v] *= 0.5;
    for (Node v = 0; v < n; ++v)
        if (removed[v]) load[v] = std::numeric_limits<double>::quiet_NaN();
    return load;
}

} // namespace

std::vector<double> shortest_path_loads(const Graph& g, const std::vector<Node>& removed,
                                        LoadMode mode) {
    std::vector<char> rm(g.node_count(), 0);
    for (Node v : removed) {
        if (v < 0 || v >= g.node_count())
            throw InvalidParams("shortest_path_loads: removed node out of range");
        rm[v] = 1;
    }
    return mode == LoadMode::SinglePath ? loads_single_path(g, rm) : loads_all_paths(g, rm);
}

CentralityTable centralities(const Graph& g) {
    const int n = g.node_count();
    if (!g.is_connected()) throw InvalidParams("centralities: graph must be connected");
    CentralityTable table;
    table.degree.resize(n);
    table.closeness.resize(n);
    for (Node v = 0; v < n; ++v) table.degree[v] = g.degree(v);

    std::vector<char> removed(n, 0);
    std::vector<int> dist(n);
    for (Node v = 0; v < n; ++v) {
        bfs_dist(g, v, removed, dist);
        long long total = 0;
        for (Node w = 0; w < n; ++w) total += dist[w];
        table.closeness[v] = total > 0 ? static_cast<double>(n - 1) / total : 0.0;
    }

    table.betweenness = loads_all_paths(g, removed);

    // eigenvector centrality by power iteration on A + I (the shift keeps
    // bipartite graphs from oscillating), normalized to unit max
    std::vector<double> x(n, 1.0 / n), next(n);
    const double tol = 1e-8;
    const int max_iter = 100000;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        for (Node v = 0; v < n; ++v) {
            double acc = x[v];
            for (Node w : g.neighbors(v)) acc += x[w];
            next[v] = acc;
        }
        double norm = 0.0;
        for (double a : next) norm += a * a;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw PowerIterationDiverged("eigenvector: zero vector");
        double diff = 0.0;
        for (Node v = 0; v < n; ++v) {
            next[v] /= norm;
            diff = std::max(diff, std::fabs(next[v] - x[v]));
        }
        x = next;
        if (diff < tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw PowerIterationDiverged("eigenvector: no convergence");
    double mx = *std::max_element(x.begin(), x.end());
    for (double& a : x) a /= mx;
    table.eigenvector = std::move(x);
    return table;
}

} // namespace cascnet
