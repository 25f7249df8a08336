#include "cascnet/cascade.hpp"

#include <algorithm>

#include "cascnet/errors.hpp"

namespace cascnet {

CascadeModel::CascadeModel(CascadeKind kind, const Graph& g, const NodeFeatures& f, LoadMode mode)
    : kind(kind), graph(&g), features(&f), load_mode(mode) {
    if (f.size() != g.node_count())
        throw InvalidParams("CascadeModel: feature length does not match graph");
    bool kind_ok = (kind == CascadeKind::Threshold && f.kind() == FeatureKind::Threshold) ||
                   (kind == CascadeKind::ShortestPath && f.kind() == FeatureKind::Capacity);
    if (!kind_ok) throw InvalidParams("CascadeModel: feature kind does not match cascade kind");
}

namespace {

std::vector<Node> threshold_round(const Graph& g, const NodeFeatures& f,
                                  const std::vector<char>& failed) {
    std::vector<Node> next;
    for (Node v = 0; v < g.node_count(); ++v) {
        if (failed[v]) continue;
        int deg = g.degree(v);
        if (deg == 0) continue; // isolated nodes never fail
        int cnt = 0;
        for (Node w : g.neighbors(v)) cnt += failed[w];
        if (static_cast<double>(cnt) / deg >= f.threshold(v)) next.push_back(v);
    }
    return next;
}

std::vector<Node> shortest_path_round(const CascadeModel& model,
                                      const std::vector<Node>& omega_t) {
    const Graph& g = *model.graph;
    std::vector<double> load = shortest_path_loads(g, omega_t, model.load_mode);
    std::vector<char> failed(g.node_count(), 0);
    for (Node v : omega_t) failed[v] = 1;
    std::vector<Node> next;
    for (Node v = 0; v < g.node_count(); ++v)
        if (!failed[v] && load[v] > model.features->capacity(v)) next.push_back(v);
    return next;
}

} // namespace

std::vector<Node> single_round(const CascadeModel& model, const std::vector<Node>& omega_t) {
    for (Node v : omega_t)
        if (v < 0 || v >= model.graph->node_count())
            throw InvalidParams("single_round: node out of range");
    if (model.kind == CascadeKind::Threshold) {
        std::vector<char> failed(model.graph->node_count(), 0);
        for (Node v : omega_t) failed[v] = 1;
        return threshold_round(*model.graph, *model.features, failed);
    }
    return shortest_path_round(model, omega_t);
}

CascadeOutcome run_cascade(const CascadeModel& model, const std::vector<Node>& theta) {
    const Graph& g = *model.graph;
    CascadeOutcome out;
    out.theta = theta;
    std::sort(out.theta.begin(), out.theta.end());
    out.theta.erase(std::unique(out.theta.begin(), out.theta.end()), out.theta.end());
    for (Node v : out.theta)
        if (v < 0 || v >= g.node_count()) throw InvalidParams("run_cascade: seed out of range");

    std::vector<char> failed(g.node_count(), 0);
    for (Node v : out.theta) failed[v] = 1;
    out.omega = out.theta;

    if (model.kind == CascadeKind::Threshold) {
        // incremental failed-neighbor counts; rounds stay synchronous because
        // the next frontier is collected only after the whole current
        // frontier has been applied
        std::vector<int> cnt(g.node_count(), 0);
        for (Node v = 0; v < g.node_count(); ++v)
            for (Node w : g.neighbors(v)) cnt[v] += failed[w];
        std::vector<Node> frontier = out.theta;
        while (!frontier.empty()) {
            std::vector<Node> touched;
            for (Node u : frontier)
                for (Node w : g.neighbors(u))
                    if (!failed[w]) touched.push_back(w);
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            std::vector<Node> next;
            for (Node w : touched) {
                if (static_cast<double>(cnt[w]) / g.degree(w) >= model.features->threshold(w))
                    next.push_back(w);
            }
            if (next.empty()) break;
            for (Node w : next) {
                failed[w] = 1;
                for (Node x : g.neighbors(w)) ++cnt[x];
            }
            out.rounds.push_back(next);
            frontier = std::move(next);
        }
    } else {
        std::vector<Node> omega_t = out.theta;
        while (true) {
            std::vector<Node> next = shortest_path_round(model, omega_t);
            if (next.empty()) break;
            out.rounds.push_back(next);
            omega_t.insert(omega_t.end(), next.begin(), next.end());
            std::sort(omega_t.begin(), omega_t.end());
        }
    }

    for (const auto& round : out.rounds)
        out.omega.insert(out.omega.end(), round.begin(), round.end());
    std::sort(out.omega.begin(), out.omega.end());
    return out;
}

} // namespace cascnet
