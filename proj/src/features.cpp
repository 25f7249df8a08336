#include "cascnet/features.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cascnet/errors.hpp"
#include "cascnet/rng.hpp"

namespace cascnet {

NodeFeatures NodeFeatures::thresholds(std::vector<double> values) {
    for (double phi : values)
        if (!(phi > 0.0 && phi <= 1.0))
            throw InvalidParams("thresholds must lie in (0, 1]");
    return NodeFeatures(FeatureKind::Threshold, std::move(values), {});
}

NodeFeatures NodeFeatures::capacities(std::vector<double> values, std::vector<double> baseline) {
    if (values.size() != baseline.size())
        throw InvalidParams("capacities: baseline length mismatch");
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (!std::isfinite(values[v]) || !std::isfinite(baseline[v]))
            throw InvalidParams("capacities: non-finite entry");
        if (!(values[v] > baseline[v]))
            throw InvalidParams("capacity k_v must exceed baseline load at node " +
                                std::to_string(v));
    }
    return NodeFeatures(FeatureKind::Capacity, std::move(values), std::move(baseline));
}

NodeFeatures generate_thresholds(int n, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x7468u));
    std::vector<double> phi(n);
    for (double& p : phi) p = rng.uniform01_open_closed();
    return NodeFeatures::thresholds(std::move(phi));
}

NodeFeatures generate_capacities(const Graph& g, const CapacityParams& params, LoadMode mode) {
    if (params.alpha < 0.0 || params.c0 <= 0.0)
        throw InvalidParams("generate_capacities: need alpha >= 0 and c0 > 0");
    std::vector<double> lambda = shortest_path_loads(g, {}, mode);
    std::vector<double> k(lambda.size());
    for (std::size_t v = 0; v < k.size(); ++v)
        k[v] = (1.0 + params.alpha) * lambda[v] + params.c0;
    return NodeFeatures::capacities(std::move(k), std::move(lambda));
}

NodeFeatures load_features(const std::string& path, const Graph& g, LoadMode mode) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::string header;
    if (!std::getline(in, header)) throw ParseError("missing feature header", 1);
    std::vector<double> values;
    values.reserve(g.node_count());
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double v;
        if (!(ss >> v)) throw ParseError("expected numeric value", lineno);
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != g.node_count())
        throw ParseError("feature count does not match node count", lineno);
    if (header == "threshold") return NodeFeatures::thresholds(std::move(values));
    if (header == "capacity")
        return NodeFeatures::capacities(std::move(values), shortest_path_loads(g, {}, mode));
    throw ParseError("unknown feature header \"" + header + "\"", 1);
}

void save_features(const NodeFeatures& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << (f.kind() == FeatureKind::Threshold ? "threshold" : "capacity") << "\n";
    out.precision(17);
    for (double v : f.values()) out << v << "\n";
}

} // namespace cascnet
