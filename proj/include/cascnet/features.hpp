#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascnet/graph.hpp"

namespace cascnet {

enum class FeatureKind { Threshold, Capacity };

/// Per-node cascade parameters: failure thresholds in (0, 1] or load
/// capacities with their baseline loads. Immutable after construction.
class NodeFeatures {
public:
    /// Threshold kind. Requires 0 < values[v] <= 1 for all v.
    static NodeFeatures thresholds(std::vector<double> values);

    /// Capacity kind. baseline must equal shortest_path_loads(g, {}) for the
    /// graph and load mode in use; requires values[v] > baseline[v].
    static NodeFeatures capacities(std::vector<double> values, std::vector<double> baseline);

    FeatureKind kind() const { return kind_; }
    int size() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& baseline_loads() const { return baseline_; }

    double threshold(Node v) const { return values_[v]; }
    double capacity(Node v) const { return values_[v]; }

private:
    NodeFeatures(FeatureKind kind, std::vector<double> values, std::vector<double> baseline)
        : kind_(kind), values_(std::move(values)), baseline_(std::move(baseline)) {}

    FeatureKind kind_;
    std::vector<double> values_;
    std::vector<double> baseline_;
};

struct CapacityParams {
    double alpha = 0.25; // headroom factor
    double c0 = 1.0;     // additive slack
};

/// Thresholds drawn Uniform(0, 1].
NodeFeatures generate_thresholds(int n, std::uint64_t seed);

/// Capacities k_v = (1 + alpha) * lambda_v + c0 over the baseline loads of g.
NodeFeatures generate_capacities(const Graph& g, const CapacityParams& params,
                                 LoadMode mode = LoadMode::SinglePath);

/// Feature file: one-line header "threshold" or "capacity", then one value
/// per line. Capacity baselines are recomputed from the graph on load.
NodeFeatures load_features(const std::string& path, const Graph& g,
                           LoadMode mode = LoadMode::SinglePath);
void save_features(const NodeFeatures& f, const std::string& path);

} // namespace cascnet
