#include "cascnet/cfda.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"
#include "cascnet/rng.hpp"

#include "json.hpp"

namespace cascnet {

namespace {
using Clock = std::chrono::steady_clock;

std::vector<Node> theta_of(const TrialRecord& trial) {
    return initial_failures(trial.alpha_a, trial.alpha_d);
}

// sorted-vector set helpers; omega sets stay small relative to N
std::vector<Node> sorted_union(const std::vector<Node>& a, const std::vector<Node>& b) {
    std::vector<Node> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool intersects(const std::vector<Node>& a, const std::vector<Node>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else
            return true;
    }
    return false;
}

} // namespace

AttributionResult attribute_threshold(const TrialRecord& trial, const Graph& g) {
    std::vector<Node> theta = theta_of(trial);
    if (theta.empty()) return {std::nullopt, DiscardReason::EmptyTheta};

    auto comps = connected_components(g, trial.omega);
    Attribution attr;
    attr.subspace_id = trial.subspace_id;
    attr.alpha_d = trial.alpha_d;
    attr.seeds = theta;
    attr.omega_v.resize(theta.size());
    for (std::size_t s = 0; s < theta.size(); ++s) {
        for (const auto& comp : comps) {
            if (std::binary_search(comp.begin(), comp.end(), theta[s])) {
                attr.omega_v[s] = comp;
                break;
            }
        }
    }
    if (theta.size() == 2 && attr.omega_v[0] == attr.omega_v[1])
        return {std::nullopt, DiscardReason::Merged}; // cascades merged
    return {std::move(attr), DiscardReason::None};
}

AttributionResult attribute_shortest_path(const TrialRecord& trial, const Graph& g,
                                          const NodeFeatures& features, LoadMode mode) {
    std::vector<Node> theta = theta_of(trial);
    if (theta.empty()) return {std::nullopt, DiscardReason::EmptyTheta};
    if (theta.size() > 1) return {std::nullopt, DiscardReason::Inseparable};

    Attribution attr;
    attr.subspace_id = trial.subspace_id;
    attr.alpha_d = trial.alpha_d;
    attr.seeds = theta;
    attr.omega_v = {trial.omega};

    const auto& lambda = features.baseline_loads();
    std::vector<double> loads = shortest_path_loads(g, trial.omega, mode);
    std::vector<double> gamma(g.node_count());
    for (Node n = 0; n < g.node_count(); ++n) gamma[n] = loads[n] - lambda[n];
    attr.gamma_v = {std::move(gamma)};
    double sum = 0.0;
    for (Node z : trial.omega) sum += lambda[z];
    attr.lambda_sum = {sum};
    return {std::move(attr), DiscardReason::None};
}

CounterfactualCandidate propose_counterfactual(const Attribution& attr1,
                                               const Attribution& attr2, std::uint64_t seed) {
    if (attr1.subspace_id == attr2.subspace_id)
        throw InvalidParams("propose_counterfactual: attributions share a subspace");
    if (attr1.seeds.empty() || attr2.seeds.empty())
        throw InvalidParams("propose_counterfactual: attribution offers no seed");

    Rng rng(mix_seed(seed, 0x43414e44u));

    std::vector<std::pair<int, int>> seed_combos;
    for (std::size_t i = 0; i < attr1.seeds.size(); ++i)
        for (std::size_t j = 0; j < attr2.seeds.size(); ++j)
            if (attr1.seeds[i] != attr2.seeds[j])
                seed_combos.emplace_back(static_cast<int>(i), static_cast<int>(j));
    if (seed_combos.empty())
        throw NoValidDefense("propose_counterfactual: sources share their only seed");
    auto [si, sj] = seed_combos[rng.below(seed_combos.size())];
    Node v = attr1.seeds[si];
    Node w = attr2.seeds[sj];

    // defense takes one node from each source defense, avoiding the new seeds
    std::vector<NodePair> defenses;
    for (Node d1 : {attr1.alpha_d.u, attr1.alpha_d.v})
        for (Node d2 : {attr2.alpha_d.u, attr2.alpha_d.v})
            if (d1 != d2 && d1 != v && d1 != w && d2 != v && d2 != w)
                defenses.emplace_back(d1, d2);
    if (defenses.empty())
        throw NoValidDefense("propose_counterfactual: every defense combination hits the seeds");

    CounterfactualCandidate cand;
    cand.v = v;
    cand.w = w;
    cand.alpha_a_hat = NodePair(v, w);
    cand.alpha_d_hat = defenses[rng.below(defenses.size())];
    cand.omega_hat = sorted_union(attr1.omega_v[si], attr2.omega_v[sj]);
    cand.contributions_overlap = intersects(attr1.omega_v[si], attr2.omega_v[sj]);
    return cand;
}

namespace {

// reusable per-thread scratch marked with a stamp so it never needs clearing
struct Scratch {
    std::vector<int> stamp;
    std::vector<int> count;
    int cur = 0;
};

thread_local Scratch tl_scratch;

} // namespace

Validation validate_threshold(const CounterfactualCandidate& cand, const Graph& g,
                              const NodeFeatures& features) {
    Scratch& sc = tl_scratch;
    if (static_cast<int>(sc.stamp.size()) < g.node_count()) {
        sc.stamp.assign(g.node_count(), 0);
        sc.count.assign(g.node_count(), 0);
        sc.cur = 0;
    }
    ++sc.cur;
    for (Node f : cand.omega_hat) {
        sc.stamp[f] = sc.cur;
        sc.count[f] = -1; // marks membership in omega_hat
    }
    for (Node f : cand.omega_hat) {
        for (Node n : g.neighbors(f)) {
            if (sc.stamp[n] == sc.cur && sc.count[n] < 0) continue; // already failed
            if (sc.stamp[n] != sc.cur) {
                sc.stamp[n] = sc.cur;
                sc.count[n] = 0;
            }
            ++sc.count[n];
        }
    }
    for (Node f : cand.omega_hat) {
        for (Node n : g.neighbors(f)) {
            if (sc.count[n] < 0) continue;
            double ratio = static_cast<double>(sc.count[n]) / g.degree(n);
            if (!(features.threshold(n) > ratio)) return Validation::Reject;
        }
    }
    return Validation::Accept;
}

Validation validate_shortest_path(const CounterfactualCandidate& cand, const Attribution& attr1,
                                  int seed_idx1, const Attribution& attr2, int seed_idx2,
                                  const Graph& g, const NodeFeatures& features,
                                  SpValidationMode mode, LoadMode load_mode) {
    const auto& lambda = features.baseline_loads();
    const auto& gamma1 = attr1.gamma_v.at(seed_idx1);
    const auto& gamma2 = attr2.gamma_v.at(seed_idx2);
    const double sum1 = attr1.lambda_sum.at(seed_idx1);
    const double sum2 = attr2.lambda_sum.at(seed_idx2);

    std::vector<char> failed(g.node_count(), 0);
    for (Node f : cand.omega_hat) failed[f] = 1;

    bool bound1 = true, bound2 = true;
    for (Node n = 0; n < g.node_count() && (bound1 || bound2); ++n) {
        if (failed[n]) continue;
        double k = features.capacity(n);
        if (bound1 && !(k >= lambda[n] + gamma1[n] + sum2)) bound1 = false;
        if (bound2 && !(k >= lambda[n] + gamma2[n] + sum1)) bound2 = false;
    }
    if (bound1 || bound2) return Validation::Accept;
    if (mode == SpValidationMode::Fast) return Validation::Reject;

    // exact one-round recheck: a single APSP on G - omega_hat
    std::vector<double> loads = shortest_path_loads(g, cand.omega_hat, load_mode);
    for (Node n = 0; n < g.node_count(); ++n)
        if (!failed[n] && loads[n] > features.capacity(n)) return Validation::Reject;
    return Validation::Accept;
}

std::pair<std::vector<TrialRecord>, CfdaStats> generate_counterfactual_dataset(
    const CascadeModel& model, const std::vector<TrialRecord>& factual, std::uint64_t seed,
    const CfdaOptions& options) {
    auto start = Clock::now();
    CfdaStats stats;
    stats.n_fac = static_cast<std::int64_t>(factual.size());
    stats.ms_per_fac = stats.n_fac > 0 ? options.factual_wall_ms / stats.n_fac : 0.0;

    std::vector<TrialRecord> accepted;
    if (factual.size() < 2) {
        stats.ms_per_cfac = 0.0;
        return {accepted, stats};
    }

    const Graph& g = *model.graph;
    const NodeFeatures& features = *model.features;
    const bool threshold_kind = model.kind == CascadeKind::Threshold;

    std::vector<AttributionResult> attrs(factual.size());
    parallel_for(factual.size(), options.threads, [&](std::size_t i) {
        attrs[i] = threshold_kind
                       ? attribute_threshold(factual[i], g)
                       : attribute_shortest_path(factual[i], g, features, options.load_mode);
        if (attrs[i].attribution) attrs[i].attribution->trial_index = static_cast<int>(i);
    });
    std::vector<std::uint32_t> usable; // pairs are streamed over attributed trials only
    usable.reserve(factual.size());
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        switch (attrs[i].discard) {
            case DiscardReason::EmptyTheta: ++stats.reject_reasons["attr_empty_theta"]; break;
            case DiscardReason::Merged: ++stats.reject_reasons["attr_merged"]; break;
            case DiscardReason::Inseparable: ++stats.reject_reasons["attr_inseparable"]; break;
            case DiscardReason::None: usable.push_back(static_cast<std::uint32_t>(i)); break;
        }
    }
    if (usable.size() < 2) {
        stats.ms_per_cfac = 0.0;
        return {accepted, stats};
    }

    // Threshold validation reduces to merging precomputed frontier-pressure
    // lists: for each contribution set, the outside neighbors and how many
    // failed neighbors they would gain.
    struct Frontier {
        std::vector<std::pair<Node, int>> pressure; // sorted by node
    };
    std::vector<std::array<Frontier, 2>> frontiers;
    if (threshold_kind) {
        frontiers.resize(usable.size());
        parallel_for(usable.size(), options.threads, [&](std::size_t u) {
            const Attribution& attr = *attrs[usable[u]].attribution;
            for (std::size_t s = 0; s < attr.seeds.size(); ++s) {
                Scratch& sc = tl_scratch;
                if (static_cast<int>(sc.stamp.size()) < g.node_count()) {
                    sc.stamp.assign(g.node_count(), 0);
                    sc.count.assign(g.node_count(), 0);
                    sc.cur = 0;
                }
                ++sc.cur;
                const auto& omega = attr.omega_v[s];
                for (Node v : omega) {
                    sc.stamp[v] = sc.cur;
                    sc.count[v] = -1;
                }
                auto& list = frontiers[u][s].pressure;
                for (Node v : omega)
                    for (Node nb : g.neighbors(v)) {
                        if (sc.stamp[nb] == sc.cur) {
                            if (sc.count[nb] >= 0) ++sc.count[nb];
                            continue;
                        }
                        sc.stamp[nb] = sc.cur;
                        sc.count[nb] = 1;
                        list.emplace_back(nb, 0);
                    }
                for (auto& [node, cnt] : list) cnt = sc.count[node];
                std::sort(list.begin(), list.end());
            }
        });
    }

    const std::uint64_t n = usable.size();
    const std::uint64_t domain = n * n;
    const std::int64_t cap =
        options.cap_factor > 0.0
            ? static_cast<std::int64_t>(std::llround(options.cap_factor * stats.n_fac))
            : std::numeric_limits<std::int64_t>::max();

    IndexPermutation perm(domain, mix_seed(seed, 0x50414952u));
    constexpr std::uint64_t kChunk = 16384;

    enum class SlotState : unsigned char { Skip, Accept, Reject };
    struct Slot {
        SlotState state = SlotState::Skip;
        const char* reject = nullptr;
        Node v = -1, w = -1, d1 = -1, d2 = -1;
        const std::vector<Node>* omega_v = nullptr;
        const std::vector<Node>* omega_w = nullptr;
    };
    std::vector<Slot> slots(kChunk);

    for (std::uint64_t base = 0;
         base < perm.padded_size() && static_cast<std::int64_t>(accepted.size()) < cap &&
         (options.max_pairs <= 0 || stats.pairs_examined < options.max_pairs);
         base += kChunk) {
        const std::uint64_t count = std::min<std::uint64_t>(kChunk, perm.padded_size() - base);
        parallel_for(count, options.threads, [&](std::size_t t) {
            Slot& slot = slots[t];
            slot.state = SlotState::Skip;
            slot.reject = nullptr;
            const std::uint64_t img = perm.permute(base + t);
            if (img >= domain) return; // padding
            const std::uint64_t i = img / n;
            const std::uint64_t j = img % n;
            if (i == j) return;
            slot.state = SlotState::Reject;
            const Attribution& ai = *attrs[usable[i]].attribution;
            const Attribution& aj = *attrs[usable[j]].attribution;
            if (ai.subspace_id == aj.subspace_id) {
                slot.reject = "same_subspace";
                return;
            }

            Rng rng(mix_seed(seed, 0x43484f4fu, base + t));
            // seed choice among distinct cross picks
            int combos[4][2];
            int n_combos = 0;
            for (int si = 0; si < static_cast<int>(ai.seeds.size()); ++si)
                for (int sj = 0; sj < static_cast<int>(aj.seeds.size()); ++sj)
                    if (ai.seeds[si] != aj.seeds[sj]) {
                        combos[n_combos][0] = si;
                        combos[n_combos][1] = sj;
                        ++n_combos;
                    }
            if (n_combos == 0) {
                slot.reject = "no_valid_defense";
                return;
            }
            const int pick = n_combos == 1 ? 0 : static_cast<int>(rng.below(n_combos));
            const int si = combos[pick][0];
            const int sj = combos[pick][1];
            const Node v = ai.seeds[si];
            const Node w = aj.seeds[sj];

            // defense: one node from each source defense, avoiding the seeds
            Node defenses[4][2];
            int n_defs = 0;
            for (Node d1 : {ai.alpha_d.u, ai.alpha_d.v})
                for (Node d2 : {aj.alpha_d.u, aj.alpha_d.v})
                    if (d1 != d2 && d1 != v && d1 != w && d2 != v && d2 != w) {
                        defenses[n_defs][0] = d1;
                        defenses[n_defs][1] = d2;
                        ++n_defs;
                    }
            if (n_defs == 0) {
                slot.reject = "no_valid_defense";
                return;
            }
            const int dpick = n_defs == 1 ? 0 : static_cast<int>(rng.below(n_defs));

            const std::vector<Node>& omega_v = ai.omega_v[si];
            const std::vector<Node>& omega_w = aj.omega_v[sj];
            if (intersects(omega_v, omega_w)) {
                slot.reject = "overlap_omega";
                return;
            }

            bool steady;
            if (threshold_kind) {
                // merge the two pressure lists; any outside node whose
                // combined failed-neighbor fraction reaches its threshold
                // breaks steadiness
                const auto& fa = frontiers[i][si].pressure;
                const auto& fb = frontiers[j][sj].pressure;
                steady = true;
                std::size_t x = 0, y = 0;
                while (steady && (x < fa.size() || y < fb.size())) {
                    Node node;
                    int cnt;
                    if (y == fb.size() || (x < fa.size() && fa[x].first < fb[y].first)) {
                        node = fa[x].first;
                        cnt = fa[x].second;
                        ++x;
                    } else if (x == fa.size() || fb[y].first < fa[x].first) {
                        node = fb[y].first;
                        cnt = fb[y].second;
                        ++y;
                    } else {
                        node = fa[x].first;
                        cnt = fa[x].second + fb[y].second;
                        ++x;
                        ++y;
                    }
                    // frontier nodes of one side may lie inside the other
                    if (std::binary_search(omega_w.begin(), omega_w.end(), node) ||
                        std::binary_search(omega_v.begin(), omega_v.end(), node))
                        continue;
                    if (!(features.threshold(node) >
                          static_cast<double>(cnt) / g.degree(node)))
                        steady = false;
                }
                if (!steady) slot.reject = "threshold_frontier";
            } else {
                CounterfactualCandidate cand;
                cand.v = v;
                cand.w = w;
                cand.alpha_a_hat = NodePair(v, w);
                cand.alpha_d_hat = NodePair(defenses[dpick][0], defenses[dpick][1]);
                cand.omega_hat = sorted_union(omega_v, omega_w);
                steady = validate_shortest_path(cand, ai, si, aj, sj, g, features,
                                                options.sp_mode, options.load_mode) ==
                         Validation::Accept;
                if (!steady) slot.reject = "capacity_exceeded";
            }
            if (steady) {
                slot.v = v;
                slot.w = w;
                slot.d1 = defenses[dpick][0];
                slot.d2 = defenses[dpick][1];
                slot.omega_v = &omega_v;
                slot.omega_w = &omega_w;
                slot.state = SlotState::Accept;
            }
        });
        // commit in stream order so the accepted set is thread-count invariant
        for (std::uint64_t t = 0; t < count; ++t) {
            Slot& slot = slots[t];
            if (slot.state == SlotState::Skip) continue;
            if (options.max_pairs > 0 && stats.pairs_examined >= options.max_pairs) break;
            ++stats.pairs_examined;
            if (slot.state == SlotState::Accept) {
                if (static_cast<std::int64_t>(accepted.size()) < cap) {
                    TrialRecord rec;
                    rec.alpha_a = NodePair(slot.v, slot.w);
                    rec.alpha_d = NodePair(slot.d1, slot.d2);
                    rec.omega = sorted_union(*slot.omega_v, *slot.omega_w);
                    rec.subspace_id = -1;
                    rec.provenance = Provenance::Counterfactual;
                    accepted.push_back(std::move(rec));
                }
                if (static_cast<std::int64_t>(accepted.size()) >= cap) break;
            } else if (slot.reject) {
                ++stats.reject_reasons[slot.reject];
            }
        }
    }

    stats.n_cfac = static_cast<std::int64_t>(accepted.size());
    double total_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    stats.ms_per_cfac = stats.n_cfac > 0 ? total_ms / stats.n_cfac : 0.0;
    return {std::move(accepted), stats};
}

void save_cfda_stats(const CfdaStats& stats, const std::string& path) {
    nlohmann::json j;
    j["n_fac"] = stats.n_fac;
    j["n_cfac"] = stats.n_cfac;
    j["ms_per_fac"] = stats.ms_per_fac;
    j["ms_per_cfac"] = stats.ms_per_cfac;
    j["pairs_examined"] = stats.pairs_examined;
    j["reject_reasons"] = stats.reject_reasons;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace cascnet
