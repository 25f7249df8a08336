#include "cascnet/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"
#include "cascnet/rng.hpp"

namespace cascnet {

MixedStrategy SynthesizedStrategy::to_mixed(int space_size) const {
    MixedStrategy m;
    m.probs.assign(space_size, 0.0);
    for (std::size_t i = 0; i < support.size(); ++i) m.probs.at(support[i]) += probs[i];
    return m;
}

SynthesizedStrategy uniform_strategy(const ActionSpace& space) {
    SynthesizedStrategy s;
    s.source = StrategySource::Baseline;
    s.support.resize(space.size());
    std::iota(s.support.begin(), s.support.end(), 0);
    s.probs.assign(space.size(), 1.0 / space.size());
    return s;
}

EwmTopsisResult ewm_topsis_ranking(const CentralityTable& table) {
    const int n = static_cast<int>(table.degree.size());
    if (n < 2) throw InvalidParams("ewm_topsis_ranking: need at least 2 nodes");
    const std::vector<double>* cols[4] = {&table.degree, &table.closeness, &table.betweenness,
                                          &table.eigenvector};
    // min-max normalization per column; constant columns are degenerate
    std::vector<std::vector<double>> norm(4, std::vector<double>(n, 0.0));
    bool degenerate[4] = {false, false, false, false};
    for (int j = 0; j < 4; ++j) {
        auto [mn, mx] = std::minmax_element(cols[j]->begin(), cols[j]->end());
        if (*mx - *mn <= 1e-12) {
            degenerate[j] = true;
            continue;
        }
        for (int i = 0; i < n; ++i) norm[j][i] = ((*cols[j])[i] - *mn) / (*mx - *mn);
    }

    EwmTopsisResult result;
    result.weights.assign(4, 0.0);
    double divergence_total = 0.0;
    for (int j = 0; j < 4; ++j) {
        if (degenerate[j]) continue;
        double colsum = std::accumulate(norm[j].begin(), norm[j].end(), 0.0);
        if (colsum <= 0.0) {
            degenerate[j] = true;
            continue;
        }
        double entropy = 0.0;
        for (int i = 0; i < n; ++i) {
            double p = norm[j][i] / colsum;
            if (p > 0.0) entropy -= p * std::log(p);
        }
        entropy /= std::log(static_cast<double>(n));
        result.weights[j] = std::max(0.0, 1.0 - entropy);
        divergence_total += result.weights[j];
    }
    if (divergence_total > 0.0) {
        for (double& w : result.weights) w /= divergence_total;
    } else {
        result.weights.assign(4, 0.25); // fully symmetric graph: nothing to weight
    }

    // relative closeness to the ideal / anti-ideal points
    std::vector<double> ideal(4, 0.0), anti(4, 0.0);
    for (int j = 0; j < 4; ++j) {
        if (result.weights[j] == 0.0) continue;
        double mx = 0.0, mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            double v = result.weights[j] * norm[j][i];
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        ideal[j] = mx;
        anti[j] = mn;
    }
    result.scores.resize(n);
    for (int i = 0; i < n; ++i) {
        double dp = 0.0, dm = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (result.weights[j] == 0.0) continue;
            double v = result.weights[j] * norm[j][i];
            dp += (v - ideal[j]) * (v - ideal[j]);
            dm += (v - anti[j]) * (v - anti[j]);
        }
        dp = std::sqrt(dp);
        dm = std::sqrt(dm);
        result.scores[i] = (dp + dm) > 0.0 ? dm / (dp + dm) : 0.5;
    }
    result.ranking.resize(n);
    std::iota(result.ranking.begin(), result.ranking.end(), 0);
    std::stable_sort(result.ranking.begin(), result.ranking.end(), [&](Node a, Node b) {
        if (result.scores[a] != result.scores[b]) return result.scores[a] > result.scores[b];
        return a < b;
    });
    return result;
}

SynthesizedStrategy heuristic_strategy(const EwmTopsisResult& ranking, PairRule rule,
                                       const ActionSpace& space, std::uint64_t seed) {
    SynthesizedStrategy s;
    s.source = StrategySource::Baseline;
    if (rule == PairRule::TopTwo) {
        NodePair top(ranking.ranking.at(0), ranking.ranking.at(1));
        int idx = space.index_of(top);
        if (idx < 0) throw InvalidParams("heuristic_strategy: top pair not in action space");
        s.support = {idx};
        s.probs = {1.0};
        return s;
    }
    // TopWeightedSampling: the strategy itself is the product-score
    // distribution; seed kept for interface symmetry
    (void)seed;
    double total = 0.0;
    std::vector<double> mass(space.size());
    for (int i = 0; i < space.size(); ++i) {
        const NodePair& a = space.action(i);
        mass[i] = ranking.scores.at(a.u) * ranking.scores.at(a.v) + 1e-12;
        total += mass[i];
    }
    s.support.resize(space.size());
    std::iota(s.support.begin(), s.support.end(), 0);
    s.probs.resize(space.size());
    for (int i = 0; i < space.size(); ++i) s.probs[i] = mass[i] / total;
    return s;
}

int sample_action(const SynthesizedStrategy& strategy, Rng& rng) {
    double r = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < strategy.probs.size(); ++i) {
        acc += strategy.probs[i];
        if (r < acc) return strategy.support[i];
    }
    return strategy.support.back();
}

NESolution solve_2x2(const PayoffMatrix& p) {
    if (p.rows != 2 || p.cols != 2) throw InvalidParams("solve_2x2: matrix is not 2x2");
    const double a = p.at(0, 0), b = p.at(0, 1), c = p.at(1, 0), d = p.at(1, 1);
    NESolution sol;
    // pure saddle point first
    double row_mins[2] = {std::min(a, b), std::min(c, d)};
    double col_maxs[2] = {std::max(a, c), std::max(b, d)};
    int best_row = row_mins[0] >= row_mins[1] ? 0 : 1;
    int best_col = col_maxs[0] <= col_maxs[1] ? 0 : 1;
    if (row_mins[best_row] == col_maxs[best_col]) {
        sol.pi_a = MixedStrategy::pure(best_row, 2);
        sol.pi_d = MixedStrategy::pure(best_col, 2);
        sol.value = row_mins[best_row];
    } else {
        double denom = a - b - c + d;
        double pa = (d - c) / denom;
        double pd = (d - b) / denom;
        pa = std::clamp(pa, 0.0, 1.0);
        pd = std::clamp(pd, 0.0, 1.0);
        sol.pi_a.probs = {pa, 1.0 - pa};
        sol.pi_d.probs = {pd, 1.0 - pd};
        sol.value = (a * d - b * c) / denom;
    }
    sol.exploitability = matrix_exploitability(p, sol.pi_a, sol.pi_d);
    return sol;
}

RestrictedStrategyGame restricted_strategy_ne(const CascadeModel& model,
                                              const std::vector<MetaAction>& metas_a,
                                              const std::vector<MetaAction>& metas_d,
                                              int samples_per_cell, std::uint64_t seed,
                                              int threads) {
    if (samples_per_cell < 1) throw InvalidParams("restricted_strategy_ne: samples_per_cell < 1");
    if (metas_a.empty() || metas_d.empty())
        throw InvalidParams("restricted_strategy_ne: need at least one meta-action per side");
    RestrictedStrategyGame game;
    game.attacker_metas = metas_a;
    game.defender_metas = metas_d;
    game.payoff.rows = static_cast<int>(metas_a.size());
    game.payoff.cols = static_cast<int>(metas_d.size());
    game.payoff.values.assign(static_cast<std::size_t>(game.payoff.rows) * game.payoff.cols, 0.f);

    ActionSpace full = ActionSpace::full(model.graph->node_count());
    const int n = model.graph->node_count();
    parallel_for(game.payoff.values.size(), threads, [&](std::size_t cell) {
        const int i = static_cast<int>(cell) / game.payoff.cols;
        const int j = static_cast<int>(cell) % game.payoff.cols;
        Rng rng(mix_seed(seed, 0x4d455441u, i, j));
        std::int64_t failed_total = 0; // integer accumulation keeps cells exact
        for (int s = 0; s < samples_per_cell; ++s) {
            const NodePair& atk = full.action(sample_action(metas_a[i].sampler, rng));
            const NodePair& def = full.action(sample_action(metas_d[j].sampler, rng));
            failed_total += static_cast<std::int64_t>(
                run_cascade(model, initial_failures(atk, def)).omega.size());
        }
        game.payoff.values[cell] = static_cast<float>(
            static_cast<double>(failed_total) / (static_cast<double>(samples_per_cell) * n));
    });

    NESolution sol = (game.payoff.rows == 2 && game.payoff.cols == 2)
                         ? solve_2x2(game.payoff)
                         : solve_zero_sum_ne(game.payoff);
    game.ne_attacker = sol.pi_a;
    game.ne_defender = sol.pi_d;
    game.value = sol.value;
    return game;
}

MixedStrategy RestrictedStrategyGame::induced_attacker(int space_size) const {
    MixedStrategy m;
    m.probs.assign(space_size, 0.0);
    for (std::size_t i = 0; i < attacker_metas.size(); ++i) {
        MixedStrategy meta = attacker_metas[i].sampler.to_mixed(space_size);
        for (int a = 0; a < space_size; ++a) m.probs[a] += ne_attacker.probs[i] * meta.probs[a];
    }
    return m;
}

MixedStrategy RestrictedStrategyGame::induced_defender(int space_size) const {
    MixedStrategy m;
    m.probs.assign(space_size, 0.0);
    for (std::size_t i = 0; i < defender_metas.size(); ++i) {
        MixedStrategy meta = defender_metas[i].sampler.to_mixed(space_size);
        for (int a = 0; a < space_size; ++a) m.probs[a] += ne_defender.probs[i] * meta.probs[a];
    }
    return m;
}

namespace {

// lexicographically smallest defense pair disjoint from the attacked pair
NodePair dummy_defense(const ActionSpace& space, const NodePair& attack) {
    const auto& pool = space.node_pool();
    Node first = -1, second = -1;
    for (Node cand : pool) {
        if (attack.contains(cand)) continue;
        if (first < 0)
            first = cand;
        else {
            second = cand;
            break;
        }
    }
    if (second < 0)
        throw InvalidParams("synthesize: pool too small for a disjoint dummy defense");
    return NodePair(first, second);
}

std::vector<int> pick_candidates(const std::vector<double>& unopposed, int k,
                                 std::uint64_t seed) {
    const int total = static_cast<int>(unopposed.size());
    if (k >= total) {
        std::vector<int> all(total);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    std::vector<int> by_payoff(total);
    std::iota(by_payoff.begin(), by_payoff.end(), 0);
    std::stable_sort(by_payoff.begin(), by_payoff.end(), [&](int a, int b) {
        if (unopposed[a] != unopposed[b]) return unopposed[a] > unopposed[b];
        return a < b;
    });
    const int top_cnt = k / 2;
    std::vector<char> taken(total, 0);
    std::vector<int> chosen(by_payoff.begin(), by_payoff.begin() + top_cnt);
    for (int idx : chosen) taken[idx] = 1;
    std::vector<int> rest;
    rest.reserve(total - top_cnt);
    for (int i = 0; i < total; ++i)
        if (!taken[i]) rest.push_back(i);
    Rng rng(mix_seed(seed, 0x43414e44u));
    auto extra = rng.sample_without_replacement(rest.size(), k - top_cnt);
    for (auto e : extra) chosen.push_back(rest[e]);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

int auto_k(const ActionSpace& space) {
    const int n = static_cast<int>(space.node_pool().size());
    if (n <= 25) return space.size();
    if (n <= 100) return std::min(space.size(), 200);
    return std::min(space.size(), 400);
}

std::pair<SynthesizedStrategy, SynthesizedStrategy> synthesize_impl(
    const std::function<std::vector<double>(const std::vector<std::pair<NodePair, NodePair>>&)>&
        batch_payoff,
    const ActionSpace& space, std::uint64_t seed, const SynthesisOptions& options) {
    int k = options.k_candidates > 0 ? options.k_candidates : auto_k(space);
    if (k < 1 || k > space.size())
        throw InvalidParams("synthesize: k_candidates must lie in [1, |A|]");
    if (static_cast<std::int64_t>(k) * k > options.max_entries)
        throw BudgetExceeded("synthesize: k^2 exceeds the configured budget");

    std::vector<std::pair<NodePair, NodePair>> duels;
    duels.reserve(space.size());
    for (int i = 0; i < space.size(); ++i)
        duels.emplace_back(space.action(i), dummy_defense(space, space.action(i)));
    std::vector<double> unopposed = batch_payoff(duels);

    std::vector<int> support = pick_candidates(unopposed, k, seed);

    duels.clear();
    duels.reserve(static_cast<std::size_t>(k) * k);
    for (int i : support)
        for (int j : support) duels.emplace_back(space.action(i), space.action(j));
    std::vector<double> cells = batch_payoff(duels);

    PayoffMatrix p;
    p.rows = p.cols = k;
    p.values.assign(cells.begin(), cells.end());
    NESolution sol = solve_zero_sum_ne(p);

    SynthesizedStrategy atk, def;
    atk.source = def.source = StrategySource::PredictorLP;
    atk.support = support;
    def.support = support;
    atk.probs = sol.pi_a.probs;
    def.probs = sol.pi_d.probs;
    return {std::move(atk), std::move(def)};
}

} // namespace

std::pair<SynthesizedStrategy, SynthesizedStrategy> synthesize_from_predictor(
    const Predictor& model, const ActionSpace& space, const std::vector<double>& x,
    std::uint64_t seed, const SynthesisOptions& options) {
    auto batch = [&](const std::vector<std::pair<NodePair, NodePair>>& duels) {
        return model.predicted_payoffs(duels, x, options.threads);
    };
    return synthesize_impl(batch, space, seed, options);
}

std::pair<SynthesizedStrategy, SynthesizedStrategy> synthesize_from_oracle(
    const std::function<double(const NodePair&, const NodePair&)>& payoff,
    const ActionSpace& space, std::uint64_t seed, const SynthesisOptions& options) {
    auto batch = [&](const std::vector<std::pair<NodePair, NodePair>>& duels) {
        std::vector<double> out(duels.size());
        parallel_for(duels.size(), options.threads,
                     [&](std::size_t i) { out[i] = payoff(duels[i].first, duels[i].second); });
        return out;
    };
    return synthesize_impl(batch, space, seed, options);
}

void save_ranking_csv(const CentralityTable& table, const EwmTopsisResult& result,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "node,degree,closeness,betweenness,eigenvector,w_degree,w_closeness,w_betweenness,"
           "w_eigenvector,score,rank\n";
    const int n = static_cast<int>(table.degree.size());
    std::vector<int> rank_of(n);
    for (int r = 0; r < n; ++r) rank_of[result.ranking[r]] = r + 1;
    out.precision(10);
    for (int v = 0; v < n; ++v) {
        out << v << "," << table.degree[v] << "," << table.closeness[v] << ","
            << table.betweenness[v] << "," << table.eigenvector[v];
        for (int j = 0; j < 4; ++j) out << "," << result.weights[j];
        out << "," << result.scores[v] << "," << rank_of[v] << "\n";
    }
}

} // namespace cascnet
