#include "cascnet/exploit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"
#include "cascnet/rng.hpp"

#include "json.hpp"

namespace cascnet {

namespace {

// integer failed-node totals keep parallel payoff means exact and
// independent of summation order
double mean_attacker_payoff(const CascadeModel& model, const ActionSpace& full,
                            const SynthesizedStrategy& atk, const SynthesizedStrategy& def,
                            int plays, std::uint64_t seed, int threads) {
    const int n = model.graph->node_count();
    std::vector<std::int64_t> failed(plays);
    parallel_for(static_cast<std::size_t>(plays), threads, [&](std::size_t i) {
        Rng rng(mix_seed(seed, 0x504c4159u, i));
        const NodePair& a = full.action(sample_action(atk, rng));
        const NodePair& d = full.action(sample_action(def, rng));
        failed[i] = static_cast<std::int64_t>(
            run_cascade(model, initial_failures(a, d)).omega.size());
    });
    std::int64_t total = 0;
    for (auto f : failed) total += f;
    return static_cast<double>(total) / (static_cast<double>(plays) * n);
}

SynthesizedStrategy pure_full_strategy(int action, StrategySource source) {
    SynthesizedStrategy s;
    s.support = {action};
    s.probs = {1.0};
    s.source = source;
    return s;
}

} // namespace

ExploiterResult train_exploiter(const CascadeModel& model, const SynthesizedStrategy& ego,
                                Side side_to_exploit, const ExploiterConfig& config) {
    if (config.pulls_budget < 1 || config.arm_pool_size < 1 || config.eval_plays < 1)
        throw InvalidParams("train_exploiter: budgets must be positive");
    const int n = model.graph->node_count();
    ActionSpace full = ActionSpace::full(n);
    const bool exploiting_defender = side_to_exploit == Side::Defender;

    // arm pool: the whole space when it fits, otherwise a uniform sample
    std::vector<int> arms;
    if (full.size() <= config.arm_pool_size) {
        arms.resize(full.size());
        for (int i = 0; i < full.size(); ++i) arms[i] = i;
    } else {
        Rng rng(mix_seed(config.seed, 0x41524d53u));
        auto pick = rng.sample_without_replacement(full.size(), config.arm_pool_size);
        arms.assign(pick.begin(), pick.end());
        std::sort(arms.begin(), arms.end());
    }
    if (config.true_matrix) {
        // ensure the matrix best response to the ego mixture is an arm
        MixedStrategy ego_mixed = ego.to_mixed(exploiting_defender ? config.true_matrix->cols
                                                                   : config.true_matrix->rows);
        BestResponse br = best_response(*config.true_matrix, ego_mixed,
                                        exploiting_defender ? Side::Attacker : Side::Defender);
        if (!std::binary_search(arms.begin(), arms.end(), br.action)) {
            arms.push_back(br.action);
            std::sort(arms.begin(), arms.end());
        }
    }

    const int num_arms = static_cast<int>(arms.size());
    std::vector<double> reward_sum(num_arms, 0.0);
    std::vector<std::int64_t> pull_count(num_arms, 0);
    Rng rng(mix_seed(config.seed, 0x55434231u));

    auto play_arm = [&](int arm) {
        const NodePair& own = full.action(arms[arm]);
        const NodePair& opp = full.action(sample_action(ego, rng));
        double p_a = exploiting_defender ? trial_payoff(model, own, opp)
                                         : trial_payoff(model, opp, own);
        // rewards stay in [0, 1]; the defender exploiter maximizes 1 - p_a
        return exploiting_defender ? p_a : 1.0 - p_a;
    };

    std::int64_t t = 0;
    for (int arm = 0; arm < num_arms && t < config.pulls_budget; ++arm, ++t) {
        reward_sum[arm] += play_arm(arm);
        pull_count[arm] = 1;
    }
    while (t < config.pulls_budget) {
        int best = 0;
        double best_ucb = -std::numeric_limits<double>::infinity();
        const double log_t = std::log(static_cast<double>(t));
        for (int arm = 0; arm < num_arms; ++arm) {
            double ucb = reward_sum[arm] / pull_count[arm] +
                         config.ucb_c * std::sqrt(log_t / pull_count[arm]);
            if (ucb > best_ucb) {
                best_ucb = ucb;
                best = arm;
            }
        }
        reward_sum[best] += play_arm(best);
        ++pull_count[best];
        ++t;
    }

    int best_arm = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int arm = 0; arm < num_arms; ++arm) {
        if (pull_count[arm] == 0) continue;
        double mean = reward_sum[arm] / pull_count[arm];
        if (mean > best_mean) {
            best_mean = mean;
            best_arm = arm;
        }
    }

    ExploiterResult result;
    result.arm_action = arms[best_arm];
    result.strategy = pure_full_strategy(arms[best_arm], StrategySource::Baseline);
    result.arm_pool = arms;

    // fresh evaluation batch, reported in the exploiter's own payoff terms
    double mean_pa = exploiting_defender
                         ? mean_attacker_payoff(model, full, result.strategy, ego,
                                                config.eval_plays,
                                                mix_seed(config.seed, 0x4556414cu),
                                                config.threads)
                         : mean_attacker_payoff(model, full, ego, result.strategy,
                                                config.eval_plays,
                                                mix_seed(config.seed, 0x4556414cu),
                                                config.threads);
    result.mean_payoff = exploiting_defender ? mean_pa : -mean_pa;
    return result;
}

ExploitabilityReport exploitability(const CascadeModel& model,
                                    const SynthesizedStrategy& ego_atk,
                                    const SynthesizedStrategy& ego_def,
                                    const ExploiterConfig& config) {
    ActionSpace full = ActionSpace::full(model.graph->node_count());
    ExploitabilityReport report;
    report.delta_g = mean_attacker_payoff(model, full, ego_atk, ego_def, config.selfplay_plays,
                                          mix_seed(config.seed, 0x53454c46u), config.threads);

    ExploiterConfig xd_cfg = config;
    xd_cfg.seed = mix_seed(config.seed, 0x5844u);
    ExploiterResult exploits_def = train_exploiter(model, ego_def, Side::Defender, xd_cfg);
    report.delta_xd = exploits_def.mean_payoff; // attacker payoff

    ExploiterConfig xa_cfg = config;
    xa_cfg.seed = mix_seed(config.seed, 0x5841u);
    ExploiterResult exploits_atk = train_exploiter(model, ego_atk, Side::Attacker, xa_cfg);
    report.delta_xa = exploits_atk.mean_payoff; // defender payoff, <= 0

    report.delta = (report.delta_xd - report.delta_g) + (report.delta_xa + report.delta_g);
    report.pulls = 2 * config.pulls_budget;
    report.arm_pool_attacker = exploits_def.arm_pool;
    report.arm_pool_defender = exploits_atk.arm_pool;
    return report;
}

double kl_to_ne(const MixedStrategy& method_strategy, const MixedStrategy& ne_strategy) {
    if (method_strategy.probs.size() != ne_strategy.probs.size())
        throw DimensionMismatch("kl_to_ne: strategies index different action spaces");
    constexpr double kEps = 1e-9;
    const double uniform = 1.0 / static_cast<double>(ne_strategy.probs.size());
    double kl = 0.0;
    for (std::size_t i = 0; i < method_strategy.probs.size(); ++i) {
        double m = method_strategy.probs[i];
        if (m <= 0.0) continue;
        double q = (1.0 - kEps) * ne_strategy.probs[i] + kEps * uniform;
        kl += m * std::log(m / q);
    }
    return std::max(0.0, kl);
}

void save_exploitability_json(const ExploitabilityReport& report, const std::string& path) {
    nlohmann::json j;
    j["delta_g"] = report.delta_g;
    j["delta_XD"] = report.delta_xd;
    j["delta_XA"] = report.delta_xa;
    j["delta"] = report.delta;
    j["pulls"] = report.pulls;
    j["arm_pool_attacker"] = report.arm_pool_attacker;
    j["arm_pool_defender"] = report.arm_pool_defender;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace cascnet
