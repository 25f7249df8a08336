// Criteria that exercise simulation, CfDA and solver correctness directly.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "criteria.hpp"

#include "cascnet/cfda.hpp"
#include "cascnet/exploit.hpp"
#include "cascnet/pipeline.hpp"
#include "cascnet/rng.hpp"

#include "../oracles.hpp"

namespace acceptance {

using namespace cascnet;
using Clock = std::chrono::steady_clock;

namespace {

double elapsed_s(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SynthesizedStrategy from_mixed(const MixedStrategy& m) {
    SynthesizedStrategy s;
    for (std::size_t i = 0; i < m.probs.size(); ++i)
        if (m.probs[i] > 0.0) {
            s.support.push_back(static_cast<int>(i));
            s.probs.push_back(m.probs[i]);
        }
    return s;
}

} // namespace

// 1. build_payoff_matrix equals brute-force play_trial entry-wise on N <= 10
//    graphs (20 seeds, both models); LP value matches 3x3 support
//    enumeration within 1e-6.
void criterion1_oracle_equivalence(Results& results) {
    auto start = Clock::now();
    bool pass = true;
    std::string detail;
    int matrices = 0, lp_checks = 0;

    for (std::uint64_t seed = 0; seed < 20 && pass; ++seed) {
        const int n = 6 + static_cast<int>(seed % 5); // 6..10
        Graph g = oracle::random_connected_graph(n, 0.4, seed);
        for (int kind = 0; kind < 2 && pass; ++kind) {
            NodeFeatures features = kind == 0
                                        ? generate_thresholds(n, seed + 1000)
                                        : generate_capacities(g, {.alpha = 0.2, .c0 = 1.0});
            CascadeModel model(kind == 0 ? CascadeKind::Threshold : CascadeKind::ShortestPath,
                               g, features);
            ActionSpace full = ActionSpace::full(n);
            PayoffMatrix p = build_payoff_matrix(model, full, full);
            ++matrices;
            for (int i = 0; i < p.rows && pass; ++i)
                for (int j = 0; j < p.cols && pass; ++j) {
                    float direct = static_cast<float>(
                        play_trial(model, full.action(i), full.action(j)).first);
                    if (p.at(i, j) != direct) {
                        pass = false;
                        detail = "matrix entry mismatch at seed " + std::to_string(seed);
                    }
                }

            // 3x3 subgames of the true matrix against support enumeration
            Rng rng(seed * 7 + kind);
            std::vector<std::vector<double>> sub(3, std::vector<double>(3));
            std::vector<int> ri(3), ci(3);
            for (int k = 0; k < 3; ++k) {
                ri[k] = static_cast<int>(rng.below(p.rows));
                ci[k] = static_cast<int>(rng.below(p.cols));
            }
            PayoffMatrix q;
            q.rows = q.cols = 3;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    sub[i][j] = p.at(ri[i], ci[j]);
                    q.values.push_back(p.at(ri[i], ci[j]));
                }
            auto expected = oracle::support_enumeration_value(sub);
            if (!expected) continue;
            NESolution sol = solve_zero_sum_ne(q);
            ++lp_checks;
            if (std::fabs(sol.value - *expected) > 1e-6) {
                pass = false;
                detail = "LP value off support enumeration by " +
                         std::to_string(std::fabs(sol.value - *expected));
            }
        }
    }
    // random 3x3 matrices as well
    Rng rng(424242);
    for (int rep = 0; rep < 20 && pass; ++rep) {
        std::vector<std::vector<double>> a(3, std::vector<double>(3));
        PayoffMatrix p;
        p.rows = p.cols = 3;
        for (auto& row : a)
            for (double& v : row) {
                v = rng.uniform01();
                p.values.push_back(static_cast<float>(v));
            }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a[i][j] = p.at(i, j);
        auto expected = oracle::support_enumeration_value(a);
        if (!expected) continue;
        NESolution sol = solve_zero_sum_ne(p);
        ++lp_checks;
        if (std::fabs(sol.value - *expected) > 1e-6) {
            pass = false;
            detail = "random 3x3 LP value off by " +
                     std::to_string(std::fabs(sol.value - *expected));
        }
    }

    double secs = elapsed_s(start);
    if (pass)
        detail = std::to_string(matrices) + " matrices entry-exact, " +
                 std::to_string(lp_checks) + " LP-vs-enumeration checks";
    pass = pass && secs < 60.0;
    results.report(1, pass, detail + " (" + std::to_string(secs) + "s, limit 60s)");
}

// 2. >= 1000 accepted threshold counterfactuals on a 100-node instance all
//    replay exactly under run_cascade.
void criterion2_threshold_cfda_soundness(Results& results) {
    auto start = Clock::now();
    Graph g = oracle::random_connected_graph(100, 2.0 * std::log(100.0) / 100.0, 1);
    NodeFeatures phi = generate_thresholds(100, 2);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    auto spaces = partition_subaction_spaces(100, 5, 50, 3);
    auto [factual, removed] = deduplicate(generate_factual_dataset(model, spaces, 100, 3));

    CfdaOptions opt;
    opt.cap_factor = 1.0; // ~4800 accepted, well past the 1000 minimum
    auto [cfac, stats] = generate_counterfactual_dataset(model, factual, 4, opt);

    std::int64_t exact = 0, total = 0;
    for (const auto& rec : cfac) {
        auto replay = run_cascade(model, initial_failures(rec.alpha_a, rec.alpha_d));
        exact += replay.omega == rec.omega;
        ++total;
    }
    double secs = elapsed_s(start);
    bool pass = total >= 1000 && exact == total && secs < 300.0;
    results.report(2, pass,
                   std::to_string(exact) + "/" + std::to_string(total) +
                       " accepted counterfactuals replay exactly (" +
                       std::to_string(secs) + "s, limit 300s)");
}

// 3. >= 500 Strict-accepted shortest-path counterfactuals at N <= 50 are all
//    steady under a direct one-round check.
void criterion3_shortest_path_steadiness(Results& results) {
    auto start = Clock::now();
    std::int64_t steady = 0, total = 0, label_match = 0;
    for (std::uint64_t seed = 1; seed <= 4 && total < 500; ++seed) {
        Graph g = oracle::random_connected_graph(50, 0.12, seed);
        NodeFeatures caps = generate_capacities(g, {.alpha = 0.15, .c0 = 1.0});
        CascadeModel model(CascadeKind::ShortestPath, g, caps);
        auto spaces = partition_subaction_spaces(50, 5, 150, seed + 10);
        auto [factual, removed] =
            deduplicate(generate_factual_dataset(model, spaces, 100, seed + 10));
        CfdaOptions opt;
        opt.cap_factor = 0.1; // plenty past the 500 minimum, stops the stream early
        opt.sp_mode = SpValidationMode::Strict;
        auto [cfac, stats] = generate_counterfactual_dataset(model, factual, seed, opt);
        for (const auto& rec : cfac) {
            if (total >= 1500) break;
            steady += single_round(model, rec.omega).empty();
            // informational: how often the steady label equals the true cascade
            auto replay = run_cascade(model, initial_failures(rec.alpha_a, rec.alpha_d));
            label_match += replay.omega == rec.omega;
            ++total;
        }
    }
    double secs = elapsed_s(start);
    bool pass = total >= 500 && steady == total && secs < 300.0;
    std::ostringstream oss;
    oss << steady << "/" << total << " steady; label==C(theta) for " << label_match << "/"
        << total << " (informational) (" << secs << "s, limit 300s)";
    results.report(3, pass, oss.str());
}

// 4. On a 100-node threshold instance with 50 subaction sets: per-datum
//    counterfactual cost < per-datum factual cost, and pre-cap accepted
//    counterfactuals outnumber factual trials.
void criterion4_cfda_efficiency(Results& results) {
    Graph g = oracle::random_connected_graph(100, 2.0 * std::log(100.0) / 100.0, 7);
    NodeFeatures phi = generate_thresholds(100, 8);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    auto spaces = partition_subaction_spaces(100, 5, 50, 9);
    FactualStats fstats;
    generate_factual_dataset(model, spaces, 100, 9, 0, &fstats); // warm-up pass
    auto [factual, removed] =
        deduplicate(generate_factual_dataset(model, spaces, 100, 9, 0, &fstats));

    CfdaOptions opt;
    opt.cap_factor = 0.0; // pre-cap counts
    opt.factual_wall_ms = fstats.wall_ms;
    auto [cfac, stats] = generate_counterfactual_dataset(model, factual, 10, opt);

    bool ordering_time = stats.ms_per_cfac < stats.ms_per_fac;
    bool ordering_count = stats.n_cfac > stats.n_fac;
    std::ostringstream oss;
    oss << "ms/fac=" << stats.ms_per_fac << " ms/cfac=" << stats.ms_per_cfac
        << " n_fac=" << stats.n_fac << " n_cfac(pre-cap)=" << stats.n_cfac << " rejects{";
    for (const auto& [reason, count] : stats.reject_reasons)
        oss << " " << reason << "=" << count;
    oss << " }";
    results.report(4, ordering_time && ordering_count, oss.str());
}

// 5. Doubling factual volume at least doubles pre-cap accepted
//    counterfactuals, at 3 volume levels on a fixed 100-node instance.
void criterion5_superlinear_growth(Results& results) {
    Graph g = oracle::random_connected_graph(100, 2.0 * std::log(100.0) / 100.0, 11);
    NodeFeatures phi = generate_thresholds(100, 12);
    CascadeModel model(CascadeKind::Threshold, g, phi);

    std::vector<std::int64_t> fac_counts, cfac_counts;
    for (int p : {25, 50, 100}) {
        auto spaces = partition_subaction_spaces(100, 5, p, 13);
        auto [factual, removed] =
            deduplicate(generate_factual_dataset(model, spaces, 100, 13));
        CfdaOptions opt;
        opt.cap_factor = 0.0;
        auto [cfac, stats] = generate_counterfactual_dataset(model, factual, 14, opt);
        fac_counts.push_back(stats.n_fac);
        cfac_counts.push_back(stats.n_cfac);
    }
    bool pass = cfac_counts[1] >= 2 * cfac_counts[0] && cfac_counts[2] >= 2 * cfac_counts[1];
    std::ostringstream oss;
    oss << "factual " << fac_counts[0] << "/" << fac_counts[1] << "/" << fac_counts[2]
        << " -> pre-cap counterfactual " << cfac_counts[0] << "/" << cfac_counts[1] << "/"
        << cfac_counts[2];
    results.report(5, pass, oss.str());
}

// 8. Analytic gradients match central finite differences on the N=6 toy
//    model (b=4, h=8), relative error < 1e-4 at the 1e-3 step.
void criterion8_gradient_check(Results& results) {
    auto start = Clock::now();
    Graph g = oracle::random_connected_graph(6, 0.5, 5);
    NodeFeatures phi = generate_thresholds(6, 6);
    CascadeModel model(CascadeKind::Threshold, g, phi);
    auto spaces = partition_subaction_spaces(6, 4, 6, 7);
    auto data = generate_factual_dataset(model, spaces, 9, 7);
    data.resize(16);
    data[2].provenance = Provenance::Counterfactual;

    Predictor pred(6, 4, 8, 2, 99);
    auto [loss, grad] = pred.loss_and_gradient(data, phi.values(), 0.6);
    auto params = pred.parameters();
    const double step = 1e-3;

    double worst = 0.0;
    int checked = 0;
    Rng rng(321);
    std::vector<std::size_t> probe_idx;
    for (int k = 0; k < 200; ++k) probe_idx.push_back(rng.below(params.size()));
    for (std::size_t idx : probe_idx) {
        if (std::fabs(grad[idx]) < 1e-7) continue;
        auto plus = params, minus = params;
        plus[idx] += step;
        minus[idx] -= step;
        pred.set_parameters(plus);
        double lp = pred.loss_and_gradient(data, phi.values(), 0.6).first;
        pred.set_parameters(minus);
        double lm = pred.loss_and_gradient(data, phi.values(), 0.6).first;
        pred.set_parameters(params);
        double fd = (lp - lm) / (2.0 * step);
        worst = std::max(worst, std::fabs(fd - grad[idx]) / std::fabs(grad[idx]));
        ++checked;
    }
    double secs = elapsed_s(start);
    bool pass = checked >= 50 && worst < 1e-4 && secs < 10.0;
    std::ostringstream oss;
    oss << checked << " parameters checked, worst relative error " << worst << " ("
        << secs << "s, limit 10s)";
    results.report(8, pass, oss.str());
}

// 9. Byte-identical pipeline outputs across thread counts (wall-clock
//    timing fields live in separate artifacts and are exempt).
void criterion9_determinism(Results& results) {
    namespace fs = std::filesystem;
    auto read_file = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    auto strip_wall = [](const std::string& csv) {
        // drops the trailing wall_time_s column from every row
        std::istringstream in(csv);
        std::string out, line;
        while (std::getline(in, line)) {
            auto cut = line.rfind(',');
            out += line.substr(0, cut);
            out += "\n";
        }
        return out;
    };

    ExperimentConfig base;
    base.nodes = 14;
    base.pool_size = 4;
    base.subspaces = 10;
    base.cap_factor = 2.0;
    base.epochs = 3;
    base.embed_dim = 8;
    base.hidden_dim = 16;
    base.hidden_layers = 2;
    base.val_size = 100;
    base.samples_per_cell = 200;
    base.pulls = 1500;
    base.eval_plays = 400;
    base.selfplay_plays = 400;
    base.ne_budget = 20000;

    ExperimentConfig one = base, many = base;
    one.threads = 1;
    one.out_dir = (fs::temp_directory_path() / "cascnet_det_t1").string();
    many.threads = 4;
    many.out_dir = (fs::temp_directory_path() / "cascnet_det_t4").string();
    fs::remove_all(one.out_dir);
    fs::remove_all(many.out_dir);
    cmd_pipeline(one);
    cmd_pipeline(many);

    bool pass = true;
    std::string detail = "datasets, checkpoints, strategies, metrics identical across threads";
    for (const char* name :
         {"edges.txt", "features.txt", "dataset.jsonl", "dataset.uniform.jsonl",
          "dataset.meta.json", "inputs.hash", "ranking.csv", "models/nn.ckpt",
          "models/nn-subact.ckpt", "models/nn-subact-cfda.ckpt",
          "strategies/exact_ne_atk.json", "strategies/exact_ne_def.json",
          "strategies/wang2023_atk.json", "strategies/nn_atk.json",
          "strategies/nn-subact_atk.json", "strategies/nn-subact-cfda_atk.json",
          "plotdata/matrix_size.csv", "plotdata/cfac_growth.csv"}) {
        if (read_file(fs::path(one.out_dir) / name) !=
            read_file(fs::path(many.out_dir) / name)) {
            pass = false;
            detail = std::string("thread-count divergence in ") + name;
            break;
        }
    }
    if (pass) {
        std::string m1 = strip_wall(read_file(fs::path(one.out_dir) / "metrics.csv"));
        std::string m4 = strip_wall(read_file(fs::path(many.out_dir) / "metrics.csv"));
        if (m1 != m4) {
            pass = false;
            detail = "metric values diverge across thread counts";
        }
    }
    // a repeat run with the same seeds must also be byte-identical
    if (pass) {
        ExperimentConfig again = base;
        again.threads = 1;
        again.out_dir = (fs::temp_directory_path() / "cascnet_det_t1b").string();
        fs::remove_all(again.out_dir);
        cmd_pipeline(again);
        if (read_file(fs::path(one.out_dir) / "dataset.jsonl") !=
            read_file(fs::path(again.out_dir) / "dataset.jsonl")) {
            pass = false;
            detail = "rerun with identical config diverged";
        }
    }
    results.report(9, pass, detail);
}

// 10. Exact NE exploitability stays within Monte-Carlo noise; uniform
//     strategies measure strictly higher on the same instances.
void criterion10_ne_definition(Results& results) {
    bool pass = true;
    std::string detail;
    double worst_ne = 0.0, smallest_gap = 1e9;
    for (std::uint64_t seed = 0; seed < 6 && pass; ++seed) {
        const int n = 7 + static_cast<int>(seed % 4); // 7..10
        Graph g = oracle::random_connected_graph(n, 0.4, seed + 50);
        NodeFeatures phi = generate_thresholds(n, seed + 60);
        CascadeModel model(CascadeKind::Threshold, g, phi);
        ActionSpace full = ActionSpace::full(n);
        PayoffMatrix truth = build_payoff_matrix(model, full, full);
        NESolution ne = solve_zero_sum_ne(truth);

        ExploiterConfig cfg;
        cfg.pulls_budget = 20000;
        cfg.eval_plays = 5000;
        cfg.selfplay_plays = 10000;
        cfg.seed = seed + 500;
        cfg.true_matrix = &truth;

        auto ne_report = exploitability(model, from_mixed(ne.pi_a), from_mixed(ne.pi_d), cfg);
        auto uni_report = exploitability(model, from_mixed(MixedStrategy::uniform(full.size())),
                                         from_mixed(MixedStrategy::uniform(full.size())), cfg);
        // 2 x the MC standard error bound: payoff sd <= 0.5, two estimates
        const double bound = 2.0 * std::sqrt(2.0 * 0.25 / cfg.eval_plays);
        worst_ne = std::max(worst_ne, ne_report.delta);
        smallest_gap = std::min(smallest_gap, uni_report.delta - ne_report.delta);
        if (ne_report.delta > bound) {
            pass = false;
            detail = "NE exploitability " + std::to_string(ne_report.delta) +
                     " exceeds noise bound " + std::to_string(bound);
        }
        if (uni_report.delta <= ne_report.delta) {
            pass = false;
            detail = "uniform not strictly more exploitable at seed " + std::to_string(seed);
        }
    }
    if (pass) {
        std::ostringstream oss;
        oss << "worst NE delta " << worst_ne << ", min uniform-NE gap " << smallest_gap;
        detail = oss.str();
    }
    results.report(10, pass, detail);
}

} // namespace acceptance
