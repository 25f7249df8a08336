#include "cascnet/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"

#include "json.hpp"

namespace cascnet {

NodePair::NodePair(Node a, Node b) : u(std::min(a, b)), v(std::max(a, b)) {
    if (a == b) throw InvalidParams("NodePair: nodes must be distinct");
}

ActionSpace::ActionSpace(std::vector<Node> node_pool) : pool_(std::move(node_pool)) {
    if (pool_.size() < 2) throw InvalidParams("ActionSpace: pool needs at least 2 nodes");
    std::vector<Node> sorted(pool_);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidParams("ActionSpace: pool nodes must be distinct");
    actions_.reserve(sorted.size() * (sorted.size() - 1) / 2);
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j)
            actions_.emplace_back(sorted[i], sorted[j]);
}

ActionSpace ActionSpace::full(int n) {
    std::vector<Node> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    return ActionSpace(std::move(pool));
}

int ActionSpace::index_of(const NodePair& p) const {
    auto it = std::lower_bound(actions_.begin(), actions_.end(), p);
    if (it == actions_.end() || !(*it == p)) return -1;
    return static_cast<int>(it - actions_.begin());
}

int full_space_index(const NodePair& p, int n) {
    if (p.u < 0 || p.v >= n) throw IndexOutOfRange("pair outside full action space");
    return p.u * n - p.u * (p.u + 1) / 2 + (p.v - p.u - 1);
}

MixedStrategy MixedStrategy::pure(int index, int size) {
    MixedStrategy s;
    s.probs.assign(size, 0.0);
    s.probs.at(index) = 1.0;
    return s;
}

MixedStrategy MixedStrategy::uniform(int size) {
    MixedStrategy s;
    s.probs.assign(size, 1.0 / size);
    return s;
}

void MixedStrategy::validate() const {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw InvalidParams("MixedStrategy: negative probability");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw InvalidParams("MixedStrategy: probabilities sum != 1");
}

std::vector<Node> initial_failures(const NodePair& alpha_a, const NodePair& alpha_d) {
    std::vector<Node> theta;
    if (!alpha_d.contains(alpha_a.u)) theta.push_back(alpha_a.u);
    if (!alpha_d.contains(alpha_a.v)) theta.push_back(alpha_a.v);
    return theta;
}

std::pair<double, CascadeOutcome> play_trial(const CascadeModel& model, const NodePair& alpha_a,
                                             const NodePair& alpha_d) {
    CascadeOutcome outcome = run_cascade(model, initial_failures(alpha_a, alpha_d));
    double payoff = static_cast<double>(outcome.omega.size()) / model.graph->node_count();
    return {payoff, std::move(outcome)};
}

double trial_payoff(const CascadeModel& model, const NodePair& alpha_a,
                    const NodePair& alpha_d) {
    CascadeOutcome outcome = run_cascade(model, initial_failures(alpha_a, alpha_d));
    return static_cast<double>(outcome.omega.size()) / model.graph->node_count();
}

PayoffMatrix build_payoff_matrix(const CascadeModel& model, const ActionSpace& space_a,
                                 const ActionSpace& space_d, std::int64_t max_entries,
                                 int threads) {
    std::int64_t rows = space_a.size();
    std::int64_t cols = space_d.size();
    if (rows * cols > max_entries)
        throw BudgetExceeded("payoff matrix needs " + std::to_string(rows * cols) +
                             " entries, budget is " + std::to_string(max_entries));
    PayoffMatrix p;
    p.rows = static_cast<int>(rows);
    p.cols = static_cast<int>(cols);
    p.values.resize(static_cast<std::size_t>(rows * cols));
    parallel_for(p.values.size(), threads, [&](std::size_t e) {
        int i = static_cast<int>(e / cols);
        int j = static_cast<int>(e % cols);
        p.values[e] = static_cast<float>(trial_payoff(model, space_a.action(i), space_d.action(j)));
    });
    return p;
}

double expected_payoff(const PayoffMatrix& p, const MixedStrategy& pi_a,
                       const MixedStrategy& pi_d) {
    if (static_cast<int>(pi_a.probs.size()) != p.rows ||
        static_cast<int>(pi_d.probs.size()) != p.cols)
        throw DimensionMismatch("expected_payoff: strategy lengths do not match matrix");
    double total = 0.0;
    for (int i = 0; i < p.rows; ++i) {
        if (pi_a.probs[i] == 0.0) continue;
        double row = 0.0;
        for (int j = 0; j < p.cols; ++j) row += p.at(i, j) * pi_d.probs[j];
        total += pi_a.probs[i] * row;
    }
    return total;
}

BestResponse best_response(const PayoffMatrix& p, const MixedStrategy& opponent, Side side) {
    BestResponse br;
    if (side == Side::Attacker) {
        if (static_cast<int>(opponent.probs.size()) != p.cols)
            throw DimensionMismatch("best_response: opponent length != cols");
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.rows; ++i) {
            double val = 0.0;
            for (int j = 0; j < p.cols; ++j) val += p.at(i, j) * opponent.probs[j];
            if (val > best) { // first max wins: lowest-index tie-break
                best = val;
                br.action = i;
            }
        }
        br.value = best;
        br.strategy = MixedStrategy::pure(br.action, p.rows);
    } else {
        if (static_cast<int>(opponent.probs.size()) != p.rows)
            throw DimensionMismatch("best_response: opponent length != rows");
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < p.cols; ++j) {
            double val = 0.0;
            for (int i = 0; i < p.rows; ++i) val += p.at(i, j) * opponent.probs[i];
            if (val < best) {
                best = val;
                br.action = j;
            }
        }
        br.value = best;
        br.strategy = MixedStrategy::pure(br.action, p.cols);
    }
    return br;
}

double matrix_exploitability(const PayoffMatrix& p, const MixedStrategy& pi_a,
                             const MixedStrategy& pi_d) {
    double atk_br = best_response(p, pi_d, Side::Attacker).value;
    double def_br = best_response(p, pi_a, Side::Defender).value;
    return atk_br - def_br;
}

namespace {

// Dense tableau simplex for the transformed zero-sum LP:
//   maximize sum(y) s.t. P' y <= 1, y >= 0   with P' = P + shift > 0.
// The defender strategy is y * v', the attacker strategy comes from the
// slack reduced costs (LP duality), and v' = 1 / sum(y*).
struct SimplexResult {
    std::vector<double> y;     // primal (defender, transformed)
    std::vector<double> x;     // dual (attacker, transformed)
    double objective = 0.0;
    bool ok = false;
};

SimplexResult simplex_zero_sum(const std::vector<double>& a, int m, int n, bool bland_only) {
    const int width = n + m + 1;
    std::vector<double> t(static_cast<std::size_t>(m + 1) * width, 0.0);
    auto at = [&](int r, int c) -> double& { return t[static_cast<std::size_t>(r) * width + c]; };
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) at(i, j) = a[static_cast<std::size_t>(i) * n + j];
        at(i, n + i) = 1.0;
        at(i, width - 1) = 1.0;
        basis[i] = n + i;
    }
    for (int j = 0; j < n; ++j) at(m, j) = -1.0;

    const double eps = 1e-11;
    const std::int64_t dantzig_cap = 50LL * (m + n) + 1000;
    const std::int64_t hard_cap = 2000LL * (m + n) + 10000;
    std::int64_t iters = 0;
    bool bland = bland_only;

    while (true) {
        int col = -1;
        if (bland) {
            for (int j = 0; j < width - 1; ++j)
                if (at(m, j) < -eps) {
                    col = j;
                    break;
                }
        } else {
            double best = -eps;
            for (int j = 0; j < width - 1; ++j)
                if (at(m, j) < best) {
                    best = at(m, j);
                    col = j;
                }
        }
        if (col < 0) break; // optimal

        int row = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double coeff = at(i, col);
            if (coeff > eps) {
                double ratio = at(i, width - 1) / coeff;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (row < 0 || basis[i] < basis[row]))) {
                    best_ratio = ratio;
                    row = i;
                }
            }
        }
        if (row < 0) return {}; // unbounded: cannot happen with P' > 0

        double pivot = at(row, col);
        for (int j = 0; j < width; ++j) at(row, j) /= pivot;
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            double f = at(i, col);
            if (f == 0.0) continue;
            for (int j = 0; j < width; ++j) at(i, j) -= f * at(row, j);
        }
        basis[row] = col;

        if (++iters > hard_cap) return {};
        if (!bland && iters > dantzig_cap) bland = true;
    }

    SimplexResult res;
    res.y.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.y[basis[i]] = at(i, width - 1);
    res.x.assign(m, 0.0);
    for (int i = 0; i < m; ++i) res.x[i] = std::max(0.0, at(m, n + i));
    res.objective = at(m, width - 1);
    res.ok = res.objective > eps;
    return res;
}

NESolution solve_lp(const PayoffMatrix& p) {
    const int m = p.rows;
    const int n = p.cols;
    float min_entry = *std::min_element(p.values.begin(), p.values.end());
    const double shift = 1.0 - static_cast<double>(min_entry);
    std::vector<double> a(p.values.size());
    for (std::size_t e = 0; e < a.size(); ++e) a[e] = static_cast<double>(p.values[e]) + shift;

    NESolution sol;
    for (int attempt = 0; attempt < 2; ++attempt) {
        SimplexResult res = simplex_zero_sum(a, m, n, attempt == 1);
        if (!res.ok) continue;
        double v_shifted = 1.0 / res.objective;
        MixedStrategy pi_a, pi_d;
        pi_a.probs.resize(m);
        pi_d.probs.resize(n);
        double sa = 0.0, sd = 0.0;
        for (int i = 0; i < m; ++i) sa += (pi_a.probs[i] = std::max(0.0, res.x[i] * v_shifted));
        for (int j = 0; j < n; ++j) sd += (pi_d.probs[j] = std::max(0.0, res.y[j] * v_shifted));
        if (sa <= 0.0 || sd <= 0.0) continue;
        for (double& q : pi_a.probs) q /= sa;
        for (double& q : pi_d.probs) q /= sd;
        sol.pi_a = std::move(pi_a);
        sol.pi_d = std::move(pi_d);
        sol.value = v_shifted - shift;
        sol.exploitability = matrix_exploitability(p, sol.pi_a, sol.pi_d);
        if (sol.exploitability <= 1e-6) return sol;
    }
    throw SolverFailure("zero-sum LP did not reach 1e-6 exploitability");
}

} // namespace

NESolution fictitious_play(const PayoffMatrix& p, double target_exploitability,
                           std::int64_t max_iters) {
    const int m = p.rows;
    const int n = p.cols;
    std::vector<double> atk_scores(m, 0.0); // cumulative (P e_j) sums over defender picks
    std::vector<double> def_scores(n, 0.0); // cumulative (P^T e_i) sums over attacker picks
    std::vector<double> atk_counts(m, 0.0), def_counts(n, 0.0);

    int i_cur = 0, j_cur = 0;
    NESolution sol;
    sol.used_fictitious_play = true;
    for (std::int64_t it = 1; it <= max_iters; ++it) {
        atk_counts[i_cur] += 1.0;
        def_counts[j_cur] += 1.0;
        for (int i = 0; i < m; ++i) atk_scores[i] += p.at(i, j_cur);
        for (int j = 0; j < n; ++j) def_scores[j] += p.at(i_cur, j);

        int i_next = 0, j_next = 0;
        for (int i = 1; i < m; ++i)
            if (atk_scores[i] > atk_scores[i_next]) i_next = i;
        for (int j = 1; j < n; ++j)
            if (def_scores[j] < def_scores[j_next]) j_next = j;
        i_cur = i_next;
        j_cur = j_next;

        if (it % 256 == 0 || it == max_iters) {
            double delta = atk_scores[i_cur] / it - def_scores[j_cur] / it;
            if (delta <= target_exploitability || it == max_iters) {
                sol.pi_a.probs.resize(m);
                sol.pi_d.probs.resize(n);
                for (int i = 0; i < m; ++i) sol.pi_a.probs[i] = atk_counts[i] / it;
                for (int j = 0; j < n; ++j) sol.pi_d.probs[j] = def_counts[j] / it;
                sol.value = expected_payoff(p, sol.pi_a, sol.pi_d);
                sol.exploitability = matrix_exploitability(p, sol.pi_a, sol.pi_d);
                if (sol.exploitability <= target_exploitability || it == max_iters) return sol;
            }
        }
    }
    return sol;
}

NESolution solve_zero_sum_ne(const PayoffMatrix& p, int fp_threshold) {
    if (p.rows < 1 || p.cols < 1) throw InvalidParams("solve_zero_sum_ne: empty matrix");
    for (float v : p.values)
        if (!std::isfinite(v)) throw SolverFailure("solve_zero_sum_ne: non-finite entry");
    if (p.rows > fp_threshold || p.cols > fp_threshold) return fictitious_play(p);
    return solve_lp(p);
}

void save_payoff_csv(const PayoffMatrix& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out.precision(9);
    for (int i = 0; i < p.rows; ++i) {
        for (int j = 0; j < p.cols; ++j) out << (j ? "," : "") << p.at(i, j);
        out << "\n";
    }
}

void save_strategy_json(const MixedStrategy& s, const ActionSpace& space,
                        const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < s.probs.size(); ++i) {
        if (s.probs[i] <= 0.0) continue;
        arr.push_back({{"action_index", i},
                       {"node_pair", {space.action(static_cast<int>(i)).u,
                                      space.action(static_cast<int>(i)).v}},
                       {"probability", s.probs[i]}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << arr.dump(2) << "\n";
}

} // namespace cascnet
