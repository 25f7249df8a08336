#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascnet/cascade.hpp"

namespace cascnet {

/// Unordered node pair stored with u < v.
struct NodePair {
    Node u = 0;
    Node v = 0;

    NodePair() = default;
    NodePair(Node a, Node b);

    bool contains(Node x) const { return x == u || x == v; }
    bool operator==(const NodePair& o) const { return u == o.u && v == o.v; }
    bool operator<(const NodePair& o) const { return u != o.u ? u < o.u : v < o.v; }
};

/// All unordered pairs from an ordered node pool, in lexicographic order so
/// action indices are stable.
class ActionSpace {
public:
    explicit ActionSpace(std::vector<Node> node_pool);

    static ActionSpace full(int n);

    const std::vector<Node>& node_pool() const { return pool_; }
    const std::vector<NodePair>& actions() const { return actions_; }
    int size() const { return static_cast<int>(actions_.size()); }
    const NodePair& action(int i) const { return actions_[i]; }

    /// Index of a pair within this space; -1 if absent.
    int index_of(const NodePair& p) const;

private:
    std::vector<Node> pool_;
    std::vector<NodePair> actions_;
};

/// Index of pair (u, v) in the full N-node action space.
int full_space_index(const NodePair& p, int n);

struct MixedStrategy {
    std::vector<double> probs;

    static MixedStrategy pure(int index, int size);
    static MixedStrategy uniform(int size);
    void validate() const; // entries >= 0, sum within 1e-9 of 1
};

/// Attacker payoffs p_a in [0, 1]; the defender's payoff is -p_a.
struct PayoffMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<float> values; // row-major

    float at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
    float& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
};

/// Theta = alpha_a minus any attacked node that is also defended.
std::vector<Node> initial_failures(const NodePair& alpha_a, const NodePair& alpha_d);

/// Simulates one engagement; payoff is |Omega| / N.
std::pair<double, CascadeOutcome> play_trial(const CascadeModel& model, const NodePair& alpha_a,
                                             const NodePair& alpha_d);

/// Payoff of (i, j) without materializing the outcome.
double trial_payoff(const CascadeModel& model, const NodePair& alpha_a, const NodePair& alpha_d);

/// Full payoff matrix over two action spaces. Entries are independent and
/// evaluated in parallel. Throws BudgetExceeded when rows*cols passes
/// max_entries.
PayoffMatrix build_payoff_matrix(const CascadeModel& model, const ActionSpace& space_a,
                                 const ActionSpace& space_d,
                                 std::int64_t max_entries = 1 << 20, int threads = 0);

double expected_payoff(const PayoffMatrix& p, const MixedStrategy& pi_a,
                       const MixedStrategy& pi_d);

enum class Side { Attacker, Defender };

struct BestResponse {
    MixedStrategy strategy; // pure
    int action = 0;
    double value = 0.0; // attacker payoff achieved
};

/// Pure best response against a fixed opponent strategy. The attacker
/// maximizes and the defender minimizes attacker payoff; ties break to the
/// lowest action index.
BestResponse best_response(const PayoffMatrix& p, const MixedStrategy& opponent, Side side);

struct NESolution {
    MixedStrategy pi_a;
    MixedStrategy pi_d;
    double value = 0.0;
    double exploitability = 0.0;
    bool used_fictitious_play = false;
};

/// Exact Nash equilibrium of the zero-sum game via the maximin linear
/// program (dense simplex). Matrices larger than fp_threshold on either
/// side fall back to fictitious play with a 1e-4 exploitability target.
NESolution solve_zero_sum_ne(const PayoffMatrix& p, int fp_threshold = 2000);

/// Fictitious play to the requested exploitability; used for games too
/// large for the LP. Always terminates (iteration cap), reporting the
/// exploitability it reached.
NESolution fictitious_play(const PayoffMatrix& p, double target_exploitability = 1e-4,
                           std::int64_t max_iters = 2000000);

/// delta(pi_a, pi_d) = best-response attacker payoff minus best-response
/// defender payoff; zero exactly at a Nash equilibrium.
double matrix_exploitability(const PayoffMatrix& p, const MixedStrategy& pi_a,
                             const MixedStrategy& pi_d);

void save_payoff_csv(const PayoffMatrix& p, const std::string& path);

/// Strategy JSON: [{"action_index":i,"node_pair":[u,v],"probability":p}, ...]
void save_strategy_json(const MixedStrategy& s, const ActionSpace& space,
                        const std::string& path);

} // namespace cascnet
