#include "cascnet/datagen.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "cascnet/errors.hpp"
#include "cascnet/parallel.hpp"
#include "cascnet/rng.hpp"

#include "json.hpp"

namespace cascnet {

namespace {
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t joint_key(const NodePair& a, const NodePair& d) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.u)) << 48) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.v)) << 32) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(d.u)) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(d.v));
}

} // namespace

std::vector<SubactionSpace> partition_subaction_spaces(int n, int m, int p, std::uint64_t seed,
                                                       std::vector<Node>* uncovered) {
    if (m < 2 || m > n) throw InvalidParams("partition_subaction_spaces: need 2 <= M <= N");
    if (p < 1) throw InvalidParams("partition_subaction_spaces: need p >= 1");
    std::vector<SubactionSpace> spaces(p);
    std::vector<char> covered(n, 0);
    for (int s = 0; s < p; ++s) {
        Rng rng(mix_seed(seed, 0x53554241u, static_cast<std::uint64_t>(s)));
        auto pick = rng.sample_without_replacement(n, m);
        SubactionSpace& space = spaces[s];
        space.id = s;
        space.node_pool.reserve(m);
        for (auto v : pick) {
            space.node_pool.push_back(static_cast<Node>(v));
            covered[v] = 1;
        }
        ActionSpace as(space.node_pool);
        space.actions = as.actions();
    }
    std::vector<Node> missing;
    for (Node v = 0; v < n; ++v)
        if (!covered[v]) missing.push_back(v);
    if (!missing.empty()) {
        std::cerr << "warning: " << missing.size() << " node(s) not covered by any subaction pool:";
        for (Node v : missing) std::cerr << " " << v;
        std::cerr << "\n";
    }
    if (uncovered) *uncovered = std::move(missing);
    return spaces;
}

std::vector<TrialRecord> generate_factual_dataset(const CascadeModel& model,
                                                  const std::vector<SubactionSpace>& spaces,
                                                  std::int64_t q, std::uint64_t seed, int threads,
                                                  FactualStats* stats) {
    if (spaces.empty()) return {};
    const std::int64_t actions = static_cast<std::int64_t>(spaces.front().actions.size());
    const std::int64_t grid = actions * actions;
    if (q < 1 || q > grid)
        throw InvalidParams("generate_factual_dataset: q must lie in [1, (M choose 2)^2]");

    auto start = Clock::now();
    std::vector<TrialRecord> records(spaces.size() * static_cast<std::size_t>(q));
    parallel_for(spaces.size(), threads, [&](std::size_t s) {
        const SubactionSpace& space = spaces[s];
        const std::int64_t k = static_cast<std::int64_t>(space.actions.size());
        std::vector<std::uint64_t> cells;
        if (q == k * k) {
            cells.resize(q);
            for (std::int64_t c = 0; c < q; ++c) cells[c] = static_cast<std::uint64_t>(c);
        } else {
            Rng rng(mix_seed(seed, 0x46414354u, static_cast<std::uint64_t>(space.id)));
            cells = rng.sample_without_replacement(static_cast<std::uint64_t>(k * k),
                                                   static_cast<std::uint64_t>(q));
        }
        for (std::int64_t t = 0; t < q; ++t) {
            const NodePair& atk = space.actions[cells[t] / k];
            const NodePair& def = space.actions[cells[t] % k];
            TrialRecord& rec = records[s * q + t];
            rec.alpha_a = atk;
            rec.alpha_d = def;
            rec.subspace_id = space.id;
            rec.provenance = Provenance::Factual;
            rec.omega = run_cascade(model, initial_failures(atk, def)).omega;
        }
    });
    if (stats) {
        stats->trials = static_cast<std::int64_t>(records.size());
        stats->wall_ms = ms_since(start);
    }
    return records;
}

std::vector<TrialRecord> generate_uniform_dataset(const CascadeModel& model, std::int64_t count,
                                                  std::uint64_t seed, int threads,
                                                  FactualStats* stats) {
    const int n = model.graph->node_count();
    const std::int64_t na = static_cast<std::int64_t>(n) * (n - 1) / 2;
    if (count < 1) throw InvalidParams("generate_uniform_dataset: count must be positive");
    auto start = Clock::now();
    ActionSpace full = ActionSpace::full(n);

    // joint actions drawn without replacement via an index permutation
    IndexPermutation perm(static_cast<std::uint64_t>(na) * static_cast<std::uint64_t>(na),
                          mix_seed(seed, 0x554e4946u));
    std::vector<std::uint64_t> cells;
    cells.reserve(count);
    const std::uint64_t domain = static_cast<std::uint64_t>(na) * static_cast<std::uint64_t>(na);
    for (std::uint64_t i = 0; i < perm.padded_size() &&
                              cells.size() < static_cast<std::size_t>(count); ++i) {
        std::uint64_t img = perm.permute(i);
        if (img < domain) cells.push_back(img);
    }
    if (cells.size() < static_cast<std::size_t>(count))
        throw InvalidParams("generate_uniform_dataset: count exceeds joint action space");

    std::vector<TrialRecord> records(count);
    parallel_for(records.size(), threads, [&](std::size_t t) {
        const NodePair& atk = full.action(static_cast<int>(cells[t] / na));
        const NodePair& def = full.action(static_cast<int>(cells[t] % na));
        TrialRecord& rec = records[t];
        rec.alpha_a = atk;
        rec.alpha_d = def;
        rec.subspace_id = -1;
        rec.provenance = Provenance::Factual;
        rec.omega = run_cascade(model, initial_failures(atk, def)).omega;
    });
    if (stats) {
        stats->trials = count;
        stats->wall_ms = ms_since(start);
    }
    return records;
}

std::pair<std::vector<TrialRecord>, std::int64_t> deduplicate(std::vector<TrialRecord> records) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(records.size() * 2);
    std::vector<TrialRecord> kept;
    kept.reserve(records.size());
    std::int64_t removed = 0;
    for (auto& rec : records) {
        if (seen.insert(joint_key(rec.alpha_a, rec.alpha_d)).second)
            kept.push_back(std::move(rec));
        else
            ++removed;
    }
    return {std::move(kept), removed};
}

void save_dataset_jsonl(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& rec : records) {
        nlohmann::json j;
        j["atk"] = {rec.alpha_a.u, rec.alpha_a.v};
        j["def"] = {rec.alpha_d.u, rec.alpha_d.v};
        j["omega"] = rec.omega;
        j["sub"] = rec.subspace_id;
        j["src"] = rec.provenance == Provenance::Factual ? "fac" : "cfac";
        out << j.dump() << "\n";
    }
}

void append_dataset_jsonl(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot write " + path);
    for (const auto& rec : records) {
        nlohmann::json j;
        j["atk"] = {rec.alpha_a.u, rec.alpha_a.v};
        j["def"] = {rec.alpha_d.u, rec.alpha_d.v};
        j["omega"] = rec.omega;
        j["sub"] = rec.subspace_id;
        j["src"] = rec.provenance == Provenance::Factual ? "fac" : "cfac";
        out << j.dump() << "\n";
    }
}

std::vector<TrialRecord> load_dataset_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::vector<TrialRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("invalid JSON record", lineno);
        TrialRecord rec;
        rec.alpha_a = NodePair(j.at("atk")[0].get<Node>(), j.at("atk")[1].get<Node>());
        rec.alpha_d = NodePair(j.at("def")[0].get<Node>(), j.at("def")[1].get<Node>());
        rec.omega = j.at("omega").get<std::vector<Node>>();
        rec.subspace_id = j.at("sub").get<int>();
        rec.provenance =
            j.at("src").get<std::string>() == "fac" ? Provenance::Factual
                                                    : Provenance::Counterfactual;
        records.push_back(std::move(rec));
    }
    return records;
}

void save_dataset_meta(const DatasetMeta& meta, const std::string& path) {
    nlohmann::json j;
    j["graph_seed"] = meta.graph_seed;
    j["cascade"] = meta.cascade;
    j["pool_size"] = meta.pool_size;
    j["subspaces"] = meta.subspaces;
    j["trials_per_space"] = meta.trials_per_space;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace cascnet
