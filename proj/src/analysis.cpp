#include "zx/analysis.hpp"

#include "zx/env.hpp"
#include "zx/errors.hpp"
#include "zx/parallel.hpp"
#include "zx/ppo.hpp"
#include "zx/semantics.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

namespace zx::analysis {

// --- evaluation -------------------------------------------------------------------------------

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Greedy: return "greedy";
        case Strategy::Anneal: return "anneal";
        case Strategy::Random: return "random";
        case Strategy::Policy: return "policy";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    for (const Strategy s: {Strategy::Greedy, Strategy::Anneal, Strategy::Random, Strategy::Policy}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    throw InputError("unknown strategy '" + std::string(name) + "' (expected greedy, anneal, random or policy)");
}

std::vector<RunResult> run_strategy(const StrategySpec& spec, const std::vector<Diagram>& corpus,
                                    std::uint64_t seed, int workers) {
    if (spec.kind == Strategy::Policy) {
        if (spec.policy == nullptr) {
            throw ContractError("policy strategy without a network");
        }
        return ppo::run_policy(*spec.policy, corpus, seed,
                               {.max_steps = spec.max_steps, .stop_action = spec.stop_action, .argmax = spec.argmax});
    }
    std::vector<RunResult> out(corpus.size());
    const std::string      stream(to_string(spec.kind));
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
        Rng rng = make_rng(seed, stream, i);
        switch (spec.kind) {
            case Strategy::Greedy: out[i] = greedy(corpus[i], rng, {.max_steps = spec.max_steps}); break;
            case Strategy::Anneal: out[i] = simulated_annealing(corpus[i], spec.anneal, rng); break;
            case Strategy::Random: out[i] = random_policy(corpus[i], rng, spec.max_steps); break;
            case Strategy::Policy: break;
        }
    });
    return out;
}

Summary summarize(std::string strategy, std::uint64_t corpusSeed, std::uint64_t seed, std::vector<RunResult> results) {
    Summary s;
    s.strategy    = std::move(strategy);
    s.corpus_seed = corpusSeed;
    s.seed        = seed;
    const double n = static_cast<double>(std::max<std::size_t>(results.size(), 1));
    for (const RunResult& r: results) {
        s.mean_initial_nodes += static_cast<double>(r.initial_nodes) / n;
        s.mean_best_nodes += static_cast<double>(r.best_nodes) / n;
        s.mean_best_alpha += static_cast<double>(r.best_alpha_spiders) / n;
        s.mean_final_nodes += static_cast<double>(r.final_nodes) / n;
        s.mean_cum_reward += r.cumulative_reward / n;
        s.mean_steps += r.steps / n;
        s.mean_time_s += r.wall_time / n;
    }
    s.per_diagram = std::move(results);
    return s;
}

nlohmann::json to_json(const Action& a) {
    nlohmann::json j;
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        j["node"] = n->node;
        j["kind"] = std::string(zx::to_string(n->kind));
    } else if (const auto* e = std::get_if<EdgeAction>(&a)) {
        j["edge"] = {e->edge.lo, e->edge.hi};
        j["kind"] = std::string(zx::to_string(e->kind));
    } else {
        j["kind"] = "Stop";
    }
    return j;
}

nlohmann::json to_json(const RunResult& r, bool withActions) {
    nlohmann::json j;
    j["initial_nodes"]      = r.initial_nodes;
    j["best_nodes"]         = r.best_nodes;
    j["best_alpha_spiders"] = r.best_alpha_spiders;
    j["final_nodes"]        = r.final_nodes;
    j["cumulative_reward"]  = r.cumulative_reward;
    j["steps"]              = r.steps;
    j["wall_time"]          = r.wall_time;
    if (withActions) {
        nlohmann::json acts = nlohmann::json::array();
        for (const Action& a: r.actions) {
            acts.push_back(to_json(a));
        }
        j["actions"] = std::move(acts);
    }
    return j;
}

nlohmann::json to_json(const Summary& s, bool withPerDiagram) {
    nlohmann::json j;
    j["strategy"]           = s.strategy;
    j["corpus_seed"]        = s.corpus_seed;
    j["seed"]               = s.seed;
    j["diagrams"]           = s.per_diagram.size();
    j["mean_initial_nodes"] = s.mean_initial_nodes;
    j["mean_best_nodes"]    = s.mean_best_nodes;
    j["mean_best_alpha"]    = s.mean_best_alpha;
    j["mean_final_nodes"]   = s.mean_final_nodes;
    j["mean_cum_reward"]    = s.mean_cum_reward;
    j["mean_steps"]         = s.mean_steps;
    j["mean_time_s"]        = s.mean_time_s;
    if (withPerDiagram) {
        nlohmann::json per = nlohmann::json::array();
        for (const RunResult& r: s.per_diagram) {
            per.push_back(to_json(r));
        }
        j["per_diagram"] = std::move(per);
    }
    return j;
}

std::string to_csv(const Summary& s) {
    std::ostringstream os;
    os << "index,initial_nodes,best_nodes,best_alpha_spiders,final_nodes,cumulative_reward,steps,wall_time\n";
    for (std::size_t i = 0; i < s.per_diagram.size(); ++i) {
        const RunResult& r = s.per_diagram[i];
        os << i << ',' << r.initial_nodes << ',' << r.best_nodes << ',' << r.best_alpha_spiders << ',' << r.final_nodes
           << ',' << r.cumulative_reward << ',' << r.steps << ',' << r.wall_time << '\n';
    }
    return os.str();
}

// --- locality ---------------------------------------------------------------------------------

namespace {

std::vector<NodeId> anchors(const Diagram& d, const Action& a) {
    std::vector<NodeId> out;
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        out.push_back(n->node);
    } else if (const auto* e = std::get_if<EdgeAction>(&a)) {
        out = {e->edge.lo, e->edge.hi};
    } else {
        throw ContractError("Stop has no local anchor");
    }
    for (const NodeId v: out) {
        if (!d.has_node(v)) {
            throw ContractError("anchor node " + std::to_string(v) + " is not in the diagram");
        }
    }
    return out;
}

double action_logit(const nn::Network& policy, const Diagram& d, const Action& a, int stepsLeft) {
    const Observation obs = observe(d, stepsLeft);
    return nn::policy_logits(policy, obs)[index_of(obs, a)];
}

} // namespace

Diagram neighborhood(const Diagram& d, const Action& a, int layer) {
    std::map<NodeId, int> dist;
    std::deque<NodeId>    queue;
    for (const NodeId v: anchors(d, a)) {
        dist[v] = 0;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const NodeId v = queue.front();
        queue.pop_front();
        if (dist[v] >= layer) {
            continue;
        }
        for (const auto& [w, m]: d.neighbors(v)) {
            if (!dist.contains(w)) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    Diagram sub;
    for (const auto& [v, k]: dist) {
        sub.insert_node(v, d.node(v));
    }
    for (const EdgeKey& e: d.edges()) {
        if (dist.contains(e.lo) && dist.contains(e.hi)) {
            sub.add_edge(e.lo, e.hi, d.multiplicity(e.lo, e.hi));
            if (d.edge_marked(e)) {
                sub.set_edge_marked(e, true);
            }
        }
    }
    std::vector<NodeId> in;
    std::vector<NodeId> out;
    for (const NodeId v: d.inputs()) {
        if (dist.contains(v)) {
            in.push_back(v);
        }
    }
    for (const NodeId v: d.outputs()) {
        if (dist.contains(v)) {
            out.push_back(v);
        }
    }
    sub.set_boundary(in, out);
    return sub;
}

double locality_epsilon(const nn::Network& policy, const Diagram& d, const Action& a, int layer, int stepsLeft) {
    const double full = action_logit(policy, d, a, stepsLeft);
    const double part = action_logit(policy, neighborhood(d, a, layer), a, stepsLeft);
    return std::expm1(std::abs(full - part));
}

LocalityReport locality_report(const nn::Network& policy, const std::vector<Diagram>& corpus, std::uint64_t seed,
                               int maxLayer, int workers) {
    LocalityReport r;
    r.max_layer = maxLayer;
    std::vector<std::vector<double>> eps(corpus.size());
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
        const Observation obs  = observe(corpus[i], 200);
        std::vector<std::uint8_t> mask = obs.mask;
        mask.back() = 0;
        if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
            return;
        }
        Rng                   rng    = make_rng(seed, "locality", i);
        const Eigen::VectorXd logits = nn::policy_logits(policy, obs);
        const int             idx    = ppo::sample_action(nn::masked_log_softmax(logits, mask), mask, rng);
        const Action          a      = action_at(obs, idx);
        for (int layer = 1; layer <= maxLayer; ++layer) {
            eps[i].push_back(locality_epsilon(policy, corpus[i], a, layer));
        }
    });
    r.mean_epsilon.assign(static_cast<std::size_t>(maxLayer), 0.0);
    r.max_epsilon.assign(static_cast<std::size_t>(maxLayer), 0.0);
    for (const auto& e: eps) {
        if (e.empty()) {
            continue;
        }
        ++r.samples;
        for (std::size_t k = 0; k < e.size(); ++k) {
            r.mean_epsilon[k] += e[k];
            r.max_epsilon[k] = std::max(r.max_epsilon[k], e[k]);
        }
    }
    for (double& m: r.mean_epsilon) {
        m /= std::max(r.samples, 1);
    }
    return r;
}

nlohmann::json to_json(const LocalityReport& r) {
    nlohmann::json j;
    j["max_layer"] = r.max_layer;
    j["samples"]   = r.samples;
    nlohmann::json layers = nlohmann::json::array();
    for (int k = 0; k < r.max_layer; ++k) {
        layers.push_back({{"layer", k + 1},
                          {"mean_epsilon", r.mean_epsilon[static_cast<std::size_t>(k)]},
                          {"max_epsilon", r.max_epsilon[static_cast<std::size_t>(k)]}});
    }
    j["layers"] = std::move(layers);
    return j;
}

// --- copy scenario ----------------------------------------------------------------------------

CopyScenario copy_scenario(int nOut, int nExtra) {
    if (nOut < 1 || nExtra < 0 || nExtra > nOut) {
        throw InputError("copy scenario needs 1 <= n_out and 0 <= n_extra <= n_out");
    }
    CopyScenario s;
    s.n_out      = nOut;
    s.n_extra    = nExtra;
    Diagram&     d = s.diagram;
    const NodeId z = d.add_spider(NodeKind::Z);
    const NodeId x = d.add_spider(NodeKind::X);
    d.add_edge(z, x);
    s.edge = EdgeKey::of(z, x);
    for (int k = 0; k < nOut; ++k) {
        const NodeId out = d.add_output();
        if (k < nExtra) {
            const NodeId a = d.add_spider(NodeKind::Z, Angle::symbol(k));
            d.add_edge(x, a);
            d.add_edge(a, out);
        } else {
            d.add_edge(x, out);
        }
    }
    return s;
}

int copy_then_fuse_reward(const CopyScenario& s) {
    RewriteOutcome o     = copy(s.diagram, s.edge);
    int            total = o.reward;
    Diagram        cur   = std::move(o.diagram);
    for (;;) {
        std::optional<Action> fuse;
        for (const Action& a: action_mask(cur).actions()) {
            const auto* e = std::get_if<EdgeAction>(&a);
            if (e != nullptr && e->kind == EdgeActionKind::Fuse) {
                fuse = a;
                break;
            }
        }
        if (!fuse) {
            return total;
        }
        o = zx::apply(cur, *fuse);
        total += o.reward;
        cur = std::move(o.diagram);
    }
}

double copy_probability(const nn::Network& policy, const CopyScenario& s, int stepsLeft) {
    const Observation     obs  = observe(s.diagram, stepsLeft);
    const Eigen::VectorXd logp = nn::masked_log_softmax(nn::policy_logits(policy, obs), obs.mask);
    const Eigen::VectorXd p    = nn::masked_probs(logp, obs.mask);
    return p[index_of(obs, EdgeAction{s.edge, EdgeActionKind::Copy})];
}

// --- rule verification ------------------------------------------------------------------------

namespace {

std::string kind_name(const Action& a) {
    if (const auto* n = std::get_if<NodeAction>(&a)) {
        return std::string(zx::to_string(n->kind));
    }
    if (const auto* e = std::get_if<EdgeAction>(&a)) {
        return std::string(zx::to_string(e->kind));
    }
    return "Stop";
}

} // namespace

VerifyReport verify_rules(const std::vector<Diagram>& corpus, std::uint64_t seed, int workers, double tol) {
    std::vector<VerifyReport> parts(corpus.size());
    parallel_for(corpus.size(), workers, [&](std::size_t i) {
        VerifyReport& r   = parts[i];
        Rng           rng = make_rng(seed, "verify", i);
        r.diagrams        = 1;
        // both assignments are drawn up front so every action sees the same pair
        const std::array<SymbolValues, 2> values{random_assignment(corpus[i], rng), random_assignment(corpus[i], rng)};
        std::array<Matrix, 2>             src;
        try {
            for (std::size_t t = 0; t < 2; ++t) {
                src[t] = semantics(corpus[i], values[t]);
            }
        } catch (const OracleLimitError&) {
            r.skipped = 1;
            return;
        }
        const std::array<bool, 2> live{max_abs(src[0]) > 1e-10, max_abs(src[1]) > 1e-10};
        for (const Action& a: action_mask(corpus[i]).actions()) {
            if (std::holds_alternative<StopAction>(a)) {
                continue;
            }
            const Diagram after = zx::apply(corpus[i], a).diagram;
            ++r.checked;
            ++r.per_kind[kind_name(a)];
            if (!live[0] && !live[1]) {
                ++r.vanishing;
                continue;
            }
            double dev = 0.0;
            for (std::size_t t = 0; t < 2; ++t) {
                if (live[t]) {
                    dev = std::max(dev, scalar_deviation(src[t], semantics(after, values[t])));
                }
            }
            r.max_deviation = std::max(r.max_deviation, dev);
            if (!(dev < tol)) {
                r.violations.push_back({i, describe(a), dev});
            }
        }
    });
    VerifyReport total;
    for (VerifyReport& p: parts) {
        total.diagrams += p.diagrams;
        total.checked += p.checked;
        total.vanishing += p.vanishing;
        total.skipped += p.skipped;
        total.max_deviation = std::max(total.max_deviation, p.max_deviation);
        for (Violation& v: p.violations) {
            total.violations.push_back(std::move(v));
        }
        for (const auto& [k, c]: p.per_kind) {
            total.per_kind[k] += c;
        }
    }
    return total;
}

nlohmann::json to_json(const VerifyReport& r) {
    nlohmann::json j;
    j["diagrams"]      = r.diagrams;
    j["checked"]       = r.checked;
    j["vanishing"]     = r.vanishing;
    j["skipped"]       = r.skipped;
    j["max_deviation"] = r.max_deviation;
    j["violations"]    = r.violations.size();
    j["per_kind"]      = r.per_kind;
    nlohmann::json list = nlohmann::json::array();
    for (const Violation& v: r.violations) {
        list.push_back({{"diagram", v.diagram}, {"action", v.action}, {"deviation", v.deviation}});
    }
    j["violation_list"] = std::move(list);
    return j;
}

} // namespace zx::analysis
