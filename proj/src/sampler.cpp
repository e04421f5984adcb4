#include "zx/sampler.hpp"

#include "zx/errors.hpp"
#include "zx/rules.hpp"

#include <array>
#include <cmath>

namespace zx {

void SamplerConfig::validate() const {
    if (n_init_min < 1 || n_init_max < n_init_min) {
        throw InputError("sampler: invalid spider range");
    }
    if (io_min < 0 || io_max < io_min || io_max < 1) {
        throw InputError("sampler: invalid boundary range");
    }
    if (hadamard_fraction_cap < 0.0 || hadamard_fraction_cap > 1.0) {
        throw InputError("sampler: hadamard_fraction_cap must lie in [0, 1]");
    }
    if (angle_downweight < 0.0 || n_neigh_min < 0.0 || n_neigh_max < n_neigh_min) {
        throw InputError("sampler: invalid angle weight or neighbor range");
    }
    if (max_retries < 1) {
        throw InputError("sampler: max_retries must be positive");
    }
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace

Diagram sample_raw(const SamplerConfig& cfg, Rng& rng) {
    cfg.validate();
    Diagram d;

    const int nIn   = uniform_int(rng, cfg.io_min, cfg.io_max);
    const int nOut  = uniform_int(rng, cfg.io_min, cfg.io_max);
    const int nInit = uniform_int(rng, cfg.n_init_min, cfg.n_init_max);
    const int nHad  = uniform_int(rng, 0, static_cast<int>(std::floor(cfg.hadamard_fraction_cap * nInit)));

    // Class order: 0, pi, pi/2, alpha.
    std::array<double, 4> weights{};
    for (std::size_t k = 0; k < weights.size(); ++k) {
        weights[k] = uniform_real(rng, 0.0, 1.0) * (k == 0 ? 1.0 : cfg.angle_downweight);
    }
    std::discrete_distribution<int> angleClass(weights.begin(), weights.end());
    std::bernoulli_distribution     coin(0.5);

    std::vector<NodeId> spiders;
    SymbolId            nextSymbol = 0;
    for (int i = 0; i < nInit; ++i) {
        Angle a;
        switch (angleClass(rng)) {
        case 1: a = Angle::pi(); break;
        case 2: a = Angle::halfPi(); break;
        case 3: a = Angle::symbol(nextSymbol++); break;
        default: break;
        }
        spiders.push_back(d.add_node(coin(rng) ? NodeKind::Z : NodeKind::X, a));
    }
    std::vector<NodeId> pool = spiders;
    for (int i = 0; i < nHad; ++i) {
        pool.push_back(d.add_node(NodeKind::Hadamard));
    }

    const double nNeigh = cfg.n_neigh_continuous
                                  ? uniform_real(rng, cfg.n_neigh_min, cfg.n_neigh_max)
                                  : static_cast<double>(uniform_int(rng, static_cast<int>(std::ceil(cfg.n_neigh_min)),
                                                                    static_cast<int>(std::floor(cfg.n_neigh_max))));
    const auto   nTotal = static_cast<double>(pool.size());
    const double pEdge  = nTotal > 1.0 ? std::min(1.0, nNeigh / (nTotal - 1.0)) : 0.0;
    std::bernoulli_distribution edge(pEdge);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            if (edge(rng)) {
                const bool hi = d.kind(pool[i]) == NodeKind::Hadamard && d.degree(pool[i]) >= 2;
                const bool hj = d.kind(pool[j]) == NodeKind::Hadamard && d.degree(pool[j]) >= 2;
                if (!hi && !hj) {
                    d.add_edge(pool[i], pool[j]);
                }
            }
        }
    }

    auto randomSpider = [&]() { return spiders[static_cast<std::size_t>(uniform_int(rng, 0, nInit - 1))]; };
    for (std::size_t k = static_cast<std::size_t>(nInit); k < pool.size(); ++k) {
        const NodeId h = pool[k];
        while (d.degree(h) < 2) {
            const NodeId s = randomSpider();
            if (!d.connected(h, s) || nInit == 1) {
                d.add_edge(h, s);
            }
        }
    }

    for (int i = 0; i < nIn; ++i) {
        d.add_edge(d.add_input(), randomSpider());
    }
    for (int i = 0; i < nOut; ++i) {
        d.add_edge(d.add_output(), randomSpider());
    }
    return d;
}

Diagram sample_diagram(const SamplerConfig& cfg, Rng& rng) {
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        Diagram d = sample_raw(cfg, rng);
        auto_simplify(d);
        if (d.num_spiders() > 0) {
            return d;
        }
    }
    throw InputError("sampler: no diagram with spiders after max_retries draws");
}

std::vector<Diagram> sample_corpus(const SamplerConfig& cfg, std::size_t n, std::uint64_t seed) {
    std::vector<Diagram> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, "sampler", i);
        out.push_back(sample_diagram(cfg, rng));
    }
    return out;
}

} // namespace zx
