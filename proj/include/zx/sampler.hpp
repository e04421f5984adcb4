#pragma once

#include "zx/diagram.hpp"
#include "zx/rng.hpp"

#include <cstdint>
#include <vector>

namespace zx {

struct SamplerConfig {
    int    n_init_min            = 10;
    int    n_init_max            = 15;
    int    io_min                = 1;
    int    io_max                = 3;
    double hadamard_fraction_cap = 0.2;
    /// Multiplier applied to the pi, pi/2 and alpha class weights.
    double angle_downweight = 0.4;
    double n_neigh_min      = 2.0;
    double n_neigh_max      = 4.0;
    /// Draw the expected neighbor count from a continuous interval instead of the integers.
    bool   n_neigh_continuous = true;
    int    max_retries        = 1000;

    /// Throws InputError on empty ranges or out-of-range fractions.
    void validate() const;

    static SamplerConfig with_spiders(int lo, int hi) {
        SamplerConfig c;
        c.n_init_min = lo;
        c.n_init_max = hi;
        return c;
    }
};

/// One draw before automatic simplification: spiders and Hadamards wired at random, boundary
/// nodes attached, Hadamard degrees repaired. Exposed so the raw distribution can be tested.
Diagram sample_raw(const SamplerConfig& cfg, Rng& rng);

/// Simplified draw with at least one spider.
Diagram sample_diagram(const SamplerConfig& cfg, Rng& rng);

/// `n` diagrams; item i uses its own stream derived from (seed, "sampler", i).
std::vector<Diagram> sample_corpus(const SamplerConfig& cfg, std::size_t n, std::uint64_t seed);

} // namespace zx
