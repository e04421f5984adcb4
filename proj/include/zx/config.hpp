#pragma once

#include "zx/baselines.hpp"
#include "zx/ppo.hpp"
#include "zx/sampler.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace zx {

/// Every tunable parameter of a run, addressable by key.
struct RunConfig {
    ppo::PPOConfig ppo;
    SamplerConfig  sampler;
    AnnealConfig   anneal;
};

struct ConfigKey {
    std::string name;
    std::string help;
    /// "int", "real" or "bool".
    std::string type;
};

/// All keys, in the order they are written by dump_config.
const std::vector<ConfigKey>& config_keys();

/// Closest key by edit distance.
std::string nearest_key(std::string_view name);

/// Throws InputError for unknown keys (naming the nearest valid one) and unparsable values.
void        set_config(RunConfig& c, std::string_view key, std::string_view value);
std::string get_config(const RunConfig& c, std::string_view key);

/// Text format: one `key = value` per line; `#` starts a comment; blank lines ignored.
/// Errors name the line number.
void        parse_config(RunConfig& c, std::string_view text);
void        load_config(RunConfig& c, const std::string& path);
/// Round-trips through parse_config.
std::string dump_config(const RunConfig& c);

} // namespace zx
