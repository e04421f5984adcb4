#include "zx/config.hpp"

#include "zx/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace zx {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::int64_t parse_int(std::string_view key, std::string_view v) {
    std::int64_t x   = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        // allow 5e5-style integers
        try {
            std::size_t  used = 0;
            const double d    = std::stod(std::string(v), &used);
            if (used == v.size() && d == static_cast<double>(static_cast<std::int64_t>(d))) {
                return static_cast<std::int64_t>(d);
            }
        } catch (const std::exception&) {
        }
        throw InputError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    }
    return x;
}

double parse_real(std::string_view key, std::string_view v) {
    try {
        std::size_t  used = 0;
        const double d    = std::stod(std::string(v), &used);
        if (used == v.size()) {
            return d;
        }
    } catch (const std::exception&) {
    }
    throw InputError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "off" || v == "no") {
        return false;
    }
    throw InputError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string format_real(double x) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
    return os.str();
}

struct Binding {
    ConfigKey                                                   key;
    std::function<void(RunConfig&, std::string_view)>           set;
    std::function<std::string(const RunConfig&)>                get;
};

template <class Field>
Binding bind(std::string name, std::string help, std::function<Field&(RunConfig&)> ref) {
    Binding b;
    if constexpr (std::is_same_v<Field, bool>) {
        b.key = {name, std::move(help), "bool"};
    } else if constexpr (std::is_integral_v<Field>) {
        b.key = {name, std::move(help), "int"};
    } else {
        b.key = {name, std::move(help), "real"};
    }
    b.set = [name, ref](RunConfig& c, std::string_view v) {
        if constexpr (std::is_same_v<Field, bool>) {
            ref(c) = parse_bool(name, v);
        } else if constexpr (std::is_integral_v<Field>) {
            const std::int64_t x = parse_int(name, v);
            if (x < std::numeric_limits<Field>::min() || x > std::numeric_limits<Field>::max()) {
                throw InputError(name + ": value out of range");
            }
            ref(c) = static_cast<Field>(x);
        } else {
            ref(c) = parse_real(name, v);
        }
    };
    b.get = [ref](const RunConfig& c) {
        Field& f = ref(const_cast<RunConfig&>(c));
        if constexpr (std::is_same_v<Field, bool>) {
            return std::string(f ? "true" : "false");
        } else if constexpr (std::is_integral_v<Field>) {
            return std::to_string(f);
        } else {
            return format_real(f);
        }
    };
    return b;
}

#define ZX_KEY(type, name, help, member) \
    bind<type>(name, help, [](RunConfig& c) -> type& { return c.member; })

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table{
        ZX_KEY(int, "n_env", "parallel environments", ppo.n_env),
        ZX_KEY(int, "n_max", "steps per environment per rollout", ppo.n_max),
        ZX_KEY(int, "n_minibatch", "transitions per minibatch", ppo.n_minibatch),
        ZX_KEY(int, "n_train", "maximum update epochs per rollout", ppo.n_train),
        ZX_KEY(double, "c_kl", "approximate-KL threshold for early stopping", ppo.c_kl),
        ZX_KEY(double, "clip", "initial PPO clip range", ppo.clip),
        ZX_KEY(double, "entropy", "initial entropy bonus coefficient", ppo.entropy),
        ZX_KEY(double, "c_absgrad", "per-component gradient clip", ppo.c_absgrad),
        ZX_KEY(double, "c_normgrad", "global gradient norm clip", ppo.c_normgrad),
        ZX_KEY(double, "gamma", "discount factor", ppo.gamma),
        ZX_KEY(double, "lambda", "GAE lambda", ppo.lambda),
        ZX_KEY(double, "lr", "ADAM learning rate", ppo.lr),
        ZX_KEY(double, "beta1", "ADAM first-moment decay", ppo.beta1),
        ZX_KEY(double, "beta2", "ADAM second-moment decay", ppo.beta2),
        ZX_KEY(double, "value_coef", "value loss coefficient", ppo.value_coef),
        ZX_KEY(std::int64_t, "total_steps", "environment steps of a training run", ppo.total_steps),
        ZX_KEY(int, "max_steps", "trajectory step budget", ppo.max_steps),
        ZX_KEY(int, "shard", "graphs per forward/backward shard", ppo.shard),
        ZX_KEY(int, "width", "hidden width of both networks", ppo.width),
        ZX_KEY(int, "layers", "message-passing layers", ppo.layers),
        ZX_KEY(bool, "stop_action", "offer the Stop action", ppo.flags.stop_action),
        ZX_KEY(bool, "stop_counter", "feed the stop counter to the policy head", ppo.flags.stop_counter),
        ZX_KEY(bool, "entropy_bonus", "add the entropy bonus", ppo.flags.entropy_bonus),
        ZX_KEY(bool, "entropy_annealing", "anneal the entropy coefficient to 0", ppo.flags.entropy_annealing),
        ZX_KEY(bool, "clip_annealing", "anneal the clip range to 0", ppo.flags.clip_annealing),
        ZX_KEY(bool, "kl_early_stop", "stop epochs once KL exceeds c_kl", ppo.flags.kl_early_stop),
        ZX_KEY(int, "n_init_min", "fewest initial spiders", sampler.n_init_min),
        ZX_KEY(int, "n_init_max", "most initial spiders", sampler.n_init_max),
        ZX_KEY(int, "io_min", "fewest inputs/outputs", sampler.io_min),
        ZX_KEY(int, "io_max", "most inputs/outputs", sampler.io_max),
        ZX_KEY(double, "hadamard_fraction_cap", "Hadamard count cap relative to spiders", sampler.hadamard_fraction_cap),
        ZX_KEY(double, "angle_downweight", "weight factor of the pi, pi/2 and alpha classes", sampler.angle_downweight),
        ZX_KEY(double, "n_neigh_min", "lowest expected spider degree", sampler.n_neigh_min),
        ZX_KEY(double, "n_neigh_max", "highest expected spider degree", sampler.n_neigh_max),
        ZX_KEY(double, "t_start", "annealing start temperature", anneal.t_start),
        ZX_KEY(double, "c_ann", "annealing decay rate", anneal.c_ann),
        ZX_KEY(int, "anneal_steps", "annealing step budget", anneal.max_steps),
    };
    return table;
}

#undef ZX_KEY

const Binding& find(std::string_view key) {
    for (const Binding& b: bindings()) {
        if (b.key.name == key) {
            return b;
        }
    }
    throw InputError("unknown config key '" + std::string(key) + "' (did you mean '" + nearest_key(key) + "'?)");
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0]           = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j]               = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag                 = up;
        }
    }
    return row[b.size()];
}

} // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const Binding& b: bindings()) {
            k.push_back(b.key);
        }
        return k;
    }();
    return keys;
}

std::string nearest_key(std::string_view name) {
    std::string best;
    std::size_t bestD = std::numeric_limits<std::size_t>::max();
    for (const Binding& b: bindings()) {
        const std::size_t d = edit_distance(name, b.key.name);
        if (d < bestD) {
            bestD = d;
            best  = b.key.name;
        }
    }
    return best;
}

void set_config(RunConfig& c, std::string_view key, std::string_view value) {
    find(key).set(c, trim(value));
}

std::string get_config(const RunConfig& c, std::string_view key) {
    return find(key).get(c);
}

void parse_config(RunConfig& c, std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string        line;
    int                lineNo = 0;
    while (std::getline(is, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw InputError("config line " + std::to_string(lineNo) + ": expected 'key = value'");
        }
        try {
            set_config(c, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
        } catch (const InputError& e) {
            throw InputError("config line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
}

void load_config(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    parse_config(c, ss.str());
}

std::string dump_config(const RunConfig& c) {
    std::string out;
    for (const Binding& b: bindings()) {
        out += b.key.name + " = " + b.get(c) + "\n";
    }
    return out;
}

} // namespace zx
