#include "zx/analysis.hpp"
#include "zx/config.hpp"
#include "zx/errors.hpp"
#include "zx/parallel.hpp"
#include "zx/ppo.hpp"
#include "zx/sampler.hpp"
#include "zx/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

using nlohmann::json;
using zx::InputError;

/// Options every subcommand shares.
struct Common {
    std::uint64_t seed    = 0;
    int           workers = zx::default_workers();
    std::string   config_path;
    std::string   out;
    /// Flag overrides, keyed by config name.
    std::map<std::string, std::string> overrides;
};

/// Adds --config and one flag per config key (--n_env, --clip, ...).
void add_config_flags(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "key = value config file");
    for (const zx::ConfigKey& k: zx::config_keys()) {
        app->add_option_function<std::string>(
               "--" + k.name, [&c, name = k.name](const std::string& v) { c.overrides[name] = v; },
               k.help + " (" + k.type + ")")
            ->group("Config");
    }
}

zx::RunConfig resolve(const Common& c) {
    zx::RunConfig cfg;
    if (!c.config_path.empty()) {
        zx::load_config(cfg, c.config_path);
    }
    for (const auto& [k, v]: c.overrides) {
        zx::set_config(cfg, k, v);
    }
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << text;
}

/// A single JSON document or JSON lines.
std::vector<zx::Diagram> read_diagrams(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const json        doc  = json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) {
        return {zx::from_json(doc)};
    }
    std::istringstream lines(text);
    return zx::read_jsonl(lines);
}

/// Corpus from --corpus files, or sampled with the config's sampler settings.
struct CorpusArgs {
    std::vector<std::string> files;
    std::size_t              n           = 1000;
    std::uint64_t            corpus_seed = 0;
    bool                     seed_given  = false;
};

void add_corpus_flags(CLI::App* app, CorpusArgs& a) {
    app->add_option("--corpus", a.files, "diagram files (JSON or JSON lines); sampled when absent");
    app->add_option("--n", a.n, "diagrams to sample when no corpus is given")->check(CLI::PositiveNumber);
    app->add_option("--corpus-seed", a.corpus_seed, "sampling seed (defaults to --seed)");
}

std::vector<zx::Diagram> corpus_of(const CorpusArgs& a, const zx::RunConfig& cfg, std::uint64_t seed,
                                   std::uint64_t& corpusSeed) {
    corpusSeed = a.seed_given ? a.corpus_seed : seed;
    if (a.files.empty()) {
        return zx::sample_corpus(cfg.sampler, a.n, corpusSeed);
    }
    std::vector<zx::Diagram> all;
    for (const std::string& f: a.files) {
        for (zx::Diagram& d: read_diagrams(f)) {
            all.push_back(std::move(d));
        }
    }
    return all;
}

zx::analysis::StrategySpec strategy_of(const std::string& name, const zx::RunConfig& cfg,
                                       const std::optional<zx::nn::Network>& policy, bool stopAction, bool argmax) {
    zx::analysis::StrategySpec s;
    s.kind        = zx::analysis::parse_strategy(name);
    s.max_steps   = cfg.ppo.max_steps;
    s.anneal      = cfg.anneal;
    s.stop_action = stopAction;
    s.argmax      = argmax;
    if (s.kind == zx::analysis::Strategy::Policy) {
        if (!policy) {
            throw InputError("--strategy policy needs --checkpoint");
        }
        s.policy = &*policy;
    }
    return s;
}

struct PolicyArgs {
    std::string checkpoint;
    bool        argmax = false;
};

/// Loads the policy and the Stop setting it was trained with.
std::optional<zx::nn::Network> load_policy(const PolicyArgs& p, bool& stopAction) {
    stopAction = true;
    if (p.checkpoint.empty()) {
        return std::nullopt;
    }
    stopAction = zx::nn::load_checkpoint(p.checkpoint).counter("env.stop_action", 1) != 0;
    return zx::ppo::load_policy(p.checkpoint);
}

/// Replays a run and returns the best diagram it reached.
zx::Diagram best_diagram(const zx::Diagram& start, const zx::RunResult& r) {
    zx::Diagram cur  = start;
    zx::Diagram best = start;
    for (const zx::Action& a: r.actions) {
        if (std::holds_alternative<zx::StopAction>(a)) {
            break;
        }
        cur = zx::apply(cur, a).diagram;
        if (!cur.in_unfuse_mode() && cur.num_interior() < best.num_interior()) {
            best = cur;
        }
    }
    return best;
}

/// Names the closest config flag for the first unrecognized `--flag`.
void suggest_flag(const CLI::App& app, int argc, char** argv) {
    const CLI::App* sub = nullptr;
    for (const CLI::App* s: app.get_subcommands()) {
        sub = s;
        for (const CLI::App* inner: s->get_subcommands()) {
            sub = inner;
        }
    }
    if (sub == nullptr) {
        return;
    }
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) != 0) {
            continue;
        }
        arg = arg.substr(0, arg.find('='));
        if (sub->get_option_no_throw(arg) == nullptr) {
            std::cerr << "unknown flag " << arg << " (did you mean --" << zx::nearest_key(arg.substr(2)) << "?)\n";
            return;
        }
    }
}

int run(int argc, char** argv) {
    CLI::App app{"ZX-diagram rewriting: sampling, reinforcement learning and baselines"};
    app.require_subcommand(1);

    Common     common;
    CorpusArgs corpus;
    PolicyArgs policyArgs;

    auto addSeed = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "root seed of every random stream");
        sub->add_option("--workers", common.workers, "parallel diagram workers")->check(CLI::PositiveNumber);
        add_config_flags(sub, common);
    };

    // sample
    CLI::App* sample = app.add_subcommand("sample", "write a sampled corpus as JSON lines");
    std::size_t sampleN = 1000;
    sample->add_option("--n", sampleN, "number of diagrams")->check(CLI::PositiveNumber);
    sample->add_option("-o,--out", common.out, "output file (stdout when absent)");
    addSeed(sample);

    // train
    CLI::App*    train = app.add_subcommand("train", "PPO training");
    zx::ppo::TrainOptions trainOpt;
    bool                  noResume = false;
    train->add_option("--checkpoint", trainOpt.checkpoint_path, "checkpoint file (resumed when present)")->required();
    train->add_option("--metrics", trainOpt.metrics_path, "JSON lines metrics file");
    train->add_option("--checkpoint-every", trainOpt.checkpoint_every, "updates between checkpoints")
        ->check(CLI::PositiveNumber);
    train->add_flag("--no-resume", noResume, "start fresh even if the checkpoint exists");
    train->add_flag("--quiet", trainOpt.quiet, "no progress lines on stderr");
    addSeed(train);

    // optimize
    CLI::App*                optimize = app.add_subcommand("optimize", "optimize diagram files");
    std::string              strategyName = "greedy";
    std::vector<std::string> inputs;
    optimize->add_option("inputs", inputs, "diagram files (JSON or JSON lines)")->required();
    optimize->add_option("--strategy", strategyName, "greedy, anneal, random or policy");
    optimize->add_option("--checkpoint", policyArgs.checkpoint, "trained checkpoint for --strategy policy");
    optimize->add_flag("--argmax", policyArgs.argmax, "policy takes its most likely action");
    optimize->add_option("-o,--out", common.out, "JSON lines with the best diagram of each input");
    addSeed(optimize);

    // eval
    CLI::App*   eval = app.add_subcommand("eval", "summary report of a strategy over a corpus");
    std::string csvPath;
    bool        perDiagram = true;
    eval->add_option("--strategy", strategyName, "greedy, anneal, random or policy");
    eval->add_option("--checkpoint", policyArgs.checkpoint, "trained checkpoint for --strategy policy");
    eval->add_flag("--argmax", policyArgs.argmax, "policy takes its most likely action");
    eval->add_option("-o,--out", common.out, "JSON report (stdout when absent)");
    eval->add_option("--csv", csvPath, "per-diagram CSV");
    eval->add_flag("!--summary-only", perDiagram, "omit per-diagram entries");
    add_corpus_flags(eval, corpus);
    addSeed(eval);

    // verify
    CLI::App* verify = app.add_subcommand("verify", "check every rule against the tensor oracle");
    double    tol    = 1e-9;
    verify->add_option("--tol", tol, "largest accepted deviation");
    verify->add_option("-o,--out", common.out, "JSON report");
    add_corpus_flags(verify, corpus);
    addSeed(verify);

    // analyze
    CLI::App* analyze  = app.add_subcommand("analyze", "probes of a trained policy");
    analyze->require_subcommand(1);
    CLI::App* locality = analyze->add_subcommand("locality", "logit change when the input is cut to k hops");
    int       maxLayer = 8;
    locality->add_option("--checkpoint", policyArgs.checkpoint, "trained checkpoint")->required();
    locality->add_option("--max-layer", maxLayer, "largest neighborhood radius")->check(CLI::PositiveNumber);
    locality->add_option("-o,--out", common.out, "JSON report");
    add_corpus_flags(locality, corpus);
    addSeed(locality);
    CLI::App* copyCmd = analyze->add_subcommand("copy", "Copy-then-Fuse rewards and policy Copy probabilities");
    int       maxOut  = 6;
    copyCmd->add_option("--checkpoint", policyArgs.checkpoint, "trained checkpoint (probabilities omitted without)");
    copyCmd->add_option("--max-out", maxOut, "largest number of output legs")->check(CLI::PositiveNumber);
    copyCmd->add_option("-o,--out", common.out, "JSON report");
    addSeed(copyCmd);

    for (CLI::App* sub: {eval, verify, locality}) {
        sub->callback([&corpus, sub] { corpus.seed_given = sub->count("--corpus-seed") > 0; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ExtrasError& e) {
        app.exit(e);
        suggest_flag(app, argc, argv);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const zx::RunConfig cfg = resolve(common);
    std::uint64_t       corpusSeed = 0;

    if (sample->parsed()) {
        std::ostringstream os;
        zx::write_jsonl(os, zx::sample_corpus(cfg.sampler, sampleN, common.seed));
        write_text(common.out, os.str());
        return 0;
    }

    if (train->parsed()) {
        trainOpt.seed   = common.seed;
        trainOpt.resume = !noResume;
        write_text(trainOpt.checkpoint_path + ".config", "# seed = " + std::to_string(common.seed) + "\n" +
                                                            zx::dump_config(cfg));
        const zx::ppo::TrainSummary s = zx::ppo::train(cfg.ppo, cfg.sampler, trainOpt);
        std::cout << json{{"steps", s.steps}, {"updates", s.updates}, {"last_mean_cum_reward", s.last_mean_cum_reward}}
                         .dump()
                  << "\n";
        return 0;
    }

    bool       stopAction = cfg.ppo.flags.stop_action;
    const auto policy     = load_policy(policyArgs, stopAction);

    if (optimize->parsed()) {
        std::vector<zx::Diagram> diagrams;
        for (const std::string& f: inputs) {
            for (zx::Diagram& d: read_diagrams(f)) {
                diagrams.push_back(std::move(d));
            }
        }
        const auto spec    = strategy_of(strategyName, cfg, policy, stopAction, policyArgs.argmax);
        const auto results = zx::analysis::run_strategy(spec, diagrams, common.seed, common.workers);
        std::ostringstream os;
        for (std::size_t i = 0; i < diagrams.size(); ++i) {
            json j       = zx::analysis::to_json(results[i], true);
            j["index"]   = i;
            j["diagram"] = zx::to_json(best_diagram(diagrams[i], results[i]));
            os << j.dump() << "\n";
        }
        write_text(common.out, os.str());
        return 0;
    }

    if (eval->parsed()) {
        const auto diagrams = corpus_of(corpus, cfg, common.seed, corpusSeed);
        const auto spec     = strategy_of(strategyName, cfg, policy, stopAction, policyArgs.argmax);
        const auto summary  = zx::analysis::summarize(strategyName, corpusSeed, common.seed,
                                                      zx::analysis::run_strategy(spec, diagrams, common.seed,
                                                                                 common.workers));
        write_text(common.out, zx::analysis::to_json(summary, perDiagram).dump(2) + "\n");
        if (!csvPath.empty()) {
            write_text(csvPath, zx::analysis::to_csv(summary));
        }
        if (!common.out.empty()) {
            std::cout << "mean best nodes " << summary.mean_best_nodes << ", mean best alpha "
                      << summary.mean_best_alpha << ", mean cumulative reward " << summary.mean_cum_reward << "\n";
        }
        return 0;
    }

    if (verify->parsed()) {
        const auto diagrams = corpus_of(corpus, cfg, common.seed, corpusSeed);
        const auto report   = zx::analysis::verify_rules(diagrams, common.seed, common.workers, tol);
        if (!common.out.empty()) {
            write_text(common.out, zx::analysis::to_json(report).dump(2) + "\n");
        }
        std::cout << report.checked << " rewrites checked on " << report.diagrams << " diagrams, "
                  << report.violations.size() << " violations, max deviation " << report.max_deviation << "\n";
        return report.violations.empty() ? 0 : 1;
    }

    if (locality->parsed()) {
        const auto diagrams = corpus_of(corpus, cfg, common.seed, corpusSeed);
        const auto report   = zx::analysis::locality_report(*policy, diagrams, common.seed, maxLayer, common.workers);
        write_text(common.out, zx::analysis::to_json(report).dump(2) + "\n");
        return 0;
    }

    if (copyCmd->parsed()) {
        json rows = json::array();
        for (int nOut = 1; nOut <= maxOut; ++nOut) {
            for (int nExtra = 0; nExtra <= nOut; ++nExtra) {
                const auto s   = zx::analysis::copy_scenario(nOut, nExtra);
                json       row = {{"n_out", nOut}, {"n_extra", nExtra},
                                  {"cumulative_reward", zx::analysis::copy_then_fuse_reward(s)}};
                if (policy) {
                    row["copy_probability"] = zx::analysis::copy_probability(*policy, s);
                }
                rows.push_back(row);
            }
        }
        write_text(common.out, rows.dump(2) + "\n");
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const zx::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const zx::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const zx::OracleLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
