#include "zx/config.hpp"
#include "zx/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace zx {
namespace {

TEST(ConfigFile, DefaultsMirrorTrainingTable) {
    const RunConfig c;
    EXPECT_EQ(get_config(c, "n_env"), "90");
    EXPECT_EQ(get_config(c, "n_max"), "1000");
    EXPECT_EQ(get_config(c, "n_minibatch"), "3000");
    EXPECT_EQ(get_config(c, "c_kl"), "0.01");
    EXPECT_EQ(get_config(c, "lr"), "0.00029999999999999997");
    EXPECT_EQ(get_config(c, "kl_early_stop"), "true");
}

TEST(ConfigFile, ParsesTextWithCommentsAndScientificIntegers) {
    RunConfig c;
    parse_config(c, "# smoke run\n n_env = 32\nclip=0.1  # tighter\n\ntotal_steps = 5e5\nentropy_bonus = off\n");
    EXPECT_EQ(c.ppo.n_env, 32);
    EXPECT_EQ(c.ppo.clip, 0.1);
    EXPECT_EQ(c.ppo.total_steps, 500000);
    EXPECT_FALSE(c.ppo.flags.entropy_bonus);
}

TEST(ConfigFile, UnknownKeySuggestsNearest) {
    RunConfig c;
    EXPECT_EQ(nearest_key("n_envs"), "n_env");
    EXPECT_EQ(nearest_key("gama"), "gamma");
    try {
        parse_config(c, "n_env = 4\nminibatch = 10\n");
        FAIL() << "accepted an unknown key";
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("n_minibatch"), std::string::npos) << msg;
    }
}

TEST(ConfigFile, RejectsBadValues) {
    RunConfig c;
    EXPECT_THROW(set_config(c, "n_env", "ten"), InputError);
    EXPECT_THROW(set_config(c, "n_env", "2.5"), InputError);
    EXPECT_THROW(set_config(c, "gamma", "0.9x"), InputError);
    EXPECT_THROW(set_config(c, "stop_action", "maybe"), InputError);
    EXPECT_THROW(parse_config(c, "n_env 4\n"), InputError);
}

TEST(ConfigFile, DumpRoundTrips) {
    RunConfig a;
    parse_config(a, "gamma = 0.95\nn_init_min = 5\nn_init_max = 8\nt_start = 0.25\nclip_annealing = false\n");
    RunConfig b;
    parse_config(b, dump_config(a));
    EXPECT_EQ(dump_config(a), dump_config(b));
    EXPECT_EQ(b.sampler.n_init_max, 8);
    EXPECT_EQ(b.anneal.t_start, 0.25);
    const std::string text = dump_config(a);
    EXPECT_EQ(config_keys().size(), static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')));
}

} // namespace
} // namespace zx
