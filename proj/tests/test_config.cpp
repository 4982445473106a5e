// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/config.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

namespace txcap
{
namespace
{
using config::Config;

config::EnvLookup env_of(std::map<std::string, std::string> vars)
{
    return [vars](const std::string& k) -> std::optional<std::string> {
        const auto it = vars.find(k);
        return it == vars.end() ? std::nullopt : std::optional{it->second};
    };
}

std::string temp_file(const std::string& name, const std::string& text)
{
    const auto p = std::filesystem::temp_directory_path() / (name + "-" + std::to_string(::getpid()));
    std::ofstream{p} << text;
    return p.string();
}

TEST(Config, Defaults)
{
    const Config c;
    EXPECT_EQ(c.listen, "127.0.0.1:8545");
    EXPECT_EQ(c.ttl_blocks, 64u);
    EXPECT_EQ(c.txsea_mode, txsea::Mode::SenderAware);
    EXPECT_EQ(config::load("", env_of({}), {}), c);
    const Genesis g = config::load_genesis(c);
    EXPECT_EQ(g.params.base_fee, 1'000'000'000u);
}

TEST(Config, FileThenEnvThenFlags)
{
    const auto file = temp_file("txcap-config",
                                R"({"ttl_blocks": 10, "listen": "0.0.0.0:9000", "txsea_mode": "strict-52"})");
    const Config from_file = config::load(file, env_of({}), {});
    EXPECT_EQ(from_file.ttl_blocks, 10u);
    EXPECT_EQ(from_file.listen, "0.0.0.0:9000");
    EXPECT_EQ(from_file.txsea_mode, txsea::Mode::Strict52);

    const Config env = config::load(file, env_of({{"TXCAP_TTL_BLOCKS", "20"}}), {});
    EXPECT_EQ(env.ttl_blocks, 20u);
    EXPECT_EQ(env.listen, "0.0.0.0:9000");

    const Config flags = config::load(file, env_of({{"TXCAP_TTL_BLOCKS", "20"}}), {{"ttl_blocks", "30"}});
    EXPECT_EQ(flags.ttl_blocks, 30u);
    std::filesystem::remove(file);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(config::from_json_text(R"({"ttl": 3})"), Error);
    EXPECT_THROW(config::from_json_text("[1]"), Error);
    EXPECT_THROW(config::from_json_text("{"), Error);
    Config c;
    EXPECT_THROW(config::set(c, "colour", "blue"), Error);
    EXPECT_THROW(config::set(c, "ttl_blocks", "-1"), Error);
    EXPECT_THROW(config::set(c, "ttl_blocks", "ten"), Error);
    EXPECT_THROW(config::set(c, "txsea_mode", "loose"), Error);
    EXPECT_THROW(config::load("/nonexistent/txcap.json", env_of({}), {}), Error);
    for (const auto& k : config::keys())
        EXPECT_FALSE(k.empty());
}

TEST(Config, GenesisOverrides)
{
    Config c;
    c.base_fee = 0;
    c.block_quantum = 3;
    const Genesis g = config::load_genesis(c);
    EXPECT_EQ(g.params.base_fee, 0u);
    EXPECT_EQ(g.params.block_time_quantum, 3u);
    c.genesis = temp_file("txcap-genesis", "{oops");
    try
    {
        config::load_genesis(c);
        ADD_FAILURE();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), "InvalidJson");
    }
    std::filesystem::remove(c.genesis);
}

TEST(Config, SplitListen)
{
    EXPECT_EQ(config::split_listen("127.0.0.1:8545"), (std::pair<std::string, uint16_t>{"127.0.0.1", 8545}));
    EXPECT_THROW(config::split_listen("localhost"), Error);
    EXPECT_THROW(config::split_listen("h:99999"), Error);
}

}  // namespace
}  // namespace txcap
