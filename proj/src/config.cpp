// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/config.hpp>
#include <txcap/gossip.hpp>
#include <txcap/json_io.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace txcap::config
{
namespace
{
[[noreturn]] void bad(std::string detail)
{
    throw Error{"InvalidConfig", std::move(detail)};
}

uint64_t parse_u64(std::string_view key, std::string_view v)
{
    uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
        bad(std::string{key} + ": expected an unsigned integer, got '" + std::string{v} + "'");
    return out;
}
}  // namespace

const std::vector<std::string>& keys()
{
    static const std::vector<std::string> k = {"genesis",    "scenario",      "listen", "ttl_blocks",
                                               "txsea_mode", "base_fee",      "block_quantum", "cache"};
    return k;
}

void set(Config& c, std::string_view key, std::string_view value)
{
    if (key == "genesis")
        c.genesis = value;
    else if (key == "scenario")
        c.scenario = value;
    else if (key == "listen")
    {
        split_listen(value);
        c.listen = value;
    }
    else if (key == "ttl_blocks")
    {
        c.ttl_blocks = parse_u64(key, value);
        if (c.ttl_blocks == 0)
            bad("ttl_blocks must be at least 1");
    }
    else if (key == "txsea_mode")
    {
        try
        {
            c.txsea_mode = txsea::mode_from_string(value);
        }
        catch (const Error& e)
        {
            bad("txsea_mode: " + e.detail());
        }
    }
    else if (key == "base_fee")
        c.base_fee = parse_u64(key, value);
    else if (key == "block_quantum")
    {
        c.block_quantum = parse_u64(key, value);
        if (*c.block_quantum == 0)
            bad("block_quantum must be at least 1");
    }
    else if (key == "cache")
        c.cache = value;
    else
        bad("unknown key '" + std::string{key} + "'");
}

Config from_json_text(std::string_view text, Config base)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception& e)
    {
        bad(std::string{"config is not valid JSON: "} + e.what());
    }
    if (!j.is_object())
        bad("config must be a JSON object");
    for (const auto& [k, v] : j.items())
    {
        if (v.is_string())
            set(base, k, v.get<std::string>());
        else if (v.is_number_unsigned())
            set(base, k, std::to_string(v.get<uint64_t>()));
        else
            bad(k + ": expected a string or an unsigned integer");
    }
    return base;
}

EnvLookup process_env()
{
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str()))
            return std::string{v};
        return std::nullopt;
    };
}

Config load(const std::string& file, const EnvLookup& env,
            const std::vector<std::pair<std::string, std::string>>& overrides)
{
    Config c;
    if (!file.empty())
        c = from_json_text(read_file(file), c);
    if (env)
        for (const auto& k : keys())
        {
            std::string name = "TXCAP_";
            for (char ch : k)
                name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            if (const auto v = env(name))
                set(c, k, *v);
        }
    for (const auto& [k, v] : overrides)
        set(c, k, v);
    return c;
}

Genesis default_genesis()
{
    return gossip::default_scenario(false).genesis;
}

Genesis load_genesis(const Config& c)
{
    Genesis g;
    if (c.genesis.empty())
        g = default_genesis();
    else
    {
        const std::string text = read_file(c.genesis);
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error{"InvalidJson", c.genesis + ": " + e.what()};
        }
        g = json::genesis_from_json(j);
    }
    if (c.base_fee)
        g.params.base_fee = *c.base_fee;
    if (c.block_quantum)
        g.params.block_time_quantum = *c.block_quantum;
    return g;
}

std::string read_file(const std::string& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw Error{"IoError", "cannot read '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::pair<std::string, uint16_t> split_listen(std::string_view listen)
{
    const auto colon = listen.rfind(':');
    if (colon == std::string_view::npos || colon == 0)
        bad("listen must be host:port, got '" + std::string{listen} + "'");
    const uint64_t port = parse_u64("listen port", listen.substr(colon + 1));
    if (port > 65535)
        bad("listen port out of range");
    return {std::string{listen.substr(0, colon)}, static_cast<uint16_t>(port)};
}

}  // namespace txcap::config
