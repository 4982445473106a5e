// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/chain.hpp>
#include <txcap/txsea.hpp>

#include <functional>

namespace txcap::config
{
/// Operator settings. Precedence: command-line flags, then TXCAP_* environment
/// variables, then the config file, then these defaults.
struct Config
{
    /// Genesis JSON; empty means the built-in genesis (two funded accounts).
    std::string genesis;
    /// Scenario JSON for `sim run`; empty means the built-in eight-node scenario.
    std::string scenario;
    std::string listen = "127.0.0.1:8545";
    uint64_t ttl_blocks = 64;
    txsea::Mode txsea_mode = txsea::Mode::SenderAware;
    /// Overrides the genesis params when set.
    std::optional<uint64_t> base_fee;
    std::optional<uint64_t> block_quantum;
    /// Append-only TxSEA cache file; empty keeps the cache in memory.
    std::string cache;

    bool operator==(const Config&) const = default;
};

/// Keys accepted in the file, as TXCAP_<UPPER> variables and as overrides.
const std::vector<std::string>& keys();

/// Sets one key from its text form. Throws Error{"InvalidConfig"} for an
/// unknown key or a malformed value.
void set(Config& c, std::string_view key, std::string_view value);

/// JSON object with keys(); unknown keys are rejected.
Config from_json_text(std::string_view text, Config base = {});

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// file (if any) <- env <- overrides.
Config load(const std::string& file, const EnvLookup& env, const std::vector<std::pair<std::string, std::string>>& overrides);

/// Genesis from the config: the file, or the built-in one; base fee and block
/// quantum overrides applied on top.
Genesis load_genesis(const Config& c);
Genesis default_genesis();

std::string read_file(const std::string& path);
std::pair<std::string, uint16_t> split_listen(std::string_view listen);

}  // namespace txcap::config
