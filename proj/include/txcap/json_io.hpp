// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/chain.hpp>
#include <txcap/sigma.hpp>
#include <txcap/txsea.hpp>

#include <json.hpp>

/// Canonical JSON forms. Byte fields are lowercase 0x-hex; 256-bit amounts are
/// decimal strings; 64-bit counters are plain numbers (strings are accepted on
/// input). Decoders reject unknown keys with Error{"InvalidJson"}.
namespace txcap::json
{
using nlohmann::json;

/// Throws Error{"InvalidJson"} naming the first key not in `allowed`.
void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what);

uint64_t get_u64(const json& j, std::string_view key, std::optional<uint64_t> fallback = std::nullopt);
u256 get_u256(const json& j, std::string_view key, std::optional<u256> fallback = std::nullopt);
u256 as_u256(const json& v);
uint64_t as_u64(const json& v);

json to_json(const Transaction& tx);
/// `function` may be 0x-hex (4 bytes) or a function name, hashed to a selector.
/// The hash is recomputed when absent; a supplied hash must match.
Transaction transaction_from_json(const json& j);

json to_json(const Block& b);
Block block_from_json(const json& j);

json to_json(const Receipt& r);
json to_json(const evm::TraceFrame& f);
evm::TraceFrame frame_from_json(const json& j);
json to_json(const evm::ExecutionTrace& t);
evm::ExecutionTrace trace_from_json(const json& j);

json to_json(const ChainParams& p);
ChainParams params_from_json(const json& j);
json to_json(const Genesis& g);
Genesis genesis_from_json(const json& j);

json to_json(const Account& a);

json to_json(const sigma::Classification& c);
json to_json(const sigma::OccurrenceReport& r);

json to_json(const txsea::ExpirationMap& m);

json error_json(const Error& e);

}  // namespace txcap::json
