// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/types.hpp>

#include <map>
#include <memory>

namespace txcap
{
using Selector = std::array<uint8_t, 4>;

/// Flat gas model: one fixed cost per executed opcode plus an intrinsic charge.
struct GasSchedule
{
    uint64_t intrinsic = 21'000;
    uint64_t per_opcode = 1;
    /// Optional per-opcode overrides keyed by opcode byte.
    std::map<uint8_t, uint64_t> overrides;

    uint64_t cost(uint8_t opcode) const
    {
        const auto it = overrides.find(opcode);
        return it == overrides.end() ? per_opcode : it->second;
    }

    bool operator==(const GasSchedule&) const = default;
};

/// Lowest gas price observed on Mainnet shortly after the London fork (wei/gas).
inline constexpr uint64_t kObservedPostLondonFloor = 1'423'420'054ULL;

struct ChainParams
{
    uint64_t gas_limit = 30'000'000;
    uint64_t base_fee = 1'000'000'000;
    uint64_t block_time_quantum = 12;
    uint64_t difficulty = 1;
    int max_call_depth = 64;
    GasSchedule gas;

    bool operator==(const ChainParams&) const = default;
};

struct Transaction
{
    uint64_t nonce = 0;
    uint64_t gas_price = 0;
    uint64_t gas_offer = 0;
    Address sender;
    /// nullopt marks contract creation.
    std::optional<Address> recipient;
    u256 value = 0;
    std::optional<Selector> function_selector;
    Bytes args;
    std::optional<uint64_t> block_included;
    Hash32 hash;

    bool is_create() const noexcept { return !recipient.has_value(); }

    /// selector ‖ args for calls; the deploy envelope for creations.
    Bytes calldata() const;

    /// Digest over every field except block_included and hash.
    Hash32 compute_hash() const;

    /// Recomputes `hash`; call after editing any hashed field.
    Transaction& seal()
    {
        hash = compute_hash();
        return *this;
    }

    bool operator==(const Transaction&) const = default;
};

struct Block
{
    uint64_t number = 0;
    Hash32 parent_hash;
    uint64_t gas_limit = 0;
    uint64_t gas_used = 0;
    uint64_t difficulty = 1;
    uint64_t timestamp = 0;
    Address coinbase;
    uint64_t base_fee = 0;
    std::vector<Transaction> transactions;

    Hash32 hash() const;

    bool operator==(const Block&) const = default;
};

struct Account
{
    u256 balance = 0;
    uint64_t nonce = 0;
    Bytes code;
    /// Zero-valued slots are never stored.
    std::map<u256, u256> storage;

    bool is_eoa() const noexcept { return code.empty(); }

    bool operator==(const Account&) const = default;
};

/// The blockchain state σ: accounts plus the head block and recent block hashes.
struct WorldState
{
    std::map<Address, Account> accounts;
    Block head;
    /// Hash of every canonical block, indexed by number.
    std::vector<Hash32> block_hashes;
    ChainParams params;

    const Account* find(const Address& a) const
    {
        const auto it = accounts.find(a);
        return it == accounts.end() ? nullptr : &it->second;
    }

    u256 balance_of(const Address& a) const
    {
        const auto* acc = find(a);
        return acc ? acc->balance : u256{0};
    }

    uint64_t nonce_of(const Address& a) const
    {
        const auto* acc = find(a);
        return acc ? acc->nonce : 0;
    }

    u256 total_balance() const
    {
        u256 sum = 0;
        for (const auto& [_, acc] : accounts)
            sum += acc.balance;
        return sum;
    }

    bool operator==(const WorldState&) const = default;
};

/// Immutable, shareable copy of a WorldState.
struct StateSnapshot
{
    std::shared_ptr<const WorldState> state;

    uint64_t block_number() const { return state->head.number; }
};

StateSnapshot snapshot(const WorldState& state);
WorldState restore(const StateSnapshot& snap);

/// Deterministic address for a contract created by `sender` at `nonce`.
Address create_address(const Address& sender, uint64_t nonce);

/// First four bytes of the digest of a function name.
Selector selector_of(std::string_view function_name);

}  // namespace txcap
