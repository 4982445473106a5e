// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

// Reference models kept deliberately naive: they read the definitions
// literally and share no code with the library.

#pragma once

#include "generators.hpp"

#include <txcap/txsea.hpp>

#include <cmath>

namespace txcap::testing
{
struct MinedTx
{
    Address target;
    Address sender;
    uint64_t block = 0;
};

/// A mined history: blocks 1..n, zero or more calls per block.
struct History
{
    std::vector<MinedTx> txs;
    std::vector<Address> contracts;
    std::vector<Address> senders;
    uint64_t blocks = 0;
};

inline History random_history(Rng& rng, size_t max_txs = 10'000, size_t max_contracts = 50, size_t max_senders = 20)
{
    History h;
    const size_t n_contracts = rng.range(1, max_contracts);
    const size_t n_senders = rng.range(1, max_senders);
    for (size_t i = 0; i < n_contracts; ++i)
        h.contracts.push_back(numbered_address(i, 0xc0));
    for (size_t i = 0; i < n_senders; ++i)
        h.senders.push_back(numbered_address(i, 0x5e));
    const size_t n_txs = rng.range(0, max_txs);
    uint64_t block = 1;
    // Skewed toward few contracts so collisions are common.
    const size_t hot = std::min<size_t>(n_contracts, rng.range(1, 5));
    for (size_t i = 0; i < n_txs; ++i)
    {
        if (rng.chance(0.3))
            block += rng.range(1, 3);
        const size_t c = rng.chance(0.6) ? rng.below(hot) : rng.below(n_contracts);
        h.txs.push_back({h.contracts[c], rng.pick(h.senders), block});
    }
    h.blocks = block;
    return h;
}

/// Some later transaction to the same target from a different sender, in (tested, at].
inline bool oracle_expired(std::span<const MinedTx> history, const Address& target, const Address& sender,
                           uint64_t tested, uint64_t at)
{
    for (const auto& t : history)
        if (t.target == target && t.sender != sender && t.block > tested && t.block <= at)
            return true;
    return false;
}

/// Sender-blind reading with a non-strict lower bound.
inline bool oracle_expired_blind(std::span<const MinedTx> history, const Address& target, uint64_t tested,
                                 uint64_t at)
{
    for (const auto& t : history)
        if (t.target == target && t.block >= tested && t.block <= at)
            return true;
    return false;
}

inline Transaction as_transaction(const MinedTx& m)
{
    Transaction t;
    t.sender = m.sender;
    t.recipient = m.target;
    t.block_included = m.block;
    return t;
}

/// 1 - (1 - p)^k through logarithms, so it shares no arithmetic with the library.
inline double oracle_retry(double p, int k)
{
    if (p >= 1.0)
        return 1.0;
    return -std::expm1(static_cast<double>(k) * std::log1p(-p));
}

/// Per-target index of a history, for oracle queries against long histories.
struct TargetIndex
{
    std::map<Address, std::vector<MinedTx>> by_target;

    explicit TargetIndex(std::span<const MinedTx> txs)
    {
        for (const auto& t : txs)
            by_target[t.target].push_back(t);
    }
    std::span<const MinedTx> of(const Address& target) const
    {
        const auto it = by_target.find(target);
        return it == by_target.end() ? std::span<const MinedTx>{} : std::span<const MinedTx>{it->second};
    }
};

}  // namespace txcap::testing
