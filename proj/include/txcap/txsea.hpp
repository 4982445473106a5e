// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/state.hpp>

#include <fstream>
#include <shared_mutex>
#include <unordered_map>

namespace txcap::txsea
{
enum class Expiry
{
    Unexpired,
    Expired,
};

std::string_view to_string(Expiry e);

enum class Mode
{
    /// The compact cache: address -> last block, sender-blind, `>=`.
    Strict52,
    /// Keeps enough sender information to answer the "different sender,
    /// strictly later block" question exactly.
    SenderAware,
};

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view text);

/// Size of one serialized record: 52 bytes in strict mode (address ‖ block),
/// 72 bytes in sender-aware mode (address ‖ block ‖ sender).
constexpr size_t record_size(Mode m)
{
    return m == Mode::Strict52 ? 52 : 72;
}

/// The expiration cache: contract address -> block of its latest incoming
/// transaction. Sender-aware entries also remember who sent that transaction
/// and the latest block touched by anybody else, which is what an exact
/// "different sender" query needs.
///
/// Readers take a shared lock, the writer an exclusive one, so a reader never
/// sees a half-updated entry.
class ExpirationMap
{
public:
    struct Entry
    {
        uint64_t last_block = 0;
        Address last_sender;
        /// Latest block with a transaction from someone other than last_sender.
        std::optional<uint64_t> other_block;

        bool operator==(const Entry&) const = default;
    };

    explicit ExpirationMap(Mode mode = Mode::SenderAware) : mode_{mode} {}
    ExpirationMap(const ExpirationMap& other);
    ExpirationMap& operator=(const ExpirationMap& other);

    Mode mode() const noexcept { return mode_; }

    /// Records a mined transaction. Throws Error{"UnminedTransaction"} when
    /// block_included is unset. Contract creations have no recipient and are ignored.
    void cache_transaction(const Transaction& tx);

    /// Raw update. Blocks must arrive in non-decreasing order per address;
    /// an older block throws Error{"NonMonotoneBlock"}.
    void record(const Address& target, const Address& sender, uint64_t block);

    /// Expiration test using tx.recipient, tx.sender and
    /// tx.block_included as the tested block.
    Expiry expiration_test(const Transaction& tx) const;
    Expiry test(const Address& target, const Address& sender, uint64_t tested_block) const;

    std::optional<Entry> entry(const Address& target) const;
    size_t size() const;
    std::vector<std::pair<Address, Entry>> entries() const;

    /// Compact record stream that rebuilds an equal map when replayed.
    /// Strict mode: exactly one 52-byte record per entry.
    Bytes serialize() const;
    static ExpirationMap deserialize(BytesView data, Mode mode);

    /// Opens (or creates) an append-only cache file, replays it, and appends
    /// one record for every later update.
    static ExpirationMap open(const std::string& path, Mode mode);
    void close_log();

    bool operator==(const ExpirationMap& other) const;

private:
    void record_locked(const Address& target, const Address& sender, uint64_t block);
    void append_record(const Address& target, const Address& sender, uint64_t block);

    Mode mode_;
    mutable std::shared_mutex mu_;
    std::unordered_map<Address, Entry> map_;
    std::shared_ptr<std::ofstream> log_;
};

/// Encodes one record (address ‖ 32-byte big-endian block [‖ sender]).
Bytes encode_record(Mode mode, const Address& target, uint64_t block, const Address& sender);

struct Record
{
    Address target;
    uint64_t block = 0;
    Address sender;
};
/// Throws Error{"CorruptCache"} on a truncated stream or a block above 2^64.
std::vector<Record> decode_records(BytesView data, Mode mode);

/// A sequence is expired when any member is, each member
/// tested at its own block.
Expiry sequence_expiration_test(const ExpirationMap& map, std::span<const Transaction> seq,
                                std::span<const uint64_t> per_tx_blocks);

/// Reference check over raw history: some T_j in history targets the same
/// contract, comes from a different sender, and has T_b,i < T_b,j <= at_block.
Expiry brute_force_expiration(std::span<const Transaction> history, const Transaction& tx, uint64_t at_block);

/// Sender-blind reading used by the compact cache: some T_j targets the same
/// contract with T_b,i <= T_b,j <= at_block.
Expiry brute_force_expiration_blind(std::span<const Transaction> history, const Transaction& tx,
                                    uint64_t at_block);

Expiry brute_force_sequence_expiration(std::span<const Transaction> history, std::span<const Transaction> seq,
                                       std::span<const uint64_t> per_tx_blocks, uint64_t at_block);

/// 1 - (1 - p)^k. Throws Error{"DomainError"} unless 0 <= p <= 1 and k >= 1.
double retry_success_probability(double p_single, int64_t k);

}  // namespace txcap::txsea
