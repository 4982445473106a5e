// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/txsea.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <mutex>

namespace txcap::txsea
{
std::string_view to_string(Expiry e)
{
    return e == Expiry::Expired ? "Expired" : "Unexpired";
}

std::string_view to_string(Mode m)
{
    return m == Mode::Strict52 ? "strict-52" : "sender-aware";
}

Mode mode_from_string(std::string_view text)
{
    if (text == "strict-52" || text == "strict")
        return Mode::Strict52;
    if (text == "sender-aware")
        return Mode::SenderAware;
    throw Error{"InvalidConfig", "unknown txsea mode '" + std::string{text} + "'", "txsea.mode"};
}

ExpirationMap::ExpirationMap(const ExpirationMap& other) : mode_{other.mode_}
{
    std::shared_lock lock{other.mu_};
    map_ = other.map_;
}

ExpirationMap& ExpirationMap::operator=(const ExpirationMap& other)
{
    if (this == &other)
        return *this;
    std::unordered_map<Address, Entry> copy;
    {
        std::shared_lock lock{other.mu_};
        copy = other.map_;
    }
    std::unique_lock lock{mu_};
    mode_ = other.mode_;
    map_ = std::move(copy);
    log_.reset();
    return *this;
}

void ExpirationMap::cache_transaction(const Transaction& tx)
{
    if (!tx.block_included)
        throw Error{"UnminedTransaction", tx.hash.hex()};
    if (tx.is_create())
        return;
    record(*tx.recipient, tx.sender, *tx.block_included);
}

void ExpirationMap::record(const Address& target, const Address& sender, uint64_t block)
{
    std::unique_lock lock{mu_};
    record_locked(target, sender, block);
    append_record(target, sender, block);
}

void ExpirationMap::record_locked(const Address& target, const Address& sender, uint64_t block)
{
    auto [it, inserted] = map_.try_emplace(target);
    Entry& e = it->second;
    if (inserted)
    {
        e.last_block = block;
        e.last_sender = mode_ == Mode::SenderAware ? sender : Address{};
        return;
    }
    if (block < e.last_block)
        throw Error{"NonMonotoneBlock",
                    target.hex() + ": block " + std::to_string(block) + " < " + std::to_string(e.last_block)};
    if (mode_ == Mode::Strict52)
    {
        e.last_block = block;
        return;
    }
    if (sender != e.last_sender)
    {
        e.other_block = e.last_block;
        e.last_sender = sender;
    }
    e.last_block = block;
}

void ExpirationMap::append_record(const Address& target, const Address& sender, uint64_t block)
{
    if (!log_)
        return;
    const Bytes rec = encode_record(mode_, target, block, sender);
    log_->write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    log_->flush();
    if (!*log_)
        throw Error{"CacheIoError", "append failed"};
}

Expiry ExpirationMap::expiration_test(const Transaction& tx) const
{
    if (!tx.block_included)
        throw Error{"UnminedTransaction", tx.hash.hex()};
    if (tx.is_create())
        return Expiry::Unexpired;
    return test(*tx.recipient, tx.sender, *tx.block_included);
}

Expiry ExpirationMap::test(const Address& target, const Address& sender, uint64_t tested_block) const
{
    std::shared_lock lock{mu_};
    const auto it = map_.find(target);
    if (it == map_.end())
        return Expiry::Unexpired;
    const Entry& e = it->second;
    if (mode_ == Mode::Strict52)
        return e.last_block >= tested_block ? Expiry::Expired : Expiry::Unexpired;
    // Latest block touched by anyone other than `sender`.
    const std::optional<uint64_t> foreign = e.last_sender != sender ? std::optional{e.last_block} : e.other_block;
    return foreign && *foreign > tested_block ? Expiry::Expired : Expiry::Unexpired;
}

std::optional<ExpirationMap::Entry> ExpirationMap::entry(const Address& target) const
{
    std::shared_lock lock{mu_};
    const auto it = map_.find(target);
    if (it == map_.end())
        return std::nullopt;
    return it->second;
}

size_t ExpirationMap::size() const
{
    std::shared_lock lock{mu_};
    return map_.size();
}

std::vector<std::pair<Address, ExpirationMap::Entry>> ExpirationMap::entries() const
{
    std::vector<std::pair<Address, Entry>> out;
    {
        std::shared_lock lock{mu_};
        out.assign(map_.begin(), map_.end());
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

Bytes ExpirationMap::serialize() const
{
    Bytes out;
    for (const auto& [addr, e] : entries())
    {
        if (mode_ == Mode::SenderAware && e.other_block)
        {
            // Any sender other than last_sender reproduces other_block on replay.
            Address stand_in = e.last_sender;
            stand_in.bytes[19] ^= 1;
            const Bytes older = encode_record(mode_, addr, *e.other_block, stand_in);
            out.insert(out.end(), older.begin(), older.end());
        }
        const Bytes rec = encode_record(mode_, addr, e.last_block, e.last_sender);
        out.insert(out.end(), rec.begin(), rec.end());
    }
    return out;
}

ExpirationMap ExpirationMap::deserialize(BytesView data, Mode mode)
{
    ExpirationMap m{mode};
    for (const auto& r : decode_records(data, mode))
        m.record_locked(r.target, r.sender, r.block);
    return m;
}

ExpirationMap ExpirationMap::open(const std::string& path, Mode mode)
{
    Bytes data;
    {
        std::ifstream in{path, std::ios::binary};
        if (in)
            data.assign(std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{});
    }
    ExpirationMap m = deserialize(data, mode);
    m.log_ = std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*m.log_)
        throw Error{"CacheIoError", "cannot open " + path};
    return m;
}

void ExpirationMap::close_log()
{
    std::unique_lock lock{mu_};
    log_.reset();
}

bool ExpirationMap::operator==(const ExpirationMap& other) const
{
    if (mode_ != other.mode_)
        return false;
    return entries() == other.entries();
}

Bytes encode_record(Mode mode, const Address& target, uint64_t block, const Address& sender)
{
    Bytes out(target.bytes.begin(), target.bytes.end());
    const auto be = word_to_be(u256{block});
    out.insert(out.end(), be.begin(), be.end());
    if (mode == Mode::SenderAware)
        out.insert(out.end(), sender.bytes.begin(), sender.bytes.end());
    return out;
}

std::vector<Record> decode_records(BytesView data, Mode mode)
{
    const size_t n = record_size(mode);
    if (data.size() % n != 0)
        throw Error{"CorruptCache", "length " + std::to_string(data.size()) + " is not a multiple of " +
                                        std::to_string(n)};
    std::vector<Record> out;
    out.reserve(data.size() / n);
    for (size_t off = 0; off < data.size(); off += n)
    {
        Record r;
        std::copy_n(data.begin() + static_cast<ptrdiff_t>(off), 20, r.target.bytes.begin());
        const u256 block = word_from_be(data.subspan(off + 20, 32));
        if (block > std::numeric_limits<uint64_t>::max())
            throw Error{"CorruptCache", "block number out of range at offset " + std::to_string(off)};
        r.block = static_cast<uint64_t>(block);
        if (mode == Mode::SenderAware)
            std::copy_n(data.begin() + static_cast<ptrdiff_t>(off + 52), 20, r.sender.bytes.begin());
        out.push_back(r);
    }
    return out;
}

Expiry sequence_expiration_test(const ExpirationMap& map, std::span<const Transaction> seq,
                                std::span<const uint64_t> per_tx_blocks)
{
    if (seq.size() != per_tx_blocks.size())
        throw Error{"InvalidArgument", "one block per sequence member required"};
    for (size_t i = 0; i < seq.size(); ++i)
    {
        if (seq[i].is_create())
            continue;
        if (map.test(*seq[i].recipient, seq[i].sender, per_tx_blocks[i]) == Expiry::Expired)
            return Expiry::Expired;
    }
    return Expiry::Unexpired;
}

namespace
{
template <typename Pred>
Expiry scan(std::span<const Transaction> history, const Transaction& tx, Pred interferes)
{
    if (!tx.block_included)
        throw Error{"UnminedTransaction", tx.hash.hex()};
    if (tx.is_create())
        return Expiry::Unexpired;
    for (const auto& tj : history)
        if (tj.block_included && tj.recipient == tx.recipient && interferes(tj))
            return Expiry::Expired;
    return Expiry::Unexpired;
}
}  // namespace

Expiry brute_force_expiration(std::span<const Transaction> history, const Transaction& tx, uint64_t at_block)
{
    const uint64_t tb = *tx.block_included;
    return scan(history, tx, [&](const Transaction& tj) {
        return tj.sender != tx.sender && tb < *tj.block_included && *tj.block_included <= at_block;
    });
}

Expiry brute_force_expiration_blind(std::span<const Transaction> history, const Transaction& tx, uint64_t at_block)
{
    const uint64_t tb = *tx.block_included;
    return scan(history, tx,
                [&](const Transaction& tj) { return tb <= *tj.block_included && *tj.block_included <= at_block; });
}

Expiry brute_force_sequence_expiration(std::span<const Transaction> history, std::span<const Transaction> seq,
                                       std::span<const uint64_t> per_tx_blocks, uint64_t at_block)
{
    for (size_t i = 0; i < seq.size(); ++i)
    {
        Transaction probe = seq[i];
        probe.block_included = per_tx_blocks[i];
        if (brute_force_expiration(history, probe, at_block) == Expiry::Expired)
            return Expiry::Expired;
    }
    return Expiry::Unexpired;
}

double retry_success_probability(double p_single, int64_t k)
{
    if (!(p_single >= 0.0 && p_single <= 1.0))
        throw Error{"DomainError", "p_single must lie in [0, 1]"};
    if (k < 1)
        throw Error{"DomainError", "k must be at least 1"};
    const double q = 1.0 - p_single;
    if (k <= 64)
    {
        // p * (1 + q + ... + q^(k-1)); exact for k = 1 and free of the
        // cancellation in 1 - q^k when p is small.
        double s = 1.0;
        for (int64_t j = 1; j < k; ++j)
            s = 1.0 + q * s;
        return std::min(1.0, p_single * s);
    }
    return std::clamp(-std::expm1(static_cast<double>(k) * std::log1p(-p_single)), 0.0, 1.0);
}

}  // namespace txcap::txsea
