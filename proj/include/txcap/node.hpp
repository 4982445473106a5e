// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/chain.hpp>
#include <txcap/sigma.hpp>
#include <txcap/txsea.hpp>

#include <functional>
#include <mutex>

namespace txcap::node
{
enum class Status
{
    S1,  // σ-deterministic and unexpired
    S2,  // σ-deterministic but expired: retest
    S3,  // σ-nondeterministic with an SWC marker
    S4,  // σ-nondeterministic, no marker: untestable
};

std::string_view to_string(Status s);

/// Classification first, expiry second.
Status status_of(const sigma::Classification& c, txsea::Expiry e) noexcept;

struct TestRecord
{
    Transaction tx;  // block_included = the fork block
    Receipt receipt;
    evm::ExecutionTrace trace;
    sigma::Classification classification;
};

/// A soft fork: a private copy of the canonical state at open time.
struct TestSession
{
    std::string id;
    StateSnapshot fork_base;
    /// Header the test transactions execute under (head + 1).
    Block fork_block;
    WorldState fork_state;
    std::vector<TestRecord> pending;
    sigma::Classification classification;
    Status status = Status::S1;
    uint64_t created_at = 0;
    uint64_t ttl_blocks = 64;
    std::vector<size_t> finalized;

    uint64_t base_block() const { return fork_base.block_number(); }
};

struct SessionStatus
{
    std::string id;
    Status status = Status::S1;
    txsea::Expiry expiry = txsea::Expiry::Unexpired;
    /// Block of the interfering transaction when expired.
    std::optional<uint64_t> witness_block;
    sigma::Classification classification;
    std::vector<Receipt> receipts;
    uint64_t base_block = 0;
    uint64_t head_block = 0;
    uint64_t expires_after = 0;
    std::vector<size_t> finalized;
    /// Finalized while fresh, expired since: the final may or may not have
    /// been mined ahead of the interference.
    bool finalize_race = false;
};

struct SubmitResult
{
    Receipt receipt;
    evm::ExecutionTrace trace;
    Status status = Status::S1;
};

struct Replicability
{
    bool replicable = true;
    /// "FieldMismatch", "SigmaNondeterministic" or "ExpiredAt".
    std::string reason;
    std::string field;
    std::optional<uint64_t> block;
};

struct TimeSeparation
{
    bool required = false;
    /// First member that reverts in one block and succeeds later.
    std::optional<size_t> index;
    uint64_t quanta = 0;
};

/// Runs `plan` in the block after `base`'s head; for every member that
/// reverts there, reruns with that member (and the rest) moved 1..max_quanta
/// block quanta later. Any revert-to-success flip means the sequence needs
/// time between its members and cannot be tested in one fork.
TimeSeparation check_time_separation(const WorldState& base, std::span<const Transaction> plan,
                                     uint64_t max_quanta = 4);

/// Sequence rules against the already pending members. Throws
/// Error{"SequenceRuleViolation", detail, rule} with rule one of same_origin,
/// same_target, ascending_nonces, no_interleaving.
void validate_sequence(std::span<const Transaction> pending, const Transaction& next, uint64_t fork_nonce,
                       std::span<const Transaction> foreign_pool);

struct NodeOptions
{
    uint64_t ttl_blocks = 64;
    txsea::Mode mode = txsea::Mode::SenderAware;
    /// Admission floor of ordinary peers before the base fee is applied.
    uint64_t market_floor = 1'000'000'000;
    /// Optional append-only TxSEA cache file.
    std::string cache_path;
    uint64_t time_separation_quanta = 4;
};

using StatusHook = std::function<void(const std::string& session, Status before, Status after)>;
using FinalSink = std::function<void(const Transaction&)>;

/// The instrumented node: follows the canonical chain, maintains the TxSEA
/// cache, and runs test sessions on private forks. Canonical state is never
/// touched by a test.
class TxtNode
{
public:
    explicit TxtNode(const Genesis& genesis, NodeOptions options = {});

    // --- canonical side
    Block head() const;
    WorldState canonical_state() const;
    std::optional<Account> account(const Address& a) const;
    std::vector<Block> chain() const;
    std::vector<Transaction> mempool() const;
    /// max(market floor, base fee): anything at or above would propagate.
    uint64_t network_floor() const;
    const txsea::ExpirationMap& expiration_map() const noexcept { return map_; }
    const NodeOptions& options() const noexcept { return options_; }

    /// A block from the network. Throws Error{"InvalidBlock"}.
    void accept_block(const Block& block);
    /// Ordinary mempool admission. Throws Underpriced, NonceTooLow, DuplicateTransaction.
    void submit_market(const Transaction& tx);
    /// Mines the mempool into the next canonical block.
    MinedBlock mine(const Address& coinbase = {});

    void set_syncing(bool syncing);

    // --- sessions
    /// Throws Error{"NodeSyncing"}.
    std::string open_session();
    /// Throws NotUnderpriced, BelowInstrumentedFloor, SequenceRuleViolation,
    /// TimeSeparationRequired, plus the state-transition errors of the fork.
    SubmitResult submit_test(const std::string& id, Transaction tx);
    /// Throws SessionExpiredTtl (and reclaims the fork) or UnknownSession.
    SessionStatus poll_status(const std::string& id);
    Replicability verify_replicability(const std::string& id, std::span<const Transaction> finals);
    /// Resubmits pending[index] at a market price through the final sink.
    /// Throws NotS1, InvalidIndex.
    Transaction finalize(const std::string& id, size_t index, std::optional<uint64_t> gas_price = {});

    TestSession session(const std::string& id) const;
    std::vector<std::string> session_ids() const;

    void set_status_hook(StatusHook hook);
    /// Defaults to submit_market on this node.
    void set_final_sink(FinalSink sink);

private:
    struct Slot
    {
        std::mutex mu;
        TestSession s;
    };

    std::shared_ptr<Slot> slot(const std::string& id);
    /// Requires the slot lock.
    SessionStatus evaluate(TestSession& s, uint64_t head_number, Status& before);
    void after_block(const Block& block);
    void notify(const std::string& id, Status before, Status after) const;

    NodeOptions options_;
    mutable std::shared_mutex chain_mu_;
    WorldState state_;
    std::vector<Block> chain_;
    std::vector<Transaction> pool_;
    bool syncing_ = false;

    txsea::ExpirationMap map_;

    mutable std::mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::set<std::string> reclaimed_;
    uint64_t next_session_ = 0;

    mutable std::mutex hook_mu_;
    StatusHook hook_;
    FinalSink sink_;
};

}  // namespace txcap::node
