// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/node.hpp>

#include <algorithm>

namespace txcap::node
{
std::string_view to_string(Status s)
{
    switch (s)
    {
    case Status::S1: return "S1";
    case Status::S2: return "S2";
    case Status::S3: return "S3";
    case Status::S4: return "S4";
    }
    return "?";
}

Status status_of(const sigma::Classification& c, txsea::Expiry e) noexcept
{
    if (c.verdict == sigma::Verdict::SigmaNondeterministic)
        return c.markers().empty() ? Status::S4 : Status::S3;
    return e == txsea::Expiry::Expired ? Status::S2 : Status::S1;
}

namespace
{
bool reverted(const Receipt& r)
{
    return r.status != ReceiptStatus::Success;
}

/// Runs plan[0..split) under `first` and plan[split..) under `second`.
/// Returns the receipts, or nullopt when a member could not be applied at all.
std::optional<std::vector<Receipt>> dry_run(const WorldState& base, std::span<const Transaction> plan,
                                            const Block& first, const Block& second, size_t split)
{
    WorldState st = base;
    std::vector<Receipt> out;
    for (size_t i = 0; i < plan.size(); ++i)
    {
        try
        {
            out.push_back(apply_transaction(st, plan[i], i < split ? first : second).receipt);
        }
        catch (const Error&)
        {
            return std::nullopt;
        }
    }
    return out;
}

std::string session_token(uint64_t n)
{
    return "s-" + digest("txcap-session-" + std::to_string(n)).hex().substr(2, 16);
}

/// The block a session's expiry is measured from. Strict mode follows the
/// cache's `>=` against the block the tests ran in; sender-aware mode uses
/// the strict `>` against the block whose state the tests observed. Either
/// way, foreign traffic from the fork block on counts.
uint64_t tested_block(txsea::Mode mode, uint64_t base)
{
    return mode == txsea::Mode::Strict52 ? base + 1 : base;
}

std::optional<uint64_t> witness(const txsea::ExpirationMap& map, const Address& target, const Address& sender)
{
    const auto e = map.entry(target);
    if (!e)
        return std::nullopt;
    if (map.mode() == txsea::Mode::Strict52)
        return e->last_block;
    return e->last_sender != sender ? std::optional{e->last_block} : e->other_block;
}
}  // namespace

TimeSeparation check_time_separation(const WorldState& base, std::span<const Transaction> plan, uint64_t max_quanta)
{
    TimeSeparation out;
    const Block first = pending_block(base);
    const auto together = dry_run(base, plan, first, first, plan.size());
    if (!together)
        return out;
    for (size_t i = 0; i < plan.size(); ++i)
    {
        if (!reverted((*together)[i]))
            continue;
        for (uint64_t k = 1; k <= max_quanta; ++k)
        {
            Block later = first;
            later.number += k;
            later.timestamp += k * base.params.block_time_quantum;
            const auto spread = dry_run(base, plan, first, later, i);
            if (spread && !reverted((*spread)[i]))
            {
                out.required = true;
                out.index = i;
                out.quanta = k;
                return out;
            }
        }
    }
    return out;
}

void validate_sequence(std::span<const Transaction> pending, const Transaction& next, uint64_t fork_nonce,
                       std::span<const Transaction> foreign_pool)
{
    auto fail = [](const char* rule, std::string detail) {
        throw Error{"SequenceRuleViolation", std::move(detail), rule};
    };
    if (!pending.empty())
    {
        const Transaction& head = pending.front();
        if (next.sender != head.sender)
            fail("same_origin", "sequence is sent from " + head.sender.hex() + ", got " + next.sender.hex());
        if (next.recipient != head.recipient)
            fail("same_target", "every member must target the same contract");
    }
    const uint64_t expected = pending.empty() ? fork_nonce : pending.back().nonce + 1;
    if (next.nonce != expected)
        fail("ascending_nonces",
             "expected nonce " + std::to_string(expected) + ", got " + std::to_string(next.nonce));
    const uint64_t first = pending.empty() ? next.nonce : pending.front().nonce;
    for (const auto& k : foreign_pool)
        if (k.sender == next.sender && k.nonce >= first && k.nonce <= next.nonce)
            fail("no_interleaving", "pending transaction " + k.hash.hex() + " from the same account uses nonce " +
                                        std::to_string(k.nonce));
}

TxtNode::TxtNode(const Genesis& genesis, NodeOptions options)
  : options_{std::move(options)},
    state_{make_genesis(genesis)},
    map_{options_.cache_path.empty() ? txsea::ExpirationMap{options_.mode}
                                     : txsea::ExpirationMap::open(options_.cache_path, options_.mode)}
{
    chain_.push_back(state_.head);
}

Block TxtNode::head() const
{
    std::shared_lock lock{chain_mu_};
    return state_.head;
}

WorldState TxtNode::canonical_state() const
{
    std::shared_lock lock{chain_mu_};
    return state_;
}

std::optional<Account> TxtNode::account(const Address& a) const
{
    std::shared_lock lock{chain_mu_};
    const auto* acc = state_.find(a);
    return acc ? std::optional{*acc} : std::nullopt;
}

std::vector<Block> TxtNode::chain() const
{
    std::shared_lock lock{chain_mu_};
    return chain_;
}

std::vector<Transaction> TxtNode::mempool() const
{
    std::shared_lock lock{chain_mu_};
    return pool_;
}

uint64_t TxtNode::network_floor() const
{
    std::shared_lock lock{chain_mu_};
    return std::max(options_.market_floor, state_.params.base_fee);
}

void TxtNode::set_syncing(bool syncing)
{
    std::unique_lock lock{chain_mu_};
    syncing_ = syncing;
}

void TxtNode::accept_block(const Block& block)
{
    {
        std::unique_lock lock{chain_mu_};
        WorldState next = state_;
        apply_block(next, block);
        state_ = std::move(next);
        chain_.push_back(block);
        std::erase_if(pool_, [&](const Transaction& p) { return p.nonce < state_.nonce_of(p.sender); });
    }
    after_block(block);
}

void TxtNode::submit_market(const Transaction& tx)
{
    std::unique_lock lock{chain_mu_};
    const uint64_t floor = std::max(options_.market_floor, state_.params.base_fee);
    if (tx.gas_price < floor)
        throw Error{"Underpriced", "gas price " + std::to_string(tx.gas_price) + " below the network floor " +
                                       std::to_string(floor)};
    if (tx.hash != tx.compute_hash())
        throw Error{"InvalidTransaction", "hash does not match the transaction fields"};
    if (tx.nonce < state_.nonce_of(tx.sender))
        throw Error{"NonceTooLow", "account nonce is " + std::to_string(state_.nonce_of(tx.sender))};
    for (const auto& p : pool_)
        if (p.hash == tx.hash)
            throw Error{"DuplicateTransaction", tx.hash.hex()};
    pool_.push_back(tx);
}

MinedBlock TxtNode::mine(const Address& coinbase)
{
    MinedBlock mined;
    {
        std::unique_lock lock{chain_mu_};
        WorldState next = state_;
        BlockParams bp;
        bp.coinbase = coinbase;
        mined = mine_block(next, pool_, bp);
        state_ = std::move(next);
        chain_.push_back(mined.block);
        std::erase_if(pool_, [&](const Transaction& p) { return p.nonce < state_.nonce_of(p.sender); });
    }
    after_block(mined.block);
    return mined;
}

void TxtNode::after_block(const Block& block)
{
    for (Transaction tx : block.transactions)
    {
        tx.block_included = block.number;
        map_.cache_transaction(tx);
    }
    StatusHook hook;
    {
        std::lock_guard lock{hook_mu_};
        hook = hook_;
    }
    if (!hook)
        return;
    // The background check: re-evaluate live sessions after every block.
    for (const auto& id : session_ids())
    {
        std::shared_ptr<Slot> sl;
        {
            std::lock_guard lock{sessions_mu_};
            const auto it = sessions_.find(id);
            if (it == sessions_.end())
                continue;
            sl = it->second;
        }
        Status before{}, after{};
        {
            std::lock_guard lock{sl->mu};
            if (block.number > sl->s.created_at + sl->s.ttl_blocks)
                continue;
            after = evaluate(sl->s, block.number, before).status;
        }
        if (before != after)
            hook(id, before, after);
    }
}

void TxtNode::notify(const std::string& id, Status before, Status after) const
{
    if (before == after)
        return;
    StatusHook hook;
    {
        std::lock_guard lock{hook_mu_};
        hook = hook_;
    }
    if (hook)
        hook(id, before, after);
}

void TxtNode::set_status_hook(StatusHook hook)
{
    std::lock_guard lock{hook_mu_};
    hook_ = std::move(hook);
}

void TxtNode::set_final_sink(FinalSink sink)
{
    std::lock_guard lock{hook_mu_};
    sink_ = std::move(sink);
}

std::string TxtNode::open_session()
{
    auto sl = std::make_shared<Slot>();
    {
        std::shared_lock lock{chain_mu_};
        if (syncing_)
            throw Error{"NodeSyncing", "the node has not caught up with the network head"};
        sl->s.fork_base = snapshot(state_);
        sl->s.created_at = state_.head.number;
    }
    sl->s.fork_state = restore(sl->s.fork_base);
    sl->s.fork_block = pending_block(sl->s.fork_state);
    sl->s.ttl_blocks = options_.ttl_blocks;
    std::lock_guard lock{sessions_mu_};
    sl->s.id = session_token(next_session_++);
    sessions_.emplace(sl->s.id, sl);
    return sl->s.id;
}

std::shared_ptr<TxtNode::Slot> TxtNode::slot(const std::string& id)
{
    const uint64_t now = head().number;
    std::lock_guard lock{sessions_mu_};
    if (reclaimed_.contains(id))
        throw Error{"SessionExpiredTtl", "session " + id + " outlived its retention window"};
    const auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw Error{"UnknownSession", "no session '" + id + "'"};
    const auto& s = it->second->s;
    if (now > s.created_at + s.ttl_blocks)
    {
        // Reclaim the fork; later calls keep reporting the TTL expiry.
        reclaimed_.insert(id);
        sessions_.erase(it);
        throw Error{"SessionExpiredTtl", "session " + id + " opened at block " + std::to_string(s.created_at) +
                                             " expired after " + std::to_string(s.ttl_blocks) + " blocks"};
    }
    return it->second;
}

SessionStatus TxtNode::evaluate(TestSession& s, uint64_t head_number, Status& before)
{
    before = s.status;
    SessionStatus out;
    out.id = s.id;
    out.base_block = s.base_block();
    out.head_block = head_number;
    out.expires_after = s.created_at + s.ttl_blocks;
    out.classification = s.classification;
    out.finalized = s.finalized;
    for (const auto& r : s.pending)
        out.receipts.push_back(r.receipt);

    if (!s.pending.empty() && s.pending.front().tx.recipient)
    {
        const Transaction& first = s.pending.front().tx;
        std::vector<Transaction> seq;
        for (const auto& r : s.pending)
            seq.push_back(r.tx);
        const std::vector<uint64_t> blocks(seq.size(), tested_block(map_.mode(), s.base_block()));
        out.expiry = txsea::sequence_expiration_test(map_, seq, blocks);
        if (out.expiry == txsea::Expiry::Expired)
            out.witness_block = witness(map_, *first.recipient, first.sender);
    }
    Status now = status_of(s.classification, out.expiry);
    // Expiry is permanent; the cache only moves forward, but never let a
    // status step back to S1.
    if (before == Status::S2 && now == Status::S1)
        now = Status::S2;
    s.status = now;
    out.status = now;
    out.finalize_race = !s.finalized.empty() && now == Status::S2;
    return out;
}

SubmitResult TxtNode::submit_test(const std::string& id, Transaction tx)
{
    if (tx.gas_price == 0)
        throw Error{"BelowInstrumentedFloor", "test transactions must pay at least 1 wei per gas"};
    const uint64_t floor = network_floor();
    if (tx.gas_price >= floor)
        throw Error{"NotUnderpriced",
                    "gas price " + std::to_string(tx.gas_price) + " is at or above the network floor " +
                        std::to_string(floor) + "; the transaction would propagate to the network"};
    tx.block_included.reset();
    if (tx.hash != tx.compute_hash())
        tx.seal();

    const auto sl = slot(id);
    const auto pool = mempool();
    Status before{}, after{};
    SubmitResult out;
    {
        std::lock_guard lock{sl->mu};
        TestSession& s = sl->s;
        std::vector<Transaction> plan;
        for (const auto& r : s.pending)
            plan.push_back(r.tx);
        validate_sequence(plan, tx, s.fork_base.state->nonce_of(tx.sender), pool);

        plan.push_back(tx);
        for (auto& p : plan)
            p.block_included.reset();
        if (plan.size() > 1)
        {
            const auto sep = check_time_separation(*s.fork_base.state, plan, options_.time_separation_quanta);
            if (sep.required)
                throw Error{"TimeSeparationRequired",
                            "member " + std::to_string(*sep.index + 1) + " only succeeds " + std::to_string(sep.quanta) +
                                " block(s) after the others; the sequence cannot be tested in one fork"};
        }

        WorldState next = s.fork_state;
        auto applied = apply_transaction(next, tx, s.fork_block);
        s.fork_state = std::move(next);

        TestRecord rec;
        rec.tx = tx;
        rec.tx.block_included = s.fork_block.number;
        rec.receipt = applied.receipt;
        rec.trace = applied.trace;
        rec.classification = sigma::classify_transaction(applied.trace);
        s.pending.push_back(rec);

        std::vector<evm::ExecutionTrace> traces;
        for (const auto& r : s.pending)
            traces.push_back(r.trace);
        s.classification = sigma::classify_sequence(traces);

        after = evaluate(s, head().number, before).status;
        out.receipt = rec.receipt;
        out.trace = rec.trace;
        out.status = after;
    }
    notify(id, before, after);
    return out;
}

SessionStatus TxtNode::poll_status(const std::string& id)
{
    const auto sl = slot(id);
    Status before{};
    SessionStatus out;
    {
        std::lock_guard lock{sl->mu};
        out = evaluate(sl->s, head().number, before);
    }
    notify(id, before, out.status);
    return out;
}

Replicability TxtNode::verify_replicability(const std::string& id, std::span<const Transaction> finals)
{
    const auto sl = slot(id);
    std::lock_guard lock{sl->mu};
    const TestSession& s = sl->s;
    Replicability out;
    auto mismatch = [&](const char* field) {
        out.replicable = false;
        out.reason = "FieldMismatch";
        out.field = field;
        return out;
    };
    if (finals.size() != s.pending.size())
        return mismatch("length");
    for (size_t i = 0; i < finals.size(); ++i)
    {
        const Transaction& t = s.pending[i].tx;
        const Transaction& f = finals[i];
        if (f.nonce != t.nonce)
            return mismatch("nonce");
        if (f.gas_offer != t.gas_offer)
            return mismatch("gas_offer");
        if (f.sender != t.sender)
            return mismatch("sender");
        if (f.recipient != t.recipient)
            return mismatch("recipient");
        if (f.value != t.value)
            return mismatch("value");
        if (f.function_selector != t.function_selector)
            return mismatch("function");
        if (f.args != t.args)
            return mismatch("args");
    }
    if (s.classification.verdict == sigma::Verdict::SigmaNondeterministic)
    {
        out.replicable = false;
        out.reason = "SigmaNondeterministic";
        return out;
    }
    if (!s.pending.empty() && s.pending.front().tx.recipient)
    {
        const Transaction& first = s.pending.front().tx;
        if (map_.test(*first.recipient, first.sender, tested_block(map_.mode(), s.base_block())) ==
            txsea::Expiry::Expired)
        {
            out.replicable = false;
            out.reason = "ExpiredAt";
            out.block = witness(map_, *first.recipient, first.sender);
            return out;
        }
    }
    return out;
}

Transaction TxtNode::finalize(const std::string& id, size_t index, std::optional<uint64_t> gas_price)
{
    const auto sl = slot(id);
    Transaction final_tx;
    Status before{}, now{};
    bool break_out = false;
    {
        std::lock_guard lock{sl->mu};
        TestSession& s = sl->s;
        now = evaluate(s, head().number, before).status;
        if (now != Status::S1)
        {
            break_out = true;
        }
        else
        {
            if (index >= s.pending.size())
                throw Error{"InvalidIndex",
                            "session has " + std::to_string(s.pending.size()) + " test transaction(s)"};
            final_tx = s.pending[index].tx;
            final_tx.block_included.reset();
            final_tx.gas_price = gas_price.value_or(network_floor());
            final_tx.seal();
            if (std::find(s.finalized.begin(), s.finalized.end(), index) == s.finalized.end())
                s.finalized.push_back(index);
        }
    }
    notify(id, before, now);
    if (break_out)
        throw Error{"NotS1", "session is " + std::string{to_string(now)} + "; retest before finalizing"};
    FinalSink sink;
    {
        std::lock_guard lock{hook_mu_};
        sink = sink_;
    }
    if (sink)
        sink(final_tx);
    else
        submit_market(final_tx);
    return final_tx;
}

TestSession TxtNode::session(const std::string& id) const
{
    std::shared_ptr<Slot> sl;
    {
        std::lock_guard lock{sessions_mu_};
        const auto it = sessions_.find(id);
        if (it == sessions_.end())
            throw Error{"UnknownSession", "no session '" + id + "'"};
        sl = it->second;
    }
    std::lock_guard lock{sl->mu};
    return sl->s;
}

std::vector<std::string> TxtNode::session_ids() const
{
    std::lock_guard lock{sessions_mu_};
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_)
        out.push_back(id);
    return out;
}

}  // namespace txcap::node
