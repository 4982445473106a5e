// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/chain.hpp>

#include <algorithm>

namespace txcap
{
namespace
{
void put_u64(Bytes& out, uint64_t v)
{
    for (int i = 7; i >= 0; --i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

template <size_t N>
void put_fixed(Bytes& out, const std::array<uint8_t, N>& a)
{
    out.insert(out.end(), a.begin(), a.end());
}

void put_word(Bytes& out, const u256& v)
{
    put_fixed(out, word_to_be(v));
}

evm::VmContext vm_context(const WorldState& state, const Transaction& tx, const Block& block_ctx)
{
    evm::VmContext ctx;
    ctx.block = &block_ctx;
    ctx.tx_gas_price = tx.gas_price;
    ctx.block_hashes = &state.block_hashes;
    ctx.gas = &state.params.gas;
    ctx.max_depth = state.params.max_call_depth;
    return ctx;
}
}  // namespace

Bytes Transaction::calldata() const
{
    Bytes out;
    if (function_selector)
        out.insert(out.end(), function_selector->begin(), function_selector->end());
    out.insert(out.end(), args.begin(), args.end());
    return out;
}

Hash32 Transaction::compute_hash() const
{
    Bytes buf;
    buf.reserve(160 + args.size());
    put_u64(buf, nonce);
    put_u64(buf, gas_price);
    put_u64(buf, gas_offer);
    put_fixed(buf, sender.bytes);
    buf.push_back(recipient ? 1 : 0);
    if (recipient)
        put_fixed(buf, recipient->bytes);
    put_word(buf, value);
    buf.push_back(function_selector ? 1 : 0);
    if (function_selector)
        put_fixed(buf, *function_selector);
    put_u64(buf, args.size());
    buf.insert(buf.end(), args.begin(), args.end());
    return digest(buf);
}

Hash32 Block::hash() const
{
    Bytes buf;
    put_u64(buf, number);
    put_fixed(buf, parent_hash.bytes);
    put_u64(buf, gas_limit);
    put_u64(buf, gas_used);
    put_u64(buf, difficulty);
    put_u64(buf, timestamp);
    put_fixed(buf, coinbase.bytes);
    put_u64(buf, base_fee);
    for (const auto& tx : transactions)
        put_fixed(buf, tx.hash.bytes);
    return digest(buf);
}

StateSnapshot snapshot(const WorldState& state)
{
    return StateSnapshot{std::make_shared<const WorldState>(state)};
}

WorldState restore(const StateSnapshot& snap)
{
    return *snap.state;
}

Address create_address(const Address& sender, uint64_t nonce)
{
    Bytes buf{'c', 'r', 'e', 'a', 't', 'e'};
    put_fixed(buf, sender.bytes);
    put_u64(buf, nonce);
    const Hash32 h = digest(buf);
    Address a;
    std::copy(h.bytes.begin() + 12, h.bytes.end(), a.bytes.begin());
    return a;
}

Selector selector_of(std::string_view function_name)
{
    const Hash32 h = digest(function_name);
    return Selector{h.bytes[0], h.bytes[1], h.bytes[2], h.bytes[3]};
}

Bytes make_deploy_payload(BytesView init_code, BytesView ctor_args)
{
    Bytes out;
    const auto n = static_cast<uint32_t>(init_code.size());
    for (int i = 3; i >= 0; --i)
        out.push_back(static_cast<uint8_t>(n >> (8 * i)));
    out.insert(out.end(), init_code.begin(), init_code.end());
    out.insert(out.end(), ctor_args.begin(), ctor_args.end());
    return out;
}

DeployPayload split_deploy_payload(BytesView payload)
{
    if (payload.size() < 4)
        throw Error{"BadDeployPayload", "payload shorter than its length prefix"};
    const uint32_t n = (uint32_t{payload[0]} << 24) | (uint32_t{payload[1]} << 16) | (uint32_t{payload[2]} << 8) |
                       uint32_t{payload[3]};
    if (payload.size() < 4 + size_t{n})
        throw Error{"BadDeployPayload", "init code length exceeds payload"};
    DeployPayload out;
    out.init_code.assign(payload.begin() + 4, payload.begin() + 4 + n);
    out.ctor_args.assign(payload.begin() + 4 + n, payload.end());
    return out;
}

AppliedTransaction apply_transaction(WorldState& state, const Transaction& tx, const Block& block_ctx)
{
    const uint64_t expected_nonce = state.nonce_of(tx.sender);
    if (tx.nonce != expected_nonce)
        throw Error{"NonceMismatch", "transaction nonce " + std::to_string(tx.nonce) + ", account nonce " +
                                         std::to_string(expected_nonce)};

    const u256 gas_budget = u256{tx.gas_offer} * tx.gas_price;
    if (state.balance_of(tx.sender) < tx.value + gas_budget)
        throw Error{"InsufficientFunds", "sender " + tx.sender.hex() + " cannot cover value plus gas"};

    const uint64_t intrinsic = state.params.gas.intrinsic;
    if (tx.gas_offer < intrinsic)
        throw Error{"IntrinsicGasTooLow",
                    "gas offer " + std::to_string(tx.gas_offer) + " below intrinsic " + std::to_string(intrinsic)};

    Bytes code;
    Address target;
    Bytes input;
    if (tx.is_create())
    {
        auto payload = split_deploy_payload(tx.args);
        code = std::move(payload.init_code);
        input = std::move(payload.ctor_args);
        target = create_address(tx.sender, tx.nonce);
    }
    else
    {
        target = *tx.recipient;
        if (const Account* acc = state.find(target); acc && !acc->code.empty())
        {
            try
            {
                (void)evm::decode(acc->code);
            }
            catch (const Error& e)
            {
                throw Error{"UnknownRecipientCode", target.hex() + ": " + e.detail()};
            }
            code = acc->code;
        }
        input = tx.calldata();
    }

    // Committed regardless of outcome: nonce increment and the up-front gas charge.
    {
        Account& sender = state.accounts[tx.sender];
        sender.nonce += 1;
        sender.balance -= gas_budget;
    }

    AppliedTransaction out;
    out.receipt.tx_hash = tx.hash;

    uint64_t gas_left = tx.gas_offer - intrinsic;
    evm::StateOverlay overlay{state};
    bool ok = true;

    if (tx.is_create())
    {
        const Account* existing = overlay.find(target);
        if (existing && (!existing->code.empty() || existing->nonce != 0))
        {
            ok = false;
            out.receipt.error = "AddressCollision";
        }
    }

    if (ok)
        overlay.transfer(tx.sender, target, tx.value);

    if (ok && !code.empty())
    {
        const auto ctx = vm_context(state, tx, block_ctx);
        evm::Message msg;
        msg.caller = tx.sender;
        msg.callee = target;
        msg.value = tx.value;
        msg.input = std::move(input);
        msg.is_create = tx.is_create();
        auto result = evm::execute_in(code, msg, ctx, overlay, gas_left, 0);
        ok = result.outcome == evm::Outcome::Success;
        out.receipt.return_data = result.return_data;
        out.receipt.error = result.frame.error;
        out.trace.root = std::move(result.frame);
        if (ok && tx.is_create())
            overlay.touch(target).code = result.return_data;
    }
    else
    {
        out.trace.root.callee = target;
        out.trace.root.caller = tx.sender;
        out.trace.root.value = tx.value;
        out.trace.root.input = tx.calldata();
        out.trace.root.is_create = tx.is_create();
        out.trace.root.outcome = ok ? evm::Outcome::Success : evm::Outcome::Revert;
        out.trace.root.error = out.receipt.error;
        if (ok && tx.is_create())
            overlay.touch(target);
    }

    if (ok)
    {
        evm::apply_delta(state, overlay.delta());
        out.receipt.status = ReceiptStatus::Success;
        if (tx.is_create())
            out.receipt.contract_address = target;
    }
    else
    {
        out.receipt.status = ReceiptStatus::Reverted;
        out.receipt.return_data.clear();
    }

    // Unused gas is refunded; the consumed part is burned.
    out.receipt.gas_used = tx.gas_offer - gas_left;
    state.accounts[tx.sender].balance += u256{gas_left} * tx.gas_price;
    return out;
}

Transition transition(WorldState state, const Transaction& tx, const Block& block_ctx)
{
    auto applied = apply_transaction(state, tx, block_ctx);
    return Transition{std::move(state), std::move(applied.receipt), std::move(applied.trace)};
}

Block pending_block(const WorldState& state, const BlockParams& params)
{
    Block b;
    b.number = state.head.number + 1;
    b.parent_hash = state.head.hash();
    b.gas_limit = params.gas_limit.value_or(state.params.gas_limit);
    b.difficulty = params.difficulty.value_or(state.params.difficulty);
    b.timestamp = params.timestamp.value_or(state.head.timestamp + state.params.block_time_quantum);
    b.coinbase = params.coinbase;
    b.base_fee = params.base_fee.value_or(state.params.base_fee);
    return b;
}

MinedBlock mine_block(WorldState& state, std::span<const Transaction> pool, const BlockParams& params)
{
    MinedBlock out;
    Block& block = out.block;
    block = pending_block(state, params);

    std::vector<const Transaction*> candidates;
    for (const auto& tx : pool)
        if (tx.gas_price >= block.base_fee)
            candidates.push_back(&tx);
    std::sort(candidates.begin(), candidates.end(), [](const Transaction* a, const Transaction* b) {
        if (a->gas_price != b->gas_price)
            return a->gas_price > b->gas_price;
        return a->hash < b->hash;
    });

    // Rescan from the top after each inclusion so a sender's later nonces
    // become eligible in price order.
    std::vector<bool> done(candidates.size(), false);
    for (bool progress = true; progress;)
    {
        progress = false;
        for (size_t i = 0; i < candidates.size(); ++i)
        {
            if (done[i])
                continue;
            const Transaction& tx = *candidates[i];
            const uint64_t nonce = state.nonce_of(tx.sender);
            if (tx.nonce < nonce)
            {
                done[i] = true;
                continue;
            }
            if (tx.nonce > nonce || block.gas_used + tx.gas_offer > block.gas_limit)
                continue;
            try
            {
                auto applied = apply_transaction(state, tx, block);
                block.gas_used += applied.receipt.gas_used;
                Transaction mined = tx;
                mined.block_included = block.number;
                block.transactions.push_back(std::move(mined));
                out.receipts.push_back(std::move(applied.receipt));
                out.traces.push_back(std::move(applied.trace));
                progress = true;
            }
            catch (const Error&)
            {
                // Invalid against the current state; never retried.
            }
            done[i] = true;
            if (progress)
                break;
        }
    }

    state.head = block;
    state.block_hashes.push_back(block.hash());
    return out;
}

std::vector<AppliedTransaction> apply_block(WorldState& state, const Block& block)
{
    auto reject = [&](const std::string& why) -> Error {
        return Error{"InvalidBlock", "block " + std::to_string(block.number) + ": " + why};
    };
    if (block.number != state.head.number + 1)
        throw reject("number does not follow head " + std::to_string(state.head.number));
    if (block.parent_hash != state.head.hash())
        throw reject("parent hash mismatch");
    if (block.timestamp <= state.head.timestamp)
        throw reject("timestamp not after parent");
    if (block.gas_used > block.gas_limit)
        throw reject("gas used exceeds limit");

    WorldState scratch = state;
    std::vector<AppliedTransaction> out;
    uint64_t gas_used = 0;
    for (const auto& tx : block.transactions)
    {
        if (tx.gas_price < block.base_fee)
            throw reject("transaction " + tx.hash.hex() + " priced below base fee");
        if (tx.hash != tx.compute_hash())
            throw reject("transaction " + tx.hash.hex() + " hash mismatch");
        try
        {
            out.push_back(apply_transaction(scratch, tx, block));
        }
        catch (const Error& e)
        {
            throw reject(e.what());
        }
        gas_used += out.back().receipt.gas_used;
    }
    if (gas_used != block.gas_used)
        throw reject("gas used mismatch");

    scratch.head = block;
    scratch.block_hashes.push_back(block.hash());
    state = std::move(scratch);
    return out;
}

WorldState make_genesis(const Genesis& genesis)
{
    WorldState state;
    state.params = genesis.params;
    for (const auto& ga : genesis.accounts)
    {
        if (ga.account.code.empty() && !ga.account.storage.empty())
            throw Error{"InvalidGenesis", "externally owned account " + ga.address.hex() + " has storage"};
        state.accounts[ga.address] = ga.account;
    }
    state.head.number = 0;
    state.head.gas_limit = genesis.params.gas_limit;
    state.head.difficulty = genesis.params.difficulty;
    state.head.timestamp = genesis.timestamp;
    state.head.base_fee = genesis.params.base_fee;
    state.block_hashes.push_back(state.head.hash());
    return state;
}

}  // namespace txcap
