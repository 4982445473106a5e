// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/evm.hpp>

namespace txcap
{
enum class ReceiptStatus
{
    Success,
    Reverted,
};

struct Receipt
{
    ReceiptStatus status = ReceiptStatus::Success;
    uint64_t gas_used = 0;
    Hash32 tx_hash;
    std::optional<Address> contract_address;
    Bytes return_data;
    /// VM halt reason for Reverted receipts ("Revert", "OutOfGas", ...).
    std::string error;

    bool operator==(const Receipt&) const = default;
};

struct AppliedTransaction
{
    Receipt receipt;
    evm::ExecutionTrace trace;
};

/// The state transition function Υ. Mutates `state` in place; on a thrown
/// Error (NonceMismatch, InsufficientFunds, IntrinsicGasTooLow,
/// UnknownRecipientCode) the state is left untouched.
AppliedTransaction apply_transaction(WorldState& state, const Transaction& tx, const Block& block_ctx);

struct Transition
{
    WorldState state;
    Receipt receipt;
    evm::ExecutionTrace trace;
};

/// Value-semantics form of apply_transaction.
Transition transition(WorldState state, const Transaction& tx, const Block& block_ctx);

/// Overrides for the next block; unset fields come from the chain params.
struct BlockParams
{
    Address coinbase;
    std::optional<uint64_t> gas_limit;
    std::optional<uint64_t> base_fee;
    std::optional<uint64_t> difficulty;
    std::optional<uint64_t> timestamp;
};

/// Header of the block that would follow the current head (no transactions).
Block pending_block(const WorldState& state, const BlockParams& params = {});

struct MinedBlock
{
    Block block;
    std::vector<Receipt> receipts;
    std::vector<evm::ExecutionTrace> traces;
};

/// Assembles and applies the next block: highest gas price first, ties by
/// ascending hash, skipping anything below the base fee or over the gas limit.
MinedBlock mine_block(WorldState& state, std::span<const Transaction> pool, const BlockParams& params = {});

/// Validates and replays a block produced elsewhere. Throws Error{"InvalidBlock"}.
std::vector<AppliedTransaction> apply_block(WorldState& state, const Block& block);

struct GenesisAccount
{
    Address address;
    Account account;
};

struct Genesis
{
    ChainParams params;
    std::vector<GenesisAccount> accounts;
    uint64_t timestamp = 0;
};

WorldState make_genesis(const Genesis& genesis);

/// Contract-creation payload: 4-byte big-endian init length ‖ init code ‖ constructor args.
Bytes make_deploy_payload(BytesView init_code, BytesView ctor_args = {});

struct DeployPayload
{
    Bytes init_code;
    Bytes ctor_args;
};
DeployPayload split_deploy_payload(BytesView payload);

}  // namespace txcap
