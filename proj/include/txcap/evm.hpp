// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/state.hpp>

namespace txcap::evm
{
enum class Opcode : uint8_t
{
    STOP = 0x00,
    ADD = 0x01,
    MUL = 0x02,
    SUB = 0x03,
    DIV = 0x04,
    LT = 0x10,
    GT = 0x11,
    EQ = 0x14,
    ISZERO = 0x15,
    AND = 0x16,
    OR = 0x17,
    NOT = 0x19,
    ADDRESS = 0x30,
    BALANCE = 0x31,
    CALLER = 0x33,
    CALLVALUE = 0x34,
    CALLDATALOAD = 0x35,
    CALLDATASIZE = 0x36,
    GASPRICE = 0x3a,
    BLOCKHASH = 0x40,
    COINBASE = 0x41,
    TIMESTAMP = 0x42,
    NUMBER = 0x43,
    DIFFICULTY = 0x44,
    GASLIMIT = 0x45,
    SELFBALANCE = 0x47,
    POP = 0x50,
    MLOAD = 0x51,
    MSTORE = 0x52,
    SLOAD = 0x54,
    SSTORE = 0x55,
    JUMP = 0x56,
    JUMPI = 0x57,
    JUMPDEST = 0x5b,
    PUSH1 = 0x60,
    PUSH32 = 0x7f,
    DUP1 = 0x80,
    DUP16 = 0x8f,
    SWAP1 = 0x90,
    SWAP16 = 0x9f,
    LOG0 = 0xa0,
    CALL = 0xf1,
    RETURN = 0xf3,
    STATICCALL = 0xfa,
    REVERT = 0xfd,
    SELFDESTRUCT = 0xff,
};

struct OpInfo
{
    std::string_view mnemonic;  // empty for bytes outside the supported set
    uint8_t pops = 0;
    uint8_t pushes = 0;
    uint8_t immediate = 0;  // PUSHn payload length
};

/// Static arity table indexed by opcode byte.
const OpInfo& info(uint8_t byte) noexcept;
inline const OpInfo& info(Opcode op) noexcept
{
    return info(static_cast<uint8_t>(op));
}
inline bool is_known(uint8_t byte) noexcept
{
    return !info(byte).mnemonic.empty();
}
std::string_view mnemonic(Opcode op) noexcept;
std::optional<Opcode> from_mnemonic(std::string_view name) noexcept;
/// All supported opcodes in byte order.
const std::vector<Opcode>& all_opcodes();

constexpr Opcode push_n(unsigned n)
{
    return static_cast<Opcode>(0x5f + n);
}
constexpr Opcode dup_n(unsigned n)
{
    return static_cast<Opcode>(0x7f + n);
}
constexpr Opcode swap_n(unsigned n)
{
    return static_cast<Opcode>(0x8f + n);
}

enum class Outcome
{
    Success,
    Revert,
};

/// One call frame: the opcodes executed by `callee`, in order, with nested
/// frames attached after the CALL/STATICCALL opcode that produced them.
struct TraceFrame
{
    Address callee;
    Address caller;
    u256 value = 0;
    Bytes input;
    bool is_create = false;
    std::vector<Opcode> opcodes;
    /// call_positions[i] is the index in `opcodes` of the call that produced children[i].
    std::vector<size_t> call_positions;
    std::vector<TraceFrame> children;
    std::vector<Bytes> logs;
    Outcome outcome = Outcome::Success;
    std::string error;

    bool operator==(const TraceFrame&) const = default;
};

/// The full execution record of one transaction (the T_c stack).
struct ExecutionTrace
{
    TraceFrame root;

    bool operator==(const ExecutionTrace&) const = default;
};

/// Depth-first in-order opcode sequence; children follow their call opcode.
std::vector<Opcode> flatten_trace(const TraceFrame& frame);
inline std::vector<Opcode> flatten_trace(const ExecutionTrace& trace)
{
    return flatten_trace(trace.root);
}

/// Copy-on-write account view over a base WorldState.
class StateOverlay
{
public:
    explicit StateOverlay(const WorldState& base) : base_{&base} {}

    const Account* find(const Address& a) const;
    Account& touch(const Address& a);
    void destroy(const Address& a);

    u256 balance(const Address& a) const;
    u256 load(const Address& a, const u256& key) const;
    void store(const Address& a, const u256& key, const u256& value);
    bool transfer(const Address& from, const Address& to, const u256& amount);

    /// Changed accounts; nullopt marks a destroyed account.
    using Delta = std::map<Address, std::optional<Account>>;
    const Delta& delta() const noexcept { return dirty_; }
    Delta take_delta() { return std::move(dirty_); }
    void merge(StateOverlay&& child) { dirty_ = std::move(child.dirty_); }
    const WorldState& base() const noexcept { return *base_; }

private:
    const WorldState* base_;
    Delta dirty_;
};

void apply_delta(WorldState& state, const StateOverlay::Delta& delta);

struct VmContext
{
    /// Block the execution happens in (NUMBER, TIMESTAMP, COINBASE, ...).
    const Block* block = nullptr;
    uint64_t tx_gas_price = 0;
    /// Canonical hashes by block number, for BLOCKHASH.
    const std::vector<Hash32>* block_hashes = nullptr;
    const GasSchedule* gas = nullptr;
    int max_depth = 64;
};

struct Message
{
    Address caller;
    Address callee;
    u256 value = 0;
    Bytes input;
    bool is_static = false;
    bool is_create = false;
};

struct ExecResult
{
    Outcome outcome = Outcome::Success;
    Bytes return_data;
    TraceFrame frame;
    /// Empty whenever the outcome is Revert.
    StateOverlay::Delta state_delta;
    uint64_t gas_left = 0;
};

/// Runs `code` for `msg` against `state`. Value transfer for the message is the
/// caller's responsibility. Every failure (stack underflow, out of gas, bad
/// jump, unknown opcode, depth cap) turns into a Revert outcome.
ExecResult execute(BytesView code, const Message& msg, const VmContext& ctx, const WorldState& state,
                   uint64_t gas, int depth = 0);

/// Lower-level entry used by the chain: runs against an existing overlay and
/// merges into it on success.
ExecResult execute_in(BytesView code, const Message& msg, const VmContext& ctx, StateOverlay& state,
                      uint64_t& gas_left, int depth);

struct Instruction
{
    size_t offset = 0;
    Opcode op = Opcode::STOP;
    Bytes immediate;

    bool operator==(const Instruction&) const = default;
};

/// Splits bytecode into instructions. Throws Error{"UnknownOpcode"} or
/// Error{"TruncatedPush"} for code that does not decode.
std::vector<Instruction> decode(BytesView code);

/// Listing with one `MNEMONIC [0xIMM]` per line.
std::string disassemble(BytesView code);

}  // namespace txcap::evm
