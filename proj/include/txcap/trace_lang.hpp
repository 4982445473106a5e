// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/assembler.hpp>
#include <txcap/chain.hpp>

namespace txcap::trace
{
struct Assignment
{
    std::string lhs;
    std::string rhs;

    bool operator==(const Assignment&) const = default;
};

/// One transaction or inter-contract call:
///   Ψ: Contract.function (pre) [post]
/// with nested calls printed between the header and the post bracket.
struct TraceEntry
{
    uint64_t index = 1;
    std::string contract;
    std::string function;
    std::vector<Assignment> pre;
    std::vector<TraceEntry> children;
    bool reverted = false;
    /// Empty when reverted.
    std::vector<Assignment> post;

    bool operator==(const TraceEntry&) const = default;
};

struct TraceDoc
{
    std::vector<TraceEntry> entries;

    bool operator==(const TraceDoc&) const = default;
};

/// Throws Error{"SyntaxError"} with "line:col: expected ..." detail.
/// Newlines are ordinary whitespace; `#` starts a comment.
TraceDoc parse(std::string_view text);

/// Canonical form: two-space indentation per nesting level, one header per line.
std::string print(const TraceDoc& doc);

// --- values ----------------------------------------------------------------

/// Named parameters used in golden traces (A_d, A_b, V_1, ...).
struct ValueEnv
{
    std::map<std::string, u256, std::less<>> symbols;
};

struct Value
{
    enum class Kind
    {
        Amount,  // wei, after unit conversion
        Tagged,  // number with a unit outside wei/gwei/shannon/ether
        Bool,
        String,
        Text,    // anything the evaluator does not understand, compared verbatim
    };
    Kind kind = Kind::Text;
    u256 number = 0;
    std::string text;  // unit for Tagged, contents for String/Text

    bool operator==(const Value&) const = default;
};

/// Evaluates sums and differences of literals and symbols, e.g. "A_b - 1 ether".
Value evaluate(std::string_view omega, const ValueEnv& env);

struct Comparison
{
    bool ok = true;
    std::vector<std::string> mismatches;
};

/// Structure (entry count, nesting, names, REVERT placement, assignment names)
/// must match exactly; assignment values must evaluate equal.
Comparison compare(const TraceDoc& expected, const TraceDoc& actual, const ValueEnv& env);

// --- rendering executions --------------------------------------------------

/// Labels to show, each `name` or `name:unit`. Names are builtins
/// (msg.sender, msg.value, this.balance, msg.sender.balance), storage
/// variables, mapping entries `map(SYMBOL)` and function parameters.
struct Selection
{
    std::vector<std::string> pre;
    std::vector<std::string> post;
};

struct RenderStep
{
    const assembler::ContractProgram* program = nullptr;
    Address contract;
    std::string function;
    const Transaction* tx = nullptr;
    const Receipt* receipt = nullptr;
    const evm::ExecutionTrace* trace = nullptr;
    const WorldState* pre_state = nullptr;
    const WorldState* post_state = nullptr;
    /// Gas fees the sender paid before and after this step. msg.sender.balance
    /// is shown with these added back so balances read as in the source traces.
    u256 sender_fees_before = 0;
    u256 sender_fees_after = 0;
    Selection selection;
};

struct RenderContext
{
    /// Addresses shown by name instead of hex.
    std::map<Address, std::string> address_symbols;
    /// Code owners, used to name nested call entries.
    std::map<Address, const assembler::ContractProgram*> programs;
    /// Selections for nested entries keyed "Contract.function"; only
    /// msg.sender and msg.value are available inside a call.
    std::map<std::string, Selection> call_selections;
};

/// Throws Error{"UnknownVariable"} for a label that resolves to nothing.
TraceDoc render_execution(std::span<const RenderStep> steps, const RenderContext& ctx);

/// "0", "N ether" for whole ether, "N wei" otherwise.
std::string format_amount(const u256& wei);

/// True if any entry (at any depth) reverted.
bool has_revert(const TraceDoc& doc);

}  // namespace txcap::trace
