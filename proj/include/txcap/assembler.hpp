// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/evm.hpp>

#include <map>

namespace txcap::assembler
{
/// Symbolic instruction stream; jump targets are labels resolved by link().
class Assembly
{
public:
    struct Item
    {
        enum class Kind
        {
            Op,
            Push,
            PushLabel,
            Label,
        };
        Kind kind = Kind::Op;
        evm::Opcode op = evm::Opcode::STOP;
        Bytes data;
        std::string label;
    };

    Assembly& op(evm::Opcode o);
    /// Smallest PUSHn that holds `value` (PUSH1 for zero).
    Assembly& push(const u256& value);
    /// PUSHn with exactly `width` bytes.
    Assembly& push_bytes(BytesView data);
    /// PUSH2 of a label's offset.
    Assembly& push_label(std::string name);
    Assembly& label(std::string name);

    const std::vector<Item>& items() const noexcept { return items_; }

private:
    std::vector<Item> items_;
};

/// Resolves labels. Throws Error{"UndefinedLabel"} or Error{"DuplicateLabel"}.
Bytes link(const Assembly& assembly);

/// Text assembler for disassembler listings: one instruction per line,
/// `name:` defines a label, `PUSH2 @name` references one, `;` starts a comment.
Bytes assemble(std::string_view listing);

// --- contract language -----------------------------------------------------

enum class ValueType
{
    Uint,
    Bool,
    Address,
    String,
};

std::string_view to_string(ValueType t);

struct Expr
{
    enum class Kind
    {
        Number,
        String,
        Bool,
        Name,       // storage variable, local or parameter
        Index,      // mapping[key]
        Builtin,    // msg.sender, block.number, ...
        Call,       // balance(x), blockhash(x)
        Unary,      // !
        Binary,
    };
    Kind kind = Kind::Number;
    u256 number = 0;
    std::string text;  // name, builtin, operator or decoded string
    std::vector<Expr> args;

    bool operator==(const Expr&) const = default;
};

struct Stmt
{
    enum class Kind
    {
        Assign,
        Let,
        Require,
        If,
        Transfer,
        Call,
        Revert,
        Return,
        SelfDestruct,
        Log,
    };
    Kind kind = Kind::Revert;
    std::string target;           // assigned name, local name or called function
    std::optional<Expr> index;    // mapping key for Assign
    std::vector<Expr> exprs;      // operands in source order
    std::vector<Stmt> then_body;
    std::vector<Stmt> else_body;

    bool operator==(const Stmt&) const = default;
};

struct Param
{
    std::string name;
    ValueType type = ValueType::Uint;

    bool operator==(const Param&) const = default;
};

struct Function
{
    std::string name;
    std::vector<Param> params;
    bool payable = false;
    std::vector<Stmt> body;

    bool operator==(const Function&) const = default;
};

struct StorageVar
{
    std::string name;
    ValueType type = ValueType::Uint;
    bool is_mapping = false;
    ValueType key_type = ValueType::Address;

    bool operator==(const StorageVar&) const = default;
};

struct ContractProgram
{
    std::string name;
    std::vector<StorageVar> storage;
    Function constructor{"constructor", {}, false, {}};
    std::vector<Function> functions;
    std::optional<Function> fallback;

    const StorageVar* find_storage(std::string_view var) const;
    const Function* find_function(std::string_view fn) const;

    bool operator==(const ContractProgram&) const = default;
};

/// Parses one `.mvc` source. Throws Error{"SyntaxError"} with line:col detail.
ContractProgram parse_program(std::string_view source);

/// Storage slot of a scalar variable (its declaration index).
u256 storage_slot(const ContractProgram& program, std::string_view var);
/// Storage slot of mapping[key]: (index + 1) * 2^160 + key.
u256 mapping_slot(const ContractProgram& program, std::string_view var, const u256& key);

/// Left-aligned UTF-8 bytes in one word; throws if longer than 32 bytes.
u256 string_word(std::string_view text);
std::string word_string(const u256& word);

struct CompiledContract
{
    std::string name;
    Bytes init_code;
    Bytes runtime_code;
    std::map<std::string, Selector> selectors;
};

/// Init code (constructor followed by a runtime-code return). Deterministic.
/// Throws Error{"SelectorCollision"}, Error{"UndefinedLabel"} or
/// Error{"CompileError"} for unresolved names.
Bytes compile(const ContractProgram& program);
CompiledContract compile_contract(const ContractProgram& program);

/// Function name for a call's input, "fallback" when no selector matches.
std::string function_for_input(const ContractProgram& program, BytesView input);

/// Word-encoding of constructor/function arguments.
Bytes encode_args(std::span<const u256> words);

}  // namespace txcap::assembler
