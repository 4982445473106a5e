// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

// Random inputs shared by the unit tests and the acceptance runner.

#pragma once

#include <txcap/assembler.hpp>
#include <txcap/chain.hpp>
#include <txcap/trace_lang.hpp>

#include <random>
#include <sstream>

namespace txcap::testing
{
class Rng
{
public:
    explicit Rng(uint64_t seed) : gen_{seed} {}

    uint64_t below(uint64_t n) { return n == 0 ? 0 : std::uniform_int_distribution<uint64_t>{0, n - 1}(gen_); }
    uint64_t range(uint64_t lo, uint64_t hi) { return std::uniform_int_distribution<uint64_t>{lo, hi}(gen_); }
    bool chance(double p) { return std::bernoulli_distribution{p}(gen_); }
    double unit() { return std::uniform_real_distribution<double>{0.0, 1.0}(gen_); }
    u256 word()
    {
        u256 w = 0;
        for (int i = 0; i < 4; ++i)
            w = (w << 64) | gen_();
        return w;
    }
    template <typename T>
    const T& pick(const std::vector<T>& v)
    {
        return v[below(v.size())];
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

inline Address numbered_address(uint64_t n, uint8_t tag = 0xaa)
{
    Address a;
    a.bytes[0] = tag;
    for (int i = 0; i < 8; ++i)
        a.bytes[19 - i] = static_cast<uint8_t>(n >> (8 * i));
    return a;
}

// --- contracts -----------------------------------------------------------------

struct GeneratedFunction
{
    std::string name;
    size_t params = 0;
    bool payable = false;
    /// The function reads a σ-nondeterministic source on entry.
    bool reads_sigma = false;
};

struct GeneratedContract
{
    std::string source;
    std::vector<GeneratedFunction> functions;
};

/// Source expressions for the eight σ sources.
inline const std::vector<std::string>& sigma_expressions()
{
    static const std::vector<std::string> e = {"block.number",     "block.timestamp", "block.coinbase",
                                               "block.difficulty", "block.gaslimit",  "tx.gasprice",
                                               "balance(msg.sender)", "blockhash(1)"};
    return e;
}

/// A random contract over the deterministic subset (storage, mappings,
/// arithmetic, msg.sender, msg.value, this.balance, require, if/else,
/// transfers back to the caller). Functions listed in `sigma_functions`
/// additionally store a σ source into storage before anything else.
inline GeneratedContract random_contract(Rng& rng, const std::string& name, size_t n_functions = 4,
                                         std::vector<size_t> sigma_functions = {})
{
    GeneratedContract out;
    std::ostringstream src;
    src << "contract " << name << " {\n";
    const size_t n_vars = rng.range(1, 4);
    for (size_t i = 0; i < n_vars; ++i)
        src << "    storage u" << i << ": uint;\n";
    src << "    storage flag: bool;\n";
    src << "    mapping credit: address => uint;\n";

    std::function<std::string(size_t, int)> expr = [&](size_t params, int depth) -> std::string {
        const uint64_t k = depth > 2 ? rng.below(4) : rng.below(7);
        switch (k)
        {
        case 0: return std::to_string(rng.below(1000));
        case 1: return "u" + std::to_string(rng.below(n_vars));
        case 2: return params ? "p" + std::to_string(rng.below(params)) : std::string{"msg.value"};
        case 3: return rng.chance(0.5) ? "credit[msg.sender]" : "this.balance";
        default:
        {
            static const std::vector<std::string> ops = {"+", "-", "*", "/"};
            return "(" + expr(params, depth + 1) + " " + rng.pick(ops) + " " + expr(params, depth + 1) + ")";
        }
        }
    };
    auto cond = [&](size_t params) {
        static const std::vector<std::string> cmp = {"<", ">", "==", "!=", "<=", ">="};
        return expr(params, 1) + " " + rng.pick(cmp) + " " + expr(params, 1);
    };
    std::function<void(std::ostringstream&, size_t, int, const std::string&)> stmts =
        [&](std::ostringstream& o, size_t params, int depth, const std::string& indent) {
            const size_t n = rng.range(1, 4);
            for (size_t i = 0; i < n; ++i)
            {
                const uint64_t k = depth > 1 ? rng.below(4) : rng.below(6);
                switch (k)
                {
                case 0:
                    o << indent << "u" << rng.below(n_vars) << " = " << expr(params, 0) << ";\n";
                    break;
                case 1:
                    o << indent << "credit[msg.sender] = credit[msg.sender] + " << expr(params, 1) << ";\n";
                    break;
                case 2:
                    o << indent << "flag = " << cond(params) << ";\n";
                    break;
                case 3:
                    o << indent << "require " << (rng.chance(0.8) ? "u0 < 1000000000000" : cond(params)) << ";\n";
                    break;
                case 4:
                    o << indent << "if " << cond(params) << " {\n";
                    stmts(o, params, depth + 1, indent + "    ");
                    o << indent << "} else {\n";
                    stmts(o, params, depth + 1, indent + "    ");
                    o << indent << "}\n";
                    break;
                default:
                    o << indent << "if this.balance > " << rng.below(50) << " {\n"
                      << indent << "    transfer msg.sender, " << rng.range(1, 20) << " wei;\n"
                      << indent << "}\n";
                    break;
                }
            }
        };

    for (size_t f = 0; f < n_functions; ++f)
    {
        GeneratedFunction fn;
        fn.name = "f" + std::to_string(f);
        fn.params = rng.below(3);
        fn.payable = rng.chance(0.5);
        fn.reads_sigma = std::find(sigma_functions.begin(), sigma_functions.end(), f) != sigma_functions.end();
        src << "    function " << fn.name;
        if (fn.params)
        {
            src << "(";
            for (size_t p = 0; p < fn.params; ++p)
                src << (p ? ", " : "") << "p" << p << ": uint";
            src << ")";
        }
        if (fn.payable)
            src << " payable";
        src << " {\n";
        if (fn.reads_sigma)
            src << "        u0 = " << rng.pick(sigma_expressions()) << ";\n";
        std::ostringstream body;
        stmts(body, fn.params, 0, "        ");
        src << body.str() << "    }\n";
        out.functions.push_back(fn);
    }
    src << "}\n";
    out.source = src.str();
    return out;
}

// --- trace documents -----------------------------------------------------------

inline std::string random_omega(Rng& rng, int depth = 0)
{
    static const std::vector<std::string> atoms = {"A_d",     "A_b",   "V_1",    "0",      "42",
                                                   "1 ether", "3 wei", "true",   "false",  "70 gwei",
                                                   "0xec12",  "x.y",   "\"a, b\"", "\"S N\"", "314159 SN\xd0\xa0"};
    switch (depth > 1 ? 0 : rng.below(4))
    {
    case 1: return random_omega(rng, depth + 1) + (rng.chance(0.5) ? " + " : " - ") + random_omega(rng, depth + 1);
    case 2: return "f(" + random_omega(rng, depth + 1) + ", " + random_omega(rng, depth + 1) + ")";
    case 3: return "[" + random_omega(rng, depth + 1) + "]";
    default: return rng.pick(atoms);
    }
}

inline std::vector<trace::Assignment> random_assignments(Rng& rng)
{
    static const std::vector<std::string> names = {"msg.sender", "msg.value", "this.balance", "owner",
                                                   "balanceOf(A_d)", "deposited_sem", "x"};
    std::vector<trace::Assignment> out(rng.below(4));
    for (auto& a : out)
    {
        a.lhs = rng.pick(names);
        a.rhs = random_omega(rng);
    }
    return out;
}

inline trace::TraceEntry random_entry(Rng& rng, uint64_t& next_index, int depth)
{
    static const std::vector<std::string> contracts = {"Foo", "Bar", "PiggyBank", "Token_2"};
    static const std::vector<std::string> functions = {"deposit", "withdraw", "fallback", "constructor", "sell"};
    trace::TraceEntry e;
    e.index = next_index++;
    e.contract = rng.pick(contracts);
    e.function = rng.pick(functions);
    e.pre = random_assignments(rng);
    if (depth < 2)
    {
        const size_t kids = rng.chance(0.3) ? rng.range(1, 2) : 0;
        for (size_t i = 0; i < kids; ++i)
            e.children.push_back(random_entry(rng, next_index, depth + 1));
    }
    e.reverted = rng.chance(0.3);
    if (!e.reverted)
        e.post = random_assignments(rng);
    return e;
}

inline trace::TraceDoc random_doc(Rng& rng)
{
    trace::TraceDoc d;
    uint64_t next = 1;
    const size_t n = rng.range(1, 5);
    for (size_t i = 0; i < n; ++i)
        d.entries.push_back(random_entry(rng, next, 0));
    return d;
}

// --- traces --------------------------------------------------------------------

/// Random nested frame; `depth` bounds nesting. Opcodes drawn from the full table.
inline evm::TraceFrame random_frame(Rng& rng, int depth = 0)
{
    const auto& all = evm::all_opcodes();
    evm::TraceFrame f;
    const size_t n = rng.below(12);
    for (size_t i = 0; i < n; ++i)
    {
        f.opcodes.push_back(rng.chance(0.1) ? rng.pick(all) : rng.pick(std::vector<evm::Opcode>{
                                                                  evm::Opcode::ADD, evm::Opcode::PUSH1,
                                                                  evm::Opcode::SSTORE, evm::Opcode::CALLER}));
        if (depth < 3 && rng.chance(0.1))
        {
            f.opcodes.push_back(evm::Opcode::CALL);
            f.call_positions.push_back(f.opcodes.size() - 1);
            f.children.push_back(random_frame(rng, depth + 1));
        }
    }
    return f;
}

}  // namespace txcap::testing
