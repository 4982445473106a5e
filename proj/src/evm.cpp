// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/evm.hpp>

#include <algorithm>
#include <sstream>

namespace txcap::evm
{
namespace
{
constexpr size_t kMaxStack = 1024;
constexpr size_t kMaxMemory = 1 << 20;

struct OpTable
{
    std::array<OpInfo, 256> entries{};

    constexpr void set(Opcode op, std::string_view name, uint8_t pops, uint8_t pushes, uint8_t imm = 0)
    {
        entries[static_cast<uint8_t>(op)] = OpInfo{name, pops, pushes, imm};
    }
};

constexpr std::array<std::string_view, 32> kPushNames = {
    "PUSH1",  "PUSH2",  "PUSH3",  "PUSH4",  "PUSH5",  "PUSH6",  "PUSH7",  "PUSH8",
    "PUSH9",  "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16",
    "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24",
    "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
constexpr std::array<std::string_view, 16> kDupNames = {
    "DUP1", "DUP2",  "DUP3",  "DUP4",  "DUP5",  "DUP6",  "DUP7",  "DUP8",
    "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16"};
constexpr std::array<std::string_view, 16> kSwapNames = {
    "SWAP1", "SWAP2",  "SWAP3",  "SWAP4",  "SWAP5",  "SWAP6",  "SWAP7",  "SWAP8",
    "SWAP9", "SWAP10", "SWAP11", "SWAP12", "SWAP13", "SWAP14", "SWAP15", "SWAP16"};

constexpr OpTable make_table()
{
    OpTable t;
    t.set(Opcode::STOP, "STOP", 0, 0);
    t.set(Opcode::ADD, "ADD", 2, 1);
    t.set(Opcode::MUL, "MUL", 2, 1);
    t.set(Opcode::SUB, "SUB", 2, 1);
    t.set(Opcode::DIV, "DIV", 2, 1);
    t.set(Opcode::LT, "LT", 2, 1);
    t.set(Opcode::GT, "GT", 2, 1);
    t.set(Opcode::EQ, "EQ", 2, 1);
    t.set(Opcode::ISZERO, "ISZERO", 1, 1);
    t.set(Opcode::AND, "AND", 2, 1);
    t.set(Opcode::OR, "OR", 2, 1);
    t.set(Opcode::NOT, "NOT", 1, 1);
    t.set(Opcode::ADDRESS, "ADDRESS", 0, 1);
    t.set(Opcode::BALANCE, "BALANCE", 1, 1);
    t.set(Opcode::CALLER, "CALLER", 0, 1);
    t.set(Opcode::CALLVALUE, "CALLVALUE", 0, 1);
    t.set(Opcode::CALLDATALOAD, "CALLDATALOAD", 1, 1);
    t.set(Opcode::CALLDATASIZE, "CALLDATASIZE", 0, 1);
    t.set(Opcode::GASPRICE, "GASPRICE", 0, 1);
    t.set(Opcode::BLOCKHASH, "BLOCKHASH", 1, 1);
    t.set(Opcode::COINBASE, "COINBASE", 0, 1);
    t.set(Opcode::TIMESTAMP, "TIMESTAMP", 0, 1);
    t.set(Opcode::NUMBER, "NUMBER", 0, 1);
    t.set(Opcode::DIFFICULTY, "DIFFICULTY", 0, 1);
    t.set(Opcode::GASLIMIT, "GASLIMIT", 0, 1);
    t.set(Opcode::SELFBALANCE, "SELFBALANCE", 0, 1);
    t.set(Opcode::POP, "POP", 1, 0);
    t.set(Opcode::MLOAD, "MLOAD", 1, 1);
    t.set(Opcode::MSTORE, "MSTORE", 2, 0);
    t.set(Opcode::SLOAD, "SLOAD", 1, 1);
    t.set(Opcode::SSTORE, "SSTORE", 2, 0);
    t.set(Opcode::JUMP, "JUMP", 1, 0);
    t.set(Opcode::JUMPI, "JUMPI", 2, 0);
    t.set(Opcode::JUMPDEST, "JUMPDEST", 0, 0);
    for (unsigned n = 1; n <= 32; ++n)
        t.set(push_n(n), kPushNames[n - 1], 0, 1, static_cast<uint8_t>(n));
    for (unsigned n = 1; n <= 16; ++n)
    {
        t.set(dup_n(n), kDupNames[n - 1], static_cast<uint8_t>(n), static_cast<uint8_t>(n + 1));
        t.set(swap_n(n), kSwapNames[n - 1], static_cast<uint8_t>(n + 1), static_cast<uint8_t>(n + 1));
    }
    t.set(Opcode::LOG0, "LOG0", 2, 0);
    t.set(Opcode::CALL, "CALL", 7, 1);
    t.set(Opcode::RETURN, "RETURN", 2, 0);
    t.set(Opcode::STATICCALL, "STATICCALL", 6, 1);
    t.set(Opcode::REVERT, "REVERT", 2, 0);
    t.set(Opcode::SELFDESTRUCT, "SELFDESTRUCT", 1, 0);
    return t;
}

constexpr OpTable kTable = make_table();

struct Halt
{
    std::string error;
};

class Frame
{
public:
    Frame(BytesView code, const Message& msg, const VmContext& ctx, StateOverlay& state, uint64_t& gas_left,
          int depth)
      : code_{code}, msg_{msg}, ctx_{ctx}, state_{state}, gas_left_{gas_left}, depth_{depth}
    {
        frame_.callee = msg.callee;
        frame_.caller = msg.caller;
        frame_.value = msg.value;
        frame_.input = msg.input;
        frame_.is_create = msg.is_create;
        find_jumpdests();
    }

    ExecResult run()
    {
        ExecResult result;
        try
        {
            result.return_data = loop();
            result.outcome = Outcome::Success;
        }
        catch (const Halt& h)
        {
            frame_.error = h.error;
            result.outcome = Outcome::Revert;
            result.return_data = std::move(revert_data_);
        }
        frame_.outcome = result.outcome;
        result.frame = std::move(frame_);
        return result;
    }

private:
    void find_jumpdests()
    {
        jumpdests_.assign(code_.size(), false);
        for (size_t pc = 0; pc < code_.size(); ++pc)
        {
            const auto byte = code_[pc];
            if (byte == static_cast<uint8_t>(Opcode::JUMPDEST))
                jumpdests_[pc] = true;
            pc += kTable.entries[byte].immediate;
        }
    }

    u256 pop()
    {
        u256 v = std::move(stack_.back());
        stack_.pop_back();
        return v;
    }

    void push(u256 v)
    {
        if (stack_.size() >= kMaxStack)
            throw Halt{"StackOverflow"};
        stack_.push_back(std::move(v));
    }

    static size_t to_size(const u256& v)
    {
        if (v > kMaxMemory)
            throw Halt{"MemoryLimit"};
        return static_cast<size_t>(v);
    }

    void ensure_memory(size_t offset, size_t len)
    {
        if (len == 0)
            return;
        const size_t end = offset + len;
        if (end > kMaxMemory)
            throw Halt{"MemoryLimit"};
        if (memory_.size() < end)
            memory_.resize((end + 31) / 32 * 32, 0);
    }

    Bytes read_memory(const u256& off, const u256& len)
    {
        const size_t n = to_size(len);
        if (n == 0)
            return {};
        const size_t o = to_size(off);
        ensure_memory(o, n);
        return Bytes(memory_.begin() + static_cast<ptrdiff_t>(o), memory_.begin() + static_cast<ptrdiff_t>(o + n));
    }

    void jump_to(const u256& dest, size_t& pc)
    {
        if (dest >= code_.size() || !jumpdests_[static_cast<size_t>(dest)])
            throw Halt{"InvalidJump"};
        pc = static_cast<size_t>(dest);
    }

    u256 block_hash(const u256& number) const
    {
        const uint64_t current = ctx_.block->number;
        if (number >= current || !ctx_.block_hashes)
            return 0;
        const auto n = static_cast<uint64_t>(number);
        if (current - n > 256 || n >= ctx_.block_hashes->size())
            return 0;
        return (*ctx_.block_hashes)[n].to_word();
    }

    u256 calldata_word(const u256& offset) const
    {
        std::array<uint8_t, 32> buf{};
        if (offset < msg_.input.size())
        {
            const auto o = static_cast<size_t>(offset);
            const size_t n = std::min<size_t>(32, msg_.input.size() - o);
            std::copy_n(msg_.input.begin() + static_cast<ptrdiff_t>(o), n, buf.begin());
        }
        return word_from_be(buf);
    }

    u256 do_call(bool with_value)
    {
        pop();  // gas: the callee always receives the remaining budget
        const Address to = Address::from_word(pop());
        const u256 value = with_value ? pop() : u256{0};
        const u256 args_off = pop();
        const u256 args_len = pop();
        const u256 ret_off = pop();
        const u256 ret_len = pop();

        if ((msg_.is_static || !with_value) && value != 0)
            throw Halt{"StaticViolation"};

        Bytes input = read_memory(args_off, args_len);
        const size_t ret_n = to_size(ret_len);
        const size_t ret_o = ret_n ? to_size(ret_off) : 0;
        ensure_memory(ret_o, ret_n);

        if (depth_ + 1 > ctx_.max_depth)
            return 0;
        if (state_.balance(msg_.callee) < value)
            return 0;

        StateOverlay child = state_;
        if (value != 0)
            child.transfer(msg_.callee, to, value);

        const Account* callee_acc = child.find(to);
        if (!callee_acc || callee_acc->code.empty())
        {
            state_.merge(std::move(child));
            return 1;
        }

        const Bytes callee_code = callee_acc->code;
        Message sub;
        sub.caller = msg_.callee;
        sub.callee = to;
        sub.value = value;
        sub.input = std::move(input);
        sub.is_static = msg_.is_static || !with_value;

        Frame inner{callee_code, sub, ctx_, child, gas_left_, depth_ + 1};
        ExecResult r = inner.run();

        frame_.call_positions.push_back(frame_.opcodes.size() - 1);
        frame_.children.push_back(std::move(r.frame));

        const size_t copy_n = std::min(ret_n, r.return_data.size());
        std::copy_n(r.return_data.begin(), copy_n, memory_.begin() + static_cast<ptrdiff_t>(ret_o));

        if (r.outcome != Outcome::Success)
            return 0;
        state_.merge(std::move(child));
        return 1;
    }

    Bytes loop()
    {
        size_t pc = 0;
        while (pc < code_.size())
        {
            const uint8_t byte = code_[pc];
            const OpInfo& oi = kTable.entries[byte];
            if (oi.mnemonic.empty())
                throw Halt{"UnknownOpcode"};

            const auto op = static_cast<Opcode>(byte);
            frame_.opcodes.push_back(op);

            const uint64_t cost = ctx_.gas ? ctx_.gas->cost(byte) : 1;
            if (gas_left_ < cost)
                throw Halt{"OutOfGas"};
            gas_left_ -= cost;

            if (stack_.size() < oi.pops)
                throw Halt{"StackUnderflow"};

            size_t next = pc + 1 + oi.immediate;

            if (byte >= 0x60 && byte <= 0x7f)
            {
                if (pc + 1 + oi.immediate > code_.size())
                    throw Halt{"TruncatedPush"};
                push(word_from_be(code_.subspan(pc + 1, oi.immediate)));
                pc = next;
                continue;
            }
            if (byte >= 0x80 && byte <= 0x8f)
            {
                const size_t n = byte - 0x7f;
                push(stack_[stack_.size() - n]);
                pc = next;
                continue;
            }
            if (byte >= 0x90 && byte <= 0x9f)
            {
                const size_t n = byte - 0x8f;
                std::swap(stack_.back(), stack_[stack_.size() - 1 - n]);
                pc = next;
                continue;
            }

            switch (op)
            {
            case Opcode::STOP:
                return {};
            case Opcode::ADD:
            {
                const auto a = pop();
                const auto b = pop();
                push(a + b);
                break;
            }
            case Opcode::MUL:
            {
                const auto a = pop();
                const auto b = pop();
                push(a * b);
                break;
            }
            case Opcode::SUB:
            {
                const auto a = pop();
                const auto b = pop();
                push(a - b);
                break;
            }
            case Opcode::DIV:
            {
                const auto a = pop();
                const auto b = pop();
                push(b == 0 ? u256{0} : u256{a / b});
                break;
            }
            case Opcode::LT:
            {
                const auto a = pop();
                const auto b = pop();
                push(a < b ? 1 : 0);
                break;
            }
            case Opcode::GT:
            {
                const auto a = pop();
                const auto b = pop();
                push(a > b ? 1 : 0);
                break;
            }
            case Opcode::EQ:
            {
                const auto a = pop();
                const auto b = pop();
                push(a == b ? 1 : 0);
                break;
            }
            case Opcode::ISZERO:
                push(pop() == 0 ? 1 : 0);
                break;
            case Opcode::AND:
            {
                const auto a = pop();
                const auto b = pop();
                push(a & b);
                break;
            }
            case Opcode::OR:
            {
                const auto a = pop();
                const auto b = pop();
                push(a | b);
                break;
            }
            case Opcode::NOT:
                push(~pop());
                break;
            case Opcode::ADDRESS:
                push(msg_.callee.to_word());
                break;
            case Opcode::BALANCE:
                push(state_.balance(Address::from_word(pop())));
                break;
            case Opcode::CALLER:
                push(msg_.caller.to_word());
                break;
            case Opcode::CALLVALUE:
                push(msg_.value);
                break;
            case Opcode::CALLDATALOAD:
                push(calldata_word(pop()));
                break;
            case Opcode::CALLDATASIZE:
                push(msg_.input.size());
                break;
            case Opcode::GASPRICE:
                push(ctx_.tx_gas_price);
                break;
            case Opcode::BLOCKHASH:
                push(block_hash(pop()));
                break;
            case Opcode::COINBASE:
                push(ctx_.block->coinbase.to_word());
                break;
            case Opcode::TIMESTAMP:
                push(ctx_.block->timestamp);
                break;
            case Opcode::NUMBER:
                push(ctx_.block->number);
                break;
            case Opcode::DIFFICULTY:
                push(ctx_.block->difficulty);
                break;
            case Opcode::GASLIMIT:
                push(ctx_.block->gas_limit);
                break;
            case Opcode::SELFBALANCE:
                push(state_.balance(msg_.callee));
                break;
            case Opcode::POP:
                pop();
                break;
            case Opcode::MLOAD:
            {
                const size_t off = to_size(pop());
                ensure_memory(off, 32);
                push(word_from_be(BytesView{memory_}.subspan(off, 32)));
                break;
            }
            case Opcode::MSTORE:
            {
                const size_t off = to_size(pop());
                const auto v = pop();
                ensure_memory(off, 32);
                const auto be = word_to_be(v);
                std::copy(be.begin(), be.end(), memory_.begin() + static_cast<ptrdiff_t>(off));
                break;
            }
            case Opcode::SLOAD:
                push(state_.load(msg_.callee, pop()));
                break;
            case Opcode::SSTORE:
            {
                if (msg_.is_static)
                    throw Halt{"StaticViolation"};
                const auto key = pop();
                const auto v = pop();
                state_.store(msg_.callee, key, v);
                break;
            }
            case Opcode::JUMP:
                jump_to(pop(), next);
                break;
            case Opcode::JUMPI:
            {
                const auto dest = pop();
                const auto cond = pop();
                if (cond != 0)
                    jump_to(dest, next);
                break;
            }
            case Opcode::JUMPDEST:
                break;
            case Opcode::LOG0:
            {
                if (msg_.is_static)
                    throw Halt{"StaticViolation"};
                const auto off = pop();
                const auto len = pop();
                frame_.logs.push_back(read_memory(off, len));
                break;
            }
            case Opcode::CALL:
                push(do_call(true));
                break;
            case Opcode::STATICCALL:
                push(do_call(false));
                break;
            case Opcode::RETURN:
            {
                const auto off = pop();
                const auto len = pop();
                return read_memory(off, len);
            }
            case Opcode::REVERT:
            {
                const auto off = pop();
                const auto len = pop();
                revert_data_ = read_memory(off, len);
                throw Halt{"Revert"};
            }
            case Opcode::SELFDESTRUCT:
            {
                if (msg_.is_static)
                    throw Halt{"StaticViolation"};
                const Address beneficiary = Address::from_word(pop());
                const u256 amount = state_.balance(msg_.callee);
                if (beneficiary != msg_.callee)
                    state_.transfer(msg_.callee, beneficiary, amount);
                state_.destroy(msg_.callee);
                return {};
            }
            default:
                throw Halt{"UnknownOpcode"};
            }
            pc = next;
        }
        return {};
    }

    BytesView code_;
    const Message& msg_;
    const VmContext& ctx_;
    StateOverlay& state_;
    uint64_t& gas_left_;
    int depth_;

    std::vector<bool> jumpdests_;
    std::vector<u256> stack_;
    Bytes memory_;
    Bytes revert_data_;
    TraceFrame frame_;
};

void flatten_into(const TraceFrame& f, std::vector<Opcode>& out)
{
    size_t next_child = 0;
    for (size_t i = 0; i < f.opcodes.size(); ++i)
    {
        out.push_back(f.opcodes[i]);
        while (next_child < f.children.size() && f.call_positions[next_child] == i)
            flatten_into(f.children[next_child++], out);
    }
}
}  // namespace

const OpInfo& info(uint8_t byte) noexcept
{
    return kTable.entries[byte];
}

std::string_view mnemonic(Opcode op) noexcept
{
    return info(op).mnemonic;
}

std::optional<Opcode> from_mnemonic(std::string_view name) noexcept
{
    for (unsigned b = 0; b < 256; ++b)
        if (kTable.entries[b].mnemonic == name && !name.empty())
            return static_cast<Opcode>(b);
    return std::nullopt;
}

const std::vector<Opcode>& all_opcodes()
{
    static const std::vector<Opcode> ops = [] {
        std::vector<Opcode> v;
        for (unsigned b = 0; b < 256; ++b)
            if (is_known(static_cast<uint8_t>(b)))
                v.push_back(static_cast<Opcode>(b));
        return v;
    }();
    return ops;
}

std::vector<Opcode> flatten_trace(const TraceFrame& frame)
{
    std::vector<Opcode> out;
    flatten_into(frame, out);
    return out;
}

const Account* StateOverlay::find(const Address& a) const
{
    if (const auto it = dirty_.find(a); it != dirty_.end())
        return it->second ? &*it->second : nullptr;
    return base_->find(a);
}

Account& StateOverlay::touch(const Address& a)
{
    auto it = dirty_.find(a);
    if (it == dirty_.end())
    {
        const Account* existing = base_->find(a);
        it = dirty_.emplace(a, existing ? *existing : Account{}).first;
    }
    else if (!it->second)
    {
        it->second = Account{};
    }
    return *it->second;
}

void StateOverlay::destroy(const Address& a)
{
    dirty_[a] = std::nullopt;
}

u256 StateOverlay::balance(const Address& a) const
{
    const Account* acc = find(a);
    return acc ? acc->balance : u256{0};
}

u256 StateOverlay::load(const Address& a, const u256& key) const
{
    const Account* acc = find(a);
    if (!acc)
        return 0;
    const auto it = acc->storage.find(key);
    return it == acc->storage.end() ? u256{0} : it->second;
}

void StateOverlay::store(const Address& a, const u256& key, const u256& value)
{
    Account& acc = touch(a);
    if (value == 0)
        acc.storage.erase(key);
    else
        acc.storage[key] = value;
}

bool StateOverlay::transfer(const Address& from, const Address& to, const u256& amount)
{
    if (balance(from) < amount)
        return false;
    touch(from).balance -= amount;
    touch(to).balance += amount;
    return true;
}

void apply_delta(WorldState& state, const StateOverlay::Delta& delta)
{
    for (const auto& [addr, acc] : delta)
    {
        if (acc)
            state.accounts[addr] = *acc;
        else
            state.accounts.erase(addr);
    }
}

ExecResult execute_in(BytesView code, const Message& msg, const VmContext& ctx, StateOverlay& state,
                      uint64_t& gas_left, int depth)
{
    StateOverlay local = state;
    Frame frame{code, msg, ctx, local, gas_left, depth};
    ExecResult r = frame.run();
    if (r.outcome == Outcome::Success)
    {
        r.state_delta = local.delta();
        state.merge(std::move(local));
    }
    r.gas_left = gas_left;
    return r;
}

ExecResult execute(BytesView code, const Message& msg, const VmContext& ctx, const WorldState& state,
                   uint64_t gas, int depth)
{
    StateOverlay overlay{state};
    return execute_in(code, msg, ctx, overlay, gas, depth);
}

std::vector<Instruction> decode(BytesView code)
{
    std::vector<Instruction> out;
    for (size_t pc = 0; pc < code.size();)
    {
        const uint8_t byte = code[pc];
        const OpInfo& oi = kTable.entries[byte];
        if (oi.mnemonic.empty())
        {
            std::ostringstream os;
            os << "byte 0x" << std::hex << static_cast<int>(byte) << " at offset " << std::dec << pc;
            throw Error{"UnknownOpcode", os.str()};
        }
        if (pc + 1 + oi.immediate > code.size())
            throw Error{"TruncatedPush", "push at offset " + std::to_string(pc) + " runs past end of code"};
        Instruction ins;
        ins.offset = pc;
        ins.op = static_cast<Opcode>(byte);
        ins.immediate.assign(code.begin() + static_cast<ptrdiff_t>(pc + 1),
                             code.begin() + static_cast<ptrdiff_t>(pc + 1 + oi.immediate));
        out.push_back(std::move(ins));
        pc += 1 + oi.immediate;
    }
    return out;
}

std::string disassemble(BytesView code)
{
    std::string out;
    for (const auto& ins : decode(code))
    {
        out += mnemonic(ins.op);
        if (!ins.immediate.empty())
        {
            out += ' ';
            out += to_hex(ins.immediate);
        }
        out += '\n';
    }
    return out;
}

}  // namespace txcap::evm
