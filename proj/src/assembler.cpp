// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/assembler.hpp>

#include <cctype>
#include <set>
#include <sstream>

namespace txcap::assembler
{
using evm::Opcode;

Assembly& Assembly::op(Opcode o)
{
    items_.push_back(Item{Item::Kind::Op, o, {}, {}});
    return *this;
}

Assembly& Assembly::push(const u256& value)
{
    const auto be = word_to_be(value);
    size_t first = 0;
    while (first < 31 && be[first] == 0)
        ++first;
    return push_bytes(BytesView{be}.subspan(first));
}

Assembly& Assembly::push_bytes(BytesView data)
{
    if (data.empty() || data.size() > 32)
        throw Error{"CompileError", "push width must be 1..32 bytes"};
    items_.push_back(Item{Item::Kind::Push, evm::push_n(static_cast<unsigned>(data.size())),
                          Bytes(data.begin(), data.end()), {}});
    return *this;
}

Assembly& Assembly::push_label(std::string name)
{
    items_.push_back(Item{Item::Kind::PushLabel, Opcode{0x61}, {}, std::move(name)});
    return *this;
}

Assembly& Assembly::label(std::string name)
{
    items_.push_back(Item{Item::Kind::Label, Opcode::JUMPDEST, {}, std::move(name)});
    return *this;
}

Bytes link(const Assembly& assembly)
{
    std::map<std::string, size_t> offsets;
    size_t pc = 0;
    for (const auto& item : assembly.items())
    {
        switch (item.kind)
        {
        case Assembly::Item::Kind::Op:
        case Assembly::Item::Kind::Label:
            if (item.kind == Assembly::Item::Kind::Label && !offsets.emplace(item.label, pc).second)
                throw Error{"DuplicateLabel", item.label};
            pc += 1;
            break;
        case Assembly::Item::Kind::Push:
            pc += 1 + item.data.size();
            break;
        case Assembly::Item::Kind::PushLabel:
            pc += 3;
            break;
        }
    }
    if (pc > 0xffff)
        throw Error{"CompileError", "code exceeds 64 KiB"};

    Bytes out;
    out.reserve(pc);
    for (const auto& item : assembly.items())
    {
        switch (item.kind)
        {
        case Assembly::Item::Kind::Op:
        case Assembly::Item::Kind::Label:
            out.push_back(static_cast<uint8_t>(item.op));
            break;
        case Assembly::Item::Kind::Push:
            out.push_back(static_cast<uint8_t>(item.op));
            out.insert(out.end(), item.data.begin(), item.data.end());
            break;
        case Assembly::Item::Kind::PushLabel:
        {
            const auto it = offsets.find(item.label);
            if (it == offsets.end())
                throw Error{"UndefinedLabel", item.label};
            out.push_back(0x61);
            out.push_back(static_cast<uint8_t>(it->second >> 8));
            out.push_back(static_cast<uint8_t>(it->second & 0xff));
            break;
        }
        }
    }
    return out;
}

Bytes assemble(std::string_view listing)
{
    Assembly a;
    std::istringstream in{std::string{listing}};
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto semi = line.find(';'); semi != std::string::npos)
            line.erase(semi);
        std::istringstream ls{line};
        std::string word;
        if (!(ls >> word))
            continue;
        if (word.back() == ':')
        {
            // A label is a JUMPDEST bound to a name.
            a.label(word.substr(0, word.size() - 1));
            continue;
        }
        const auto op = evm::from_mnemonic(word);
        if (!op)
            throw Error{"SyntaxError", "line " + std::to_string(line_no) + ": unknown mnemonic '" + word + "'"};
        const auto width = evm::info(*op).immediate;
        std::string imm;
        ls >> imm;
        if (width == 0)
        {
            if (!imm.empty())
                throw Error{"SyntaxError", "line " + std::to_string(line_no) + ": " + word + " takes no operand"};
            a.op(*op);
            continue;
        }
        if (imm.empty())
            throw Error{"SyntaxError", "line " + std::to_string(line_no) + ": " + word + " needs an operand"};
        if (imm[0] == '@')
        {
            if (width != 2)
                throw Error{"SyntaxError", "line " + std::to_string(line_no) + ": labels need PUSH2"};
            a.push_label(imm.substr(1));
            continue;
        }
        Bytes data = from_hex(imm);
        if (data.size() > width)
            throw Error{"SyntaxError", "line " + std::to_string(line_no) + ": operand wider than " + word};
        data.insert(data.begin(), width - data.size(), 0);
        a.push_bytes(data);
    }
    return link(a);
}

std::string_view to_string(ValueType t)
{
    switch (t)
    {
    case ValueType::Uint:
        return "uint";
    case ValueType::Bool:
        return "bool";
    case ValueType::Address:
        return "address";
    case ValueType::String:
        return "string";
    }
    return "uint";
}

const StorageVar* ContractProgram::find_storage(std::string_view var) const
{
    for (const auto& s : storage)
        if (s.name == var)
            return &s;
    return nullptr;
}

const Function* ContractProgram::find_function(std::string_view fn) const
{
    if (fn == "constructor")
        return &constructor;
    if (fn == "fallback")
        return fallback ? &*fallback : nullptr;
    for (const auto& f : functions)
        if (f.name == fn)
            return &f;
    return nullptr;
}

u256 string_word(std::string_view text)
{
    if (text.size() > 32)
        throw Error{"CompileError", "string literal longer than 32 bytes"};
    std::array<uint8_t, 32> buf{};
    std::copy(text.begin(), text.end(), buf.begin());
    return word_from_be(buf);
}

std::string word_string(const u256& word)
{
    const auto be = word_to_be(word);
    size_t end = 32;
    while (end > 0 && be[end - 1] == 0)
        --end;
    return std::string(be.begin(), be.begin() + static_cast<ptrdiff_t>(end));
}

namespace
{
// ---- lexer ----------------------------------------------------------------

struct Token
{
    enum class Kind
    {
        Ident,
        Number,
        String,
        Punct,
        End,
    };
    Kind kind = Kind::End;
    std::string text;
    u256 number = 0;
    size_t line = 1;
    size_t col = 1;
};

class Lexer
{
public:
    explicit Lexer(std::string_view src) : src_{src} {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;)
        {
            skip_space();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size())
            {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            {
                t.kind = Token::Kind::Ident;
                // Dotted builtins (msg.sender) are lexed as one identifier.
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '.'))
                    t.text += advance();
            }
            else if (std::isdigit(static_cast<unsigned char>(c)))
            {
                t.kind = Token::Kind::Number;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                {
                    const char d = advance();
                    if (d != '_')
                        t.text += d;
                }
                try
                {
                    t.number = parse_u256(t.text);
                }
                catch (const Error&)
                {
                    fail(t, "malformed number '" + t.text + "'");
                }
            }
            else if (c == '"')
            {
                t.kind = Token::Kind::String;
                advance();
                while (pos_ < src_.size() && src_[pos_] != '"')
                {
                    if (src_[pos_] == '\n')
                        fail(t, "unterminated string");
                    if (src_[pos_] == '\\' && pos_ + 1 < src_.size())
                        advance();
                    t.text += advance();
                }
                if (pos_ >= src_.size())
                    fail(t, "unterminated string");
                advance();
            }
            else
            {
                t.kind = Token::Kind::Punct;
                static constexpr std::string_view two[] = {"==", "!=", "<=", ">=", "&&", "||", "=>"};
                for (auto p : two)
                    if (src_.substr(pos_, 2) == p)
                    {
                        t.text = std::string{p};
                        advance();
                        advance();
                        break;
                    }
                if (t.text.empty())
                {
                    if (std::string_view{"{}()[];,=<>+-*/!:"}.find(c) == std::string_view::npos)
                        fail(t, std::string{"unexpected character '"} + c + "'");
                    t.text = std::string(1, advance());
                }
            }
            out.push_back(std::move(t));
        }
    }

    [[noreturn]] static void fail(const Token& at, const std::string& what)
    {
        throw Error{"SyntaxError", std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + what};
    }

private:
    char advance()
    {
        const char c = src_[pos_++];
        if (c == '\n')
        {
            ++line_;
            col_ = 1;
        }
        else
        {
            ++col_;
        }
        return c;
    }

    void skip_space()
    {
        while (pos_ < src_.size())
        {
            if (std::isspace(static_cast<unsigned char>(src_[pos_])))
                advance();
            else if (src_.substr(pos_, 2) == "//" || src_[pos_] == '#')
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            else
                break;
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    size_t line_ = 1;
    size_t col_ = 1;
};

// ---- parser ---------------------------------------------------------------

const std::set<std::string, std::less<>> kBuiltins = {
    "msg.sender",     "msg.value",        "this",       "this.balance", "block.number", "block.timestamp",
    "block.coinbase", "block.difficulty", "block.gaslimit", "tx.gasprice", "calldata.size"};

std::optional<u256> unit_multiplier(std::string_view unit)
{
    if (unit == "wei")
        return u256{1};
    if (unit == "gwei" || unit == "shannon")
        return u256{kWeiPerShannon};
    if (unit == "ether")
        return kWeiPerEther;
    return std::nullopt;
}

class Parser
{
public:
    explicit Parser(std::vector<Token> tokens) : toks_{std::move(tokens)} {}

    ContractProgram program()
    {
        ContractProgram p;
        expect_word("contract");
        p.name = ident("contract name");
        expect("{");
        bool have_ctor = false;
        while (!accept("}"))
        {
            const Token& t = peek();
            if (accept_word("storage"))
            {
                StorageVar v;
                v.name = ident("storage variable");
                expect(":");
                v.type = type();
                expect(";");
                add_storage(p, std::move(v), t);
            }
            else if (accept_word("mapping"))
            {
                StorageVar v;
                v.is_mapping = true;
                v.name = ident("mapping name");
                expect(":");
                v.key_type = type();
                expect("=>");
                v.type = type();
                expect(";");
                add_storage(p, std::move(v), t);
            }
            else if (accept_word("constructor"))
            {
                if (have_ctor)
                    Lexer::fail(t, "duplicate constructor");
                have_ctor = true;
                p.constructor = function_rest("constructor");
            }
            else if (accept_word("function"))
            {
                const std::string name = ident("function name");
                if (name == "constructor" || name == "fallback")
                    Lexer::fail(t, "reserved function name '" + name + "'");
                p.functions.push_back(function_rest(name));
            }
            else if (accept_word("fallback"))
            {
                if (p.fallback)
                    Lexer::fail(t, "duplicate fallback");
                p.fallback = function_rest("fallback");
            }
            else
            {
                Lexer::fail(t, "expected storage, mapping, constructor, function or fallback");
            }
        }
        if (peek().kind != Token::Kind::End)
            Lexer::fail(peek(), "trailing input after contract");
        return p;
    }

private:
    static void add_storage(ContractProgram& p, StorageVar v, const Token& at)
    {
        if (p.find_storage(v.name))
            Lexer::fail(at, "duplicate storage variable '" + v.name + "'");
        p.storage.push_back(std::move(v));
    }

    Function function_rest(std::string name)
    {
        Function f;
        f.name = std::move(name);
        if (accept("("))
        {
            if (!accept(")"))
            {
                do
                {
                    Param prm;
                    prm.name = ident("parameter name");
                    expect(":");
                    prm.type = type();
                    f.params.push_back(std::move(prm));
                } while (accept(","));
                expect(")");
            }
        }
        f.payable = accept_word("payable");
        f.body = block();
        return f;
    }

    ValueType type()
    {
        const Token& t = peek();
        const std::string w = ident("type");
        if (w == "uint")
            return ValueType::Uint;
        if (w == "bool")
            return ValueType::Bool;
        if (w == "address")
            return ValueType::Address;
        if (w == "string")
            return ValueType::String;
        Lexer::fail(t, "unknown type '" + w + "'");
    }

    std::vector<Stmt> block()
    {
        expect("{");
        std::vector<Stmt> out;
        while (!accept("}"))
            out.push_back(statement());
        return out;
    }

    Stmt statement()
    {
        Stmt s;
        if (accept_word("require") || accept_word("assert"))
        {
            s.kind = Stmt::Kind::Require;
            s.exprs.push_back(expr());
        }
        else if (accept_word("if"))
        {
            return if_rest();
        }
        else if (accept_word("transfer"))
        {
            s.kind = Stmt::Kind::Transfer;
            s.exprs.push_back(expr());
            expect(",");
            s.exprs.push_back(expr());
        }
        else if (accept_word("call"))
        {
            s.kind = Stmt::Kind::Call;
            s.exprs.push_back(expr());
            expect(",");
            s.target = ident("function name");
            expect(",");
            s.exprs.push_back(expr());
            while (accept(","))
                s.exprs.push_back(expr());
        }
        else if (accept_word("revert"))
        {
            s.kind = Stmt::Kind::Revert;
        }
        else if (accept_word("return"))
        {
            s.kind = Stmt::Kind::Return;
            s.exprs.push_back(expr());
        }
        else if (accept_word("selfdestruct"))
        {
            s.kind = Stmt::Kind::SelfDestruct;
            s.exprs.push_back(expr());
        }
        else if (accept_word("log"))
        {
            s.kind = Stmt::Kind::Log;
            s.exprs.push_back(expr());
        }
        else if (accept_word("let"))
        {
            s.kind = Stmt::Kind::Let;
            s.target = ident("local name");
            expect("=");
            s.exprs.push_back(expr());
        }
        else
        {
            s.kind = Stmt::Kind::Assign;
            s.target = ident("statement");
            if (accept("["))
            {
                s.index = expr();
                expect("]");
            }
            expect("=");
            s.exprs.push_back(expr());
        }
        expect(";");
        return s;
    }

    Stmt if_rest()
    {
        Stmt s;
        s.kind = Stmt::Kind::If;
        s.exprs.push_back(expr());
        s.then_body = block();
        if (accept_word("else"))
        {
            if (accept_word("if"))
                s.else_body.push_back(if_rest());
            else
                s.else_body = block();
        }
        return s;
    }

    Expr expr() { return binary(0); }

    static int precedence(std::string_view op)
    {
        if (op == "||")
            return 1;
        if (op == "&&")
            return 2;
        if (op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" || op == ">=")
            return 3;
        if (op == "+" || op == "-")
            return 4;
        if (op == "*" || op == "/")
            return 5;
        return -1;
    }

    Expr binary(int min_prec)
    {
        Expr lhs = unary();
        for (;;)
        {
            const Token& t = peek();
            if (t.kind != Token::Kind::Punct)
                return lhs;
            const int prec = precedence(t.text);
            if (prec < 0 || prec <= min_prec - 1 || prec < min_prec)
                return lhs;
            const std::string op = t.text;
            ++pos_;
            Expr rhs = binary(prec + 1);
            Expr e;
            e.kind = Expr::Kind::Binary;
            e.text = op;
            e.args.push_back(std::move(lhs));
            e.args.push_back(std::move(rhs));
            lhs = std::move(e);
        }
    }

    Expr unary()
    {
        if (accept("!"))
        {
            Expr e;
            e.kind = Expr::Kind::Unary;
            e.text = "!";
            e.args.push_back(unary());
            return e;
        }
        return primary();
    }

    Expr primary()
    {
        const Token t = peek();
        Expr e;
        if (t.kind == Token::Kind::Number)
        {
            ++pos_;
            e.kind = Expr::Kind::Number;
            e.number = t.number;
            if (peek().kind == Token::Kind::Ident)
                if (const auto mult = unit_multiplier(peek().text))
                {
                    ++pos_;
                    e.number = t.number * *mult;
                }
            return e;
        }
        if (t.kind == Token::Kind::String)
        {
            ++pos_;
            e.kind = Expr::Kind::String;
            e.text = t.text;
            if (t.text.size() > 32)
                Lexer::fail(t, "string literal longer than 32 bytes");
            e.number = string_word(t.text);
            return e;
        }
        if (accept("("))
        {
            e = expr();
            expect(")");
            return e;
        }
        if (t.kind != Token::Kind::Ident)
            Lexer::fail(t, "expected expression");
        ++pos_;
        if (t.text == "true" || t.text == "false")
        {
            e.kind = Expr::Kind::Bool;
            e.number = t.text == "true" ? 1 : 0;
            return e;
        }
        if (kBuiltins.count(t.text))
        {
            e.kind = Expr::Kind::Builtin;
            e.text = t.text;
            return e;
        }
        if (t.text == "balance" || t.text == "blockhash")
        {
            e.kind = Expr::Kind::Call;
            e.text = t.text;
            expect("(");
            e.args.push_back(expr());
            expect(")");
            return e;
        }
        if (t.text.find('.') != std::string::npos)
            Lexer::fail(t, "unknown builtin '" + t.text + "'");
        e.text = t.text;
        if (accept("["))
        {
            e.kind = Expr::Kind::Index;
            e.args.push_back(expr());
            expect("]");
            return e;
        }
        e.kind = Expr::Kind::Name;
        return e;
    }

    const Token& peek() const { return toks_[pos_]; }

    bool accept(std::string_view punct)
    {
        if (peek().kind == Token::Kind::Punct && peek().text == punct)
        {
            ++pos_;
            return true;
        }
        return false;
    }

    bool accept_word(std::string_view word)
    {
        if (peek().kind == Token::Kind::Ident && peek().text == word)
        {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(std::string_view punct)
    {
        if (!accept(punct))
            Lexer::fail(peek(), "expected '" + std::string{punct} + "'");
    }

    void expect_word(std::string_view word)
    {
        if (!accept_word(word))
            Lexer::fail(peek(), "expected '" + std::string{word} + "'");
    }

    std::string ident(std::string_view what)
    {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            Lexer::fail(t, "expected " + std::string{what});
        ++pos_;
        return t.text;
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

// ---- code generation --------------------------------------------------------

constexpr size_t kLocalsBase = 0x400;
const u256 kMappingStride = u256{1} << 160;

class CodeGen
{
public:
    CodeGen(const ContractProgram& program, Assembly& out) : prog_{program}, a_{out} {}

    void function_body(const Function& f, bool in_constructor)
    {
        fn_ = &f;
        in_ctor_ = in_constructor;
        locals_.clear();
        if (!f.payable)
        {
            a_.op(Opcode::CALLVALUE);
            a_.push_label("revert");
            a_.op(Opcode::JUMPI);
        }
        for (const auto& s : f.body)
            stmt(s);
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error{"CompileError", prog_.name + "." + fn_->name + ": " + what};
    }

    std::string fresh(std::string_view stem) { return std::string{stem} + "_" + std::to_string(counter_++); }

    void revert_if_zero()
    {
        a_.op(Opcode::ISZERO);
        a_.push_label("revert");
        a_.op(Opcode::JUMPI);
    }

    void stmt(const Stmt& s)
    {
        switch (s.kind)
        {
        case Stmt::Kind::Assign:
        {
            expr(s.exprs[0]);
            const StorageVar* var = prog_.find_storage(s.target);
            if (s.index)
            {
                if (!var || !var->is_mapping)
                    fail("'" + s.target + "' is not a mapping");
                mapping_key(*var, *s.index);
                a_.op(Opcode::SSTORE);
                return;
            }
            if (const auto it = locals_.find(s.target); it != locals_.end())
            {
                a_.push(it->second);
                a_.op(Opcode::MSTORE);
                return;
            }
            if (!var || var->is_mapping)
                fail("cannot assign to '" + s.target + "'");
            a_.push(storage_slot(prog_, s.target));
            a_.op(Opcode::SSTORE);
            return;
        }
        case Stmt::Kind::Let:
        {
            expr(s.exprs[0]);
            if (locals_.count(s.target))
                fail("local '" + s.target + "' redeclared");
            const u256 off = kLocalsBase + 32 * locals_.size();
            locals_.emplace(s.target, off);
            a_.push(off);
            a_.op(Opcode::MSTORE);
            return;
        }
        case Stmt::Kind::Require:
            expr(s.exprs[0]);
            revert_if_zero();
            return;
        case Stmt::Kind::If:
        {
            const auto else_label = fresh("else");
            const auto end_label = fresh("endif");
            expr(s.exprs[0]);
            a_.op(Opcode::ISZERO);
            a_.push_label(else_label);
            a_.op(Opcode::JUMPI);
            for (const auto& t : s.then_body)
                stmt(t);
            a_.push_label(end_label);
            a_.op(Opcode::JUMP);
            a_.label(else_label);
            for (const auto& e : s.else_body)
                stmt(e);
            a_.label(end_label);
            return;
        }
        case Stmt::Kind::Transfer:
            a_.push(0).push(0).push(0).push(0);
            expr(s.exprs[1]);
            expr(s.exprs[0]);
            a_.push(0);
            a_.op(Opcode::CALL);
            revert_if_zero();
            return;
        case Stmt::Kind::Call:
        {
            const Selector sel = selector_of(s.target);
            u256 sel_word = word_from_be(sel) << 224;
            a_.push(sel_word);
            a_.push(0);
            a_.op(Opcode::MSTORE);
            for (size_t i = 2; i < s.exprs.size(); ++i)
            {
                expr(s.exprs[i]);
                a_.push(4 + 32 * (i - 2));
                a_.op(Opcode::MSTORE);
            }
            const size_t args_len = 4 + 32 * (s.exprs.size() - 2);
            a_.push(0).push(0).push(args_len).push(0);
            expr(s.exprs[1]);
            expr(s.exprs[0]);
            a_.push(0);
            a_.op(Opcode::CALL);
            revert_if_zero();
            return;
        }
        case Stmt::Kind::Revert:
            a_.push_label("revert");
            a_.op(Opcode::JUMP);
            return;
        case Stmt::Kind::Return:
            expr(s.exprs[0]);
            a_.push(0);
            a_.op(Opcode::MSTORE);
            a_.push(32).push(0);
            a_.op(Opcode::RETURN);
            return;
        case Stmt::Kind::SelfDestruct:
            expr(s.exprs[0]);
            a_.op(Opcode::SELFDESTRUCT);
            return;
        case Stmt::Kind::Log:
            expr(s.exprs[0]);
            a_.push(0);
            a_.op(Opcode::MSTORE);
            a_.push(32).push(0);
            a_.op(Opcode::LOG0);
            return;
        }
    }

    void mapping_key(const StorageVar& var, const Expr& key)
    {
        expr(key);
        a_.push(mapping_slot(prog_, var.name, 0));
        a_.op(Opcode::ADD);
    }

    void expr(const Expr& e)
    {
        switch (e.kind)
        {
        case Expr::Kind::Number:
        case Expr::Kind::String:
        case Expr::Kind::Bool:
            a_.push(e.number);
            return;
        case Expr::Kind::Name:
            name(e.text);
            return;
        case Expr::Kind::Index:
        {
            const StorageVar* var = prog_.find_storage(e.text);
            if (!var || !var->is_mapping)
                fail("'" + e.text + "' is not a mapping");
            mapping_key(*var, e.args[0]);
            a_.op(Opcode::SLOAD);
            return;
        }
        case Expr::Kind::Builtin:
            builtin(e.text);
            return;
        case Expr::Kind::Call:
            expr(e.args[0]);
            a_.op(e.text == "balance" ? Opcode::BALANCE : Opcode::BLOCKHASH);
            return;
        case Expr::Kind::Unary:
            expr(e.args[0]);
            a_.op(Opcode::ISZERO);
            return;
        case Expr::Kind::Binary:
            binary(e);
            return;
        }
    }

    void name(const std::string& n)
    {
        if (const auto it = locals_.find(n); it != locals_.end())
        {
            a_.push(it->second);
            a_.op(Opcode::MLOAD);
            return;
        }
        for (size_t i = 0; i < fn_->params.size(); ++i)
            if (fn_->params[i].name == n)
            {
                a_.push((in_ctor_ ? 0 : 4) + 32 * i);
                a_.op(Opcode::CALLDATALOAD);
                return;
            }
        const StorageVar* var = prog_.find_storage(n);
        if (!var)
            fail("undefined name '" + n + "'");
        if (var->is_mapping)
            fail("mapping '" + n + "' used without index");
        a_.push(storage_slot(prog_, n));
        a_.op(Opcode::SLOAD);
    }

    void builtin(const std::string& b)
    {
        static const std::map<std::string, Opcode, std::less<>> table = {
            {"msg.sender", Opcode::CALLER},           {"msg.value", Opcode::CALLVALUE},
            {"this", Opcode::ADDRESS},                {"this.balance", Opcode::SELFBALANCE},
            {"block.number", Opcode::NUMBER},         {"block.timestamp", Opcode::TIMESTAMP},
            {"block.coinbase", Opcode::COINBASE},     {"block.difficulty", Opcode::DIFFICULTY},
            {"block.gaslimit", Opcode::GASLIMIT},     {"tx.gasprice", Opcode::GASPRICE},
            {"calldata.size", Opcode::CALLDATASIZE},
        };
        a_.op(table.at(b));
    }

    void to_bool()
    {
        a_.op(Opcode::ISZERO);
        a_.op(Opcode::ISZERO);
    }

    void binary(const Expr& e)
    {
        const std::string& op = e.text;
        const Expr& lhs = e.args[0];
        const Expr& rhs = e.args[1];
        if (op == "&&" || op == "||")
        {
            expr(rhs);
            to_bool();
            expr(lhs);
            to_bool();
            a_.op(op == "&&" ? Opcode::AND : Opcode::OR);
            return;
        }
        // Right operand first so the left one ends on top of the stack.
        expr(rhs);
        expr(lhs);
        if (op == "+")
            a_.op(Opcode::ADD);
        else if (op == "-")
            a_.op(Opcode::SUB);
        else if (op == "*")
            a_.op(Opcode::MUL);
        else if (op == "/")
            a_.op(Opcode::DIV);
        else if (op == "==")
            a_.op(Opcode::EQ);
        else if (op == "!=")
        {
            a_.op(Opcode::EQ);
            a_.op(Opcode::ISZERO);
        }
        else if (op == "<")
            a_.op(Opcode::LT);
        else if (op == ">")
            a_.op(Opcode::GT);
        else if (op == "<=")
        {
            a_.op(Opcode::GT);
            a_.op(Opcode::ISZERO);
        }
        else if (op == ">=")
        {
            a_.op(Opcode::LT);
            a_.op(Opcode::ISZERO);
        }
        else
            fail("unknown operator '" + op + "'");
    }

    const ContractProgram& prog_;
    Assembly& a_;
    const Function* fn_ = nullptr;
    bool in_ctor_ = false;
    std::map<std::string, u256> locals_;
    size_t counter_ = 0;
};

void emit_revert_stub(Assembly& a)
{
    a.label("revert");
    a.push(0);
    a.op(Opcode::DUP1);
    a.op(Opcode::REVERT);
}

Bytes compile_runtime(const ContractProgram& p)
{
    Assembly a;
    a.push(4);
    a.op(Opcode::CALLDATASIZE);
    a.op(Opcode::LT);
    a.push_label("fallback");
    a.op(Opcode::JUMPI);

    a.push(u256{1} << 224);
    a.push(0);
    a.op(Opcode::CALLDATALOAD);
    a.op(Opcode::DIV);
    for (size_t i = 0; i < p.functions.size(); ++i)
    {
        a.op(Opcode::DUP1);
        a.push_bytes(selector_of(p.functions[i].name));
        a.op(Opcode::EQ);
        a.push_label("fn_" + std::to_string(i));
        a.op(Opcode::JUMPI);
    }
    a.op(Opcode::POP);
    a.push_label("fallback");
    a.op(Opcode::JUMP);

    CodeGen gen{p, a};
    a.label("fallback");
    if (p.fallback)
        gen.function_body(*p.fallback, false);
    a.op(Opcode::STOP);

    for (size_t i = 0; i < p.functions.size(); ++i)
    {
        a.label("fn_" + std::to_string(i));
        a.op(Opcode::POP);
        gen.function_body(p.functions[i], false);
        a.op(Opcode::STOP);
    }
    emit_revert_stub(a);
    return link(a);
}

void check_selectors(const ContractProgram& p)
{
    std::map<Selector, std::string> seen;
    for (const auto& f : p.functions)
    {
        const auto [it, inserted] = seen.emplace(selector_of(f.name), f.name);
        if (!inserted)
            throw Error{"SelectorCollision", p.name + ": '" + f.name + "' and '" + it->second + "' share selector " +
                                                 to_hex(it->first)};
    }
}
}  // namespace

ContractProgram parse_program(std::string_view source)
{
    return Parser{Lexer{source}.run()}.program();
}

u256 storage_slot(const ContractProgram& program, std::string_view var)
{
    for (size_t i = 0; i < program.storage.size(); ++i)
        if (program.storage[i].name == var)
            return i;
    throw Error{"CompileError", "unknown storage variable '" + std::string{var} + "'"};
}

u256 mapping_slot(const ContractProgram& program, std::string_view var, const u256& key)
{
    return (storage_slot(program, var) + 1) * kMappingStride + key;
}

CompiledContract compile_contract(const ContractProgram& program)
{
    check_selectors(program);
    CompiledContract out;
    out.name = program.name;
    out.runtime_code = compile_runtime(program);
    for (const auto& f : program.functions)
        out.selectors.emplace(f.name, selector_of(f.name));

    Assembly a;
    CodeGen gen{program, a};
    gen.function_body(program.constructor, true);
    const Bytes& rt = out.runtime_code;
    for (size_t off = 0; off < rt.size(); off += 32)
    {
        std::array<uint8_t, 32> chunk{};
        std::copy_n(rt.begin() + static_cast<ptrdiff_t>(off), std::min<size_t>(32, rt.size() - off), chunk.begin());
        a.push_bytes(chunk);
        a.push(off);
        a.op(Opcode::MSTORE);
    }
    a.push(rt.size());
    a.push(0);
    a.op(Opcode::RETURN);
    emit_revert_stub(a);
    out.init_code = link(a);
    return out;
}

Bytes compile(const ContractProgram& program)
{
    return compile_contract(program).init_code;
}

std::string function_for_input(const ContractProgram& program, BytesView input)
{
    if (input.size() < 4)
        return "fallback";
    for (const auto& f : program.functions)
    {
        const Selector s = selector_of(f.name);
        if (std::equal(s.begin(), s.end(), input.begin()))
            return f.name;
    }
    return "fallback";
}

Bytes encode_args(std::span<const u256> words)
{
    Bytes out;
    for (const auto& w : words)
    {
        const auto be = word_to_be(w);
        out.insert(out.end(), be.begin(), be.end());
    }
    return out;
}

}  // namespace txcap::assembler
