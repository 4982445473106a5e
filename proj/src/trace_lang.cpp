// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/trace_lang.hpp>

#include <cctype>

namespace txcap::trace
{
namespace
{
// ---- parsing ----------------------------------------------------------------

// Circled numerals accepted as entry numbers: ①..⑩ and the three dingbat ranges.
std::optional<std::pair<uint64_t, size_t>> circled_numeral(std::string_view s)
{
    if (s.size() < 3)
        return std::nullopt;
    const auto b0 = static_cast<uint8_t>(s[0]);
    const auto b1 = static_cast<uint8_t>(s[1]);
    const auto b2 = static_cast<uint8_t>(s[2]);
    if (b0 != 0xe2 || (b2 & 0xc0) != 0x80)
        return std::nullopt;
    const uint32_t cp = ((b0 & 0x0fu) << 12) | ((b1 & 0x3fu) << 6) | (b2 & 0x3fu);
    for (uint32_t base : {0x2460u, 0x2776u, 0x2780u, 0x278au})
        if (cp >= base && cp < base + 10)
            return std::pair{uint64_t{cp - base + 1}, size_t{3}};
    return std::nullopt;
}

constexpr std::string_view kEmptySet = "\xe2\x88\x85";  // ∅

class Parser
{
public:
    explicit Parser(std::string_view text) : s_{text} {}

    TraceDoc doc()
    {
        TraceDoc d;
        skip_ws();
        while (!eof())
        {
            d.entries.push_back(entry());
            skip_ws();
        }
        return d;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }

    void advance(size_t n = 1)
    {
        for (size_t i = 0; i < n && pos_ < s_.size(); ++i)
        {
            const auto c = static_cast<uint8_t>(s_[pos_++]);
            if (c == '\n')
            {
                ++line_;
                col_ = 1;
            }
            else if ((c & 0xc0) != 0x80)
            {
                ++col_;
            }
        }
    }

    [[noreturn]] void fail(std::string_view expected) const
    {
        throw Error{"SyntaxError",
                    std::to_string(line_) + ":" + std::to_string(col_) + ": expected " + std::string{expected}};
    }

    void skip_ws()
    {
        while (!eof())
        {
            const char c = peek();
            if (c == '#')
                while (!eof() && peek() != '\n')
                    advance();
            else if (std::isspace(static_cast<unsigned char>(c)))
                advance();
            else
                break;
        }
    }

    bool at_index() const
    {
        return std::isdigit(static_cast<unsigned char>(peek())) || circled_numeral(s_.substr(pos_)).has_value();
    }

    static bool ident_char(char c)
    {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }

    std::string ident(std::string_view what)
    {
        const size_t start = pos_;
        while (!eof() && ident_char(peek()))
            advance();
        if (pos_ == start)
            fail(what);
        return std::string{s_.substr(start, pos_ - start)};
    }

    void expect(char c)
    {
        if (peek() != c)
            fail(std::string{"'"} + c + "'");
        advance();
    }

    TraceEntry entry()
    {
        TraceEntry e;
        if (const auto circled = circled_numeral(s_.substr(pos_)))
        {
            e.index = circled->first;
            advance(circled->second);
        }
        else if (std::isdigit(static_cast<unsigned char>(peek())))
        {
            const size_t start = pos_;
            while (std::isdigit(static_cast<unsigned char>(peek())))
                advance();
            const auto digits = s_.substr(start, pos_ - start);
            if (digits.size() > 18)
                fail("an entry number below 10^18");
            e.index = std::stoull(std::string{digits});
        }
        else
        {
            fail("entry number");
        }
        skip_ws();
        if (peek() == ':')
        {
            advance();
            skip_ws();
        }
        e.contract = ident("contract name");
        expect('.');
        e.function = ident("function name");
        skip_ws();
        expect('(');
        e.pre = list(')');
        for (;;)
        {
            skip_ws();
            if (peek() == '[')
                break;
            if (!at_index())
                fail("'[' or nested entry");
            e.children.push_back(entry());
        }
        advance();
        skip_ws();
        if (s_.substr(pos_, 6) == "REVERT")
        {
            const size_t save_pos = pos_, save_line = line_, save_col = col_;
            advance(6);
            skip_ws();
            if (peek() == ']')
            {
                advance();
                e.reverted = true;
                return e;
            }
            pos_ = save_pos;
            line_ = save_line;
            col_ = save_col;
        }
        e.post = list(']');
        return e;
    }

    // Parses the inside of a bracket; the opening bracket is already consumed.
    std::vector<Assignment> list(char close)
    {
        std::vector<Assignment> out;
        skip_ws();
        if (peek() == close)
        {
            advance();
            return out;
        }
        if (s_.substr(pos_, kEmptySet.size()) == kEmptySet)
        {
            advance(kEmptySet.size());
            skip_ws();
            expect(close);
            return out;
        }
        for (;;)
        {
            Assignment a;
            a.lhs = omega("=", "parameter name");
            expect('=');
            a.rhs = omega("", "value");
            out.push_back(std::move(a));
            if (peek() == ',')
            {
                advance();
                continue;
            }
            expect(close);
            return out;
        }
    }

    // Raw Ω text up to a top-level stop character; whitespace runs outside
    // string literals collapse to one space.
    std::string omega(std::string_view extra_stops, std::string_view what)
    {
        std::string out;
        int depth = 0;
        bool pending_space = false;
        skip_ws();
        for (;;)
        {
            if (eof())
                fail(what.empty() ? "value" : what);
            const char c = peek();
            if (depth == 0 && (c == ',' || c == ')' || c == ']' || extra_stops.find(c) != std::string_view::npos))
                break;
            if (c == '#')
            {
                skip_ws();
                pending_space = !out.empty();
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c)))
            {
                advance();
                pending_space = !out.empty();
                continue;
            }
            if (pending_space)
            {
                out += ' ';
                pending_space = false;
            }
            if (c == '"')
            {
                out += c;
                advance();
                for (;;)
                {
                    if (eof() || peek() == '\n')
                        fail("closing '\"'");
                    const char d = peek();
                    out += d;
                    advance();
                    if (d == '\\' && !eof())
                    {
                        out += peek();
                        advance();
                    }
                    else if (d == '"')
                    {
                        break;
                    }
                }
                continue;
            }
            if (c == '(' || c == '[' || c == '{')
                ++depth;
            else if (c == ')' || c == ']' || c == '}')
            {
                if (depth == 0)
                    fail("balanced brackets");
                --depth;
            }
            out += c;
            advance();
        }
        if (out.empty())
            fail(what);
        return out;
    }

    std::string_view s_;
    size_t pos_ = 0;
    size_t line_ = 1;
    size_t col_ = 1;
};

void print_list(std::string& out, const std::vector<Assignment>& list)
{
    for (size_t i = 0; i < list.size(); ++i)
    {
        if (i)
            out += ", ";
        out += list[i].lhs;
        out += '=';
        out += list[i].rhs;
    }
}

void print_entry(std::string& out, const TraceEntry& e, size_t depth)
{
    const std::string indent(2 * depth, ' ');
    out += indent + std::to_string(e.index) + ": " + e.contract + "." + e.function + " (";
    print_list(out, e.pre);
    out += ")";
    if (!e.children.empty())
    {
        out += "\n";
        for (const auto& c : e.children)
            print_entry(out, c, depth + 1);
        out += indent;
    }
    else
    {
        out += " ";
    }
    out += "[";
    if (e.reverted)
        out += "REVERT";
    else
        print_list(out, e.post);
    out += "]\n";
}

// ---- values -----------------------------------------------------------------

std::optional<u256> unit_multiplier(std::string_view unit)
{
    std::string lower;
    for (char c : unit)
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "wei")
        return u256{1};
    if (lower == "gwei" || lower == "shannon")
        return u256{kWeiPerShannon};
    if (lower == "ether")
        return kWeiPerEther;
    return std::nullopt;
}

std::string trim(std::string_view s)
{
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string{s.substr(b, e - b)};
}

Value text_value(std::string_view s)
{
    Value v;
    v.kind = Value::Kind::Text;
    v.text = trim(s);
    return v;
}

std::optional<Value> term_value(const std::string& term, const ValueEnv& env)
{
    if (term.empty())
        return std::nullopt;
    const auto space = term.find(' ');
    const std::string head = term.substr(0, space);
    const std::string unit = space == std::string::npos ? "" : trim(term.substr(space + 1));
    if (unit.find(' ') != std::string::npos)
        return std::nullopt;
    Value v;
    if (std::isdigit(static_cast<unsigned char>(head[0])))
    {
        u256 n;
        try
        {
            n = parse_u256(head);
        }
        catch (const Error&)
        {
            return std::nullopt;
        }
        if (unit.empty())
        {
            v.kind = Value::Kind::Amount;
            v.number = n;
        }
        else if (const auto mult = unit_multiplier(unit))
        {
            v.kind = Value::Kind::Amount;
            v.number = n * *mult;
        }
        else
        {
            v.kind = Value::Kind::Tagged;
            v.number = n;
            v.text = unit;
        }
        return v;
    }
    if (!unit.empty())
        return std::nullopt;
    if (const auto it = env.symbols.find(head); it != env.symbols.end())
    {
        v.kind = Value::Kind::Amount;
        v.number = it->second;
        return v;
    }
    return std::nullopt;
}

}  // namespace

TraceDoc parse(std::string_view text)
{
    return Parser{text}.doc();
}

std::string print(const TraceDoc& doc)
{
    std::string out;
    for (const auto& e : doc.entries)
        print_entry(out, e, 0);
    return out;
}

Value evaluate(std::string_view omega, const ValueEnv& env)
{
    const std::string s = trim(omega);
    if (s == "true" || s == "false")
    {
        Value v;
        v.kind = Value::Kind::Bool;
        v.number = s == "true" ? 1 : 0;
        return v;
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    {
        Value v;
        v.kind = Value::Kind::String;
        v.text = s.substr(1, s.size() - 2);
        return v;
    }
    // Split on top-level + and - (a '-' inside an identifier like "x-y" is rare
    // enough in traces that we require spaces around operators).
    std::vector<std::pair<char, std::string>> terms;
    char sign = '+';
    std::string cur;
    for (size_t i = 0; i < s.size(); ++i)
    {
        const char c = s[i];
        const bool spaced = i > 0 && s[i - 1] == ' ' && i + 1 < s.size() && s[i + 1] == ' ';
        if ((c == '+' || c == '-') && spaced)
        {
            terms.emplace_back(sign, trim(cur));
            sign = c;
            cur.clear();
            continue;
        }
        cur += c;
    }
    terms.emplace_back(sign, trim(cur));

    if (terms.size() == 1)
    {
        if (const auto v = term_value(terms[0].second, env))
            return *v;
        return text_value(s);
    }
    boost::multiprecision::int512_t total = 0;
    for (const auto& [op, term] : terms)
    {
        const auto v = term_value(term, env);
        if (!v || v->kind != Value::Kind::Amount)
            return text_value(s);
        const boost::multiprecision::int512_t n{v->number};
        total = op == '+' ? total + n : total - n;
    }
    if (total < 0)
        return text_value(s);
    Value v;
    v.kind = Value::Kind::Amount;
    v.number = static_cast<u256>(total);
    return v;
}

namespace
{
void compare_lists(const std::string& where, const char* which, const std::vector<Assignment>& exp,
                   const std::vector<Assignment>& act, const ValueEnv& env, Comparison& out)
{
    if (exp.size() != act.size())
    {
        out.mismatches.push_back(where + ": " + which + " has " + std::to_string(act.size()) + " assignments, expected " +
                                 std::to_string(exp.size()));
        return;
    }
    for (size_t i = 0; i < exp.size(); ++i)
    {
        if (exp[i].lhs != act[i].lhs)
        {
            out.mismatches.push_back(where + ": " + which + " name '" + act[i].lhs + "', expected '" + exp[i].lhs +
                                     "'");
            continue;
        }
        if (!(evaluate(exp[i].rhs, env) == evaluate(act[i].rhs, env)))
            out.mismatches.push_back(where + ": " + exp[i].lhs + "=" + act[i].rhs + ", expected " + exp[i].rhs);
    }
}

void compare_entries(const std::string& where, const std::vector<TraceEntry>& exp, const std::vector<TraceEntry>& act,
                     const ValueEnv& env, Comparison& out)
{
    if (exp.size() != act.size())
    {
        out.mismatches.push_back(where + ": " + std::to_string(act.size()) + " entries, expected " +
                                 std::to_string(exp.size()));
        return;
    }
    for (size_t i = 0; i < exp.size(); ++i)
    {
        const auto& e = exp[i];
        const auto& a = act[i];
        const std::string here = where + "/" + std::to_string(e.index) + " " + e.contract + "." + e.function;
        if (e.contract != a.contract || e.function != a.function)
            out.mismatches.push_back(here + ": got " + a.contract + "." + a.function);
        if (e.index != a.index)
            out.mismatches.push_back(here + ": numbered " + std::to_string(a.index));
        compare_lists(here, "pre", e.pre, a.pre, env, out);
        if (e.reverted != a.reverted)
            out.mismatches.push_back(here + (e.reverted ? ": expected REVERT" : ": unexpected REVERT"));
        else if (!e.reverted)
            compare_lists(here, "post", e.post, a.post, env, out);
        compare_entries(here, e.children, a.children, env, out);
    }
}

bool any_revert(const std::vector<TraceEntry>& entries)
{
    for (const auto& e : entries)
        if (e.reverted || any_revert(e.children))
            return true;
    return false;
}
}  // namespace

Comparison compare(const TraceDoc& expected, const TraceDoc& actual, const ValueEnv& env)
{
    Comparison c;
    compare_entries("", expected.entries, actual.entries, env, c);
    c.ok = c.mismatches.empty();
    return c;
}

bool has_revert(const TraceDoc& doc)
{
    return any_revert(doc.entries);
}

std::string format_amount(const u256& wei)
{
    if (wei == 0)
        return "0";
    if (wei % kWeiPerEther == 0)
        return to_dec(wei / kWeiPerEther) + " ether";
    return to_dec(wei) + " wei";
}

// ---- rendering ----------------------------------------------------------------

namespace
{
using assembler::StorageVar;
using assembler::ValueType;

class Renderer
{
public:
    explicit Renderer(const RenderContext& ctx) : ctx_{ctx}
    {
        for (const auto& [addr, name] : ctx.address_symbols)
            by_name_.emplace(name, addr);
    }

    TraceDoc run(std::span<const RenderStep> steps)
    {
        TraceDoc doc;
        for (const auto& step : steps)
            doc.entries.push_back(step_entry(step));
        return doc;
    }

private:
    std::string symbol(const Address& a) const
    {
        const auto it = ctx_.address_symbols.find(a);
        return it == ctx_.address_symbols.end() ? a.hex() : it->second;
    }

    static std::pair<std::string, std::string> split_unit(const std::string& label)
    {
        const auto colon = label.rfind(':');
        if (colon == std::string::npos)
            return {label, ""};
        return {label.substr(0, colon), label.substr(colon + 1)};
    }

    static std::string amount(const u256& v, const std::string& unit)
    {
        if (unit.empty())
            return format_amount(v);
        if (const auto mult = unit_multiplier(unit))
            return v % *mult == 0 ? to_dec(v / *mult) + " " + unit : format_amount(v);
        return to_dec(v) + " " + unit;
    }

    std::string typed(const u256& word, ValueType type, const std::string& unit) const
    {
        switch (type)
        {
        case ValueType::Bool:
            return word != 0 ? "true" : "false";
        case ValueType::Address:
            return symbol(Address::from_word(word));
        case ValueType::String:
            return "\"" + assembler::word_string(word) + "\"";
        case ValueType::Uint:
            break;
        }
        return amount(word, unit);
    }

    static u256 storage_at(const WorldState& state, const Address& a, const u256& slot)
    {
        const Account* acc = state.find(a);
        if (!acc)
            return 0;
        const auto it = acc->storage.find(slot);
        return it == acc->storage.end() ? u256{0} : it->second;
    }

    u256 key_word(const std::string& key) const
    {
        if (const auto it = by_name_.find(key); it != by_name_.end())
            return it->second.to_word();
        try
        {
            return parse_u256(key);
        }
        catch (const Error&)
        {
            throw Error{"UnknownVariable", "mapping key '" + key + "'"};
        }
    }

    static Bytes call_args(const RenderStep& step)
    {
        if (step.tx->is_create())
            return split_deploy_payload(step.tx->args).ctor_args;
        return step.tx->args;
    }

    std::string resolve(const RenderStep& step, const std::string& label, bool post) const
    {
        const auto [name, unit] = split_unit(label);
        const WorldState& state = post ? *step.post_state : *step.pre_state;
        const Transaction& tx = *step.tx;
        if (name == "msg.sender")
            return symbol(tx.sender);
        if (name == "msg.value")
            return amount(tx.value, unit);
        if (name == "this")
            return symbol(step.contract);
        if (name == "this.balance")
            return amount(state.balance_of(step.contract), unit);
        if (name == "msg.sender.balance")
            return amount(state.balance_of(tx.sender) + (post ? step.sender_fees_after : step.sender_fees_before),
                          unit);

        const auto& prog = *step.program;
        if (const auto open = name.find('('); open != std::string::npos && name.back() == ')')
        {
            const std::string map_name = name.substr(0, open);
            const StorageVar* var = prog.find_storage(map_name);
            if (!var || !var->is_mapping)
                throw Error{"UnknownVariable", label};
            const u256 key = key_word(name.substr(open + 1, name.size() - open - 2));
            return typed(storage_at(state, step.contract, assembler::mapping_slot(prog, map_name, key)), var->type,
                         unit);
        }
        if (const StorageVar* var = prog.find_storage(name); var && !var->is_mapping)
            return typed(storage_at(state, step.contract, assembler::storage_slot(prog, name)), var->type, unit);
        if (const assembler::Function* fn = prog.find_function(step.function))
        {
            for (size_t i = 0; i < fn->params.size(); ++i)
                if (fn->params[i].name == name)
                {
                    const Bytes args = call_args(step);
                    u256 word = 0;
                    if (args.size() >= 32 * (i + 1))
                        word = word_from_be(BytesView{args}.subspan(32 * i, 32));
                    return typed(word, fn->params[i].type, unit);
                }
        }
        throw Error{"UnknownVariable", label};
    }

    std::vector<Assignment> assignments(const RenderStep& step, const std::vector<std::string>& labels, bool post) const
    {
        std::vector<Assignment> out;
        for (const auto& label : labels)
            out.push_back({split_unit(label).first, resolve(step, label, post)});
        return out;
    }

    TraceEntry step_entry(const RenderStep& step)
    {
        if (!step.program || !step.tx || !step.receipt || !step.trace || !step.pre_state || !step.post_state)
            throw Error{"InvalidArgument", "render step is missing inputs"};
        TraceEntry e;
        e.index = next_index_++;
        e.contract = step.program->name;
        e.function = step.function;
        e.pre = assignments(step, step.selection.pre, false);
        e.children = call_entries(step.trace->root);
        if (step.receipt->status == ReceiptStatus::Reverted)
            e.reverted = true;
        else
            e.post = assignments(step, step.selection.post, true);
        return e;
    }

    std::string frame_value(const evm::TraceFrame& f, const std::string& label) const
    {
        const auto [name, unit] = split_unit(label);
        if (name == "msg.sender")
            return symbol(f.caller);
        if (name == "msg.value")
            return amount(f.value, unit);
        if (name == "this")
            return symbol(f.callee);
        throw Error{"UnknownVariable", label + " (inside a call only msg.sender, msg.value and this are known)"};
    }

    std::vector<TraceEntry> call_entries(const evm::TraceFrame& parent)
    {
        std::vector<TraceEntry> out;
        for (const auto& child : parent.children)
        {
            TraceEntry e;
            e.index = next_index_++;
            const auto it = ctx_.programs.find(child.callee);
            if (it != ctx_.programs.end() && it->second)
            {
                e.contract = it->second->name;
                e.function = assembler::function_for_input(*it->second, child.input);
            }
            else
            {
                e.contract = "Unknown";
                e.function = "call";
            }
            const auto sel = ctx_.call_selections.find(e.contract + "." + e.function);
            if (sel != ctx_.call_selections.end())
                for (const auto& label : sel->second.pre)
                    e.pre.push_back({split_unit(label).first, frame_value(child, label)});
            e.children = call_entries(child);
            if (child.outcome == evm::Outcome::Revert)
                e.reverted = true;
            else if (sel != ctx_.call_selections.end())
                for (const auto& label : sel->second.post)
                    e.post.push_back({split_unit(label).first, frame_value(child, label)});
            out.push_back(std::move(e));
        }
        return out;
    }

    const RenderContext& ctx_;
    std::map<std::string, Address> by_name_;
    uint64_t next_index_ = 1;
};
}  // namespace

TraceDoc render_execution(std::span<const RenderStep> steps, const RenderContext& ctx)
{
    return Renderer{ctx}.run(steps);
}

}  // namespace txcap::trace
