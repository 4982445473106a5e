// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/cases.hpp>

#include <deque>

namespace txcap::cases
{
namespace detail
{
const std::map<std::string, std::string_view, std::less<>>& embedded();
}

std::string_view resource(std::string_view name)
{
    const auto& files = detail::embedded();
    const auto it = files.find(name);
    if (it == files.end())
        throw Error{"UnknownCase", "no resource '" + std::string{name} + "'"};
    return it->second;
}

std::vector<std::string> resource_names()
{
    std::vector<std::string> out;
    for (const auto& [name, _] : detail::embedded())
        out.push_back(name);
    return out;
}

assembler::ContractProgram program(std::string_view file)
{
    return assembler::parse_program(resource(file));
}

const std::vector<std::string>& case_ids()
{
    static const std::vector<std::string> ids = {"1", "2", "3", "4", "motivating"};
    return ids;
}

Address case_user()
{
    return Address::from_hex("0x000000000000000000000000000000000000a0d0");
}

Address bar_address()
{
    return Address::from_hex("0xec125a03c6f9e75beb1a420e94d655b2f1352584");
}

namespace
{
const u256 kUserFunds = u256{100} * kWeiPerEther;

u256 word(std::string_view text)
{
    return assembler::string_word(text);
}

/// Drives a private chain one transaction per block and keeps what the
/// renderer needs for every step.
class Harness
{
public:
    explicit Harness(Genesis genesis) : state_{make_genesis(genesis)}, genesis_balance_{state_.balance_of(case_user())}
    {
        ctx_.address_symbols[case_user()] = "A_d";
    }

    Address deploy(const assembler::ContractProgram& prog, const u256& value, std::span<const u256> ctor_args,
                   bool rendered, trace::Selection sel)
    {
        const auto compiled = assembler::compile_contract(prog);
        Transaction tx = base_tx(value);
        tx.args = make_deploy_payload(compiled.init_code, assembler::encode_args(ctor_args));
        tx.seal();
        const Address addr = create_address(tx.sender, tx.nonce);
        programs_.push_back(prog);
        ctx_.programs[addr] = &programs_.back();
        ctx_.address_symbols.emplace(addr, prog.name);
        run(tx, programs_.back(), addr, "constructor", rendered, std::move(sel));
        if (steps_.back().receipt.status != ReceiptStatus::Success)
            throw Error{"CaseSetupFailed", prog.name + " deployment reverted"};
        return addr;
    }

    void call(const Address& target, const std::string& fn, const u256& value, std::span<const u256> args,
              bool rendered, trace::Selection sel)
    {
        const auto* prog = ctx_.programs.at(target);
        Transaction tx = base_tx(value);
        tx.recipient = target;
        tx.function_selector = selector_of(fn);
        tx.args = assembler::encode_args(args);
        tx.seal();
        run(tx, *prog, target, fn, rendered, std::move(sel));
    }

    void place(const Address& at, const assembler::ContractProgram& prog)
    {
        programs_.push_back(prog);
        ctx_.programs[at] = &programs_.back();
        ctx_.address_symbols.emplace(at, prog.name);
    }

    /// msg.sender.balance as the traces show it: gas fees added back.
    u256 user_balance_net() const { return state_.balance_of(case_user()) + fees_; }
    u256 genesis_balance() const { return genesis_balance_; }

    trace::RenderContext& context() { return ctx_; }

    void finish(CaseResult& out)
    {
        std::vector<trace::RenderStep> render;
        for (const auto& r : records_)
            if (r.rendered)
                render.push_back(r.step);
        out.rendered = trace::render_execution(render, ctx_);
        out.steps = std::move(steps_);
    }

private:
    struct Record
    {
        trace::RenderStep step;
        bool rendered = true;
    };

    Transaction base_tx(const u256& value) const
    {
        Transaction tx;
        tx.nonce = state_.nonce_of(case_user());
        tx.gas_price = state_.params.base_fee;
        tx.gas_offer = 1'000'000;
        tx.sender = case_user();
        tx.value = value;
        return tx;
    }

    void run(const Transaction& tx, const assembler::ContractProgram& prog, const Address& contract,
             const std::string& fn, bool rendered, trace::Selection sel)
    {
        states_.push_back(state_);
        const WorldState* pre = &states_.back();
        const std::vector<Transaction> pool{tx};
        auto mined = mine_block(state_, pool);
        if (mined.block.transactions.size() != 1)
            throw Error{"CaseSetupFailed", prog.name + "." + fn + " was not mined"};
        states_.push_back(state_);
        const WorldState* post = &states_.back();

        CaseStep step;
        step.label = prog.name + "." + fn;
        step.rendered = rendered;
        step.tx = mined.block.transactions.front();
        step.receipt = mined.receipts.front();
        step.trace = mined.traces.front();
        step.classification = sigma::classify_transaction(step.trace);
        steps_.push_back(step);
        txs_.push_back(step.tx);
        receipts_.push_back(step.receipt);
        traces_.push_back(step.trace);

        const u256 fees_before = fees_;
        fees_ += u256{step.receipt.gas_used} * tx.gas_price;

        Record r;
        r.rendered = rendered;
        r.step.program = &prog;
        r.step.contract = contract;
        r.step.function = fn;
        r.step.tx = &txs_.back();
        r.step.receipt = &receipts_.back();
        r.step.trace = &traces_.back();
        r.step.pre_state = pre;
        r.step.post_state = post;
        r.step.sender_fees_before = fees_before;
        r.step.sender_fees_after = fees_;
        r.step.selection = std::move(sel);
        records_.push_back(std::move(r));
    }

    WorldState state_;
    u256 genesis_balance_;
    u256 fees_ = 0;
    trace::RenderContext ctx_;
    // Deques keep element addresses stable for the render steps.
    std::deque<assembler::ContractProgram> programs_;
    std::deque<WorldState> states_;
    std::deque<Transaction> txs_;
    std::deque<Receipt> receipts_;
    std::deque<evm::ExecutionTrace> traces_;
    std::vector<CaseStep> steps_;
    std::vector<Record> records_;
};

Genesis user_genesis()
{
    Genesis g;
    g.accounts.push_back({case_user(), Account{kUserFunds, 0, {}, {}}});
    return g;
}

void case1(Harness& h, CaseResult& out)
{
    out.title = "Known vulnerabilities: unexpected ether and assertion violation";
    const auto foo = program("case1.mvc");
    const Address a = h.deploy(foo, kWeiPerEther, {}, true,
                               {{"msg.sender", "msg.value"}, {"owner", "deposit_made", "this.balance"}});
    h.call(a, "deposit", kWeiPerEther, {}, true, {{"msg.value", "this.balance", "deposit_made"}, {}});
    h.call(a, "withdraw", 0, {}, true, {{"msg.sender", "this.balance", "deposit_made"}, {}});
}

void case2(Harness& h, CaseResult& out)
{
    out.title = "Ambiguous semantic: owner-only deposit, open withdraw";
    const u256 v1 = u256{3} * kWeiPerEther;
    out.env.symbols["V_1"] = v1;
    const auto c = program("case2.mvc");
    const Address a = h.deploy(c, 0, {}, true, {{"msg.sender"}, {"owner"}});
    h.call(a, "deposit", v1, {}, true, {{"msg.value", "msg.sender", "this.balance"}, {"this.balance"}});
    // V_2 names the caller's balance right before the withdrawal.
    out.env.symbols["V_2"] = h.user_balance_net();
    h.call(a, "withdraw", 0, {}, true,
           {{"msg.sender", "this.balance", "msg.sender.balance"}, {"this.balance", "msg.sender.balance"}});
}

void case3(Harness& h, CaseResult& out)
{
    out.title = "Zero-day boolean deadlock";
    const auto bank = program("case3.mvc");
    const Address a = h.deploy(bank, 0, {}, false, {});
    const u256 shannon{kWeiPerShannon};
    h.call(a, "put", 70 * shannon, {}, true,
           {{"msg.sender", "msg.value", "this.balance", "deposited_sem"},
            {"this.balance", "investor", "deposited_sem"}});
    h.call(a, "put", 10 * shannon, {}, true, {{"msg.sender", "msg.value", "this.balance", "deposited_sem"}, {}});
    h.call(a, "get", 0, {}, true, {{"msg.sender", "investor", "deposited_sem", "this.balance"}, {}});
}

void case4(Harness& h, CaseResult& out)
{
    out.title = "Social engineering: homograph token symbol";
    const auto token = program("case4.mvc");
    // "SNР" with a Cyrillic Р (U+0420).
    const std::vector<u256> ctor{0, word("Oakland Token"), word("SN\xd0\xa0")};
    const std::string unit = "SN\xd0\xa0";
    const Address a = h.deploy(token, 0, ctor, true,
                               {{"msg.sender", "this.balance", "initialSupply", "pName", "pSymbol"}, {"this.balance"}});
    h.call(a, "buy", 314159, {}, true,
           {{"msg.value", "msg.sender", "this.balance"}, {"this.balance", "balanceOf(A_d):" + unit}});
    const std::vector<u256> amount{314159};
    h.call(a, "sell", 0, amount, true, {{"msg.sender", "balanceOf(A_d):" + unit, "this.balance"}, {}});
}

void motivating(Harness& h, CaseResult& out)
{
    out.title = "Motivating example: hard-coded payee";
    const auto foo = program("motivating_foo.mvc");
    const Address a = h.deploy(foo, 0, {}, false, {});
    if (out.variant != "ropsten")
        h.place(bar_address(), program("motivating_bar.mvc"));
    h.context().call_selections["Bar.fallback"] = {{"msg.value"}, {}};
    h.call(a, "deposit", kWeiPerEther, {}, true,
           {{"msg.value", "this.balance"}, {"msg.sender.balance", "this.balance"}});
    h.call(a, "withdraw", 0, {}, true, {{"this.balance", "msg.sender.balance"}, {}});
}

Genesis motivating_genesis(const std::string& variant)
{
    Genesis g = user_genesis();
    if (variant == "ropsten")
        return g;
    std::string src{resource("motivating_bar.mvc")};
    if (variant == "payable-bar")
    {
        const auto at = src.find("fallback {");
        src.replace(at, 10, "fallback payable {");
    }
    else if (variant != "mainnet")
    {
        throw Error{"UnknownCase", "unknown variant '" + variant + "'"};
    }
    const auto bar = assembler::compile_contract(assembler::parse_program(src));
    g.accounts.push_back({bar_address(), Account{0, 1, bar.runtime_code, {}}});
    return g;
}
}  // namespace

CaseResult run_case(std::string_view id, const CaseOptions& options)
{
    CaseResult out;
    out.id = std::string{id};
    out.variant = id == "motivating" ? options.variant : "";
    std::string golden_file;
    std::optional<Harness> h;
    if (id == "motivating")
    {
        h.emplace(motivating_genesis(options.variant));
        if (options.variant == "mainnet")
            golden_file = "golden/motivating.trc";
    }
    else if (id == "1" || id == "2" || id == "3" || id == "4")
    {
        h.emplace(user_genesis());
        golden_file = "golden/case" + std::string{id} + ".trc";
    }
    else
    {
        throw Error{"UnknownCase", "no case '" + std::string{id} + "' (expected 1-4 or motivating)"};
    }

    out.env.symbols["A_d"] = case_user().to_word();
    out.env.symbols["A_b"] = h->genesis_balance();

    if (id == "1")
        case1(*h, out);
    else if (id == "2")
        case2(*h, out);
    else if (id == "3")
        case3(*h, out);
    else if (id == "4")
        case4(*h, out);
    else
        motivating(*h, out);

    h->finish(out);
    if (!golden_file.empty())
    {
        out.golden = trace::parse(resource(golden_file));
        out.comparison = trace::compare(*out.golden, out.rendered, out.env);
    }
    out.verdict = trace::has_revert(out.rendered) ? "unsafe sequence" : "safe sequence";
    return out;
}

}  // namespace txcap::cases
