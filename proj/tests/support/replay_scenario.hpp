// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

// Randomized replay scenarios for the instrumented node: a random contract,
// random background traffic, one test session, and optionally one injected
// violation of the replay hypotheses. Shared by the unit tests and the
// acceptance runner.

#pragma once

#include "generators.hpp"

#include <txcap/node.hpp>

namespace txcap::testing
{
inline const Address kTester = numbered_address(1, 0x11);
inline const Address kTarget = numbered_address(1, 0xcc);
inline const Address kBystander = numbered_address(2, 0xcc);

inline Address other_user(size_t i)
{
    return numbered_address(10 + i, 0x11);
}

enum class Injection
{
    None,
    FieldChange,
    SigmaSource,
    Interference,
};

inline std::string_view to_string(Injection i)
{
    switch (i)
    {
    case Injection::None: return "none";
    case Injection::FieldChange: return "field";
    case Injection::SigmaSource: return "sigma";
    case Injection::Interference: return "interference";
    }
    return "?";
}

struct ScenarioOutcome
{
    Injection injection = Injection::None;
    bool ok = false;
    std::string detail;
};

/// Genesis with the tester, a few other users, `target` at kTarget and
/// `bystander` at kBystander.
inline Genesis scenario_genesis(Rng& rng, const Bytes& target_code, const Bytes& bystander_code)
{
    Genesis g;
    const u256 funds = u256{100} * kWeiPerEther;
    g.accounts.push_back({kTester, Account{funds, 0, {}, {}}});
    for (size_t i = 0; i < 3; ++i)
        g.accounts.push_back({other_user(i), Account{funds, 0, {}, {}}});
    g.accounts.push_back({kTarget, Account{rng.below(100), 0, target_code, {}}});
    g.accounts.push_back({kBystander, Account{rng.below(100), 0, bystander_code, {}}});
    return g;
}

inline Transaction random_call(Rng& rng, const GeneratedContract& c, const Address& from, const Address& to,
                               uint64_t nonce, uint64_t price, bool stray_value = true)
{
    const auto& fn = rng.pick(c.functions);
    std::vector<u256> args;
    for (size_t p = 0; p < fn.params; ++p)
        args.push_back(rng.below(1000));
    Transaction t;
    t.sender = from;
    t.recipient = to;
    t.nonce = nonce;
    t.function_selector = selector_of(fn.name);
    t.args = assembler::encode_args(args);
    t.value = fn.payable ? rng.below(4) : (stray_value && rng.chance(0.1) ? 1 : 0);
    t.gas_price = price;
    t.gas_offer = 1'000'000;
    t.seal();
    return t;
}

/// Runs one scenario and checks the node's verdict against the injection.
/// For uninjected sessions the finals are mined canonically and every trace
/// and receipt status must equal its test counterpart.
inline ScenarioOutcome run_replay_scenario(uint64_t seed)
{
    Rng rng{seed};
    ScenarioOutcome out;
    out.injection = static_cast<Injection>(rng.below(4));
    auto fail = [&](std::string why) {
        out.ok = false;
        out.detail = "seed " + std::to_string(seed) + " (" + std::string{to_string(out.injection)} + "): " + why;
        return out;
    };

    std::vector<size_t> sigma_fns;
    if (out.injection == Injection::SigmaSource)
        sigma_fns = {0, 1, 2, 3};
    const auto target = random_contract(rng, "Target", 4, sigma_fns);
    const auto bystander = random_contract(rng, "Bystander", 3);
    const auto target_code = assembler::compile_contract(assembler::parse_program(target.source)).runtime_code;
    const auto bystander_code = assembler::compile_contract(assembler::parse_program(bystander.source)).runtime_code;

    node::NodeOptions opts;
    opts.mode = rng.chance(0.5) ? txsea::Mode::SenderAware : txsea::Mode::Strict52;
    node::TxtNode node{scenario_genesis(rng, target_code, bystander_code), opts};
    const uint64_t market = node.network_floor();
    std::vector<uint64_t> nonces(3, 0);

    // Background traffic from other users to both contracts.
    auto background = [&](double to_target) {
        const size_t n = rng.below(4);
        for (size_t i = 0; i < n; ++i)
        {
            const size_t u = rng.below(3);
            const bool hit = rng.chance(to_target);
            node.submit_market(random_call(rng, hit ? target : bystander, other_user(u), hit ? kTarget : kBystander,
                                           nonces[u]++, market + rng.below(1000)));
        }
        node.mine();
    };
    for (uint64_t b = 0, n = rng.below(5); b < n; ++b)
        background(0.5);

    const std::string id = node.open_session();
    const Hash32 head_before = node.head().hash();
    const size_t members = rng.range(1, 3);
    std::vector<node::SubmitResult> results;
    for (size_t i = 0; i < members; ++i)
    {
        // Value sent to a non-payable function reverts before the body runs;
        // keep it out when the body's first statement is the injected source.
        const Transaction test = random_call(rng, target, kTester, kTarget, i, 1 + rng.below(market - 1),
                                             out.injection != Injection::SigmaSource);
        try
        {
            results.push_back(node.submit_test(id, test));
        }
        catch (const Error& e)
        {
            // A time-dependent member may legitimately need separation from
            // the earlier ones; the shorter sequence is still a valid test.
            if (out.injection == Injection::SigmaSource && e.code() == "TimeSeparationRequired" && !results.empty())
                break;
            return fail("submit_test threw " + e.code() + ": " + e.detail());
        }
    }
    if (node.head().hash() != head_before)
        return fail("a test moved the canonical head");

    // Traffic that does not touch the target never expires the session.
    for (uint64_t b = 0, n = rng.below(3); b < n; ++b)
        background(0.0);

    const auto session = node.session(id);
    std::vector<Transaction> finals;
    for (const auto& rec : session.pending)
    {
        Transaction f = rec.tx;
        f.block_included.reset();
        f.gas_price = market + rng.below(1000);
        f.seal();
        finals.push_back(f);
    }

    switch (out.injection)
    {
    case Injection::FieldChange:
    {
        static const std::vector<std::string> fields = {"length", "nonce",     "gas_offer", "sender",
                                                        "recipient", "value", "function",  "args"};
        const std::string field = rng.pick(fields);
        Transaction& f = finals[rng.below(finals.size())];
        if (field == "length")
        {
            if (rng.chance(0.5) && finals.size() > 1)
                finals.pop_back();
            else
                finals.push_back(finals.back());
        }
        else if (field == "nonce")
            f.nonce += 1 + rng.below(3);
        else if (field == "gas_offer")
            f.gas_offer += 1 + rng.below(1000);
        else if (field == "sender")
            f.sender = other_user(rng.below(3));
        else if (field == "recipient")
            f.recipient = kBystander;
        else if (field == "value")
            f.value += 1;
        else if (field == "function")
            f.function_selector = selector_of("absent_" + std::to_string(rng.below(100)));
        else
            f.args.push_back(static_cast<uint8_t>(rng.below(256)));
        const auto r = node.verify_replicability(id, finals);
        if (r.replicable || r.reason != "FieldMismatch" || r.field != field)
            return fail("expected FieldMismatch(" + field + "), got " + (r.replicable ? "Replicable" : r.reason) +
                        "(" + r.field + ")");
        out.ok = true;
        return out;
    }
    case Injection::SigmaSource:
    {
        const auto r = node.verify_replicability(id, finals);
        if (r.replicable || r.reason != "SigmaNondeterministic")
            return fail("expected SigmaNondeterministic, got " + (r.replicable ? "Replicable" : r.reason));
        const auto st = node.poll_status(id).status;
        if (st != node::Status::S3 && st != node::Status::S4)
            return fail("σ-nondeterministic session reported " + std::string{node::to_string(st)});
        out.ok = true;
        return out;
    }
    case Injection::Interference:
    {
        const size_t u = rng.below(3);
        node.submit_market(random_call(rng, target, other_user(u), kTarget, nonces[u]++, market));
        const uint64_t hit_block = node.mine().block.number;
        // Unrelated traffic afterwards does not move the witness.
        if (rng.chance(0.5))
            background(0.0);
        const auto r = node.verify_replicability(id, finals);
        if (r.replicable || r.reason != "ExpiredAt" || r.block != hit_block)
            return fail("expected ExpiredAt(" + std::to_string(hit_block) + "), got " +
                        (r.replicable ? "Replicable" : r.reason) +
                        (r.block ? "(" + std::to_string(*r.block) + ")" : ""));
        if (node.poll_status(id).status != node::Status::S2)
            return fail("interfered session is not S2");
        try
        {
            node.finalize(id, 0);
            return fail("finalize accepted an S2 session");
        }
        catch (const Error& e)
        {
            if (e.code() != "NotS1")
                return fail("finalize threw " + e.code());
        }
        out.ok = true;
        return out;
    }
    case Injection::None: break;
    }

    const auto r = node.verify_replicability(id, finals);
    if (!r.replicable)
        return fail("clean session judged " + r.reason + "(" + r.field + ")");
    if (node.poll_status(id).status != node::Status::S1)
        return fail("clean session is not S1");
    for (size_t i = 0; i < finals.size(); ++i)
        node.finalize(id, i, finals[i].gas_price);
    // Other users may share the block.
    if (rng.chance(0.5))
    {
        const size_t u = rng.below(3);
        node.submit_market(random_call(rng, bystander, other_user(u), kBystander, nonces[u]++, market + 5000));
    }
    const auto mined = node.mine();
    for (size_t i = 0; i < finals.size(); ++i)
    {
        const auto it = std::find_if(mined.block.transactions.begin(), mined.block.transactions.end(),
                                     [&](const Transaction& t) { return t.hash == finals[i].hash; });
        if (it == mined.block.transactions.end())
            return fail("final " + std::to_string(i) + " was not mined");
        const size_t k = static_cast<size_t>(it - mined.block.transactions.begin());
        if (evm::flatten_trace(mined.traces[k]) != evm::flatten_trace(session.pending[i].trace))
            return fail("canonical trace of member " + std::to_string(i) + " differs from its test");
        if (mined.receipts[k].status != session.pending[i].receipt.status)
            return fail("receipt status of member " + std::to_string(i) + " differs from its test");
    }
    out.ok = true;
    return out;
}

}  // namespace txcap::testing
