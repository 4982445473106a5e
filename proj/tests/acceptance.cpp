// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include "support/oracles.hpp"
#include "support/replay_scenario.hpp"

#include <txcap/cases.hpp>
#include <txcap/gossip.hpp>
#include <txcap/sigma.hpp>
#include <txcap/trace_lang.hpp>

#include <chrono>
#include <cstdio>
#include <functional>

namespace
{
using namespace txcap;
using Clock = std::chrono::steady_clock;

struct Verdict
{
    bool pass = false;
    std::string detail;
};

Verdict txsea_oracle()
{
    const auto start = Clock::now();
    testing::Rng rng{20260101};
    uint64_t queries = 0, histories = 0;
    for (; histories < 1000; ++histories)
    {
        // Mostly small histories, a few near the upper bound.
        const size_t cap = histories % 50 == 0 ? 10'000 : 800;
        const auto h = testing::random_history(rng, cap, 50, 20);
        txsea::ExpirationMap aware{txsea::Mode::SenderAware};
        txsea::ExpirationMap strict{txsea::Mode::Strict52};
        size_t fed = 0;
        const uint64_t per_block = std::max<uint64_t>(1, 120 / std::max<uint64_t>(1, h.blocks));
        for (uint64_t b = 1; b <= h.blocks; ++b)
        {
            while (fed < h.txs.size() && h.txs[fed].block == b)
            {
                aware.cache_transaction(testing::as_transaction(h.txs[fed]));
                strict.cache_transaction(testing::as_transaction(h.txs[fed]));
                ++fed;
            }
            const testing::TargetIndex index{std::span<const testing::MinedTx>{h.txs.data(), fed}};
            for (uint64_t q = 0; q < per_block; ++q)
            {
                const Address& target = rng.pick(h.contracts);
                const Address& sender = rng.pick(h.senders);
                const uint64_t tested = rng.range(0, b + 1);
                const auto txs = index.of(target);
                const bool want_aware = testing::oracle_expired(txs, target, sender, tested, b);
                const bool want_strict = testing::oracle_expired_blind(txs, target, tested, b);
                if ((aware.test(target, sender, tested) == txsea::Expiry::Expired) != want_aware ||
                    (strict.test(target, sender, tested) == txsea::Expiry::Expired) != want_strict)
                    return {false, "disagreement in history " + std::to_string(histories) + " at block " +
                                       std::to_string(b)};
                queries += 2;
            }
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu histories, %llu queries (both modes), %.1f s",
                  static_cast<unsigned long long>(histories), static_cast<unsigned long long>(queries), secs);
    return {queries >= 100'000 && secs < 60.0, buf};
}

Verdict replay()
{
    std::map<testing::Injection, uint64_t> seen;
    for (uint64_t seed = 1; seed <= 10'000; ++seed)
    {
        const auto r = testing::run_replay_scenario(seed);
        if (!r.ok)
            return {false, r.detail};
        ++seen[r.injection];
    }
    std::string d = "10000 scenarios:";
    for (const auto& [k, n] : seen)
        d += " " + std::string{testing::to_string(k)} + "=" + std::to_string(n);
    return {seen.size() == 4, d};
}

Verdict sigma_table()
{
    const std::map<std::string, sigma::Marker> want = {
        {"NUMBER", sigma::Marker::SWC116},   {"TIMESTAMP", sigma::Marker::SWC116}, {"BLOCKHASH", sigma::Marker::SWC120},
        {"COINBASE", sigma::Marker::SWC120}, {"GASLIMIT", sigma::Marker::SWC120},  {"DIFFICULTY", sigma::Marker::SWC120},
        {"GASPRICE", sigma::Marker::SWC120}, {"BALANCE", sigma::Marker::None}};
    std::map<std::string, sigma::Marker> got;
    for (evm::Opcode op : sigma::nondeterministic_opcodes())
        got[std::string{evm::mnemonic(op)}] = sigma::marker_of(op);
    if (got != want)
        return {false, "opcode/marker table differs"};
    testing::Rng rng{8};
    for (int i = 0; i < 1000; ++i)
    {
        evm::ExecutionTrace t;
        t.root = testing::random_frame(rng);
        std::set<std::string> present;
        std::set<sigma::Marker> markers;
        for (evm::Opcode op : evm::flatten_trace(t))
            if (const auto it = want.find(std::string{evm::mnemonic(op)}); it != want.end())
            {
                present.insert(it->first);
                if (it->second != sigma::Marker::None)
                    markers.insert(it->second);
            }
        const auto expected = present.empty()   ? sigma::Partition::Deterministic
                              : markers.empty() ? sigma::Partition::Untestable
                                                : sigma::Partition::VulnWarning;
        const auto c = sigma::classify_transaction(t);
        if (c.partition != expected || c.markers() != markers || c.sources.size() != present.size())
            return {false, "random trace " + std::to_string(i) + " misclassified"};
    }
    return {true, "8 opcodes, markers exact, 1000 random traces partitioned"};
}

Verdict time_guard()
{
    const auto code = assembler::compile_contract(cases::program("time_guard.mvc")).runtime_code;
    const Address user = testing::numbered_address(1, 0x11);
    const Address guard = testing::numbered_address(1, 0xcc);
    Genesis g;
    g.accounts.push_back({user, Account{u256{10} * kWeiPerEther, 0, {}, {}}});
    g.accounts.push_back({guard, Account{0, 0, code, {}}});
    node::TxtNode n{g};
    auto call = [&](uint64_t nonce, const char* fn, u256 value) {
        Transaction t;
        t.sender = user;
        t.recipient = guard;
        t.nonce = nonce;
        t.function_selector = selector_of(fn);
        t.value = value;
        t.gas_price = 1;
        t.gas_offer = 200'000;
        t.seal();
        return t;
    };
    const auto id = n.open_session();
    const auto lock = n.submit_test(id, call(0, "lock", 10));
    bool separation = false;
    try
    {
        n.submit_test(id, call(1, "release", 0));
    }
    catch (const Error& e)
    {
        separation = e.code() == "TimeSeparationRequired";
    }
    const auto cls = n.poll_status(id).classification;
    bool time_source = false;
    for (const auto& s : cls.sources)
        time_source = time_source || s.opcode == evm::Opcode::NUMBER || s.opcode == evm::Opcode::TIMESTAMP;
    const bool s3 = lock.status == node::Status::S3;
    return {separation && time_source && s3,
            std::string{"TimeSeparationRequired="} + (separation ? "yes" : "no") +
                ", NUMBER/TIMESTAMP in trace=" + (time_source ? "yes" : "no") + ", status " +
                std::string{node::to_string(lock.status)}};
}

Verdict case_studies()
{
    std::string detail;
    bool ok = true;
    for (const auto& id : cases::case_ids())
    {
        const auto r = cases::run_case(id);
        ok = ok && r.golden && r.comparison.ok;
        detail += id + (r.comparison.ok ? ":match " : ":MISMATCH ");
    }
    auto flags = [](const trace::TraceDoc& d) {
        std::vector<bool> v;
        for (const auto& e : d.entries)
            v.push_back(e.reverted);
        return v;
    };
    const auto c3 = flags(cases::run_case("3").rendered);
    ok = ok && c3.size() >= 2 && c3[c3.size() - 1] && c3[c3.size() - 2];
    const auto c4 = cases::run_case("4").rendered;
    ok = ok && c4.entries.size() == 3 && c4.entries[1].function == "buy" && !c4.entries[1].reverted &&
         c4.entries[2].function == "sell" && c4.entries[2].reverted;
    const bool nonpayable = trace::has_revert(cases::run_case("motivating", {"mainnet"}).rendered);
    const bool plain = trace::has_revert(cases::run_case("motivating", {"ropsten"}).rendered);
    const bool payable = trace::has_revert(cases::run_case("motivating", {"payable-bar"}).rendered);
    ok = ok && nonpayable && !plain && !payable;
    detail += "| withdraw reverts: non-payable Bar=" + std::string{nonpayable ? "yes" : "no"} +
              ", no code=" + (plain ? "yes" : "no") + ", payable Bar=" + (payable ? "yes" : "no");
    return {ok, detail};
}

Verdict underpricing()
{
    const auto post = gossip::run_scenario(gossip::default_scenario(false));
    const auto& test = post.broadcasts.front();
    const bool only_txt =
        test.admitted.size() == 1 && post.node_names.at(test.admitted.begin()->first) == "txt";
    const bool isolated = post.included_by.at(test.tx_hash).empty();
    const auto pre = gossip::run_scenario(gossip::default_scenario(true));
    const auto& pre_test = pre.broadcasts.front();
    const bool mined_pre = !pre.included_by.at(pre_test.tx_hash).empty();
    return {only_txt && isolated && mined_pre,
            "default: admitted by " + std::to_string(test.admitted.size()) + ", on " +
                std::to_string(post.included_by.at(test.tx_hash).size()) + " chains after 50 rounds; pre-London: on " +
                std::to_string(pre.included_by.at(pre_test.tx_hash).size()) + " chains"};
}

Verdict retry()
{
    if (txsea::retry_success_probability(0.9319, 1) != 0.9319)
        return {false, "k=1 is not exact"};
    double worst = 0;
    for (int k = 1; k <= 10; ++k)
        worst = std::max(worst, std::abs(txsea::retry_success_probability(0.9319, k) - testing::oracle_retry(0.9319, k)));
    char buf[96];
    std::snprintf(buf, sizeof buf, "k=1 exact, max |error| over k=1..10 = %.3g", worst);
    return {worst <= 1e-12, buf};
}

Verdict trace_round_trip()
{
    testing::Rng rng{0x7ace2};
    for (int i = 0; i < 500; ++i)
    {
        const auto d = testing::random_doc(rng);
        if (trace::parse(trace::print(d)) != d)
            return {false, "doc " + std::to_string(i) + " does not round-trip"};
    }
    size_t golden = 0;
    for (const auto& name : cases::resource_names())
        if (name.ends_with(".trc"))
        {
            trace::parse(cases::resource(name));
            ++golden;
        }
    return {golden == 5, "500 generated docs, " + std::to_string(golden) + " golden files parse"};
}

Verdict cache_footprint()
{
    testing::Rng rng{52};
    size_t checked = 0;
    for (int i = 0; i < 50; ++i)
    {
        const auto h = testing::random_history(rng, 2000);
        txsea::ExpirationMap m{txsea::Mode::Strict52};
        for (const auto& t : h.txs)
            m.cache_transaction(testing::as_transaction(t));
        if (m.serialize().size() != 52 * m.size())
            return {false, "history " + std::to_string(i) + ": " + std::to_string(m.serialize().size()) + " bytes for " +
                               std::to_string(m.size()) + " entries"};
        checked += m.size();
    }
    return {true, std::to_string(checked) + " entries, 52 bytes each"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"txsea-oracle-equivalence", txsea_oracle},
        {"replay-soundness", replay},
        {"sigma-classifier-table", sigma_table},
        {"time-separation-scenario", time_guard},
        {"case-studies", case_studies},
        {"underpricing-isolation", underpricing},
        {"retry-formula", retry},
        {"trace-round-trip", trace_round_trip},
        {"cache-footprint", cache_footprint},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria)
    {
        Verdict v;
        try
        {
            v = run();
        }
        catch (const std::exception& e)
        {
            v = {false, std::string{"threw: "} + e.what()};
        }
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
