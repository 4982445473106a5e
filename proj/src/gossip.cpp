// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/gossip.hpp>
#include <txcap/json_io.hpp>

#include <algorithm>

namespace txcap::gossip
{
namespace
{
uint64_t splitmix(uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[noreturn]] void bad_scenario(const std::string& what)
{
    throw Error{"InvalidScenario", what};
}
}  // namespace

SimNetwork::SimNetwork(const Genesis& genesis, std::vector<NodePolicy> policies,
                       std::vector<std::pair<NodeId, NodeId>> edges, uint64_t seed, uint64_t max_latency_ms)
  : seed_{seed}, max_latency_{std::max<uint64_t>(1, max_latency_ms)}
{
    const WorldState base = make_genesis(genesis);
    for (auto& p : policies)
    {
        Node n;
        const Hash32 h = digest("node:" + p.name);
        std::copy_n(h.bytes.begin() + 12, 20, n.coinbase.bytes.begin());
        n.policy = std::move(p);
        n.state = base;
        nodes_.push_back(std::move(n));
    }
    for (const auto& [a, b] : edges)
    {
        if (a >= nodes_.size() || b >= nodes_.size())
            throw Error{"UnknownNode", "edge refers to node " + std::to_string(std::max(a, b))};
        if (a == b)
            continue;
        auto add = [](std::vector<NodeId>& v, NodeId x) {
            if (std::find(v.begin(), v.end(), x) == v.end())
                v.push_back(x);
        };
        add(nodes_[a].peers, b);
        add(nodes_[b].peers, a);
    }
    for (auto& n : nodes_)
        std::sort(n.peers.begin(), n.peers.end());
}

SimNetwork::Node& SimNetwork::node(NodeId id)
{
    if (id >= nodes_.size())
        throw Error{"UnknownNode", std::to_string(id)};
    return nodes_[id];
}

const SimNetwork::Node& SimNetwork::node(NodeId id) const
{
    if (id >= nodes_.size())
        throw Error{"UnknownNode", std::to_string(id)};
    return nodes_[id];
}

NodeId SimNetwork::find(std::string_view name) const
{
    for (NodeId i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].policy.name == name)
            return i;
    throw Error{"UnknownNode", std::string{name}};
}

uint64_t SimNetwork::latency(NodeId from, NodeId to, const Hash32& payload) const
{
    uint64_t h = seed_;
    h = splitmix(h ^ from);
    h = splitmix(h ^ (to << 20));
    for (size_t i = 0; i < 8; ++i)
        h = splitmix(h ^ (uint64_t{payload.bytes[i]} << (8 * i)));
    return 1 + h % max_latency_;
}

void SimNetwork::send_tx(NodeId from, const Transaction& tx, uint32_t hops, std::optional<NodeId> except)
{
    for (const NodeId to : nodes_[from].peers)
    {
        if (except && to == *except)
            continue;
        Event e;
        e.time = now_ + latency(from, to, tx.hash);
        e.seq = seq_++;
        e.to = to;
        e.from = from;
        e.hops = hops;
        e.tx = tx;
        queue_.push(std::move(e));
    }
}

void SimNetwork::send_block(NodeId from, const Block& block, std::optional<NodeId> except)
{
    const Hash32 h = block.hash();
    for (const NodeId to : nodes_[from].peers)
    {
        if (except && to == *except)
            continue;
        Event e;
        e.time = now_ + latency(from, to, h);
        e.seq = seq_++;
        e.to = to;
        e.from = from;
        e.block = block;
        queue_.push(std::move(e));
    }
}

void SimNetwork::receive_tx(NodeId at, const Transaction& tx, uint32_t hops, std::optional<NodeId> from)
{
    Node& n = nodes_[at];
    if (n.stalled || !n.seen_txs.insert(tx.hash).second)
        return;
    const bool admitted = tx.gas_price >= n.policy.effective_floor(n.state.params.base_fee) &&
                          tx.nonce >= n.state.nonce_of(tx.sender) && tx.hash == tx.compute_hash();
    if (current_report_ && current_report_->tx_hash == tx.hash)
    {
        if (admitted)
            current_report_->admitted.emplace(at, hops);
        else
            current_report_->rejected.insert(at);
    }
    if (!admitted)
        return;
    n.pool.push_back(tx);
    if (n.policy.firewall)
    {
        n.suppressed.insert(tx.hash);
        return;
    }
    send_tx(at, tx, hops + 1, from);
}

bool SimNetwork::try_apply(NodeId at, const Block& block)
{
    Node& n = nodes_[at];
    if (block.parent_hash != n.state.head.hash())
        return false;
    DesyncEvent ev;
    for (const auto& tx : block.transactions)
        if (n.suppressed.count(tx.hash))
            ev.suppressed_included.push_back(tx.hash);
    if (!ev.suppressed_included.empty())
    {
        // The node believed these never left it; its pool and the chain now
        // disagree and it stops following.
        ev.node = at;
        ev.block_number = block.number;
        desyncs_.push_back(std::move(ev));
        n.stalled = true;
        return false;
    }
    try
    {
        apply_block(n.state, block);
    }
    catch (const Error&)
    {
        return false;
    }
    n.chain.push_back(block);
    prune_pool(n);
    return true;
}

void SimNetwork::receive_block(NodeId at, const Block& block, NodeId from)
{
    Node& n = nodes_[at];
    if (n.stalled || !n.seen_blocks.insert(block.hash()).second)
        return;
    if (block.number <= n.state.head.number)
        return;
    if (block.number > n.state.head.number + 1)
    {
        n.orphans[block.number].push_back(block);
        return;
    }
    if (!try_apply(at, block))
        return;
    send_block(at, block, from);
    for (;;)
    {
        const auto it = n.orphans.find(n.state.head.number + 1);
        if (it == n.orphans.end() || n.stalled)
            break;
        auto waiting = std::move(it->second);
        n.orphans.erase(it);
        for (const auto& b : waiting)
            if (try_apply(at, b))
            {
                send_block(at, b, std::nullopt);
                break;
            }
    }
    for (auto it = n.orphans.begin(); it != n.orphans.end();)
        it = it->first <= n.state.head.number ? n.orphans.erase(it) : std::next(it);
}

void SimNetwork::prune_pool(Node& n)
{
    std::erase_if(n.pool, [&](const Transaction& tx) { return tx.nonce < n.state.nonce_of(tx.sender); });
}

void SimNetwork::run()
{
    while (!queue_.empty())
    {
        Event e = queue_.top();
        queue_.pop();
        now_ = std::max(now_, e.time);
        if (e.tx)
            receive_tx(e.to, *e.tx, e.hops, e.from);
        else if (e.block)
            receive_block(e.to, *e.block, e.from);
    }
}

PropagationReport SimNetwork::broadcast(NodeId origin, const Transaction& tx)
{
    node(origin);
    PropagationReport report;
    report.tx_hash = tx.hash;
    current_report_ = &report;
    try
    {
        receive_tx(origin, tx, 0, std::nullopt);
        run();
    }
    catch (...)
    {
        current_report_ = nullptr;
        throw;
    }
    current_report_ = nullptr;
    for (NodeId i = 0; i < nodes_.size(); ++i)
        if (!report.admitted.count(i) && !report.rejected.count(i))
            report.unreached.insert(i);
    return report;
}

Block SimNetwork::mine(NodeId miner)
{
    Node& n = node(miner);
    if (n.stalled)
        throw Error{"NodeStalled", n.policy.name};
    BlockParams params;
    params.coinbase = n.coinbase;
    auto mined = mine_block(n.state, n.pool, params);
    n.chain.push_back(mined.block);
    n.seen_blocks.insert(mined.block.hash());
    prune_pool(n);
    send_block(miner, mined.block, std::nullopt);
    run();
    return mined.block;
}

void SimNetwork::mining_rounds(size_t rounds)
{
    for (size_t r = 0; r < rounds; ++r)
    {
        std::vector<NodeId> miners;
        for (NodeId i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].policy.is_miner && !nodes_[i].policy.is_instrumented && !nodes_[i].stalled)
                miners.push_back(i);
        if (miners.empty())
            return;
        mine(miners[next_miner_++ % miners.size()]);
    }
}

void SimNetwork::set_firewall(NodeId id, bool on)
{
    node(id).policy.firewall = on;
}

bool SimNetwork::chain_contains(NodeId id, const Hash32& tx) const
{
    for (const auto& b : node(id).chain)
        for (const auto& t : b.transactions)
            if (t.hash == tx)
                return true;
    return false;
}

SimulationOutcome SimNetwork::outcome() const
{
    SimulationOutcome out;
    out.desyncs = desyncs_;
    std::optional<Hash32> head;
    out.converged = true;
    for (NodeId i = 0; i < nodes_.size(); ++i)
    {
        if (nodes_[i].stalled)
        {
            out.stalled.insert(i);
            continue;
        }
        const Hash32 h = nodes_[i].state.head.hash();
        if (head && *head != h)
            out.converged = false;
        head = h;
    }
    return out;
}

SimulationOutcome straw_man_firewall(SimNetwork& net, NodeId id)
{
    net.set_firewall(id, true);
    return net.outcome();
}

// --- scenarios ---------------------------------------------------------------

Scenario scenario_from_json(const nlohmann::json& j)
{
    try
    {
        json::reject_unknown_keys(j, {"seed", "max_latency_ms", "pre_london", "genesis", "nodes", "topology", "script"},
                                  "scenario");
        Scenario s;
        s.seed = json::get_u64(j, "seed", 1);
        s.max_latency_ms = json::get_u64(j, "max_latency_ms", 50);
        s.pre_london = j.value("pre_london", false);
        if (j.contains("genesis"))
            s.genesis = json::genesis_from_json(j["genesis"]);
        std::set<std::string> names;
        for (const auto& nj : j.at("nodes"))
        {
            json::reject_unknown_keys(nj, {"name", "min_gas_price", "instrumented", "miner", "firewall"}, "node");
            NodePolicy p;
            p.name = nj.at("name").get<std::string>();
            p.min_gas_price = json::get_u64(nj, "min_gas_price", p.min_gas_price);
            p.is_instrumented = nj.value("instrumented", false);
            p.is_miner = nj.value("miner", !p.is_instrumented);
            p.firewall = nj.value("firewall", false);
            if (!names.insert(p.name).second)
                bad_scenario("duplicate node '" + p.name + "'");
            s.nodes.push_back(std::move(p));
        }
        if (s.nodes.empty())
            bad_scenario("no nodes");
        for (const auto& e : j.value("topology", nlohmann::json::array()))
        {
            if (!e.is_array() || e.size() != 2)
                bad_scenario("topology edges are [a, b] pairs");
            const auto a = e[0].get<std::string>(), b = e[1].get<std::string>();
            if (!names.count(a) || !names.count(b))
                bad_scenario("edge refers to unknown node");
            s.topology.emplace_back(a, b);
        }
        for (const auto& st : j.value("script", nlohmann::json::array()))
        {
            json::reject_unknown_keys(st, {"time", "action", "node", "tx", "count"}, "script step");
            ScriptStep step;
            step.time = json::get_u64(st, "time", 0);
            const std::string action = st.at("action").get<std::string>();
            if (action == "broadcast")
                step.action = ScriptStep::Action::Broadcast;
            else if (action == "mine")
                step.action = ScriptStep::Action::Mine;
            else if (action == "mine_rounds")
                step.action = ScriptStep::Action::MineRounds;
            else if (action == "firewall")
                step.action = ScriptStep::Action::Firewall;
            else
                bad_scenario("unknown action '" + action + "'");
            step.node = st.value("node", std::string{});
            if (step.action != ScriptStep::Action::MineRounds && !names.count(step.node))
                bad_scenario("step refers to unknown node '" + step.node + "'");
            if (step.action == ScriptStep::Action::Broadcast)
                step.tx = json::transaction_from_json(st.at("tx"));
            step.count = json::get_u64(st, "count", 1);
            s.script.push_back(std::move(step));
        }
        return s;
    }
    catch (const nlohmann::json::exception& e)
    {
        bad_scenario(e.what());
    }
    catch (const Error& e)
    {
        if (e.code() == "InvalidScenario")
            throw;
        bad_scenario(e.code() + ": " + e.detail());
    }
}

nlohmann::json to_json(const Scenario& s)
{
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& p : s.nodes)
        nodes.push_back({{"name", p.name},
                         {"min_gas_price", p.min_gas_price},
                         {"instrumented", p.is_instrumented},
                         {"miner", p.is_miner},
                         {"firewall", p.firewall}});
    nlohmann::json topo = nlohmann::json::array();
    for (const auto& [a, b] : s.topology)
        topo.push_back({a, b});
    nlohmann::json script = nlohmann::json::array();
    for (const auto& st : s.script)
    {
        static constexpr const char* names[] = {"broadcast", "mine", "mine_rounds", "firewall"};
        nlohmann::json x{{"time", st.time}, {"action", names[static_cast<int>(st.action)]}};
        if (!st.node.empty())
            x["node"] = st.node;
        if (st.tx)
            x["tx"] = json::to_json(*st.tx);
        if (st.action == ScriptStep::Action::MineRounds)
            x["count"] = st.count;
        script.push_back(x);
    }
    return {{"seed", s.seed},         {"max_latency_ms", s.max_latency_ms}, {"pre_london", s.pre_london},
            {"genesis", json::to_json(s.genesis)}, {"nodes", nodes},       {"topology", topo},
            {"script", script}};
}

Address default_user()
{
    return Address::from_hex("0x00000000000000000000000000000000000000a1");
}

Scenario default_scenario(bool pre_london)
{
    Scenario s;
    s.seed = 7;
    s.pre_london = pre_london;
    const Address user = default_user();
    const Address trader = Address::from_hex("0x00000000000000000000000000000000000000b2");
    const Address payee = Address::from_hex("0x00000000000000000000000000000000000000c3");
    s.genesis.accounts.push_back({user, Account{u256{10} * kWeiPerEther, 0, {}, {}}});
    s.genesis.accounts.push_back({trader, Account{u256{10} * kWeiPerEther, 0, {}, {}}});
    for (int i = 0; i < 7; ++i)
    {
        NodePolicy p;
        p.name = "n" + std::to_string(i);
        // n1 would mine anything before the base-fee floor existed.
        p.min_gas_price = i == 1 ? 0 : 1'000'000'000;
        s.nodes.push_back(p);
    }
    NodePolicy txt;
    txt.name = "txt";
    txt.is_instrumented = true;
    txt.is_miner = false;
    txt.min_gas_price = 1;
    s.nodes.push_back(txt);
    for (int i = 0; i < 7; ++i)
        s.topology.emplace_back("n" + std::to_string(i), "n" + std::to_string((i + 1) % 7));
    s.topology.emplace_back("n0", "n3");
    s.topology.emplace_back("n2", "n5");
    s.topology.emplace_back("txt", "n0");
    s.topology.emplace_back("txt", "n1");

    Transaction test;
    test.gas_price = 1;
    test.gas_offer = 21'000;
    test.sender = user;
    test.recipient = payee;
    test.value = 1;
    test.seal();

    Transaction market;
    market.gas_price = 2'000'000'000;
    market.gas_offer = 21'000;
    market.sender = trader;
    market.recipient = payee;
    market.value = 5;
    market.seal();

    s.script.push_back({0, ScriptStep::Action::Broadcast, "txt", test, 1});
    s.script.push_back({1, ScriptStep::Action::Broadcast, "n4", market, 1});
    s.script.push_back({10, ScriptStep::Action::MineRounds, "", std::nullopt, 50});
    return s;
}

ScenarioReport run_scenario(const Scenario& s)
{
    Genesis g = s.genesis;
    if (s.pre_london)
        g.params.base_fee = 0;
    std::map<std::string, NodeId> ids;
    for (NodeId i = 0; i < s.nodes.size(); ++i)
        ids[s.nodes[i].name] = i;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& [a, b] : s.topology)
        edges.emplace_back(ids.at(a), ids.at(b));
    SimNetwork net{g, s.nodes, edges, s.seed, s.max_latency_ms};

    ScenarioReport r;
    std::vector<Hash32> broadcast_txs;
    auto script = s.script;
    std::stable_sort(script.begin(), script.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    for (const auto& st : script)
    {
        switch (st.action)
        {
        case ScriptStep::Action::Broadcast:
            r.broadcasts.push_back(net.broadcast(ids.at(st.node), *st.tx));
            broadcast_txs.push_back(st.tx->hash);
            break;
        case ScriptStep::Action::Mine:
            for (size_t i = 0; i < st.count; ++i)
                net.mine(ids.at(st.node));
            break;
        case ScriptStep::Action::MineRounds:
            net.mining_rounds(st.count);
            break;
        case ScriptStep::Action::Firewall:
            straw_man_firewall(net, ids.at(st.node));
            break;
        }
    }
    r.outcome = net.outcome();
    for (NodeId i = 0; i < net.size(); ++i)
    {
        r.node_names.push_back(net.policy(i).name);
        r.head_numbers.push_back(net.state(i).head.number);
    }
    for (const auto& h : broadcast_txs)
    {
        auto& who = r.included_by[h];
        for (NodeId i = 0; i < net.size(); ++i)
            if (net.chain_contains(i, h))
                who.push_back(net.policy(i).name);
    }
    return r;
}

nlohmann::json to_json(const ScenarioReport& r)
{
    auto names = [&](const auto& ids) {
        nlohmann::json out = nlohmann::json::array();
        for (const NodeId id : ids)
            out.push_back(r.node_names.at(id));
        return out;
    };
    nlohmann::json broadcasts = nlohmann::json::array();
    for (const auto& b : r.broadcasts)
    {
        nlohmann::json admitted = nlohmann::json::object();
        for (const auto& [id, hops] : b.admitted)
            admitted[r.node_names.at(id)] = hops;
        broadcasts.push_back({{"tx_hash", b.tx_hash.hex()},
                              {"admitted", admitted},
                              {"rejected", names(b.rejected)},
                              {"unreached", names(b.unreached)}});
    }
    nlohmann::json included = nlohmann::json::object();
    for (const auto& [h, who] : r.included_by)
        included[h.hex()] = who;
    nlohmann::json desyncs = nlohmann::json::array();
    for (const auto& d : r.outcome.desyncs)
    {
        nlohmann::json txs = nlohmann::json::array();
        for (const auto& h : d.suppressed_included)
            txs.push_back(h.hex());
        desyncs.push_back({{"node", r.node_names.at(d.node)}, {"block", d.block_number}, {"transactions", txs}});
    }
    nlohmann::json heads = nlohmann::json::object();
    for (size_t i = 0; i < r.node_names.size(); ++i)
        heads[r.node_names[i]] = r.head_numbers[i];
    return {{"broadcasts", broadcasts},
            {"included_by", included},
            {"desyncs", desyncs},
            {"stalled", names(r.outcome.stalled)},
            {"converged", r.outcome.converged},
            {"heads", heads}};
}

}  // namespace txcap::gossip
