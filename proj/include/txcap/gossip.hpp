// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/chain.hpp>

#include <json.hpp>

#include <queue>
#include <set>

namespace txcap::gossip
{
using NodeId = size_t;

struct NodePolicy
{
    std::string name;
    /// Admission floor in wei/gas before the base fee is applied.
    uint64_t min_gas_price = 1'000'000'000;
    /// Instrumented nodes accept anything priced at 1 wei or more and never mine.
    bool is_instrumented = false;
    bool is_miner = true;
    /// Drops outbound transaction messages while still following blocks.
    bool firewall = false;

    /// Instrumented: 1 wei. Otherwise max(min_gas_price, base_fee).
    uint64_t effective_floor(uint64_t base_fee) const noexcept
    {
        return is_instrumented ? 1 : std::max(min_gas_price, base_fee);
    }
};

struct PropagationReport
{
    Hash32 tx_hash;
    /// Admitting node -> hop count from the origin.
    std::map<NodeId, uint32_t> admitted;
    std::set<NodeId> rejected;
    /// Never received the message (every path passed through a rejecting node).
    std::set<NodeId> unreached;
};

struct DesyncEvent
{
    NodeId node = 0;
    uint64_t block_number = 0;
    std::vector<Hash32> suppressed_included;
};

struct SimulationOutcome
{
    std::vector<DesyncEvent> desyncs;
    std::set<NodeId> stalled;
    bool converged = false;
};

/// Deterministic discrete-event network. Message latency is a pure function
/// of (seed, sender, receiver, payload), so removing one message never
/// reshuffles the timing of the others.
class SimNetwork
{
public:
    SimNetwork(const Genesis& genesis, std::vector<NodePolicy> policies,
               std::vector<std::pair<NodeId, NodeId>> edges, uint64_t seed = 1, uint64_t max_latency_ms = 50);

    size_t size() const noexcept { return nodes_.size(); }
    const NodePolicy& policy(NodeId id) const { return node(id).policy; }
    NodeId find(std::string_view name) const;
    const std::vector<NodeId>& neighbors(NodeId id) const { return node(id).peers; }

    /// Floods `tx` from `origin` and runs the event queue until quiet.
    /// Throws Error{"UnknownNode"}.
    PropagationReport broadcast(NodeId origin, const Transaction& tx);

    /// `miner` assembles a block from its pool and gossips it; runs until quiet.
    Block mine(NodeId miner);
    /// `rounds` blocks, miners taken round-robin from the mining nodes.
    void mining_rounds(size_t rounds);

    void set_firewall(NodeId id, bool on);

    const WorldState& state(NodeId id) const { return node(id).state; }
    const std::vector<Block>& chain(NodeId id) const { return node(id).chain; }
    const std::vector<Transaction>& pool(NodeId id) const { return node(id).pool; }
    bool chain_contains(NodeId id, const Hash32& tx) const;
    const std::set<Hash32>& suppressed(NodeId id) const { return node(id).suppressed; }

    /// Desync events so far, stalled nodes, and whether every healthy node
    /// agrees on the head.
    SimulationOutcome outcome() const;

    uint64_t now_ms() const noexcept { return now_; }

private:
    struct Node
    {
        NodePolicy policy;
        Address coinbase;
        std::vector<NodeId> peers;
        WorldState state;
        std::vector<Block> chain;
        std::vector<Transaction> pool;
        std::set<Hash32> seen_txs;
        std::set<Hash32> seen_blocks;
        std::map<uint64_t, std::vector<Block>> orphans;
        std::set<Hash32> suppressed;
        bool stalled = false;
    };

    struct Event
    {
        uint64_t time = 0;
        uint64_t seq = 0;
        NodeId to = 0;
        NodeId from = 0;
        uint32_t hops = 0;
        std::optional<Transaction> tx;
        std::optional<Block> block;

        bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
    };

    Node& node(NodeId id);
    const Node& node(NodeId id) const;
    uint64_t latency(NodeId from, NodeId to, const Hash32& payload) const;
    void send_tx(NodeId from, const Transaction& tx, uint32_t hops, std::optional<NodeId> except);
    void send_block(NodeId from, const Block& block, std::optional<NodeId> except);
    void receive_tx(NodeId at, const Transaction& tx, uint32_t hops, std::optional<NodeId> from);
    void receive_block(NodeId at, const Block& block, NodeId from);
    bool try_apply(NodeId at, const Block& block);
    void prune_pool(Node& n);
    void run();

    std::vector<Node> nodes_;
    uint64_t seed_;
    uint64_t max_latency_;
    uint64_t now_ = 0;
    uint64_t seq_ = 0;
    size_t next_miner_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    PropagationReport* current_report_ = nullptr;
    std::vector<DesyncEvent> desyncs_;
};

/// Turns on the firewall for `id`; desync events then show up in outcome().
SimulationOutcome straw_man_firewall(SimNetwork& net, NodeId id);

// --- scenarios ---------------------------------------------------------------

struct ScriptStep
{
    uint64_t time = 0;
    enum class Action
    {
        Broadcast,
        Mine,
        MineRounds,
        Firewall,
    } action = Action::Broadcast;
    std::string node;
    std::optional<Transaction> tx;
    size_t count = 1;
};

struct Scenario
{
    uint64_t seed = 1;
    uint64_t max_latency_ms = 50;
    bool pre_london = false;
    Genesis genesis;
    std::vector<NodePolicy> nodes;
    std::vector<std::pair<std::string, std::string>> topology;
    std::vector<ScriptStep> script;
};

/// Throws Error{"InvalidScenario"} (unknown keys, unknown nodes, bad actions).
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

/// Eight nodes: seven honest miners (one of them with a zero pre-London floor)
/// and one instrumented node; a funded user account at `user` and a 1-wei test
/// transaction broadcast from the instrumented node followed by 50 rounds.
Scenario default_scenario(bool pre_london);
Address default_user();

struct ScenarioReport
{
    std::vector<PropagationReport> broadcasts;
    SimulationOutcome outcome;
    /// Per transaction broadcast: node names whose chain contains it at the end.
    std::map<Hash32, std::vector<std::string>> included_by;
    std::vector<std::string> node_names;
    std::vector<uint64_t> head_numbers;
};

ScenarioReport run_scenario(const Scenario& s);
nlohmann::json to_json(const ScenarioReport& r);

}  // namespace txcap::gossip
