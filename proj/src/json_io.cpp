// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/json_io.hpp>

#include <algorithm>

namespace txcap::json
{
namespace
{
[[noreturn]] void bad(std::string_view what)
{
    throw Error{"InvalidJson", std::string{what}};
}

const json& require(const json& j, std::string_view key)
{
    if (!j.is_object())
        bad("expected an object");
    const auto it = j.find(std::string{key});
    if (it == j.end())
        bad("missing key '" + std::string{key} + "'");
    return *it;
}

std::string get_string(const json& j, std::string_view key, std::optional<std::string> fallback = std::nullopt)
{
    const auto it = j.find(std::string{key});
    if (it == j.end() || it->is_null())
    {
        if (fallback)
            return *fallback;
        bad("missing key '" + std::string{key} + "'");
    }
    if (!it->is_string())
        bad("'" + std::string{key} + "' must be a string");
    return it->get<std::string>();
}

Address get_address(const json& j, std::string_view key)
{
    return Address::from_hex(get_string(j, key));
}

Bytes get_bytes(const json& j, std::string_view key)
{
    return from_hex(get_string(j, key, std::string{"0x"}));
}
}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what)
{
    if (!j.is_object())
        bad(std::string{what} + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            bad(std::string{what} + ": unknown key '" + key + "'");
}

u256 as_u256(const json& v)
{
    if (v.is_number_unsigned())
        return u256{v.get<uint64_t>()};
    if (v.is_number_integer())
    {
        const auto n = v.get<int64_t>();
        if (n < 0)
            bad("negative number");
        return u256{static_cast<uint64_t>(n)};
    }
    if (v.is_string())
        return parse_u256(v.get<std::string>());
    bad("expected a number or numeric string");
}

uint64_t as_u64(const json& v)
{
    const u256 n = as_u256(v);
    if (n > std::numeric_limits<uint64_t>::max())
        bad("number exceeds 64 bits");
    return static_cast<uint64_t>(n);
}

uint64_t get_u64(const json& j, std::string_view key, std::optional<uint64_t> fallback)
{
    const auto it = j.find(std::string{key});
    if (it == j.end() || it->is_null())
    {
        if (fallback)
            return *fallback;
        bad("missing key '" + std::string{key} + "'");
    }
    try
    {
        return as_u64(*it);
    }
    catch (const Error& e)
    {
        bad("'" + std::string{key} + "': " + e.detail());
    }
}

u256 get_u256(const json& j, std::string_view key, std::optional<u256> fallback)
{
    const auto it = j.find(std::string{key});
    if (it == j.end() || it->is_null())
    {
        if (fallback)
            return *fallback;
        bad("missing key '" + std::string{key} + "'");
    }
    try
    {
        return as_u256(*it);
    }
    catch (const Error& e)
    {
        bad("'" + std::string{key} + "': " + e.detail());
    }
}

json to_json(const Transaction& tx)
{
    json j;
    j["nonce"] = tx.nonce;
    j["gas_price"] = tx.gas_price;
    j["gas_offer"] = tx.gas_offer;
    j["sender"] = tx.sender.hex();
    j["recipient"] = tx.recipient ? json(tx.recipient->hex()) : json(nullptr);
    j["value"] = to_dec(tx.value);
    j["function"] = tx.function_selector ? json(to_hex(*tx.function_selector)) : json(nullptr);
    j["args"] = to_hex(tx.args);
    j["block_included"] = tx.block_included ? json(*tx.block_included) : json(nullptr);
    j["hash"] = tx.hash.hex();
    return j;
}

Transaction transaction_from_json(const json& j)
{
    reject_unknown_keys(j,
                        {"nonce", "gas_price", "gas_offer", "sender", "recipient", "value", "function", "args",
                         "block_included", "hash"},
                        "transaction");
    Transaction tx;
    tx.nonce = get_u64(j, "nonce", 0);
    tx.gas_price = get_u64(j, "gas_price");
    tx.gas_offer = get_u64(j, "gas_offer");
    tx.sender = get_address(j, "sender");
    if (const auto it = j.find("recipient"); it != j.end() && !it->is_null())
        tx.recipient = Address::from_hex(it->get<std::string>());
    tx.value = get_u256(j, "value", u256{0});
    if (const auto it = j.find("function"); it != j.end() && !it->is_null())
    {
        const std::string f = it->get<std::string>();
        if (f.rfind("0x", 0) == 0)
        {
            const Bytes sel = from_hex(f);
            if (sel.size() != 4)
                bad("function selector must be 4 bytes");
            tx.function_selector = Selector{sel[0], sel[1], sel[2], sel[3]};
        }
        else
        {
            tx.function_selector = selector_of(f);
        }
    }
    tx.args = get_bytes(j, "args");
    if (const auto it = j.find("block_included"); it != j.end() && !it->is_null())
        tx.block_included = as_u64(*it);
    tx.seal();
    if (const auto it = j.find("hash"); it != j.end() && !it->is_null())
        if (Hash32::from_hex(it->get<std::string>()) != tx.hash)
            bad("transaction hash does not match its fields");
    return tx;
}

json to_json(const Block& b)
{
    json j;
    j["number"] = b.number;
    j["hash"] = b.hash().hex();
    j["parent_hash"] = b.parent_hash.hex();
    j["gas_limit"] = b.gas_limit;
    j["gas_used"] = b.gas_used;
    j["difficulty"] = b.difficulty;
    j["timestamp"] = b.timestamp;
    j["coinbase"] = b.coinbase.hex();
    j["base_fee"] = b.base_fee;
    j["transactions"] = json::array();
    for (const auto& tx : b.transactions)
        j["transactions"].push_back(to_json(tx));
    return j;
}

Block block_from_json(const json& j)
{
    reject_unknown_keys(j,
                        {"number", "hash", "parent_hash", "gas_limit", "gas_used", "difficulty", "timestamp",
                         "coinbase", "base_fee", "transactions"},
                        "block");
    Block b;
    b.number = get_u64(j, "number");
    b.parent_hash = Hash32::from_hex(get_string(j, "parent_hash"));
    b.gas_limit = get_u64(j, "gas_limit");
    b.gas_used = get_u64(j, "gas_used", 0);
    b.difficulty = get_u64(j, "difficulty", 1);
    b.timestamp = get_u64(j, "timestamp");
    b.coinbase = get_address(j, "coinbase");
    b.base_fee = get_u64(j, "base_fee", 0);
    if (const auto it = j.find("transactions"); it != j.end())
        for (const auto& t : *it)
            b.transactions.push_back(transaction_from_json(t));
    if (const auto it = j.find("hash"); it != j.end() && !it->is_null())
        if (Hash32::from_hex(it->get<std::string>()) != b.hash())
            bad("block hash does not match its fields");
    return b;
}

json to_json(const Receipt& r)
{
    json j;
    j["status"] = r.status == ReceiptStatus::Success ? "Success" : "Reverted";
    j["gas_used"] = r.gas_used;
    j["tx_hash"] = r.tx_hash.hex();
    j["contract_address"] = r.contract_address ? json(r.contract_address->hex()) : json(nullptr);
    j["return_data"] = to_hex(r.return_data);
    j["error"] = r.error;
    return j;
}

json to_json(const evm::TraceFrame& f)
{
    json j;
    j["callee"] = f.callee.hex();
    j["caller"] = f.caller.hex();
    j["value"] = to_dec(f.value);
    j["input"] = to_hex(f.input);
    j["is_create"] = f.is_create;
    j["outcome"] = f.outcome == evm::Outcome::Success ? "Success" : "Revert";
    j["error"] = f.error;
    j["opcodes"] = json::array();
    for (const auto op : f.opcodes)
        j["opcodes"].push_back(std::string{evm::mnemonic(op)});
    j["call_positions"] = f.call_positions;
    j["children"] = json::array();
    for (const auto& c : f.children)
        j["children"].push_back(to_json(c));
    j["logs"] = json::array();
    for (const auto& l : f.logs)
        j["logs"].push_back(to_hex(l));
    return j;
}

evm::TraceFrame frame_from_json(const json& j)
{
    reject_unknown_keys(j,
                        {"callee", "caller", "value", "input", "is_create", "outcome", "error", "opcodes",
                         "call_positions", "children", "logs"},
                        "trace frame");
    evm::TraceFrame f;
    if (j.contains("callee"))
        f.callee = get_address(j, "callee");
    if (j.contains("caller"))
        f.caller = get_address(j, "caller");
    f.value = get_u256(j, "value", u256{0});
    f.input = get_bytes(j, "input");
    f.is_create = j.value("is_create", false);
    const std::string outcome = get_string(j, "outcome", std::string{"Success"});
    if (outcome != "Success" && outcome != "Revert")
        bad("outcome must be Success or Revert");
    f.outcome = outcome == "Success" ? evm::Outcome::Success : evm::Outcome::Revert;
    f.error = get_string(j, "error", std::string{});
    for (const auto& op : require(j, "opcodes"))
    {
        const auto parsed = evm::from_mnemonic(op.get<std::string>());
        if (!parsed)
            bad("unknown opcode '" + op.get<std::string>() + "'");
        f.opcodes.push_back(*parsed);
    }
    if (const auto it = j.find("children"); it != j.end())
        for (const auto& c : *it)
            f.children.push_back(frame_from_json(c));
    if (const auto it = j.find("call_positions"); it != j.end())
        f.call_positions = it->get<std::vector<size_t>>();
    if (f.call_positions.size() != f.children.size())
        bad("call_positions and children differ in length");
    for (const size_t p : f.call_positions)
        if (p >= f.opcodes.size())
            bad("call position out of range");
    if (const auto it = j.find("logs"); it != j.end())
        for (const auto& l : *it)
            f.logs.push_back(from_hex(l.get<std::string>()));
    return f;
}

json to_json(const evm::ExecutionTrace& t)
{
    return json{{"root", to_json(t.root)}};
}

evm::ExecutionTrace trace_from_json(const json& j)
{
    // Either {"root": frame} or a bare frame.
    if (j.is_object() && j.contains("root"))
    {
        reject_unknown_keys(j, {"root"}, "trace");
        return evm::ExecutionTrace{frame_from_json(j["root"])};
    }
    return evm::ExecutionTrace{frame_from_json(j)};
}

json to_json(const ChainParams& p)
{
    return json{{"gas_limit", p.gas_limit},
                {"base_fee", p.base_fee},
                {"block_time_quantum", p.block_time_quantum},
                {"difficulty", p.difficulty},
                {"max_call_depth", p.max_call_depth},
                {"intrinsic_gas", p.gas.intrinsic},
                {"gas_per_opcode", p.gas.per_opcode}};
}

ChainParams params_from_json(const json& j)
{
    reject_unknown_keys(j,
                        {"gas_limit", "base_fee", "block_time_quantum", "difficulty", "max_call_depth",
                         "intrinsic_gas", "gas_per_opcode"},
                        "params");
    ChainParams p;
    p.gas_limit = get_u64(j, "gas_limit", p.gas_limit);
    p.base_fee = get_u64(j, "base_fee", p.base_fee);
    p.block_time_quantum = get_u64(j, "block_time_quantum", p.block_time_quantum);
    p.difficulty = get_u64(j, "difficulty", p.difficulty);
    p.max_call_depth = static_cast<int>(get_u64(j, "max_call_depth", static_cast<uint64_t>(p.max_call_depth)));
    p.gas.intrinsic = get_u64(j, "intrinsic_gas", p.gas.intrinsic);
    p.gas.per_opcode = get_u64(j, "gas_per_opcode", p.gas.per_opcode);
    if (p.gas_limit == 0 || p.block_time_quantum == 0 || p.difficulty == 0)
        bad("params: gas_limit, block_time_quantum and difficulty must be positive");
    if (p.max_call_depth < 1 || p.max_call_depth > 1024)
        bad("params: max_call_depth must be in 1..1024");
    return p;
}

json to_json(const Account& a)
{
    json storage = json::object();
    for (const auto& [k, v] : a.storage)
        storage[to_hex(word_to_be(k))] = to_hex(word_to_be(v));
    return json{{"balance", to_dec(a.balance)}, {"nonce", a.nonce}, {"code", to_hex(a.code)}, {"storage", storage}};
}

json to_json(const Genesis& g)
{
    json accounts = json::array();
    for (const auto& ga : g.accounts)
    {
        json a = to_json(ga.account);
        a["address"] = ga.address.hex();
        accounts.push_back(a);
    }
    return json{{"params", to_json(g.params)}, {"timestamp", g.timestamp}, {"accounts", accounts}};
}

Genesis genesis_from_json(const json& j)
{
    reject_unknown_keys(j, {"params", "timestamp", "accounts"}, "genesis");
    Genesis g;
    if (j.contains("params"))
        g.params = params_from_json(j["params"]);
    g.timestamp = get_u64(j, "timestamp", 0);
    if (const auto it = j.find("accounts"); it != j.end())
        for (const auto& a : *it)
        {
            reject_unknown_keys(a, {"address", "balance", "nonce", "code", "storage"}, "genesis account");
            GenesisAccount ga;
            ga.address = get_address(a, "address");
            ga.account.balance = get_u256(a, "balance", u256{0});
            ga.account.nonce = get_u64(a, "nonce", 0);
            ga.account.code = get_bytes(a, "code");
            if (const auto s = a.find("storage"); s != a.end())
                for (const auto& [k, v] : s->items())
                {
                    const u256 value = parse_u256(v.get<std::string>());
                    if (value != 0)
                        ga.account.storage[parse_u256(k)] = value;
                }
            g.accounts.push_back(std::move(ga));
        }
    return g;
}

json to_json(const sigma::Classification& c)
{
    json sources = json::array();
    for (const auto& s : c.sources)
        sources.push_back({{"opcode", std::string{evm::mnemonic(s.opcode)}},
                           {"marker", s.marker == sigma::Marker::None ? json(nullptr)
                                                                      : json(std::string{sigma::to_string(s.marker)})}});
    return json{{"verdict", std::string{sigma::to_string(c.verdict)}},
                {"sources", sources},
                {"partition", std::string{sigma::to_string(c.partition)}}};
}

json to_json(const sigma::OccurrenceReport& r)
{
    json counts = json::object();
    for (const auto& [op, n] : r.counts)
        counts[std::string{evm::mnemonic(op)}] = n;
    json groups = json::object();
    for (const auto& [m, n] : r.group_totals)
        groups[m == sigma::Marker::None ? "Untestable" : std::string{sigma::to_string(m)}] = n;
    return json{{"traces", r.traces},
                {"nondeterministic_traces", r.nondeterministic_traces},
                {"counts", counts},
                {"groups", groups}};
}

json to_json(const txsea::ExpirationMap& m)
{
    json entries = json::array();
    for (const auto& [addr, e] : m.entries())
    {
        json x{{"address", addr.hex()}, {"last_block", e.last_block}};
        if (m.mode() == txsea::Mode::SenderAware)
        {
            x["last_sender"] = e.last_sender.hex();
            x["other_block"] = e.other_block ? json(*e.other_block) : json(nullptr);
        }
        entries.push_back(x);
    }
    return json{{"mode", std::string{txsea::to_string(m.mode())}},
                {"record_bytes", txsea::record_size(m.mode())},
                {"entries", entries}};
}

json error_json(const Error& e)
{
    const json rule = e.rule().empty() ? json(nullptr) : json(e.rule());
    return json{{"code", e.code()}, {"rule", rule}, {"detail", e.detail()}};
}

}  // namespace txcap::json
