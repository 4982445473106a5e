// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/report_json.hpp>

namespace txcap::json
{
namespace
{
json assignments(const std::vector<trace::Assignment>& list)
{
    json out = json::array();
    for (const auto& a : list)
        out.push_back({{"lhs", a.lhs}, {"rhs", a.rhs}});
    return out;
}
}  // namespace

json to_json(const trace::TraceEntry& e)
{
    json children = json::array();
    for (const auto& c : e.children)
        children.push_back(to_json(c));
    return json{{"index", e.index},
                {"contract", e.contract},
                {"function", e.function},
                {"pre", assignments(e.pre)},
                {"children", children},
                {"reverted", e.reverted},
                {"post", assignments(e.post)}};
}

json to_json(const trace::TraceDoc& d)
{
    json entries = json::array();
    for (const auto& e : d.entries)
        entries.push_back(to_json(e));
    return json{{"entries", entries}};
}

json to_json(const trace::Comparison& c)
{
    return json{{"ok", c.ok}, {"mismatches", c.mismatches}};
}

json to_json(const node::SessionStatus& s)
{
    json receipts = json::array();
    for (const auto& r : s.receipts)
        receipts.push_back(to_json(r));
    return json{{"id", s.id},
                {"status", std::string{node::to_string(s.status)}},
                {"expiry", std::string{txsea::to_string(s.expiry)}},
                {"witness_block", s.witness_block ? json(*s.witness_block) : json(nullptr)},
                {"classification", to_json(s.classification)},
                {"receipts", receipts},
                {"base_block", s.base_block},
                {"head_block", s.head_block},
                {"expires_after", s.expires_after},
                {"finalized", s.finalized},
                {"finalize_race", s.finalize_race}};
}

json to_json(const node::SubmitResult& r)
{
    return json{{"receipt", to_json(r.receipt)},
                {"trace", to_json(r.trace)},
                {"status", std::string{node::to_string(r.status)}}};
}

json to_json(const node::Replicability& r)
{
    json j{{"replicable", r.replicable}};
    j["reason"] = r.replicable ? json(nullptr) : json(r.reason);
    j["field"] = r.field.empty() ? json(nullptr) : json(r.field);
    j["block"] = r.block ? json(*r.block) : json(nullptr);
    return j;
}

json to_json(const node::TimeSeparation& t)
{
    return json{{"required", t.required},
                {"index", t.index ? json(*t.index) : json(nullptr)},
                {"quanta", t.quanta}};
}

json to_json(const cases::CaseResult& r)
{
    json steps = json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"label", s.label},
                         {"rendered", s.rendered},
                         {"transaction", to_json(s.tx)},
                         {"receipt", to_json(s.receipt)},
                         {"classification", to_json(s.classification)}});
    json env = json::object();
    for (const auto& [k, v] : r.env.symbols)
        env[k] = to_dec(v);
    json j{{"case", r.id},
           {"title", r.title},
           {"steps", steps},
           {"trace", trace::print(r.rendered)},
           {"entries", to_json(r.rendered)["entries"]},
           {"env", env},
           {"verdict", r.verdict}};
    j["variant"] = r.variant.empty() ? json(nullptr) : json(r.variant);
    j["golden_match"] = r.golden ? json(r.comparison.ok) : json(nullptr);
    j["mismatches"] = r.comparison.mismatches;
    return j;
}

}  // namespace txcap::json
