// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/sigma.hpp>

namespace txcap::sigma
{
using evm::Opcode;

std::string_view to_string(Marker m)
{
    switch (m)
    {
    case Marker::SWC116:
        return "SWC116";
    case Marker::SWC120:
        return "SWC120";
    case Marker::None:
        break;
    }
    return "None";
}

std::string_view to_string(Verdict v)
{
    return v == Verdict::SigmaDeterministic ? "SigmaDeterministic" : "SigmaNondeterministic";
}

std::string_view to_string(Partition p)
{
    switch (p)
    {
    case Partition::VulnWarning:
        return "VulnWarning";
    case Partition::Untestable:
        return "Untestable";
    case Partition::Deterministic:
        break;
    }
    return "Deterministic";
}

const std::vector<Opcode>& nondeterministic_opcodes()
{
    static const std::vector<Opcode> set = {Opcode::BALANCE,   Opcode::GASPRICE, Opcode::BLOCKHASH,
                                            Opcode::COINBASE,  Opcode::TIMESTAMP, Opcode::NUMBER,
                                            Opcode::DIFFICULTY, Opcode::GASLIMIT};
    return set;
}

bool is_nondeterministic(Opcode op) noexcept
{
    switch (op)
    {
    case Opcode::BALANCE:
    case Opcode::GASPRICE:
    case Opcode::BLOCKHASH:
    case Opcode::COINBASE:
    case Opcode::TIMESTAMP:
    case Opcode::NUMBER:
    case Opcode::DIFFICULTY:
    case Opcode::GASLIMIT:
        return true;
    default:
        return false;
    }
}

Marker marker_of(Opcode op)
{
    switch (op)
    {
    case Opcode::NUMBER:
    case Opcode::TIMESTAMP:
        return Marker::SWC116;
    case Opcode::BLOCKHASH:
    case Opcode::COINBASE:
    case Opcode::GASLIMIT:
    case Opcode::DIFFICULTY:
    case Opcode::GASPRICE:
        return Marker::SWC120;
    case Opcode::BALANCE:
        return Marker::None;
    default:
        throw Error{"NotASource", std::string{evm::mnemonic(op)}};
    }
}

std::set<Marker> Classification::markers() const
{
    std::set<Marker> out;
    for (const auto& s : sources)
        if (s.marker != Marker::None)
            out.insert(s.marker);
    return out;
}

namespace
{
Classification from_sources(std::set<NondeterminismSource> sources)
{
    Classification c;
    c.sources = std::move(sources);
    if (c.sources.empty())
        return c;
    c.verdict = Verdict::SigmaNondeterministic;
    c.partition = c.markers().empty() ? Partition::Untestable : Partition::VulnWarning;
    return c;
}
}  // namespace

Classification classify_opcodes(std::span<const Opcode> opcodes)
{
    std::set<NondeterminismSource> sources;
    for (const Opcode op : opcodes)
        if (is_nondeterministic(op))
            sources.insert({op, marker_of(op)});
    return from_sources(std::move(sources));
}

Classification classify_transaction(const evm::ExecutionTrace& trace)
{
    const auto flat = evm::flatten_trace(trace);
    return classify_opcodes(flat);
}

Classification classify_sequence(std::span<const evm::ExecutionTrace> traces)
{
    if (traces.empty())
        throw Error{"EmptySequence", "a sequence holds at least one transaction"};
    std::set<NondeterminismSource> sources;
    for (const auto& t : traces)
    {
        const auto c = classify_transaction(t);
        sources.insert(c.sources.begin(), c.sources.end());
    }
    return from_sources(std::move(sources));
}

OccurrenceReport occurrence_report_opcodes(std::span<const std::vector<Opcode>> stacks)
{
    OccurrenceReport r;
    for (const Opcode op : nondeterministic_opcodes())
        r.counts[op] = 0;
    for (const Marker m : {Marker::None, Marker::SWC120, Marker::SWC116})
        r.group_totals[m] = 0;
    for (const auto& stack : stacks)
    {
        ++r.traces;
        const auto c = classify_opcodes(stack);
        if (c.verdict == Verdict::SigmaNondeterministic)
            ++r.nondeterministic_traces;
        // Repeated opcodes within one stack count once.
        for (const auto& s : c.sources)
        {
            ++r.counts[s.opcode];
            ++r.group_totals[s.marker];
        }
    }
    return r;
}

OccurrenceReport occurrence_report(std::span<const evm::ExecutionTrace> traces)
{
    std::vector<std::vector<Opcode>> stacks;
    stacks.reserve(traces.size());
    for (const auto& t : traces)
        stacks.push_back(evm::flatten_trace(t));
    return occurrence_report_opcodes(stacks);
}

}  // namespace txcap::sigma
