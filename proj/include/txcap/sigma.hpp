// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/evm.hpp>

#include <set>

namespace txcap::sigma
{
enum class Marker
{
    None,
    SWC116,  // block values as a time proxy
    SWC120,  // weak randomness from chain attributes
};

std::string_view to_string(Marker m);

struct NondeterminismSource
{
    evm::Opcode opcode = evm::Opcode::NUMBER;
    Marker marker = Marker::None;

    auto operator<=>(const NondeterminismSource&) const = default;
};

/// The eight σ-nondeterministic opcodes, in byte order.
const std::vector<evm::Opcode>& nondeterministic_opcodes();
bool is_nondeterministic(evm::Opcode op) noexcept;
/// Marker for a member of the set; Error{"NotASource"} for anything else.
Marker marker_of(evm::Opcode op);

enum class Verdict
{
    SigmaDeterministic,
    SigmaNondeterministic,
};

enum class Partition
{
    Deterministic,
    VulnWarning,
    Untestable,
};

std::string_view to_string(Verdict v);
std::string_view to_string(Partition p);

struct Classification
{
    Verdict verdict = Verdict::SigmaDeterministic;
    std::set<NondeterminismSource> sources;
    Partition partition = Partition::Deterministic;

    /// SWC markers present among the sources (never None).
    std::set<Marker> markers() const;

    bool operator==(const Classification&) const = default;
};

/// Classification of an already flattened opcode stack.
Classification classify_opcodes(std::span<const evm::Opcode> opcodes);
Classification classify_transaction(const evm::ExecutionTrace& trace);
/// Union over the members. An empty sequence throws Error{"EmptySequence"}.
Classification classify_sequence(std::span<const evm::ExecutionTrace> traces);

struct OccurrenceReport
{
    /// Per opcode: number of traces containing it at least once.
    std::map<evm::Opcode, uint64_t> counts;
    /// Per group (Untestable / SWC120 / SWC116): sum of member counts.
    std::map<Marker, uint64_t> group_totals;
    uint64_t traces = 0;
    uint64_t nondeterministic_traces = 0;
};

OccurrenceReport occurrence_report(std::span<const evm::ExecutionTrace> traces);
OccurrenceReport occurrence_report_opcodes(std::span<const std::vector<evm::Opcode>> stacks);

}  // namespace txcap::sigma
