// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/sigma.hpp>
#include <txcap/trace_lang.hpp>

namespace txcap::cases
{
/// Contract sources and golden traces shipped with the library, keyed by
/// file name ("case1.mvc", "golden/case1.trc", ...).
std::string_view resource(std::string_view name);
std::vector<std::string> resource_names();

/// Parses and compiles a shipped contract. Throws Error{"UnknownCase"}.
assembler::ContractProgram program(std::string_view file);

/// "1", "2", "3", "4", "motivating".
const std::vector<std::string>& case_ids();

struct CaseOptions
{
    /// Motivating example only: "mainnet" (Bar deployed, non-payable),
    /// "ropsten" (the Bar address is a plain account) or "payable-bar".
    std::string variant = "mainnet";
};

struct CaseStep
{
    std::string label;  // Contract.function
    bool rendered = true;
    Transaction tx;
    Receipt receipt;
    evm::ExecutionTrace trace;
    sigma::Classification classification;
};

struct CaseResult
{
    std::string id;
    std::string title;
    std::string variant;
    std::vector<CaseStep> steps;
    trace::TraceDoc rendered;
    /// Absent for variants without a reference trace.
    std::optional<trace::TraceDoc> golden;
    trace::Comparison comparison;
    trace::ValueEnv env;
    /// "unsafe sequence" when any rendered entry reverts, "safe sequence" otherwise.
    std::string verdict;
};

/// Deploys and drives one case on a private chain, one transaction per block.
/// Throws Error{"UnknownCase"}.
CaseResult run_case(std::string_view id, const CaseOptions& options = {});

/// The account that plays A_d in every case.
Address case_user();
/// The fixed address of the motivating example's Bar.
Address bar_address();

}  // namespace txcap::cases
