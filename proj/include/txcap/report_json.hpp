// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/cases.hpp>
#include <txcap/gossip.hpp>
#include <txcap/json_io.hpp>
#include <txcap/node.hpp>

// JSON for the higher-level reports shared by the HTTP API, the CLI and the
// Python module.
namespace txcap::json
{
json to_json(const trace::TraceEntry& e);
json to_json(const trace::TraceDoc& d);
json to_json(const trace::Comparison& c);

json to_json(const node::SessionStatus& s);
json to_json(const node::SubmitResult& r);
json to_json(const node::Replicability& r);
json to_json(const node::TimeSeparation& t);

json to_json(const cases::CaseResult& r);

}  // namespace txcap::json
