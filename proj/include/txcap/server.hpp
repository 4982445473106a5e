// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <txcap/node.hpp>

#include <json.hpp>

#include <memory>
#include <thread>

namespace txcap::server
{
struct Response
{
    int status = 200;
    nlohmann::json body;
};

/// Routes one request. Socket-free so tests and bindings can drive the API
/// directly; Service is a thin HTTP shell around it.
///
///   POST /sessions                  open a test session
///   GET  /sessions                  live session ids
///   POST /sessions/{id}/tx          run a test transaction in the fork
///   GET  /sessions/{id}/status      re-evaluate and report S1..S4
///   POST /sessions/{id}/verify      replicability of final transactions
///   POST /sessions/{id}/finalize    resubmit a test transaction at market price
///   GET  /chain/head                canonical head block
///   GET  /accounts/{addr}           canonical account
///   POST /chain/tx                  ordinary mempool submission
///   POST /chain/mine                mine the mempool into the next block
///
/// Errors come back as {code, rule, detail}.
Response handle(node::TxtNode& node, std::string_view method, std::string_view path, std::string_view body);

/// HTTP status used for an error code.
int http_status(std::string_view code);

class Service
{
public:
    /// `static_dir`, when set, is served under / (the session console build).
    explicit Service(node::TxtNode& node, std::string static_dir = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port.
    /// Throws Error{"BindFailed"}.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Blocking.
    void run();
    /// run() on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

}  // namespace txcap::server
