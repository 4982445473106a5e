// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/report_json.hpp>
#include <txcap/server.hpp>

#include <httplib.h>

namespace txcap::server
{
using nlohmann::json;

namespace
{
std::vector<std::string_view> segments(std::string_view path)
{
    if (const auto q = path.find('?'); q != std::string_view::npos)
        path = path.substr(0, q);
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < path.size())
    {
        while (i < path.size() && path[i] == '/')
            ++i;
        const size_t j = path.find('/', i);
        const size_t end = j == std::string_view::npos ? path.size() : j;
        if (end > i)
            out.push_back(path.substr(i, end - i));
        i = end;
    }
    return out;
}

json parse_body(std::string_view body)
{
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos)
        return json::object();
    try
    {
        return json::parse(body);
    }
    catch (const json::exception& e)
    {
        throw Error{"InvalidJson", std::string{"request body is not JSON: "} + e.what()};
    }
}

Response error(const Error& e)
{
    return {http_status(e.code()), txcap::json::error_json(e)};
}

Response not_found(std::string_view method, std::string_view path)
{
    return error(Error{"NotFound", "no route for " + std::string{method} + " " + std::string{path}});
}

Response session_route(node::TxtNode& n, std::string_view method, const std::string& id, std::string_view action,
                       const json& body)
{
    if (action == "tx" && method == "POST")
    {
        const json& txj = body.contains("transaction") ? body.at("transaction") : body;
        const auto r = n.submit_test(id, txcap::json::transaction_from_json(txj));
        json out = txcap::json::to_json(r);
        out["classification"] = txcap::json::to_json(sigma::classify_transaction(r.trace));
        return {200, out};
    }
    if (action == "status" && method == "GET")
        return {200, txcap::json::to_json(n.poll_status(id))};
    if (action == "finalize" && method == "POST")
    {
        txcap::json::reject_unknown_keys(body, {"index", "gas_price"}, "finalize request");
        const size_t index = txcap::json::get_u64(body, "index", 0);
        std::optional<uint64_t> price;
        if (body.contains("gas_price"))
            price = txcap::json::get_u64(body, "gas_price");
        const Transaction tx = n.finalize(id, index, price);
        return {200, json{{"transaction", txcap::json::to_json(tx)}, {"index", index}}};
    }
    if (action == "verify" && method == "POST")
    {
        txcap::json::reject_unknown_keys(body, {"transactions"}, "verify request");
        std::vector<Transaction> finals;
        for (const auto& t : body.value("transactions", json::array()))
            finals.push_back(txcap::json::transaction_from_json(t));
        return {200, txcap::json::to_json(n.verify_replicability(id, finals))};
    }
    return {405, txcap::json::error_json(Error{"MethodNotAllowed", std::string{method} + " on session resource"})};
}
}  // namespace

int http_status(std::string_view code)
{
    if (code == "NotFound" || code == "UnknownSession")
        return 404;
    if (code == "MethodNotAllowed")
        return 405;
    if (code == "SessionExpiredTtl")
        return 410;
    if (code == "NotS1" || code == "DuplicateTransaction")
        return 409;
    if (code == "NodeSyncing")
        return 503;
    if (code == "InvalidJson" || code == "BadHex")
        return 400;
    if (code == "Internal")
        return 500;
    return 422;
}

Response handle(node::TxtNode& n, std::string_view method, std::string_view path, std::string_view body)
{
    try
    {
        const auto seg = segments(path);
        const json req = method == "POST" ? parse_body(body) : json::object();
        if (!req.is_object())
            throw Error{"InvalidJson", "request body must be a JSON object"};

        if (seg.size() == 1 && seg[0] == "sessions")
        {
            if (method == "POST")
            {
                txcap::json::reject_unknown_keys(req, {}, "open request");
                const std::string id = n.open_session();
                return {201, txcap::json::to_json(n.poll_status(id))};
            }
            if (method == "GET")
                return {200, json{{"sessions", n.session_ids()}}};
        }
        if (seg.size() == 3 && seg[0] == "sessions")
            return session_route(n, method, std::string{seg[1]}, seg[2], req);
        if (seg.size() == 2 && seg[0] == "chain")
        {
            if (seg[1] == "head" && method == "GET")
            {
                json out = txcap::json::to_json(n.head());
                out["network_floor"] = n.network_floor();
                return {200, out};
            }
            if (seg[1] == "tx" && method == "POST")
            {
                const auto tx = txcap::json::transaction_from_json(req);
                n.submit_market(tx);
                return {202, json{{"hash", tx.hash.hex()}}};
            }
            if (seg[1] == "mine" && method == "POST")
            {
                txcap::json::reject_unknown_keys(req, {"coinbase"}, "mine request");
                Address coinbase;
                if (req.contains("coinbase"))
                    coinbase = Address::from_hex(req.at("coinbase").get<std::string>());
                const auto mined = n.mine(coinbase);
                return {200, txcap::json::to_json(mined.block)};
            }
        }
        if (seg.size() == 2 && seg[0] == "accounts" && method == "GET")
        {
            const Address a = Address::from_hex(seg[1]);
            json out = txcap::json::to_json(n.account(a).value_or(Account{}));
            out["address"] = a.hex();
            return {200, out};
        }
        return not_found(method, path);
    }
    catch (const Error& e)
    {
        return error(e);
    }
    catch (const json::exception& e)
    {
        return error(Error{"InvalidJson", e.what()});
    }
    catch (const std::exception& e)
    {
        return error(Error{"Internal", e.what()});
    }
}

struct Service::Impl
{
    node::TxtNode& node;
    httplib::Server http;
};

Service::Service(node::TxtNode& node, std::string static_dir) : impl_{new Impl{node, {}}}
{
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        const Response r = handle(impl_->node, req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    if (!static_dir.empty())
        impl_->http.set_mount_point("/", static_dir);
    impl_->http.Get(R"(/(sessions|chain|accounts)(/.*)?)", route);
    impl_->http.Post(R"(/(sessions|chain|accounts)(/.*)?)", route);
}

Service::~Service()
{
    stop();
}

int Service::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw Error{"BindFailed", "cannot listen on " + host + ":" + std::to_string(port)};
    return bound;
}

void Service::run()
{
    impl_->http.listen_after_bind();
}

void Service::start()
{
    thread_ = std::thread{[this] { run(); }};
    impl_->http.wait_until_ready();
}

void Service::stop()
{
    impl_->http.stop();
    if (thread_.joinable())
        thread_.join();
}

}  // namespace txcap::server
