// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <txcap/config.hpp>
#include <txcap/gossip.hpp>
#include <txcap/server.hpp>

#include <gtest/gtest.h>
#include <httplib.h>

namespace txcap
{
namespace
{
using nlohmann::json;
using server::handle;

const Address kPayee = Address::from_hex("0x00000000000000000000000000000000000000c3");
const Address kTrader = Address::from_hex("0x00000000000000000000000000000000000000b2");

json payment(const Address& from, uint64_t nonce, uint64_t price, uint64_t value = 1)
{
    return json{{"sender", from.hex()},     {"recipient", kPayee.hex()}, {"nonce", nonce},
                {"gas_price", price},       {"gas_offer", 21000},        {"value", std::to_string(value)}};
}

void expect_error(const server::Response& r, int status, const std::string& code)
{
    EXPECT_EQ(r.status, status) << r.body.dump();
    ASSERT_TRUE(r.body.is_object());
    EXPECT_EQ(r.body.value("code", ""), code) << r.body.dump();
    EXPECT_TRUE(r.body.contains("rule"));
    EXPECT_TRUE(r.body.contains("detail"));
}

class ServerTest : public ::testing::Test
{
protected:
    node::TxtNode node{config::default_genesis()};
    const Address user = gossip::default_user();
};

TEST_F(ServerTest, SessionLifecycle)
{
    const auto opened = handle(node, "POST", "/sessions", "");
    ASSERT_EQ(opened.status, 201);
    const std::string id = opened.body.at("id");
    EXPECT_EQ(opened.body.at("status"), "S1");

    const auto listed = handle(node, "GET", "/sessions", "");
    EXPECT_EQ(listed.body.at("sessions"), json::array({id}));

    const auto tx = handle(node, "POST", "/sessions/" + id + "/tx", payment(user, 0, 1).dump());
    ASSERT_EQ(tx.status, 200) << tx.body.dump();
    EXPECT_EQ(tx.body.at("receipt").at("status"), "Success");
    EXPECT_EQ(tx.body.at("status"), "S1");
    EXPECT_EQ(tx.body.at("classification").at("verdict"), "SigmaDeterministic");

    const auto wrapped =
        handle(node, "POST", "/sessions/" + id + "/tx", json{{"transaction", payment(user, 1, 2)}}.dump());
    EXPECT_EQ(wrapped.status, 200) << wrapped.body.dump();

    const auto status = handle(node, "GET", "/sessions/" + id + "/status", "");
    EXPECT_EQ(status.body.at("status"), "S1");
    EXPECT_EQ(status.body.at("receipts").size(), 2u);

    const auto verify = handle(node, "POST", "/sessions/" + id + "/verify",
                               json{{"transactions", {payment(user, 0, 5), payment(user, 1, 5)}}}.dump());
    EXPECT_EQ(verify.body.at("replicable"), true) << verify.body.dump();
    const auto mismatch = handle(node, "POST", "/sessions/" + id + "/verify",
                                 json{{"transactions", {payment(user, 0, 5, 2), payment(user, 1, 5)}}}.dump());
    EXPECT_EQ(mismatch.body.at("reason"), "FieldMismatch");
    EXPECT_EQ(mismatch.body.at("field"), "value");

    const auto fin = handle(node, "POST", "/sessions/" + id + "/finalize", R"({"index": 0})");
    ASSERT_EQ(fin.status, 200) << fin.body.dump();
    EXPECT_EQ(fin.body.at("transaction").at("gas_price"), node.network_floor());
    EXPECT_EQ(node.mempool().size(), 1u);

    const auto mined = handle(node, "POST", "/chain/mine", "{}");
    EXPECT_EQ(mined.status, 200);
    EXPECT_EQ(mined.body.at("number"), 1);
    const auto head = handle(node, "GET", "/chain/head", "");
    EXPECT_EQ(head.body.at("number"), 1);
    EXPECT_EQ(head.body.at("network_floor"), node.network_floor());

    const auto acct = handle(node, "GET", "/accounts/" + kPayee.hex(), "");
    EXPECT_EQ(acct.body.at("balance"), "1");
    EXPECT_EQ(acct.body.at("address"), kPayee.hex());
}

TEST_F(ServerTest, ErrorsCarryCodeRuleAndDetail)
{
    const std::string id = handle(node, "POST", "/sessions", "{}").body.at("id");
    expect_error(handle(node, "GET", "/sessions/s-missing/status", ""), 404, "UnknownSession");
    expect_error(handle(node, "GET", "/nowhere", ""), 404, "NotFound");
    expect_error(handle(node, "DELETE", "/sessions/" + id + "/status", ""), 405, "MethodNotAllowed");
    expect_error(handle(node, "POST", "/sessions/" + id + "/tx", "{not json"), 400, "InvalidJson");
    expect_error(handle(node, "POST", "/sessions/" + id + "/tx", "[]"), 400, "InvalidJson");
    expect_error(handle(node, "POST", "/sessions/" + id + "/tx", payment(user, 0, 2'000'000'000).dump()), 422,
                 "NotUnderpriced");

    const auto rule = handle(node, "POST", "/sessions/" + id + "/tx", payment(user, 3, 1).dump());
    expect_error(rule, 422, "SequenceRuleViolation");
    EXPECT_EQ(rule.body.at("rule"), "ascending_nonces");

    auto extra = payment(user, 0, 1);
    extra["colour"] = "blue";
    expect_error(handle(node, "POST", "/sessions/" + id + "/tx", extra.dump()), 400, "InvalidJson");

    expect_error(handle(node, "POST", "/sessions/" + id + "/finalize", R"({"index": 4})"), 422, "InvalidIndex");
    expect_error(handle(node, "POST", "/chain/tx", payment(kTrader, 0, 5).dump()), 422, "Underpriced");
    EXPECT_EQ(handle(node, "POST", "/chain/tx", payment(kTrader, 0, 2'000'000'000).dump()).status, 202);
    expect_error(handle(node, "POST", "/chain/tx", payment(kTrader, 0, 2'000'000'000).dump()), 409,
                 "DuplicateTransaction");
}

TEST_F(ServerTest, ExpiredSessionsReportConflictAndGone)
{
    const std::string id = handle(node, "POST", "/sessions", "").body.at("id");
    ASSERT_EQ(handle(node, "POST", "/sessions/" + id + "/tx", payment(user, 0, 1).dump()).status, 200);
    // The trader pays the same recipient: interference.
    ASSERT_EQ(handle(node, "POST", "/chain/tx", payment(kTrader, 0, 2'000'000'000).dump()).status, 202);
    handle(node, "POST", "/chain/mine", "");
    const auto st = handle(node, "GET", "/sessions/" + id + "/status", "");
    EXPECT_EQ(st.body.at("status"), "S2");
    EXPECT_EQ(st.body.at("witness_block"), 1);
    expect_error(handle(node, "POST", "/sessions/" + id + "/finalize", "{}"), 409, "NotS1");
    for (int i = 0; i < 64; ++i)
        handle(node, "POST", "/chain/mine", "");
    expect_error(handle(node, "GET", "/sessions/" + id + "/status", ""), 410, "SessionExpiredTtl");
    node.set_syncing(true);
    expect_error(handle(node, "POST", "/sessions", ""), 503, "NodeSyncing");
}

TEST(ServerStatus, Mapping)
{
    EXPECT_EQ(server::http_status("UnknownSession"), 404);
    EXPECT_EQ(server::http_status("SessionExpiredTtl"), 410);
    EXPECT_EQ(server::http_status("NotS1"), 409);
    EXPECT_EQ(server::http_status("NodeSyncing"), 503);
    EXPECT_EQ(server::http_status("Internal"), 500);
    EXPECT_EQ(server::http_status("SequenceRuleViolation"), 422);
}

TEST(ServerLive, ServesOverHttp)
{
    node::TxtNode node{config::default_genesis()};
    server::Service svc{node};
    const int port = svc.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    svc.start();
    httplib::Client cli{"127.0.0.1", port};
    cli.set_connection_timeout(5);

    auto open = cli.Post("/sessions", "", "application/json");
    ASSERT_TRUE(open);
    EXPECT_EQ(open->status, 201);
    const std::string id = json::parse(open->body).at("id");

    auto tx = cli.Post("/sessions/" + id + "/tx", payment(gossip::default_user(), 0, 1).dump(), "application/json");
    ASSERT_TRUE(tx);
    EXPECT_EQ(tx->status, 200) << tx->body;

    auto status = cli.Get("/sessions/" + id + "/status");
    ASSERT_TRUE(status);
    EXPECT_EQ(json::parse(status->body).at("status"), "S1");

    auto missing = cli.Get("/sessions/nope/status");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    const auto err = json::parse(missing->body);
    EXPECT_EQ(err.at("code"), "UnknownSession");
    EXPECT_TRUE(err.contains("rule"));

    auto head = cli.Get("/chain/head");
    ASSERT_TRUE(head);
    EXPECT_EQ(json::parse(head->body).at("number"), 0);

    auto acct = cli.Get("/accounts/" + gossip::default_user().hex());
    ASSERT_TRUE(acct);
    EXPECT_EQ(json::parse(acct->body).at("balance"), "10000000000000000000");

    auto fin = cli.Post("/sessions/" + id + "/finalize", R"({"index":0})", "application/json");
    ASSERT_TRUE(fin);
    EXPECT_EQ(fin->status, 200) << fin->body;
    svc.stop();

    server::Service clash{node};
    EXPECT_THROW(clash.bind("256.0.0.1", 1), Error);
}

}  // namespace
}  // namespace txcap
