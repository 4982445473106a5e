// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

// txcap: run a simulated network, drive test sessions against a node,
// classify traces and reproduce the case studies.
//
// Exit codes: 0 ok, 2 usage, 3 validation, 4 runtime.

#include <txcap/cases.hpp>
#include <txcap/config.hpp>
#include <txcap/report_json.hpp>
#include <txcap/server.hpp>

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <iomanip>
#include <iostream>
#include <sstream>

using nlohmann::json;
using txcap::Address;
using txcap::BytesView;
using txcap::Error;
namespace cases = txcap::cases;
namespace config = txcap::config;
namespace evm = txcap::evm;
namespace gossip = txcap::gossip;
namespace node = txcap::node;
namespace server = txcap::server;
namespace sigma = txcap::sigma;
namespace trace = txcap::trace;
namespace txsea = txcap::txsea;

namespace
{

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kValidation = 3;
constexpr int kRuntime = 4;

bool is_runtime(std::string_view code)
{
    return code == "IoError" || code == "BindFailed" || code == "ConnectionFailed" || code == "Internal" ||
           code == "CaseSetupFailed" || code == "NodeStalled" || code == "NodeSyncing";
}

int fail(const Error& e)
{
    std::cerr << txcap::json::error_json(e).dump() << "\n";
    return is_runtime(e.code()) ? kRuntime : kValidation;
}

std::string read_input(const std::string& path)
{
    if (path == "-")
    {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    return config::read_file(path);
}

json parse_json(const std::string& text, const std::string& what)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw Error{"InvalidJson", what + ": " + e.what()};
    }
}

/// A trace file is either an execution trace in JSON or a whitespace list of
/// opcode mnemonics (the flattened stack).
sigma::Classification classify_file(const std::string& text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return sigma::classify_transaction(txcap::json::trace_from_json(parse_json(text, "trace")));
    std::vector<evm::Opcode> ops;
    std::istringstream in{text};
    std::string word;
    while (in >> word)
    {
        if (word.starts_with('#'))
        {
            std::getline(in, word);
            continue;
        }
        const auto op = evm::from_mnemonic(word);
        if (!op)
            throw Error{"UnknownOpcode", "'" + word + "' is not an opcode mnemonic"};
        ops.push_back(*op);
    }
    return sigma::classify_opcodes(ops);
}

struct Globals
{
    std::string config_file;
    bool as_json = false;
    // Raw flag values; only the ones given become overrides.
    std::string genesis, scenario, listen, txsea_mode, cache;
    uint64_t ttl_blocks = 0, base_fee = 0, block_quantum = 0;
};

config::Config resolve(CLI::App& app, const Globals& g)
{
    std::vector<std::pair<std::string, std::string>> overrides;
    auto take = [&](const char* flag, const char* key, const std::string& value) {
        if (app.count(flag) > 0)
            overrides.emplace_back(key, value);
    };
    take("--genesis", "genesis", g.genesis);
    take("--scenario", "scenario", g.scenario);
    take("--listen", "listen", g.listen);
    take("--txsea-mode", "txsea_mode", g.txsea_mode);
    take("--cache", "cache", g.cache);
    take("--ttl-blocks", "ttl_blocks", std::to_string(g.ttl_blocks));
    take("--base-fee", "base_fee", std::to_string(g.base_fee));
    take("--block-quantum", "block_quantum", std::to_string(g.block_quantum));
    return config::load(g.config_file, config::process_env(), overrides);
}

void emit(bool as_json, const json& j, const std::string& human)
{
    if (as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << human;
}

// --- session client ------------------------------------------------------------

json call_node(const std::string& url, const std::string& method, const std::string& path, const json& body,
               int& status)
{
    httplib::Client cli{url};
    cli.set_connection_timeout(5);
    const auto res = method == "GET" ? cli.Get(path) : cli.Post(path, body.dump(), "application/json");
    if (!res)
        throw Error{"ConnectionFailed", "no response from " + url + path + ": " + httplib::to_string(res.error())};
    status = res->status;
    return parse_json(res->body, "node response");
}

int session_result(bool as_json, int status, const json& body, const std::string& human)
{
    if (status >= 400)
    {
        std::cerr << json::object({{"code", body.value("code", "HttpError")},
                                   {"rule", body.value("rule", json(nullptr))},
                                   {"detail", body.value("detail", "")}})
                         .dump()
                  << "\n";
        return status >= 500 ? kRuntime : kValidation;
    }
    emit(as_json, body, human);
    return kOk;
}

std::string status_line(const json& s)
{
    std::ostringstream out;
    out << s.at("id").get<std::string>() << " " << s.at("status").get<std::string>() << " ("
        << s.at("expiry").get<std::string>() << ", " << s.at("classification").at("partition").get<std::string>()
        << ") base " << s.at("base_block") << " head " << s.at("head_block") << "\n";
    return out.str();
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"txcap: transaction testing on an instrumented node"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_file, "JSON config file");
    app.add_flag("--json", g.as_json, "Machine-readable output");
    app.add_option("--genesis", g.genesis, "Genesis JSON");
    app.add_option("--scenario", g.scenario, "Scenario JSON for sim run");
    app.add_option("--listen", g.listen, "Node listen address host:port");
    app.add_option("--ttl-blocks", g.ttl_blocks, "Session retention in blocks");
    app.add_option("--txsea-mode", g.txsea_mode, "strict-52 | sender-aware");
    app.add_option("--base-fee", g.base_fee, "Base fee override (wei/gas)");
    app.add_option("--block-quantum", g.block_quantum, "Block time quantum override (s)");
    app.add_option("--cache", g.cache, "TxSEA cache file");

    std::function<int()> action;

    // node serve
    auto* node_cmd = app.add_subcommand("node", "Instrumented node")->require_subcommand(1);
    auto* serve = node_cmd->add_subcommand("serve", "Serve the session API over HTTP");
    std::string ui_dir;
    serve->add_option("--with-ui", ui_dir, "Directory with the built session console");
    serve->callback([&] {
        action = [&] {
            const auto cfg = resolve(app, g);
            node::NodeOptions opts;
            opts.ttl_blocks = cfg.ttl_blocks;
            opts.mode = cfg.txsea_mode;
            opts.cache_path = cfg.cache;
            node::TxtNode n{config::load_genesis(cfg), opts};
            server::Service svc{n, ui_dir};
            const auto [host, port] = config::split_listen(cfg.listen);
            const int bound = svc.bind(host, port);
            std::cout << "listening on " << host << ":" << bound << std::endl;
            std::signal(SIGINT, [](int) { g_stop = 1; });
            std::signal(SIGTERM, [](int) { g_stop = 1; });
            svc.start();
            while (!g_stop)
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            svc.stop();
            return kOk;
        };
    });

    // sim run
    auto* sim = app.add_subcommand("sim", "Gossip network simulation")->require_subcommand(1);
    auto* sim_run = sim->add_subcommand("run", "Run a scenario script");
    bool pre_london = false;
    std::optional<uint64_t> seed;
    sim_run->add_flag("--pre-london", pre_london, "Base fee 0 (built-in scenario only)");
    sim_run->add_option("--seed", seed, "Override the scenario seed");
    sim_run->callback([&] {
        action = [&] {
            const auto cfg = resolve(app, g);
            gossip::Scenario s = cfg.scenario.empty()
                                     ? gossip::default_scenario(pre_london)
                                     : gossip::scenario_from_json(parse_json(config::read_file(cfg.scenario), cfg.scenario));
            if (seed)
                s.seed = *seed;
            if (cfg.base_fee)
                s.genesis.params.base_fee = *cfg.base_fee;
            const auto r = gossip::run_scenario(s);
            const json j = gossip::to_json(r);
            std::ostringstream h;
            for (const auto& b : j.at("broadcasts"))
            {
                h << "tx " << b.at("tx_hash").get<std::string>().substr(0, 18) << ": admitted by "
                  << b.at("admitted").size() << ", rejected by " << b.at("rejected").size() << ", included by "
                  << j.at("included_by").value(b.at("tx_hash").get<std::string>(), json::array()).size() << "\n";
            }
            h << "desyncs: " << j.at("desyncs").size() << ", converged: " << (r.outcome.converged ? "yes" : "no")
              << "\n";
            emit(g.as_json, j, h.str());
            return kOk;
        };
    });

    // session open|tx|status|finalize
    auto* session = app.add_subcommand("session", "Drive a session on a running node")->require_subcommand(1);
    std::string url;
    session->add_option("--url", url, "Node URL (default http://<listen>)");
    auto node_url = [&] { return url.empty() ? "http://" + resolve(app, g).listen : url; };
    std::string sid, tx_file;
    size_t index = 0;
    std::optional<uint64_t> final_price;

    session->add_subcommand("open", "Open a session at the current head")->callback([&] {
        action = [&] {
            int st = 0;
            const json r = call_node(node_url(), "POST", "/sessions", json::object(), st);
            return session_result(g.as_json, st, r, st < 400 ? status_line(r) : "");
        };
    });
    auto* s_tx = session->add_subcommand("tx", "Run a test transaction in the session fork");
    s_tx->add_option("id", sid)->required();
    s_tx->add_option("file", tx_file, "Transaction JSON ('-' for stdin)")->required();
    s_tx->callback([&] {
        action = [&] {
            int st = 0;
            const json r =
                call_node(node_url(), "POST", "/sessions/" + sid + "/tx", parse_json(read_input(tx_file), tx_file), st);
            std::string h;
            if (st < 400)
                h = "receipt " + r.at("receipt").at("status").get<std::string>() + ", status " +
                    r.at("status").get<std::string>() + "\n";
            return session_result(g.as_json, st, r, h);
        };
    });
    auto* s_status = session->add_subcommand("status", "Poll a session");
    s_status->add_option("id", sid)->required();
    s_status->callback([&] {
        action = [&] {
            int st = 0;
            const json r = call_node(node_url(), "GET", "/sessions/" + sid + "/status", json::object(), st);
            return session_result(g.as_json, st, r, st < 400 ? status_line(r) : "");
        };
    });
    auto* s_fin = session->add_subcommand("finalize", "Resubmit a tested transaction at market price");
    s_fin->add_option("id", sid)->required();
    s_fin->add_option("--index", index, "Test transaction index");
    s_fin->add_option("--gas-price", final_price, "Market gas price (default: the network floor)");
    s_fin->callback([&] {
        action = [&] {
            json body{{"index", index}};
            if (final_price)
                body["gas_price"] = *final_price;
            int st = 0;
            const json r = call_node(node_url(), "POST", "/sessions/" + sid + "/finalize", body, st);
            std::string h;
            if (st < 400)
                h = "submitted " + r.at("transaction").at("hash").get<std::string>() + "\n";
            return session_result(g.as_json, st, r, h);
        };
    });

    // sigma classify
    auto* sigma_cmd = app.add_subcommand("sigma", "σ-nondeterminism classifier")->require_subcommand(1);
    auto* classify = sigma_cmd->add_subcommand("classify", "Classify a trace (JSON trace or opcode list)");
    std::string trace_file;
    classify->add_option("file", trace_file)->required();
    classify->callback([&] {
        action = [&] {
            const auto c = classify_file(read_input(trace_file));
            std::ostringstream h;
            h << sigma::to_string(c.partition) << "\n";
            for (const auto& src : c.sources)
                h << "  " << evm::mnemonic(src.opcode) << " " << sigma::to_string(src.marker) << "\n";
            emit(g.as_json, txcap::json::to_json(c), h.str());
            return kOk;
        };
    });

    // txsea query|dump
    auto* txsea_cmd = app.add_subcommand("txsea", "Expiration cache")->require_subcommand(1);
    auto open_cache = [&] {
        const auto cfg = resolve(app, g);
        if (cfg.cache.empty())
            throw Error{"InvalidConfig", "no cache file (use --cache or TXCAP_CACHE)"};
        if (!std::ifstream{cfg.cache})
            throw Error{"IoError", "cannot read '" + cfg.cache + "'"};
        const std::string data = config::read_file(cfg.cache);
        return txsea::ExpirationMap::deserialize(BytesView{reinterpret_cast<const uint8_t*>(data.data()), data.size()},
                                                 cfg.txsea_mode);
    };
    auto* query = txsea_cmd->add_subcommand("query", "Test one target at a block");
    std::string q_target, q_sender;
    uint64_t q_block = 0;
    query->add_option("--target", q_target)->required();
    query->add_option("--sender", q_sender)->required();
    query->add_option("--block", q_block, "Tested block")->required();
    query->callback([&] {
        action = [&] {
            const auto m = open_cache();
            const auto r = m.test(Address::from_hex(q_target), Address::from_hex(q_sender), q_block);
            const std::string s{txsea::to_string(r)};
            emit(g.as_json,
                 json{{"target", Address::from_hex(q_target).hex()},
                      {"sender", Address::from_hex(q_sender).hex()},
                      {"block", q_block},
                      {"expiry", s},
                      {"mode", std::string{txsea::to_string(m.mode())}}},
                 s + "\n");
            return kOk;
        };
    });
    txsea_cmd->add_subcommand("dump", "List cache entries")->callback([&] {
        action = [&] {
            const auto m = open_cache();
            std::ostringstream h;
            for (const auto& [a, e] : m.entries())
            {
                h << a.hex() << " " << e.last_block << " " << e.last_sender.hex();
                if (e.other_block)
                    h << " other " << *e.other_block;
                h << "\n";
            }
            emit(g.as_json, txcap::json::to_json(m), h.str());
            return kOk;
        };
    });

    // trace parse|print
    auto* trace_cmd = app.add_subcommand("trace", "Trace language")->require_subcommand(1);
    std::string trc_file;
    auto* t_parse = trace_cmd->add_subcommand("parse", "Check a trace document");
    t_parse->add_option("file", trc_file)->required();
    t_parse->callback([&] {
        action = [&] {
            const auto doc = trace::parse(read_input(trc_file));
            size_t total = 0;
            std::function<void(const trace::TraceEntry&)> count = [&](const trace::TraceEntry& e) {
                ++total;
                for (const auto& c : e.children)
                    count(c);
            };
            for (const auto& e : doc.entries)
                count(e);
            emit(g.as_json, txcap::json::to_json(doc),
                 "ok: " + std::to_string(total) + " entries, " + (trace::has_revert(doc) ? "reverts" : "no reverts") +
                     "\n");
            return kOk;
        };
    });
    auto* t_print = trace_cmd->add_subcommand("print", "Print a trace document in canonical form");
    t_print->add_option("file", trc_file)->required();
    t_print->callback([&] {
        action = [&] {
            const auto doc = trace::parse(read_input(trc_file));
            const std::string text = trace::print(doc);
            emit(g.as_json, json{{"text", text}}, text);
            return kOk;
        };
    });

    // case run
    auto* case_cmd = app.add_subcommand("case", "Case studies")->require_subcommand(1);
    auto* case_run = case_cmd->add_subcommand("run", "Reproduce a case: 1-4 or motivating");
    std::string case_id;
    cases::CaseOptions case_opts;
    case_run->add_option("id", case_id)->required();
    case_run->add_option("--variant", case_opts.variant, "motivating: mainnet | ropsten | payable-bar");
    case_run->callback([&] {
        action = [&] {
            const auto r = cases::run_case(case_id, case_opts);
            std::ostringstream h;
            h << trace::print(r.rendered);
            h << "verdict: " << r.verdict << "\n";
            if (r.golden)
                h << "golden: " << (r.comparison.ok ? "match" : "MISMATCH") << "\n";
            for (const auto& m : r.comparison.mismatches)
                h << "  " << m << "\n";
            emit(g.as_json, txcap::json::to_json(r), h.str());
            return r.golden && !r.comparison.ok ? kValidation : kOk;
        };
    });

    // prob retry
    auto* prob = app.add_subcommand("prob", "Probability helpers")->require_subcommand(1);
    auto* retry = prob->add_subcommand("retry", "1 - (1 - p)^k");
    double p = 0;
    int64_t k = 1;
    int precision = 5;
    retry->add_option("--p", p, "Single-attempt success probability")->required();
    retry->add_option("--k", k, "Attempts")->required();
    retry->add_option("--precision", precision, "Digits after the point (text output)");
    retry->callback([&] {
        action = [&] {
            const double v = txsea::retry_success_probability(p, k);
            std::ostringstream h;
            h << std::fixed << std::setprecision(precision) << v << "\n";
            emit(g.as_json, json{{"p", p}, {"k", k}, {"p_succ", v}}, h.str());
            return kOk;
        };
    });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    try
    {
        return action ? action() : kUsage;
    }
    catch (const Error& e)
    {
        return fail(e);
    }
    catch (const std::exception& e)
    {
        return fail(Error{"Internal", e.what()});
    }
}
