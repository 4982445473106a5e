// Copyright 2026 The txcap Authors
// SPDX-License-Identifier: Apache-2.0

// Low-level bindings. Everything structured crosses the boundary as JSON text;
// the txcap package turns it into dicts.

#include <txcap/cases.hpp>
#include <txcap/config.hpp>
#include <txcap/gossip.hpp>
#include <txcap/json_io.hpp>
#include <txcap/report_json.hpp>
#include <txcap/server.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using nlohmann::json;

namespace
{
json parse(const std::string& text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw txcap::Error{"InvalidJson", e.what()};
    }
}

txcap::node::NodeOptions node_options(const std::string& mode, uint64_t ttl_blocks, const std::string& cache)
{
    txcap::node::NodeOptions o;
    o.mode = txcap::txsea::mode_from_string(mode);
    o.ttl_blocks = ttl_blocks;
    o.cache_path = cache;
    return o;
}

/// A node plus the HTTP routing table, without sockets.
class Node
{
public:
    Node(const std::string& genesis, const std::string& mode, uint64_t ttl_blocks, const std::string& cache)
      : node_{genesis.empty() ? txcap::config::default_genesis() : txcap::json::genesis_from_json(parse(genesis)),
              node_options(mode, ttl_blocks, cache)}
    {}

    std::pair<int, std::string> request(const std::string& method, const std::string& path, const std::string& body)
    {
        py::gil_scoped_release nogil;
        const auto r = txcap::server::handle(node_, method, path, body);
        return {r.status, r.body.dump()};
    }

    std::string mine()
    {
        py::gil_scoped_release nogil;
        return txcap::json::to_json(node_.mine().block).dump();
    }

    uint64_t network_floor() const { return node_.network_floor(); }

private:
    txcap::node::TxtNode node_;
};

std::string classify(const std::string& text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return txcap::json::to_json(txcap::sigma::classify_transaction(txcap::json::trace_from_json(parse(text)))).dump();
    std::vector<txcap::evm::Opcode> ops;
    std::istringstream in{text};
    std::string word;
    while (in >> word)
    {
        const auto op = txcap::evm::from_mnemonic(word);
        if (!op)
            throw txcap::Error{"UnknownOpcode", "'" + word + "' is not an opcode mnemonic"};
        ops.push_back(*op);
    }
    return txcap::json::to_json(txcap::sigma::classify_opcodes(ops)).dump();
}

}  // namespace

PYBIND11_MODULE(_txcap, m)
{
    static py::exception<txcap::Error> error_type(m, "RawError");
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (const txcap::Error& e)
        {
            py::set_error(error_type, txcap::json::error_json(e).dump().c_str());
        }
    });

    py::class_<Node>(m, "Node")
        .def(py::init<const std::string&, const std::string&, uint64_t, const std::string&>(), py::arg("genesis") = "",
             py::arg("mode") = "sender-aware", py::arg("ttl_blocks") = 64, py::arg("cache") = "")
        .def("request", &Node::request, py::arg("method"), py::arg("path"), py::arg("body") = "")
        .def("mine", &Node::mine)
        .def_property_readonly("network_floor", &Node::network_floor);

    m.def("retry_probability", &txcap::txsea::retry_success_probability, py::arg("p"), py::arg("k"));
    m.def("classify", &classify, py::arg("trace"));
    m.def("parse_trace", [](const std::string& text) { return txcap::json::to_json(txcap::trace::parse(text)).dump(); });
    m.def("format_trace", [](const std::string& text) { return txcap::trace::print(txcap::trace::parse(text)); });
    m.def("run_case", [](const std::string& id, const std::string& variant) {
        txcap::cases::CaseOptions o;
        o.variant = variant;
        return txcap::json::to_json(txcap::cases::run_case(id, o)).dump();
    }, py::arg("id"), py::arg("variant") = "mainnet");
    m.def("case_ids", &txcap::cases::case_ids);
    m.def("run_scenario", [](const std::string& scenario, bool pre_london) {
        const auto s = scenario.empty() ? txcap::gossip::default_scenario(pre_london)
                                        : txcap::gossip::scenario_from_json(parse(scenario));
        py::gil_scoped_release nogil;
        return txcap::gossip::to_json(txcap::gossip::run_scenario(s)).dump();
    }, py::arg("scenario") = "", py::arg("pre_london") = false);
    m.def("record_size", [](const std::string& mode) { return txcap::txsea::record_size(txcap::txsea::mode_from_string(mode)); });
}
