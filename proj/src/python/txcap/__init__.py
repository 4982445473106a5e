# Copyright 2026 The txcap Authors
# SPDX-License-Identifier: Apache-2.0
"""Python access to the txcap library: sessions, classifier, traces, cases."""

from __future__ import annotations

import json
from typing import Any

from . import _txcap

__all__ = [
    "TxcapError",
    "Node",
    "retry_probability",
    "classify",
    "parse_trace",
    "format_trace",
    "run_case",
    "case_ids",
    "run_scenario",
    "record_size",
]


class TxcapError(Exception):
    """A library error carrying the same {code, rule, detail} as the HTTP API."""

    def __init__(self, payload: dict[str, Any]):
        super().__init__(f"{payload.get('code')}: {payload.get('detail')}")
        self.code = payload.get("code")
        self.rule = payload.get("rule")
        self.detail = payload.get("detail")
        self.payload = payload


def _call(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except _txcap.RawError as e:
        raise TxcapError(json.loads(str(e))) from None


def _encode(obj: Any) -> str:
    if obj is None:
        return ""
    return obj if isinstance(obj, str) else json.dumps(obj)


class Node:
    """An instrumented node driven through its HTTP routes, minus the sockets.

    Request methods return the decoded body for 2xx responses and raise
    TxcapError otherwise.
    """

    def __init__(self, genesis: Any = None, mode: str = "sender-aware", ttl_blocks: int = 64, cache: str = ""):
        self._n = _call(_txcap.Node, _encode(genesis), mode, ttl_blocks, cache)

    @property
    def network_floor(self) -> int:
        return self._n.network_floor

    def raw(self, method: str, path: str, body: Any = None) -> tuple[int, dict]:
        status, text = self._n.request(method, path, _encode(body))
        return status, json.loads(text)

    def _ok(self, method: str, path: str, body: Any = None) -> dict:
        status, out = self.raw(method, path, body)
        if status >= 300:
            raise TxcapError(out)
        return out

    def open_session(self) -> dict:
        return self._ok("POST", "/sessions")

    def submit(self, session: str, tx: dict) -> dict:
        return self._ok("POST", f"/sessions/{session}/tx", tx)

    def status(self, session: str) -> dict:
        return self._ok("GET", f"/sessions/{session}/status")

    def finalize(self, session: str, index: int = 0, gas_price: int | None = None) -> dict:
        body: dict[str, Any] = {"index": index}
        if gas_price is not None:
            body["gas_price"] = gas_price
        return self._ok("POST", f"/sessions/{session}/finalize", body)

    def head(self) -> dict:
        return self._ok("GET", "/chain/head")

    def account(self, address: str) -> dict:
        return self._ok("GET", f"/accounts/{address}")

    def submit_market(self, tx: dict) -> dict:
        return self._ok("POST", "/chain/tx", tx)

    def mine(self) -> dict:
        return json.loads(_call(self._n.mine))


def retry_probability(p: float, k: int) -> float:
    return _call(_txcap.retry_probability, p, k)


def classify(trace: Any) -> dict:
    """Trace as a JSON object/text, or a whitespace-separated opcode list."""
    text = trace if isinstance(trace, str) else json.dumps(trace)
    return json.loads(_call(_txcap.classify, text))


def parse_trace(text: str) -> dict:
    return json.loads(_call(_txcap.parse_trace, text))


def format_trace(text: str) -> str:
    return _call(_txcap.format_trace, text)


def run_case(case_id: str, variant: str = "mainnet") -> dict:
    return json.loads(_call(_txcap.run_case, case_id, variant))


def case_ids() -> list[str]:
    return list(_txcap.case_ids())


def run_scenario(scenario: Any = None, pre_london: bool = False) -> dict:
    return json.loads(_call(_txcap.run_scenario, _encode(scenario), pre_london))


def record_size(mode: str) -> int:
    return _call(_txcap.record_size, mode)
