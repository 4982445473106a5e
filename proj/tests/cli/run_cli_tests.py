#!/usr/bin/env python3
# Copyright 2026 The txcap Authors
# SPDX-License-Identifier: Apache-2.0
"""Golden-output tests for every txcap subcommand.

Each case runs the binary from tests/cli/inputs and compares stdout, stderr
and the exit code with tests/cli/golden/<name>.txt. JSON output (stdout with
--json, stderr on failure) is validated against tests/schemas.

    run_cli_tests.py --txcap build/txcap [--update]
"""

import argparse
import json
import os
import pathlib
import signal
import subprocess
import sys
import tempfile
import urllib.request

import jsonschema
import referencing

HERE = pathlib.Path(__file__).resolve().parent
INPUTS = HERE / "inputs"
GOLDEN = HERE / "golden"
SCHEMAS = HERE.parent / "schemas"

USER = "0x00000000000000000000000000000000000000a1"
PAYEE = "0x00000000000000000000000000000000000000c3"


def load_registry():
    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        resources.append((p.name, referencing.Resource.from_contents(json.loads(p.read_text()))))
    return referencing.Registry().with_resources(resources)


class Runner:
    def __init__(self, txcap, update):
        self.txcap = txcap
        self.update = update
        self.registry = load_registry()
        self.failures = []
        self.count = 0

    def validate(self, name, text, schema):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            self.failures.append(f"{name}: output is not JSON ({e})")
            return
        schema_doc = self.registry.get_or_retrieve(schema).value.contents
        validator = jsonschema.Draft202012Validator(schema_doc, registry=self.registry)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors[:3]:
            self.failures.append(f"{name}: {schema}: {'/'.join(map(str, e.path))}: {e.message}")

    def run(self, name, args, rc=0, schema=None, env=None):
        self.count += 1
        full_env = {k: v for k, v in os.environ.items() if not k.startswith("TXCAP_")}
        full_env.update(env or {})
        proc = subprocess.run([self.txcap, *args], cwd=INPUTS, capture_output=True, text=True, env=full_env,
                              timeout=120)
        text = proc.stdout
        if proc.stderr:
            text += "--- stderr\n" + proc.stderr
        text += f"--- rc {proc.returncode}\n"
        golden = GOLDEN / f"{name}.txt"
        if self.update:
            golden.write_text(text)
        elif not golden.exists():
            self.failures.append(f"{name}: no golden file {golden.name}")
        elif golden.read_text() != text:
            self.failures.append(f"{name}: output differs from {golden.name}:\n{text}")
        if proc.returncode != rc:
            self.failures.append(f"{name}: exit code {proc.returncode}, expected {rc}")
        if schema and proc.returncode == 0:
            self.validate(name, proc.stdout, schema)
        if proc.returncode in (3, 4):
            if proc.stderr.strip():
                self.validate(name + " (stderr)", proc.stderr.strip().splitlines()[-1], "error.schema.json")
        return proc


def offline_cases(r):
    r.run("prob-retry", ["prob", "retry", "--p", "0.9319", "--k", "2"])
    r.run("prob-retry-k1", ["prob", "retry", "--p", "0.9319", "--k", "1", "--precision", "4"])
    r.run("prob-retry-json", ["--json", "prob", "retry", "--p", "0.9319", "--k", "10"], schema="prob_retry.schema.json")
    r.run("prob-retry-domain", ["prob", "retry", "--p", "1.5", "--k", "2"], rc=3)
    r.run("usage-no-subcommand", [], rc=2)
    r.run("usage-bad-flag", ["prob", "retry", "--p", "0.5", "--k", "2", "--bogus"], rc=2)

    r.run("sim-run", ["sim", "run"])
    r.run("sim-run-pre-london", ["sim", "run", "--pre-london"])
    r.run("sim-run-json", ["--json", "sim", "run"], schema="sim_report.schema.json")

    r.run("sigma-classify-empty", ["sigma", "classify", "empty.ops"])
    r.run("sigma-classify-ops", ["sigma", "classify", "guard.ops"])
    r.run("sigma-classify-trace-json", ["--json", "sigma", "classify", "nested.trace.json"],
          schema="classification.schema.json")
    r.run("sigma-classify-unknown-opcode", ["sigma", "classify", "bad.ops"], rc=3)

    r.run("trace-parse", ["trace", "parse", "../../../cases/golden/case3.trc"])
    r.run("trace-parse-json", ["--json", "trace", "parse", "../../../cases/golden/motivating.trc"],
          schema="trace_doc.schema.json")
    r.run("trace-print", ["trace", "print", "unformatted.trc"])
    r.run("trace-print-json", ["--json", "trace", "print", "unformatted.trc"], schema="trace_text.schema.json")
    r.run("trace-parse-syntax-error", ["trace", "parse", "broken.trc"], rc=3)
    r.run("trace-parse-missing-file", ["trace", "parse", "absent.trc"], rc=4)

    for case in ["1", "2", "3", "4", "motivating"]:
        r.run(f"case-run-{case}", ["case", "run", case])
    r.run("case-run-motivating-ropsten", ["case", "run", "motivating", "--variant", "ropsten"])
    r.run("case-run-3-json", ["--json", "case", "run", "3"], schema="case_result.schema.json")
    r.run("case-run-unknown", ["case", "run", "7"], rc=3)

    r.run("txsea-missing-cache", ["--cache", "absent.bin", "txsea", "dump"], rc=4)
    r.run("txsea-no-cache-configured", ["txsea", "dump"], rc=3)


def post(url, path, body):
    req = urllib.request.Request(url + path, data=json.dumps(body).encode(), method="POST",
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=10) as res:
        return json.loads(res.read())


def live_cases(r, workdir):
    cache = pathlib.Path(workdir) / "cache.bin"
    server = subprocess.Popen([r.txcap, "--listen", "127.0.0.1:0", "--cache", str(cache), "node", "serve"],
                              stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = server.stdout.readline().strip()
        if not line.startswith("listening on "):
            r.failures.append(f"node serve: unexpected first line {line!r}")
            return
        url = "http://" + line.removeprefix("listening on ")
        r.count += 1

        first = r.run("session-open", ["session", "--url", url, "open"])
        sid0 = first.stdout.split()[0]
        second = r.run("session-open-json", ["--json", "session", "--url", url, "open"],
                       schema="session_status.schema.json")
        sid1 = json.loads(second.stdout)["id"]

        r.run("session-tx", ["session", "--url", url, "tx", sid0, "payment.json"])
        r.run("session-tx-json", ["--json", "session", "--url", url, "tx", sid1, "payment.json"],
              schema="submit_result.schema.json")
        r.run("session-tx-not-underpriced", ["session", "--url", url, "tx", sid0, "overpriced.json"], rc=3)
        r.run("session-status", ["session", "--url", url, "status", sid0])
        r.run("session-status-json", ["--json", "session", "--url", url, "status", sid1],
              schema="session_status.schema.json")
        r.run("session-finalize-json", ["--json", "session", "--url", url, "finalize", sid1, "--index", "0"],
              schema="finalize.schema.json")

        # A foreign payment to the same recipient expires both sessions.
        post(url, "/chain/tx", json.loads((INPUTS / "market.json").read_text()))
        post(url, "/chain/mine", {})

        r.run("session-status-expired", ["session", "--url", url, "status", sid0])
        r.run("session-finalize-not-s1", ["session", "--url", url, "finalize", sid0], rc=3)
        r.run("session-status-unknown", ["session", "--url", url, "status", "s-0000000000000000"], rc=3)
    finally:
        server.send_signal(signal.SIGTERM)
        try:
            server.wait(timeout=10)
        except subprocess.TimeoutExpired:
            server.kill()
            r.failures.append("node serve did not stop on SIGTERM")
    if server.returncode not in (0, None):
        r.failures.append(f"node serve exited with {server.returncode}")

    r.run("txsea-dump", ["--cache", str(cache), "txsea", "dump"])
    r.run("txsea-dump-json", ["--json", "--cache", str(cache), "txsea", "dump"], schema="txsea_map.schema.json")
    r.run("txsea-query-expired", ["--cache", str(cache), "txsea", "query", "--target", PAYEE, "--sender", USER,
                                  "--block", "0"])
    r.run("txsea-query-json", ["--json", "--cache", str(cache), "txsea", "query", "--target", PAYEE,
                               "--sender", USER, "--block", "1"], schema="txsea_query.schema.json")
    r.run("txsea-query-env-cache", ["txsea", "query", "--target", USER, "--sender", USER, "--block", "0"],
          env={"TXCAP_CACHE": str(cache)})


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--txcap", required=True)
    ap.add_argument("--update", action="store_true", help="rewrite the golden files")
    args = ap.parse_args()
    r = Runner(str(pathlib.Path(args.txcap).resolve()), args.update)
    GOLDEN.mkdir(exist_ok=True)
    offline_cases(r)
    with tempfile.TemporaryDirectory() as tmp:
        live_cases(r, tmp)
    for f in r.failures:
        print("FAIL", f)
    print(f"{r.count} CLI cases, {len(r.failures)} failures")
    return 1 if r.failures else 0


if __name__ == "__main__":
    sys.exit(main())
