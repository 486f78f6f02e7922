"""Shared fixtures: the full gluing pipeline is expensive, so it runs at
most twice per session (the second run feeds the determinism check) and
its results are shared between tests."""

import io
import random
import time
from fractions import Fraction

import pytest

from topomin.cli import fmt, ledger_rows
from topomin.competitor import (attach_certificates, competitor_certificate,
                                glue_competitor, measure_audit)
from topomin.geomset import Box
from topomin.scenarios import glue_scenario


def run_glue_pipeline(seed: int):
    """One full run: glue, audit, certificates; returns every artifact
    plus canonical report bytes for determinism comparisons."""
    sc = glue_scenario()
    t0 = time.time()
    Fks, ledger = glue_competitor(sc["seq"], sc["E"], sc["F"], sc["B1"],
                                  sc["params"], random.Random(seed))
    audit = measure_audit(ledger)
    U = sc["U"]
    certs = {}
    for (k, Fk), Ek in zip(sorted(Fks.items()), sc["seq"]):
        certs[k] = competitor_certificate(Ek, Fk, ledger.domain,
                                          ledger.neighborhood,
                                          ledger.params.eps2, U, E=sc["E"])
    attach_certificates(ledger, certs)
    elapsed = time.time() - t0

    buf = io.StringIO()
    buf.write("term,check,value,budget,pass\n")
    for row in ledger_rows(audit):
        buf.write(",".join(fmt(v) for v in row) + "\n")
    cert_bytes = {k: c.serialize().encode() for k, c in certs.items()}
    return {"scenario": sc, "Fks": Fks, "ledger": ledger, "audit": audit,
            "certs": certs, "csv": buf.getvalue().encode(),
            "cert_bytes": cert_bytes, "elapsed": elapsed}


@pytest.fixture(scope="session")
def glue_run():
    return run_glue_pipeline(seed=7)


@pytest.fixture(scope="session")
def glue_rerun():
    return run_glue_pipeline(seed=7)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call":
                continue
            name = rep.nodeid
            if "test_acceptance.py::test_criterion_" not in name:
                continue
            label = name.split("::test_criterion_", 1)[1]
            num = int(label.split("_", 1)[0])
            desc = label.split("_", 1)[1].replace("_", " ") \
                if "_" in label else ""
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines[num] = "criterion %2d (%s): %s" % (num, desc, verdict)
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
