"""JSON file formats for graphs, mechanisms and privacy reports, plus CSV helpers.

Floats are written with ``repr`` (shortest round-trip form), so mechanisms
reload bit-for-bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .errors import GraphValidationError
from .graph import ProfileGraph, make_graph
from .mechanisms import Mechanism
from .verifier import PrivacyReport

_GRAPH_KEYS = {"epsilon", "profiles", "edges"}
_PROFILE_KEYS = {"id", "dist"}
_MECH_KEYS = {"epsilon", "graph_hash", "profile_ids", "matrices"}


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise GraphValidationError([f"{where} must be an object"])
    extra = set(obj) - allowed
    missing = allowed - set(obj)
    problems = [f"{where}: unknown key {k!r}" for k in sorted(extra)]
    problems += [f"{where}: missing key {k!r}" for k in sorted(missing)]
    if problems:
        raise GraphValidationError(problems)


def graph_from_dict(obj: dict) -> ProfileGraph:
    _reject_unknown(obj, _GRAPH_KEYS, "graph")
    profiles = []
    for n, p in enumerate(obj["profiles"]):
        _reject_unknown(p, _PROFILE_KEYS, f"profiles[{n}]")
        profiles.append((p["id"], tuple(p["dist"])))
    return make_graph(profiles, obj["edges"], obj["epsilon"])


def load_graph(path) -> ProfileGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def dump_graph(graph: ProfileGraph) -> str:
    return json.dumps(graph.to_dict(), indent=2) + "\n"


def mechanism_to_dict(mech: Mechanism) -> dict:
    return {
        "epsilon": mech.epsilon,
        "graph_hash": mech.graph_hash,
        "profile_ids": list(mech.profile_ids),
        "matrices": mech.matrices.tolist(),
    }


def mechanism_from_dict(obj: dict) -> Mechanism:
    if not isinstance(obj, dict) or set(obj) != _MECH_KEYS:
        raise ValueError(f"mechanism file must have exactly the keys {sorted(_MECH_KEYS)}")
    return Mechanism(float(obj["epsilon"]), str(obj["graph_hash"]), tuple(obj["profile_ids"]), obj["matrices"])


def dump_mechanism(mech: Mechanism) -> str:
    return json.dumps(mechanism_to_dict(mech), indent=1) + "\n"


def load_mechanism(path) -> Mechanism:
    return mechanism_from_dict(json.loads(Path(path).read_text()))


def _ratio(value: float):
    return None if math.isinf(value) else value


def report_to_dict(report: PrivacyReport) -> dict:
    out = {
        "epsilon": report.epsilon,
        "overall": _ratio(report.overall),
        "overall_infinite": math.isinf(report.overall),
        "pass": report.passed,
        "estimated": report.estimated,
        "per_edge": [],
    }
    for e in report.per_edge:
        row = {
            "edge": list(e.edge),
            "worst_output": e.worst_output,
            "max_abs_log_ratio": _ratio(e.max_abs_log_ratio),
            "infinite": e.infinite,
        }
        if e.interval is not None:
            row["interval"] = [_ratio(v) for v in e.interval]
        out["per_edge"].append(row)
    if report.overall_interval is not None:
        out["overall_interval"] = [_ratio(v) for v in report.overall_interval]
    return out


def dump_report(report: PrivacyReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_csv(report: PrivacyReport) -> str:
    rows = [
        (a, b, e.worst_output, "inf" if e.infinite else e.max_abs_log_ratio, report.epsilon, report.passed)
        for e in report.per_edge
        for a, b in [e.edge]
    ]
    return write_csv(["profile_a", "profile_b", "worst_output", "max_abs_log_ratio", "epsilon", "pass"], rows)


def _cell(v):
    if isinstance(v, float):
        return repr(float(v))
    return v


def write_csv(header: Sequence[str], rows: Iterable[Sequence], path=None) -> str:
    """Render rows as RFC 4180 CSV; also write to ``path`` unless None or '-'."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    text = buf.getvalue()
    if path not in (None, "-"):
        Path(path).write_text(text)
    return text
