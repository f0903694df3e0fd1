"""Scenario file loading and validation.

A scenario file is a JSON document describing the database, the partition
format, the queries (a nonadaptive list or an adaptive threshold tree), the
epsilon grid and the evaluation mode. Unknown fields are rejected so that
typos fail loudly. See README.md for the full schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .compose import AdaptiveSpec, CompositionSpec, NonadaptiveSpec
from .errors import DomainError
from .partition import TemplateFormat
from .spc import (
    Enumerate,
    ExplicitEntries,
    IidEntries,
    KnownEntries,
    MonteCarlo,
    PropertyQuery,
    Scenario,
)

SCHEMA_VERSION = 1

_TOP_LEVEL_KEYS = {
    "schema_version", "n", "entry_model", "critical_index", "format",
    "queries", "epsilons", "mode", "seed",
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    spec: CompositionSpec
    epsilons: tuple[float, ...]
    mode: Enumerate | MonteCarlo


def _fail(msg: str) -> None:
    raise DomainError(f"scenario file: {msg}")


def _require_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        _fail(f"unknown field(s) {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        _fail(f"missing field(s) {sorted(missing)} in {where}")


def _parse_entry_model(obj) -> IidEntries | ExplicitEntries | KnownEntries:
    if not isinstance(obj, dict):
        _fail("entry_model must be an object")
    kind = obj.get("kind")
    if kind == "iid":
        _require_keys(obj, {"kind", "p"}, {"kind", "p"}, "entry_model")
        p = obj["p"]
        return IidEntries(tuple(p) if isinstance(p, list) else (float(p),))
    if kind == "explicit":
        _require_keys(obj, {"kind", "probs"}, {"kind", "probs"}, "entry_model")
        if not isinstance(obj["probs"], list) or not obj["probs"]:
            _fail("explicit probs must be a nonempty list")
        rows = tuple(
            tuple(r) if isinstance(r, list) else (float(r),) for r in obj["probs"]
        )
        return ExplicitEntries(rows)
    if kind == "known":
        _require_keys(obj, {"kind", "p", "known", "known_positive"},
                      {"kind", "p", "known"}, "entry_model")
        return KnownEntries(float(obj["p"]), int(obj["known"]),
                            int(obj.get("known_positive", 0)))
    _fail(f"entry_model kind must be iid, explicit or known, got {kind!r}")


def _parse_query(obj) -> PropertyQuery:
    if not isinstance(obj, dict):
        _fail("query descriptors must be objects")
    _require_keys(obj, {"attribute", "negate"}, set(), "query descriptor")
    return PropertyQuery(int(obj.get("attribute", 0)), bool(obj.get("negate", False)))


def _parse_tree(obj, depth: int, m: int):
    """Threshold tree node: {"query": {...}, "next": null | {"threshold": t,
    "low": node, "high": node}}. Every root-to-leaf path has length m."""
    if not isinstance(obj, dict):
        _fail("adaptive tree nodes must be objects")
    _require_keys(obj, {"query", "next"}, {"query"}, f"tree node at depth {depth}")
    query = _parse_query(obj["query"])
    nxt = obj.get("next")
    if depth == m:
        if nxt is not None:
            _fail(f"tree deeper than the {m}-block format")
        return {"query": query, "next": None}
    if nxt is None:
        _fail(f"tree path of length {depth} shorter than the {m}-block format")
    if not isinstance(nxt, dict):
        _fail("tree 'next' must be an object or null")
    _require_keys(nxt, {"threshold", "low", "high"}, {"threshold", "low", "high"},
                  f"branch at depth {depth}")
    return {
        "query": query,
        "next": {
            "threshold": int(nxt["threshold"]),
            "low": _parse_tree(nxt["low"], depth + 1, m),
            "high": _parse_tree(nxt["high"], depth + 1, m),
        },
    }


def _tree_chooser(tree: dict):
    def choose(prefix: tuple[int, ...]) -> PropertyQuery:
        node = tree
        for answer in prefix:
            nxt = node["next"]
            if nxt is None:
                raise DomainError("answer prefix longer than the adaptive tree")
            node = nxt["low"] if answer < nxt["threshold"] else nxt["high"]
        return node["query"]

    return choose


def parse_scenario(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        _fail("top level must be an object")
    _require_keys(doc, _TOP_LEVEL_KEYS,
                  {"schema_version", "n", "entry_model", "format", "queries", "epsilons"},
                  "the scenario")
    if doc["schema_version"] != SCHEMA_VERSION:
        _fail(f"unsupported schema_version {doc['schema_version']!r}, expected {SCHEMA_VERSION}")
    n = int(doc["n"])
    entries = _parse_entry_model(doc["entry_model"])
    scenario = Scenario(n, entries, int(doc.get("critical_index", 1)))
    if not isinstance(doc["format"], list) or not doc["format"]:
        _fail("format must be a nonempty list of block sizes")
    fmt = TemplateFormat(tuple(int(s) for s in doc["format"]))
    if fmt.total > n:
        _fail(f"format uses {fmt.total} indices but n={n}")

    queries = doc["queries"]
    if not isinstance(queries, dict):
        _fail("queries must be an object")
    qmode = queries.get("mode")
    if qmode == "nonadaptive":
        _require_keys(queries, {"mode", "list"}, {"mode", "list"}, "queries")
        qlist = queries["list"]
        if not isinstance(qlist, list) or len(qlist) != fmt.num_blocks:
            _fail(f"need exactly {fmt.num_blocks} query descriptors")
        spec: CompositionSpec = NonadaptiveSpec(fmt, tuple(_parse_query(q) for q in qlist))
    elif qmode == "adaptive":
        _require_keys(queries, {"mode", "tree"}, {"mode", "tree"}, "queries")
        tree = _parse_tree(queries["tree"], 1, fmt.num_blocks)
        spec = AdaptiveSpec(fmt, _tree_chooser(tree))
    else:
        _fail(f"queries.mode must be nonadaptive or adaptive, got {qmode!r}")

    eps = doc["epsilons"]
    if not isinstance(eps, list) or not eps:
        _fail("epsilons must be a nonempty list")
    epsilons = tuple(float(e) for e in eps)
    if any(e < 0 for e in epsilons):
        _fail("epsilons must be nonnegative")
    if any(b <= a for a, b in zip(epsilons, epsilons[1:])):
        _fail("epsilons must be strictly increasing")

    mode_doc = doc.get("mode", "enumerate")
    seed = int(doc.get("seed", 0))
    if mode_doc == "enumerate":
        mode: Enumerate | MonteCarlo = Enumerate()
    elif isinstance(mode_doc, dict):
        _require_keys(mode_doc, {"monte_carlo"}, {"monte_carlo"}, "mode")
        mc = mode_doc["monte_carlo"]
        _require_keys(mc, {"trials"}, {"trials"}, "mode.monte_carlo")
        mode = MonteCarlo(int(mc["trials"]), seed=seed)
    else:
        _fail(f"mode must be 'enumerate' or a monte_carlo object, got {mode_doc!r}")
    return ScenarioConfig(scenario=scenario, spec=spec, epsilons=epsilons, mode=mode)


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DomainError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"scenario file is not valid JSON: {exc}") from exc
    return parse_scenario(doc)
