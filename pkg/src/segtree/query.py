"""Hierarchical query model: JSON parsing, validation, canonical serialization.

Grammar (field names are part of the wire contract):
{"levels":[{"selector":"all"|"bookmarked_only",
            "node": {"technique":{"type":"<name>","params":{...}}}
                  | {"operator":{"op":"OR"|"AND"|"AFTER"|"NEAR"|"NOT",
                                 "theta":<int?>,"operands":[<node>...]}}}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ArityError, ParameterOutOfRange, QuerySyntaxError
from .series import TimeSeries
from .techniques import Technique, technique_from_params

OPERATORS = ("OR", "AND", "AFTER", "NEAR", "NOT")
SELECTORS = ("all", "bookmarked_only")


@dataclass(frozen=True)
class TechniqueNode:
    spec: Technique

    def tag(self) -> str:
        return self.spec.tag()

    def to_dict(self) -> dict:
        return {"technique": {"type": self.spec.type_name, "params": self.spec.params()}}

    def validate_series(self, series) -> None:
        self.spec.validate_series(series)


@dataclass(frozen=True)
class OperatorNode:
    op: str
    operands: tuple
    theta: int | None = None

    def tag(self) -> str:
        inner = ",".join(o.tag() for o in self.operands)
        if self.op in ("AFTER", "NEAR"):
            return f"{self.op}[theta={self.theta}]({inner})"
        return f"{self.op}({inner})"

    def to_dict(self) -> dict:
        body: dict = {"op": self.op}
        if self.op in ("AFTER", "NEAR"):
            body["theta"] = self.theta
        body["operands"] = [o.to_dict() for o in self.operands]
        return {"operator": body}

    def validate_series(self, series) -> None:
        for o in self.operands:
            o.validate_series(series)


QueryNode = TechniqueNode | OperatorNode


@dataclass(frozen=True)
class QueryLevel:
    node: QueryNode
    selector: str = "all"


@dataclass(frozen=True)
class QuerySpec:
    levels: tuple[QueryLevel, ...]

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"selector": lv.selector, "node": lv.node.to_dict()} for lv in self.levels
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=False)

    def validate_series(self, series: TimeSeries) -> None:
        """Dimension existence/kind checks, before any evaluation starts."""
        for lv in self.levels:
            lv.node.validate_series(series)


def parse_query(text: str | bytes | dict) -> QuerySpec:
    """Parse and validate the JSON query document."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise QuerySyntaxError(f"invalid JSON: {exc.msg}", position=f"char {exc.pos}") from exc
    else:
        doc = text
    if not isinstance(doc, dict):
        raise QuerySyntaxError("query document must be a JSON object", position="$")
    levels = doc.get("levels")
    if not isinstance(levels, list) or not levels:
        raise QuerySyntaxError("query needs a non-empty 'levels' array", position="levels")
    out = []
    for i, lv in enumerate(levels):
        path = f"levels[{i}]"
        if not isinstance(lv, dict):
            raise QuerySyntaxError("level must be an object", position=path)
        selector = lv.get("selector", "all")
        if selector not in SELECTORS:
            raise QuerySyntaxError(
                f"selector must be one of {SELECTORS}, got {selector!r}", position=f"{path}.selector"
            )
        if "node" not in lv:
            raise QuerySyntaxError("level needs a 'node'", position=path)
        out.append(QueryLevel(node=parse_node(lv["node"], f"{path}.node"), selector=selector))
    return QuerySpec(levels=tuple(out))


def parse_node(d, path: str) -> QueryNode:
    if not isinstance(d, dict):
        raise QuerySyntaxError("node must be an object", position=path)
    if "technique" in d:
        t = d["technique"]
        if not isinstance(t, dict) or not isinstance(t.get("type"), str):
            raise QuerySyntaxError("technique needs a string 'type'", position=f"{path}.technique")
        spec = technique_from_params(t["type"], t.get("params") or {}, path=f"{path}.technique.params")
        return TechniqueNode(spec)
    if "operator" in d:
        o = d["operator"]
        if not isinstance(o, dict):
            raise QuerySyntaxError("operator must be an object", position=f"{path}.operator")
        op = o.get("op")
        if op not in OPERATORS:
            raise QuerySyntaxError(
                f"op must be one of {OPERATORS}, got {op!r}", position=f"{path}.operator.op"
            )
        raw_ops = o.get("operands")
        if not isinstance(raw_ops, list):
            raise QuerySyntaxError("operator needs an 'operands' array", position=f"{path}.operator")
        operands = tuple(
            parse_node(x, f"{path}.operator.operands[{j}]") for j, x in enumerate(raw_ops)
        )
        theta = o.get("theta")
        if op == "NOT":
            if len(operands) != 1:
                raise ArityError(f"NOT takes exactly 1 operand, got {len(operands)} at {path}")
        elif len(operands) < 2:
            raise ArityError(f"{op} takes at least 2 operands, got {len(operands)} at {path}")
        if op in ("AFTER", "NEAR"):
            if theta is None or isinstance(theta, bool) or not isinstance(theta, int) or theta < 0:
                raise ParameterOutOfRange(
                    f"{op} requires a non-negative integer theta", path=f"{path}.operator.theta"
                )
        else:
            theta = None
        return OperatorNode(op=op, operands=operands, theta=theta)
    raise QuerySyntaxError("node must have 'technique' or 'operator'", position=path)


def node_key(node: QueryNode) -> str:
    """Canonical cache key for a query node."""
    return json.dumps(node.to_dict(), separators=(",", ":"), sort_keys=True)
