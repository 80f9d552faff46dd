"""Input documents for the command line (YAML, ``schema: lc-spec/1``).

Monodromy::

    schema: lc-spec/1
    kind: monodromy
    n: 3
    sigma: ["(123)", "(132)"]

Named rules (``exp``, ``modular``, ``tree``, ``counterexample``)::

    kind: rule
    name: counterexample
    params: {q: 3, c: 1, schedule: power, scale: 50, exponent: 0.5}

Tables, optionally periodic (``"b@-1"`` is ``b`` one period back)::

    kind: rule
    name: table
    q: 2
    base: a
    vertices:
      a: {color: inner, nbrs: [b, "b@-1"]}
      b: {color: outer, nbrs: [a, "a@+1"]}

Jacobian samples and annuli for ``lc dilatation``::

    kind: dilatation
    samples: [[2, 0, 0, 1], [1, 0, 0, 1]]
    annuli: [[1, 2]]
    demo: {K: 1, rows: 3}
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from .complex_core import Color, LineComplex, LineComplexError
from .hurwitz import CycleParseError, MonodromyDatum, format_cycles, parse_cycles
from .rules import TableRule, exp_rule, tree_rule
from .type_criterion import PaddingSchedule, counterexample_family

SCHEMA = "lc-spec/1"


class SpecError(LineComplexError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)


@dataclass
class LoadedSpec:
    kind: str
    doc: dict
    datum: MonodromyDatum | None = None
    rule: object = None
    marks: dict = field(default_factory=dict)


def _node_marks(node, path=(), out=None) -> dict:
    """Source position (1-based line, column) of every node, keyed by path."""
    out = {} if out is None else out
    out[path] = (node.start_mark.line + 1, node.start_mark.column + 1)
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _node_marks(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _node_marks(v, path + (i,), out)
    return out


def parse_spec_text(text: str) -> LoadedSpec:
    try:
        node = yaml.compose(text)
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise SpecError(str(exc.problem), mark.line + 1 if mark else None,
                        mark.column + 1 if mark else None) from None
    if not isinstance(doc, dict):
        raise SpecError("spec must be a mapping", 1, 1)
    marks = _node_marks(node)

    def err(msg, *path):
        line, col = marks.get(tuple(path), (None, None))
        return SpecError(msg, line, col)

    schema = doc.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise err(f"unsupported schema {schema!r}, expected {SCHEMA!r}", "schema")
    kind = doc.get("kind")
    spec = LoadedSpec(kind, doc, marks=marks)
    if kind == "monodromy":
        n = doc.get("n")
        sigma = doc.get("sigma")
        if not isinstance(n, int) or n < 1:
            raise err("n must be a positive integer", "n")
        if not isinstance(sigma, list) or len(sigma) < 2:
            raise err("sigma must list at least two permutations", "sigma")
        if "q" in doc and doc["q"] != len(sigma):
            raise err(f"q = {doc['q']} but sigma has {len(sigma)} entries", "q")
        perms = []
        for i, s in enumerate(sigma):
            try:
                perms.append(parse_cycles(str(s if s is not None else ""), n))
            except CycleParseError as exc:
                line, col = marks.get(("sigma", i), (None, None))
                if line is not None and exc.column is not None:
                    # point at the offending character inside the (maybe quoted) scalar
                    quoted = text.splitlines()[line - 1][col - 1:col] in ("'", '"')
                    col += exc.column - (0 if quoted else 1)
                raise SpecError(f"sigma[{i}]: {exc}", line, col) from None
        spec.datum = MonodromyDatum(n, len(perms), tuple(perms))
    elif kind == "rule":
        spec.rule = _rule_from_doc(doc, err)
    elif kind == "dilatation":
        pass
    else:
        raise err(f"unknown kind {kind!r}", "kind")
    return spec


def load_spec(path: str) -> LoadedSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read())


_TREE = re.compile(r"tree\((\d+)\)$")


def _rule_from_doc(doc, err):
    name = str(doc.get("name", ""))
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise err("params must be a mapping", "params")
    if name == "exp":
        return exp_rule()
    if name == "modular":
        return tree_rule(3)
    m = _TREE.match(name)
    if name == "tree" or m:
        q = int(m.group(1)) if m else int(params.get("q", 3))
        if q < 2:
            raise err("tree needs q >= 2", "name")
        return tree_rule(q)
    if name == "counterexample":
        sched = PaddingSchedule(str(params.get("schedule", "power")),
                                float(params.get("scale", 50.0)),
                                float(params.get("exponent", 0.5)))
        return counterexample_family(int(params.get("q", 3)), int(params.get("c", 1)), sched)
    if name == "table":
        return _table_from_doc(doc, err)
    raise err(f"unknown rule {name!r}", "name")


def _table_from_doc(doc, err):
    q = doc.get("q")
    verts = doc.get("vertices")
    if not isinstance(q, int) or q < 2:
        raise err("table needs an integer q >= 2", "q")
    if not isinstance(verts, dict) or not verts:
        raise err("table needs a 'vertices' mapping", "vertices")
    rows = {}
    for vname, row in verts.items():
        if not isinstance(row, dict):
            raise err(f"vertex {vname!r} must be a mapping", "vertices", vname)
        try:
            color = Color(str(row.get("color", "")).lower())
        except ValueError:
            raise err(f"vertex {vname!r}: color must be inner or outer", "vertices", vname) from None
        nbrs = row.get("nbrs")
        if not isinstance(nbrs, list):
            raise err(f"vertex {vname!r}: nbrs must be a list", "vertices", vname)
        rows[str(vname)] = (color, [str(x) for x in nbrs])
    base = str(doc.get("base", next(iter(rows))))
    return TableRule(q, rows, base, name=str(doc.get("label", "table")))


# ---------------------------------------------------------------------------
# writing


def monodromy_doc(d: MonodromyDatum) -> dict:
    return {"schema": SCHEMA, "kind": "monodromy", "n": d.n, "q": d.q,
            "sigma": [format_cycles(p) for p in d.sigma]}


def table_doc(c: LineComplex, prefix: str = "v") -> dict:
    """Structured dump of a finite complex as a ``table`` rule."""
    verts = {}
    for v, color in enumerate(c.colors):
        verts[f"{prefix}{v}"] = {"color": color.value,
                                 "nbrs": [f"{prefix}{w}" for w, _ in c.ends[v]]}
    return {"schema": SCHEMA, "kind": "rule", "name": "table", "q": c.q,
            "base": f"{prefix}0", "vertices": verts}


def rule_table_doc(rule: TableRule) -> dict:
    verts = {}
    for vname, (color, refs) in rule.rows().items():
        verts[vname] = {"color": color.value,
                        "nbrs": [w if off == 0 else f"{w}@{off:+d}" for w, off in refs]}
    return {"schema": SCHEMA, "kind": "rule", "name": "table", "q": rule.q,
            "base": rule.base[0], "vertices": verts}


def dump_doc(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
