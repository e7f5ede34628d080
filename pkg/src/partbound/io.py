"""Text formats for instances, witnesses, protocol trees and decision trees."""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path
from typing import Union

from .comm import Protocol, ProtocolLeaf, ProtocolNode
from .core import Assignment, CommInstance, InputError, QueryInstance, Rectangle, Witness, as_rational, fmt_rational
from .query import DecisionTree, TreeLeaf, TreeNode

_TOKEN = re.compile(r"\{[^}]*\}|\S+")


def _lines(text: str) -> list[tuple[int, str]]:
    """Nonblank lines with 1-based numbers; ``#`` starts a comment."""
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def _entry(tok: str, alphabet: int, relation: bool, no: int):
    try:
        if tok == "*":
            return None
        if tok.startswith("{"):
            if not relation:
                raise InputError("set entries need relation mode")
            inner = tok[1:-1].strip()
            vals = [int(v) for v in inner.split(",") if v.strip()] if inner else []
            if not vals:
                raise InputError("empty output set; use * for an undefined input")
        else:
            vals = [int(tok)]
    except ValueError:
        raise InputError(f"line {no}: bad symbol {tok!r}") from None
    except InputError as e:
        raise InputError(f"line {no}: {e}") from None
    for v in vals:
        if not 0 <= v < alphabet:
            raise InputError(f"line {no}: symbol {v} outside [0, {alphabet})")
    if relation:
        return frozenset(vals)
    return vals[0]


def _header(lines, expected: str, fields: list[str]) -> tuple[dict, bool]:
    if not lines or lines[0][1] != expected:
        raise InputError(f"line {lines[0][0] if lines else 1}: expected header {expected!r}")
    if len(lines) < 2:
        raise InputError("missing size line")
    no, line = lines[1]
    toks = line.split()
    relation = False
    if toks and toks[-1] == "relation":
        relation = True
        toks = toks[:-1]
    if len(toks) != 2 * len(fields) or [toks[i] for i in range(0, len(toks), 2)] != fields:
        raise InputError(f"line {no}: expected '{' '.join(f + ' N' for f in fields)} [relation]'")
    try:
        vals = {f: int(toks[2 * i + 1]) for i, f in enumerate(fields)}
    except ValueError:
        raise InputError(f"line {no}: sizes must be integers") from None
    return vals, relation


def parse_instance_text(text: str) -> Union[CommInstance, QueryInstance]:
    lines = _lines(text)
    if not lines:
        raise InputError("empty instance file")
    head = lines[0][1]
    if head == "COMM v1":
        size, rel = _header(lines, "COMM v1", ["rows", "cols", "alphabet"])
        r, c, a = size["rows"], size["cols"], size["alphabet"]
        if r < 1 or c < 1 or a < 1:
            raise InputError(f"line {lines[1][0]}: sizes must be positive")
        body = lines[2:]
        if len(body) != r:
            raise InputError(f"expected {r} grid lines, found {len(body)}")
        cells = []
        for no, line in body:
            toks = _TOKEN.findall(line)
            if len(toks) != c:
                raise InputError(f"line {no}: expected {c} entries, found {len(toks)}")
            cells.extend(_entry(t, a, rel, no) for t in toks)
        return CommInstance(r, c, a, tuple(cells), rel)
    if head == "QUERY v1":
        size, rel = _header(lines, "QUERY v1", ["n", "m"])
        n, m = size["n"], size["m"]
        if n < 0 or m < 1 or n > 24:
            raise InputError(f"line {lines[1][0]}: need 0 <= n <= 24 and m >= 1")
        body = lines[2:]
        if len(body) != 1 << n:
            raise InputError(f"expected {1 << n} value lines, found {len(body)}")
        table = []
        for no, line in body:
            toks = _TOKEN.findall(line)
            if len(toks) != 1:
                raise InputError(f"line {no}: expected one entry")
            table.append(_entry(toks[0], 1 << m, rel, no))
        return QueryInstance(n, m, tuple(table), rel)
    raise InputError(f"line {lines[0][0]}: unknown header {head!r}")


def parse_instance(path) -> Union[CommInstance, QueryInstance]:
    return parse_instance_text(Path(path).read_text())


def _fmt_entry(e) -> str:
    if e is None:
        return "*"
    if isinstance(e, frozenset):
        return "{" + ",".join(str(v) for v in sorted(e)) + "}"
    return str(e)


def serialize_instance(instance) -> str:
    rel = " relation" if instance.relation else ""
    if isinstance(instance, CommInstance):
        out = ["COMM v1", f"rows {instance.nrows} cols {instance.ncols} alphabet {instance.alphabet_size}{rel}"]
        for x in range(instance.nrows):
            out.append(" ".join(_fmt_entry(instance.value(x, y)) for y in range(instance.ncols)))
    else:
        out = ["QUERY v1", f"n {instance.n} m {instance.m}{rel}"]
        out.extend(_fmt_entry(e) for e in instance.table)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# witnesses


def _hex(tok: str, no: int) -> int:
    try:
        return int(tok, 16)
    except ValueError:
        raise InputError(f"line {no}: bad hex mask {tok!r}") from None


def _rat(tok: str, no: int) -> Fraction:
    try:
        return as_rational(tok)
    except InputError as e:
        raise InputError(f"line {no}: {e}") from None


def parse_witness_text(text: str) -> Witness:
    lines = _lines(text)
    if not lines:
        raise InputError("empty witness file")
    no, head = lines[0]
    toks = head.split()
    if len(toks) != 6 or toks[:2] != ["WITNESS", "v1"] or toks[2] not in ("primal", "dual") or toks[4] != "eps":
        raise InputError(f"line {no}: expected 'WITNESS v1 <primal|dual> <bound-kind> eps p/q'")
    kind, bound, eps = toks[2], toks[3], _rat(toks[5], no)
    weights, mu, phi = {}, {}, {}
    for no, line in lines[1:]:
        t = line.split()
        tag = t[0]
        if kind == "primal" and tag in ("RECT", "ASGN") and len(t) == 5:
            a, b = _hex(t[1], no), _hex(t[2], no)
            try:
                region = Rectangle(a, b) if tag == "RECT" else Assignment(a, b)
                z = int(t[3])
            except (InputError, ValueError) as e:
                raise InputError(f"line {no}: {e}") from None
            key = (z, region)
            if key in weights:
                raise InputError(f"line {no}: duplicate entry")
            weights[key] = _rat(t[4], no)
        elif kind == "dual" and tag in ("MU", "PHI") and len(t) == 3:
            try:
                idx = int(t[1])
            except ValueError:
                raise InputError(f"line {no}: bad index {t[1]!r}") from None
            target = mu if tag == "MU" else phi
            if idx in target:
                raise InputError(f"line {no}: duplicate {tag} {idx}")
            target[idx] = _rat(t[2], no)
        else:
            raise InputError(f"line {no}: unexpected line {line!r} in a {kind} witness")
    try:
        return Witness(kind, bound, eps, weights=weights, mu=mu, phi=phi)
    except InputError as e:
        raise InputError(f"witness: {e}") from None


def parse_witness(path) -> Witness:
    return parse_witness_text(Path(path).read_text())


def serialize_witness(w: Witness) -> str:
    out = [f"WITNESS v1 {w.kind} {w.bound} eps {fmt_rational(w.epsilon)}"]
    if w.kind == "primal":
        for (z, region), v in sorted(w.weights.items(), key=lambda kv: (kv[0][1].__class__.__name__, kv[0][1], kv[0][0])):
            if isinstance(region, Rectangle):
                out.append(f"RECT {region.row_mask:x} {region.col_mask:x} {z} {fmt_rational(v)}")
            else:
                out.append(f"ASGN {region.fixed_mask:x} {region.values:x} {z} {fmt_rational(v)}")
    else:
        out.extend(f"MU {i} {fmt_rational(v)}" for i, v in sorted(w.mu.items()))
        out.extend(f"PHI {i} {fmt_rational(v)}" for i, v in sorted(w.phi.items()))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# trees


def _sexpr(text: str):
    toks = re.findall(r"\(|\)|[^\s()]+", text)
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(toks):
            raise InputError("tree text ends early")
        tok = toks[pos]
        pos += 1
        if tok == ")":
            raise InputError("unexpected ')' in tree text")
        if tok != "(":
            return tok
        items = []
        while True:
            if pos >= len(toks):
                raise InputError("unbalanced '(' in tree text")
            if toks[pos] == ")":
                pos += 1
                return items
            items.append(read())

    node = read()
    if pos != len(toks):
        raise InputError("trailing text after the tree")
    return node


def _kv(tok, key: str) -> str:
    if not isinstance(tok, str) or not tok.startswith(key + "="):
        raise InputError(f"expected {key}=..., got {tok!r}")
    return tok[len(key) + 1:]


def _leaf(node) -> int:
    if len(node) != 2:
        raise InputError("leaf takes exactly z=<int>")
    try:
        return int(_kv(node[1], "z"))
    except ValueError:
        raise InputError(f"bad leaf label {node[1]!r}") from None


def parse_protocol_text(text: str) -> Protocol:
    def build(node):
        if not isinstance(node, list) or not node:
            raise InputError(f"expected a parenthesized node, got {node!r}")
        if node[0] == "leaf":
            return ProtocolLeaf(_leaf(node))
        if node[0] == "node" and len(node) == 5:
            speaker = _kv(node[1], "speaker")
            if speaker not in ("A", "B"):
                raise InputError(f"speaker must be A or B, got {speaker!r}")
            try:
                part = int(_kv(node[2], "part"), 16)
            except ValueError:
                raise InputError(f"bad part mask {node[2]!r}") from None
            return ProtocolNode(speaker, part, build(node[3]), build(node[4]))
        raise InputError(f"malformed protocol node {node!r}")

    return build(_sexpr(text))


def parse_decision_tree_text(text: str) -> DecisionTree:
    def build(node):
        if not isinstance(node, list) or not node:
            raise InputError(f"expected a parenthesized node, got {node!r}")
        if node[0] == "leaf":
            return TreeLeaf(_leaf(node))
        if node[0] == "query" and len(node) == 4:
            try:
                i = int(node[1])
            except ValueError:
                raise InputError(f"bad variable {node[1]!r}") from None
            if i < 1:
                raise InputError("variables are numbered from 1")
            return TreeNode(i - 1, build(node[2]), build(node[3]))
        raise InputError(f"malformed decision-tree node {node!r}")

    return build(_sexpr(text))


def serialize_protocol(p: Protocol) -> str:
    if isinstance(p, ProtocolLeaf):
        return f"(leaf z={p.z})"
    return f"(node speaker={p.speaker} part={p.part:x} {serialize_protocol(p.left)} {serialize_protocol(p.right)})"


def serialize_decision_tree(t: DecisionTree) -> str:
    if isinstance(t, TreeLeaf):
        return f"(leaf z={t.z})"
    return f"(query {t.var + 1} {serialize_decision_tree(t.left)} {serialize_decision_tree(t.right)})"
