"""Communication-complexity bounds over explicit rectangle families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .core import (
    DEFAULT_CAPS,
    Caps,
    CommInstance,
    Distribution,
    InputError,
    InvariantError,
    Rectangle,
    Witness,
    as_rational,
    enumerate_rectangles,
    fmt_rational,
)
from .lp import EQ, GE, LE, FeasibilityReport, LinearProgram, LPBuilder, Violation, solve
from .witnesses import check_witness, dual_witness, primal_witness

COMM_KINDS = ("prt", "rec", "srec", "srec_max", "disc", "sdisc", "prt_lv", "prt_lv_star", "prt_relation")

# primal labels of the two-family programs
DISC_W, DISC_V = 1, 0
LV_W, LV_V = 0, 1


def _rect_name(prefix: str, label, r: Rectangle) -> str:
    return f"{prefix}[{label},{r.row_mask:x},{r.col_mask:x}]"


def _check_eps(epsilon) -> Fraction:
    eps = as_rational(epsilon)
    if not 0 <= eps < 1:
        raise InputError(f"epsilon must lie in [0, 1), got {eps}")
    return eps


def is_monochromatic(instance: CommInstance, rect: Rectangle) -> bool:
    values = {instance.cells[i] for i in rect.cells(instance.ncols)} - {None}
    return len(values) <= 1


def monochromatic_rectangles(instance: CommInstance, caps: Caps = DEFAULT_CAPS) -> list[Rectangle]:
    """Rectangles whose defined cells share one value (undefined cells are free)."""
    return [r for r in enumerate_rectangles(instance.nrows, instance.ncols, caps)
            if is_monochromatic(instance, r)]


def build_comm_lp(instance: CommInstance, kind: str, epsilon=0, z: Optional[int] = None,
                  restrict_z: bool = False, caps: Caps = DEFAULT_CAPS) -> LinearProgram:
    """Primal program of the named bound, laid out exactly as defined.

    Variables are ordered label-major then by rectangle enumeration order;
    constraints list the lower-bound block over defined cells first (row-major),
    then the equality or upper-bound blocks.
    """
    eps = _check_eps(epsilon)
    if kind not in COMM_KINDS or kind == "srec_max":
        raise InputError(f"unknown communication LP kind {kind!r}")
    if (kind == "prt_relation") != instance.relation:
        raise InputError(f"kind {kind} is incompatible with a {'relation' if instance.relation else 'function'} instance")
    if kind in ("disc", "sdisc") and instance.alphabet_size != 2:
        raise InputError(f"{kind} needs a Boolean alphabet, got size {instance.alphabet_size}")
    if kind in ("rec", "srec"):
        if z is None or not 0 <= z < instance.alphabet_size:
            raise InputError(f"{kind} needs a target output z in [0, {instance.alphabet_size})")

    if kind not in ("prt", "prt_relation", "prt_lv", "prt_lv_star") and not instance.defined():
        raise InputError(f"{kind} has no constraints on an everywhere-undefined instance")

    rects = enumerate_rectangles(instance.nrows, instance.ncols, caps)
    cells_of = [r.cells(instance.ncols) for r in rects]
    b = LPBuilder("min")
    ncell = instance.ncells
    cells = instance.cells

    def cover(var_ids):
        # per-cell list of variables (one per rectangle) containing that cell
        out = [[] for _ in range(ncell)]
        for j, cs in zip(var_ids, cells_of):
            for c in cs:
                out[c].append(j)
        return out

    if kind in ("prt", "prt_relation"):
        if restrict_z:
            labels = instance.image() or [0]
        else:
            labels = list(range(instance.alphabet_size))
        by_label = {}
        for lab in labels:
            ids = [b.var(_rect_name("w", lab, r), 1, tag=(lab, r)) for r in rects]
            by_label[lab] = cover(ids)
        for i in instance.defined():
            allowed = cells[i] if kind == "prt_relation" else (cells[i],)
            coeffs = {j: 1 for lab in allowed if lab in by_label for j in by_label[lab][i]}
            b.add(coeffs, GE, 1 - eps, f"mu[{i}]", ("mu", i, 1))
        for i in range(ncell):
            b.add({j: 1 for lab in labels for j in by_label[lab][i]}, EQ, 1, f"phi[{i}]", ("phi", i, 1))
    elif kind in ("rec", "srec"):
        ids = cover([b.var(_rect_name("w", z, r), 1, tag=(z, r)) for r in rects])
        inside = instance.preimage(z)
        outside = [i for i in instance.defined() if cells[i] != z]
        for i in inside:
            b.add({j: 1 for j in ids[i]}, GE, 1 - eps, f"mu[{i}]", ("mu", i, 1))
        if kind == "srec":
            for i in inside:
                b.add({j: 1 for j in ids[i]}, LE, 1, f"phi[{i}]", ("phi", i, -1))
        for i in outside:
            b.add({j: 1 for j in ids[i]}, LE, eps, f"mu[{i}]", ("mu", i, -1))
    elif kind in ("disc", "sdisc"):
        w = cover([b.var(_rect_name("w", DISC_W, r), 1, tag=(DISC_W, r)) for r in rects])
        v = cover([b.var(_rect_name("v", DISC_V, r), 1, tag=(DISC_V, r)) for r in rects])
        signed = [(i, 1) for i in instance.preimage(1)] + [(i, -1) for i in instance.preimage(0)]

        def row(i, s):
            coeffs = {j: s for j in w[i]}
            coeffs.update({j: -s for j in v[i]})
            return coeffs

        for i, s in signed:
            b.add(row(i, s), GE, 1, f"mu[{i}]", ("mu", i, 1))
        if kind == "sdisc":
            for i, s in signed:
                b.add(row(i, s), LE, 1 + eps, f"phi[{i}]", ("phi", i, -1))
    else:  # Las Vegas
        mono = [r for r, cs in zip(rects, cells_of) if len({cells[c] for c in cs} - {None}) <= 1]
        w_ids = [b.var(_rect_name("w", LV_W, r), 1, tag=(LV_W, r)) for r in mono]
        w = [[] for _ in range(ncell)]
        for j, r in zip(w_ids, mono):
            for c in r.cells(instance.ncols):
                w[c].append(j)
        v = cover([b.var(_rect_name("v", LV_V, r), 1, tag=(LV_V, r)) for r in rects])
        rel = EQ if kind == "prt_lv_star" else GE
        for i in instance.defined():
            b.add({j: 1 for j in w[i]}, rel, Fraction(1, 2), f"mu[{i}]", ("mu", i, 1))
        for i in range(ncell):
            coeffs = {j: 1 for j in w[i]}
            coeffs.update({j: 1 for j in v[i]})
            b.add(coeffs, EQ, 1, f"phi[{i}]", ("phi", i, 1))
    return b.build()


def log2_text(value) -> str:
    if value is None:
        return "undefined"
    if value == math.inf:
        return "inf"
    if value <= 0:
        return "-inf"
    return f"{math.log2(value):.6f}"


@dataclass
class CommBoundReport:
    kind: str
    epsilon: Fraction
    value: Fraction
    primal_witness: Witness
    dual_witness: Witness
    lp_sizes: tuple
    z: Optional[int] = None
    pivots: int = 0
    per_z: dict = field(default_factory=dict)

    @property
    def log2_value(self) -> str:
        return log2_text(self.value)


def _solve_and_report(lp: LinearProgram, bound: str, eps: Fraction, caps: Caps, z=None):
    sol = solve(lp, caps)
    if sol.status != "optimal":
        raise InvariantError(f"{bound} program is {sol.status}; the bound LPs are always feasible and bounded")
    primal = primal_witness(lp, sol, bound, eps)
    dual = dual_witness(lp, sol, bound, eps)
    for w in (primal, dual):
        rep = check_witness(lp, w)
        if not rep.feasible or rep.objective != sol.objective:
            raise InvariantError(f"{w.kind} witness of {bound} fails its own check: {rep.violations[:1]}")
    return sol, primal, dual


def bound_label(kind: str, z: Optional[int] = None) -> str:
    return f"{kind}:{z}" if z is not None else kind


def compute_comm_bound(instance: CommInstance, kind: str, epsilon=0, z: Optional[int] = None,
                       restrict_z: bool = False, caps: Caps = DEFAULT_CAPS) -> CommBoundReport:
    eps = _check_eps(epsilon)
    if kind == "srec_max":
        best = None
        per_z = {}
        for zz in range(instance.alphabet_size):
            rep = compute_comm_bound(instance, "srec", eps, zz, caps=caps)
            per_z[zz] = rep.value
            if best is None or rep.value > best.value:
                best = rep
        best.kind = "srec_max"
        best.per_z = per_z
        return best
    lp = build_comm_lp(instance, kind, eps, z, restrict_z, caps)
    label = bound_label(kind, z)
    sol, primal, dual = _solve_and_report(lp, label, eps, caps)
    return CommBoundReport(kind, eps, sol.objective, primal, dual, (lp.nvars, lp.ncons), z, sol.pivots)


# --------------------------------------------------------------------------
# conventional definitions at a fixed distribution


@dataclass
class TildeRecResult:
    value: Optional[Fraction]  # None: no qualifying rectangle
    rectangle: Optional[Rectangle]
    half_mass: bool  # lambda(f^{-1}(z)) >= 1/2


def _check_support(instance: CommInstance, lam: Distribution, on=None) -> None:
    allowed = set(instance.defined() if on is None else on)
    stray = [i for i in lam.support if i not in allowed]
    if stray:
        raise InputError(f"distribution has mass outside the defined cells: {stray[:5]}")


def tilde_rec(instance: CommInstance, z: int, epsilon, lam: Distribution,
              caps: Caps = DEFAULT_CAPS) -> TildeRecResult:
    """min 1/lambda(f^-1(z) ∩ R) over R with eps*lambda(f^-1(z) ∩ R) > lambda(R - f^-1(z))."""
    eps = as_rational(epsilon)
    _check_support(instance, lam)
    inside = set(instance.preimage(z))
    best, arg = None, None
    for r in enumerate_rectangles(instance.nrows, instance.ncols, caps):
        a = b = Fraction(0)
        for c in r.cells(instance.ncols):
            if c in inside:
                a += lam[c]
            else:
                b += lam[c]
        if eps * a > b:
            val = 1 / a
            if best is None or val < best:
                best, arg = val, r
    return TildeRecResult(best, arg, lam.total(inside) >= Fraction(1, 2))


def disc_lambda(instance: CommInstance, lam: Distribution, caps: Caps = DEFAULT_CAPS):
    """min over rectangles of 1/|signed lambda-mass|; ``math.inf`` if every imbalance is zero."""
    if instance.alphabet_size != 2 or instance.relation:
        raise InputError("discrepancy needs a Boolean function")
    _check_support(instance, lam)
    sign = {i: (1 if instance.cells[i] == 0 else -1) for i in instance.defined()}
    best = math.inf
    for r in enumerate_rectangles(instance.nrows, instance.ncols, caps):
        s = sum((sign[c] * lam[c] for c in r.cells(instance.ncols) if c in sign), Fraction(0))
        if s:
            best = min(best, 1 / abs(s))
    return best


# --------------------------------------------------------------------------
# witnesses from combinatorial objects


def check_prt_primal(instance: CommInstance, witness: Witness) -> FeasibilityReport:
    """Per-cell check of a sparse partition-bound primal, without enumerating all rectangles."""
    eps = witness.epsilon
    first = [Fraction(0)] * instance.ncells
    total = [Fraction(0)] * instance.ncells
    objective = Fraction(0)
    for (label, rect), v in witness.weights.items():
        objective += v
        for c in rect.cells(instance.ncols):
            total[c] += v
            e = instance.cells[c]
            if e is not None and (label in e if instance.relation else label == e):
                first[c] += v
    report = FeasibilityReport("primal", objective, checked=instance.ncells)
    for i in range(instance.ncells):
        if instance.cells[i] is not None and first[i] < 1 - eps:
            report.violations.append(Violation(f"mu[{i}]", first[i] - (1 - eps)))
        if total[i] != 1:
            report.violations.append(Violation(f"phi[{i}]", 1 - total[i]))
    return report


@dataclass
class CoverReport:
    rectangles: list
    size: int


def extract_monochromatic_cover(instance: CommInstance, primal: Witness) -> CoverReport:
    """Support of a zero-error partition primal, checked to be a monochromatic cover."""
    report = check_prt_primal(instance, primal)
    if primal.epsilon != 0 or not report.feasible:
        raise InputError("need a feasible partition-bound primal at epsilon 0")
    support = sorted(primal.weights, key=lambda k: (k[1], k[0]))
    covered = set()
    for label, rect in support:
        for c in rect.cells(instance.ncols):
            e = instance.cells[c]
            if e is not None and e != label:
                raise InvariantError(f"support rectangle {rect} with label {label} contains cell {c} of value {e}")
            if e is not None:
                covered.add(c)
    missing = [i for i in instance.defined() if i not in covered]
    if missing:
        raise InvariantError(f"cells {missing[:5]} not covered by the support")
    return CoverReport(support, len(support))


def fooling_set_dual(instance: CommInstance, cells, z: int) -> Witness:
    """Dual witness for prt_0 with objective |S| from a fooling set S.

    The textbook multipliers (mu = 1, phi = 0 on S) only respect the dual
    constraints of monochromatic rectangles; a rectangle holding two members
    of S would see mass 2.  Every defined cell therefore also gets
    mu += M, phi = -M with M = |S| - 1: at epsilon 0 this cancels in the
    objective and charges each off-value cell of a rectangle M, which pays for
    the extra members.  A crossing cell counts as breaking a pair only when it
    is defined with a value other than z.
    """
    s = sorted({int(c) for c in cells})
    if not s:
        raise InputError("fooling set must be nonempty")
    for c in s:
        if not 0 <= c < instance.ncells or instance.cells[c] != z:
            raise InputError(f"cell {c} does not have value {z}")
    for a_i, a in enumerate(s):
        x1, y1 = instance.coords(a)
        for b in s[a_i + 1:]:
            x2, y2 = instance.coords(b)
            c1, c2 = instance.value(x1, y2), instance.value(x2, y1)
            if not ((c1 is not None and c1 != z) or (c2 is not None and c2 != z)):
                raise InputError(f"cells {a} and {b} do not fool each other")
    lift = len(s) - 1
    members = set(s)
    mu, phi = {}, {}
    for i in instance.defined():
        mu[i] = Fraction(lift + (1 if i in members else 0))
        if lift:
            phi[i] = Fraction(-lift)
    return Witness("dual", "prt", 0, mu=mu, phi=phi)


# --------------------------------------------------------------------------
# protocols


@dataclass(frozen=True)
class ProtocolLeaf:
    z: int


@dataclass(frozen=True)
class ProtocolNode:
    """Speaker ``A`` splits the current rows (``B``: columns); ``part`` goes left."""

    speaker: str
    part: int
    left: "Protocol"
    right: "Protocol"


Protocol = Union[ProtocolLeaf, ProtocolNode]


def protocol_leaves(instance: CommInstance, protocol: Protocol) -> list[tuple[int, Rectangle]]:
    out = []

    def walk(node, rows, cols, depth):
        if isinstance(node, ProtocolLeaf):
            if not rows or not cols:
                raise InputError(f"leaf z={node.z} is reached by no input")
            out.append((node.z, Rectangle(rows, cols)))
            return
        if node.speaker == "A":
            walk(node.left, rows & node.part, cols, depth + 1)
            walk(node.right, rows & ~node.part, cols, depth + 1)
        elif node.speaker == "B":
            walk(node.left, rows, cols & node.part, depth + 1)
            walk(node.right, rows, cols & ~node.part, depth + 1)
        else:
            raise InputError(f"speaker must be A or B, got {node.speaker!r}")

    walk(protocol, (1 << instance.nrows) - 1, (1 << instance.ncols) - 1, 0)
    return out


def protocol_depth(protocol: Protocol) -> int:
    if isinstance(protocol, ProtocolLeaf):
        return 0
    return 1 + max(protocol_depth(protocol.left), protocol_depth(protocol.right))


@dataclass
class ProtocolPrimal:
    witness: Witness
    error: Fraction
    objective: Fraction
    depth: int
    report: FeasibilityReport


def protocol_to_primal(instance: CommInstance, protocol: Protocol) -> ProtocolPrimal:
    """One unit of weight per leaf rectangle; epsilon is the protocol's worst error."""
    leaves = protocol_leaves(instance, protocol)
    seen = [0] * instance.ncells
    weights = {}
    error = Fraction(0)
    for z, rect in leaves:
        if not 0 <= z < instance.alphabet_size:
            raise InputError(f"leaf output {z} outside the alphabet")
        weights[(z, rect)] = weights.get((z, rect), Fraction(0)) + 1
        for c in rect.cells(instance.ncols):
            seen[c] += 1
            e = instance.cells[c]
            if e is not None and not (z in e if instance.relation else z == e):
                error = Fraction(1)
    if any(k != 1 for k in seen):
        raise InputError("protocol leaves do not partition the grid")
    kind = "prt_relation" if instance.relation else "prt"
    w = Witness("primal", kind, error, weights=weights)
    report = check_prt_primal(instance, w)
    return ProtocolPrimal(w, error, sum(weights.values(), Fraction(0)), protocol_depth(protocol), report)


def describe(value) -> str:
    return fmt_rational(value) if isinstance(value, Fraction) else str(value)
