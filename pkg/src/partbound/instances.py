"""Named instances, random corpora, and the explicit tribes and list-non-equality witnesses."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .comm import check_prt_primal, is_monochromatic
from .core import (
    DEFAULT_CAPS,
    Caps,
    CommInstance,
    InputError,
    InvariantError,
    QueryInstance,
    Rectangle,
    ResourceError,
    Witness,
    as_rational,
    popcount,
)
from .lp import FeasibilityReport, Violation
from .query import check_query_dual


def bits_to_point(bits: str) -> int:
    """``"0101"`` -> point with variable 1 = first character (stored in the lowest bit)."""
    if not bits or set(bits) - {"0", "1"}:
        raise InputError(f"not a bit string: {bits!r}")
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


# --------------------------------------------------------------------------
# tribes


def _isqrt_exact(n: int) -> int:
    s = math.isqrt(n)
    if n < 1 or s * s != n:
        raise InputError(f"tribes needs a perfect square n, got {n}")
    return s


def tribes_blocks(n: int) -> list[int]:
    s = _isqrt_exact(n)
    return [((1 << s) - 1) << (i * s) for i in range(s)]


def make_tribes(n: int) -> QueryInstance:
    """AND over contiguous blocks of sqrt(n) variables of the OR within each block."""
    blocks = tribes_blocks(n)
    return QueryInstance.from_function(n, lambda x: int(all(x & b for b in blocks)))


@dataclass
class TribesWitness:
    n: int
    epsilon: Fraction
    delta: Fraction
    scale_exponent: int  # floor(delta * n); entries use 2^scale_exponent for 2^(delta*n)
    witness: Witness
    sets: dict  # "T0" / "T1" / "T2" -> sorted points
    objective: Fraction  # certified
    formula: str
    formula_value: float
    report: FeasibilityReport


def tribes_sets(n: int) -> dict:
    s = _isqrt_exact(n)
    per_block = []
    for i in range(s):
        base = i * s
        per_block.append({
            0: [0],
            1: [1 << (base + j) for j in range(s)],
            2: [(1 << (base + j)) | (1 << (base + k)) for j in range(s) for k in range(j + 1, s)],
        })
    out = {"T1": sorted(sum(c) for c in product(*(blk[1] for blk in per_block)))}
    for odd, name in ((0, "T0"), (2, "T2")):
        pts = []
        for i in range(s):
            choices = [per_block[j][odd if j == i else 1] for j in range(s)]
            pts.extend(sum(c) for c in product(*choices))
        out[name] = sorted(pts)
    return out


def tribes_dual_witness(n: int, epsilon, caps: Caps = DEFAULT_CAPS) -> TribesWitness:
    """Dual for the one-sided relaxation of the tribes partition bound, checked on all 3^n assignments.

    With M = sqrt(n)^sqrt(n) and P = 2^floor(delta*n), delta = 1/4 - 4 eps:
    mu = P/M on T1, mu = P/(4 eps M) on T0, phi = -4P/(3(n - sqrt n)M) on T2.
    Scaling the real 2^(delta*n) down to P keeps every constraint.
    """
    eps = as_rational(epsilon)
    if not 0 < eps < Fraction(1, 16):
        raise InputError(f"the tribes witness needs 0 < epsilon < 1/16, got {eps}")
    s = _isqrt_exact(n)
    if n < 4:
        raise InputError("the tribes witness needs n >= 4")
    if 3 ** n > caps.max_regions:
        raise ResourceError(f"3^{n} assignments exceed the cap of {caps.max_regions}")
    delta = Fraction(1, 4) - 4 * eps
    e = math.floor(delta * n)
    big = Fraction(2) ** e
    m_count = s ** s
    sets = tribes_sets(n)
    mu, phi = {}, {}
    for x in sets["T1"]:
        mu[x] = big / m_count
    for x in sets["T0"]:
        mu[x] = big / (4 * eps * m_count)
    for x in sets["T2"]:
        phi[x] = -4 * big / (3 * (n - s) * m_count)
    w = Witness("dual", "qsrec_relaxed", eps, mu=mu, phi=phi)
    inst = make_tribes(n)
    rep = check_query_dual(inst, w, "qsrec_relaxed", caps)
    if not rep.feasible:
        raise InvariantError(f"tribes dual violated at {rep.violations[0]}")
    expected = big * (Fraction(1, 12) - eps)
    if rep.objective != expected:
        raise InvariantError(f"tribes objective {rep.objective} differs from 2^{e}(1/12 - eps) = {expected}")
    formula = f"2^({delta * n})*(1/12-{eps})"
    value = 2.0 ** float(delta * n) * float(Fraction(1, 12) - eps)
    return TribesWitness(n, eps, delta, e, w, sets, rep.objective, formula, value, rep)


# --------------------------------------------------------------------------
# list non-equality


def _block(v: int, i: int, n: int) -> int:
    return (v >> (i * n)) & ((1 << n) - 1)


def lne_value(x: int, y: int, n: int) -> int:
    return int(all(_block(x, i, n) != _block(y, i, n) for i in range(n)))


def make_lne(n: int, caps: Caps = DEFAULT_CAPS) -> CommInstance:
    """Rows and columns are n*n-bit strings; block i occupies bits [i*n, (i+1)*n)."""
    if n < 1:
        raise InputError("list non-equality needs n >= 1")
    side = 1 << (n * n)
    if side * side > caps.max_regions:
        raise ResourceError(f"{side}x{side} grid exceeds the cap of {caps.max_regions} cells")
    return CommInstance(side, side, 2, tuple(lne_value(x, y, n) for x in range(side) for y in range(side)))


def _parity(v: int) -> int:
    return popcount(v) & 1


@dataclass
class LneWitness:
    n: int
    witness: Witness  # nonempty rectangles only
    one_side_total: Fraction  # over every indexed rectangle, empty ones included
    zero_side_total: Fraction
    total: Fraction
    support_total: Fraction  # weight actually placed on nonempty rectangles
    bound: int  # 2 * 2^(3n)
    full_grid: bool
    checked_cells: int
    report: FeasibilityReport
    skipped: list = field(default_factory=list)  # violations outside the restricted set


def lne_rectangles(n: int) -> list[tuple[int, int, int, Fraction]]:
    """(label, row_mask, col_mask, weight) for the whole indexed family, possibly empty masks.

    Label 1: rows with <x_i, z_i> = s_i and columns with <y_i, z_i> != s_i
    for every block, weight 2^n / 2^(n^2).  Label 0 at level k: that
    condition on the first k blocks plus x_{k+1} = y_{k+1} = u, weight 2^k / 2^(nk).
    """
    side = 1 << (n * n)
    out = []
    blocks = [[_block(v, i, n) for i in range(n)] for v in range(side)]

    def masks(zs, ss, u=None):
        k = len(zs)
        rows = cols = 0
        for v in range(side):
            bv = blocks[v]
            par = [_parity(bv[i] & zs[i]) for i in range(k)]
            if u is not None and bv[k] != u:
                continue
            if all(p == s for p, s in zip(par, ss)):
                rows |= 1 << v
            if all(p != s for p, s in zip(par, ss)):
                cols |= 1 << v
        return rows, cols

    w1 = Fraction(1 << n, 1 << (n * n))
    for zs in product(range(1 << n), repeat=n):
        for ss in product((0, 1), repeat=n):
            r, c = masks(zs, ss)
            out.append((1, r, c, w1))
    for k in range(n):
        wk = Fraction(1 << k, 1 << (n * k))
        for zs in product(range(1 << n), repeat=k):
            for ss in product((0, 1), repeat=k):
                for u in range(1 << n):
                    r, c = masks(zs, ss, u)
                    out.append((0, r, c, wk))
    return out


def lne_primal_witness(n: int = 2, full_grid: bool = True, samples: int = 200, seed: int = 0) -> LneWitness:
    """Explicit zero-error partition primal for list non-equality.

    n = 2 checks every cell; n = 3 checks ``samples`` seeded random cells.
    With ``full_grid`` False only cells whose blocks are all nonzero count;
    violations elsewhere are returned in ``skipped`` instead.
    """
    if n not in (2, 3):
        raise InputError("the list non-equality witness is checked for n = 2 (exhaustive) or n = 3 (sampled)")
    fam = lne_rectangles(n)
    one = sum((w for lab, _, _, w in fam if lab == 1), Fraction(0))
    zero = sum((w for lab, _, _, w in fam if lab == 0), Fraction(0))
    weights = {}
    for lab, r, c, w in fam:
        if r and c:
            key = (lab, Rectangle(r, c))
            weights[key] = weights.get(key, Fraction(0)) + w
    wit = Witness("primal", "prt", 0, weights=weights)
    support_total = sum(weights.values(), Fraction(0))
    side = 1 << (n * n)

    def nonzero_blocks(v):
        return all(_block(v, i, n) for i in range(n))

    if n == 2:
        inst = make_lne(n)
        for lab, rect in weights:
            cells = inst.cells
            if any(cells[i] != lab for i in rect.cells(inst.ncols)):
                raise InvariantError(f"rectangle {rect} is not {lab}-monochromatic")
        full = check_prt_primal(inst, wit)
        report = FeasibilityReport("primal", full.objective, checked=0)
        skipped = []
        for v in full.violations:
            cell = int(v.where.split("[")[1].rstrip("]"))
            x, y = divmod(cell, side)
            if full_grid or (nonzero_blocks(x) and nonzero_blocks(y)):
                report.violations.append(v)
            else:
                skipped.append(v)
        checked = side * side if full_grid else sum(
            1 for x in range(side) for y in range(side) if nonzero_blocks(x) and nonzero_blocks(y))
        report.checked = checked
    else:
        rng = random.Random(seed)
        report = FeasibilityReport("primal", support_total, checked=0)
        skipped = []
        entries = [(lab, rect.row_mask, rect.col_mask, w) for (lab, rect), w in weights.items()]
        while report.checked < samples:
            x, y = rng.randrange(side), rng.randrange(side)
            if not full_grid and not (nonzero_blocks(x) and nonzero_blocks(y)):
                continue
            val = lne_value(x, y, n)
            first = total = Fraction(0)
            for lab, r, c, w in entries:
                if r >> x & 1 and c >> y & 1:
                    total += w
                    if lab == val:
                        first += w
            cell = x * side + y
            if first < 1:
                report.violations.append(Violation(f"mu[{cell}]", first - 1))
            if total != 1:
                report.violations.append(Violation(f"phi[{cell}]", 1 - total))
            report.checked += 1
    bound = 2 * 2 ** (3 * n)
    return LneWitness(n, wit, one, zero, one + zero, support_total, bound, full_grid,
                      report.checked, report, skipped)


# --------------------------------------------------------------------------
# standard families and random corpora


def make_eq(k: int) -> CommInstance:
    return CommInstance.from_rows([[int(x == y) for y in range(k)] for x in range(k)])


def make_standard(name: str):
    """``EQ_k``, ``OR_n``, ``XOR_n``, ``AND_n``, ``CONST_RxC`` (communication) or ``CONST_n`` (query),
    ``TRIBES_n``, ``LNE_n``."""
    m = re.fullmatch(r"([A-Za-z]+)_(\d+)(?:x(\d+))?", name.strip())
    if not m:
        raise InputError(f"unknown instance name {name!r}")
    fam, a, b = m.group(1).upper(), int(m.group(2)), m.group(3)
    if a > 16:
        raise ResourceError(f"{name} is beyond desk scale")
    if fam == "EQ" and b is None:
        return make_eq(a)
    if fam == "OR" and b is None:
        return QueryInstance.from_function(a, lambda x: int(x != 0))
    if fam == "AND" and b is None:
        return QueryInstance.from_function(a, lambda x: int(x == (1 << a) - 1))
    if fam == "XOR" and b is None:
        return QueryInstance.from_function(a, lambda x: popcount(x) & 1)
    if fam == "CONST":
        if b is None:
            return QueryInstance.from_function(a, lambda x: 0)
        return CommInstance.from_rows([[0] * int(b) for _ in range(a)])
    if fam == "TRIBES" and b is None:
        return make_tribes(a)
    if fam == "LNE" and b is None:
        return make_lne(a)
    raise InputError(f"unknown instance name {name!r}")


def random_comm_instances(seed: int, count: int, rows: int = 4, cols: int = 4, alphabet: int = 2) -> list[CommInstance]:
    rng = random.Random(seed)
    return [CommInstance.from_rows([[rng.randrange(alphabet) for _ in range(cols)] for _ in range(rows)], alphabet)
            for _ in range(count)]


def random_query_instances(seed: int, count: int, n: int = 4) -> list[QueryInstance]:
    rng = random.Random(seed)
    return [QueryInstance(n, 1, tuple(rng.randrange(2) for _ in range(1 << n))) for _ in range(count)]
