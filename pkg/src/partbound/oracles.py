"""Brute-force ground truth at tiny sizes: deterministic protocol cost, decision-tree depth, rank."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .comm import ProtocolLeaf, ProtocolNode
from .core import DEFAULT_CAPS, Caps, CommInstance, InputError, QueryInstance, ResourceError
from .query import TreeLeaf, TreeNode, subcube_status


@dataclass
class OracleResult:
    quantity: str  # "Dcc" | "Dquery" | "rank"
    value: int
    structure: Optional[object] = None


def _submasks_with_low(mask: int):
    """Proper nonempty submasks containing the lowest bit of ``mask`` (each bipartition once)."""
    low = mask & -mask
    rest = mask & ~low
    sub = rest
    while True:
        part = sub | low
        if part != mask:
            yield part
        if sub == 0:
            break
        sub = (sub - 1) & rest


def deterministic_cc(instance: CommInstance, max_side: int = 8) -> OracleResult:
    """Exact deterministic communication cost with an optimal protocol tree.

    A sub-rectangle costs 0 when its defined cells agree; otherwise one bit
    plus the better of every row split and every column split.
    """
    if instance.relation:
        raise InputError("the protocol oracle needs a function instance")
    if instance.nrows > max_side or instance.ncols > max_side:
        raise ResourceError(f"protocol search is capped at {max_side}x{max_side}")
    nc = instance.ncols
    cells = instance.cells

    @lru_cache(maxsize=None)
    def values(rows: int, cols: int) -> frozenset:
        if rows & (rows - 1) == 0 and cols & (cols - 1) == 0:
            v = cells[(rows.bit_length() - 1) * nc + cols.bit_length() - 1]
            return frozenset() if v is None else frozenset((v,))
        if rows & (rows - 1):
            low = rows & -rows
            return values(low, cols) | values(rows & ~low, cols)
        low = cols & -cols
        return values(rows, low) | values(rows, cols & ~low)

    @lru_cache(maxsize=None)
    def cost(rows: int, cols: int) -> tuple:
        vals = values(rows, cols)
        if len(vals) <= 1:
            return 0, None
        best, arg = None, None
        for speaker, mask in (("A", rows), ("B", cols)):
            for part in _submasks_with_low(mask):
                if speaker == "A":
                    c = max(cost(part, cols)[0], cost(rows & ~part, cols)[0])
                else:
                    c = max(cost(rows, part)[0], cost(rows, cols & ~part)[0])
                if best is None or c < best:
                    best, arg = c, (speaker, part)
                    if best == 0:
                        break
        return best + 1, arg

    def tree(rows: int, cols: int):
        c, arg = cost(rows, cols)
        if arg is None:
            vals = values(rows, cols)
            return ProtocolLeaf(min(vals) if vals else 0)
        speaker, part = arg
        if speaker == "A":
            return ProtocolNode("A", part, tree(part, cols), tree(rows & ~part, cols))
        return ProtocolNode("B", part, tree(rows, part), tree(rows, cols & ~part))

    full_r, full_c = (1 << instance.nrows) - 1, (1 << instance.ncols) - 1
    d = cost(full_r, full_c)[0]
    return OracleResult("Dcc", d, tree(full_r, full_c))


def deterministic_query(instance: QueryInstance, max_n: int = 10, caps: Caps = DEFAULT_CAPS) -> OracleResult:
    """Exact decision-tree depth with an optimal tree, by recursion over subcubes."""
    if instance.relation:
        raise InputError("the decision-tree oracle needs a function instance")
    if instance.n > max_n:
        raise ResourceError(f"decision-tree search is capped at n = {max_n}")
    status = subcube_status(instance, caps)
    n = instance.n

    @lru_cache(maxsize=None)
    def depth(fixed: int, vals: int) -> tuple:
        if status[(fixed, vals)] != -1:
            return 0, None
        best, arg = None, None
        for i in range(n):
            bit = 1 << i
            if fixed & bit:
                continue
            d = 1 + max(depth(fixed | bit, vals)[0], depth(fixed | bit, vals | bit)[0])
            if best is None or d < best:
                best, arg = d, i
        return best, arg

    def tree(fixed: int, vals: int):
        d, i = depth(fixed, vals)
        if i is None:
            s = status[(fixed, vals)]
            return TreeLeaf(0 if s is None else s)
        bit = 1 << i
        return TreeNode(i, tree(fixed | bit, vals), tree(fixed | bit, vals | bit))

    return OracleResult("Dquery", depth(0, 0)[0], tree(0, 0))


def exact_rank(instance: CommInstance) -> OracleResult:
    """Rank over the rationals of the value matrix, by fraction-free (Bareiss) elimination."""
    if instance.relation or not instance.is_total():
        raise InputError("rank needs a total function")
    a = [[instance.value(x, y) for y in range(instance.ncols)] for x in range(instance.nrows)]
    rows, cols = instance.nrows, instance.ncols
    rank, prev = 0, 1
    pivots = []
    for c in range(cols):
        if rank == rows:
            break
        p = next((r for r in range(rank, rows) if a[r][c] != 0), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        piv = a[rank][c]
        for r in range(rank + 1, rows):
            for k in range(c + 1, cols):
                a[r][k] = (a[r][k] * piv - a[r][c] * a[rank][k]) // prev
            a[r][c] = 0
        prev = piv
        pivots.append((rank, c))
        rank += 1
    return OracleResult("rank", rank, pivots)
