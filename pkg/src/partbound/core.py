"""Combinatorial domain objects shared by every bound: instances, regions,
distributions, witnesses, and the enumerators that materialize rectangle and
assignment families.

All values are exact.  ``Rational`` is :class:`fractions.Fraction`.
Inputs of a communication instance are addressed by their flat cell index
``x * ncols + y``; inputs of a query instance by the integer ``x`` whose bit
``i - 1`` holds variable ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

Rational = Fraction

# None = undefined, int = function value, frozenset = allowed outputs (relation)
Entry = Union[None, int, frozenset]


class PartboundError(Exception):
    """Base class for all library errors."""


class InputError(PartboundError):
    """Malformed or inconsistent user input."""


class ResourceError(PartboundError):
    """A configured cap was exceeded."""


class InvariantError(PartboundError):
    """A checked mathematical claim failed."""


@dataclass(frozen=True)
class Caps:
    max_regions: int = 2_000_000
    max_lp_vars: int = 500_000
    max_pivots: int = 10_000_000
    time_budget: Optional[float] = None

    def __post_init__(self):
        if min(self.max_regions, self.max_lp_vars, self.max_pivots) <= 0:
            raise InputError("caps must be positive")


DEFAULT_CAPS = Caps()


def as_rational(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings; floats and decimals are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise InputError(f"decimal input not accepted, write p/q: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not a rational: {value!r}")


def fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def popcount(v: int) -> int:
    return bin(v).count("1")


def floor_log2(q: Fraction) -> int:
    """Largest integer k with 2**k <= q (q > 0)."""
    if q <= 0:
        raise ValueError("floor_log2 needs a positive argument")
    k = q.numerator.bit_length() - q.denominator.bit_length()
    while Fraction(2) ** k > q:
        k -= 1
    while Fraction(2) ** (k + 1) <= q:
        k += 1
    return k


# --------------------------------------------------------------------------
# instances


def _check_entry(entry, alphabet: int, relation: bool, where: str) -> Entry:
    if entry is None:
        if relation:
            raise InputError(f"{where}: relation cells need a nonempty output set")
        return None
    if isinstance(entry, (set, frozenset, list, tuple)):
        values = frozenset(entry)
        if not relation:
            raise InputError(f"{where}: output set given in function mode")
        if not values:
            raise InputError(f"{where}: empty output set")
        for v in values:
            if not isinstance(v, int) or not 0 <= v < alphabet:
                raise InputError(f"{where}: output {v!r} outside [0, {alphabet})")
        return values
    if not isinstance(entry, int) or isinstance(entry, bool) or not 0 <= entry < alphabet:
        raise InputError(f"{where}: output {entry!r} outside [0, {alphabet})")
    return frozenset([entry]) if relation else entry


@dataclass(frozen=True)
class CommInstance:
    """Partial function or relation on an ``nrows x ncols`` grid."""

    nrows: int
    ncols: int
    alphabet_size: int
    cells: tuple  # row-major, length nrows * ncols
    relation: bool = False

    def __post_init__(self):
        if self.nrows < 1 or self.ncols < 1:
            raise InputError("grid dimensions must be positive")
        if self.alphabet_size < 1:
            raise InputError("alphabet must be nonempty")
        if len(self.cells) != self.nrows * self.ncols:
            raise InputError(f"expected {self.nrows * self.ncols} cells, got {len(self.cells)}")
        checked = tuple(
            _check_entry(e, self.alphabet_size, self.relation, f"cell {i}")
            for i, e in enumerate(self.cells)
        )
        object.__setattr__(self, "cells", checked)

    @classmethod
    def from_rows(cls, rows, alphabet_size: int = 2, relation: bool = False) -> "CommInstance":
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise InputError("rows must be nonempty and of equal length")
        return cls(len(rows), len(rows[0]), alphabet_size,
                   tuple(e for r in rows for e in r), relation)

    @property
    def ncells(self) -> int:
        return self.nrows * self.ncols

    def index(self, x: int, y: int) -> int:
        return x * self.ncols + y

    def coords(self, i: int) -> tuple[int, int]:
        return divmod(i, self.ncols)

    def value(self, x: int, y: int) -> Entry:
        return self.cells[x * self.ncols + y]

    def defined(self) -> list[int]:
        """f^{-1} as flat indices (every cell, in relation mode)."""
        return [i for i, e in enumerate(self.cells) if e is not None]

    def preimage(self, z: int) -> list[int]:
        if self.relation:
            raise InputError("preimage is defined for function mode only")
        return [i for i, e in enumerate(self.cells) if e == z]

    def image(self) -> list[int]:
        out = set()
        for e in self.cells:
            if e is None:
                continue
            out.update(e if self.relation else (e,))
        return sorted(out)

    def is_total(self) -> bool:
        return all(e is not None for e in self.cells)


@dataclass(frozen=True)
class QueryInstance:
    """Partial function or relation on ``{0,1}^n`` with outputs in ``[0, 2^m)``."""

    n: int
    m: int
    table: tuple  # length 2**n, indexed by x
    relation: bool = False

    def __post_init__(self):
        if self.n < 0 or self.m < 1:
            raise InputError("need n >= 0 and m >= 1")
        if len(self.table) != 1 << self.n:
            raise InputError(f"expected {1 << self.n} table entries, got {len(self.table)}")
        checked = tuple(
            _check_entry(e, 1 << self.m, self.relation, f"point {x}")
            for x, e in enumerate(self.table)
        )
        object.__setattr__(self, "table", checked)

    @classmethod
    def from_function(cls, n: int, fn, m: int = 1) -> "QueryInstance":
        return cls(n, m, tuple(fn(x) for x in range(1 << n)))

    @property
    def npoints(self) -> int:
        return 1 << self.n

    def value(self, x: int) -> Entry:
        return self.table[x]

    def defined(self) -> list[int]:
        return [x for x, e in enumerate(self.table) if e is not None]

    def preimage(self, z: int) -> list[int]:
        if self.relation:
            raise InputError("preimage is defined for function mode only")
        return [x for x, e in enumerate(self.table) if e == z]

    def image(self) -> list[int]:
        out = set()
        for e in self.table:
            if e is None:
                continue
            out.update(e if self.relation else (e,))
        return sorted(out)

    def is_total(self) -> bool:
        return all(e is not None for e in self.table)


# --------------------------------------------------------------------------
# regions


@dataclass(frozen=True, order=True)
class Rectangle:
    row_mask: int
    col_mask: int

    def __post_init__(self):
        if self.row_mask <= 0 or self.col_mask <= 0:
            raise InputError("rectangle masks must be nonempty")

    def contains(self, x: int, y: int) -> bool:
        return bool((self.row_mask >> x) & 1 and (self.col_mask >> y) & 1)

    def rows(self) -> list[int]:
        return _bits(self.row_mask)

    def cols(self) -> list[int]:
        return _bits(self.col_mask)

    def cells(self, ncols: int) -> list[int]:
        cols = self.cols()
        return [x * ncols + y for x in self.rows() for y in cols]

    @property
    def size(self) -> int:
        return popcount(self.row_mask) * popcount(self.col_mask)


@dataclass(frozen=True, order=True)
class Assignment:
    """Partial fixing of variables; ``values`` is masked to ``fixed_mask``."""

    fixed_mask: int
    values: int = 0

    def __post_init__(self):
        if self.fixed_mask < 0 or self.values < 0:
            raise InputError("assignment masks must be nonnegative")
        if self.values & ~self.fixed_mask:
            raise InputError("assignment values set outside the fixed variables")

    @property
    def size(self) -> int:
        return popcount(self.fixed_mask)

    def contains(self, x: int) -> bool:
        return (x ^ self.values) & self.fixed_mask == 0

    def points(self, n: int) -> list[int]:
        free = [i for i in range(n) if not (self.fixed_mask >> i) & 1]
        out = []
        for k in range(1 << len(free)):
            x = self.values
            for j, i in enumerate(free):
                if (k >> j) & 1:
                    x |= 1 << i
            out.append(x)
        return sorted(out)


Region = Union[Rectangle, Assignment]


def _bits(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def enumerate_rectangles(nrows: int, ncols: int, caps: Caps = DEFAULT_CAPS) -> list[Rectangle]:
    """All nonempty rectangles, ordered by ``(row_mask, col_mask)``."""
    if nrows < 1 or ncols < 1:
        raise InputError("grid dimensions must be positive")
    count = ((1 << nrows) - 1) * ((1 << ncols) - 1)
    if count > caps.max_regions:
        raise ResourceError(f"{count} rectangles exceed max_regions cap {caps.max_regions}")
    return [Rectangle(r, c) for r in range(1, 1 << nrows) for c in range(1, 1 << ncols)]


def enumerate_assignments(n: int, caps: Caps = DEFAULT_CAPS) -> list[Assignment]:
    """All ``3^n`` assignments, ordered by ``(fixed_mask, values)``."""
    if n < 0:
        raise InputError("n must be nonnegative")
    if 3 ** n > caps.max_regions:
        raise ResourceError(f"3^{n} assignments exceed max_regions cap {caps.max_regions}")
    out = []
    for fixed in range(1 << n):
        # submasks of `fixed` in increasing order
        sub = 0
        while True:
            out.append(Assignment(fixed, sub))
            if sub == fixed:
                break
            sub = (sub - fixed) & fixed
    return out


def consistent_inputs(region: Region, instance) -> list[int]:
    if isinstance(region, Rectangle):
        if not isinstance(instance, CommInstance):
            raise InputError("rectangles apply to communication instances")
        if region.row_mask >> instance.nrows or region.col_mask >> instance.ncols:
            raise InputError("rectangle exceeds the grid")
        return region.cells(instance.ncols)
    if not isinstance(instance, QueryInstance):
        raise InputError("assignments apply to query instances")
    if region.fixed_mask >> instance.n:
        raise InputError("assignment fixes variables beyond n")
    return region.points(instance.n)


# --------------------------------------------------------------------------
# distributions and witnesses


@dataclass(frozen=True)
class Distribution:
    mass: Mapping[int, Fraction]

    def __post_init__(self):
        clean = {}
        for i, v in self.mass.items():
            v = as_rational(v)
            if v < 0:
                raise InputError(f"negative mass {v} at {i}")
            if v:
                clean[int(i)] = v
        if sum(clean.values(), Fraction(0)) != 1:
            raise InputError("masses must sum to exactly 1")
        object.__setattr__(self, "mass", dict(sorted(clean.items())))

    @classmethod
    def uniform(cls, support: Iterable[int]) -> "Distribution":
        support = list(support)
        if not support:
            raise InputError("uniform distribution needs a nonempty support")
        return cls({i: Fraction(1, len(support)) for i in support})

    def __getitem__(self, i: int) -> Fraction:
        return self.mass.get(i, Fraction(0))

    def total(self, indices: Iterable[int]) -> Fraction:
        return sum((self.mass.get(i, Fraction(0)) for i in indices), Fraction(0))

    @property
    def support(self) -> list[int]:
        return list(self.mass)


@dataclass(frozen=True)
class Witness:
    """Sparse primal weighting over ``(label, region)`` or dual ``(mu, phi)``."""

    kind: str  # "primal" | "dual"
    bound: str
    epsilon: Fraction = Fraction(0)
    weights: Mapping = field(default_factory=dict)
    mu: Mapping[int, Fraction] = field(default_factory=dict)
    phi: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("primal", "dual"):
            raise InputError(f"witness kind must be primal or dual, got {self.kind!r}")
        if self.kind == "primal" and (self.mu or self.phi):
            raise InputError("primal witness carries dual entries")
        if self.kind == "dual" and self.weights:
            raise InputError("dual witness carries primal weights")
        weights = {}
        for key, v in self.weights.items():
            v = as_rational(v)
            if v < 0:
                raise InputError(f"negative primal weight at {key}")
            if v:
                weights[key] = weights.get(key, Fraction(0)) + v
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "mu", {int(k): as_rational(v) for k, v in self.mu.items() if v})
        object.__setattr__(self, "phi", {int(k): as_rational(v) for k, v in self.phi.items() if v})
        object.__setattr__(self, "epsilon", as_rational(self.epsilon))
