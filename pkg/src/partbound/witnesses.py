"""Translation between LP solutions and sparse ``Witness`` objects.

Builders tag every variable with ``(label, region)`` and every constraint
with ``(role, input, sign)``; the mu/phi multiplier of a
constraint is ``sign * y`` where ``y`` is the LP dual value.
"""

from __future__ import annotations

from fractions import Fraction

from .core import InputError, Witness
from .lp import FeasibilityReport, LinearProgram, LPSolution, check_point


def primal_witness(lp: LinearProgram, sol: LPSolution, bound: str, epsilon) -> Witness:
    weights = {}
    for tag, v in zip(lp.var_tags, sol.primal_values):
        if v:
            weights[tag] = weights.get(tag, Fraction(0)) + v
    return Witness("primal", bound, epsilon, weights=weights)


def dual_witness(lp: LinearProgram, sol: LPSolution, bound: str, epsilon) -> Witness:
    mu, phi = {}, {}
    for (role, idx, sign), y in zip(lp.con_tags, sol.dual_values):
        if y:
            (mu if role == "mu" else phi)[idx] = sign * y
    return Witness("dual", bound, epsilon, mu=mu, phi=phi)


def witness_point(lp: LinearProgram, witness: Witness) -> dict:
    """LP point (by variable or constraint name) encoded by ``witness``."""
    if witness.kind == "primal":
        by_tag = {tag: name for tag, name in zip(lp.var_tags, lp.names)}
        point = {}
        for key, v in witness.weights.items():
            if key not in by_tag:
                raise InputError(f"witness entry {key} is not a variable of this program")
            point[by_tag[key]] = v
        return point
    by_tag = {(role, idx): (c.name, sign) for (role, idx, sign), c in zip(lp.con_tags, lp.constraints)}
    point = {}
    for role, entries in (("mu", witness.mu), ("phi", witness.phi)):
        for idx, v in entries.items():
            if (role, idx) not in by_tag:
                raise InputError(f"witness has {role} at input {idx}, which has no such multiplier here")
            name, sign = by_tag[(role, idx)]
            point[name] = sign * v
    return point


def check_witness(lp: LinearProgram, witness: Witness) -> FeasibilityReport:
    return check_point(lp, witness_point(lp, witness), witness.kind)
