"""Constructive conversions between the LP bounds and their distribution-based counterparts.

Each direction takes either an optimal dual (solved here when not supplied)
or a (distribution, modified function) pair, performs the explicit
construction, and returns the built objects together with exact checks of
the inequality it is supposed to establish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .comm import build_comm_lp, compute_comm_bound, disc_lambda, tilde_rec
from .core import CommInstance, Distribution, InputError, Witness, as_rational
from .witnesses import check_witness

DIRECTIONS = ("recsim1", "recsim2", "srecsim1", "srecsim2", "sdisceq1", "sdisceq2", "recgeqdisc")

INF = math.inf


@dataclass
class Check:
    name: str
    lhs: object
    rel: str  # ">=", ">", "<=", "<", "=="
    rhs: object
    hard: bool = True  # False: depends on an unquantified size assumption; reported, not asserted

    @property
    def holds(self) -> bool:
        a, b = self.lhs, self.rhs
        return {">=": a >= b, ">": a > b, "<=": a <= b, "<": a < b, "==": a == b}[self.rel]


@dataclass
class LemmaReport:
    direction: str
    epsilon: Fraction
    z: Optional[int]
    claim: str
    checks: list
    constructed: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks if c.hard)

    @property
    def flagged(self) -> list:
        """Soft checks that failed: the instance is outside the regime the argument assumes."""
        return [c.name for c in self.checks if not c.hard and not c.holds]


def _restricted(instance: CommInstance, values: dict) -> CommInstance:
    """Copy of ``instance`` with the given cells overwritten (undefined cells stay undefined)."""
    cells = list(instance.cells)
    for i, v in values.items():
        if cells[i] is None:
            raise InputError(f"cell {i} is undefined and cannot be reassigned")
        cells[i] = v
    return CommInstance(instance.nrows, instance.ncols, instance.alphabet_size, tuple(cells))


def _check_g(instance: CommInstance, g: CommInstance) -> None:
    if (g.nrows, g.ncols, g.alphabet_size) != (instance.nrows, instance.ncols, instance.alphabet_size):
        raise InputError("modified function has a different shape")
    for a, b in zip(instance.cells, g.cells):
        if (a is None) != (b is None):
            raise InputError("modified function must be defined exactly where the original is")


def _dual_of(instance, kind, eps, z, dual: Optional[Witness]) -> tuple[Fraction, Witness]:
    if dual is None:
        rep = compute_comm_bound(instance, kind, eps, z)
        return rep.value, rep.dual_witness
    lp = build_comm_lp(instance, kind, eps, z)
    chk = check_witness(lp, dual)
    if not chk.feasible:
        raise InputError(f"supplied dual is infeasible at {chk.violations[0]}")
    return chk.objective, dual


def _certify_dual(instance, kind, eps, z, mu, phi=None) -> tuple[Witness, Fraction]:
    w = Witness("dual", kind if z is None else f"{kind}:{z}", eps, mu=mu, phi=phi or {})
    chk = check_witness(build_comm_lp(instance, kind, eps, z), w)
    if not chk.feasible:
        raise InputError(f"constructed dual violates {chk.violations[0]}; the hypotheses do not hold")
    return w, chk.objective


def _split_lambda(weights: dict, inside: set) -> dict:
    """Normalize nonnegative weights so each side carries half the mass (all of it if one side is empty)."""
    k1 = sum((v for i, v in weights.items() if i in inside), Fraction(0))
    k2 = sum((v for i, v in weights.items() if i not in inside), Fraction(0))
    if k1 == 0:
        raise InputError("no dual mass on the target preimage")
    lam = {}
    for i, v in weights.items():
        if not v:
            continue
        if i in inside:
            lam[i] = v / (2 * k1) if k2 else v / k1
        else:
            lam[i] = v / (2 * k2)
    return lam


def _tilde(value):
    return INF if value is None else value


def lemma_transform(direction: str, instance: CommInstance, epsilon, z: Optional[int] = None,
                    dual: Optional[Witness] = None, lam: Optional[Distribution] = None,
                    g: Optional[CommInstance] = None) -> LemmaReport:
    eps = as_rational(epsilon)
    if not 0 < eps < 1:
        raise InputError("the transformations need 0 < epsilon < 1")
    if instance.relation:
        raise InputError("the transformations need a function instance")
    if direction in ("sdisceq1", "sdisceq2", "recgeqdisc") and instance.alphabet_size != 2:
        raise InputError(f"{direction} needs a Boolean function")
    if direction not in ("sdisceq1", "sdisceq2") and (z is None or not 0 <= z < instance.alphabet_size):
        raise InputError(f"{direction} needs a target output z")
    try:
        handler = _HANDLERS[direction]
    except KeyError:
        raise InputError(f"unknown direction {direction!r}; expected one of {', '.join(DIRECTIONS)}") from None
    return handler(instance, eps, z, dual, lam, g)


def _recsim1(f, eps, z, dual, lam, g):
    k, w = _dual_of(f, "rec", eps, z, dual)
    inside = set(f.preimage(z))
    lam_ = Distribution(_split_lambda(dict(w.mu), inside))
    t = tilde_rec(f, z, eps / 2, lam_)
    checks = [
        Check("lambda(f^-1(z)) >= 1/2", lam_.total(inside), ">=", Fraction(1, 2)),
        Check("tilde_rec[z, eps/2, lambda] >= rec^z_eps", _tilde(t.value), ">=", k),
    ]
    return LemmaReport("recsim1", eps, z, "rec^z_eps(f) <= tilde_rec^z_{eps/2}(f)", checks,
                       {"lambda": lam_, "rec": k, "tilde_rec": t})


def _need_lambda(f, lam, z=None, target=None):
    if lam is None:
        raise InputError("this direction needs a distribution")
    stray = [i for i in lam.support if f.cells[i] is None]
    if stray:
        raise InputError(f"distribution has mass on undefined cells {stray[:5]}")
    if z is not None:
        src = target or f
        if lam.total(src.preimage(z)) < Fraction(1, 2):
            raise InputError("hypothesis lambda(preimage of z) >= 1/2 fails")


def _recsim2(f, eps, z, dual, lam, g):
    _need_lambda(f, lam, z)
    t = tilde_rec(f, z, 2 * eps, lam)
    if t.value is None:
        raise InputError("no rectangle qualifies at 2*eps for this distribution")
    k = t.value
    mu = {i: (k * lam[i] if f.cells[i] == z else k * lam[i] / (2 * eps)) for i in lam.support}
    w, obj = _certify_dual(f, "rec", eps, z, mu)
    rec = compute_comm_bound(f, "rec", eps, z).value
    rhs = Fraction(1, 2) * (Fraction(1, 2) - eps) * k
    checks = [
        Check("constructed dual objective >= (1/2)(1/2-eps) tilde_rec", obj, ">=", rhs),
        Check("rec^z_eps >= constructed dual objective", rec, ">=", obj),
    ]
    return LemmaReport("recsim2", eps, z, "rec^z_eps(f) >= (1/2)(1/2-eps) tilde_rec^z_{2eps}(f)", checks,
                       {"dual": w, "tilde_rec": k, "rec": rec})


def _other_value(alphabet: int, z: int) -> int:
    return 1 if z == 0 else 0


def _srecsim1(f, eps, z, dual, lam, g):
    k_srec, w = _dual_of(f, "srec", eps, z, dual)
    mu, phi = dict(w.mu), dict(w.phi)
    for i in list(phi):
        m = min(mu.get(i, Fraction(0)), phi[i])
        if m:
            mu[i] = mu.get(i, Fraction(0)) - m
            phi[i] -= m
    flips = {i: _other_value(f.alphabet_size, z) for i, v in phi.items() if v}
    g_ = _restricted(f, flips)
    mu_g = {i: (phi[i] if i in flips else v) for i, v in mu.items()}
    mu_g.update({i: phi[i] for i in flips})
    w_g, k = _certify_dual(g_, "rec", eps, z, {i: v for i, v in mu_g.items() if v})
    inside = set(g_.preimage(z))
    lam_ = Distribution(_split_lambda(mu_g, inside))
    t = tilde_rec(g_, z, eps / 2, lam_)
    err = lam_.total(flips)
    checks = [
        Check("rec^z_eps(g) dual objective >= srec^z_eps(f)", k, ">=", k_srec),
        Check("lambda(g^-1(z)) >= 1/2", lam_.total(inside), ">=", Fraction(1, 2)),
        Check("tilde_rec[z, eps/2, lambda](g) >= srec^z_eps(f)", _tilde(t.value), ">=", k_srec),
        Check("Pr_lambda[g != f] < (1-eps)/2", err, "<", (1 - eps) / 2, hard=False),
    ]
    return LemmaReport("srecsim1", eps, z, "srec^z_eps(f) <= tilde_srec^z_{eps/2,(1-eps)/2}(f)", checks,
                       {"g": g_, "lambda": lam_, "rec_dual_g": w_g, "srec": k_srec, "tilde_rec_g": t})


def _srecsim2(f, eps, z, dual, lam, g):
    g_ = f if g is None else g
    _check_g(f, g_)
    _need_lambda(f, lam, z, g_)
    changed = [i for i in range(f.ncells) if f.cells[i] != g_.cells[i]]
    if any(f.cells[i] != z for i in changed):
        raise InputError("hypothesis fails: g may only differ from f where f = z")
    err = lam.total(changed)
    if err > eps / 2:
        raise InputError(f"hypothesis Pr[f != g] <= eps/2 fails ({err})")
    t = tilde_rec(g_, z, 2 * eps, lam)
    if t.value is None:
        raise InputError("no rectangle qualifies at 2*eps for this distribution")
    k = t.value
    mu, phi = {}, {}
    for i in lam.support:
        if f.cells[i] != z:
            mu[i] = k * lam[i] / (2 * eps)
        elif g_.cells[i] == z:
            mu[i] = k * lam[i]
        else:
            phi[i] = k * lam[i] / (2 * eps)
    w, obj = _certify_dual(f, "srec", eps, z, mu, phi)
    srec = compute_comm_bound(f, "srec", eps, z).value
    rhs = Fraction(1, 2) * (Fraction(1, 4) - eps) * k
    checks = [
        Check("srec^z_eps >= constructed dual objective", srec, ">=", obj),
        Check("srec^z_eps >= (1/2)(1/4-eps) tilde_rec", srec, ">=", rhs),
        Check("constructed dual objective >= (1/2)(1/4-eps) tilde_rec", obj, ">=", rhs, hard=False),
    ]
    return LemmaReport("srecsim2", eps, z, "srec^z_eps(f) >= (1/2)(1/4-eps) tilde_srec^z_{2eps,eps/2}(f)", checks,
                       {"dual": w, "tilde_rec_g": k, "srec": srec, "flip_mass": err})


def _sdisceq1(f, eps, z, dual, lam, g):
    k, w = _dual_of(f, "sdisc", eps, None, dual)
    mu, phi = dict(w.mu), dict(w.phi)
    for i in set(mu) | set(phi):
        m = min(mu.get(i, Fraction(0)), phi.get(i, Fraction(0)))
        if m:
            mu[i] -= m
            phi[i] -= m
    weights = {i: max(mu.get(i, Fraction(0)), phi.get(i, Fraction(0))) for i in set(mu) | set(phi)}
    total = sum(weights.values(), Fraction(0))
    lam_ = Distribution({i: v / total for i, v in weights.items() if v})
    flips = {i: 1 - f.cells[i] for i, v in phi.items() if v}
    g_ = _restricted(f, flips)
    d = disc_lambda(g_, lam_)
    err = lam_.total(flips)
    checks = [
        Check("disc^lambda(g) >= sdisc_eps(f)", d, ">=", k),
        Check("Pr_lambda[g != f] < 1/(2+eps)", err, "<", 1 / (2 + eps)),
        Check("1/(2+eps) <= 1/2 - eps/8", 1 / (2 + eps), "<=", Fraction(1, 2) - eps / 8),
    ]
    return LemmaReport("sdisceq1", eps, None, "tilde_sdisc_{1/2-eps/8}(f) >= sdisc_eps(f)", checks,
                       {"g": g_, "lambda": lam_, "sdisc": k, "disc_lambda_g": d})


def _sdisceq2(f, eps, z, dual, lam, g):
    g_ = f if g is None else g
    _check_g(f, g_)
    _need_lambda(f, lam)
    delta = 1 / (4 + 2 * eps)
    changed = [i for i in range(f.ncells) if f.cells[i] != g_.cells[i]]
    err = lam.total(changed)
    if not err < delta:
        raise InputError(f"hypothesis Pr[f != g] < 1/(4+2 eps) fails ({err})")
    k = disc_lambda(g_, lam)
    if k == INF:
        raise InputError("every rectangle is balanced under this distribution")
    mu, phi = {}, {}
    moved = set(changed)
    for i in lam.support:
        (phi if i in moved else mu)[i] = k * lam[i]
    w, obj = _certify_dual(f, "sdisc", eps, None, mu, phi)
    sdisc = compute_comm_bound(f, "sdisc", eps).value
    checks = [
        Check("constructed dual objective > disc^lambda(g)/2", obj, ">", k / 2),
        Check("sdisc_eps >= constructed dual objective", sdisc, ">=", obj),
    ]
    return LemmaReport("sdisceq2", eps, None, "(1/2) tilde_sdisc_{1/(4+2eps)}(f) <= sdisc_eps(f)", checks,
                       {"dual": w, "disc_lambda_g": k, "sdisc": sdisc, "flip_mass": err})


def _recgeqdisc(f, eps, z, dual, lam, g):
    _need_lambda(f, lam)
    k = disc_lambda(f, lam)
    if k == INF:
        raise InputError("every rectangle is balanced under this distribution")
    mu = {i: k * lam[i] for i in lam.support}
    w, obj = _certify_dual(f, "rec", eps, z, mu)
    rec = compute_comm_bound(f, "rec", eps, z).value
    rhs = (Fraction(1, 2) - eps) * k - Fraction(1, 2)
    checks = [
        Check("constructed dual objective >= (1/2-eps) disc^lambda - 1/2", obj, ">=", rhs),
        Check("rec^z_eps >= constructed dual objective", rec, ">=", obj),
    ]
    return LemmaReport("recgeqdisc", eps, z, "rec^z_eps(f) >= (1/2-eps) disc^lambda(f) - 1/2", checks,
                       {"dual": w, "disc_lambda": k, "rec": rec})


_HANDLERS = {
    "recsim1": _recsim1,
    "recsim2": _recsim2,
    "srecsim1": _srecsim1,
    "srecsim2": _srecsim2,
    "sdisceq1": _sdisceq1,
    "sdisceq2": _sdisceq2,
    "recgeqdisc": _recgeqdisc,
}
