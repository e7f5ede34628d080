"""Command-line front end.

Exit codes: 0 success, 1 a checked inequality or witness failed,
2 input error, 3 resource cap reached.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import comm, instances, io, lemmas, oracles, query, suites
from .core import (
    Assignment,
    Caps,
    CommInstance,
    Distribution,
    InputError,
    InvariantError,
    QueryInstance,
    Rectangle,
    ResourceError,
    Witness,
    as_rational,
    fmt_rational,
)
from .lp import FeasibilityReport, dump_lp
from .witnesses import check_witness

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

QUERY_MEASURES = ("certificate", "sensitivity", "cadv", "approx_degree")


@dataclass
class RunConfig:
    caps: Caps
    restrict_z_image: bool = False
    full_alphabet: bool = False
    lne_full_grid: bool = True
    out: Optional[Path] = None
    json: bool = False
    notes: list = field(default_factory=list)


class CheckFailed(Exception):
    """Carries a report whose check did not pass."""

    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


# --------------------------------------------------------------------------
# JSON rendering


def jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return fmt_rational(obj)
    if isinstance(obj, float):
        return "inf" if obj == math.inf else obj
    if isinstance(obj, Rectangle):
        return {"rows": f"{obj.row_mask:x}", "cols": f"{obj.col_mask:x}"}
    if isinstance(obj, Assignment):
        return {"fixed": f"{obj.fixed_mask:x}", "values": f"{obj.values:x}"}
    if isinstance(obj, Witness):
        return {"kind": obj.kind, "bound": obj.bound, "epsilon": fmt_rational(obj.epsilon),
                "text": io.serialize_witness(obj)}
    if isinstance(obj, FeasibilityReport):
        return {"side": obj.side, "feasible": obj.feasible, "objective": jsonable(obj.objective),
                "checked": obj.checked, "violations": [str(v) for v in obj.violations[:20]],
                "violation_count": len(obj.violations)}
    if isinstance(obj, Distribution):
        return {str(k): fmt_rational(v) for k, v in sorted(obj.mass.items())}
    if isinstance(obj, (CommInstance, QueryInstance)):
        return io.serialize_instance(obj)
    if isinstance(obj, dict):
        return {(k if isinstance(k, str) else json.dumps(jsonable(k))): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    return str(obj)


def summary_lines(report: dict) -> list[str]:
    """Scalar fields of a report, one ``key: value`` per line."""
    out = []
    for k, v in report.items():
        v = jsonable(v)
        if isinstance(v, (str, int, float, bool)) and "\n" not in str(v):
            out.append(f"{k}: {v}")
        elif isinstance(v, dict) and k == "tree_primal":
            out.extend(f"{k}.{sk}: {sv}" for sk, sv in v.items() if not isinstance(sv, (dict, list)))
        elif isinstance(v, list) and k == "failures":
            out.extend(f"FAIL {e.get('case', e) if isinstance(e, dict) else e}" for e in v)
        elif isinstance(v, list) and k == "checks":
            out.extend(f"{'ok  ' if c['holds'] else 'FAIL'} {c['name']}: {c['lhs']} {c['rel']} {c['rhs']}"
                       + ("" if c["hard"] else " (soft)") for c in v)
    return out


def emit(report: dict, cfg: RunConfig) -> None:
    text = json.dumps(jsonable(report), indent=2, sort_keys=True)
    if cfg.out:
        cfg.out.write_text(text + "\n")
    if cfg.json:
        print(text)
    else:
        print("\n".join(summary_lines(report)))


# --------------------------------------------------------------------------
# commands


def _parse_kind(kind: str):
    name, _, z = kind.partition(":")
    try:
        return name, (int(z) if z else None)
    except ValueError:
        raise InputError(f"bad bound kind {kind!r}") from None


def _write_witnesses(prefix: Optional[str], primal: Witness, dual: Witness) -> list:
    if not prefix:
        return []
    paths = [Path(prefix + ".primal.wit"), Path(prefix + ".dual.wit")]
    paths[0].write_text(io.serialize_witness(primal))
    paths[1].write_text(io.serialize_witness(dual))
    return [str(p) for p in paths]


def cmd_compute(args, cfg: RunConfig) -> dict:
    inst = io.parse_instance(args.input)
    eps = as_rational(args.eps)
    kind, z = _parse_kind(args.kind)
    if args.z is not None:
        z = args.z
    if args.dump_lp and kind not in QUERY_MEASURES and kind != "srec_max":
        if isinstance(inst, CommInstance):
            lp = comm.build_comm_lp(inst, kind, eps, z, cfg.restrict_z_image, cfg.caps)
        else:
            lp = query.build_query_lp(inst, kind, eps, cfg.full_alphabet, cfg.caps)
        Path(args.dump_lp).write_text(dump_lp(lp))
    if isinstance(inst, CommInstance):
        rep = comm.compute_comm_bound(inst, kind, eps, z, cfg.restrict_z_image, cfg.caps)
        files = _write_witnesses(args.witness, rep.primal_witness, rep.dual_witness)
        return {"command": "compute", "kind": comm.bound_label(kind, rep.z), "epsilon": eps, "value": rep.value,
                "log2_value": rep.log2_value, "lp_sizes": {"variables": rep.lp_sizes[0], "constraints": rep.lp_sizes[1]},
                "per_z": rep.per_z, "pivots": rep.pivots, "witness_files": files,
                "primal_witness": rep.primal_witness, "dual_witness": rep.dual_witness}
    if kind in QUERY_MEASURES:
        return {"command": "compute", "kind": kind, **_query_measure(inst, kind, eps, cfg)}
    rep = query.compute_query_bound(inst, kind, eps, cfg.full_alphabet, cfg.caps)
    files = _write_witnesses(args.witness, rep.primal_witness, rep.dual_witness)
    return {"command": "compute", "kind": kind, "epsilon": eps, "value": rep.value, "log2_value": rep.log2_value,
            "lp_sizes": {"variables": rep.lp_sizes[0], "constraints": rep.lp_sizes[1]}, "labels": rep.labels,
            "pivots": rep.pivots, "witness_files": files,
            "primal_witness": rep.primal_witness, "dual_witness": rep.dual_witness}


def _query_measure(inst: QueryInstance, kind: str, eps: Fraction, cfg: RunConfig) -> dict:
    if kind == "certificate":
        r = query.certificate_complexity(inst, cfg.caps)
        return {"C": r.C, "per_z": r.per_z, "per_x": r.per_x}
    if kind == "sensitivity":
        r = query.sensitivity_and_block_sensitivity(inst)
        fam = r.family
        return {"s": r.s, "bs": r.bs, "s_point": r.s_point, "bs_point": r.bs_point,
                "blocks": [f"{b:x}" for b in fam.blocks] if fam else []}
    if kind == "cadv":
        r = query.cadv(inst, cfg.caps)
        return {"value": r.value, "pairs": r.pairs, "distributions": {str(x): list(p) for x, p in r.distributions.items()}}
    r = query.approx_degree(inst, eps, cfg.caps)
    return {"epsilon": eps, "degree": r.degree, "strict": r.strict,
            "coefficients": {f"{s:x}": c for s, c in sorted(r.coefficients.items())}}


def verify_witness(inst, w: Witness, cfg: RunConfig) -> FeasibilityReport:
    kind, z = _parse_kind(w.bound)
    if isinstance(inst, CommInstance):
        if w.kind == "primal" and kind in ("prt", "prt_relation"):
            if all(isinstance(r, Rectangle) for _, r in w.weights):
                return comm.check_prt_primal(inst, w)
        lp = comm.build_comm_lp(inst, kind, w.epsilon, z, cfg.restrict_z_image, cfg.caps)
        return check_witness(lp, w)
    if kind not in query.QUERY_KINDS:
        raise InputError(f"unknown query bound kind {kind!r}")
    if w.kind == "primal":
        return query.check_query_primal(inst, w, kind)
    return query.check_query_dual(inst, w, kind, cfg.caps)


def cmd_verify(args, cfg: RunConfig) -> dict:
    inst = io.parse_instance(args.input)
    if not args.witness:
        raise InputError("verify-witness needs --witness FILE")
    w = io.parse_witness(args.witness)
    rep = verify_witness(inst, w, cfg)
    out = {"command": "verify-witness", "bound": w.bound, "side": w.kind, "epsilon": w.epsilon,
           "feasible": rep.feasible, "objective": rep.objective, "log2_objective": comm.log2_text(rep.objective),
           "report": rep}
    if not rep.feasible:
        raise CheckFailed(out)
    return out


def cmd_oracle(args, cfg: RunConfig) -> dict:
    inst = io.parse_instance(args.input)
    kind = args.kind or ("Dcc" if isinstance(inst, CommInstance) else "Dquery")
    if kind == "Dcc":
        if not isinstance(inst, CommInstance):
            raise InputError("Dcc needs a communication instance")
        r = oracles.deterministic_cc(inst)
        tree = io.serialize_protocol(r.structure)
    elif kind == "Dquery":
        if not isinstance(inst, QueryInstance):
            raise InputError("Dquery needs a query instance")
        r = oracles.deterministic_query(inst, caps=cfg.caps)
        tree = io.serialize_decision_tree(r.structure)
    elif kind == "rank":
        if not isinstance(inst, CommInstance):
            raise InputError("rank needs a communication instance")
        r = oracles.exact_rank(inst)
        tree = None
    else:
        raise InputError(f"unknown oracle {kind!r}; expected Dcc, Dquery or rank")
    if tree and args.tree:
        Path(args.tree).write_text(tree + "\n")
    out = {"command": "oracle", "quantity": r.quantity, "value": r.value}
    if tree:
        out["tree"] = tree
    if args.check_tree:
        out.update(_tree_primal(inst, Path(args.check_tree).read_text()))
    return out


def _tree_primal(inst, text: str) -> dict:
    if isinstance(inst, CommInstance):
        p = comm.protocol_to_primal(inst, io.parse_protocol_text(text))
    else:
        p = query.decision_tree_to_primal(inst, io.parse_decision_tree_text(text))
    return {"tree_primal": {"objective": p.objective, "error": p.error, "depth": p.depth,
                            "feasible": p.report.feasible, "witness": p.witness}}


def _read_distribution(path: str) -> Distribution:
    mass = {}
    for no, line in io._lines(Path(path).read_text()):
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {no}: expected '<cell> <p/q>'")
        try:
            idx = int(parts[0])
        except ValueError:
            raise InputError(f"line {no}: bad cell index") from None
        mass[idx] = io._rat(parts[1], no)
    return Distribution(mass)


def cmd_lemma(args, cfg: RunConfig) -> dict:
    inst = io.parse_instance(args.input)
    if not isinstance(inst, CommInstance):
        raise InputError("lemma directions act on communication instances")
    if not args.name:
        raise InputError(f"lemma needs --name, one of {', '.join(lemmas.DIRECTIONS)}")
    eps = as_rational(args.eps)
    dual = io.parse_witness(args.witness) if args.witness else None
    g = io.parse_instance(args.g) if args.g else None
    if args.distribution:
        lam = _read_distribution(args.distribution)
    elif args.name in ("sdisceq1", "sdisceq2", "recgeqdisc"):
        lam = Distribution.uniform(inst.defined())
    else:
        lam = suites.lemma_inputs(inst, args.z) if args.z is not None else None
    r = lemmas.lemma_transform(args.name, inst, eps, args.z, dual=dual, lam=lam, g=g)
    out = {"command": "lemma", "direction": r.direction, "claim": r.claim, "epsilon": eps, "z": r.z,
           "holds": r.holds, "flagged": r.flagged,
           "checks": [{"name": c.name, "lhs": c.lhs, "rel": c.rel, "rhs": c.rhs, "holds": c.holds, "hard": c.hard}
                      for c in r.checks],
           "constructed": {k: v for k, v in r.constructed.items() if not isinstance(v, comm.TildeRecResult)}}
    if not r.holds:
        raise CheckFailed(out)
    return out


def cmd_example(args, cfg: RunConfig) -> dict:
    name = args.name or ""
    low = name.lower()
    if low == "tribes":
        n = args.n or 4
        eps = as_rational(args.eps) if args.eps != "0" else Fraction(1, 32)
        w = instances.tribes_dual_witness(n, eps, cfg.caps)
        out = {"command": "example", "name": "tribes", "n": n, "epsilon": eps, "delta": w.delta,
               "scale_exponent": w.scale_exponent, "certified_objective": w.objective,
               "formula": w.formula, "formula_value": w.formula_value,
               "set_sizes": {k: len(v) for k, v in w.sets.items()}, "report": w.report}
        if args.witness:
            Path(args.witness).write_text(io.serialize_witness(w.witness))
        return out
    if low == "lne":
        n = args.n or 2
        w = instances.lne_primal_witness(n, cfg.lne_full_grid, seed=args.seed)
        out = {"command": "example", "name": "lne", "n": n, "mode": "full grid" if w.full_grid else "nonzero blocks",
               "one_side_total": w.one_side_total, "zero_side_total": w.zero_side_total, "total": w.total,
               "support_total": w.support_total, "bound": w.bound, "checked_cells": w.checked_cells,
               "feasible": w.report.feasible, "report": w.report, "skipped": [str(v) for v in w.skipped]}
        if args.witness:
            Path(args.witness).write_text(io.serialize_witness(w.witness))
        if not w.report.feasible or w.total > w.bound:
            raise CheckFailed(out)
        return out
    inst = instances.make_standard(name)
    text = io.serialize_instance(inst)
    if args.instance_out:
        Path(args.instance_out).write_text(text)
    return {"command": "example", "name": name, "instance": text}


def cmd_suite(args, cfg: RunConfig) -> dict:
    if args.name not in suites.SUITES:
        raise InputError(f"unknown suite {args.name!r}; expected one of {', '.join(suites.SUITES)}")
    fn = suites.SUITES[args.name]
    kwargs = {"seed": args.seed}
    if args.count is not None:
        kwargs["count"] = args.count
    if args.name not in ("lemmas",):
        kwargs["caps"] = cfg.caps
    rep = fn(**kwargs)
    out = {"command": "suite", "name": rep.name, "seed": args.seed, "passed": rep.passed,
           "cases": rep.cases, "failures": rep.failures, "excluded": rep.excluded}
    if not rep.passed:
        raise CheckFailed(out)
    return out


COMMANDS = {
    "compute": cmd_compute,
    "verify-witness": cmd_verify,
    "oracle": cmd_oracle,
    "lemma": cmd_lemma,
    "example": cmd_example,
    "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partbound", description="Exact LP lower bounds for communication and query complexity.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="also write the JSON report to this file")
        sp.add_argument("--cap-vars", type=int, default=500_000, help="maximum LP variables (default 500000)")
        sp.add_argument("--cap-pivots", type=int, default=10_000_000, help="maximum simplex pivots (default 10^7)")
        sp.add_argument("--cap-regions", type=int, default=2_000_000, help="maximum enumerated regions (default 2*10^6)")
        sp.add_argument("--time-budget", type=float, default=None, help="seconds allowed per LP solve")
        sp.add_argument("--seed", type=int, default=7)
        sp.add_argument("--json", action="store_true", help="print the JSON report instead of the summary")

    sp = sub.add_parser("compute", help="solve one bound on an instance file")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--kind", required=True, help="prt, rec:z, srec:z, srec_max, disc, sdisc, prt_lv, prt_lv_star, "
                    "prt_relation, qprt, qprt_relation, qsrec_relaxed, certificate, sensitivity, cadv, approx_degree")
    sp.add_argument("--eps", default="0")
    sp.add_argument("--z", type=int)
    sp.add_argument("--witness", help="write PREFIX.primal.wit and PREFIX.dual.wit")
    sp.add_argument("--restrict-z-image", action="store_true", help="communication labels only from the image of f")
    sp.add_argument("--full-alphabet", action="store_true", help="query labels over all 2^m outputs")
    sp.add_argument("--dump-lp", help="write the LP in plain text, one constraint per line")

    sp = sub.add_parser("verify-witness", help="check a witness file against an instance")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--witness", required=True)
    sp.add_argument("--restrict-z-image", action="store_true")

    sp = sub.add_parser("oracle", help="brute-force Dcc, Dquery or rank")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--kind", choices=("Dcc", "Dquery", "rank"))
    sp.add_argument("--tree", help="write the optimal protocol or decision tree here")
    sp.add_argument("--check-tree", help="convert this protocol or decision tree into a partition primal")

    sp = sub.add_parser("lemma", help="run one constructive lemma direction")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--name", choices=lemmas.DIRECTIONS)
    sp.add_argument("--eps", default="1/8")
    sp.add_argument("--z", type=int)
    sp.add_argument("--witness", help="dual witness to start from (solved if omitted)")
    sp.add_argument("--distribution", help="file of '<cell> <p/q>' lines")
    sp.add_argument("--g", help="instance file of the modified function")

    sp = sub.add_parser("example", help="named instances and explicit witnesses")
    common(sp)
    sp.add_argument("--name", required=True, help="tribes, lne, or EQ_k / OR_n / XOR_n / AND_n / CONST_RxC / CONST_n")
    sp.add_argument("--n", type=int)
    sp.add_argument("--eps", default="0")
    sp.add_argument("--verify", action="store_true", help="accepted for clarity; witnesses are always verified")
    sp.add_argument("--witness", help="write the explicit witness here")
    sp.add_argument("--instance-out", help="write the named instance here")
    sp.add_argument("--lne-full-grid", action=argparse.BooleanOptionalAction, default=True,
                    help="check every cell (default) or only cells whose blocks are all nonzero")

    sp = sub.add_parser("suite", help="run a seeded inequality suite")
    common(sp)
    sp.add_argument("--name", required=True, choices=tuple(suites.SUITES))
    sp.add_argument("--count", type=int)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            caps=Caps(args.cap_regions, args.cap_vars, args.cap_pivots, args.time_budget),
            restrict_z_image=getattr(args, "restrict_z_image", False),
            full_alphabet=getattr(args, "full_alphabet", False),
            lne_full_grid=getattr(args, "lne_full_grid", True),
            out=Path(args.out) if args.out else None,
            json=args.json,
        )
        report = COMMANDS[args.command](args, cfg)
    except CheckFailed as e:
        emit(e.report, cfg)
        return EXIT_FAILED
    except InvariantError as e:
        print(f"error: check failed: {e}", file=sys.stderr)
        return EXIT_FAILED
    except ResourceError as e:
        print(f"error: resource cap: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    emit(report, cfg)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
