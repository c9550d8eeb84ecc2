"""Command-line front end.

Every subcommand prints a verification report on stdout (``--format``) and,
with ``--out``, writes its artifact as JSON.  Exit status: 0 when all checks
pass (or the search succeeded), 1 when a check fails, 2 on invalid input.

CSV reports have the fixed columns ``index,check,target,deviation,status``.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bridge, combinatorics as comb, covariant
from .errors import SchemaViolation, SicMubError, ValidationError
from .finite_field import FieldSpec, is_prime, make_field
from .operator_core import (
    OperatorFamily,
    VerificationReport,
    operator_from_json,
    operator_to_json,
    verify_family,
)
from .phase_space import phase_space

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


@dataclass
class Outcome:
    report: VerificationReport
    artifact: dict = field(default_factory=dict)
    ok: bool | None = None

    @property
    def status(self) -> int:
        ok = self.report.passed if self.ok is None else self.ok
        return EXIT_OK if ok else EXIT_FAIL


# -- helpers ------------------------------------------------------------------

def prime_power(d: int) -> tuple[int, int] | None:
    if d < 2:
        return None
    p = next(k for k in range(2, d + 1) if d % k == 0)
    n, m = 0, d
    while m % p == 0:
        m //= p
        n += 1
    return (p, n) if m == 1 and is_prime(p) else None


def field_from_args(args, required: bool = True) -> FieldSpec | None:
    modulus = None
    if args.modulus:
        modulus = [int(c) for c in args.modulus.split(",")]
    if args.p is not None:
        return make_field(args.p, args.n or 1, modulus)
    d = getattr(args, "d", None)
    if d is not None:
        pn = prime_power(d)
        if pn is None:
            raise ValidationError(f"d = {d} is not a prime power")
        return make_field(pn[0], pn[1], modulus)
    if required:
        raise ValidationError("give the field with --p/--n (or --d)")
    return None


def read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path} is not valid JSON: {exc}") from exc


def load_family(path: str) -> OperatorFamily:
    data = read_json(path)
    try:
        return OperatorFamily.from_json(data.get("family", data))
    except (AttributeError, KeyError, TypeError, IndexError) as exc:
        raise SchemaViolation(f"{path} does not hold an operator family: {exc}") from exc


def load_bases(path: str) -> list[np.ndarray]:
    data = read_json(path)
    try:
        return [operator_from_json(b) for b in data["bases"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaViolation(f"{path} does not hold a list of bases: {exc}") from exc


def parse_row(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse row {text!r}") from exc


def builtin_bases(field: FieldSpec) -> list[np.ndarray]:
    if field.size == 2:
        return bridge.pauli_bases()
    return covariant.mub_bases(field)


def dual_paths(field: FieldSpec) -> comb.PathSystem:
    return comb.dualize_to_path_system(phase_space(field).partitions())


def mu_report(bases: list[np.ndarray], tol: float) -> VerificationReport:
    d = bases[0].shape[0]
    rep = VerificationReport(tol, info={"d": d, "bases": len(bases)})
    rep.add("count", f"{d + 1} bases", abs(len(bases) - (d + 1)), 0)
    rep.add("orthonormal", "<phi_i|phi_j> = delta_ij",
            max(np.max(np.abs(b.conj().T @ b - np.eye(d))) for b in bases))
    cross = max(
        np.max(np.abs(np.abs(bases[a].conj().T @ bases[b]) ** 2 - 1 / d))
        for a, b in itertools.combinations(range(len(bases)), 2)
    )
    rep.add("unbiased", "|<phi_i^k|phi_j^l>|^2 = 1/d", cross)
    return rep


# -- subcommands --------------------------------------------------------------

def cmd_mubs_build(args) -> Outcome:
    f = field_from_args(args)
    bases = builtin_bases(f)
    rep = mu_report(bases, args.tol)
    if f.size > 2:
        for k in range(f.size + 1):
            rep.extend(verify_family(covariant.mub_pvm(f, k), args.tol), prefix=f"pvm{k}.")
    return Outcome(rep, {"field": f.to_json(), "bases": [operator_to_json(b) for b in bases]})


def cmd_mols_build(args) -> Outcome:
    pn = prime_power(args.d) if args.d is not None and args.p is None else (args.p, args.n or 1)
    if pn is None:
        # no field: the best one can do is look for a mate of the cyclic square
        square = comb.cyclic_square(args.d)
        res = comb.orthogonal_mate_search(square, node_budget=args.budget or 10**8)
        rep = VerificationReport(args.tol, info={"d": args.d, "mate_search": res.to_json()})
        rep.add("mate_found", "orthogonal mate of the cyclic square", 0 if res.status == "found" else 1, 0)
        return Outcome(rep, {"d": args.d, "mate_search": res.to_json()})
    f = field_from_args(args)
    squares = comb.mols_from_field(f)
    rep = VerificationReport(args.tol, info={"d": f.size})
    rep.add("count", f"{f.size - 1} squares", abs(len(squares) - (f.size - 1)), 0)
    bad = sum(not comb.are_orthogonal(a, b) for a, b in itertools.combinations(squares, 2))
    rep.add("orthogonal", "every pair orthogonal", bad, 0)
    return Outcome(rep, {"field": f.to_json(), "squares": [s.to_json() for s in squares]})


def cmd_partitions_build(args) -> Outcome:
    f = field_from_args(args)
    parts = phase_space(f).partitions()
    paths = comb.dualize_to_path_system(parts)
    back = comb.path_system_to_partitions(paths)
    counts = comb.incidence_counts(paths)
    d = f.size
    rep = VerificationReport(args.tol, info={"d": d, "incidence": counts})
    bad = sum(not a.one_overlap(b) for a, b in itertools.combinations(parts, 2))
    rep.add("one_overlap", "bins of different partitions meet once", bad, 0)
    rep.add("round_trip", "partitions -> paths -> partitions", sum(a != b for a, b in zip(parts, back)), 0)
    rep.add("lines_per_point", f"{d}", abs(counts["lines_per_point"] - d), 0)
    rep.add("line_intersection", "1", abs(counts["line_intersection"] - 1), 0)
    return Outcome(rep, {
        "field": f.to_json(),
        "partitions": [p.to_json() for p in parts],
        "paths": paths.to_json(),
    })


def _sic_input(args) -> OperatorFamily:
    if args.builtin == "qubit-tetrahedron":
        return bridge.qubit_tetrahedron_sic()
    if not args.input:
        raise ValidationError("give --in FILE or --builtin qubit-tetrahedron")
    fam = load_family(args.input)
    return OperatorFamily(fam.members, "sic-candidate", fam.labels)


def cmd_sic_verify(args) -> Outcome:
    fam = _sic_input(args)
    return Outcome(verify_family(fam, args.tol), {"family": fam.to_json()})


def cmd_sic_marginals(args) -> Outcome:
    sic = _sic_input(args)
    d = sic.dim
    if args.partitions:
        data = read_json(args.partitions)
        parts = data.get("partitions") if isinstance(data, dict) else data
    else:
        pn = prime_power(d)
        if pn is None:
            raise ValidationError(f"no built-in partition family for d = {d}; pass --partitions")
        parts = phase_space(make_field(*pn)).partitions()
    ms = bridge.marginalize(sic, parts)
    rep = bridge.verify_mu_identities(ms, args.tol)
    return Outcome(rep, ms.to_json())


def cmd_sic_from_mubs(args) -> Outcome:
    d = args.d
    if d is None:
        if args.p is None:
            raise ValidationError("give --d or --p/--n")
        d = args.p ** (args.n or 1)
    if prime_power(d) is None:
        raise ValidationError(
            f"d = {d}: a {d + 1} x {d} path system needs {d - 1} mutually orthogonal Latin squares "
            f"of order {d}, which are not available (none exist for d = 6); "
            "the path-sum reconstruction cannot be formed"
        )
    f = field_from_args(argparse.Namespace(**{**vars(args), "d": d}))
    bases = load_bases(args.input) if args.input else builtin_bases(f)
    if args.first_row:
        rows = [bridge.SmearingMatrix.circulant(parse_row(args.first_row))] * (d + 1)
    elif args.smearing:
        data = read_json(args.smearing)
        mats = data.get("smearing") if isinstance(data, dict) else data
        if np.ndim(mats) == 2:
            mats = [mats] * (d + 1)
        rows = [bridge.SmearingMatrix.from_json(m) for m in mats]
    else:
        raise ValidationError("give --first-row or --smearing")
    povms = [bridge.smear(b, lam) for b, lam in zip(bases, rows)]
    res = bridge.reconstruct_sic_system(povms, dual_paths(f), args.tol, strict=False)
    return Outcome(res.report, res.to_json(), res.is_sic)


def cmd_smearing_search(args) -> Outcome:
    f = field_from_args(args)
    bases = load_bases(args.input) if args.input else builtin_bases(f)
    res = bridge.search_positive_smearing(
        bases, dual_paths(f), args.parametrization, seed=args.seed, tol=args.tol
    )
    rep = VerificationReport(args.tol, info={"d": f.size, "parametrization": args.parametrization})
    rep.add("positivity", f"min eigenvalue >= -{args.tol:g}", max(0.0, -res.min_eigenvalue))
    for k, m in enumerate(res.matrices):
        rep.add(f"doubly_stochastic[{k}]", "rows and columns sum to 1",
                max(np.max(np.abs(m.rows.sum(0) - 1)), np.max(np.abs(m.rows.sum(1) - 1))))
    return Outcome(rep, res.to_json(), res.is_sic)


def cmd_covariant_check(args) -> Outcome:
    f = field_from_args(args)
    if args.input:
        data = read_json(args.input)
        try:
            if "psi" in data:
                T = covariant.FiducialResult.from_json(data).T
            else:
                T = operator_from_json(data.get("T", data))
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"{args.input} holds neither a fiducial nor an operator: {exc}") from exc
    else:
        T = covariant.fiducial_search(f, seed=args.seed).T
    rep = covariant.sic_condition_report(T, f, args.tol)
    return Outcome(rep, {"field": f.to_json(), "T": operator_to_json(T), "report": rep.to_json()})


def cmd_fiducial_search(args) -> Outcome:
    f = field_from_args(args)
    kw = {"restarts": args.budget} if args.budget else {}
    res = covariant.fiducial_search(f, seed=args.seed, **kw)
    rep = covariant.sic_condition_report(res.T, f, args.tol)
    rep.info["restart"] = res.restart
    return Outcome(rep, res.to_json(), res.converged and rep.passed)


COMMANDS = {
    ("mubs", "build"): cmd_mubs_build,
    ("mols", "build"): cmd_mols_build,
    ("partitions", "build"): cmd_partitions_build,
    ("sic", "verify"): cmd_sic_verify,
    ("sic", "marginals"): cmd_sic_marginals,
    ("sic", "from-mubs"): cmd_sic_from_mubs,
    ("smearing", "search"): cmd_smearing_search,
    ("covariant", "check"): cmd_covariant_check,
    ("fiducial", "search"): cmd_fiducial_search,
}


# -- output -------------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def render(report: VerificationReport, fmt: str) -> str:
    if fmt == "json":
        return dumps(report.to_json())
    header = ["index", "check", "target", "deviation", "status"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(report.rows())
        return buf.getvalue().rstrip("\n")
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(x) for x in row) + " |" for row in report.rows()]
    lines.append(f"\n{'all checks pass' if report.passed else 'some checks FAIL'} (tol {report.tol:g})")
    return "\n".join(lines)


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="field characteristic")
    common.add_argument("--n", type=int, help="extension degree (default 1)")
    common.add_argument("--modulus", help="comma-separated coefficients, constant term first")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, help="node budget (mols) or restart budget (fiducial)")
    common.add_argument("--in", dest="input", help="input JSON file")
    common.add_argument("--out", help="write the artifact JSON here")
    common.add_argument("--format", choices=["json", "csv", "markdown"], default="json")

    parser = argparse.ArgumentParser(prog="sicmub", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)
    subs = {}
    for group, action in COMMANDS:
        if group not in subs:
            subs[group] = groups.add_parser(group).add_subparsers(dest="action", required=True)
        sp = subs[group].add_parser(action, parents=[common])
        if (group, action) in {("mols", "build"), ("sic", "from-mubs"), ("smearing", "search"),
                               ("mubs", "build"), ("partitions", "build")}:
            sp.add_argument("--d", type=int, help="dimension (alternative to --p/--n)")
        if group == "sic" and action in ("verify", "marginals"):
            sp.add_argument("--builtin", choices=["qubit-tetrahedron"])
        if (group, action) == ("sic", "marginals"):
            sp.add_argument("--partitions", help="JSON file with a list of partitions")
        if (group, action) == ("sic", "from-mubs"):
            sp.add_argument("--first-row", help="first row of a circulant smearing, comma-separated")
            sp.add_argument("--smearing", help="JSON file with one matrix or one per basis")
        if (group, action) == ("smearing", "search"):
            sp.add_argument("--parametrization", choices=["single-circulant", "per-basis-circulant"],
                            default="single-circulant")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    if args.seed < 0 or (args.budget is not None and args.budget < 0):
        parser.error("--seed and --budget must be nonnegative")
    try:
        outcome = COMMANDS[(args.group, args.action)](args)
    except (SicMubError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(render(outcome.report, args.format))
    if args.out:
        artifact = {**outcome.artifact, "report": outcome.report.to_json()}
        Path(args.out).write_text(dumps(artifact) + "\n")
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
