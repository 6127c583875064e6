"""Command-line front end.

Subcommands ``source``, ``unitary``, ``pauli`` and ``ampdamp`` emit one row
per grid point; ``verify`` runs the acceptance checks.  Exit codes: 0 ok,
1 verification failure, 2 invalid arguments, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance
from . import channel as ch
from . import source as src
from . import unitary as un
from .qcore import QubitCapError
from .seesaw import seesaw_optimize

ALL_SEESAW_QUBITS = 6

EXIT_OK, EXIT_VERIFY, EXIT_ARGS, EXIT_CAP = 0, 1, 2, 3
SIG_DIGITS = 12

METHODS = {
    "source": ("closed", "srm", "fixed-point", "all"),
    "unitary": ("closed", "srm", "fixed-point", "all"),
    "pauli": ("closed", "seesaw", "all"),
    "ampdamp": ("closed", "srm", "fixed-point", "seesaw", "all"),
}
SWEEP_VARS = {"source": ("phi", "n"), "unitary": ("phi", "n"),
              "pauli": ("n",), "ampdamp": ("gamma", "n")}


class UsageError(Exception):
    pass


def _num(x):
    """Round to 12 significant digits so JSON and CSV agree."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not np.isfinite(x) else float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    return x


def _wants(method: str, *names: str) -> bool:
    return method == "all" or method in names


# --- row builders ---------------------------------------------------------


def source_row(args, n: int, phi: float) -> dict:
    problem = src.SourceProblem(n, phi)
    values = {"closed": src.ps_star(problem)}
    warnings = []
    if _wants(args.method, "srm", "fixed-point"):
        try:
            rep = src.verify_source(problem, max_iter=args.max_iter, tol=args.tol or 1e-9)
        except QubitCapError:
            if args.method != "all":
                raise
            warnings.append("oracle cap exceeded; closed form only")
        else:
            if _wants(args.method, "srm"):
                values["srm"] = rep.srm
            if _wants(args.method, "fixed-point"):
                values["fixed_point"] = rep.fixed_point
                values["fixed_point_converged"] = rep.fixed_point_converged
            values["certificate_slack"] = rep.certificate_slack
            values["max_disagreement"] = rep.max_disagreement
    return _row({"n": n, "phi": phi}, values, warnings)


def unitary_row(args, n: int, phi: float) -> dict:
    problem = un.UnitaryProblem(n, phi)
    star = src.ps_star(src.SourceProblem(n, phi))
    closed = un.ps_unitary(problem)
    values = {
        "closed": closed,
        "phi_min": un.phi_min(n),
        "ps_star": star,
        "advantage": closed - star,
    }
    warnings = []
    if problem.phi > 0:
        inp = un.optimal_input(problem)
        values["coefficients"] = {str(m): c for m, c in inp.support().items()}
        if _wants(args.method, "srm", "fixed-point"):
            try:
                res = un.unitary_oracle(problem, inp, certify=_wants(args.method, "fixed-point"))
            except QubitCapError:
                if args.method != "all":
                    raise
                warnings.append("oracle cap exceeded; closed form only")
            else:
                values["srm"] = res.srm
                if res.fixed_point is not None:
                    values["fixed_point"] = res.fixed_point
                    values["certificate_slack"] = res.certificate_slack
    return _row({"n": n, "phi": phi}, values, warnings)


def pauli_row(args, n: int, probs) -> dict:
    chan = ch.PauliChannel(*probs)
    rank = ch.pauli_rank(chan)
    values = {"rank": rank}
    warnings = []
    if rank == 0:
        values["closed"] = 1.0 / n
    elif rank in (1, 2):
        rep = ch.pauli_rank12_value(chan, n)
        values["closed"] = rep.success_probability
        values["input"] = rep.input
    else:
        lower, upper = ch.pauli_rank3_bounds(chan, n, use_ancilla=args.ancilla)
        values["lower"] = lower.success_probability
        values["upper"] = upper.success_probability
        if args.ancilla:
            values["closed"] = upper.success_probability
    if _run_seesaw(args, n, warnings):
        res = seesaw_optimize(chan, n, use_ancilla=args.ancilla, restarts=args.restarts,
                              tol=args.tol or 1e-9, seed=args.seed)
        values["seesaw"] = res.value
        values["restarts_converged"] = sum(r.converged for r in res.restarts)
        if not res.converged:
            warnings.append("seesaw did not converge in any restart")
    return _row({"n": n, "p": list(probs), "ancilla": args.ancilla}, values, warnings)


def ampdamp_row(args, n: int, gamma: float) -> dict:
    chan = ch.AmplitudeDampingChannel(gamma)
    lower = ch.ad_product_lower_bound(chan, n).success_probability
    verify = _wants(args.method, "srm", "fixed-point")
    rep = ch.ad_ancilla_strategy(chan, n, verify=False)
    asym = ch.ad_asymptotic_value(chan, n)
    values = {
        "closed": rep.success_probability,
        "lower": lower,
        "p": rep.details["p"],
        "asymptotic": asym,
        "gap_to_product": rep.success_probability - lower,
        "gap_to_asymptotic": rep.success_probability - asym,
    }
    warnings = []
    if verify and n >= 2:
        try:
            check = ch.ad_explicit_value(chan, ch.ad_two_weight_coefficients(gamma, n))
        except QubitCapError:
            if args.method != "all":
                raise
            warnings.append("oracle cap exceeded; closed form only")
        else:
            values["srm"] = check["branch_bound"]
            values["fixed_point"] = check["exact"]
            values["certificate_slack"] = check["certificate_slack"]
    if _run_seesaw(args, n, warnings):
        res = seesaw_optimize(chan, n, use_ancilla=args.ancilla, restarts=args.restarts,
                              tol=args.tol or 1e-9, seed=args.seed)
        values["seesaw"] = res.value
    return _row({"n": n, "gamma": gamma, "ancilla": args.ancilla}, values, warnings)


def _run_seesaw(args, n: int, warnings: list[str]) -> bool:
    """Seesaw runs when asked for; under ``all`` only for small registers."""
    if args.method == "seesaw":
        return True
    if args.method != "all":
        return False
    qubits = n * (2 if args.ancilla else 1)
    if qubits > ALL_SEESAW_QUBITS:
        warnings.append(f"seesaw skipped for {qubits} qubits; request --method seesaw to force it")
        return False
    return True


def _row(params: dict, values: dict, warnings: list[str]) -> dict:
    row = {"params": params, "values": values}
    if warnings:
        row["warnings"] = warnings
    return row


# --- argument handling ----------------------------------------------------


def parse_sweep(spec: str, allowed) -> tuple[str, np.ndarray]:
    try:
        var, rng = spec.split("=", 1)
        start, stop, count = rng.split(":")
        grid = np.linspace(float(start), float(stop), int(count))
    except ValueError as exc:
        raise UsageError(f"bad --sweep '{spec}', expected VAR=start:stop:count") from exc
    if var not in allowed:
        raise UsageError(f"cannot sweep '{var}' here; choose from {', '.join(allowed)}")
    if int(count) < 1:
        raise UsageError("sweep count must be positive")
    if var == "n":
        grid = np.unique(np.round(grid).astype(int))
    return var, grid


def _parse_probs(text: str | None):
    if text is None:
        raise UsageError("--p is required, e.g. --p 0.25,0.25,0.25,0.25")
    try:
        probs = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad --p '{text}'") from exc
    if len(probs) != 4 or min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-12:
        raise UsageError("--p needs four non-negative probabilities summing to 1")
    return probs


def _validate(args):
    if args.method not in METHODS[args.command]:
        raise UsageError(f"method '{args.method}' not available for {args.command}; "
                         f"choose from {', '.join(METHODS[args.command])}")
    if args.n is None:
        raise UsageError("--n is required")
    min_n = 2 if args.command == "unitary" else 1
    if args.n < min_n:
        raise UsageError(f"--n must be at least {min_n}")
    if args.command in ("source", "unitary") and args.phi is None and not args.sweep:
        raise UsageError("--phi is required (radians)")
    if args.command == "ampdamp":
        if args.gamma is None and not args.sweep:
            raise UsageError("--gamma is required")
        if args.gamma is not None and not 0.0 <= args.gamma <= 1.0:
            raise UsageError("--gamma must lie in [0, 1]")
    if args.restarts < 1 or args.max_iter < 1:
        raise UsageError("--restarts and --max-iter must be positive")


def build_grid(args) -> tuple[list[dict], dict]:
    """Expand the problem flags and optional sweep into ordered grid points."""
    base = {"n": args.n}
    if args.command in ("source", "unitary"):
        base["phi"] = args.phi
    elif args.command == "ampdamp":
        base["gamma"] = args.gamma
    else:
        base["p"] = _parse_probs(args.p)
    points = [dict(base)]
    if args.sweep:
        var, grid = parse_sweep(args.sweep, SWEEP_VARS[args.command])
        points = []
        for v in grid:
            pt = dict(base)
            pt[var] = int(v) if var == "n" else float(v)
            points.append(pt)
    for pt in points:
        if pt["n"] < (2 if args.command == "unitary" else 1):
            raise UsageError("sweep produced an invalid N")
        if args.command == "ampdamp" and not 0.0 <= pt["gamma"] <= 1.0:
            raise UsageError("sweep produced gamma outside [0, 1]")
    problem = {"kind": args.command, **{k: _num(v) for k, v in base.items()},
               "method": args.method}
    if args.sweep:
        problem["sweep"] = args.sweep
    return points, problem


def evaluate(args, point: dict) -> dict:
    if args.command == "source":
        return source_row(args, point["n"], point["phi"])
    if args.command == "unitary":
        return unitary_row(args, point["n"], point["phi"])
    if args.command == "pauli":
        return pauli_row(args, point["n"], point["p"])
    return ampdamp_row(args, point["n"], point["gamma"])


# --- output ---------------------------------------------------------------


def _flat(row: dict) -> dict:
    out = {}
    for section in ("params", "values"):
        for k, v in row[section].items():
            if isinstance(v, dict):
                v = ";".join(f"{a}:{_fmt(b)}" for a, b in v.items())
            elif isinstance(v, list):
                v = ",".join(_fmt(x) for x in v)
            out[k] = v
    if row.get("warnings"):
        out["warnings"] = "; ".join(row["warnings"])
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False) + "\n"
    flat = [_flat(r) for r in report["rows"]]
    header: list[str] = []
    for r in flat:
        header += [k for k in r if k not in header]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in flat:
            w.writerow([_fmt(r.get(k)) for k in header])
        return buf.getvalue()
    cells = [header] + [[_fmt(r.get(k)) for k in header] for r in flat]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_problem(args) -> int:
    _validate(args)
    points, problem = build_grid(args)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda pt: evaluate(args, pt), points))
    rows = [{k: ({kk: _num(vv) for kk, vv in v.items()} if isinstance(v, dict) else v)
             for k, v in r.items()} for r in rows]
    report = {"schema": 1, "problem": problem, "rows": rows}
    _emit(render(report, args.format), args.out)
    return EXIT_OK


def run_verify(args) -> int:
    only = args.only.split(",") if args.only else None
    if only:
        known = set(acceptance.GROUPS) | {c.id for c in acceptance.CHECKS}
        bad = [o for o in only if o not in known]
        if bad:
            raise UsageError(f"unknown --only entries: {', '.join(bad)}")

    def progress(res):
        status = "PASS" if res.passed and res.within_budget else "FAIL"
        print(f"[{status}] criterion {res.id} ({res.group}): {res.name}  "
              f"margin={res.margin:.3g}  {res.elapsed:.2f}s", file=sys.stderr)

    results = acceptance.run_suite(only, tol=args.tol, seed=args.seed, on_result=progress)
    summary = acceptance.summary(results, args.seed, args.tol)
    if not summary["passed"]:
        summary["failed"] = [c["id"] for c in summary["checks"] if not c["passed"]]
    _emit(json.dumps(summary, indent=2) + "\n", args.out)
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of devices")
    common.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--max-iter", type=int, default=10000)
    common.add_argument("--restarts", type=int, default=8)
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--out", help="write the report to FILE instead of stdout")
    common.add_argument("--sweep", help="VAR=start:stop:count")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--ancilla", action=argparse.BooleanOptionalAction, default=False)

    parser = argparse.ArgumentParser(
        prog="pei", description="Optimal identification of a faulty device among N.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("source", "faulty state source"),
                           ("unitary", "faulty rotation gate"),
                           ("pauli", "faulty Pauli channel"),
                           ("ampdamp", "faulty amplitude-damping channel")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--method", default="closed", help="/".join(METHODS[name]))
        if name in ("source", "unitary"):
            p.add_argument("--phi", type=float, help="fault angle in radians")
        if name == "ampdamp":
            p.add_argument("--gamma", type=float, help="damping parameter in [0, 1]")
        if name == "pauli":
            p.add_argument("--p", help="p0,p1,p2,p3")
    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    v.add_argument("--only", help="comma list of groups (" + ",".join(acceptance.GROUPS)
                   + ") or criterion ids")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ARGS if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "verify":
            return run_verify(args)
        return run_problem(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except QubitCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
