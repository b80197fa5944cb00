"""Command-line front end.

    vasyunin coeffs    --family first --n-max 64
    vasyunin profile   --family second --n 8 --horizon 40
    vasyunin canonical --family first --n 16 --format csv
    vasyunin diverge   --family first --n-max 16
    vasyunin verify    [--checks identity,plateau,...] [--mutate K=V]

Exit status: 0 success, 1 a verification failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional


from . import __version__
from .corrections import (
    SeedFamily,
    build_correction,
    correction_coefficients,
    iter_corrections,
    leading_coefficients_check,
    seed_idempotency_check,
    to_canonical,
    verify_plateau,
)
from .diagnostics import (
    IntegralDiagnostic,
    NormEstimate,
    divergence_report,
    identity_audit,
)
from .natfunc import profile
from .numtheory import alternating, coeff_closed, dirichlet_inverse, mobius
from .rational import DEFAULT_PRECISION, decimal_string, format_rational

N_LIMIT = 1 << 16
X_LIMIT = 1 << 30
MIN_PRECISION = 15

CHECKS = ("duality", "identity", "plateau", "canonical", "leading", "idempotency")

# fixed CSV column order per command
CSV_COLUMNS = {
    "coeffs": ["k", "c_recurrence", "c_recurrence_decimal", "c_closed", "match"],
    "profile": ["m", "v", "v_decimal"],
    "canonical": ["denominator", "coefficient", "coefficient_decimal", "mobius_match_flag"],
    "diverge": [
        "n", "c_n", "X",
        "delta_truncated", "delta_truncated_decimal", "delta_tail_bound",
        "delta_tail_bound_decimal", "delta_lower_decimal",
        "I_closed_form_decimal", "I_truncated", "I_truncated_decimal",
        "I_tail_bound", "I_tail_bound_decimal",
    ],
    "verify": ["check", "ok", "detail", "failure_index", "failure_value", "expected"],
}


class UsageError(Exception):
    pass


def _rat(value, precision: int, key: str) -> dict:
    return {key: format_rational(value), f"{key}_decimal": decimal_string(value, precision)}


# ------------------------------------------------------------------ tables


def cmd_coeffs(family: SeedFamily, n_max: int, precision: int) -> tuple[list, dict]:
    coeffs = correction_coefficients(family, n_max)
    closed = family is SeedFamily.FIRST
    rows = []
    for k, c in enumerate(coeffs, start=1):
        row = {"k": k, **_rat(c, precision, "c_recurrence")}
        if closed:
            cc = coeff_closed(k)
            row["c_closed"] = cc
            row["match"] = c == cc
        rows.append(row)
    extra = {}
    if not closed:
        extra["note"] = "closed-form coefficients exist only for the first family; column omitted"
    return rows, extra


def cmd_profile(family: SeedFamily, n: int, horizon: Optional[int], precision: int) -> tuple[list, dict]:
    horizon = 4 * n if horizon is None else horizon
    corr = build_correction(family, n)
    prof = profile(corr.phi, horizon)
    rows = [{"m": m, **_rat(v, precision, "v")} for m, v in enumerate(prof.values)]
    return rows, {"horizon": horizon, "period": prof.period}


def cmd_canonical(family: SeedFamily, n: int, precision: int) -> tuple[list, dict]:
    corr = build_correction(family, n)
    if family is SeedFamily.FIRST:
        phi = to_canonical(corr)
        if phi != corr.phi:
            raise AssertionError("canonical formula disagrees with the direct expansion")
        source = "closed canonical formula (checked against expansion)"
    else:
        phi = corr.phi
        source = "direct expansion"
    rows = []
    for a in phi.denominators:
        c = phi.coefficient(a)
        rows.append({
            "denominator": a,
            **_rat(c, precision, "coefficient"),
            "mobius_match_flag": (c == mobius(a)) if a <= n else None,
        })
    return rows, {"source": source}


def _estimate(e: NormEstimate, precision: int) -> dict:
    return {
        "X": e.X,
        **_rat(e.truncated, precision, "truncated"),
        **_rat(e.tail_bound, precision, "tail_bound"),
        "lower_decimal": decimal_string(e.lower, precision),
        "upper_decimal": decimal_string(e.upper, precision),
    }


def _integral(d: IntegralDiagnostic, precision: int) -> dict:
    return {
        "X": d.X,
        "closed_form_decimal": None if d.closed_form is None else decimal_string(d.closed_form, precision),
        **_rat(d.truncated, precision, "truncated"),
        **_rat(d.tail_bound, precision, "tail_bound"),
        "consistent": d.consistent(),
    }


def cmd_diverge(family: SeedFamily, n_max: int, X: Optional[int], precision: int,
                workers: int = 1, stamp: bool = False) -> tuple[list, dict]:
    rep = divergence_report(family, n_max, X, precision, workers=workers, stamp=stamp)
    rows = [
        {
            "n": row.n,
            **_rat(row.c_n, precision, "c_n"),
            "delta_l1": _estimate(row.delta_l1, precision),
            "I_n": _integral(row.integral, precision),
        }
        for row in rep.rows
    ]
    extra = {
        "x_policy": rep.x_policy,
        "non_cauchy": rep.non_cauchy,
        "non_cauchy_rule": "delta lower bound >= 3/10 at every n = 2^r <= n_max (first family only)",
        "I_1": _integral(rep.initial_integral, precision),
    }
    if rep.timestamp:
        extra["timestamp"] = rep.timestamp
    return rows, extra


# ------------------------------------------------------------------ verify


def _parse_mutation(text: Optional[str]) -> Optional[tuple[int, int]]:
    if not text:
        return None
    try:
        k, v = text.split("=")
        k, v = int(k), int(v)
    except ValueError:
        raise UsageError(f"--mutate expects K=V with integers, got {text!r}") from None
    if k < 1:
        raise UsageError("--mutate index must be >= 1")
    return k, v


def _witness_row(w) -> dict:
    return {
        "check": w.name,
        "ok": w.ok,
        "detail": w.detail,
        "failure_index": w.index,
        "failure_value": None if w.value is None else str(w.value),
        "expected": None if w.expected is None else str(w.expected),
    }


def _first_failure(name: str, witnesses, detail: str) -> dict:
    for w in witnesses:
        if not w.ok:
            row = _witness_row(w)
            row["check"] = name
            row["detail"] = f"{detail}; {w.detail}".strip("; ")
            return row
    return {"check": name, "ok": True, "detail": detail, "failure_index": None,
            "failure_value": None, "expected": None}


def cmd_verify(checks: list[str], mutation: Optional[tuple[int, int]],
               limits: dict) -> tuple[list, dict]:
    from .corrections import Witness

    def closed(k):
        if mutation and k == mutation[0]:
            return mutation[1]
        return coeff_closed(k)

    rows = []
    for name in checks:
        if name == "duality":
            N = limits["duality"]
            rec = correction_coefficients(SeedFamily.FIRST, N)
            inv = dirichlet_inverse(alternating(N))
            ws = (
                Witness(rec[k - 1] == closed(k) == inv[k], "duality", k, rec[k - 1], closed(k))
                for k in range(1, N + 1)
            )
            rows.append(_first_failure("duality", ws, f"k<={N}"))
        elif name == "identity":
            N = limits["identity"]
            w = identity_audit(N, closed)
            rows.append(_first_failure("identity", [w], f"m<={N}"))
        elif name == "plateau":
            for fam, N in ((SeedFamily.FIRST, limits["plateau_first"]),
                           (SeedFamily.SECOND, limits["plateau_other"]),
                           (SeedFamily.THIRD, limits["plateau_other"])):
                ws = (verify_plateau(c) for c in iter_corrections(fam, N))
                rows.append(_first_failure(f"plateau/{fam.value}", ws, f"n<={N}"))
        elif name == "canonical":
            N = limits["canonical"]
            ws = (
                Witness(to_canonical(c) == c.phi, "canonical", c.n)
                for c in iter_corrections(SeedFamily.FIRST, N)
            )
            rows.append(_first_failure("canonical", ws, f"n<={N}"))
        elif name == "leading":
            N = limits["canonical"]
            for fam in SeedFamily:
                ws = (leading_coefficients_check(c) for c in iter_corrections(fam, N))
                rows.append(_first_failure(f"leading/{fam.value}", ws, f"n<={N}"))
        elif name == "idempotency":
            N = limits["idempotency"]
            for fam in (SeedFamily.SECOND, SeedFamily.THIRD):
                ws = (seed_idempotency_check(fam, n) for n in range(1, N + 1))
                rows.append(_first_failure(f"idempotency/{fam.value}", ws, f"n<={N}"))
    extra = {"all_passed": all(r["ok"] for r in rows)}
    if not checks:
        extra["note"] = "no checks run"
    if mutation:
        extra["mutation"] = {"k": mutation[0], "value": mutation[1]}
    return rows, extra


# ------------------------------------------------------------------ output


def render(command: str, family: Optional[SeedFamily], parameters: dict, precision: int,
           rows: list, extra: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "metadata": {
                "command": command,
                "family": family.value if family else None,
                "parameters": parameters,
                "precision": precision,
                **extra,
            },
            "rows": rows,
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    columns = CSV_COLUMNS[command]
    if command == "coeffs" and family is not SeedFamily.FIRST:
        columns = columns[:3]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(v) for k, v in _flatten(command, row).items()})
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def _flatten(command: str, row: dict) -> dict:
    if command != "diverge":
        return row
    d, i = row["delta_l1"], row["I_n"]
    return {
        "n": row["n"],
        "c_n": row["c_n"],
        "X": d["X"],
        "delta_truncated": d["truncated"],
        "delta_truncated_decimal": d["truncated_decimal"],
        "delta_tail_bound": d["tail_bound"],
        "delta_tail_bound_decimal": d["tail_bound_decimal"],
        "delta_lower_decimal": d["lower_decimal"],
        "I_closed_form_decimal": i["closed_form_decimal"],
        "I_truncated": i["truncated"],
        "I_truncated_decimal": i["truncated_decimal"],
        "I_tail_bound": i["tail_bound"],
        "I_tail_bound_decimal": i["tail_bound_decimal"],
    }


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, family=True) -> None:
    if family:
        p.add_argument("--family", default="first", choices=[f.value for f in SeedFamily])
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION,
                   help=f"decimal digits for renderings (>= {MIN_PRECISION})")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--out", default=None, help="output path (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vasyunin", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="recurrence vs closed-form coefficients")
    _common(p)
    p.add_argument("--n-max", "--n", dest="n_max", type=int, required=True)

    p = sub.add_parser("profile", help="values of phi_n on [m, m+1)")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--horizon", type=int, default=None, help="number of unit intervals (default 4n)")

    p = sub.add_parser("canonical", help="canonical floor-sum coefficients of phi_n")
    _common(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("diverge", help="divergence report with rigorous tail bounds")
    _common(p)
    p.add_argument("--n-max", "--n", dest="n_max", type=int, required=True)
    x = p.add_mutually_exclusive_group()
    x.add_argument("--x", type=int, default=None, help="fixed truncation point for every row")
    x.add_argument("--x-policy", choices=["default"], default="default",
                   help="default: X = n * 2^12 per row")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timestamp", action="store_true",
                   help="add a generation timestamp to the metadata (breaks byte-identical reruns)")

    p = sub.add_parser("verify", help="run the exact verification suites")
    _common(p, family=False)
    p.add_argument("--checks", default=",".join(CHECKS),
                   help=f"comma-separated subset of {','.join(CHECKS)}; empty runs nothing")
    p.add_argument("--mutate", default=None, metavar="K=V",
                   help="replace closed-form coefficient c_K by V (negative control)")
    p.add_argument("--n-max", dest="n_max", type=int, default=None,
                   help="cap every sweep at this n (default: full suite limits)")
    return parser


DEFAULT_LIMITS = {
    "duality": 4096,
    "identity": 10_000,
    "plateau_first": 512,
    "plateau_other": 200,
    "canonical": 256,
    "idempotency": 200,
}


def _validate(args) -> None:
    if args.precision < MIN_PRECISION:
        raise UsageError(f"--precision must be >= {MIN_PRECISION}")
    for name in ("n", "n_max"):
        v = getattr(args, name, None)
        if v is None:
            continue
        if v < 1 or v > N_LIMIT:
            raise UsageError(f"--{name.replace('_', '-')} must lie in 1..{N_LIMIT}")
    if args.command == "diverge":
        if args.n_max < 2:
            raise UsageError("diverge needs --n-max >= 2")
        if args.x is not None and not args.n_max <= args.x <= X_LIMIT:
            raise UsageError(f"--x must lie in n_max..{X_LIMIT}")
        if args.x is None and args.n_max << 12 > X_LIMIT:
            raise UsageError("default truncation would exceed the X limit")
    if args.command == "profile" and args.horizon is not None and args.horizon < 0:
        raise UsageError("--horizon must be nonnegative")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        family = SeedFamily.parse(args.family) if hasattr(args, "family") else None
        precision = args.precision
        status = 0
        if args.command == "coeffs":
            params = {"n_max": args.n_max}
            rows, extra = cmd_coeffs(family, args.n_max, precision)
        elif args.command == "profile":
            params = {"n": args.n, "horizon": 4 * args.n if args.horizon is None else args.horizon}
            rows, extra = cmd_profile(family, args.n, args.horizon, precision)
        elif args.command == "canonical":
            params = {"n": args.n}
            rows, extra = cmd_canonical(family, args.n, precision)
        elif args.command == "diverge":
            params = {"n_max": args.n_max, "x": args.x,
                      "x_policy": "fixed" if args.x is not None else args.x_policy}
            rows, extra = cmd_diverge(family, args.n_max, args.x, precision,
                                      workers=args.workers, stamp=args.timestamp)
        else:
            checks = [c.strip() for c in args.checks.split(",") if c.strip()]
            unknown = [c for c in checks if c not in CHECKS]
            if unknown:
                raise UsageError(f"unknown checks: {', '.join(unknown)}")
            limits = dict(DEFAULT_LIMITS)
            if args.n_max is not None:
                limits = {k: min(v, args.n_max) for k, v in limits.items()}
            mutation = _parse_mutation(args.mutate)
            params = {"checks": checks, "limits": limits}
            rows, extra = cmd_verify(checks, mutation, limits)
            status = 0 if extra["all_passed"] else 1
    except UsageError as exc:
        parser.error(str(exc))
    text = render(args.command, family, params, precision, rows, extra, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
