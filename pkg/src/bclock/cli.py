"""Command-line front end: exact tables, distributions, probes and simulations.

Every command builds an output record (schema version, command, parameters,
rows, provenance) and writes it as CSV (default) or JSON. Exact values are
written as "p/q" strings.

Exit codes: 0 success, 2 usage error, 3 domain error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import subprocess
import sys
from fractions import Fraction
from math import factorial, lcm
from pathlib import Path

import mpmath

from .bernstein import conjecture1_gap, conjecture2_probe, delta_vector, max_multiplier_c, p_vector_exact
from .circular import circular_conv
from .clock import MultisetSpec, enumerate_joint, joint_recursion, q_matrix, simulate_batch
from .errors import ConvergenceError, DomainError, PrecisionError
from .exact import RationalPolynomial, bernoulli_number, bernoulli_poly, normalized_bernoulli_poly
from .renewal import (
    WrappedGammaParams,
    exponential_poly_roots,
    mean_function,
    wrapped_gamma_bernoulli_expansion,
    wrapped_gamma_density_series,
)
from .sumdist import a_count, cdf_general, complete_count, dist_D

SCHEMA_VERSION = "1"
EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 2, 3, 4


class ExactRatio:
    """A rational printed with a chosen (possibly unreduced) denominator."""

    def __init__(self, value: Fraction, denominator: int):
        num = value * denominator
        if num.denominator != 1:
            raise ValueError(f"{value} is not a multiple of 1/{denominator}")
        self.text = f"{num.numerator}/{denominator}"

    def __str__(self):
        return self.text


def _cell(v, digits):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, digits, strip_zeros=False, min_fixed=-8, max_fixed=8)
    return str(v)


def _json_cell(v, digits):
    if isinstance(v, (bool, int)) or v is None:
        return v
    return _cell(v, digits)


def _git_rev() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def render(record: dict, fmt: str, digits: int) -> str:
    if fmt == "json":
        rec = dict(record)
        rec["rows"] = [{k: _json_cell(v, digits) for k, v in row.items()} for row in record["rows"]]
        rec["parameters"] = {k: _json_cell(v, digits) for k, v in record["parameters"].items()}
        return json.dumps(rec, indent=2) + "\n"
    buf = io.StringIO()
    rows = record["rows"]
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow([_cell(v, digits) for v in row.values()])
    return buf.getvalue()


# argument types ---------------------------------------------------------------


def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return parse


def _spec(text):
    try:
        return MultisetSpec.parse(text)
    except (DomainError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _rational_list(text):
    return [_rational(t.strip()) for t in text.split(",") if t.strip()]


def _int_list(text):
    parse = _int_at_least(1)
    return [parse(t.strip()) for t in text.split(",") if t.strip()]


# commands -----------------------------------------------------------------------


def cmd_bernoulli(a):
    rows = []
    for k in range(a.n + 1):
        rows.append(
            {
                "k": k,
                "B_k": bernoulli_number(k),
                "B_k(x)": str(bernoulli_poly(k)),
                "b_k(x)": str(normalized_bernoulli_poly(k)),
            }
        )
    return {"n": a.n}, rows


def cmd_convolve(a):
    f, g = RationalPolynomial(a.f), RationalPolynomial(a.g)
    h = circular_conv(f, g)
    rows = [{"power": i, "coefficient": c} for i, c in enumerate(h.coeffs)]
    return {"f": str(f), "g": str(g), "result": str(h)}, rows


def _vector_row(values, prefix, den):
    return {f"{prefix}_{k}": ExactRatio(v, den) for k, v in enumerate(values, start=1)}


def _common_denominator(n, values):
    # (2n)!/2^n counts the pair permutations; widen it only if a value needs it
    return lcm(factorial(2 * n) // 2**n, *(v.denominator for v in values))


def cmd_pvec(a):
    values = p_vector_exact(a.n).values
    den = _common_denominator(a.n, values)
    return {"n": a.n, "denominator": den}, [_vector_row(values, "p", den)]


def cmd_delta(a):
    values = delta_vector(a.n).values
    den = _common_denominator(a.n, values)
    return {"n": a.n, "denominator": den}, [_vector_row(values, "delta", den)]


def cmd_qmatrix(a):
    Q = q_matrix(a.n)
    rows = []
    for x, row in enumerate(Q.entries, start=1):
        rec = {"x": x}
        rec.update({f"y_{y}": q for y, q in enumerate(row, start=1)})
        rows.append(rec)
    return {"n": a.n, "normalizer": Q.normalizer}, rows


def cmd_joint(a):
    if a.method == "enum":
        table = enumerate_joint(MultisetSpec.pairs(a.n), workers=a.parallel)
    else:
        table = joint_recursion(a.n)
    rows = []
    for i, row in enumerate(table.counts, start=1):
        rec = {"i": i}
        rec.update({f"d_{d}": c for d, c in enumerate(row)})
        rows.append(rec)
    return {"n": a.n, "method": a.method, "total": table.total()}, rows


def cmd_cdf(a):
    rows = [{"x": Fraction(x), "cdf": cdf_general(a.spec, x)} for x in a.at]
    return {"spec": str(a.spec)}, rows


def cmd_dcount(a):
    scale = factorial(2 * a.n) // 2**a.n
    counts = [p * scale for p in dist_D(a.n)]
    return {"n": a.n, "total": scale}, [{f"d_{d}": int(c) for d, c in enumerate(counts)}]


def cmd_acount(a):
    return {"n": a.n}, [{"n": a.n, "a": a_count(a.n)}]


def cmd_hk_count(a):
    total = a.spec.count()
    c = complete_count(a.spec)
    return {"spec": str(a.spec)}, [{"count": c, "permutations": total, "probability": Fraction(c, total)}]


def cmd_simulate(a):
    spec = a.spec
    batch = simulate_batch(spec, a.seed, a.trials, workers=a.parallel)
    rows = []
    for name, counts, offset in (
        ("I", batch.index_counts(spec.M), 1),
        ("D", batch.laps_counts(spec.n), 0),
        ("L", batch.run_length_counts(spec.n), 1),
    ):
        for v, c in enumerate(counts, start=offset):
            rows.append({"statistic": name, "value": v, "count": int(c), "frequency": float(c) / a.trials})
    params = {"spec": str(spec), "trials": a.trials, "redraws": batch.redraws}
    return params, rows


def cmd_mean_fn(a):
    roots = exponential_poly_roots(a.m, a.precision_bits)
    rows = []
    for k in range(a.grid + 1):
        t = Fraction(k, a.grid)
        rows.append({"t": t, "M": mean_function(a.m, t, roots)})
    return {"m": a.m, "grid": a.grid}, rows


def cmd_wrapped(a):
    rows = []
    for k in range(a.grid):
        u = Fraction(k, a.grid)
        p = WrappedGammaParams(a.r, a.lam, u)
        if a.method == "series":
            res = wrapped_gamma_density_series(p, a.tol, a.precision_bits)
        else:
            res = wrapped_gamma_bernoulli_expansion(p, a.terms, a.precision_bits)
        rows.append({"u": u, "density": res.value, "error_bound": res.error_bound, "terms": res.terms})
    return {"r": a.r, "lambda": a.lam, "method": a.method}, rows


def cmd_conjecture1(a):
    rows = []
    prev = None
    for n in a.n_list:
        gap, k = conjecture1_gap(n, a.precision_bits, a.grid, with_argmax=True)
        rows.append({"n": n, "gap": gap, "argmax_k": k, "decreasing": prev is None or gap < prev})
        prev = gap
    verdict = all(r["decreasing"] for r in rows)
    return {"grid": a.grid, "verdict_strictly_decreasing": verdict}, rows


def cmd_conjecture2(a):
    rows = []
    for rec in conjecture2_probe(a.max_n):
        c_n = rec["c_n"]
        rows.append(
            {
                "n": rec["n"],
                "min_coefficient": rec["min_coefficient"],
                "c_n_density": c_n,
                "c_n_classical": max_multiplier_c(rec["n"], "classical"),
                "two_pow_n": rec["two_pow_n"],
                "holds": rec["holds"],
            }
        )
    return {"max_n": a.max_n, "verdict_holds": all(r["holds"] for r in rows)}, rows


# parser -------------------------------------------------------------------------


def _default_precision():
    raw = os.environ.get("BCLOCK_PRECISION_BITS")
    return int(raw) if raw else None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--precision-bits", type=_int_at_least(53), default=_default_precision())
    common.add_argument("--seed", type=_int_at_least(0), default=0)
    common.add_argument("--parallel", type=_int_at_least(1), default=1, help="worker cap")

    parser = argparse.ArgumentParser(prog="bclock", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("bernoulli", cmd_bernoulli, "Bernoulli numbers and polynomials up to n")
    p.add_argument("n", type=_int_at_least(0))

    p = add("convolve", cmd_convolve, "circular convolution of two polynomials")
    p.add_argument("--f", type=_rational_list, required=True, help="coefficients c0,c1,...")
    p.add_argument("--g", type=_rational_list, required=True, help="coefficients c0,c1,...")

    for name, func, text in (
        ("pvec", cmd_pvec, "exact law of I_n"),
        ("delta", cmd_delta, "deviation of I_n from uniform"),
        ("dcount", cmd_dcount, "counts of D_n (one row of the lap table)"),
        ("acount", cmd_acount, "number of lap-free permutations"),
    ):
        p = add(name, func, text)
        p.add_argument("n", type=_int_at_least(1))

    p = add("qmatrix", cmd_qmatrix, "integer transition counts Q_n")
    p.add_argument("n", type=_int_at_least(2))

    p = add("joint", cmd_joint, "joint counts of (I_n, D_n)")
    p.add_argument("n", type=_int_at_least(1))
    p.add_argument("--method", choices=("enum", "recursion"), default="recursion")

    p = add("cdf", cmd_cdf, "exact CDF of a sum of beta(1, m_i)")
    p.add_argument("--spec", type=_spec, required=True)
    p.add_argument("--at", type=_rational_list, required=True, help="points x, comma separated")

    p = add("hk-count", cmd_hk_count, "permutations containing 1..n in order")
    p.add_argument("--spec", type=_spec, required=True)

    p = add("simulate", cmd_simulate, "Monte Carlo clock")
    p.add_argument("--spec", type=_spec, required=True)
    p.add_argument("--trials", type=_int_at_least(1), required=True)

    p = add("mean-fn", cmd_mean_fn, "renewal mean function on a grid of [0, 1]")
    p.add_argument("m", type=_int_at_least(1))
    p.add_argument("--grid", type=_int_at_least(1), default=10)

    p = add("wrapped", cmd_wrapped, "wrapped gamma density on a grid of [0, 1)")
    p.add_argument("--r", type=_int_at_least(1), required=True)
    p.add_argument("--lambda", dest="lam", type=_rational, required=True)
    p.add_argument("--method", choices=("series", "expansion"), default="series")
    p.add_argument("--grid", type=_int_at_least(1), default=16)
    p.add_argument("--terms", type=_int_at_least(1), default=60)
    p.add_argument("--tol", type=float, default=1e-25)

    p = add("conjecture1", cmd_conjecture1, "gap between delta and b_n")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--grid", choices=("2n-1", "2n"), default="2n-1")

    p = add("conjecture2", cmd_conjecture2, "Bernstein positivity of 1 - 2^n b_n")
    p.add_argument("--max-n", type=_int_at_least(1), required=True)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if a.precision_bits is None:
        a.precision_bits = 256 if a.command == "conjecture1" else 128
    digits = max(6, int(a.precision_bits * 0.30103) - 4)
    try:
        with mpmath.workprec(a.precision_bits):
            params, rows = a.func(a)
            record = {
                "schema_version": SCHEMA_VERSION,
                "command": a.command,
                "parameters": params,
                "rows": rows,
                "provenance": {"seed": a.seed, "precision_bits": a.precision_bits, "git_rev": _git_rev()},
            }
            text = render(record, a.format, digits)
    except DomainError as exc:
        print(f"bclock: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, PrecisionError) as exc:
        print(f"bclock: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
