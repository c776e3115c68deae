"""Command-line front end: ``genrmt {eval,table,sample,check,list}``.

Exit codes: 0 success, 1 failed checks, 2 usage or configuration errors.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import densities as D
from . import verify as V
from .densities import Envelope
from .rng import RngHandle, default_seed, SEED_ENV

MAX_TABLE_RANK = 3

# shorthand kind -> (ensemble kind, implied fields, default envelope)
ALIASES = {
    "gaussian": ("linear", {"family": "gl"}, Envelope.gaussian_trace(0.5)),
    "chiral": ("linear", {"family": "indefinite"}, Envelope.gaussian_hs(0.5)),
    "circular": ("compact", {"family": "gl"}, None),
    "jacobi": ("compact", {"family": "indefinite"}, None),
    "haar": ("group_compact", {"group": "u"}, None),
    "algebra": ("algebra_compact", {"group": "u"}, Envelope.gaussian_hs(0.5)),
    "symspace": ("sym_space_compact_delta", {"family": "indefinite"}, None),
}

PARAM_SCHEMA = {
    "linear": "family=gl|indefinite n beta [m]",
    "nonlinear_noncompact": "family=gl|indefinite n beta [m]",
    "compact": "family=gl|indefinite n beta [m]",
    "sym_space_noncompact_delta": "family=gl|indefinite n beta [m]",
    "sym_space_compact_delta": "family=gl|indefinite n beta [m]",
    "group_compact": "group=u|so_odd|sp|so_even n",
    "algebra_compact": "group=u|so_odd|sp|so_even n",
    "group_complex": "group=sl|sp|so_even|so_odd n",
    "algebra_complex": "group=sl|sp|so_even|so_odd n",
    "pseudo_algebra_gl": "n j",
    "pseudo_group_gl": "n j",
    "sl2r_alg1": "-",
    "sl2r_alg2": "-",
    "sl2r_grp1": "-",
    "sl2r_grp2": "-",
}

SAMPLER_NOTE = {
    "linear": "yes (gl: Gaussian beta-ensemble; indefinite: chiral)",
    "compact": "yes (gl only: circular ensembles)",
    "sym_space_compact_delta": "yes (indefinite only: Grassmannian pushforward)",
    "group_compact": "yes (Haar)",
    "algebra_compact": "yes (Gaussian algebra, gaussian_hs envelope)",
}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# formatting


def fmt_float(v: float) -> str:
    return V._fmt(float(v))


def fmt_coord(v) -> str:
    if isinstance(v, complex) or np.iscomplexobj(v):
        z = complex(v)
        return f"{fmt_float(z.real)}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{fmt_float(abs(z.imag))}j"
    return fmt_float(v)


def json_float(v: float):
    v = float(v)
    return float(format(v, ".17g")) if math.isfinite(v) else fmt_float(v)


def json_coord(v):
    if np.iscomplexobj(v):
        return [json_float(np.real(v)), json_float(np.imag(v))]
    return json_float(v)


def _write(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# ensemble options


def _ensemble_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("ensemble")
    g.add_argument("--kind", required=True, help=f"one of {', '.join(D.KINDS)} or alias {', '.join(ALIASES)}")
    g.add_argument("--family", choices=("gl", "indefinite"))
    g.add_argument("--group")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--beta", type=int)
    g.add_argument("--j", type=int)
    g.add_argument("--envelope", choices=("uniform", "gaussian_trace", "gaussian_hs"))
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--c", type=float)


def _auto_envelope(kind: str, family: Optional[str]) -> str:
    if kind == "linear":
        return "gaussian_trace" if family == "gl" else "gaussian_hs"
    if kind == "algebra_compact":
        return "gaussian_hs"
    return "uniform"


def build_spec(args) -> tuple[D.EnsembleSpec, bool]:
    """Ensemble spec from parsed flags; second value says whether the kind was the Jacobi alias."""
    kind, implied, env = args.kind, {}, None
    if kind in ALIASES:
        kind, implied, env = ALIASES[kind]
    elif kind not in D.KINDS:
        raise UsageError(f"unknown kind {args.kind!r}")
    family = args.family or implied.get("family")
    group = args.group or implied.get("group")
    if args.envelope or args.a is not None or env is None:
        env_kind = args.envelope or (env.kind if env else _auto_envelope(kind, family))
        a = args.a if args.a is not None else (0.5 if env_kind != "uniform" else None)
        env = V.envelope_from_fields(env_kind, a, args.b, args.c)
    spec = D.make_spec(kind, n=args.n, m=args.m, beta=args.beta, j=args.j, family=family, group=group, envelope=env)
    return spec, args.kind == "jacobi"


def _form(args, jacobi: bool) -> str:
    return args.form or ("closed" if jacobi else "engine")


def _parse_values(text: str, complex_ok: bool) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            raise UsageError(f"empty coordinate in {text!r}")
        try:
            out.append(complex(tok.replace("i", "j")) if complex_ok else float(tok))
        except ValueError:
            raise UsageError(f"cannot parse coordinate {tok!r}") from None
    return out


# ---------------------------------------------------------------------------
# commands


def _density_rows(spec, pts: np.ndarray, form: str, fmt: str) -> str:
    lj, lp = D.log_density(spec, pts, form)
    lj = np.atleast_1d(np.asarray(lj, dtype=float))
    lp = np.atleast_1d(np.asarray(lp, dtype=float))
    n = pts.shape[-1]
    lines = []
    if fmt == "csv":
        lines.append(",".join([f"x{k + 1}" for k in range(n)] + ["log_j", "log_p", "log_jp"]))
    for row, a, b in zip(pts, lj, lp):
        if fmt == "csv":
            lines.append(",".join([fmt_coord(v) for v in row] + [fmt_float(a), fmt_float(b), fmt_float(a + b)]))
        else:
            rec = {"coords": [json_coord(v) for v in row], "log_j": json_float(a), "log_p": json_float(b), "log_jp": json_float(a + b)}
            lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


def cmd_eval(args) -> int:
    spec, jacobi = build_spec(args)
    complex_chart = spec.chart == "complex"
    point = np.asarray(_parse_values(args.point, complex_chart))
    if point.shape[0] != spec.rank:
        raise UsageError(f"--point has {point.shape[0]} coordinates, {spec.kind} needs {spec.rank}")
    _write(_density_rows(spec, point[None, :], _form(args, jacobi), args.format), args.out)
    return 0


def _bounds(text: Optional[str], rank: int, default: float) -> np.ndarray:
    if text is None:
        return np.full(rank, default)
    vals = _parse_values(text, False)
    if len(vals) == 1:
        vals = vals * rank
    if len(vals) != rank:
        raise UsageError(f"bounds need 1 or {rank} values")
    return np.asarray(vals, dtype=float)


def grid_points(lo: np.ndarray, hi: np.ndarray, grid: int) -> np.ndarray:
    """Tensor grid with rows in lexicographic index order; ``grid=1`` is the midpoint."""
    if grid < 1:
        raise UsageError("--grid must be >= 1")
    axes = [np.array([(a + b) / 2]) if grid == 1 else np.linspace(a, b, grid) for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def cmd_table(args) -> int:
    spec, jacobi = build_spec(args)
    if spec.rank > MAX_TABLE_RANK:
        raise UsageError(f"table supports rank <= {MAX_TABLE_RANK}, got {spec.rank}")
    if spec.chart == "complex":
        raise UsageError("table needs a real chart; use eval for complex kinds")
    form = _form(args, jacobi)
    half = math.pi if spec.chart == "angle" and form == "engine" else (1.0 if jacobi else 3.0)
    lo = _bounds(args.lo, spec.rank, -half)
    hi = _bounds(args.hi, spec.rank, half)
    if np.any(lo > hi):
        raise UsageError("--lo must not exceed --hi")
    _write(_density_rows(spec, grid_points(lo, hi, args.grid), form, args.format), args.out)
    return 0


def cmd_sample(args) -> int:
    spec, _ = build_spec(args)
    if not V.has_sampler(spec):
        raise UsageError(
            f"no matrix sampler for kind {spec.kind} with these parameters; "
            "samplers exist for Gaussian, chiral, circular, symmetric-space, Haar and algebra ensembles"
        )
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    seed = args.seed if args.seed is not None else default_seed()
    coords = V.coords_stream(spec, RngHandle(seed, 0), args.count, args.jobs)
    n = spec.rank
    if args.format == "csv":
        lines = [f"# seed={seed} kind={args.kind} n={spec.params.n} count={args.count}"]
        lines.append(",".join(f"x{k + 1}" for k in range(n)))
        lines += [",".join(fmt_float(v) for v in row) for row in coords]
    else:
        lines = [json.dumps({"seed": seed, "kind": args.kind, "n": spec.params.n, "count": args.count})]
        lines += [json.dumps({"coords": [json_float(v) for v in row]}) for row in coords]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_check(args) -> int:
    if args.suite == "default":
        suite = V.default_suite()
    else:
        try:
            with open(args.suite, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read suite file: {exc}") from None
        suite = V.load_suite(text)
    seed = args.seed if args.seed is not None else default_seed()
    reports = V.run_suite(suite, seed=seed, jobs=args.jobs)
    _write(V.format_reports(reports, args.format), args.out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_list(args) -> int:
    lines = []
    for kind in D.KINDS:
        sampler = SAMPLER_NOTE.get(kind, "no")
        if args.format == "jsonl":
            rec = {"kind": kind, "chart": D.CHARTS[kind], "params": PARAM_SCHEMA[kind], "sampler": sampler.split()[0]}
            lines.append(json.dumps(rec))
        else:
            lines.append(f"{kind}  chart: {D.CHARTS[kind]}  params: {PARAM_SCHEMA[kind]}  sampler: {sampler}")
    if args.format != "jsonl":
        lines.append("aliases: " + ", ".join(f"{a} -> {k}" for a, (k, _, _) in ALIASES.items()))
    _write("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genrmt", description="Joint eigenvalue densities, samplers and verification.")
    sub = p.add_subparsers(dest="command", required=True)

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", help="output file (default: standard output)")

    io_fmt = argparse.ArgumentParser(add_help=False)
    io_fmt.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=lambda s: int(s, 0), help=f"default: ${SEED_ENV} or a fixed constant")
    seeded.add_argument("--jobs", type=int, default=1)

    e = sub.add_parser("eval", parents=[out, io_fmt], help="log J and log p at one point")
    _ensemble_args(e)
    e.add_argument("--point", required=True, help="comma-separated coordinates (complex allowed for complex kinds)")
    e.add_argument("--form", choices=("engine", "closed"))
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("table", parents=[out, io_fmt], help="log J and log p on a tensor grid")
    _ensemble_args(t)
    t.add_argument("--grid", type=int, default=11)
    t.add_argument("--lo")
    t.add_argument("--hi")
    t.add_argument("--form", choices=("engine", "closed"))
    t.set_defaults(func=cmd_table)

    s = sub.add_parser("sample", parents=[out, io_fmt, seeded], help="folded eigenvalue coordinates of matrix draws")
    _ensemble_args(s)
    s.add_argument("--count", type=int, default=1000)
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("check", parents=[out, io_fmt, seeded], help="run a verification suite")
    c.add_argument("--suite", default="default", help="'default' or a path to an INI suite file")
    c.set_defaults(func=cmd_check)

    ls = sub.add_parser("list", parents=[out], help="catalog of ensemble kinds")
    ls.add_argument("--format", choices=("text", "jsonl"), default="text")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("genrmt: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"genrmt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
