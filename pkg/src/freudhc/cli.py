"""Command-line entry point: experiment grids with reproducible CSV/JSON artifacts.

Subcommands: recurrence, quadrature, approx, rates, widths, probe, run.
Every CSV starts with '#'-prefixed comment lines carrying the resolved
parameters and the library version; identical configs and seeds produce
byte-identical files (timing columns are zeroed unless --timing is given).
Exit codes: 0 success, 1 numerical failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import analysis as an
from . import spectral as sp
from . import widths as wd
from .corpus import load_corpus
from .errors import FreudhcError, InvalidParamsError, NonConvergenceError
from .orthopoly import build_table, gauss_rule
from .weights import WeightParams, params_from_json, params_to_json, rate_exponents

_EXIT_OK = 0
_EXIT_NUMERICAL = 1
_EXIT_USAGE = 2


def _env_int(name: str, fallback):
    raw = os.environ.get(f"FREUDHC_{name}")
    return fallback if raw is None else int(raw)


def _header_lines(params: WeightParams | None, extra: dict) -> list[str]:
    lines = [f"# freudhc {__version__}"]
    if params is not None:
        lines.append(f"# params: {json.dumps(params_to_json(params), sort_keys=True)}")
    for key, value in extra.items():
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    return lines


def _write_csv(path, params, extra, columns, rows) -> None:
    buf = io.StringIO()
    for line in _header_lines(params, extra):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            [repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
        )
    data = buf.getvalue()
    if path == "-":
        sys.stdout.write(data)
    else:
        with open(path, "w") as fh:
            fh.write(data)


def _params_from_args(args) -> WeightParams:
    return WeightParams(
        lam=args.lam,
        a=args.a,
        b=args.b,
        d=getattr(args, "dim", 1),
        r=getattr(args, "r", 1),
        p=_parse_index(getattr(args, "p", "2")),
        q=_parse_index(getattr(args, "q", "2")),
    )


def _parse_index(raw) -> float:
    if isinstance(raw, (int, float)):
        return float(raw)
    return math.inf if raw.lower() == "inf" else float(raw)


def _parse_grid(raw: str) -> list[float]:
    """Parse '2..10' (inclusive integer range) or a comma list like '2,4,8'."""
    raw = raw.strip()
    if ".." in raw:
        lo, hi = raw.split("..")
        return [float(v) for v in range(int(lo), int(hi) + 1)]
    return [float(tok) for tok in raw.split(",") if tok]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_recurrence(args) -> int:
    params = _params_from_args(args)
    table = build_table(params, args.size)
    scale = (2.0 * params.a) ** (2.0 / params.lam)
    rows = []
    residuals = {}
    if params.lam == 4:
        bt = math.sqrt(2.0 * table.a) * table.beta
        for n in range(1, table.size):
            left = bt[n - 1] if n > 1 else 0.0
            residuals[n] = abs(4.0 * bt[n] * (left + bt[n] + bt[n + 1]) - n)
    for k, beta in enumerate(table.beta):
        rows.append(
            (k, float(beta), float(scale * beta), residuals.get(k, ""))
        )
    _write_csv(
        args.out,
        params,
        {"subcommand": "recurrence", "size": args.size},
        ("k", "beta_k", "beta_tilde_k", "string_residual_if_lambda4"),
        rows,
    )
    return _EXIT_OK


def _cmd_quadrature(args) -> int:
    params = _params_from_args(args)
    table = build_table(params, max(args.nodes, 1))
    rule = gauss_rule(table, args.nodes)
    rows = [(float(x), float(w)) for x, w in zip(rule.nodes, rule.weights)]
    _write_csv(
        args.out,
        params,
        {"subcommand": "quadrature", "nodes": args.nodes, "degree_exact": rule.degree_exact},
        ("node", "weight"),
        rows,
    )
    return _EXIT_OK


def _approx_rows(params, family, xi_list, corpus_path, jobs, timing, rtol=1e-8):
    members = [m for m in load_corpus(corpus_path) if m.dim == params.d]
    if not members:
        raise InvalidParamsError(f"corpus has no members of dimension {params.d}")
    ex = rate_exponents(params)
    grid = [(m, xi) for m in members for xi in xi_list]

    def one(task):
        member, xi = task
        if family in (sp.VP, sp.FOURIER):
            xi = int(xi)
        t0 = time.perf_counter()
        basis = _shared_basis(params)
        err = an.approx_error(
            basis, member, family, xi, q=params.q, r_lambda=ex.r_lambda, rtol=rtol
        )
        ms = (time.perf_counter() - t0) * 1000.0
        rank = sp.operator_rank(family, xi, params.d, ex.r_lambda)
        return (member.label, family, float(xi), rank, float(err), ms if timing else 0.0)

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(t) for t in grid]
    return results


_BASIS_CACHE: dict = {}


def _shared_basis(params: WeightParams) -> an.Basis:
    key = (params.lam, params.a, params.b)
    if key not in _BASIS_CACHE:
        _BASIS_CACHE[key] = an.Basis.build(
            WeightParams(params.lam, params.a, params.b), 300
        )
    return _BASIS_CACHE[key]


def _cmd_approx(args) -> int:
    params = _params_from_args(args)
    xi_list = _parse_grid(args.xi_list)
    jobs = _env_int("JOBS", args.jobs)
    rows = _approx_rows(params, args.family, xi_list, args.corpus, jobs, args.timing)
    _write_csv(
        args.out,
        params,
        {"subcommand": "approx", "family": args.family, "xi_list": xi_list},
        ("function_id", "family", "xi", "rank", "error", "runtime_ms"),
        rows,
    )
    return _EXIT_OK


def _cmd_rates(args) -> int:
    params = None
    family = None
    per_function: dict[str, list] = {}
    with open(args.table) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                if line.startswith("# params:"):
                    params = params_from_json(json.loads(line.split(":", 1)[1]))
                elif line.startswith("# family:"):
                    family = json.loads(line.split(":", 1)[1])
                continue
            if not line or line.startswith("function_id"):
                continue
            fid, fam, _xi, rank, err, _ms = line.split(",")
            family = family or fam
            per_function.setdefault(fid, []).append((int(rank), float(err)))
    if params is None or not per_function:
        raise InvalidParamsError("input table lacks a parameter header or data rows")
    th_alpha, th_gamma = an.theory_exponents(params, family)
    fits = {}
    for fid, samples in per_function.items():
        samples = [(n, e) for n, e in sorted(samples) if e > 0 and n >= 2]
        if len(samples) < 4:
            # exactly reproduced members leave nothing to fit
            fits[fid] = {"alpha": None, "gamma": None, "residual": None}
            continue
        try:
            fit = an.fit_rate(samples)
        except InvalidParamsError:
            fits[fid] = {"alpha": None, "gamma": None, "residual": None}
            continue
        fits[fid] = {"alpha": fit.alpha, "gamma": fit.gamma, "residual": fit.residual}
    if len(fits) == 1:
        payload = next(iter(fits.values())) | {
            "theory_alpha": th_alpha,
            "theory_gamma": th_gamma,
        }
    else:
        payload = {
            "per_function": fits,
            "theory_alpha": th_alpha,
            "theory_gamma": th_gamma,
        }
    text = json.dumps(payload, indent=1, sort_keys=True)
    if args.out == "-":
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return _EXIT_OK


def _cmd_widths(args) -> int:
    table = wd.exact_diagonal_widths(args.dim, args.r_lambda, args.n_max)
    rows = [(r.n, r.d_n, r.theory, r.ratio) for r in table.rows]
    _write_csv(
        args.out,
        None,
        {"subcommand": "widths", "dim": args.dim, "r_lambda": args.r_lambda},
        ("n", "d_n", "theory", "ratio"),
        rows,
    )
    return _EXIT_OK


def _cmd_probe(args) -> int:
    params = _params_from_args(args)
    degrees = [int(v) for v in _parse_grid(args.degrees)]
    basis = an.Basis(params, build_table(params, max(degrees) + 2))
    seed = _env_int("SEED", args.seed)
    rows = an.inequality_probe(
        basis, args.kind, degrees, args.trials, seed, q=params.q
    )
    _write_csv(
        args.out,
        params,
        {"subcommand": "probe", "kind": args.kind, "trials": args.trials, "seed": seed},
        ("degree", "observed_constant"),
        rows,
    )
    return _EXIT_OK


def _validate_run_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise InvalidParamsError("config must be a JSON object")
    required = {"weight", "family", "out"}
    missing = required - set(cfg)
    if missing:
        raise InvalidParamsError(f"config misses keys: {sorted(missing)}")
    if cfg["family"] not in sp.FAMILIES:
        raise InvalidParamsError(f"unknown family {cfg['family']!r}")
    if ("xi_list" in cfg) == ("n_list" in cfg):
        raise InvalidParamsError("config needs exactly one of 'xi_list' or 'n_list'")
    params = params_from_json(cfg["weight"])
    if "xi_list" in cfg:
        xi_list = cfg["xi_list"]
        if isinstance(xi_list, str):
            xi_list = _parse_grid(xi_list)
        xi_list = [float(x) for x in xi_list]
    else:
        # rank budgets map to the largest admissible operator parameter
        n_list = cfg["n_list"]
        if isinstance(n_list, str):
            n_list = _parse_grid(n_list)
        r_lambda = rate_exponents(params).r_lambda
        xi_list = [
            float(sp.largest_cross_parameter(int(n), cfg["family"], params.d, r_lambda))
            for n in n_list
        ]
    return {
        "params": params,
        "family": cfg["family"],
        "xi_list": xi_list,
        "corpus": cfg.get("corpus"),
        "seed": int(cfg.get("seed", 0)),
        "out": cfg["out"],
        "rates_out": cfg.get("rates_out"),
        "jobs": int(cfg.get("jobs", 1)),
        "timing": bool(cfg.get("timing", False)),
        "rtol": float(cfg.get("rtol", 1e-8)),
    }


def _cmd_run(args) -> int:
    if args.check is not None:
        from . import acceptance

        with open(args.check) as fh:
            spec = json.load(fh)
        names = spec.get("criteria")
        results = acceptance.run_criteria(names)
        ok = True
        for res in results:
            print(res.line())
            ok = ok and res.passed
        return _EXIT_OK if ok else _EXIT_NUMERICAL

    with open(args.config) as fh:
        cfg = _validate_run_config(json.load(fh))
    jobs = _env_int("JOBS", args.jobs if args.jobs else cfg["jobs"])
    corpus = None if cfg["corpus"] in (None, "default") else cfg["corpus"]
    rows = _approx_rows(
        cfg["params"], cfg["family"], cfg["xi_list"], corpus, jobs, cfg["timing"],
        rtol=cfg["rtol"],
    )
    _write_csv(
        cfg["out"],
        cfg["params"],
        {"subcommand": "run", "family": cfg["family"], "xi_list": cfg["xi_list"],
         "seed": _env_int("SEED", cfg["seed"])},
        ("function_id", "family", "xi", "rank", "error", "runtime_ms"),
        rows,
    )
    if cfg["rates_out"]:
        ns = argparse.Namespace(table=cfg["out"], out=cfg["rates_out"])
        _cmd_rates(ns)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_weight_flags(p, dim=False, pq=False, r=False):
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, default=0.0)
    if dim:
        p.add_argument("--dim", type=int, default=1)
    if r:
        p.add_argument("--r", type=int, default=1)
    if pq:
        p.add_argument("--p", default="2")
        p.add_argument("--q", default="2")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="freudhc",
        description="Weighted hyperbolic-cross polynomial approximation experiments.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recurrence", help="emit recurrence coefficients as CSV")
    _add_weight_flags(p)
    p.add_argument("--size", type=int, default=100)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_recurrence)

    p = sub.add_parser("quadrature", help="emit a Gauss rule as CSV")
    _add_weight_flags(p)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_quadrature)

    p = sub.add_parser("approx", help="cross-operator error table over the corpus")
    _add_weight_flags(p, dim=True, pq=True, r=True)
    p.add_argument("--family", choices=sp.FAMILIES, required=True)
    p.add_argument("--xi-list", required=True)
    p.add_argument("--corpus", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_approx)

    p = sub.add_parser("rates", help="fit convergence exponents from an error table")
    p.add_argument("--table", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_rates)

    p = sub.add_parser("widths", help="exact diagonal width table")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--r-lambda", dest="r_lambda", type=float, required=True)
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_widths)

    p = sub.add_parser("probe", help="observed constants of the weighted inequalities")
    _add_weight_flags(p, dim=True, pq=True)
    p.add_argument("--kind", choices=("bernstein", "nikolskii", "lq_lp_sum"), required=True)
    p.add_argument("--degrees", required=True)
    p.add_argument("--trials", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_probe)

    p = sub.add_parser("run", help="execute a config-driven experiment or checks")
    p.add_argument("--config")
    p.add_argument("--check", default=None, help="acceptance spec JSON; exit 1 on failure")
    p.add_argument("--jobs", type=int, default=0)
    p.set_defaults(fn=_cmd_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else _EXIT_OK
    try:
        if args.command == "run" and args.check is None and not args.config:
            raise InvalidParamsError("run needs --config or --check")
        return args.fn(args)
    except (InvalidParamsError, json.JSONDecodeError, FileNotFoundError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (NonConvergenceError, FreudhcError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
