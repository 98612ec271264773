"""Command-line workbench.

Exit codes: 0 success, 1 bad input (DomainError and friends), 2 when two
independent computations disagree or a cache fails its integrity checks.
Errors are reported as a single ``error kind=... exit=... message="..."``
line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any

from . import cache, calibration
from .approgressions import bdh_moment, class_thetas
from .curves import BACKENDS, CurveParams, trace
from .errors import ConsistencyError, DomainError, StavgError
from .intervals import IntervalSpec
from .lconstants import c_f_r, k_r, partial_sum_S
from .numthy import euler_phi, sieve_primes
from .quadforms import h_table, kronecker_class_number
from .satotate import (
    BoxSpec,
    exceptional_count,
    f_measure,
    family_average,
    main_term,
    second_moment,
)
from .verify import Context, run_check, select

DEFAULTS: dict[str, Any] = {
    "x": 1000, "A": 10, "B": 10,
    "alpha": calibration.INTERVAL[0], "beta": calibration.INTERVAL[1],
    "r": 1, "p": None, "a": None, "b": None, "D": None, "n": None, "f": 1,
    "q": None, "Q": 10, "y": None, "U": None, "V": None,
    "cutoff": 100_000, "rel_tol": calibration.EXCEPTION_REL_TOL,
    "backend": "auto", "workers": 1, "cache": None, "out": None,
    "format": "text", "suite": "all", "mode": "forms", "path": "per_curve",
}
# Settings that must not influence output bytes.
_VOLATILE = {"workers", "cache", "out", "format", "config"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _jsonable(v: Any) -> Any:
    # floats go out with 17 significant digits, same as csv
    if isinstance(v, float):
        return float(f"{v:.17g}")
    return v


def render(rows: list[dict[str, Any]], fmt: str, config: dict[str, Any]) -> str:
    if fmt == "text":
        return "".join(" ".join(f"{k}={_fmt(v)}" for k, v in row.items()) + "\n" for row in rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows:
            w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([_fmt(v) for v in row.values()])
        return buf.getvalue()
    if fmt == "json":
        body = {"config": config, "rows": [{k: _jsonable(v) for k, v in r.items()} for r in rows]}
        return json.dumps(body, indent=2) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def _interval(cfg) -> IntervalSpec:
    return IntervalSpec(float(cfg["alpha"]), float(cfg["beta"]))


def _require(cfg, *names):
    for name in names:
        if cfg.get(name) is None:
            raise DomainError(f"--{name} is required")


# ---------------------------------------------------------------------------
# Subcommands; each returns a list of output rows
# ---------------------------------------------------------------------------

def cmd_sieve(cfg):
    table = sieve_primes(int(cfg["x"]))
    if cfg["cache"]:
        d = Path(cfg["cache"])
        d.mkdir(parents=True, exist_ok=True)
        cache.write(d / f"primes_{table.limit}.stav", cache.KIND_PRIMES,
                    cache.primes_to_records(table))
    if cfg["format"] == "text":
        return [{"x": table.limit, "count": len(table)}]
    return [{"p": p, "logp": lp} for p, lp in table]


def cmd_trace(cfg):
    _require(cfg, "p", "a", "b")
    t = trace(CurveParams(int(cfg["a"]), int(cfg["b"])), int(cfg["p"]), cfg["backend"])
    return [{"p": t.p, "a": cfg["a"], "b": cfg["b"], "lambda": t.lam}]


def cmd_classno(cfg):
    _require(cfg, "D")
    D = int(cfg["D"])
    return [{"D": D, "H": kronecker_class_number(D, cfg["mode"])}]


def _table(cfg, x: int):
    return cache.load_or_build_class_numbers(cfg["cache"], x, lambda n: h_table(n, workers=cfg["workers"]))


def cmd_htable(cfg):
    table = _table(cfg, int(cfg["x"]))
    if cfg["format"] == "text":
        return [{"x": table.limit, "entries": len(table)}]
    return [{"p": p, "r": r, "D": r * r - 4 * p, "H": h} for p, r, h in table.entries()]


def cmd_mainterm(cfg):
    x, iv = int(cfg["x"]), _interval(cfg)
    table = _table(cfg, max(x, 5)) if cfg["cache"] else None
    return [{"x": x, "alpha": iv.alpha, "beta": iv.beta, "main_term": main_term(x, iv, table)}]


def _box_row(cfg):
    x, iv = int(cfg["x"]), _interval(cfg)
    box = BoxSpec(int(cfg["A"]), int(cfg["B"]))
    row = {"x": x, "alpha": iv.alpha, "beta": iv.beta, "A": box.A, "B": box.B}
    return box, iv, x, row


def cmd_average(cfg):
    box, iv, x, row = _box_row(cfg)
    row["average"] = family_average(box, iv, x, cfg["path"], cfg["backend"], cfg["workers"])
    row["xF"] = x * f_measure(iv.alpha, iv.beta)
    return [row]


def cmd_variance(cfg):
    box, iv, x, row = _box_row(cfg)
    row["second_moment"] = second_moment(box, iv, x, cfg["backend"], cfg["workers"])
    row["xF"] = x * f_measure(iv.alpha, iv.beta)
    return [row]


def cmd_exceptions(cfg):
    box, iv, x, row = _box_row(cfg)
    rel = float(cfg["rel_tol"])
    row["exceptional_count"] = exceptional_count(box, iv, x, rel, cfg["backend"], cfg["workers"])
    row["rel_tol"] = rel
    return [row]


def cmd_kr(cfg):
    r = int(cfg["r"])
    tp = k_r(r, int(cfg["cutoff"]))
    row = {"r": r, "cutoff": tp.cutoff, "K_r": tp.value, "tail_bound": tp.tail_bound}
    if cfg["U"] is not None and cfg["V"] is not None:
        row["U"], row["V"] = int(cfg["U"]), int(cfg["V"])
        row["S"] = partial_sum_S(row["U"], row["V"], r)
    return [row]


def cmd_cfr(cfg):
    _require(cfg, "n")
    n, f, r = int(cfg["n"]), int(cfg["f"]), int(cfg["r"])
    return [{"n": n, "f": f, "r": r, "c": c_f_r(n, f, r)}]


def cmd_bdh(cfg):
    _require(cfg, "y")
    x, y, Q = float(cfg["x"]), float(cfg["y"]), int(cfg["Q"])
    if cfg["q"] is not None:
        q = int(cfg["q"])
        phi = euler_phi(q)
        return [{"q": q, "a": a, "theta": t, "E": t - y / phi}
                for a, t in class_thetas(x, y, q).items()]
    return [{"Q": Q, "y": y, "moment": bdh_moment(x, y, Q, cfg["workers"])}]


COMMANDS = {
    "sieve": cmd_sieve, "trace": cmd_trace, "classno": cmd_classno,
    "htable": cmd_htable, "mainterm": cmd_mainterm, "average": cmd_average,
    "variance": cmd_variance, "exceptions": cmd_exceptions, "kr": cmd_kr,
    "cfr": cmd_cfr, "bdh": cmd_bdh,
}


def cmd_verify(cfg, out) -> int:
    ctx = Context(cache_dir=cfg["cache"], workers=int(cfg["workers"]))
    results = []
    for n in select(cfg["suite"]):
        results.append(run_check(n, ctx))
        print(results[-1].line(), file=out, flush=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed", file=out)
    for res in results:
        err = getattr(res, "error", None)
        if isinstance(err, ConsistencyError):
            raise err
    if passed != len(results):
        raise _ChecksFailed(f"{len(results) - passed} check(s) failed")
    return 0


class _ChecksFailed(StavgError):
    pass


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("parameters")
    for name, typ in [
        ("x", float), ("A", int), ("B", int), ("alpha", float), ("beta", float),
        ("r", int), ("p", int), ("a", int), ("b", int), ("D", int), ("n", int),
        ("f", int), ("q", int), ("Q", int), ("y", float), ("U", int), ("V", int),
        ("cutoff", int), ("rel_tol", float), ("workers", int),
    ]:
        g.add_argument(f"--{name}", type=typ, default=None)
    g.add_argument("--backend", choices=BACKENDS, default=None)
    g.add_argument("--cache", default=None, help="directory for binary caches")
    g.add_argument("--out", default=None, help="write output here instead of stdout")
    g.add_argument("--format", choices=("text", "csv", "json"), default=None)
    g.add_argument("--config", default=None, help="JSON file of defaults for these flags")
    g.add_argument("--suite", choices=("exact", "statistical", "all"), default=None)
    g.add_argument("--mode", choices=("forms", "lseries"), default=None)
    g.add_argument("--path", choices=("per_curve", "per_residue"), default=None)

    parser = _Parser(prog="stavg", description="Averaged Frobenius-trace workbench")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "verify"]:
        sub.add_parser(name, parents=[common])
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Flags override the config file, which overrides DEFAULTS."""
    file_cfg: dict[str, Any] = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
    cfg = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        cfg[key] = flag if flag is not None else file_cfg.get(key, default)
    if isinstance(cfg["x"], float) and cfg["x"].is_integer():
        cfg["x"] = int(cfg["x"])
    if int(cfg["workers"]) < 1:
        raise DomainError("--workers must be >= 1")
    return cfg


def _emit_error(exc: BaseException, code: int) -> None:
    msg = str(exc).replace('"', "'").replace("\n", " ")
    print(f'error kind={type(exc).__name__} exit={code} message="{msg}"', file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
        if args.command == "verify":
            return cmd_verify(cfg, sys.stdout)
        rows = COMMANDS[args.command](cfg)
        shown = {k: v for k, v in cfg.items() if k not in _VOLATILE}
        text = render(rows, cfg["format"], {"command": args.command, **shown})
        if cfg["out"]:
            Path(cfg["out"]).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except ConsistencyError as exc:
        _emit_error(exc, 2)
        return 2
    except (DomainError, _ChecksFailed, ValueError, ZeroDivisionError) as exc:
        _emit_error(exc, 1)
        return 1
    except StavgError as exc:
        _emit_error(exc, 1)
        return 1


if __name__ == "__main__":
    sys.exit(main())
