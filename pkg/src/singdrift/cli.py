"""Command-line entry point: ``singdrift {check,transform,simulate,localtime,verify}``."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import localtime as lt
from .config import ConfigError, catalog_names, catalog_text, dumps, fmt, parse_config
from .coeffspec import CoefficientError
from .measures import MeasureError
from .simulate import ScenarioError, simulate_timechange, simulate_walk
from .transform import DomainError, SpaceTransform

SEED_ENV = "SINGDRIFT_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(spec: str):
    """A config file path, or the name of a shipped catalog scenario."""
    p = Path(spec)
    if p.is_file():
        return parse_config(p.read_text())
    name = spec.removeprefix("catalog:")
    if name in catalog_names():
        return parse_config(catalog_text(name))
    raise UsageError(f"no config file or catalog scenario named {spec!r}")


def _seed(args, default: int) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    return default


def _write(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_rows(header, rows, out):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
    _write("\n".join(lines) + "\n", out)


def _scenario(args):
    cfg = _load(args.config)
    s = cfg.scenario.replace(seed=_seed(args, cfg.scenario.seed))
    for key in ("dt", "h", "T"):
        v = getattr(args, key, None)
        if v is not None:
            s = s.replace(**{key: v})
    return cfg, s


def _engine(cfg, args):
    eng = getattr(args, "engine", None) or cfg.engine
    return simulate_walk if eng == "walk" else simulate_timechange


# -- subcommands ----------------------------------------------------------------------

def cmd_check(args) -> int:
    cfg = _load(args.config)
    rep = cfg.scenario.verdicts()
    d = {"scenario": cfg.name, **rep.to_dict()}
    _write(dumps(d) + "\n", args.out)
    key = "skew_exists" if cfg.nu.atoms else "symmetric_exists"
    return EXIT_OK if rep.verdicts[key] else EXIT_FAIL


def cmd_transform(args) -> int:
    cfg = _load(args.config)
    t = SpaceTransform(cfg.f)
    xs = np.linspace(args.lo, args.hi, args.n)
    _csv_rows(["x", "G", "H_of_G", "sigma_tilde"], t.dump_rows(cfg.b, xs), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, s = _scenario(args)
    n = args.paths or cfg.n_paths
    sim = _engine(cfg, args)
    if args.dump is not None:
        out = Path(args.dump)
        out.mkdir(parents=True, exist_ok=True)
        for b in sim(s, n, stride=args.stride, workers=args.workers):
            for i in range(b.n):
                rows = zip(b.times.tolist(), b.X[i].tolist(), b.Y[i].tolist(), b.qv[i].tolist())
                _csv_rows(["t", "X", "Y", "qv"], rows, str(out / f"path_{b.start + i:06d}.csv"))
        return EXIT_OK
    from .harness import McStats

    xs, expl, absb = [], [], []
    for b in sim(s, n, terminal_only=True, workers=args.workers, batch_size=5000):
        xs.append(b.X[:, -1])
        expl.append(~np.isnan(b.explosion_time))
        absb.append(~np.isnan(b.absorbed_time))
    x = np.concatenate(xs)
    fin = x[np.isfinite(x)]
    stats = McStats.from_samples(fin) if len(fin) > 1 else None
    d = {"scenario": cfg.name, "seed": s.seed, "n_paths": n, "T": s.T,
         "explosion_fraction": float(np.concatenate(expl).mean()),
         "absorbed_fraction": float(np.concatenate(absb).mean()),
         "X_T": stats.to_dict() if stats else None,
         "X_T_squared_mean": float(np.mean(fin ** 2)) if len(fin) else None}
    _write(dumps(d) + "\n", args.out)
    return EXIT_OK


def _read_path_csv(path: str):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["t", "X", "Y", "qv"]:
        raise UsageError(f"{path}: expected header t,X,Y,qv")
    a = np.array([[float(v) for v in r] for r in rows[1:]])
    return a[:, 0], a[:, 1], a[:, 3]


def cmd_localtime(args) -> int:
    cfg, s = _scenario(args)
    lto = cfg.outputs.get("localtime", {})
    levels = args.levels or lto.get("levels") or [0.0]
    eps = args.eps or lto.get("eps", 0.02)
    t = args.t if args.t is not None else lto.get("t", s.T)
    if args.path_file:
        sources = [_read_path_csv(args.path_file)]
    else:
        sources = _engine(cfg, args)(s, args.paths or cfg.n_paths, workers=args.workers)
    acc = np.zeros((len(levels), 4))
    n = 0
    for src in sources:
        for k, y in enumerate(levels):
            vals = [lt.estimate_Lplus(src, y, t, eps), lt.estimate_Lminus(src, y, t, eps),
                    lt.estimate_Lm(src, cfg.f, y, "right", t, eps),
                    lt.estimate_Lm(src, cfg.f, y, "left", t, eps)]
            acc[k] += [float(np.sum(v)) for v in vals]
        n += np.atleast_2d(src[1] if isinstance(src, tuple) else src.X).shape[0]
    rows = [(float(y), *(acc[k] / n).tolist()) for k, y in enumerate(levels)]
    _csv_rows(["y", "Lp", "Lminus", "Lm_right", "Lm_left"], rows, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .harness import report_json, report_table, run_catalog

    if not args.all and not args.select:
        raise UsageError("verify needs --all or --select")
    selection = "all" if args.all else args.select
    report = run_catalog(selection, seed=_seed(args, 0), scale=args.scale)
    _write(report_json(report), args.out)
    if args.table:
        Path(args.table).write_text(report_table(report))
    if not args.quiet:
        sys.stderr.write(report_table(report))
    return EXIT_OK if report["summary"]["pass"] else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singdrift", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="well-posedness report as JSON")
    c.add_argument("config")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_check)

    t = sub.add_parser("transform", help="dump x, G(x), H(G(x)), sigma~(G(x)) as CSV")
    t.add_argument("action", choices=["dump"])
    t.add_argument("config")
    t.add_argument("--lo", type=float, default=-4.0)
    t.add_argument("--hi", type=float, default=4.0)
    t.add_argument("--n", type=int, default=81)
    t.add_argument("--out")
    t.set_defaults(fn=cmd_transform)

    def sim_opts(q):
        q.add_argument("config")
        q.add_argument("--paths", type=int)
        q.add_argument("--seed", type=int)
        q.add_argument("--engine", choices=["walk", "timechange"])
        q.add_argument("--dt", type=float)
        q.add_argument("--h", type=float)
        q.add_argument("--T", type=float)
        q.add_argument("--workers", type=int, default=1)
        q.add_argument("--out")

    s = sub.add_parser("simulate", help="simulate paths; CSV dumps or aggregated JSON")
    sim_opts(s)
    s.add_argument("--dump", nargs="?", const="paths", metavar="DIR",
                   help="write one CSV per path (t, X, Y, qv) into DIR")
    s.add_argument("--stride", type=int)
    s.set_defaults(fn=cmd_simulate)

    lo = sub.add_parser("localtime", help="local-time estimates as CSV")
    sim_opts(lo)
    lo.add_argument("--levels", type=float, nargs="+")
    lo.add_argument("--eps", type=float)
    lo.add_argument("--t", type=float)
    lo.add_argument("--path-file", help="estimate from one dumped path CSV instead of simulating")
    lo.set_defaults(fn=cmd_localtime)

    v = sub.add_parser("verify", help="run the verification catalog")
    v.add_argument("--all", action="store_true")
    v.add_argument("--select", nargs="+")
    v.add_argument("--seed", type=int)
    v.add_argument("--scale", type=float, default=1.0, help="multiply catalog path counts")
    v.add_argument("--out")
    v.add_argument("--table")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"singdrift: error: {exc}\n")
        return EXIT_USAGE
    except (ScenarioError, MeasureError, CoefficientError, DomainError, NotImplementedError) as exc:
        sys.stderr.write(f"singdrift: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
