"""Command line entry point: ``fermikin <command> [options]``.

Exit status is 0 on success, 2 when an input fails validation and 3 when a
computed result breaks a conservation law.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__, bosonization, collision, evolution, mollifier, states
from ._reduce import default_jobs
from .config import RunConfig, meta
from .lattice import LatticeContext
from .potential import PotentialError
from .states import Distribution, DistributionError, SlaterError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BREACH = 3
RESIDUAL_LIMIT = 1e-10


class InvariantBreach(RuntimeError):
    pass


# output helpers


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(str(int(c)) for c in v)
    return str(v)


def _csv_text(info: dict, header: list, rows, footer: list | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# fermikin {info['version']} config {info['config_hash']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    for line in footer or []:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _ints(text: str) -> tuple:
    return tuple(int(c) for c in text.split(","))


def _floats(text: str) -> list:
    return [float(c) for c in text.split(",")]


# configuration


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    lat = dict(cfg.lattice)
    if args.d is not None:
        lat["d"] = args.d
    if args.pf is not None:
        lat["p_F"] = args.pf
    if args.r is not None:
        lat["r"] = args.r
    cfg.lattice = lat
    if args.amplitude is not None:
        cfg.potential = {"kind": "indicator", "amplitude": args.amplitude}
    if args.kronecker_convention is not None:
        cfg.kronecker = args.kronecker_convention
    if args.normalization is not None:
        cfg.normalization = args.normalization
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def _load_state(path: str, ctx: LatticeContext) -> Distribution:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    lat = doc.get("lattice")
    if lat is not None and LatticeContext.from_dict(lat) != ctx:
        raise ValueError(f"state was generated for lattice {lat}, not {ctx.to_dict()}")
    if "state" in doc:
        data = states.SlaterData.from_dict(doc["state"])
        return states.make_slater(ctx, data.H, data.P, data.epsilon)
    if "distribution" in doc:
        return Distribution.from_records(ctx.d, doc["distribution"])
    raise ValueError("state file holds neither 'state' nor 'distribution'")


# commands


def cmd_gen_state(args) -> int:
    cfg = _config(args)
    ctx = cfg.context()
    command = {"name": "gen-state", "n": args.n, "eps": args.eps, "band": args.band, "aligned": args.aligned}
    data = states.generate_slater(ctx, args.n, args.eps, cfg.seed, band=args.band, aligned=args.aligned)
    doc = {"meta": meta(cfg, command), "lattice": ctx.to_dict(), "state": data.to_dict()}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    _note(f"valid Slater data: n={data.n}, eps={data.epsilon}, N={ctx.N}")
    return EXIT_OK


def _operator(which, ctx, pot, f, lam, t, conv, jobs):
    if which == "q":
        return collision.collision_operator(ctx, pot, f, lam, t, conv, jobs=jobs)
    if which == "qsharp":
        return collision.collision_operator(ctx, pot, f, 0.0, None, conv, jobs=jobs)
    if which == "b":
        return bosonization.b_mollified(ctx, pot, f, lam, t, conv, jobs=jobs)
    return bosonization.b_sharp(ctx, pot, f, conv, jobs=jobs)


def _oracle(which, ctx, pot, f, lam, t, conv, p):
    if which in ("q", "qsharp"):
        return collision.q_brute_oracle(ctx, pot, f, lam, t if which == "q" else None, p, conv)
    return bosonization.b_brute_oracle(ctx, pot, f, lam, t if which == "b" else None, p, conv)


def _residuals(which, ctx, pot, f, lam, t, conv, values, jobs) -> dict:
    if which in ("q", "qsharp"):
        return collision.conservation_residuals(ctx, values, sharp=which == "qsharp")
    tt = t if which == "b" else None
    BH, BP = bosonization.boson_operator(ctx, pot, f, lam, tt, conv, split=True, jobs=jobs)
    return bosonization.sector_residuals(BH, BP)


def cmd_eval(args) -> int:
    cfg = _config(args)
    ctx = cfg.context()
    pot = cfg.make_potential(ctx)
    conv = cfg.conventions()
    if args.which in ("q", "b") and not args.t > 0:
        raise ValueError("t must be positive")
    f = _load_state(args.state, ctx) if args.state else Distribution(ctx.d)
    jobs = args.jobs or default_jobs()
    values = _operator(args.which, ctx, pot, f, args.lam, args.t, conv, jobs)
    command = {"name": "eval", "which": args.which, "lam": args.lam, "t": args.t, "oracle": args.oracle}
    if args.state:
        command["state"] = f.to_records()
    info = meta(cfg, command)
    header = [f"p{i + 1}" for i in range(ctx.d)] + ["value"]
    rows = [list(p) + [v] for p, v in values.items()]
    footer = []
    if args.oracle:
        header.append("oracle")
        worst = 0.0
        for row, p in zip(rows, values):
            o = _oracle(args.which, ctx, pot, f, args.lam, args.t, conv, p)
            row.append(o)
            worst = max(worst, abs(o - values[p]))
        footer.append(f"oracle max_abs_diff={worst!r}")
        _note(f"oracle max |optimized - brute force| = {worst:.3e}")
    res = _residuals(args.which, ctx, pot, f, args.lam, args.t, conv, values, jobs)
    footer.append("residuals " + " ".join(f"{k}={v!r}" for k, v in res.items()))
    _emit(_csv_text(info, header, rows, footer), args.out)
    _note("conservation residuals: " + ", ".join(f"{k}={v:.2e}" for k, v in res.items()))
    bad = {k: v for k, v in res.items() if v > RESIDUAL_LIMIT}
    if bad:
        raise InvariantBreach(f"conservation residual above {RESIDUAL_LIMIT}: {bad}")
    return EXIT_OK


def cmd_counting(args) -> int:
    cfg = _config(args)
    ctx = cfg.context()
    k = _ints(args.k)
    if len(k) != ctx.d:
        raise ValueError(f"k must have {ctx.d} components")
    if not any(k):
        raise ValueError("k must be nonzero")
    axis = max(range(ctx.d), key=lambda i: abs(k[i]))
    qmax = args.qmax if args.qmax is not None else int(math.ceil(ctx.p_F))
    rows = []
    for j in range(args.qmin, qmax + 1, args.qstep):
        q = tuple(j if i == axis else 0 for i in range(ctx.d))
        qk = sum(a * b for a, b in zip(q, k))
        n = bosonization.counting_N(ctx, q, k)
        ratio = n / (2.0 * math.pi * qk) if qk > 0 else float("nan")
        rows.append([ctx.p_F, k, q, qk, n, ratio])
    command = {"name": "counting", "k": list(k), "qmin": args.qmin, "qmax": qmax, "qstep": args.qstep}
    _emit(_csv_text(meta(cfg, command), ["p_F", "k", "q", "qk", "N", "ratio"], rows), args.out)
    return EXIT_OK


def cmd_gauss(args) -> int:
    cfg = _config(args)
    if not 0 <= args.rmin <= args.rmax:
        raise ValueError("need 0 <= rmin <= rmax")
    rows = []
    for r in range(args.rmin, args.rmax + 1):
        count, rem = bosonization.gauss_circle(r * r)
        scaled = abs(rem) / r ** 0.67 if r > 0 else float("nan")
        rows.append([r, r * r, count, rem, scaled])
    command = {"name": "gauss", "rmin": args.rmin, "rmax": args.rmax}
    worst = max((row[4] for row in rows if row[0] > 0), default=0.0)
    footer = [f"max |E|/r^0.67 = {worst!r}"]
    _emit(_csv_text(meta(cfg, command), ["r", "r2", "count", "E", "E_over_r067"], rows, footer), args.out)
    return EXIT_OK


def cmd_delta_check(args) -> int:
    cfg = _config(args)
    xs = [int(v) for v in _floats(args.x)]
    ys = _floats(args.y)
    ts = _floats(args.t)
    rows = []
    for x in xs:
        for y in ys:
            for t in ts:
                dev, (tail, res) = mollifier.sharp_limit_error(x, y, args.lam, t, cfg.kronecker)
                rows.append([x, y, args.lam, t, dev, tail, res])
    fit = mollifier.fit_sharp_limit_constant(xs, ys, args.lam, ts, cfg.kronecker)
    command = {"name": "delta-check", "x": xs, "y": ys, "t": ts, "lam": args.lam}
    footer = [f"fitted C={fit['C']!r} resonant_exact={fit['resonant_exact']}"]
    header = ["x", "y", "lam", "t", "deviation", "tail_term", "resonance_term"]
    _emit(_csv_text(meta(cfg, command), header, rows, footer), args.out)
    return EXIT_OK


_SWEEP_COLUMNS = [
    "p_F", "N", "n", "B_sharp_off_S", "Q_sharp_off_S", "Q_sup_over_n",
    "B_over_N13", "rem2_budget", "dominance", "loss_only",
]


def cmd_sweep(args) -> int:
    cfg = _config(args)
    ctx0 = cfg.context()
    if ctx0.d != 3:
        raise ValueError("sweep runs in three dimensions")
    pot = cfg.make_potential(ctx0)
    p_fs = _floats(args.pf_list)
    out = evolution.dominance_sweep(
        p_fs, pot, n=args.n, eps=args.eps, seed=cfg.seed, delta1=args.delta1,
        delta2=args.delta2, T=args.T, m=cfg.m, C=cfg.C, conv=cfg.conventions(),
        aligned=args.aligned,
    )
    command = {
        "name": "sweep", "pf": p_fs, "n": args.n, "eps": args.eps, "delta1": args.delta1,
        "delta2": args.delta2, "T": args.T, "aligned": args.aligned,
    }
    info = meta(cfg, command)
    rows = []
    for rep in out["rows"]:
        m = rep.metrics
        rows.append([rep.lattice["p_F"]] + [m[c] for c in _SWEEP_COLUMNS[1:]])
    footer = [f"slope log B_sharp_off_S vs log N = {out['B_slope']!r}"]
    _emit(_csv_text(info, _SWEEP_COLUMNS, rows, footer), args.out)
    if args.json_out:
        doc = {
            "meta": info,
            "B_slope": out["B_slope"],
            "reports": [rep.to_dict() for rep in out["rows"]],
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.json_out)
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _config(args)
    ctx = cfg.context()
    pot = cfg.make_potential(ctx)
    f = _load_state(args.state, ctx)
    regime = evolution.ScalingRegime.for_context(ctx, args.delta1, args.delta2, args.T)
    command = {"name": "report", "state": f.to_records(), "delta1": args.delta1, "delta2": args.delta2, "T": args.T}
    rep = evolution.dominance_report(ctx, pot, f, regime, cfg.m, cfg.C, cfg.conventions(), meta(cfg, command))
    _emit(rep.to_json(), args.out)
    return EXIT_OK


# parser


def _common(p: argparse.ArgumentParser, pf_list: bool = False) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--d", type=int, help="dimension")
    if pf_list:
        p.add_argument("--pf", dest="pf_list", default="20,40,80", help="comma-separated Fermi momenta")
        p.set_defaults(pf=None)
    else:
        p.add_argument("--pf", type=float, help="Fermi momentum")
    p.add_argument("--r", type=int, help="potential support radius")
    p.add_argument("--amplitude", type=float, help="indicator potential amplitude")
    p.add_argument("--kronecker-convention", choices=["consistent", "literal"])
    p.add_argument("--normalization", choices=["ledger", "raw"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermikin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fermikin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-state", help="generate valid Slater delta data")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--band", type=int, default=3)
    p.add_argument("--aligned", action="store_true")
    p.set_defaults(func=cmd_gen_state)

    p = sub.add_parser("eval", help="evaluate an operator on a state")
    _common(p)
    p.add_argument("which", choices=["q", "qsharp", "b", "bsharp"])
    p.add_argument("--state", help="state JSON (empty state when omitted)")
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--t", type=float, default=10.0)
    p.add_argument("--oracle", action="store_true", help="add a brute-force column")
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0 = all cores)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("counting", help="plane-section lattice counts N(q, k)")
    _common(p)
    p.add_argument("--k", default="0,0,1")
    p.add_argument("--qmin", type=int, default=1)
    p.add_argument("--qmax", type=int)
    p.add_argument("--qstep", type=int, default=1)
    p.set_defaults(func=cmd_counting)

    p = sub.add_parser("gauss", help="disk lattice counts and remainders")
    _common(p)
    p.add_argument("--rmin", type=int, default=0)
    p.add_argument("--rmax", type=int, default=100)
    p.set_defaults(func=cmd_gauss)

    p = sub.add_parser("delta-check", help="mollifier sharp-limit deviations on a grid")
    _common(p)
    p.add_argument("--x", default="0,1,2,5")
    p.add_argument("--y", default="0,1")
    p.add_argument("--t", default="10,100,1000")
    p.add_argument("--lam", type=float, default=0.0)
    p.set_defaults(func=cmd_delta_check)

    p = sub.add_parser("sweep", help="Fermi-momentum sweep of dominance reports")
    _common(p, pf_list=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--delta1", type=float, default=0.1)
    p.add_argument("--delta2", type=float, default=0.05)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--aligned", action="store_true")
    p.add_argument("--json-out", help="also write the full reports as JSON")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="dominance report for one state")
    _common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--delta1", type=float, default=0.1)
    p.add_argument("--delta2", type=float, default=0.05)
    p.add_argument("--T", type=float, default=1.0)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SlaterError, DistributionError, PotentialError, ValueError, OSError) as exc:
        _note(f"error: {exc}")
        return EXIT_INVALID
    except InvariantBreach as exc:
        _note(f"invariant breach: {exc}")
        return EXIT_BREACH


if __name__ == "__main__":
    sys.exit(main())
