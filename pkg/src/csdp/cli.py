"""Batch command-line front end.

Exit codes: 0 success or feasible, 1 infeasible or iteration limit, 2 usage or input error.
Vertex and clique labels are 1-based in all output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .admm import AdmmSettings, solve
from .errors import CsdpError, ParseError
from .factorwidth import fw_bound_program, fw_cliques
from .generators import (chain_network, gen_lyapunov, gen_maxcut, qcqp_relax, random_maxcut_weights,
                         random_network_blocks, star_network)
from .graph import Graph, Partition, chordal_extension, clique_tree, cliques_of, is_chordal, read_graph
from .sdp import aggregate_pattern, clique_tree_convert, decompose_blocks, domain_decompose, range_decompose
from .sdpa import format_sdpa, sdpa_read
from .sos import STRATEGIES, read_polynomial, sos_check

SCHEMA_VERSION = 1
EXTENSIONS = ("min-degree", "mcs-fill", "complete-components")
log = logging.getLogger("csdp")


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ settings

_SETTING_TYPES = {"rho": float, "eps_abs": float, "eps_rel": float, "max_iter": int,
                  "check_every": int, "adaptive_rho": bool, "allow_dependent": bool}


def _parse_bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def read_settings_file(path: str) -> dict[str, Any]:
    """key=value lines; '#' comments; ``eps`` sets both tolerances."""
    out: dict[str, Any] = {}
    for k, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", k)
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key == "eps":
                out["eps_abs"] = out["eps_rel"] = float(val)
            elif key in _SETTING_TYPES:
                t = _SETTING_TYPES[key]
                out[key] = _parse_bool(val) if t is bool else t(val)
            else:
                raise ParseError(f"unknown setting {key!r}", k)
        except ValueError as e:
            raise ParseError(str(e), k) from None
    return out


def build_settings(args) -> AdmmSettings:
    kw = read_settings_file(args.settings) if getattr(args, "settings", None) else {}
    if getattr(args, "rho", None) is not None:
        kw["rho"] = args.rho
    if getattr(args, "eps", None) is not None:
        kw["eps_abs"] = kw["eps_rel"] = args.eps
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "adaptive_rho", False):
        kw["adaptive_rho"] = True
    if getattr(args, "log", None):
        kw["log_path"] = args.log
    try:
        return AdmmSettings(**kw)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be positive")
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:  # pragma: no cover
        pass


def _configure_logging() -> None:
    level = os.environ.get("CSDP_LOG", "error").strip().upper() or "ERROR"
    if level not in ("ERROR", "INFO", "DEBUG", "WARNING"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


# ------------------------------------------------------------------ output

def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _fmt_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.8g}"
    if isinstance(v, list):
        return "; ".join(_fmt_scalar(x) if not isinstance(x, list) else "{" + ",".join(map(str, x)) + "}"
                         for x in v)
    return str(v)


def emit(result: dict, fmt: str, out) -> None:
    result = {"schema_version": SCHEMA_VERSION, **_plain(result)}
    if fmt == "json":
        out.write(json.dumps(result, indent=2, sort_keys=False) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(result))
        w.writerow([_fmt_scalar(v) if not isinstance(v, float) else repr(v) for v in result.values()])
        out.write(buf.getvalue())
    else:
        for k, v in result.items():
            if k == "schema_version":
                continue
            out.write(f"{k}: {_fmt_scalar(v)}\n")


def _one_based(cliques) -> list[list[int]]:
    return sorted([v + 1 for v in sorted(c)] for c in cliques)


def _write_text(path: str | None, text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text)


# ------------------------------------------------------------------ commands

def cmd_analyze(args, out) -> int:
    g = read_graph(Path(args.graph).read_text())
    chordal = is_chordal(g)
    h = g if chordal else chordal_extension(g, args.ext)
    order, cs = cliques_of(h)
    ct = clique_tree(cs)
    seps = [len(s) for s in ct.separators]
    emit({"command": "analyze", "n": g.n, "edges": g.num_edges, "chordal": chordal,
          "fill_in": h.num_edges - g.num_edges, "num_cliques": len(cs),
          "max_clique": max((len(c) for c in cs), default=0),
          "cliques": _one_based(cs), "peo": [v + 1 for v in order.perm],
          "tree_edges": len(ct.edges()), "max_separator": max(seps, default=0)}, args.format, out)
    return 0


def _decompose(p, args):
    return domain_decompose(p, args.ext, args.merge_threshold)


def cmd_decompose(args, out) -> int:
    p = sdpa_read(args.sdpa)
    agg = aggregate_pattern(p)
    d = _decompose(p, args)
    cliques = _one_based(d.cliques)
    res = {"command": "decompose", "n": p.n, "m": p.m, "aggregate_edges": agg.num_edges,
           "chordal": is_chordal(agg), "extended_edges": d.pattern.num_edges, "num_cliques": len(cliques),
           "clique_sizes": [len(c) for c in cliques], "cliques": cliques}
    if args.out:
        conv = clique_tree_convert(p, args.ext, drop_redundant=not args.keep_redundant, decomposition=d)
        Path(args.out).write_text(format_sdpa(conv.data, "clique-tree conversion"))
        res["converted_n"] = conv.data.n
        res["converted_m"] = conv.data.m
    emit(res, args.format, out)
    return 0


def _solution_record(sol, command: str, extra: dict | None = None) -> dict:
    rec = {"command": command, "status": sol.status, "objective": float(sol.objective),
           "iterations": int(sol.iterations), "primal_residual": float(sol.primal_res),
           "dual_residual": float(sol.dual_res), "mode": sol.mode}
    rec.update(extra or {})
    return rec


def cmd_solve(args, out) -> int:
    settings = build_settings(args)
    p = sdpa_read(args.sdpa)
    if args.blocks:
        d = decompose_blocks(p, args.mode)
    elif args.mode == "domain":
        d = domain_decompose(p, args.ext, args.merge_threshold)
    else:
        d = range_decompose(p, args.ext, args.merge_threshold)
    sol = solve(d, settings)
    emit(_solution_record(sol, "solve", {"n": p.n, "m": p.m, "num_cliques": len(d.cliques),
                                         "max_clique": max(len(c) for c in d.cliques)}), args.format, out)
    return 0 if sol.solved else 1


def cmd_convert(args, out) -> int:
    p = sdpa_read(args.sdpa)
    d = domain_decompose(p, args.ext, args.merge_threshold)
    conv = clique_tree_convert(p, args.ext, drop_redundant=not args.keep_redundant, decomposition=d)
    Path(args.out).write_text(format_sdpa(conv.data, "clique-tree conversion"))
    emit({"command": "convert", "n": p.n, "m": p.m, "converted_n": conv.data.n, "converted_m": conv.data.m,
          "consistency_rows": len(conv.consistency_rows), "blocks": list(conv.variables),
          "out": args.out}, args.format, out)
    return 0


def cmd_sos(args, out) -> int:
    settings = build_settings(args)
    f = read_polynomial(args.poly)
    r = sos_check(f, args.strategy, settings, step=args.step, newton=not args.no_newton)
    emit({"command": "sos", "strategy": args.strategy, "status": r.status, "feasible": r.feasible,
          "basis_size": len(r.basis), "steps": len(r.edges), "block_sizes": sorted(r.block_sizes, reverse=True),
          "certificate_residual": float(r.residual), "tolerance": float(r.solution.tolerance)},
         args.format, out)
    return 0 if r.feasible else 1


def _parse_partition(text: str) -> Partition:
    try:
        sizes = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"--partition expects comma-separated integers, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise UsageError("--partition sizes must be positive")
    return Partition.of(sizes)


def cmd_fw(args, out) -> int:
    settings = build_settings(args)
    p = sdpa_read(args.sdpa)
    if args.partition is not None:
        part = _parse_partition(args.partition)
        if part.n != p.n:
            raise UsageError(f"partition sums to {part.n}, problem has n={p.n}")
        mode = part
    else:
        mode = args.width
    fw = fw_cliques(p.n, mode)
    q = fw_bound_program(p, fw, args.side)
    sol = solve(decompose_blocks(q, "domain"), settings)
    emit(_solution_record(sol, "fw", {"side": args.side, "fw_mode": fw.mode, "num_cliques": len(fw.cliques),
                                      "program_n": q.n, "program_m": q.m}), args.format, out)
    return 0 if sol.solved else 1


def cmd_gen(args, out) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "maxcut":
        if args.graph:
            g = read_graph(Path(args.graph).read_text())
        else:
            if args.n is None or args.n < 1:
                raise UsageError("gen maxcut needs --graph or a positive --n")
            if not 0.0 <= args.density <= 1.0:
                raise UsageError("--density must lie in [0, 1]")
            iu = np.triu_indices(args.n, 1)
            keep = rng.random(iu[0].size) < args.density
            g = Graph.from_edges(args.n, zip(iu[0][keep].tolist(), iu[1][keep].tolist()))
        p = gen_maxcut(random_maxcut_weights(g, rng, args.weighted))
        comment = f"max-cut n={g.n} seed={args.seed}"
    elif args.kind == "lyapunov":
        if args.l < 1 or args.block_size < 1:
            raise UsageError("--l and --block-size must be positive")
        net = star_network(args.l) if args.network == "star" else chain_network(args.l)
        sizes = Partition.of([args.block_size] * args.l)
        p = gen_lyapunov(random_network_blocks(net, sizes, rng), net, sizes)
        comment = f"lyapunov {args.network} l={args.l} seed={args.seed}"
    else:
        if args.n is None or args.n < 1 or args.m < 0:
            raise UsageError("gen qcqp needs a positive --n and a nonnegative --m")
        n = args.n
        M = rng.standard_normal((n, n))
        P = [(M + M.T) / 2]
        q = [rng.standard_normal(n)]
        r = [0.0]
        for i in range(n):  # box x_i^2 <= 1 keeps the relaxation bounded
            E = np.zeros((n, n))
            E[i, i] = 1.0
            P.append(E)
            q.append(np.zeros(n))
            r.append(-1.0)
        for _ in range(args.m):
            M = rng.standard_normal((n, n))
            P.append((M + M.T) / 2)
            q.append(rng.standard_normal(n))
            r.append(-float(n))
        p = qcqp_relax(P, q, r)
        comment = f"qcqp n={n} m={args.m} seed={args.seed}"
    _write_text(args.out, format_sdpa(p, comment), out)
    if args.out and args.out != "-":
        emit({"command": "gen", "kind": args.kind, "seed": args.seed, "n": p.n, "m": p.m,
              "blocks": list(p.block_structure or (p.n,)), "out": args.out}, args.format, out)
    return 0


# ------------------------------------------------------------------ parser

def _add_solver_flags(sp) -> None:
    sp.add_argument("--rho", type=float, help="ADMM penalty")
    sp.add_argument("--eps", type=float, help="absolute and relative stopping tolerance")
    sp.add_argument("--max-iter", type=int, help="iteration limit")
    sp.add_argument("--adaptive-rho", action="store_true", help="residual-balancing penalty updates")
    sp.add_argument("--settings", help="key=value settings file (flags win)")
    sp.add_argument("--log", help="write per-check residuals to this CSV file")


def _add_decomp_flags(sp) -> None:
    sp.add_argument("--ext", choices=EXTENSIONS, default="min-degree", help="chordal extension heuristic")
    sp.add_argument("--merge-threshold", type=float, default=float("inf"),
                    help="merge parent/child cliques while the fill cost stays below this")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="csdp", description="Chordal decomposition tools for sparse SDP and SOS.")
    ap.add_argument("--version", action="version", version=f"csdp {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json", "csv"), default="human")
    common.add_argument("--threads", type=int, help="solver threads")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", parents=[common], help="chordality, cliques and clique tree of a graph")
    sp.add_argument("graph")
    sp.add_argument("--ext", choices=EXTENSIONS, default="min-degree")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("decompose", parents=[common], help="clique report for an SDPA problem")
    sp.add_argument("sdpa")
    _add_decomp_flags(sp)
    sp.add_argument("--out", help="also write the clique-tree converted problem here")
    sp.add_argument("--keep-redundant", action="store_true", help="keep all overlap consistency rows")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("solve", parents=[common], help="solve an SDPA problem with decomposed ADMM")
    sp.add_argument("sdpa")
    sp.add_argument("--mode", choices=("domain", "range"), default="domain")
    sp.add_argument("--blocks", action="store_true", help="use the declared blocks as cliques")
    _add_decomp_flags(sp)
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("convert", parents=[common], help="clique-tree conversion to a block SDPA problem")
    sp.add_argument("sdpa")
    sp.add_argument("--out", required=True)
    sp.add_argument("--keep-redundant", action="store_true")
    _add_decomp_flags(sp)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("sos", parents=[common], help="sparse SOS check of a polynomial")
    sp.add_argument("poly")
    sp.add_argument("--strategy", choices=STRATEGIES, default="newton")
    sp.add_argument("--step", type=int, help="hierarchy step for term-sparse strategies (default: stabilized)")
    sp.add_argument("--no-newton", action="store_true", help="skip Newton polytope reduction")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_sos)

    sp = sub.add_parser("fw", parents=[common], help="factor-width bound on an SDPA problem")
    sp.add_argument("sdpa")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--partition", help="block sizes, e.g. 2,1,3")
    g.add_argument("--width", type=int, default=2, help="factor width k (default 2)")
    sp.add_argument("--side", choices=("upper", "lower"), default="upper")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_fw)

    sp = sub.add_parser("gen", parents=[common], help="write a generated problem in SDPA format")
    sp.add_argument("kind", choices=("maxcut", "lyapunov", "qcqp"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="output path (default: standard output)")
    sp.add_argument("--graph", help="maxcut: graph file")
    sp.add_argument("--n", type=int, help="maxcut: vertices; qcqp: variables")
    sp.add_argument("--density", type=float, default=0.3, help="maxcut: edge probability")
    sp.add_argument("--weighted", action="store_true", help="maxcut: random edge weights")
    sp.add_argument("--network", choices=("star", "chain"), default="chain", help="lyapunov: topology")
    sp.add_argument("--l", type=int, default=5, help="lyapunov: number of subsystems")
    sp.add_argument("--block-size", type=int, default=2, help="lyapunov: states per subsystem")
    sp.add_argument("--m", type=int, default=1, help="qcqp: random quadratic constraints")
    sp.set_defaults(func=cmd_gen)
    return ap


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse reports usage errors itself
        return int(e.code or 0)
    try:
        _set_threads(args.threads)
        return args.func(args, out)
    except (UsageError, ParseError, FileNotFoundError, IsADirectoryError) as e:
        err.write(f"csdp {args.command}: error: {e}\n")
        return 2
    except (CsdpError, ValueError) as e:
        err.write(f"csdp {args.command}: error: {e}\n")
        return 2


def main() -> None:
    sys.exit(run())
