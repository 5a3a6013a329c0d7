"""Command-line frontend: machine-readable reports over the library.

Identical configuration and inputs produce byte-identical JSON output:
all sampling is seeded, and the only timestamp lives in a header field
suppressed by --no-meta.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .combinatorics import PermutationPair, omega_matrix, singularity_cycles
from .cocycle_analysis import (
    DcTestOptions, LyapunovOptions, dc_test, lyapunov_spectrum, stable_space,
)
from .cohomology_solver import SolveOptions, solve_higher
from .errors import HypothesisError, IetError, StructuralError
from .function_spaces import PiecewiseFunction
from .iet_core import Iet, detect_connection
from .rauzy_veech import StepType, iterate
from .self_similar import CodimensionInput, codimension, equation_count_check, find_loops

EXIT_OK = 0
EXIT_STRUCTURAL = 1
EXIT_HYPOTHESIS = 2


@dataclass
class RunConfig:
    command: str
    iet: str | None = None
    pi: str | None = None
    phi: str | None = None
    depth: int = 200
    prec: int | None = None
    r: int = 1
    g: int | None = None
    s: int | None = None
    mu: int | None = None
    max_len: int = 8
    max_m: int = 1000
    tol: float | None = None
    eps_c: float = 0.05
    floor: float = 0.5
    gap_factor: float = 0.1
    discard: float = 0.0
    grid: int = 1024
    residual_tol: float = 1e-6
    seed: int = 0
    jobs: int = 1
    fmt: str = "json"
    no_meta: bool = False

    def header(self) -> dict:
        cfg = {k: v for k, v in asdict(self).items() if v is not None}
        head = {"config": cfg, "version": __version__}
        if not self.no_meta:
            head["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        return head


def _emit(payload: dict, cfg: RunConfig, out):
    if cfg.fmt == "json":
        out.write(json.dumps(payload, sort_keys=True, indent=1, default=float) + "\n")
    else:
        raise StructuralError(f"format {cfg.fmt} not supported for this command")


def _load_iet(cfg: RunConfig) -> Iet:
    if cfg.iet is None:
        raise StructuralError("--iet FILE is required for this command")
    with open(cfg.iet) as f:
        return Iet.from_json(f.read())


def _load_pi(cfg: RunConfig) -> PermutationPair:
    if cfg.pi:
        return PermutationPair.parse(cfg.pi)
    if cfg.iet:
        return _load_iet(cfg).pi
    raise StructuralError("supply --pi 'A B / B A' or --iet FILE")


def cmd_analyze(cfg: RunConfig, out) -> int:
    pi = _load_pi(cfg)
    om = omega_matrix(pi)
    sing = singularity_cycles(pi)
    payload = {
        "meta": cfg.header(),
        "pi": str(pi),
        "d": pi.d,
        "irreducible": True,
        "omega": [list(r) for r in om.matrix],
        "rank": om.rank,
        "genus": om.genus,
        "cycles": [["".join(m) for m in c] for c in sing.cycles],
        "s": sing.s,
        "euler_identity": pi.d == 2 * om.genus + sing.s - 1,
    }
    if cfg.iet:
        iet = _load_iet(cfg)
        w = detect_connection(iet, cfg.max_m, cfg.tol)
        payload["connection"] = None if w is None else {
            "k": w.k, "l": w.l, "m": w.m, "residual": float(w.residual)}
    _emit(payload, cfg, out)
    return EXIT_OK


def cmd_rv(cfg: RunConfig, out) -> int:
    iet = _load_iet(cfg)
    path = iterate(iet, cfg.depth)
    out.write(json.dumps({"meta": cfg.header()}, sort_keys=True) + "\n")
    path.export_jsonl(out)
    return EXIT_OK


def cmd_lyapunov(cfg: RunConfig, out) -> int:
    iet = _load_iet(cfg)
    path = iterate(iet, cfg.depth)
    rep = lyapunov_spectrum(path, LyapunovOptions(gap_factor=cfg.gap_factor,
                                                  discard_fraction=cfg.discard))
    _emit({"meta": cfg.header(), "report": rep.to_json()}, cfg, out)
    return EXIT_OK


def cmd_dc_test(cfg: RunConfig, out) -> int:
    iet = _load_iet(cfg)
    path = iterate(iet, cfg.depth)
    rep = lyapunov_spectrum(path, LyapunovOptions(gap_factor=cfg.gap_factor,
                                                  discard_fraction=cfg.discard))
    gs = stable_space(path, report=rep)
    report = dc_test(path, gs, DcTestOptions(eps_c=cfg.eps_c, floor=cfg.floor,
                                             seed=cfg.seed))
    if cfg.fmt == "csv":
        out.write(report.to_csv())
    else:
        _emit({"meta": cfg.header(), "report": report.to_json()}, cfg, out)
    return EXIT_OK if report.admissible else EXIT_HYPOTHESIS


def cmd_solve(cfg: RunConfig, out) -> int:
    iet = _load_iet(cfg)
    path = iterate(iet, cfg.depth)
    if cfg.phi is None:
        raise StructuralError("--phi FILE (piecewise function JSON) is required")
    with open(cfg.phi) as f:
        phi = PiecewiseFunction.from_json(iet, f.read())
    opts = SolveOptions(residual_tol=cfg.residual_tol, grid_n=cfg.grid, seed=cfg.seed)
    sol = solve_higher(path, phi, cfg.r, opts)
    _emit({"meta": cfg.header(), "solution": sol.to_json()}, cfg, out)
    return EXIT_OK


def cmd_codim(cfg: RunConfig, out) -> int:
    if None in (cfg.g, cfg.s, cfg.mu):
        raise StructuralError("--g, --s and --mu are required")
    inp = CodimensionInput(cfg.g, cfg.s, cfg.mu, cfg.r)
    d_star = codimension(inp)
    if cfg.fmt == "json":
        _emit({"meta": cfg.header(), "codimension": d_star, "d": inp.d,
               "equation_count_consistent": equation_count_check(inp)}, cfg, out)
    else:
        out.write(f"{d_star}\n")
    return EXIT_OK


def _loops_branch(args):
    pi_text, max_len, first = args
    pi = PermutationPair.parse(pi_text)
    loops = find_loops(pi, max_len, first_step=StepType(first))
    return [lp.to_json() for lp in loops]


def cmd_loops(cfg: RunConfig, out) -> int:
    pi = _load_pi(cfg)
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=2) as ex:
            parts = list(ex.map(_loops_branch,
                                [(str(pi), cfg.max_len, "B"), (str(pi), cfg.max_len, "T")]))
        seen = {}
        for part in parts:
            for rec in part:
                seen[tuple(rec["steps"])] = rec
        records = [seen[k] for k in sorted(seen, key=lambda w: (len(w), w))]
    else:
        records = [lp.to_json() for lp in find_loops(pi, cfg.max_len)]
    _emit({"meta": cfg.header(), "loops": records}, cfg, out)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "rv": cmd_rv,
    "lyapunov": cmd_lyapunov,
    "dc-test": cmd_dc_test,
    "solve": cmd_solve,
    "codim": cmd_codim,
    "loops": cmd_loops,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ietkit",
                                description="interval exchange renormalization toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, depth_default=200):
        sp.add_argument("--iet", help="instance JSON file")
        sp.add_argument("--depth", type=int, default=depth_default,
                        help=f"elementary renormalization steps (default {depth_default})")
        sp.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
        sp.add_argument("--format", dest="fmt", choices=("json", "csv", "text"),
                        default="json", help="output format (default json)")
        sp.add_argument("--no-meta", action="store_true",
                        help="suppress the timestamp header field")

    sp = sub.add_parser("analyze", help="combinatorial invariants of an instance")
    common(sp)
    sp.add_argument("--pi", help="permutation pair, e.g. 'A B / B A'")
    sp.add_argument("--max-m", type=int, default=1000,
                    help="connection search depth (default 1000)")
    sp.add_argument("--tol", type=float, default=None,
                    help="connection tolerance (default: backend tolerance)")

    sp = sub.add_parser("rv", help="renormalization path as JSON lines")
    common(sp, depth_default=10)

    sp = sub.add_parser("lyapunov", help="exponent estimates along a path")
    common(sp, depth_default=2000)
    sp.add_argument("--gap-factor", dest="gap_factor", type=float, default=0.1,
                    help="gap threshold as a fraction of the top exponent (default 0.1)")
    sp.add_argument("--discard", type=float, default=0.0,
                    help="burn-in fraction of windows to discard (default 0)")

    sp = sub.add_parser("dc-test", help="Diophantine-condition certificate")
    common(sp, depth_default=2000)
    sp.add_argument("--gap-factor", dest="gap_factor", type=float, default=0.1)
    sp.add_argument("--discard", type=float, default=0.0)
    sp.add_argument("--eps-c", dest="eps_c", type=float, default=0.05,
                    help="subexponential slope cap (default 0.05)")
    sp.add_argument("--floor", type=float, default=0.5,
                    help="non-decay floor for sampled vectors (default 0.5)")

    sp = sub.add_parser("solve", help="solve the cohomological equation")
    common(sp, depth_default=500)
    sp.add_argument("--phi", help="piecewise-function JSON file")
    sp.add_argument("--r", type=int, default=1, help="regularity level (default 1)")
    sp.add_argument("--grid", type=int, default=1024,
                    help="output grid size (default 1024)")
    sp.add_argument("--residual-tol", dest="residual_tol", type=float, default=1e-6,
                    help="verified residual tolerance (default 1e-6)")

    sp = sub.add_parser("codim", help="codimension of the local conjugacy class")
    sp.add_argument("--g", type=int, required=True, help="genus")
    sp.add_argument("--s", type=int, required=True, help="singularity count")
    sp.add_argument("--mu", type=int, required=True, help="stable-block dimension")
    sp.add_argument("--r", type=int, default=3, help="regularity (default 3)")
    sp.add_argument("--format", dest="fmt", choices=("json", "text"), default="text",
                    help="text prints the bare number (default)")
    sp.add_argument("--no-meta", action="store_true")

    sp = sub.add_parser("loops", help="primitive renormalization loops")
    common(sp)
    sp.add_argument("--pi", help="permutation pair, e.g. 'A B / B A'")
    sp.add_argument("--max-len", dest="max_len", type=int, default=8,
                    help="maximal loop length (default 8)")
    sp.add_argument("--jobs", type=int, default=1,
                    help="parallel branch workers (default 1)")
    return p


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        return COMMANDS[cfg.command](cfg, out)
    except BrokenPipeError:
        return EXIT_OK
    except HypothesisError as e:
        print(f"hypothesis failure: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (IetError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STRUCTURAL


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    fields = {f for f in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**{k: v for k, v in vars(ns).items() if k in fields and v is not None})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
