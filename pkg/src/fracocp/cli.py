"""Command-line interface.

Subcommands::

    fracocp approx   --fn t4 --alpha 0.5 --n 2 --N 2,4,6
    fracocp example1 --alpha 0.5 --N 2,3 --pipeline both
    fracocp example2 --alpha 0.5 --N 2 --bracket 1,2
    fracocp solve    problem.yaml

Every run writes CSV files and, last, ``manifest.txt`` into the output
directory (``--out``, else ``$FRACOCP_OUT``, else ``./fracocp-out``).
Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, csvio
from .approximator import Grid, approximate_caputo_derivative, approximate_rl_derivative
from .catalog import EXAMPLE2_BRACKET, example1, example1_exact, example2, test_function
from .config import PIPELINES, load_config
from .errors import (
    BracketError,
    CapabilityError,
    FracOcpError,
    IntegrationBlowupError,
    SingularJacobianError,
    SingularReductionError,
)
from .expansion import build_scheme
from .focp import FocpProblem, FocpSolution, solve_fractional_conditions
from .reduction import solve_reduced
from .tpbvp import SolverConfig

log = logging.getLogger("fracocp")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "FRACOCP_OUT"
DEFAULT_OUT = "fracocp-out"
MANIFEST = "manifest.txt"


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    out_dir: Path
    files: list[str] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)
    converged: bool = True

    def add(self, path: Path) -> None:
        self.files.append(Path(path).name)

    def write(self) -> Path:
        duration = time.perf_counter() - self.started
        lines = [f"subcommand: {self.subcommand}", f"output_dir: {self.out_dir}"]
        lines += [f"param {k}: {v}" for k, v in self.parameters.items()]
        lines += [f"metric {k}: {v}" for k, v in self.metrics.items()]
        lines.append(f"converged: {'yes' if self.converged else 'no'}")
        lines.append(f"duration_s: {duration:.3f}")
        lines.append("files:")
        lines += [f"  {name}" for name in self.files + [MANIFEST]]
        return csvio.atomic_write_text(self.out_dir / MANIFEST, "\n".join(lines) + "\n")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals:
        raise UsageError("empty list")
    return vals


def _float_pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in str(text).split(","))
    except ValueError:
        raise UsageError(f"expected 'lo,hi', got {text!r}") from None
    return lo, hi


def _fmt(v: float) -> str:
    return csvio.format_value(v)


# ---------------------------------------------------------------- approx


def cmd_approx(args, out: Path) -> RunManifest:
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1) for these schemes, got {args.alpha}")
    ns, Ns = _int_list(args.n), _int_list(args.N)
    pairs = [(n, N) for n in ns for N in Ns]
    bad = [(n, N) for n, N in pairs if N < n or n < 1]
    if bad:
        raise UsageError(f"invalid (n, N) combinations {bad}: need 1 <= n <= N")
    fn = test_function(args.fn)
    grid = Grid(0.0, 1.0, args.m)
    oracle = fn.oracle(args.alpha)
    man = RunManifest("approx", {"fn": args.fn, "alpha": args.alpha, "n": args.n, "N": args.N, "m": args.m, "caputo": args.caputo}, out)
    rows = []
    for n, N in pairs:
        scheme = build_scheme(args.alpha, n, N, "left", 0.0)
        run_fn = approximate_caputo_derivative if args.caputo else approximate_rl_derivative
        exact = oracle if not args.caputo else _caputo_oracle(fn, args.alpha, oracle)
        run = run_fn(fn.sampled, scheme, grid, exact=exact)
        path = run.to_csv(out / run.filename(args.fn))
        man.add(path)
        rows.append((n, N, run.max_abs_error, abs(run.values[-1] - run.exact[-1])))
        log.info("n=%d N=%d max error %.3e", n, N, run.max_abs_error)
    text = ["n,N,max_abs_error,error_at_b"] + [f"{n},{N},{_fmt(e)},{_fmt(eb)}" for n, N, e, eb in rows]
    man.add(csvio.atomic_write_text(out / f"summary_{args.fn}_{args.alpha:g}.csv", "\n".join(text) + "\n"))
    for n, N, e, _ in rows:
        man.metrics[f"max_abs_error n={n} N={N}"] = _fmt(e)
    return man


def _caputo_oracle(fn, alpha, rl_oracle):
    from .approximator import caputo_correction
    from .expansion import Side

    def exact(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return rl_oracle(t) - caputo_correction(fn.sampled, alpha, t, 0.0, Side.Left)

    return exact


# ---------------------------------------------------------------- problems


def _solve(problem: FocpProblem, pipeline: str, N: int, config: SolverConfig, bracket) -> FocpSolution:
    if pipeline == "fractional-conditions":
        return solve_fractional_conditions(problem, N, config, T_bracket=bracket)
    return solve_reduced(problem, N, config, T_bracket=bracket)


def _pipelines(choice: str) -> list[str]:
    if choice not in PIPELINES:
        raise UsageError(f"pipeline must be one of {', '.join(PIPELINES)}")
    return ["fractional-conditions", "reduce-then-classical"] if choice == "both" else [choice]


_SHORT = {"fractional-conditions": "frac", "reduce-then-classical": "reduced"}


def _run_problem(prefix: str, problem, pipelines, Ns, config, bracket, man: RunManifest) -> dict:
    """Solve, write one trajectory CSV per run and return the solutions."""
    sols = {}
    for pipe in pipelines:
        for N in Ns:
            sol = _solve(problem, pipe, N, config, bracket)
            sols[pipe, N] = sol
            man.add(sol.to_csv(man.out_dir / f"{prefix}_{_SHORT[pipe]}_N{N}.csv"))
            man.converged &= sol.converged
            key = f"{_SHORT[pipe]} N={N}"
            man.metrics[f"residual_norm {key}"] = _fmt(sol.residual_norm)
            man.metrics[f"T {key}"] = _fmt(sol.T)
            man.metrics[f"cost {key}"] = _fmt(sol.cost())
    return sols


def cmd_example1(args, out: Path) -> RunManifest:
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1), got {args.alpha}")
    Ns = _int_list(args.N)
    man = RunManifest("example1", {"alpha": args.alpha, "N": args.N, "pipeline": args.pipeline, "m": args.m}, out)
    problem = example1(args.alpha)
    config = SolverConfig(nodes=args.m)
    sols = _run_problem("example1", problem, _pipelines(args.pipeline), Ns, config, None, man)
    t = np.linspace(0.0, 1.0, args.m)
    xe, ue, _ = example1_exact(args.alpha, t)
    man.add(csvio.write_columns(out / "example1_exact.csv", ["t", "x", "u"], [t, xe, ue]))
    rows = ["pipeline,N,converged,residual_norm,E,control_error,cost"]
    for (pipe, N), sol in sols.items():
        xb, ub, _ = example1_exact(args.alpha, sol.t)
        E = float(np.max(np.abs(sol.x - xb)))
        Eu = float(np.max(np.abs(sol.u - ub)))
        rows.append(f"{pipe},{N},{int(sol.converged)},{_fmt(sol.residual_norm)},{_fmt(E)},{_fmt(Eu)},{_fmt(sol.cost())}")
        man.metrics[f"E {_SHORT[pipe]} N={N}"] = _fmt(E)
    man.add(csvio.atomic_write_text(out / "example1_summary.csv", "\n".join(rows) + "\n"))
    return man


def trajectory_discrepancy(a: FocpSolution, b: FocpSolution, samples: int = 2001) -> float:
    """Max ``|x_a - x_b|`` over the common time range, by linear interpolation."""
    lo = max(a.t[0], b.t[0])
    hi = min(a.t[-1], b.t[-1])
    t = np.linspace(lo, hi, samples)
    return float(np.max(np.abs(np.interp(t, a.t, a.x) - np.interp(t, b.t, b.x))))


def cmd_example2(args, out: Path) -> RunManifest:
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1), got {args.alpha}")
    Ns = _int_list(args.N)
    bracket = _float_pair(args.bracket) if args.bracket else EXAMPLE2_BRACKET
    man = RunManifest("example2", {"alpha": args.alpha, "N": args.N, "pipeline": args.pipeline, "m": args.m, "bracket": bracket}, out)
    config = SolverConfig(nodes=args.m)
    pipes = _pipelines(args.pipeline)
    sols = _run_problem("example2", example2(args.alpha), pipes, Ns, config, bracket, man)
    rows = ["pipeline,N,converged,residual_norm,T,cost"]
    for (pipe, N), sol in sols.items():
        rows.append(f"{pipe},{N},{int(sol.converged)},{_fmt(sol.residual_norm)},{_fmt(sol.T)},{_fmt(sol.cost())}")
    man.add(csvio.atomic_write_text(out / "example2_summary.csv", "\n".join(rows) + "\n"))
    if len(pipes) == 2:
        for N in Ns:
            fr, rd = sols[pipes[0], N], sols[pipes[1], N]
            man.metrics[f"|T_frac - T_reduced| N={N}"] = _fmt(abs(fr.T - rd.T))
            man.metrics[f"max trajectory discrepancy N={N}"] = _fmt(trajectory_discrepancy(fr, rd))
    return man


def cmd_solve(args, out: Path) -> RunManifest:
    cfg = load_config(args.config)
    man = RunManifest("solve", {"config": args.config, "name": cfg.name, "expansion_N": cfg.N, "pipeline": cfg.pipeline, "nodes": cfg.nodes}, out)
    config = SolverConfig(nodes=cfg.nodes, tol=cfg.tol)
    sols = _run_problem(cfg.name, cfg.problem, _pipelines(cfg.pipeline), [cfg.N], config, cfg.T_bracket, man)
    for (pipe, N), sol in sols.items():
        if sol.transversality.size:
            man.metrics[f"transversality {_SHORT[pipe]}"] = " ".join(_fmt(v) for v in sol.transversality)
    return man


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracocp", description="Expansion-based fractional derivatives and optimal control.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="approximate a fractional derivative of a test function")
    p.add_argument("--fn", required=True, help="t4 or exp2t")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", default="2", help="expansion order(s), comma separated")
    p.add_argument("--N", default="6", help="truncation index(es), comma separated")
    p.add_argument("--m", type=int, default=101, help="grid nodes on [0, 1]")
    p.add_argument("--caputo", action="store_true", help="approximate the Caputo derivative")
    p.set_defaults(handler=cmd_approx)

    p = sub.add_parser("example1", help="fixed-horizon example with known solution")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--N", default="2,3")
    p.add_argument("--pipeline", default="both", choices=PIPELINES)
    p.add_argument("--m", type=int, default=1001)
    p.set_defaults(handler=cmd_example1)

    p = sub.add_parser("example2", help="free-horizon example")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--N", default="2")
    p.add_argument("--pipeline", default="both", choices=PIPELINES)
    p.add_argument("--m", type=int, default=1001)
    p.add_argument("--bracket", help="horizon bracket 'lo,hi' (default 1,2)")
    p.set_defaults(handler=cmd_example2)

    p = sub.add_parser("solve", help="solve a problem described by a YAML file")
    p.add_argument("config")
    p.set_defaults(handler=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    try:
        if getattr(args, "m", 2) < 2:
            raise UsageError("--m must be at least 2")
        out.mkdir(parents=True, exist_ok=True)
        man = args.handler(args, out)
        man.write()
    except (UsageError, BracketError, SingularReductionError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SingularJacobianError, IntegrationBlowupError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FracOcpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not man.converged:
        print("solver did not converge; see manifest", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
