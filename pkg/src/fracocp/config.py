"""YAML problem files for the ``solve`` subcommand.

A file either names a preset::

    preset: example1
    alpha: 0.5
    expansion_N: 3

or assembles a problem from a catalog model::

    model: quadratic          # or: tracking
    alpha: 0.5
    M: 1.0
    N: 0.0
    x_a: 1.0
    terminal_cost: {weight: 0.0}
    terminal:
      type: fixed_T_inequality
      T: 1.0
      K: 0.5
    pipeline: fractional-conditions
    expansion_N: 2
    nodes: 1001

Terminal types are ``fixed_T_free_x`` (``T``), ``free_T_fixed_x``
(``x_T``, ``bracket``), ``fixed_T_fixed_x`` (``T``, ``x_T``),
``free_T_free_x`` (``bracket``), ``curve`` (line ``x = c0 + c1 T``;
``c0``, ``c1``, ``bracket``) and ``fixed_T_inequality`` (``T``, ``K``).
Every validation error names the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .catalog import EXAMPLE2_BRACKET, MODELS, example1, example2, lq_problem
from .errors import ConfigError, FracOcpError
from .focp import (
    Curve,
    FixedTFixedX,
    FixedTFreeX,
    FixedTInequality,
    FocpProblem,
    FreeTFixedX,
    FreeTFreeX,
)

PIPELINES = ("fractional-conditions", "reduce-then-classical", "both")

_TOP_KEYS = {
    "preset", "model", "alpha", "a", "M", "N", "x_a", "terminal", "terminal_cost",
    "expansion_N", "pipeline", "nodes", "tol", "name",
}
_TERMINAL_KEYS = {
    "fixed_T_free_x": ({"T"}, set()),
    "free_T_fixed_x": ({"x_T"}, {"bracket"}),
    "fixed_T_fixed_x": ({"T", "x_T"}, set()),
    "free_T_free_x": (set(), {"bracket"}),
    "curve": ({"c0", "c1"}, {"bracket"}),
    "fixed_T_inequality": ({"T", "K"}, set()),
}


@dataclass
class RunConfig:
    problem: FocpProblem
    N: int
    pipeline: str
    nodes: int
    tol: float
    T_bracket: tuple[float, float] | None
    name: str


class _Node:
    """Parsed mapping that remembers the line of every key (1-based)."""

    def __init__(self, node: yaml.MappingNode):
        self.line = node.start_mark.line + 1
        self.values: dict[str, object] = {}
        self.lines: dict[str, int] = {}
        for k, v in node.value:
            key = yaml.safe_load(yaml.serialize(k))
            if key in self.values:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            self.lines[key] = k.start_mark.line + 1
            self.values[key] = _Node(v) if isinstance(v, yaml.MappingNode) else _plain(v)

    def __contains__(self, key) -> bool:
        return key in self.values

    def line_of(self, key) -> int:
        return self.lines.get(key, self.line)

    def check_keys(self, allowed: set[str], required: set[str] = frozenset(), where: str = "") -> None:
        for k in self.values:
            if k not in allowed:
                raise ConfigError(f"unknown key {k!r}{where}", self.line_of(k))
        for k in required:
            if k not in self.values:
                raise ConfigError(f"missing key {k!r}{where}", self.line)

    def get(self, key, kind, default=None, required: bool = False):
        if key not in self.values:
            if required:
                raise ConfigError(f"missing key {key!r}", self.line)
            return default
        v = self.values[key]
        line = self.line_of(key)
        try:
            if kind is float:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise TypeError
                return float(v)
            if kind is int:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise TypeError
                return v
            if kind is str:
                if not isinstance(v, str):
                    raise TypeError
                return v
            if kind == "pair":
                if not (isinstance(v, list) and len(v) == 2):
                    raise TypeError
                return (float(v[0]), float(v[1]))
            if kind is _Node:
                if not isinstance(v, _Node):
                    raise TypeError
                return v
        except (TypeError, ValueError):
            raise ConfigError(f"{key!r} has the wrong type (expected {getattr(kind, '__name__', kind)})", line) from None
        raise AssertionError(kind)


def _plain(node):
    return yaml.safe_load(yaml.serialize(node))


def _terminal(node: _Node):
    kind = node.get("type", str, required=True)
    if kind not in _TERMINAL_KEYS:
        raise ConfigError(f"unknown terminal type {kind!r}", node.line_of("type"))
    required, optional = _TERMINAL_KEYS[kind]
    node.check_keys(required | optional | {"type"}, required, where=f" for terminal type {kind}")
    g = {k: node.get(k, float) for k in required}
    bracket = node.get("bracket", "pair") if "bracket" in optional else None
    if kind == "fixed_T_free_x":
        spec = FixedTFreeX(T=g["T"])
    elif kind == "free_T_fixed_x":
        spec = FreeTFixedX(x_T=g["x_T"])
    elif kind == "fixed_T_fixed_x":
        spec = FixedTFixedX(T=g["T"], x_T=g["x_T"])
    elif kind == "free_T_free_x":
        spec = FreeTFreeX()
    elif kind == "curve":
        c0, c1 = g["c0"], g["c1"]
        spec = Curve(gamma=lambda T: c0 + c1 * T, gamma_dot=lambda T: c1)
    else:
        spec = FixedTInequality(T=g["T"], K=g["K"])
    if spec.free_time and bracket is None:
        raise ConfigError(f"terminal type {kind} needs a bracket [T_lo, T_hi]", node.line)
    return spec, bracket


def _terminal_cost(node: _Node | None) -> dict:
    if node is None:
        return {}
    node.check_keys({"weight"}, {"weight"}, where=" in terminal_cost")
    w = node.get("weight", float)
    return dict(
        phi=lambda t, x: w * x * x,
        phi_t=lambda t, x: 0.0 * x,
        phi_x=lambda t, x: 2.0 * w * x,
    )


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        root = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"{source}: {exc.problem}", mark.line + 1 if mark else None) from None
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError(f"{source}: top level must be a mapping", 1)
    top = _Node(root)
    top.check_keys(_TOP_KEYS)
    alpha = top.get("alpha", float, 0.5)
    N = top.get("expansion_N", int, 2)
    pipeline = top.get("pipeline", str, "both")
    if pipeline not in PIPELINES:
        raise ConfigError(f"pipeline must be one of {', '.join(PIPELINES)}", top.line_of("pipeline"))
    nodes = top.get("nodes", int, 1001)
    tol = top.get("tol", float, 1e-10)
    if N < 2:
        raise ConfigError("expansion_N must be at least 2", top.line_of("expansion_N"))
    if nodes < 2:
        raise ConfigError("nodes must be at least 2", top.line_of("nodes"))
    if not tol > 0:
        raise ConfigError("tol must be positive", top.line_of("tol"))

    if ("preset" in top) == ("model" in top):
        raise ConfigError("give exactly one of 'preset' or 'model'", top.line)
    bracket = None
    try:
        if "preset" in top:
            preset = top.get("preset", str)
            extra = _TOP_KEYS - {"preset", "alpha", "expansion_N", "pipeline", "nodes", "tol", "name"}
            for k in extra:
                if k in top:
                    raise ConfigError(f"{k!r} cannot be combined with a preset", top.line_of(k))
            if preset == "example1":
                problem = example1(alpha)
            elif preset == "example2":
                problem, bracket = example2(alpha), EXAMPLE2_BRACKET
            elif preset == "lq":
                problem = lq_problem()
            else:
                raise ConfigError(f"unknown preset {preset!r}", top.line_of("preset"))
            name = top.get("name", str, preset)
        else:
            model = top.get("model", str)
            if model not in MODELS:
                raise ConfigError(f"unknown model {model!r}; choose from {sorted(MODELS)}", top.line_of("model"))
            if "terminal" not in top:
                raise ConfigError("missing key 'terminal'", top.line)
            spec, bracket = _terminal(top.get("terminal", _Node))
            kw = {k: top.get(k, float) for k in ("a", "M", "N", "x_a") if k in top}
            kw.update(_terminal_cost(top.get("terminal_cost", _Node)))
            name = top.get("name", str, model)
            try:
                problem = MODELS[model](alpha, spec, name, **kw)
            except FracOcpError as exc:
                key = _blame(str(exc), top)
                raise ConfigError(str(exc), top.line_of(key) if key else top.line) from None
    except ConfigError as exc:
        if exc.line is None:
            raise ConfigError(str(exc), top.line) from None
        raise
    except FracOcpError as exc:
        raise ConfigError(str(exc), top.line_of("alpha") if "alpha" in str(exc) else top.line) from None
    return RunConfig(problem, N, pipeline, nodes, tol, bracket, name)


def _blame(message: str, top: _Node) -> str | None:
    for key in ("(M, N)", "alpha", "x_a", "a=", "a = "):
        if key in message:
            return {"(M, N)": "M" if "M" in top else "N", "a=": "a", "a = ": "a"}.get(key, key)
    return None


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))
