from __future__ import annotations

import textwrap

import pytest

from fracocp.config import load_config, parse_config
from fracocp.errors import ConfigError
from fracocp.focp import Curve, FixedTInequality, FreeTFixedX


def cfg(text):
    return parse_config(textwrap.dedent(text))


def test_preset():
    rc = cfg("""
        preset: example1
        alpha: 0.3
        expansion_N: 3
    """)
    assert rc.problem.alpha == 0.3 and rc.N == 3 and rc.pipeline == "both"
    assert rc.nodes == 1001 and rc.tol == 1e-10 and rc.T_bracket is None
    rc = cfg("preset: example2\n")
    assert isinstance(rc.problem.terminal, FreeTFixedX) and rc.T_bracket == (1.0, 2.0)


def test_model_with_inequality():
    rc = cfg("""
        model: quadratic
        alpha: 0.5
        M: 1.0
        N: 0.0
        x_a: 1.0
        terminal:
          type: fixed_T_inequality
          T: 1.0
          K: 0.5
        pipeline: fractional-conditions
    """)
    assert isinstance(rc.problem.terminal, FixedTInequality)
    assert rc.problem.terminal.K == 0.5 and rc.problem.x_a == 1.0


def test_curve_terminal_and_cost():
    rc = cfg("""
        model: quadratic
        terminal: {type: curve, c0: 1.0, c1: -0.5, bracket: [0.5, 2.0]}
        terminal_cost: {weight: 2.0}
    """)
    term = rc.problem.terminal
    assert isinstance(term, Curve)
    assert term.gamma(2.0) == pytest.approx(0.0) and term.gamma_dot(1.0) == -0.5
    assert rc.problem.phi(0.0, 3.0) == pytest.approx(18.0)
    assert rc.problem.phi_x(0.0, 3.0) == pytest.approx(12.0)
    assert rc.T_bracket == (0.5, 2.0)


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("model: quadratic\nM: 0.0\nN: 0.0\nterminal: {type: fixed_T_free_x, T: 1.0}\n", 2, "(M, N)"),
        ("preset: example1\nalpha: 1.5\n", 2, "alpha"),
        ("preset: example1\nfoo: 1\n", 2, "unknown key"),
        ("preset: example1\nalpha: [1, 2]\n", 2, "wrong type"),
        ("preset: example1\nexpansion_N: 1\n", 2, "expansion_N"),
        ("preset: nope\n", 1, "unknown preset"),
        ("model: quadratic\nterminal:\n  type: free_T_fixed_x\n  x_T: 1.0\n", 3, "bracket"),
        ("model: quadratic\nterminal:\n  type: fixed_T_free_x\n  T: 1.0\n  K: 2.0\n", 5, "unknown key"),
        ("model: quadratic\nterminal:\n  type: warp\n", 3, "unknown terminal type"),
        ("preset: example1\nmodel: quadratic\n", 1, "exactly one"),
        ("preset: example1\n  alpha: : 0.5\n", 2, ""),
        ("preset: example1\npipeline: sideways\n", 2, "pipeline"),
        ("model: tracking\na: 1.0\nterminal: {type: fixed_T_free_x, T: 2.0}\n", 2, "a = 0"),
    ],
)
def test_errors_cite_lines(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}: ")
    assert fragment in str(info.value)


def test_load_from_file(tmp_path):
    path = tmp_path / "p.yaml"
    path.write_text("preset: lq\nnodes: 201\n")
    rc = load_config(path)
    assert rc.nodes == 201 and rc.name == "lq"
