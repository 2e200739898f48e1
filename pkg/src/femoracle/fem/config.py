"""Reader for the textual key-value problem file.

One setting per line, blank lines and ``#`` comments ignored::

    N 8
    Y 1
    rho 1
    domain 0 1
    dirichlet 0 0      # repeatable, inclusive node-index interval
    flag 4             # optional, default 4 Y / (rho delta^2)
    fmt 12 10
    K 3
    L 3
    layout serial
    series standard    # optional
    x0 1               # optional, a number or leading-one
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from ..fixedpoint import FixedPointFormat
from ..logicgeo import LAYOUTS
from ..newton import LEADING_ONE, NewtonConfig
from .model import FemProblem1D
from .oracle import OracleConfig
from .series import VARIANTS


class ConfigError(ValueError):
    pass


_ARITY = {"N": 1, "Y": 1, "rho": 1, "domain": 2, "dirichlet": 2, "flag": 1, "fmt": 2,
          "K": 1, "L": 1, "layout": 1, "series": 1, "x0": 1}


def _number(tok: str, lineno: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"line {lineno}: not a number: {tok!r}") from None


def _integer(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ConfigError(f"line {lineno}: not an integer: {tok!r}") from None


def parse_config(text: str) -> tuple[FemProblem1D, OracleConfig]:
    vals: dict = {}
    dirichlet = []
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        if key not in _ARITY:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if len(args) != _ARITY[key]:
            raise ConfigError(f"line {lineno}: {key} expects {_ARITY[key]} value(s), got {len(args)}")
        if key == "dirichlet":
            dirichlet.append((_integer(args[0], lineno), _integer(args[1], lineno), lineno))
            continue
        if key in vals:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        lines[key] = lineno
        if key in ("N", "K", "L"):
            vals[key] = _integer(args[0], lineno)
        elif key in ("Y", "rho", "flag"):
            vals[key] = _number(args[0], lineno)
        elif key == "domain":
            vals[key] = (_number(args[0], lineno), _number(args[1], lineno))
        elif key == "fmt":
            vals[key] = (_integer(args[0], lineno), _integer(args[1], lineno))
        elif key == "layout":
            if args[0] not in LAYOUTS:
                raise ConfigError(f"line {lineno}: layout must be one of {', '.join(LAYOUTS)}")
            vals[key] = args[0]
        elif key == "series":
            if args[0] not in VARIANTS:
                raise ConfigError(f"line {lineno}: series must be one of {', '.join(VARIANTS)}")
            vals[key] = args[0]
        elif key == "x0":
            vals[key] = args[0] if args[0] == LEADING_ONE else _number(args[0], lineno)
    if "N" not in vals:
        raise ConfigError("missing required key 'N'")

    def build(key, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (ValueError, OverflowError) as exc:
            where = f"line {lines[key]}: " if key in lines else ""
            raise ConfigError(f"{where}{exc}") from None

    for lo, hi, lineno in dirichlet:
        if not 0 <= lo <= hi < vals["N"]:
            raise ConfigError(f"line {lineno}: Dirichlet interval [{lo}, {hi}] outside 0..{vals['N'] - 1}")
    problem = build("N", lambda: FemProblem1D(
        vals["N"], vals.get("Y", Fraction(1)), vals.get("rho", Fraction(1)),
        vals.get("domain", (Fraction(0), Fraction(1))),
        tuple((lo, hi) for lo, hi, _ in dirichlet), vals.get("flag")))
    r, p = vals.get("fmt", (12, 10))
    fmt = build("fmt", lambda: FixedPointFormat(r, p, True))
    newton = build("L", lambda: NewtonConfig(vals.get("L", 3), vals.get("x0", 1), (Fraction(1, 1 << p), 1)))
    cfg = build("K", lambda: OracleConfig(fmt, vals.get("K", 3), newton,
                                          vals.get("layout", "serial"), vals.get("series", "standard")))
    return problem, cfg


def load_config(path) -> tuple[FemProblem1D, OracleConfig]:
    return parse_config(Path(path).read_text())


DEFAULT_CONFIG = """\
N 8
Y 1
rho 1
domain 0 1
flag 256
fmt 12 10
K 3
L 3
layout serial
"""
