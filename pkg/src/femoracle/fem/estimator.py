"""Closed-form qubit counts and runtime classes, side by side with built circuits.

Every formula assumes the carry-ripple adder, whose ancilla need is a single
carry qubit (``ADD_ANCILLAS``).  Rows marked exact are compared against
``resources()`` of the corresponding builder; the others are reported as
asymptotic classes only.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

from ..newton import num_x_registers

ADD_ANCILLAS = 1


@dataclass(frozen=True)
class AdderRow:
    method: str
    runtime: str
    memory: str
    exact: bool

    def qubits(self, r: int) -> float:
        return {
            "carry-ripple": 2 * r + 1,
            "carry-select": 2 * r + math.sqrt(r),
            "conditional-sum": 7 * r - 6,
            "carry-lookahead": 4 * r - math.log2(r) - 1,
            "fourier": 2 * r,
        }[self.method]


ADDERS = {
    "carry-ripple": AdderRow("carry-ripple", "O(r)", "2r+1", True),
    "carry-select": AdderRow("carry-select", "O(sqrt r)", "2r+sqrt(r)", False),
    "conditional-sum": AdderRow("conditional-sum", "O(log2 r)", "~7r-6", False),
    "carry-lookahead": AdderRow("carry-lookahead", "O(log2 r)", "4r-log2(r)-1", False),
    "fourier": AdderRow("fourier", "O(r^2)", "2r", False),
}

# quantum-classical exponentiators: runtime class and memory, not built here
EXPONENTIATORS = {
    "carry-ripple": ("O(r^3)", "5r+3"),
    "conditional-sum": ("O(r log2^2 r)", "~1.9r^2"),
    "carry-lookahead": ("O(r log2^2 r)", "~1.9r^2"),
    "fourier": ("O(r^3)", "2r+3"),
    "fourier-fast": ("O(r^2)", "9r+2"),
}


def n_add(r: int) -> int:
    return 2 * r + ADD_ANCILLAS


def n_mul(r: int) -> int:
    return 3 * (r + 1) + ADD_ANCILLAS


def n_poly(r: int, degree: int) -> int:
    return (degree + 1) * (r + 1) + ADD_ANCILLAS


def n_poly_ancillas(r: int, degree: int) -> int:
    return (degree - 1) * (r + 1) + ADD_ANCILLAS


def n_sqrt(r: int, L: int) -> int:
    return (L + 4) * r + ADD_ANCILLAS + r


def n_sqrt_oracle_ancillas(r: int, L: int) -> int:
    """Square-root ancillas inside the oracle, new target register included."""
    return (L + 4) * r + ADD_ANCILLAS


def n_rec(r: int, L: int) -> int:
    return (L + 3) * r + ADD_ANCILLAS


def n_insq(r: int, L: int) -> int:
    return (L + 3) * r + ADD_ANCILLAS


def n_inmul(r: int, L: int) -> int:
    return (L + 5) * r + ADD_ANCILLAS


def n_exp(r: int, L: int) -> int:
    return (L + 7) * r + ADD_ANCILLAS


def n_qc_exp(r: int, L: int) -> int:
    return n_exp(r, L) - r


def n_sig(r: int, L: int) -> int:
    return r + n_qc_exp(r, L)


def n_gt(r: int) -> int:
    return 2 * r + 1 + ADD_ANCILLAS


def n_delta(r: int) -> int:
    """Equality test after lowering its r-controlled NOT with r-2 ancillas."""
    return 2 * r + 1 + max(r - 2, 0)


def n_geo_ancillas(n_dirichlet: int, n_geo: int) -> int:
    return 8 * n_dirichlet + 4 * n_geo - 1


@dataclass(frozen=True)
class FormulaRow:
    name: str
    formula: str
    predicted: float
    exact: bool
    runtime: str
    actual: int | None = None

    @property
    def match(self) -> bool | None:
        if not self.exact or self.actual is None:
            return None
        return self.actual == self.predicted


def estimate_resources(r: int, p: int, K: int, L: int, n_geo: int = 1, n_dirichlet: int = 0,
                       adder: str = "carry-ripple", nbits: int | None = None) -> list[FormulaRow]:
    """Predicted counts for every component; ``K`` is the series order (degree 2K-1)."""
    if adder not in ADDERS:
        raise ValueError(f"unknown adder {adder!r}; choose from {', '.join(ADDERS)}")
    if min(r, K, L, n_geo) < 1 or p < 0 or n_dirichlet < 0:
        raise ValueError("parameters must be positive")
    row = ADDERS[adder]
    deg = 2 * K - 1
    rows = [
        FormulaRow("ADD", row.memory, row.qubits(r), row.exact, row.runtime),
        FormulaRow("MUL", "3(r+1)+1", n_mul(r), True, "O(r^2)"),
        FormulaRow("POLY", "(D+1)(r+1)+1", n_poly(r, deg), True, "O(D r^2)"),
        FormulaRow("SQRT", "(L+4)r+1+r", n_sqrt(r, L), L >= 2, "O(L r^2)"),
        FormulaRow("REC", "(L+3)r+1", n_rec(r, L), L >= 3, "O(L r^2)"),
        FormulaRow("inSQ", "(L+3)r+1", n_insq(r, L), True, "O(L r^2)"),
        FormulaRow("inMUL", "(L+5)r+1", n_inmul(r, L), L >= 2, "O(L r^2)"),
        FormulaRow("EXP", "(L+7)r+1", n_exp(r, L), L >= 2, "O(L r^3)"),
        FormulaRow("qcEXP", "(L+6)r+1", n_qc_exp(r, L), L >= 2, "O(L r^3)"),
        FormulaRow("SIG", "(L+7)r+1", n_sig(r, L), L >= 2, "O(J L log2(K kappa) r^2)"),
        FormulaRow("GT", "2r+2", n_gt(r), True, "O(r)"),
        FormulaRow("DELTA", "3r-1", n_delta(r), r >= 2, "O(log2 r)"),
        FormulaRow("GEO_ANC", "8N_D+4N_geo-1", n_geo_ancillas(n_dirichlet, n_geo), n_geo == 1,
                   "O((N_geo+N_D) r)"),
        FormulaRow("SQRT_ANC_ORACLE", "(L+4)r+1", n_sqrt_oracle_ancillas(r, L), L >= 2, "O(L r^2)"),
        FormulaRow("POLY_ANC_ORACLE", "(D-1)(r+1)+1", n_poly_ancillas(r, deg), False, "O(D r^2)"),
        FormulaRow("H_PRIME_ANC", "r-1", r - 1, False, "O(r)"),
    ]
    if nbits is not None:
        from .oracle import oracle_qubit_count
        rows.append(FormulaRow("ORACLE", "derived layout", oracle_qubit_count(
            nbits, r, K, L, n_dirichlet, n_geo), n_geo == 1, "O((K+L) r^2 + log2(N_geo+N_D))"))
    rows.append(FormulaRow("ORACLE_ASYMPTOTIC", "O((L+K+N_geo+N_D) r)",
                           (L + K + n_geo + n_dirichlet) * r, False, "class only"))
    return rows


def exponentiator_rows() -> list[tuple[str, str, str]]:
    return [(k, *v) for k, v in EXPONENTIATORS.items()]


def _oracle_parts(circuit, names) -> int:
    return sum(len(circuit.registers[n]) for n in names if n in circuit.registers)


def measure_resources(problem, cfg, adder: str = "carry-ripple") -> list[FormulaRow]:
    """Predicted rows next to the qubit counts of freshly built circuits.

    Only rows flagged exact get a circuit; the oracle rows come from one
    build of the full oracle for ``problem``.
    """
    from dataclasses import replace

    from ..adders import build_add
    from ..circuit import lower_mcx
    from ..logicgeo import build_eq, build_gt
    from ..mulpoly import build_mul
    from ..newton import (build_exp, build_inmul, build_insq, build_qc_exp, build_rec,
                          build_sig, build_sqrt)
    from .oracle import build_oracle_theta, oracle_qubit_count
    from .series import arccos_series_spec

    fmt, r, L = cfg.fmt, cfg.fmt.r, cfg.newton.L
    ufmt = fmt.unsigned()
    newton = cfg.newton
    oracle = build_oracle_theta(problem, cfg)
    m = num_x_registers(L)
    builders = {
        "ADD": lambda: build_add(r).num_qubits,
        "MUL": lambda: build_mul(fmt).num_qubits,
        "POLY": lambda: _poly_qubits(arccos_series_spec(cfg.K, fmt, cfg.series)),
        "SQRT": lambda: build_sqrt(ufmt, newton).num_qubits,
        "REC": lambda: build_rec(ufmt, newton).num_qubits,
        "inSQ": lambda: build_insq(ufmt, newton).num_qubits,
        "inMUL": lambda: build_inmul(ufmt, newton).num_qubits,
        "EXP": lambda: build_exp(ufmt, newton).num_qubits,
        "qcEXP": lambda: build_qc_exp(Fraction(1, 2), ufmt, newton).num_qubits,
        "SIG": lambda: build_sig([0, 1], 2, ufmt, newton).num_qubits,
        "GT": lambda: build_gt(r).num_qubits,
        "DELTA": lambda: lower_mcx(build_eq(r)).num_qubits,
        "GEO_ANC": lambda: _oracle_parts(oracle, ("geo_cmp", "geo_work", "flagged")),
        "SQRT_ANC_ORACLE": lambda: _oracle_parts(
            oracle, ["sqrt", "carry", "nr_A1", "nr_A2", "nr_A3"] + [f"nr_x{k}" for k in range(m)]),
        "ORACLE": lambda: oracle.num_qubits,
    }
    rows = estimate_resources(r, fmt.p, cfg.K, L, 1, len(problem.dirichlet), adder, problem.nbits)
    out = []
    for row in rows:
        if row.name == "ORACLE":
            row = replace(row, predicted=oracle_qubit_count(
                problem.nbits, r, cfg.K, L, len(problem.dirichlet), 1, newton.coherent, cfg.layout))
        if row.exact and row.name in builders:
            row = replace(row, actual=builders[row.name]())
        out.append(row)
    return out


def _poly_qubits(spec) -> int:
    from ..mulpoly import build_poly
    return build_poly(spec).num_qubits
