"""The angle oracle |i, j>|0> -> |i, j>|sign(H_ij), theta_ij> for the 1D chain.

Pipeline: condition flags (Dirichlet and domain interval tests, edge test,
Kronecker deltas), flag-controlled constant loads of H' = H / max|H|, flags
cleared, two's complement to sign-magnitude, Newton square root of |H'|,
and the arccos series by Horner's scheme.  The sign is copied to its own
output qubit and everything except sign and theta is uncomputed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from ..adders import emit_qc_add, emit_qc_sub
from ..circuit import Circuit, resources, run_batch
from ..fixedpoint import (FixedPointFormat, decode_code, encode_code, ref_poly, ref_sqrt_nr,
                          sm_code)
from ..logicgeo import (LAYOUTS, PARALLEL, SERIAL, cascade_ancillas, emit_and, emit_eq,
                        emit_interval_flags, emit_or, emit_qc_eq)
from ..mulpoly import PolynomialSpec, emit_csm, emit_poly
from ..newton import ChainRegisters, NewtonConfig, emit_sqrt, num_x_registers
from .model import FemProblem1D, h_prime_entry
from .series import STANDARD, VARIANTS, series_polynomial


@dataclass(frozen=True)
class OracleConfig:
    fmt: FixedPointFormat = FixedPointFormat(12, 10)
    K: int = 3
    newton: NewtonConfig = field(default_factory=lambda: NewtonConfig(3, 1))
    layout: str = SERIAL
    series: str = STANDARD

    def __post_init__(self):
        if not self.fmt.signed:
            raise ValueError("the oracle pipeline uses a signed format")
        if not 1 <= self.fmt.p < self.fmt.r:
            raise ValueError("need 1 <= p < r so that 1 and 1.5 are representable")
        if self.K < 1:
            raise ValueError("series order K must be >= 1")
        if self.layout not in LAYOUTS:
            raise ValueError(f"layout must be one of {LAYOUTS}")
        if self.series not in VARIANTS:
            raise ValueError(f"series must be one of {VARIANTS}")

    @property
    def degree(self) -> int:
        return 2 * self.K - 1

    def poly_coefficients(self):
        return series_polynomial(self.K, self.series)

    @property
    def unsigned_fmt(self) -> FixedPointFormat:
        return self.fmt.unsigned()


def h_prime_constants(problem: FemProblem1D, fmt: FixedPointFormat) -> dict[str, int]:
    """Codes loaded for the four cases: flag diagonal, edge and bulk diagonal, neighbour."""
    m = problem.max_norm
    u = problem.unit
    return {
        "flag": encode_code(problem.F / m, fmt),
        "edge": encode_code(u / m, fmt),
        "bulk": encode_code(2 * u / m, fmt),
        "neighbour": encode_code(-u / m, fmt),
    }


def _controlled_load(c: Circuit, code: int, target, pos: list, neg: list):
    """target ^= code when every ``pos`` qubit is 1 and every ``neg`` qubit is 0."""
    if not code:
        return
    for q in neg:
        c.x(q)
    controls = list(pos) + list(neg)
    for k, t in enumerate(target):
        if code >> k & 1:
            c.mcx(controls, t)
    for q in neg:
        c.x(q)


def build_oracle_theta(problem: FemProblem1D, cfg: OracleConfig) -> Circuit:
    fmt, ufmt = cfg.fmt, cfg.unsigned_fmt
    r, p, n = fmt.r, fmt.p, problem.nbits
    N = problem.N
    c = Circuit()
    i = c.allocate("i", n).qubits
    j = c.allocate("j", n).qubits
    sign = c.allocate("sign", 1).qubits[0]
    theta = c.allocate("theta", r + 1, fmt).qubits
    hp = c.allocate("h_prime", r + 1, fmt, ancilla=True).qubits
    S = c.allocate("sqrt", r, ufmt, ancilla=True).qubits
    carry = c.allocate("carry", 1, ancilla=True).qubits[0]
    m = num_x_registers(cfg.newton.L)
    work = [c.allocate(f"nr_A{k}", r, ufmt, ancilla=True).qubits for k in (1, 2, 3)]
    xregs = [c.allocate(f"nr_x{k}", r, ufmt, ancilla=True).qubits for k in range(m)]
    nflags = c.allocate("nr_flags", r - 1, ancilla=True).qubits if cfg.newton.coherent else ()
    poly_work = [c.allocate(f"poly_w{k}", r + 1, fmt, ancilla=True).qubits
                 for k in range(1, cfg.degree)]

    # condition block: every comparison writes its own flag qubit
    domain_iv = [(0, N - 1)]
    n_terms_dir = 2 * len(problem.dirichlet)
    n_cmp = 2 * n_terms_dir + 2 * len(domain_iv)
    cmp = c.allocate("geo_cmp", n_cmp, ancilla=True).qubits
    # without Dirichlet terms the domain test writes straight into the flag
    n_work = n_terms_dir + len(domain_iv) + cascade_ancillas(n_terms_dir + 1) if n_terms_dir else 0
    gwork = c.allocate("geo_work", n_work, ancilla=True).qubits if n_work else ()
    flagged = c.allocate("flagged", 1, ancilla=True).qubits[0]
    edge = c.allocate("edge", 1, ancilla=True).qubits[0]
    iext = c.allocate("i_ext", 1, ancilla=True).qubits[0]
    jext = c.allocate("j_ext", 1, ancilla=True).qubits[0]
    d_eq = c.allocate("delta_eq", 1, ancilla=True).qubits[0]
    d_nb = c.allocate("delta_nb", 1, ancilla=True).qubits[0]
    tree = cfg.layout == PARALLEL

    def conditions():
        k = 0
        w = list(gwork)
        terms = []
        with c.capture() as tests:
            for lo, hi in problem.dirichlet:
                for idx in (i, j):
                    emit_interval_flags(c, idx, lo, hi, cmp[k:k + 2], cfg.layout)
                    k += 2
            for lo, hi in domain_iv:
                emit_interval_flags(c, i, lo, hi, cmp[k:k + 2], cfg.layout)
                k += 2
            # pairwise ANDs: node inside an interval
            for t in range(n_terms_dir):
                q = w.pop(0)
                c.ccx(cmp[2 * t], cmp[2 * t + 1], q)
                terms.append(q)
        c.extend(tests)
        if n_terms_dir == 0:
            # flagged = not (i in domain)
            emit_and(c, cmp[k - 2:k], flagged)
            c.x(flagged)
        else:
            with c.capture() as outside:
                q = w.pop(0)
                c.ccx(cmp[k - 2], cmp[k - 1], q)
                c.x(q)
            c.extend(outside)
            emit_or(c, terms + [q], flagged, w, tree)
            c.emit_inverse(outside)
        c.emit_inverse(tests)
        # edge: i == 0 or i == N-1 (mutually exclusive, so XOR both tests)
        emit_qc_eq(c, 0, i, edge)
        emit_qc_eq(c, N - 1, i, edge)
        # Kronecker deltas; the shifted copies of i carry an extension bit so
        # that i+1 and i-1 never wrap onto a valid j
        emit_eq(c, i, j, d_eq)
        ie, je = list(i) + [iext], list(j) + [jext]
        emit_qc_add(c, 1, ie)
        emit_eq(c, ie, je, d_nb)
        emit_qc_sub(c, 2, ie)
        emit_eq(c, ie, je, d_nb)
        emit_qc_add(c, 1, ie)

    codes = h_prime_constants(problem, fmt)
    regs = ChainRegisters(hp[:r], xregs, work, carry, nflags)
    with c.capture() as forward:
        with c.capture() as flags_blk:
            conditions()
        c.extend(flags_blk)
        _controlled_load(c, codes["flag"], hp, [flagged, d_eq], [])
        _controlled_load(c, codes["edge"], hp, [edge, d_eq], [flagged])
        _controlled_load(c, codes["bulk"], hp, [d_eq], [flagged, edge])
        _controlled_load(c, codes["neighbour"], hp, [d_nb], [flagged])
        c.emit_inverse(flags_blk)
        emit_csm(c, hp)
        emit_sqrt(c, regs, S, cfg.newton, p)
    c.extend(forward)
    emit_poly(c, _poly_spec(cfg), S, poly_work, theta, carry, b_signed=False)
    c.cx(hp[r], sign)
    c.emit_inverse(forward)
    return c


def _poly_spec(cfg: OracleConfig) -> PolynomialSpec:
    return PolynomialSpec(cfg.poly_coefficients(), cfg.fmt)


def oracle_qubit_count(n: int, r: int, K: int, L: int, n_dirichlet: int, n_geo: int = 1,
                       coherent: bool = False, layout: str = SERIAL) -> int:
    """Total qubits of ``build_oracle_theta`` for index width n (derived from its layout)."""
    from .estimator import n_geo_ancillas
    m = num_x_registers(L)
    total = 2 * n + 1 + (r + 1)           # indices, sign, theta
    total += (r + 1) + r + 1              # H', sqrt target, shared carry
    total += (m + 3) * r                  # Newton work and iterate registers
    total += (coherent and r - 1 or 0)
    total += (2 * K - 2) * (r + 1)        # Horner work registers
    total += n_geo_ancillas(n_dirichlet, n_geo)
    total += 1 + 4                        # edge flag; two extensions, two delta flags
    if layout == PARALLEL:
        total += 2 * (2 * n_dirichlet + n_geo) * n
    return total


# -- classical mirror ------------------------------------------------------

def ref_oracle(problem: FemProblem1D, cfg: OracleConfig, i: int, j: int) -> dict:
    """Every intermediate code of the pipeline, computed classically."""
    fmt, ufmt = cfg.fmt, cfg.unsigned_fmt
    h = h_prime_entry(i, j, problem)
    hcode = encode_code(h, fmt)
    s, mag = sm_code(hcode, fmt)
    root = ref_sqrt_nr(mag, ufmt, cfg.newton.L, cfg.newton.ref_x0())
    theta = ref_poly(cfg.poly_coefficients(), root, fmt)
    return {"h_prime": h, "h_code": hcode, "sign": s, "magnitude": mag, "sqrt": root, "theta": theta}


@dataclass
class PairResult:
    i: int
    j: int
    sign: int
    theta_code: int
    theta: float
    match: bool
    deviation: float | None
    flag_entry: bool
    expected_sign: int
    expected_theta: int


@dataclass
class OracleReport:
    pairs: list
    clean: bool
    qubits: int
    gates: int

    @property
    def mismatches(self) -> list:
        return [p for p in self.pairs if not p.match]

    @property
    def max_deviation(self) -> float:
        devs = [p.deviation for p in self.pairs if p.deviation is not None]
        return max(devs) if devs else 0.0

    @property
    def ok(self) -> bool:
        return self.clean and not self.mismatches

    def table(self) -> list[str]:
        rows = ["i j sign theta_code theta ref_match deviation"]
        for p in self.pairs:
            dev = "flag" if p.deviation is None else f"{p.deviation:.6f}"
            rows.append(f"{p.i} {p.j} {p.sign} {p.theta_code} {p.theta:.6f} "
                        f"{'yes' if p.match else 'no'} {dev}")
        return rows


def banded_pairs(N: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(N) for b in range(N) if abs(a - b) <= 1]


def verify_oracle(problem: FemProblem1D, cfg: OracleConfig, circuit: Circuit | None = None,
                  far_samples: int = 8, seed: int = 0) -> OracleReport:
    """Simulate every banded pair plus sampled far pairs against the classical mirror.

    All pairs run together through the bit-sliced simulator, one lane each.
    """
    c = circuit if circuit is not None else build_oracle_theta(problem, cfg)
    N = problem.N
    pairs = banded_pairs(N)
    far = [(a, b) for a in range(N) for b in range(N) if abs(a - b) > 1]
    rng = random.Random(seed)
    pairs += rng.sample(far, min(far_samples, len(far)))
    pairs.sort()
    outs = run_batch(c, [c.pack({"i": a, "j": b}) for a, b in pairs])
    results = []
    clean = True
    for (a, b), out in zip(pairs, outs):
        ref = ref_oracle(problem, cfg, a, b)
        vals = c.unpack(out)
        others_zero = all(v == 0 for k, v in vals.items() if k not in ("i", "j", "sign", "theta"))
        clean &= others_zero and vals["i"] == a and vals["j"] == b
        match = (vals["sign"] == ref["sign"] and vals["theta"] == ref["theta"] and others_zero
                 and vals["i"] == a and vals["j"] == b)
        theta = float(decode_code(vals["theta"], cfg.fmt))
        flag_entry = problem.is_flagged(a) or problem.is_flagged(b)
        dev = None
        if not flag_entry:
            dev = abs(theta - math.acos(math.sqrt(abs(float(ref["h_prime"])))))
        results.append(PairResult(a, b, vals["sign"], vals["theta"], theta, match, dev, flag_entry,
                                  ref["sign"], ref["theta"]))
    res = resources(c)
    return OracleReport(results, clean, res.qubits, res.total_gates)
