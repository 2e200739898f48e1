"""Newton iterations for 1/sqrt(S) and 1/R, plus the circuits built on them.

All registers here hold unsigned fixed-point numbers of ``r`` bits.  The
iteration chains keep intermediate iterates in a small rotating set of
registers and clean everything but the requested output with a final
adjoint block.  In-place square (inSQ) and multiply (inMUL) uncompute their
inputs with the adjoint of these approximate chains, so their ancillas come
back holding a small residue rather than exact zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .adders import emit_sub, emit_sub_shift
from .circuit import Circuit
from .fixedpoint import FixedPointFormat, encode_code, exponent_levels, to_fraction
from .mulpoly import emit_qc_mul, emit_umul, load_constant

LEADING_ONE = "leading-one"

# Convergence windows for a classical start value.
RSQRT_WINDOW = Fraction(156, 100)
REC_WINDOW = Fraction(2)


@dataclass(frozen=True)
class NewtonConfig:
    """Iteration count and start-value policy.

    ``x0`` is either a classical number or ``"leading-one"``, which derives
    the start value coherently from the position of the input's top set bit.
    ``input_range`` optionally declares the (lo, hi) input interval, and the
    classical start value is then checked against the convergence window.
    """

    L: int = 4
    x0: object = 1
    input_range: tuple | None = None
    kind: str = "rsqrt"

    def __post_init__(self):
        if not isinstance(self.L, int) or self.L < 1:
            raise ValueError("iteration count L must be >= 1")
        if self.x0 == LEADING_ONE:
            return
        x0 = self.start_value
        if x0 <= 0:
            raise ValueError("start value must be positive")
        if self.input_range is not None:
            lo, hi = (to_fraction(v) for v in self.input_range)
            if lo <= 0 or hi < lo:
                raise ValueError("input range must be positive")
            if self.kind == "rsqrt":
                # sqrt(hi) * x0 < 1.56  <=>  hi * x0^2 < 1.56^2
                if hi * x0 * x0 >= RSQRT_WINDOW ** 2:
                    raise ValueError(f"x0={x0} outside the rsqrt convergence window for S <= {hi}")
            elif self.kind == "reciprocal":
                if hi * x0 >= REC_WINDOW:
                    raise ValueError(f"x0={x0} outside the reciprocal convergence window for R <= {hi}")
            else:
                raise ValueError(f"unknown iteration kind {self.kind!r}")

    @property
    def start_value(self) -> Fraction | None:
        return None if self.coherent else to_fraction(self.x0)

    @property
    def coherent(self) -> bool:
        return self.x0 == LEADING_ONE

    def ref_x0(self):
        """The x0 argument understood by the reference functions."""
        return LEADING_ONE if self.coherent else self.start_value


def _unsigned(fmt: FixedPointFormat) -> FixedPointFormat:
    return fmt if not fmt.signed else fmt.unsigned()


def num_x_registers(L: int, keep: bool = False) -> int:
    """x-registers for L steps; ``keep`` means the last iterate is the output.

    With two steps and a kept output, x2 cannot reuse x0's register because
    x0 is still needed to uncompute x1, so a third register is used.
    """
    if keep and L == 2:
        return 3
    return max(2, L)


def iterate_slots(L: int, keep: bool = False) -> list[int]:
    """Index of the x-register holding iterate k, for k = 0..L."""
    if keep and L == 2:
        return [0, 1, 2]
    slots = [0, 1]
    for k in range(2, L + 1):
        slots.append(0 if k == 2 else k - 1)
    return slots[:L + 1]


# -- single steps ----------------------------------------------------------

def emit_rsqrt_step(c: Circuit, S, x, out, A1, A2, A3, carry: int, p: int):
    """out += x (1.5 - S x^2 / 2); A1..A3 start and end at zero."""
    if p < 1:
        raise ValueError("the constant 1.5 needs p >= 1")
    with c.capture() as fwd:
        emit_umul(c, S, x, A1, carry, p)
        emit_umul(c, A1, x, A2, carry, p)
        c.x(A3[p - 1])
        c.x(A3[p])
        emit_sub_shift(c, A2, A3, -1, carry)
    c.extend(fwd)
    emit_umul(c, x, A3, out, carry, p)
    c.emit_inverse(fwd)


def emit_rec_step(c: Circuit, R, x, out, A1, A2, carry: int, p: int):
    """out += x (2 - R x); A1, A2 start and end at zero."""
    if p + 1 >= len(A2):
        raise ValueError("the constant 2 needs p + 1 < r")
    with c.capture() as fwd:
        emit_umul(c, R, x, A1, carry, p)
        c.x(A2[p + 1])
        emit_sub(c, A1, A2, carry)
    c.extend(fwd)
    emit_umul(c, x, A2, out, carry, p)
    c.emit_inverse(fwd)


def emit_leading_one(c: Circuit, value, out, flags, p: int, kind: str):
    """out ^= 2^e with e set by the top one of ``value``; self-inverse.

    ``flags[i]`` (for i = 1..r-1) marks that every bit of ``value`` at or
    above position i is zero.  The flags are computed, used, and cleared.
    """
    r = len(value)
    if len(flags) < r - 1:
        raise ValueError(f"leading-one scan needs {r - 1} flag qubits")
    flag = {i: flags[i - 1] for i in range(1, r)}

    def target(i):
        m = i - p
        e = -m - 1 if kind == "reciprocal" else -(m // 2) - 1
        pos = e + p
        return out[pos] if 0 <= pos < len(out) else None

    with c.capture() as scan:
        for i in range(r - 1, 0, -1):
            c.x(value[i])
            if i == r - 1:
                c.cx(value[i], flag[i])
            else:
                c.ccx(flag[i + 1], value[i], flag[i])
            c.x(value[i])
    c.extend(scan)
    for i in range(r - 1, -1, -1):
        t = target(i)
        if t is None:
            continue
        if i == r - 1:
            c.cx(value[i], t)
        else:
            c.ccx(flag[i + 1], value[i], t)
    c.emit_inverse(scan)


# -- chains ----------------------------------------------------------------

@dataclass
class ChainRegisters:
    value: Sequence[int]
    xregs: list
    work: list
    carry: int
    flags: Sequence[int] = ()


def _emit_chain(c: Circuit, regs: ChainRegisters, cfg: NewtonConfig, p: int, kind: str,
                step: Callable, core: Callable | None = None):
    """Run L steps; keep the last iterate (core=None) or use it and clean up.

    With ``core`` the last step is undone after ``core()`` runs, so only
    what ``core`` wrote survives.
    """
    L = cfg.L
    slots = iterate_slots(L, keep=core is None)
    xs = regs.xregs
    fmt_u = None

    def load():
        if cfg.coherent:
            emit_leading_one(c, regs.value, xs[0], regs.flags, p, kind)
        else:
            nonlocal fmt_u
            fmt_u = fmt_u or FixedPointFormat(len(xs[0]), p, False)
            load_constant(c, encode_code(cfg.start_value, fmt_u), xs[0])

    with c.capture() as prep:
        load()
        for k in range(1, L):
            step(xs[slots[k - 1]], xs[slots[k]])
            if k == 1:
                load()
    c.extend(prep)
    with c.capture() as last:
        step(xs[slots[L - 1]], xs[slots[L]])
    c.extend(last)
    if core is not None:
        core(xs[slots[L]])
        c.emit_inverse(last)
    c.emit_inverse(prep)
    return xs[slots[L]]


def emit_rsqrt_chain(c: Circuit, regs: ChainRegisters, cfg: NewtonConfig, p: int,
                     core: Callable | None = None):
    A1, A2, A3 = regs.work

    def step(src, dst):
        emit_rsqrt_step(c, regs.value, src, dst, A1, A2, A3, regs.carry, p)

    return _emit_chain(c, regs, cfg, p, "rsqrt", step, core)


def emit_rec_chain(c: Circuit, regs: ChainRegisters, cfg: NewtonConfig, p: int,
                   core: Callable | None = None):
    A1, A2 = regs.work[:2]

    def step(src, dst):
        emit_rec_step(c, regs.value, src, dst, A1, A2, regs.carry, p)

    return _emit_chain(c, regs, cfg, p, "reciprocal", step, core)


def emit_sqrt(c: Circuit, regs: ChainRegisters, Q, cfg: NewtonConfig, p: int):
    """Q += x_L * S with every other register restored."""

    def core(xl):
        emit_umul(c, xl, regs.value, Q, regs.carry, p)

    emit_rsqrt_chain(c, regs, cfg, p, core)


def emit_insq(c: Circuit, regs: ChainRegisters, D, cfg: NewtonConfig, p: int):
    """value -> value^2 in place.

    ``regs.work[0]`` doubles as the copy register; ``D`` receives a, then is
    emptied by the inverse square root and keeps the rounding residue.
    """
    a = regs.value
    C = regs.work[0]
    for s, t in zip(a, C):
        c.cx(s, t)
    emit_umul(c, C, a, D, regs.carry, p)
    for s, t in zip(a, C):
        c.cx(s, t)
    for s, t in zip(a, D):
        c.swap(s, t)
    with c.capture() as root:
        emit_sqrt(c, regs, D, cfg, p)
    c.emit_inverse(root)


def emit_inmul(c: Circuit, regs: ChainRegisters, b, D, cfg: NewtonConfig, p: int):
    """b -> a*b in place, with a = regs.value; D keeps the division residue."""
    a = regs.value
    emit_umul(c, a, b, D, regs.carry, p)
    for s, t in zip(b, D):
        c.swap(s, t)

    def core(inv):
        with c.capture() as blk:
            emit_umul(c, inv, b, D, regs.carry, p)
        c.emit_inverse(blk)

    emit_rec_chain(c, regs, cfg, p, core)


# -- register bookkeeping for the standalone builders ----------------------

def _alloc_chain(c: Circuit, fmt: FixedPointFormat, cfg: NewtonConfig, value_name: str,
                 n_work: int, final_name: str | None = None) -> ChainRegisters:
    r = fmt.r
    value = c.allocate(value_name, r, fmt).qubits if value_name not in c.registers else c.reg(value_name).qubits
    work = [c.allocate(f"A{i + 1}", r, fmt, ancilla=True).qubits for i in range(n_work)]
    keep = final_name is not None
    m = num_x_registers(cfg.L, keep)
    final_slot = iterate_slots(cfg.L, keep)[cfg.L]
    xregs = []
    for i in range(m):
        if final_name is not None and i == final_slot:
            xregs.append(c.allocate(final_name, r, fmt).qubits)
        else:
            xregs.append(c.allocate(f"x{i}", r, fmt, ancilla=True).qubits)
    flags = c.allocate(f"flags", r - 1, ancilla=True).qubits if cfg.coherent and r > 1 else ()
    carry = c.allocate("carry", 1, ancilla=True)[0]
    return ChainRegisters(value, xregs, work, carry, flags)


def build_rsqrt_step(fmt: FixedPointFormat) -> Circuit:
    """|S>|x>|0> -> |S>|x>|x(1.5 - S x^2/2)> with three work registers."""
    fmt = _unsigned(fmt)
    c = Circuit()
    S = c.allocate("S", fmt.r, fmt)
    x = c.allocate("x", fmt.r, fmt)
    out = c.allocate("x_next", fmt.r, fmt)
    work = [c.allocate(f"A{i}", fmt.r, fmt, ancilla=True) for i in (1, 2, 3)]
    carry = c.allocate("carry", 1, ancilla=True)
    emit_rsqrt_step(c, S, x, out, *work, carry[0], fmt.p)
    return c


def build_rec_step(fmt: FixedPointFormat) -> Circuit:
    fmt = _unsigned(fmt)
    c = Circuit()
    R = c.allocate("R", fmt.r, fmt)
    x = c.allocate("x", fmt.r, fmt)
    out = c.allocate("x_next", fmt.r, fmt)
    work = [c.allocate(f"A{i}", fmt.r, fmt, ancilla=True) for i in (1, 2)]
    carry = c.allocate("carry", 1, ancilla=True)
    emit_rec_step(c, R, x, out, *work, carry[0], fmt.p)
    return c


def build_rsqrt(fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|S>|0..> -> |S>|x_L ~ S^(-1/2)> in register ``result``."""
    fmt = _unsigned(fmt)
    c = Circuit()
    regs = _alloc_chain(c, fmt, cfg, "S", 3, final_name="result")
    emit_rsqrt_chain(c, regs, cfg, fmt.p)
    return c


def build_sqrt(fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|S>|0> -> |S>|x_L S ~ sqrt(S)> in register ``result``; (L+4)r+1+r qubits for L >= 2."""
    fmt = _unsigned(fmt)
    c = Circuit()
    regs = _alloc_chain(c, fmt, cfg, "S", 3)
    Q = c.allocate("result", fmt.r, fmt)
    emit_sqrt(c, regs, Q.qubits, cfg, fmt.p)
    return c


def build_rec(fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|R>|0..> -> |R>|x_L ~ 1/R> in register ``result``; (L+3)r+1 qubits for L >= 2."""
    fmt = _unsigned(fmt)
    c = Circuit()
    regs = _alloc_chain(c, fmt, cfg, "R", 2, final_name="result")
    emit_rec_chain(c, regs, cfg, fmt.p)
    return c


def build_leading_one_init(fmt: FixedPointFormat, kind: str = "reciprocal") -> Circuit:
    fmt = _unsigned(fmt)
    c = Circuit()
    value = c.allocate("R", fmt.r, fmt)
    out = c.allocate("x0", fmt.r, fmt)
    flags = c.allocate("flags", max(fmt.r - 1, 1), ancilla=True)
    emit_leading_one(c, value, out, flags, fmt.p, kind)
    return c


def build_insq(fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|a>|0..> -> |a^2>|residue in D, zeros elsewhere>."""
    fmt = _unsigned(fmt)
    c = Circuit()
    regs = _alloc_chain(c, fmt, cfg, "a", 3)
    D = c.allocate("D", fmt.r, fmt, ancilla=True)
    emit_insq(c, regs, D.qubits, cfg, fmt.p)
    return c


def build_inmul(fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|a>|b>|0..> -> |a>|ab>|residue in D, zeros elsewhere>."""
    fmt = _unsigned(fmt)
    c = Circuit()
    a = c.allocate("a", fmt.r, fmt)
    b = c.allocate("b", fmt.r, fmt)
    D = c.allocate("D", fmt.r, fmt, ancilla=True)
    regs = _alloc_chain(c, fmt, cfg, "a", 2)
    emit_inmul(c, regs, b.qubits, D.qubits, cfg, fmt.p)
    return c


# -- exponentiation --------------------------------------------------------

class _Pool:
    """The L+4 shared registers used by inSQ and inMUL on the base register."""

    def __init__(self, c: Circuit, fmt: FixedPointFormat, cfg: NewtonConfig, base):
        r = fmt.r
        m = num_x_registers(cfg.L)
        self.regs = [c.allocate(f"P{i}", r, fmt, ancilla=True).qubits for i in range(m + 4)]
        self.flags = c.allocate("flags", r - 1, ancilla=True).qubits if cfg.coherent and r > 1 else ()
        self.carry = c.allocate("carry", 1, ancilla=True)[0]
        self.base = base
        self.c, self.cfg, self.p = c, cfg, fmt.p

    def insq(self):
        P = self.regs
        regs = ChainRegisters(self.base, P[4:], [P[1], P[2], P[3]], self.carry, self.flags)
        emit_insq(self.c, regs, P[0], self.cfg, self.p)

    def insq_dagger(self):
        with self.c.capture() as blk:
            self.insq()
        self.c.emit_inverse(blk)

    def inmul(self, target):
        P = self.regs
        regs = ChainRegisters(self.base, P[4:], [P[1], P[2]], self.carry, self.flags)
        emit_inmul(self.c, regs, target, P[0], self.cfg, self.p)


def emit_exp(c: Circuit, pool: _Pool, a, T, fmt: FixedPointFormat):
    """T <- b^a with T seeded to 1 here; b is the pool's base register."""
    r, p = fmt.r, fmt.p
    for _ in range(p):
        pool.insq_dagger()
    c.x(T[p])
    for k in range(r):
        if k:
            pool.insq()
        with c.controlled(a[k]):
            pool.inmul(T)
    for _ in range(r - p - 1):
        pool.insq_dagger()


def emit_qc_exp(c: Circuit, pool: _Pool, exponent, T, fmt: FixedPointFormat):
    """T <- T * b^exponent for a classical exponent; only its set bits cost inMULs."""
    code = encode_code(exponent, fmt)
    level = 0
    for lvl in sorted(exponent_levels(code, fmt)):
        while level > lvl:
            pool.insq_dagger()
            level -= 1
        while level < lvl:
            pool.insq()
            level += 1
        pool.inmul(T)
    while level > 0:
        pool.insq_dagger()
        level -= 1
    while level < 0:
        pool.insq()
        level += 1


def build_exp(fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|a>|b>|0> -> |a>|b>|b^a> with a pool of L+4 registers; (L+7)r+1 qubits."""
    fmt = _unsigned(fmt)
    c = Circuit()
    a = c.allocate("a", fmt.r, fmt)
    b = c.allocate("b", fmt.r, fmt)
    T = c.allocate("result", fmt.r, fmt)
    pool = _Pool(c, fmt, cfg, b.qubits)
    emit_exp(c, pool, a.qubits, T.qubits, fmt)
    return c


def build_qc_exp(exponent, fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|b>|0> -> |b>|b^exponent>; the register starts at 0 and is seeded with 1."""
    fmt = _unsigned(fmt)
    exponent = to_fraction(exponent)
    c = Circuit()
    b = c.allocate("b", fmt.r, fmt)
    T = c.allocate("result", fmt.r, fmt)
    pool = _Pool(c, fmt, cfg, b.qubits)
    c.x(T.qubits[fmt.p])
    emit_qc_exp(c, pool, exponent, T.qubits, fmt)
    return c


def build_sig(coeffs: Sequence, kappa: int, fmt: FixedPointFormat, cfg: NewtonConfig) -> Circuit:
    """|b>|0> -> |b>|sum_k c_k b^(k/kappa)>; (L+7)r+1 qubits."""
    fmt = _unsigned(fmt)
    if kappa < 1:
        raise ValueError("kappa must be a positive integer")
    coeffs = [to_fraction(v) for v in coeffs]
    c = Circuit()
    b = c.allocate("b", fmt.r, fmt)
    target = c.allocate("result", fmt.r, fmt)
    E = c.allocate("E", fmt.r, fmt, ancilla=True)
    pool = _Pool(c, fmt, cfg, b.qubits)
    load_constant(c, encode_code(coeffs[0], fmt), target.qubits)
    for k, ck in enumerate(coeffs[1:], start=1):
        if ck == 0:
            continue
        if Fraction(k, kappa) == 1:
            emit_qc_mul(c, ck, fmt, b.qubits, target.qubits, pool.carry)
            continue
        with c.capture() as power:
            c.x(E.qubits[fmt.p])
            emit_qc_exp(c, pool, Fraction(k, kappa), E.qubits, fmt)
        c.extend(power)
        emit_qc_mul(c, ck, fmt, E.qubits, target.qubits, pool.carry)
        c.emit_inverse(power)
    return c
