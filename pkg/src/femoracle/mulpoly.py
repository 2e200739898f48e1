"""Sign-magnitude conversion, shifted-add multipliers and Horner polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .adders import emit_add_shift, emit_decrement, emit_increment, emit_sub_shift
from .circuit import Circuit
from .fixedpoint import (FixedPointFormat, encode_code, qc_magnitude, to_fraction)


@dataclass(frozen=True)
class PolynomialSpec:
    """Coefficients c_0..c_K of a polynomial evaluated in one fixed-point format."""

    coefficients: tuple[Fraction, ...]
    fmt: FixedPointFormat

    def __init__(self, coefficients: Sequence, fmt: FixedPointFormat):
        if not coefficients:
            raise ValueError("need at least c_0")
        coeffs = tuple(to_fraction(c) for c in coefficients)
        for c in coeffs:
            encode_code(c, fmt)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "fmt", fmt)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def codes(self) -> list[int]:
        return [encode_code(c, self.fmt) for c in self.coefficients]

    def __call__(self, x) -> Fraction:
        x = to_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc


def load_constant(c: Circuit, code: int, bits: Sequence[int]):
    """X fan writing a classical code into a zeroed register."""
    for i, q in enumerate(bits):
        if code >> i & 1:
            c.x(q)


def emit_csm(c: Circuit, reg: Sequence[int]):
    """Two's complement -> sign-magnitude, controlled by the top (sign) qubit."""
    sign, low = reg[-1], list(reg[:-1])
    with c.controlled(sign):
        emit_decrement(c, low)
        for q in low:
            c.x(q)


def emit_negate(c: Circuit, bits: Sequence[int], ctrl: int | None = None):
    """Two's-complement negation (invert, then increment), optionally controlled."""
    if ctrl is None:
        for q in bits:
            c.x(q)
        emit_increment(c, bits)
        return
    with c.controlled(ctrl):
        for q in bits:
            c.x(q)
        emit_increment(c, bits)


def emit_umul(c: Circuit, a: Sequence[int], b: Sequence[int], z: Sequence[int],
              carry: int, p: int):
    """Unsigned z += a*b: bit k of a switches on b added with weight 2^(k-p)."""
    for k, q in enumerate(a):
        with c.controlled(q):
            emit_add_shift(c, b, z, k - p, carry)


def emit_smul(c: Circuit, a: Sequence[int], b: Sequence[int], z: Sequence[int],
              carry: int, p: int, b_signed: bool = True):
    """Signed z += a*b on two's-complement registers.

    a and b are switched to sign-magnitude form, a's sign qubit is turned
    into the relative sign, z is negated under that sign, the magnitude
    product is added, z is negated back and the operands are restored.
    With ``b_signed=False`` the b register is a plain nonnegative magnitude.
    """
    ra, sa = list(a[:-1]), a[-1]
    rb = list(b[:-1]) if b_signed else list(b)
    with c.capture() as pre:
        emit_csm(c, a)
        if b_signed:
            emit_csm(c, b)
            c.cx(b[-1], sa)
    c.extend(pre)
    emit_negate(c, z, sa)
    for k, q in enumerate(ra):
        with c.controlled(q):
            emit_add_shift(c, rb, z, k - p, carry)
    emit_negate(c, z, sa)
    c.emit_inverse(pre)


def emit_qc_mul(c: Circuit, value, fmt: FixedPointFormat, b: Sequence[int],
                z: Sequence[int], carry: int, b_signed: bool | None = None):
    """z += value * b for a classical value; only its set magnitude bits cost adders."""
    sc, mc = qc_magnitude(value, fmt)
    if not fmt.signed:
        for k in range(fmt.r):
            if mc >> k & 1:
                if sc:
                    emit_sub_shift(c, b, z, k - fmt.p, carry)
                else:
                    emit_add_shift(c, b, z, k - fmt.p, carry)
        return
    if b_signed is None:
        b_signed = len(b) == fmt.width
    rb = list(b[:-1]) if b_signed else list(b)
    with c.capture() as pre:
        if b_signed:
            emit_csm(c, b)
            if sc:
                c.x(b[-1])
    c.extend(pre)
    if b_signed:
        emit_negate(c, z, b[-1])
    elif sc:
        emit_negate(c, z)
    for k in range(fmt.r):
        if mc >> k & 1:
            emit_add_shift(c, rb, z, k - fmt.p, carry)
    if b_signed:
        emit_negate(c, z, b[-1])
    elif sc:
        emit_negate(c, z)
    c.emit_inverse(pre)


def emit_poly(c: Circuit, spec: PolynomialSpec, b: Sequence[int], work: Sequence[Sequence[int]],
              target: Sequence[int], carry: int, b_signed: bool = True):
    """target += poly(b) by Horner's scheme; work registers come back to 0.

    ``work[m-1]`` accumulates the partial sum of degree m for m = 1..K-1.
    """
    fmt = spec.fmt
    coeffs = spec.coefficients
    codes = spec.codes()
    K = spec.degree
    if len(work) != max(K - 1, 0):
        raise ValueError(f"degree {K} needs {max(K - 1, 0)} work registers")
    load_constant(c, codes[0], target)
    if K == 0:
        return
    if K == 1:
        emit_qc_mul(c, coeffs[1], fmt, b, target, carry, b_signed)
        return
    with c.capture() as horner:
        for m in range(K - 1, 0, -1):
            load_constant(c, codes[m], work[m - 1])
        emit_qc_mul(c, coeffs[K], fmt, b, work[K - 2], carry, b_signed)
        for m in range(K - 2, 0, -1):
            emit_smul(c, work[m], b, work[m - 1], carry, fmt.p, b_signed)
    c.extend(horner)
    emit_smul(c, work[0], b, target, carry, fmt.p, b_signed)
    c.emit_inverse(horner)


# -- standalone builders ---------------------------------------------------

def build_csm(fmt: FixedPointFormat) -> Circuit:
    if not fmt.signed:
        raise ValueError("sign-magnitude conversion needs a signed format")
    c = Circuit()
    reg = c.allocate("b", fmt.width, fmt)
    emit_csm(c, reg)
    return c


def build_mul(fmt: FixedPointFormat) -> Circuit:
    """|a, b>|z> -> |a, b>|z + ab>; 3(r+1)+1 qubits for signed formats."""
    c = Circuit()
    a = c.allocate("a", fmt.width, fmt)
    b = c.allocate("b", fmt.width, fmt)
    carry = c.allocate("carry", 1, ancilla=True)
    z = c.allocate("z", fmt.width, fmt)
    if fmt.signed:
        emit_smul(c, a, b, z, carry[0], fmt.p)
    else:
        emit_umul(c, a, b, z, carry[0], fmt.p)
    return c


def build_qc_mul(value, fmt: FixedPointFormat) -> Circuit:
    c = Circuit()
    b = c.allocate("b", fmt.width, fmt)
    carry = c.allocate("carry", 1, ancilla=True)
    z = c.allocate("z", fmt.width, fmt)
    emit_qc_mul(c, value, fmt, b, z, carry[0])
    return c


def build_poly(spec: PolynomialSpec) -> Circuit:
    """|b>|0..0>|0> -> |b>|0..0>|poly(b)> on (K+1)(r+1)+1 qubits."""
    fmt = spec.fmt
    if not fmt.signed:
        raise ValueError("polynomial evaluation uses signed formats")
    c = Circuit()
    b = c.allocate("b", fmt.width, fmt)
    work = [c.allocate(f"w{m}", fmt.width, fmt, ancilla=True) for m in range(1, spec.degree)]
    carry = c.allocate("carry", 1, ancilla=True)
    target = c.allocate("target", fmt.width, fmt)
    emit_poly(c, spec, b, [w.qubits for w in work], target, carry[0])
    return c
