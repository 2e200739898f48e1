"""Ripple-carry adder (MAJ/UMA ladder with one carry ancilla) and variants."""

from __future__ import annotations

from typing import Sequence

from .circuit import Circuit, adjoint
from .fixedpoint import FixedPointFormat, encode_code, to_fraction


def _maj(c: Circuit, x: int, y: int, z: int):
    c.cx(z, y)
    c.cx(z, x)
    c.ccx(x, y, z)


def _uma(c: Circuit, x: int, y: int, z: int):
    c.ccx(x, y, z)
    c.cx(z, x)
    c.cx(x, y)


def emit_increment(c: Circuit, bits: Sequence[int]):
    """bits += 1 (mod 2^len) as a cascade of multi-controlled NOTs."""
    for j in range(len(bits) - 1, -1, -1):
        c.mcx(bits[:j], bits[j])


def emit_decrement(c: Circuit, bits: Sequence[int]):
    for j in range(len(bits)):
        c.mcx(bits[:j], bits[j])


def emit_add(c: Circuit, a: Sequence[int], b: Sequence[int], carry: int):
    """b += a (mod 2^len(b)); ``a`` is zero-extended, or truncated if longer.

    ``a`` temporarily holds the carries and is restored; ``carry`` must be 0.
    """
    a = list(a[:len(b)])
    b = list(b)
    m, n = len(a), len(b)
    if m == 0:
        return
    prev = [carry] + a[:-1]
    for i in range(m):
        _maj(c, prev[i], b[i], a[i])
    # a[m-1] now holds the carry into bit m
    for j in range(n - 1, m - 1, -1):
        c.mcx([a[m - 1]] + b[m:j], b[j])
    for i in range(m - 1, -1, -1):
        _uma(c, prev[i], b[i], a[i])


def emit_sub(c: Circuit, a: Sequence[int], b: Sequence[int], carry: int):
    """b -= a, the exact inverse of ``emit_add``."""
    with c.capture() as block:
        emit_add(c, a, b, carry)
    c.emit_inverse(block)


def shifted_operands(a: Sequence[int], b: Sequence[int], k: int):
    """Qubit slices joined by the 2^k-shifted adder."""
    if k >= 0:
        dst = list(b[k:])
        src = list(a[:len(dst)])
    else:
        src = list(a[-k:])
        dst = list(b)
    return src[:len(dst)], dst


def emit_add_shift(c: Circuit, a: Sequence[int], b: Sequence[int], k: int, carry: int):
    """b += 2^k a with the dropped-bit rules of the shifted adder."""
    src, dst = shifted_operands(a, b, k)
    if src and dst:
        emit_add(c, src, dst, carry)


def emit_sub_shift(c: Circuit, a: Sequence[int], b: Sequence[int], k: int, carry: int):
    src, dst = shifted_operands(a, b, k)
    if src and dst:
        emit_sub(c, src, dst, carry)


def emit_qc_add(c: Circuit, l: int, bits: Sequence[int]):
    """bits += l for a classical integer l; zero bits of l cost nothing."""
    w = len(bits)
    l %= 1 << w
    for i in range(w):
        if l >> i & 1:
            emit_increment(c, bits[i:])


def emit_qc_sub(c: Circuit, l: int, bits: Sequence[int]):
    with c.capture() as block:
        emit_qc_add(c, l, bits)
    c.emit_inverse(block)


def _width(fmt) -> int:
    return fmt if isinstance(fmt, int) else fmt.width


def _fmt(fmt):
    return None if isinstance(fmt, int) else fmt


def build_add(fmt: FixedPointFormat | int) -> Circuit:
    """|a>|0>|b> -> |a>|0>|a+b mod 2^w> on 2w+1 qubits."""
    w = _width(fmt)
    c = Circuit()
    a = c.allocate("a", w, _fmt(fmt))
    carry = c.allocate("carry", 1, ancilla=True)
    b = c.allocate("b", w, _fmt(fmt))
    emit_add(c, a, b, carry[0])
    return c


def build_sub(fmt: FixedPointFormat | int) -> Circuit:
    return adjoint(build_add(fmt))


def _classical_code(l, fmt) -> int:
    if isinstance(fmt, int):
        if not isinstance(l, int) or not -(1 << fmt) <= l < (1 << fmt):
            raise ValueError(f"classical addend {l} out of range")
        return l % (1 << fmt)
    try:
        return encode_code(to_fraction(l), fmt)
    except OverflowError as exc:
        raise ValueError(str(exc)) from None


def build_qc_add(l, fmt: FixedPointFormat | int) -> Circuit:
    w = _width(fmt)
    c = Circuit()
    b = c.allocate("b", w, _fmt(fmt))
    emit_qc_add(c, _classical_code(l, fmt), b)
    return c


def build_qc_sub(l, fmt: FixedPointFormat | int) -> Circuit:
    return adjoint(build_qc_add(l, fmt))


def build_add_shift(k: int, fmt: FixedPointFormat | int) -> Circuit:
    """|a>|b> -> |a>|2^k a + b>; requires the k top bits of a to be 0 when k > 0."""
    w = _width(fmt)
    if abs(k) >= w:
        raise ValueError(f"shift {k} too large for width {w}")
    c = Circuit()
    a = c.allocate("a", w, _fmt(fmt))
    carry = c.allocate("carry", 1, ancilla=True)
    b = c.allocate("b", w, _fmt(fmt))
    emit_add_shift(c, a, b, k, carry[0])
    return c
