"""Fixed-point formats and the bit-level reference arithmetic.

A format ``(r, p, signed)`` has ``r`` magnitude bits of which ``p`` lie after
the binary point; signed formats add a two's-complement sign bit on top.
The ``ref_*`` functions reproduce, on integer codes, exactly what the
corresponding circuits compute, including every truncation, so they serve as
test oracles for the circuit builders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class FixedPointFormat:
    r: int
    p: int
    signed: bool = True

    def __post_init__(self):
        if self.r < 1 or not 0 <= self.p <= self.r:
            raise ValueError(f"invalid format r={self.r} p={self.p}")

    @property
    def width(self) -> int:
        return self.r + 1 if self.signed else self.r

    @property
    def modulus(self) -> int:
        return 1 << self.width

    @property
    def ulp(self) -> Fraction:
        return Fraction(1, 1 << self.p)

    @property
    def min_value(self) -> Fraction:
        return Fraction(-(1 << self.r), 1 << self.p) if self.signed else Fraction(0)

    @property
    def max_value(self) -> Fraction:
        return Fraction((1 << self.r) - 1, 1 << self.p)

    def unsigned(self) -> "FixedPointFormat":
        return FixedPointFormat(self.r, self.p, False)

    def __str__(self):
        return f"fmt {self.r} {self.p} {'signed' if self.signed else 'unsigned'}"


@dataclass(frozen=True)
class FixedPointValue:
    code: int
    fmt: FixedPointFormat

    def __post_init__(self):
        if not 0 <= self.code < self.fmt.modulus:
            raise ValueError(f"code {self.code} outside [0, 2^{self.fmt.width})")

    @property
    def value(self) -> Fraction:
        return decode(self)

    def __float__(self):
        return float(decode(self))


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError("non-finite value")
    return Fraction(x)


def round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def encode(x, fmt: FixedPointFormat) -> FixedPointValue:
    """Nearest code to ``x`` (ties rounded up), |error| <= 2^-(p+1)."""
    n = round_half_up(to_fraction(x) * (1 << fmt.p))
    lo = -(1 << fmt.r) if fmt.signed else 0
    hi = (1 << fmt.r) - 1
    if not lo <= n <= hi:
        raise OverflowError(f"{x} not representable in {fmt}")
    return FixedPointValue(n % fmt.modulus, fmt)


def encode_code(x, fmt: FixedPointFormat) -> int:
    return encode(x, fmt).code


def signed_int(code: int, width: int) -> int:
    code %= 1 << width
    return code - (1 << width) if code >> (width - 1) & 1 else code


def decode_code(code: int, fmt: FixedPointFormat) -> Fraction:
    n = signed_int(code, fmt.width) if fmt.signed else code % fmt.modulus
    return Fraction(n, 1 << fmt.p)


def decode(v: FixedPointValue) -> Fraction:
    return decode_code(v.code, v.fmt)


# -- sign-magnitude --------------------------------------------------------

def sm_code(code: int, fmt: FixedPointFormat) -> tuple[int, int]:
    """Two's complement code -> (sign, magnitude) via decrement-then-invert."""
    if not fmt.signed:
        raise ValueError("sign-magnitude needs a signed format")
    mask = (1 << fmt.r) - 1
    sign = code >> fmt.r & 1
    low = code & mask
    if sign:
        low = ~((low - 1) & mask) & mask
    return sign, low


def sm_inverse(sign: int, magnitude: int, fmt: FixedPointFormat) -> int:
    mask = (1 << fmt.r) - 1
    low = magnitude & mask
    if sign:
        low = ((~low & mask) + 1) & mask
    return (sign << fmt.r) | low


def to_sign_magnitude(v: FixedPointValue) -> tuple[int, int]:
    return sm_code(v.code, v.fmt)


def from_sign_magnitude(sign: int, magnitude: int, fmt: FixedPointFormat) -> FixedPointValue:
    return FixedPointValue(sm_inverse(sign, magnitude, fmt), fmt)


def sm_value(sign: int, magnitude: int, fmt: FixedPointFormat) -> Fraction:
    """Value of a sign-magnitude pair; a set sign with zero magnitude is 0."""
    mag = Fraction(magnitude, 1 << fmt.p)
    return -mag if sign else mag


# -- adders ----------------------------------------------------------------

def shift_code(a: int, k: int, width: int) -> int:
    """Operand seen by the 2^k-shifted adder: high bits dropped or low bits truncated."""
    if k >= 0:
        return (a << k) % (1 << width)
    return a >> -k


def ref_add(a: int, b: int, fmt: FixedPointFormat) -> int:
    return (a + b) % fmt.modulus


def ref_sub(a: int, b: int, fmt: FixedPointFormat) -> int:
    """Result left in the second register of the subtractor: b - a."""
    return (b - a) % fmt.modulus


def ref_add_shift(a: int, b: int, k: int, width: int) -> int:
    return (shift_code(a, k, width) + b) % (1 << width)


def ref_qc_add(l: int, b: int, width: int) -> int:
    return (b + l) % (1 << width)


# -- multiplication --------------------------------------------------------

def _shifted_sum(bits_of: int, nbits: int, operand: int, p: int, width: int) -> int:
    total = 0
    for k in range(nbits):
        if bits_of >> k & 1:
            total += shift_code(operand, k - p, width)
    return total


def _check_product(exact: Fraction, fmt: FixedPointFormat):
    if abs(exact) >= Fraction(1 << fmt.r, 1 << fmt.p):
        raise OverflowError(f"product {exact} overflows {fmt}")


def ref_mul(a: int, b: int, fmt: FixedPointFormat, z: int = 0, strict: bool = False) -> int:
    """Target code after the shifted-add multiplier acts on |a, b, z>.

    Signed formats work on magnitudes, with the target conditionally negated
    before and after the magnitude sum when the operand signs differ.
    """
    w = fmt.width
    if strict:
        _check_product(decode_code(a, fmt) * decode_code(b, fmt), fmt)
    if not fmt.signed:
        return (z + _shifted_sum(a, fmt.r, b, fmt.p, w)) % (1 << w)
    sa, ma = sm_code(a, fmt)
    sb, mb = sm_code(b, fmt)
    neg = sa ^ sb
    zz = (-z if neg else z) % (1 << w)
    zz = (zz + _shifted_sum(ma, fmt.r, mb, fmt.p, w)) % (1 << w)
    return (-zz if neg else zz) % (1 << w)


def qc_magnitude(c, fmt: FixedPointFormat) -> tuple[int, int]:
    """Classical multiplier -> (sign, r-bit magnitude code)."""
    c = to_fraction(c)
    mag = round_half_up(abs(c) * (1 << fmt.p))
    if mag >> fmt.r:
        raise OverflowError(f"|{c}| not representable with {fmt.r} magnitude bits")
    return (1 if c < 0 else 0), mag


def ref_qc_mul(c, b: int, fmt: FixedPointFormat, z: int = 0) -> int:
    sc, mc = qc_magnitude(c, fmt)
    w = fmt.width
    if not fmt.signed:
        part = _shifted_sum(mc, fmt.r, b, fmt.p, w)
        return (z - part if sc else z + part) % (1 << w)
    sb, mb = sm_code(b, fmt)
    neg = sb ^ sc
    zz = (-z if neg else z) % (1 << w)
    zz = (zz + _shifted_sum(mc, fmt.r, mb, fmt.p, w)) % (1 << w)
    return (-zz if neg else zz) % (1 << w)


def ref_poly(coeffs: Sequence, b: int, fmt: FixedPointFormat) -> int:
    """Horner evaluation as the circuit does it; ``coeffs`` are values c_0..c_K."""
    codes = [encode_code(c, fmt) for c in coeffs]
    K = len(coeffs) - 1
    if K == 0:
        return codes[0]
    if K == 1:
        return ref_qc_mul(coeffs[1], b, fmt, codes[0])
    acc = ref_qc_mul(coeffs[K], b, fmt, codes[K - 1])
    for m in range(K - 2, 0, -1):
        acc = ref_mul(acc, b, fmt, codes[m])
    return ref_mul(acc, b, fmt, codes[0])


# -- Newton iterations (unsigned formats) ----------------------------------

def _umul(a: int, b: int, fmt: FixedPointFormat, z: int = 0) -> int:
    return ref_mul(a, b, fmt.unsigned(), z)


def ref_rsqrt_step(s: int, x: int, fmt: FixedPointFormat) -> int:
    """x (1.5 - (S x^2) / 2) with the truncations of the step circuit."""
    u = fmt.unsigned()
    sx = _umul(s, x, u)
    sxx = _umul(sx, x, u)
    three_halves = (1 << fmt.p) | (1 << (fmt.p - 1))
    diff = (three_halves - (sxx >> 1)) % u.modulus
    return _umul(x, diff, u)


def ref_rec_step(rv: int, x: int, fmt: FixedPointFormat) -> int:
    u = fmt.unsigned()
    rx = _umul(rv, x, u)
    diff = ((1 << (fmt.p + 1)) - rx) % u.modulus
    return _umul(x, diff, u)


def leading_one_x0(value: int, fmt: FixedPointFormat, kind: str) -> int:
    """Initial estimate from the leading one of ``value`` (code 0 for value 0)."""
    if value == 0:
        return 0
    m = value.bit_length() - 1 - fmt.p  # 2^m <= value < 2^(m+1)
    e = -m - 1 if kind == "reciprocal" else -(m // 2) - 1
    pos = e + fmt.p
    if not 0 <= pos < fmt.r:
        return 0
    return 1 << pos


def _x0_code(x0, value: int, fmt: FixedPointFormat, kind: str) -> int:
    if x0 == "leading-one":
        return leading_one_x0(value, fmt, kind)
    return encode_code(x0, fmt.unsigned())


def ref_rsqrt_iterates(s: int, fmt: FixedPointFormat, L: int, x0=1) -> list[int]:
    xs = [_x0_code(x0, s, fmt, "rsqrt")]
    for _ in range(L):
        xs.append(ref_rsqrt_step(s, xs[-1], fmt))
    return xs


def ref_rsqrt_nr(s: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    return ref_rsqrt_iterates(s, fmt, L, x0)[-1]


def ref_sqrt_nr(s: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    xl = ref_rsqrt_nr(s, fmt, L, x0)
    return _umul(xl, s, fmt.unsigned())


def ref_rec_iterates(rv: int, fmt: FixedPointFormat, L: int, x0=1) -> list[int]:
    xs = [_x0_code(x0, rv, fmt, "reciprocal")]
    for _ in range(L):
        xs.append(ref_rec_step(rv, xs[-1], fmt))
    return xs


def ref_rec_nr(rv: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    return ref_rec_iterates(rv, fmt, L, x0)[-1]


def ref_insq(a: int, fmt: FixedPointFormat) -> int:
    return _umul(a, a, fmt.unsigned())


def ref_insq_residue(a: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    """Code left in the square-root target after an in-place square."""
    u = fmt.unsigned()
    return (a - ref_sqrt_nr(ref_insq(a, fmt), fmt, L, x0)) % u.modulus


def ref_inmul(a: int, b: int, fmt: FixedPointFormat) -> int:
    return _umul(a, b, fmt.unsigned())


def ref_inmul_residue(a: int, b: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    u = fmt.unsigned()
    ab = ref_inmul(a, b, fmt)
    inv = ref_rec_nr(a, fmt, L, x0)
    return (b - _umul(inv, ab, u)) % u.modulus


class ExpState:
    """Classical mirror of the exponentiation pool: base, shared residue, target.

    The in-place square and multiply leave their uncompute residue in one
    shared register, and the next operation starts from whatever it holds,
    so the mirror tracks that register instead of assuming it is zero.
    """

    def __init__(self, base: int, fmt: FixedPointFormat, L: int, x0=1, target: int = 0):
        self.fmt = fmt.unsigned()
        self.L, self.x0 = L, x0
        self.base, self.residue, self.target = base, 0, target

    def _sqrt(self, s: int) -> int:
        return ref_sqrt_nr(s, self.fmt, self.L, self.x0)

    def insq(self):
        mod = self.fmt.modulus
        s = (self.residue + ref_insq(self.base, self.fmt)) % mod
        self.base, self.residue = s, (self.base - self._sqrt(s)) % mod

    def insq_dagger(self):
        mod = self.fmt.modulus
        a = (self.residue + self._sqrt(self.base)) % mod
        self.base, self.residue = a, (self.base - ref_insq(a, self.fmt)) % mod

    def inmul(self):
        mod = self.fmt.modulus
        t = (self.residue + ref_inmul(self.base, self.target, self.fmt)) % mod
        inv = ref_rec_nr(self.base, self.fmt, self.L, self.x0)
        self.target, self.residue = t, (self.target - _umul(inv, t, self.fmt)) % mod

    def qc_exp(self, ecode: int):
        """target <- target * base^e, walking the base through the exponent's levels."""
        level = 0
        for lvl in sorted(exponent_levels(ecode, self.fmt)):
            while level > lvl:
                self.insq_dagger()
                level -= 1
            while level < lvl:
                self.insq()
                level += 1
            self.inmul()
        while level > 0:
            self.insq_dagger()
            level -= 1
        while level < 0:
            self.insq()
            level += 1


def ref_exp_state(a: int, b: int, fmt: FixedPointFormat, L: int, x0=1) -> ExpState:
    """Every register of the exponentiation circuit after it acts on |a, b, 0>."""
    u = fmt.unsigned()
    st = ExpState(b, u, L, x0)
    for _ in range(u.p):
        st.insq_dagger()
    st.target = 1 << u.p
    for k in range(u.r):
        if k:
            st.insq()
        if a >> k & 1:
            st.inmul()
    for _ in range(u.r - u.p - 1):
        st.insq_dagger()
    return st


def ref_exp(a: int, b: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    return ref_exp_state(a, b, fmt, L, x0).target


def exponent_levels(e: int, fmt: FixedPointFormat) -> list[int]:
    """Square/root levels (k - p) selected by the set bits of an exponent code."""
    return [k - fmt.p for k in range(fmt.r) if e >> k & 1]


def ref_qc_exp_state(e, b: int, fmt: FixedPointFormat, L: int, x0=1) -> ExpState:
    u = fmt.unsigned()
    st = ExpState(b, u, L, x0, target=1 << u.p)
    st.qc_exp(encode_code(e, u))
    return st


def ref_qc_exp(e, b: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    return ref_qc_exp_state(e, b, fmt, L, x0).target


def ref_sig(coeffs: Sequence, kappa: int, b: int, fmt: FixedPointFormat, L: int, x0=1) -> int:
    """Each power term is computed, used and uncomputed, so terms start from a clean pool."""
    u = fmt.unsigned()
    target = encode_code(coeffs[0], u)
    for k, c in enumerate(coeffs[1:], start=1):
        if c == 0:
            continue
        if Fraction(k, kappa) == 1:
            power = b
        else:
            power = ref_qc_exp(Fraction(k, kappa), b, fmt, L, x0)
        target = ref_qc_mul(c, power, u, target)
    return target
