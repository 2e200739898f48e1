"""Comparators, boolean combiners and geometry membership tests on index registers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .adders import emit_add, emit_qc_add, emit_qc_sub, emit_sub
from .circuit import Circuit
from .fixedpoint import (FixedPointFormat, decode_code, encode_code, ref_mul, ref_qc_mul,
                         to_fraction)
from .mulpoly import emit_qc_mul, emit_smul

SERIAL = "serial"
PARALLEL = "parallel"
LAYOUTS = (SERIAL, PARALLEL)


def fresh_register(c: Circuit, prefix: str, width: int, ancilla: bool = True):
    """Allocate ``prefix``, or ``prefix_2``, ``prefix_3``... if the name is taken."""
    name, n = prefix, 1
    while name in c.registers:
        n += 1
        name = f"{prefix}_{n}"
    return c.allocate(name, width, ancilla=ancilla).qubits


# -- equality and ordering -------------------------------------------------

def emit_eq(c: Circuit, a: Sequence[int], b: Sequence[int], flag: int):
    """flag ^= [a == b]; b is XORed with a and restored."""
    if len(a) != len(b):
        raise ValueError("equality test needs equal widths")
    with c.capture() as fan:
        for s, t in zip(a, b):
            c.cx(s, t)
        for t in b:
            c.x(t)
    c.extend(fan)
    c.mcx(list(b), flag)
    c.emit_inverse(fan)


def emit_qc_eq(c: Circuit, value: int, a: Sequence[int], flag: int):
    """flag ^= [a == value] for a classical integer value."""
    if not 0 <= value < 1 << len(a):
        raise ValueError(f"constant {value} does not fit in {len(a)} bits")
    zeros = [q for i, q in enumerate(a) if not value >> i & 1]
    for q in zeros:
        c.x(q)
    c.mcx(list(a), flag)
    for q in zeros:
        c.x(q)


def emit_gt(c: Circuit, a: Sequence[int], b: Sequence[int], ext: int, carry: int):
    """ext ^= [a > b] (unsigned): subtract over b plus ext, then add back on b only."""
    if len(a) != len(b):
        raise ValueError("comparison needs equal widths")
    emit_sub(c, a, list(b) + [ext], carry)
    emit_add(c, a, b, carry)


def emit_qc_lt(c: Circuit, bound: int, a: Sequence[int], ext: int):
    """ext ^= [a < bound] for a classical bound in [0, 2^len(a)]."""
    w = len(a)
    if not 0 <= bound <= 1 << w:
        raise ValueError(f"threshold {bound} outside [0, {1 << w}]")
    emit_qc_sub(c, bound, list(a) + [ext])
    emit_qc_add(c, bound % (1 << w), a)


def emit_qc_geq(c: Circuit, bound: int, a: Sequence[int], ext: int):
    emit_qc_lt(c, bound, a, ext)
    c.x(ext)


def emit_qc_leq(c: Circuit, bound: int, a: Sequence[int], ext: int):
    emit_qc_lt(c, bound + 1, a, ext)


def emit_qc_gt(c: Circuit, bound: int, a: Sequence[int], ext: int):
    emit_qc_lt(c, bound + 1, a, ext)
    c.x(ext)


# -- conjunction / disjunction ---------------------------------------------

def cascade_ancillas(n: int) -> int:
    """Work qubits a Toffoli cascade over n inputs needs."""
    return max(n - 2, 0)


def _and_tree(c: Circuit, inputs: Sequence[int], target: int, work: Sequence[int], tree: bool):
    inputs = list(inputs)
    n = len(inputs)
    if n == 0:
        c.x(target)
        return
    if n == 1:
        c.cx(inputs[0], target)
        return
    if n == 2:
        c.ccx(inputs[0], inputs[1], target)
        return
    if len(work) < n - 2:
        raise ValueError(f"cascade over {n} inputs needs {n - 2} work qubits")
    pool = list(work[:n - 2])
    with c.capture() as build:
        if tree:
            level = inputs
            while len(level) > 2:
                nxt = []
                for i in range(0, len(level) - 1, 2):
                    q = pool.pop(0)
                    c.ccx(level[i], level[i + 1], q)
                    nxt.append(q)
                if len(level) % 2:
                    nxt.append(level[-1])
                level = nxt
            top = level
        else:
            acc = inputs[0]
            for q in inputs[1:-1]:
                w = pool.pop(0)
                c.ccx(acc, q, w)
                acc = w
            top = [acc, inputs[-1]]
    c.extend(build)
    c.ccx(top[0], top[1], target)
    c.emit_inverse(build)


def emit_and(c: Circuit, inputs: Sequence[int], target: int,
             work: Sequence[int] | None = None, tree: bool = False):
    """target ^= AND(inputs).  Without ``work`` a single MCX is used."""
    if work is None:
        if inputs:
            c.mcx(list(inputs), target)
        else:
            c.x(target)
        return
    _and_tree(c, inputs, target, work, tree)


def emit_or(c: Circuit, inputs: Sequence[int], target: int,
            work: Sequence[int] | None = None, tree: bool = False):
    """target ^= OR(inputs) = NOT AND(NOT inputs)."""
    for q in inputs:
        c.x(q)
    emit_and(c, inputs, target, work, tree)
    c.x(target)
    for q in inputs:
        c.x(q)


# -- geometry ----------------------------------------------------------------

@dataclass(frozen=True)
class Ellipsoid:
    center: tuple
    semi_axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(to_fraction(v) for v in self.center))
        object.__setattr__(self, "semi_axes", tuple(to_fraction(v) for v in self.semi_axes))
        if len(self.center) != len(self.semi_axes):
            raise ValueError("center and semi-axes differ in dimension")
        if any(h <= 0 for h in self.semi_axes):
            raise ValueError("semi-axes must be positive")

    def contains(self, point: Sequence, spacing=1) -> bool:
        spacing = to_fraction(spacing)
        total = sum(((spacing * i - c) / h) ** 2
                    for i, c, h in zip(point, self.center, self.semi_axes))
        return total <= 1


@dataclass(frozen=True)
class GeometrySpec:
    """Union of axis-aligned boxes and ellipsoids over integer node indices.

    Box bounds are inclusive index intervals, one (lo, hi) pair per axis.
    Ellipsoids live in physical coordinates x = spacing * index.
    """

    dims: int = 1
    cuboids: tuple = ()
    ellipsoids: tuple = ()
    spacing: Fraction = Fraction(1)

    def __post_init__(self):
        if self.dims < 1:
            raise ValueError("dimension must be positive")
        boxes = []
        for box in self.cuboids:
            box = tuple((int(lo), int(hi)) for lo, hi in box)
            if len(box) != self.dims:
                raise ValueError("box dimension mismatch")
            if any(lo > hi or lo < 0 for lo, hi in box):
                raise ValueError(f"bad box bounds {box}")
            boxes.append(box)
        object.__setattr__(self, "cuboids", tuple(boxes))
        ells = tuple(e if isinstance(e, Ellipsoid) else Ellipsoid(*e) for e in self.ellipsoids)
        if any(len(e.center) != self.dims for e in ells):
            raise ValueError("ellipsoid dimension mismatch")
        object.__setattr__(self, "ellipsoids", ells)
        object.__setattr__(self, "spacing", to_fraction(self.spacing))

    @property
    def num_primitives(self) -> int:
        return len(self.cuboids) + len(self.ellipsoids)

    def contains(self, point: Sequence[int]) -> bool:
        for box in self.cuboids:
            if all(lo <= i <= hi for i, (lo, hi) in zip(point, box)):
                return True
        return any(e.contains(point, self.spacing) for e in self.ellipsoids)


def check_bounds(box, nbits: int):
    for lo, hi in box:
        if hi >= 1 << nbits:
            raise ValueError(f"bound {hi} exceeds {nbits}-bit index range")


def emit_interval_flags(c: Circuit, idx: Sequence[int], lo: int, hi: int, flags: Sequence[int],
                        layout: str = SERIAL, copies: list | None = None):
    """flags[0] ^= [idx >= lo], flags[1] ^= [idx <= hi].

    In the parallel layout each comparison works on its own copy of the
    index so the two can run side by side; ``copies`` receives those
    registers so the caller can reuse or inspect them.
    """
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}")
    regs = [idx, idx]
    if layout == PARALLEL:
        regs = []
        for _ in range(2):
            cp = fresh_register(c, "idx_copy", len(idx))
            for s, t in zip(idx, cp):
                c.cx(s, t)
            regs.append(cp)
            if copies is not None:
                copies.append(cp)
    emit_qc_geq(c, lo, regs[0], flags[0])
    emit_qc_leq(c, hi, regs[1], flags[1])


def emit_box_term(c: Circuit, box, idx_regs, target: int, layout: str = SERIAL):
    """target ^= [point in box], with comparison flags and cascade work cleaned up."""
    d = len(box)
    flags = fresh_register(c, "cmp", 2 * d)
    work = fresh_register(c, "and_work", cascade_ancillas(2 * d)) if 2 * d > 2 else ()
    with c.capture() as conds:
        for a, ((lo, hi), idx) in enumerate(zip(box, idx_regs)):
            emit_interval_flags(c, idx, lo, hi, flags[2 * a:2 * a + 2], layout)
    c.extend(conds)
    emit_and(c, flags, target, work, tree=layout == PARALLEL)
    c.emit_inverse(conds)


def build_eq(r: int) -> Circuit:
    """|a>|b>|f> -> |a>|b>|f xor [a==b]>; lower_mcx brings it to 3r-1 qubits."""
    c = Circuit()
    a = c.allocate("a", r)
    b = c.allocate("b", r)
    f = c.allocate("flag", 1)
    emit_eq(c, a, b, f[0])
    return c


def build_gt(r: int) -> Circuit:
    """|a>|b>|ext> -> |a>|b>|ext xor [a>b]> with one carry ancilla."""
    c = Circuit()
    a = c.allocate("a", r)
    carry = c.allocate("carry", 1, ancilla=True)
    b = c.allocate("b", r)
    ext = c.allocate("flag", 1)
    emit_gt(c, a, b, ext[0], carry[0])
    return c


def _qc_cmp(kind: str, threshold: int, r: int) -> Circuit:
    c = Circuit()
    a = c.allocate("a", r)
    f = c.allocate("flag", 1)
    emit = {"lt": emit_qc_lt, "leq": emit_qc_leq, "gt": emit_qc_gt, "geq": emit_qc_geq}[kind]
    if not 0 <= threshold < 1 << r:
        raise ValueError(f"threshold {threshold} outside the {r}-bit range")
    emit(c, threshold, a, f[0])
    return c


def build_qc_lt(threshold: int, r: int) -> Circuit:
    return _qc_cmp("lt", threshold, r)


def build_qc_leq(threshold: int, r: int) -> Circuit:
    return _qc_cmp("leq", threshold, r)


def build_qc_gt(threshold: int, r: int) -> Circuit:
    return _qc_cmp("gt", threshold, r)


def build_qc_geq(threshold: int, r: int) -> Circuit:
    return _qc_cmp("geq", threshold, r)


def build_qc_eq(value: int, r: int) -> Circuit:
    c = Circuit()
    a = c.allocate("a", r)
    f = c.allocate("flag", 1)
    emit_qc_eq(c, value, a, f[0])
    return c


def _build_logic(n: int, cascade: bool, tree: bool, combine) -> Circuit:
    if n < 1:
        raise ValueError("need at least one input")
    c = Circuit()
    ins = c.allocate("inputs", n)
    work = c.allocate("work", cascade_ancillas(n), ancilla=True).qubits if cascade and n > 2 else (() if cascade else None)
    t = c.allocate("target", 1)
    combine(c, ins, t[0], work, tree)
    return c


def build_and(n: int, cascade: bool = False, tree: bool = False) -> Circuit:
    return _build_logic(n, cascade, tree, emit_and)


def build_or(n: int, cascade: bool = False, tree: bool = False) -> Circuit:
    return _build_logic(n, cascade, tree, emit_or)


def _index_registers(c: Circuit, dims: int, nbits: int):
    return [c.allocate(f"i{a}", nbits).qubits for a in range(dims)]


def build_cuboid_test(box: Sequence, nbits: int, layout: str = SERIAL) -> Circuit:
    """|i_0..i_{d-1}>|0> -> |i>|[i in box]>; box = per-axis inclusive (lo, hi)."""
    box = tuple((int(lo), int(hi)) for lo, hi in box)
    check_bounds(box, nbits)
    c = Circuit()
    idx = _index_registers(c, len(box), nbits)
    flag = c.allocate("flag", 1)
    emit_box_term(c, box, idx, flag[0], layout)
    return c


def emit_union(c: Circuit, spec: GeometrySpec, idx_regs, target: int, nbits: int,
               fmt: FixedPointFormat | None = None, layout: str = SERIAL):
    """target ^= [point in spec]; one term qubit per primitive, OR-combined."""
    if spec.num_primitives == 0:
        raise ValueError("empty geometry")
    for box in spec.cuboids:
        check_bounds(box, nbits)
    tree = layout == PARALLEL
    n = spec.num_primitives
    if n == 1:
        if spec.cuboids:
            emit_box_term(c, spec.cuboids[0], idx_regs, target, layout)
        else:
            emit_ellipsoid(c, spec.ellipsoids[0], idx_regs, target, fmt, spec.spacing)
        return
    terms = fresh_register(c, "term", n)
    work = fresh_register(c, "or_work", cascade_ancillas(n)) if n > 2 else ()
    with c.capture() as parts:
        k = 0
        for box in spec.cuboids:
            emit_box_term(c, box, idx_regs, terms[k], layout)
            k += 1
        for e in spec.ellipsoids:
            emit_ellipsoid(c, e, idx_regs, terms[k], fmt, spec.spacing)
            k += 1
    c.extend(parts)
    emit_or(c, terms, target, work, tree)
    c.emit_inverse(parts)


def build_union_test(spec: GeometrySpec, nbits: int, layout: str = SERIAL,
                     fmt: FixedPointFormat | None = None) -> Circuit:
    c = Circuit()
    idx = _index_registers(c, spec.dims, nbits)
    flag = c.allocate("flag", 1)
    emit_union(c, spec, idx, flag[0], nbits, fmt, layout)
    return c


# -- ellipsoid ---------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticForm:
    """Precomputed sum_a w_a (i_a - o_a)^2 in index units."""

    offsets: tuple
    weights: tuple

    @classmethod
    def from_ellipsoid(cls, e: Ellipsoid, spacing=1) -> "QuadraticForm":
        spacing = to_fraction(spacing)
        return cls(tuple(ci / spacing for ci in e.center),
                   tuple((spacing / h) ** 2 for h in e.semi_axes))

    def exact(self, point) -> Fraction:
        return sum(w * (i - o) ** 2 for i, o, w in zip(point, self.offsets, self.weights))


def _check_ellipsoid_fmt(q: QuadraticForm, nbits: int, fmt: FixedPointFormat):
    if not fmt.signed:
        raise ValueError("ellipsoid test uses a signed format")
    if nbits + fmt.p > fmt.r:
        raise ValueError(f"{nbits}-bit indices do not fit format {fmt}")
    top = (1 << nbits) - 1
    limit = Fraction(1 << fmt.r, 1 << fmt.p)
    worst = Fraction(0)
    for o, w in zip(q.offsets, q.weights):
        for v in (o, w):
            if decode_code(encode_code(v, fmt), fmt) != v:
                raise ValueError(f"coefficient {v} is not exact in {fmt}")
        far = max(abs(o), abs(top - o))
        if far * far >= limit:
            raise OverflowError(f"squared distance overflows {fmt}")
        worst += w * far * far
    if worst >= limit:
        raise OverflowError(f"quadratic form overflows {fmt}")


def ref_ellipsoid_flag(q: QuadraticForm, point, fmt: FixedPointFormat) -> int:
    """Flag the ellipsoid circuit produces, with its fixed-point truncations."""
    acc = 0
    for i, o, w in zip(point, q.offsets, q.weights):
        diff = ((i << fmt.p) - encode_code(o, fmt)) % fmt.modulus
        sq = ref_mul(diff, diff, fmt)
        acc = ref_qc_mul(w, sq, fmt, acc)
    return int(decode_code(acc, fmt) <= 1)


def emit_ellipsoid(c: Circuit, e: Ellipsoid, idx_regs, target: int,
                   fmt: FixedPointFormat | None, spacing=1):
    if fmt is None:
        raise ValueError("ellipsoid test needs a fixed-point format")
    q = QuadraticForm.from_ellipsoid(e, spacing)
    nbits = len(idx_regs[0])
    _check_ellipsoid_fmt(q, nbits, fmt)
    w = fmt.width
    diff = fresh_register(c, "ell_diff", w)
    dup = fresh_register(c, "ell_dup", w)
    sq = fresh_register(c, "ell_sq", w)
    acc = fresh_register(c, "ell_acc", w)
    carry = fresh_register(c, "ell_carry", 1)[0]
    with c.capture() as total:
        for idx, o, wt in zip(idx_regs, q.offsets, q.weights):
            with c.capture() as square:
                for s, t in zip(idx, diff[fmt.p:]):
                    c.cx(s, t)
                emit_qc_sub(c, encode_code(o, fmt), diff)
                for s, t in zip(diff, dup):
                    c.cx(s, t)
                emit_smul(c, diff, dup, sq, carry, fmt.p)
            c.extend(square)
            emit_qc_mul(c, wt, fmt, sq, acc, carry)
            c.emit_inverse(square)
    c.extend(total)
    emit_qc_leq(c, encode_code(1, fmt), acc, target)
    c.emit_inverse(total)


def build_ellipsoid_test(center: Sequence, semi_axes: Sequence, nbits: int,
                         fmt: FixedPointFormat, spacing=1) -> Circuit:
    """|i>|0> -> |i>|[sum ((spacing*i_a - c_a)/h_a)^2 <= 1]>."""
    e = Ellipsoid(tuple(center), tuple(semi_axes))
    c = Circuit()
    idx = _index_registers(c, len(e.center), nbits)
    flag = c.allocate("flag", 1)
    emit_ellipsoid(c, e, idx, flag[0], fmt, spacing)
    return c
