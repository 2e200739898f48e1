import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import ancillas_clean, run_cases
from femoracle.circuit import lower_mcx, resources
from femoracle.fixedpoint import FixedPointFormat
from femoracle.logicgeo import (PARALLEL, SERIAL, Ellipsoid, GeometrySpec, QuadraticForm,
                                build_and, build_cuboid_test, build_ellipsoid_test, build_eq,
                                build_gt, build_or, build_qc_eq, build_qc_geq, build_qc_gt,
                                build_qc_leq, build_qc_lt, build_union_test, ref_ellipsoid_flag)


def all_pairs(r):
    return [{"a": a, "b": b} for a, b in itertools.product(range(1 << r), repeat=2)]


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_eq_truth_table(r):
    c = build_eq(r)
    cs = all_pairs(r)
    for inp, o in zip(cs, run_cases(c, cs)):
        assert o["flag"] == int(inp["a"] == inp["b"])
        assert (o["a"], o["b"]) == (inp["a"], inp["b"])


@pytest.mark.parametrize("r", [2, 3, 4, 5, 8])
def test_eq_qubits_after_lowering(r):
    assert lower_mcx(build_eq(r)).num_qubits == 3 * r - 1


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_gt_truth_table(r):
    c = build_gt(r)
    assert c.num_qubits == 2 * r + 2
    cs = all_pairs(r)
    for inp, o in zip(cs, run_cases(c, cs)):
        assert o["flag"] == int(inp["a"] > inp["b"])
        assert (o["a"], o["b"], o["carry"]) == (inp["a"], inp["b"], 0)


def test_gt_flag_is_xored():
    c = build_gt(3)
    cs = [{"a": a, "b": b, "flag": 1} for a in range(8) for b in range(8)]
    for inp, o in zip(cs, run_cases(c, cs)):
        assert o["flag"] == 1 - int(inp["a"] > inp["b"])


@pytest.mark.parametrize("kind, build, pred", [
    ("lt", build_qc_lt, lambda a, t: a < t),
    ("leq", build_qc_leq, lambda a, t: a <= t),
    ("gt", build_qc_gt, lambda a, t: a > t),
    ("geq", build_qc_geq, lambda a, t: a >= t),
    ("eq", build_qc_eq, lambda a, t: a == t),
])
def test_classical_comparators(kind, build, pred):
    r = 4
    for t in range(1 << r):
        c = build(t, r)
        cs = [{"a": a} for a in range(1 << r)]
        for inp, o in zip(cs, run_cases(c, cs)):
            assert o["flag"] == int(pred(inp["a"], t)), (kind, t, inp)
            assert o["a"] == inp["a"]


def test_comparator_threshold_out_of_range():
    with pytest.raises(ValueError):
        build_qc_lt(16, 4)
    with pytest.raises(ValueError):
        build_qc_eq(16, 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("cascade, tree", [(False, False), (True, False), (True, True)])
def test_and_or_truth_tables(n, cascade, tree):
    for build, fn in ((build_and, all), (build_or, any)):
        c = build(n, cascade, tree)
        cs = [{"inputs": v} for v in range(1 << n)]
        for inp, o in zip(cs, run_cases(c, cs)):
            bits = [inp["inputs"] >> k & 1 for k in range(n)]
            assert o["target"] == int(fn(bits)) and o["inputs"] == inp["inputs"]
            assert ancillas_clean(c, o)
        if cascade:
            assert resources(c).ancillas == max(n - 2, 0)


def test_tree_is_shallower_than_chain():
    chain = resources(build_and(16, cascade=True)).depth
    tree = resources(build_and(16, cascade=True, tree=True)).depth
    assert tree < chain


@pytest.mark.parametrize("layout", [SERIAL, PARALLEL])
def test_cuboid_2d(layout):
    box = ((1, 5), (2, 2))
    c = build_cuboid_test(box, 3, layout)
    cs = [{"i0": x, "i1": y} for x in range(8) for y in range(8)]
    for inp, o in zip(cs, run_cases(c, cs)):
        want = 1 <= inp["i0"] <= 5 and inp["i1"] == 2
        assert o["flag"] == int(want) and ancillas_clean(c, o)


def test_cuboid_bounds_checked():
    with pytest.raises(ValueError):
        build_cuboid_test(((0, 8),), 3)


def random_spec(rng, dims, nbits):
    top = (1 << nbits) - 1
    boxes = []
    for _ in range(rng.randint(1, 3)):
        box = []
        for _ in range(dims):
            lo = rng.randint(0, top)
            box.append((lo, rng.randint(lo, top)))
        boxes.append(tuple(box))
    return GeometrySpec(dims, tuple(boxes))


@given(st.integers(0, 2**32), st.sampled_from([SERIAL, PARALLEL]), st.integers(1, 2))
def test_union_of_boxes(seed, layout, dims):
    rng = random.Random(seed)
    nbits = 3
    spec = random_spec(rng, dims, nbits)
    c = build_union_test(spec, nbits, layout)
    points = list(itertools.product(range(1 << nbits), repeat=dims))
    cs = [{f"i{a}": p[a] for a in range(dims)} for p in points]
    for p, o in zip(points, run_cases(c, cs)):
        assert o["flag"] == int(spec.contains(p)) and ancillas_clean(c, o)


def test_union_with_ellipsoid():
    fmt = FixedPointFormat(12, 4)
    spec = GeometrySpec(2, (((0, 1), (6, 7)),), (Ellipsoid((4, 4), (2, 2)),))
    c = build_union_test(spec, 3, SERIAL, fmt)
    pts = list(itertools.product(range(8), repeat=2))
    outs = run_cases(c, [{"i0": x, "i1": y} for x, y in pts])
    for p, o in zip(pts, outs):
        assert o["flag"] == int(spec.contains(p)) and ancillas_clean(c, o)


@pytest.mark.parametrize("center, axes, spacing", [
    ((3,), (2,), 1),
    ((Fraction(5, 2),), (2,), 1),
    ((2, 3), (2, 4), 1),
    ((1, 1), (1, 1), Fraction(1, 2)),
])
def test_ellipsoid_matches_exact_membership(center, axes, spacing):
    fmt = FixedPointFormat(12, 4)
    c = build_ellipsoid_test(center, axes, 3, fmt, spacing)
    e = Ellipsoid(center, axes)
    q = QuadraticForm.from_ellipsoid(e, spacing)
    pts = list(itertools.product(range(8), repeat=len(center)))
    outs = run_cases(c, [{f"i{a}": p[a] for a in range(len(p))} for p in pts])
    for p, o in zip(pts, outs):
        assert o["flag"] == ref_ellipsoid_flag(q, p, fmt) == int(e.contains(p, spacing))
        assert ancillas_clean(c, o)


def test_ellipsoid_rejects_inexact_weight():
    with pytest.raises(ValueError):
        build_ellipsoid_test((2, 3), (2, 4), 3, FixedPointFormat(12, 2))


def test_geometry_spec_validation():
    with pytest.raises(ValueError):
        GeometrySpec(2, (((0, 1),),))
    with pytest.raises(ValueError):
        GeometrySpec(1, (((3, 1),),))
    with pytest.raises(ValueError):
        Ellipsoid((0,), (0,))
    with pytest.raises(ValueError):
        build_union_test(GeometrySpec(1), 3)
