import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import ancillas_clean, run_cases
from femoracle.circuit import adjoint, run_batch
from femoracle.fixedpoint import (FixedPointFormat, decode_code, encode_code, leading_one_x0,
                                  ref_exp_state, ref_insq, ref_insq_residue, ref_inmul,
                                  ref_inmul_residue, ref_qc_exp_state, ref_rec_iterates,
                                  ref_rec_nr, ref_rec_step, ref_rsqrt_nr, ref_rsqrt_step,
                                  ref_sig, ref_sqrt_nr)
from femoracle.newton import (LEADING_ONE, NewtonConfig, build_exp, build_inmul, build_insq,
                              build_leading_one_init, build_qc_exp, build_rec, build_rec_step,
                              build_rsqrt, build_rsqrt_step, build_sig, build_sqrt,
                              iterate_slots, num_x_registers)

SMALL = FixedPointFormat(6, 4, False)
WIDE = FixedPointFormat(12, 10, False)


def value(code, fmt=SMALL):
    return decode_code(code, fmt)


# -- configuration ----------------------------------------------------------

def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        NewtonConfig(0)
    with pytest.raises(ValueError):
        NewtonConfig(3, -1)
    with pytest.raises(ValueError):
        NewtonConfig(3, 1, (Fraction(1, 4), 4))  # sqrt(4) * 1 = 2 > 1.56
    with pytest.raises(ValueError):
        NewtonConfig(3, 1, (Fraction(1, 4), 2), kind="reciprocal")  # 2 * 1 = 2
    NewtonConfig(3, Fraction(1, 2), (Fraction(1, 4), 4))
    assert NewtonConfig(3, LEADING_ONE).coherent


def test_iterate_slots_reuse_x0():
    assert iterate_slots(4) == [0, 1, 0, 2, 3]
    assert iterate_slots(2, keep=True) == [0, 1, 2]
    assert num_x_registers(1) == 2 and num_x_registers(5) == 5


# -- single steps -----------------------------------------------------------

def test_rsqrt_step_exhaustive():
    c = build_rsqrt_step(SMALL)
    cases = [{"S": s, "x": x} for s, x in itertools.product(range(64), repeat=2)]
    for inp, o in zip(cases, run_cases(c, cases)):
        assert o["x_next"] == ref_rsqrt_step(inp["S"], inp["x"], SMALL)
        assert ancillas_clean(c, o) and (o["S"], o["x"]) == (inp["S"], inp["x"])


def test_rec_step_exhaustive():
    c = build_rec_step(SMALL)
    cases = [{"R": s, "x": x} for s, x in itertools.product(range(64), repeat=2)]
    for inp, o in zip(cases, run_cases(c, cases)):
        assert o["x_next"] == ref_rec_step(inp["R"], inp["x"], SMALL)
        assert ancillas_clean(c, o)


def test_rsqrt_step_examples():
    f = WIDE
    assert ref_rsqrt_step(encode_code(1, f), encode_code(1, f), f) == encode_code(1, f)
    got = value(ref_rsqrt_step(encode_code(Fraction(1, 4), f), encode_code(1, f), f), f)
    assert abs(got - Fraction(11, 8)) <= 4 * f.ulp
    got = value(ref_rsqrt_step(0, encode_code(Fraction(1, 2), f), f), f)
    assert got == Fraction(3, 4)


# -- chains -------------------------------------------------------------------

@pytest.mark.parametrize("L", [1, 2, 3])
def test_rsqrt_sqrt_rec_chains_exhaustive(L):
    cfg = NewtonConfig(L, 1)
    cases = [{"S": s} for s in range(64)]
    for build, ref, name in [(build_rsqrt, ref_rsqrt_nr, "S"), (build_sqrt, ref_sqrt_nr, "S"),
                             (build_rec, ref_rec_nr, "R")]:
        c = build(SMALL, cfg)
        cs = [{name: d["S"]} for d in cases]
        for inp, o in zip(cs, run_cases(c, cs)):
            assert o["result"] == ref(inp[name], SMALL, L, 1), (build.__name__, inp)
            assert ancillas_clean(c, o)


def test_coherent_start_chains():
    cfg = NewtonConfig(2, LEADING_ONE)
    for build, ref, name in [(build_sqrt, ref_sqrt_nr, "S"), (build_rec, ref_rec_nr, "R")]:
        c = build(SMALL, cfg)
        cs = [{name: v} for v in range(64)]
        for inp, o in zip(cs, run_cases(c, cs)):
            assert o["result"] == ref(inp[name], SMALL, 2, LEADING_ONE)
            assert ancillas_clean(c, o)


@pytest.mark.parametrize("build, ref, name", [(build_sqrt, ref_sqrt_nr, "S"),
                                              (build_rec, ref_rec_nr, "R")])
def test_wide_chains_random(build, ref, name):
    c = build(WIDE, NewtonConfig(4, 1))
    rng = random.Random(7)
    cs = [{name: rng.randrange(1, 1 << WIDE.r)} for _ in range(500)]
    for inp, o in zip(cs, run_cases(c, cs)):
        assert o["result"] == ref(inp[name], WIDE, 4, 1) and ancillas_clean(c, o)


def test_sqrt_examples():
    c = build_sqrt(WIDE, NewtonConfig(4, 1))
    out = run_cases(c, [{"S": encode_code(1, WIDE)}, {"S": encode_code(Fraction(1, 4), WIDE)}])
    assert out[0]["result"] == encode_code(1, WIDE)
    assert abs(value(out[1]["result"], WIDE) - Fraction(1, 2)) <= Fraction(1, 64)


def test_rec_iterates_for_half():
    f = FixedPointFormat(16, 12, False)
    xs = [value(x, f) for x in ref_rec_iterates(encode_code(Fraction(1, 2), f), f, 3, 1)]
    assert xs[:3] == [1, Fraction(3, 2), Fraction(15, 8)]
    assert abs(xs[3] - Fraction(255, 128)) <= 2 * f.ulp


@pytest.mark.parametrize("L, r", [(2, 6), (3, 8), (4, 12), (5, 7)])
def test_chain_qubit_formulas(L, r):
    f = FixedPointFormat(r, r - 2, False)
    cfg = NewtonConfig(L, 1)
    assert build_sqrt(f, cfg).num_qubits == (L + 4) * r + 1 + r
    # with two steps the kept iterate needs a third x-register
    extra = r if L == 2 else 0
    assert build_rec(f, cfg).num_qubits == (L + 3) * r + 1 + extra


def test_sqrt_qubit_example():
    assert build_sqrt(FixedPointFormat(8, 6, False), NewtonConfig(3, 1)).num_qubits == 65


# -- leading-one initialiser -------------------------------------------------

@pytest.mark.parametrize("kind", ["reciprocal", "rsqrt"])
def test_leading_one_circuit_exhaustive(kind):
    f = FixedPointFormat(8, 5, False)
    c = build_leading_one_init(f, kind)
    cs = [{"R": v} for v in range(256)]
    for inp, o in zip(cs, run_cases(c, cs)):
        assert o["x0"] == leading_one_x0(inp["R"], f, kind) and o["flags"] == 0


def test_leading_one_is_self_inverse():
    f = FixedPointFormat(6, 3, False)
    c = build_leading_one_init(f)
    states = [c.pack({"R": v, "x0": x}) for v in range(64) for x in range(64)]
    assert run_batch(c, run_batch(c, states)) == states


@pytest.mark.parametrize("R, p, x0", [(1, 0, Fraction(1, 2)), (6, 2, Fraction(1, 8)),
                                      (4, 2, Fraction(1, 8))])
def test_leading_one_examples(R, p, x0):
    f = FixedPointFormat(8, p + 3, False) if p == 0 else FixedPointFormat(8, p + 3, False)
    got = value(leading_one_x0(encode_code(R, f), f, "reciprocal"), f)
    assert got == x0
    assert Fraction(1, 2) <= R * got < 1


@given(st.integers(1, 2**10 - 1))
def test_leading_one_window(code):
    f = FixedPointFormat(10, 5, False)
    x0 = value(leading_one_x0(code, f, "reciprocal"), f)
    if x0:
        assert Fraction(1, 2) <= value(code, f) * x0 < 1


# -- convergence on exact arithmetic ------------------------------------------

@given(st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=64),
       st.floats(min_value=0.01, max_value=0.99))
def test_rsqrt_error_recursion(q, frac):
    # S = q^2 keeps sqrt(S) rational, so the recursion is checked exactly
    S = q * q
    x = Fraction(frac) * Fraction(156, 100) / q
    for _ in range(4):
        eps = abs(1 - q * x)
        nxt = x * (3 - S * x * x) / 2
        assert abs(1 - q * nxt) <= abs(1 + q * x / 2) * eps * eps
        x = nxt


@given(st.fractions(min_value=Fraction(1, 16), max_value=16, max_denominator=64),
       st.floats(min_value=0.01, max_value=1.99))
def test_rec_error_squares(R, frac):
    x = Fraction(frac) / R
    for _ in range(4):
        eps = abs(1 - R * x)
        x = x * (2 - R * x)
        assert abs(1 - R * x) == eps * eps


@pytest.mark.parametrize("kind", ["sqrt", "rec"])
def test_accuracy_monotone_in_L(kind):
    # 18 fractional bits keep the truncation floor below the L=5 iteration
    # error; at p=10 the floor is reached by L=4 and the maximum then jitters
    f = FixedPointFormat(20, 18, False)
    grid = [Fraction(k, 16) for k in range(8, 32)]
    errs = []
    for L in range(1, 6):
        if kind == "sqrt":
            e = max(abs(float(value(ref_sqrt_nr(encode_code(S, f), f, L, 1), f)) - math.sqrt(S))
                    for S in grid)
        else:
            e = max(abs(float(value(ref_rec_nr(encode_code(S, f), f, L, 1), f)) - 1 / S)
                    for S in grid)
        errs.append(e)
    assert all(b <= a for a, b in zip(errs, errs[1:])), errs


@pytest.mark.parametrize("kind", ["sqrt", "rec"])
def test_exact_iteration_error_monotone_in_L(kind):
    grid = [Fraction(k, 16) for k in range(2, 32)]
    prev = None
    for L in range(1, 6):
        worst = 0.0
        for S in grid:
            x = Fraction(1)
            for _ in range(L):
                x = x * (3 - S * x * x) / 2 if kind == "sqrt" else x * (2 - S * x)
            target = 1 / math.sqrt(S) if kind == "sqrt" else 1 / S
            worst = max(worst, abs(float(x) - target))
        assert prev is None or worst <= prev
        prev = worst


# -- in-place square and multiply ---------------------------------------------

def test_insq_matches_mirror_and_is_reversible():
    cfg = NewtonConfig(2, 1)
    c = build_insq(SMALL, cfg)
    cs = [{"a": a} for a in range(64)]
    outs = run_cases(c, cs)
    for inp, o in zip(cs, outs):
        assert o["a"] == ref_insq(inp["a"], SMALL)
        assert o["D"] == ref_insq_residue(inp["a"], SMALL, 2, 1)
        assert ancillas_clean(c, o, skip={"D"})
    states = [c.pack(d) for d in cs]
    assert run_batch(adjoint(c), run_batch(c, states)) == states


def test_inmul_matches_mirror_and_is_reversible():
    cfg = NewtonConfig(2, 1)
    c = build_inmul(SMALL, cfg)
    cs = [{"a": a, "b": b} for a, b in itertools.product(range(64), repeat=2)]
    outs = run_cases(c, cs)
    for inp, o in zip(cs, outs):
        assert o["b"] == ref_inmul(inp["a"], inp["b"], SMALL)
        assert o["D"] == ref_inmul_residue(inp["a"], inp["b"], SMALL, 2, 1)
        assert ancillas_clean(c, o, skip={"D"}) and o["a"] == inp["a"]
    states = [c.pack(d) for d in cs]
    assert run_batch(adjoint(c), run_batch(c, states)) == states


def test_insq_examples():
    f = FixedPointFormat(12, 4, False)
    cfg = NewtonConfig(4, Fraction(1, 2), (Fraction(1, 4), 4))
    c = build_insq(f, cfg)
    out = run_cases(c, [{"a": encode_code(1, f)}, {"a": encode_code(2, f)}])
    assert out[0]["a"] == encode_code(1, f)
    assert out[1]["a"] == encode_code(4, f)
    assert value(out[1]["D"], f) <= Fraction(1, 64)


def test_inmul_example():
    f = FixedPointFormat(12, 8, False)
    cfg = NewtonConfig(4, Fraction(1, 2), (Fraction(1, 4), 2), kind="reciprocal")
    c = build_inmul(f, cfg)
    o = run_cases(c, [{"a": encode_code(2, f), "b": encode_code(3, f)},
                      {"a": encode_code(1, f), "b": encode_code(Fraction(5, 4), f)}])
    assert abs(value(o[0]["b"], f) - 6) <= Fraction(1, 64)
    assert o[1]["b"] == encode_code(Fraction(5, 4), f)


def test_inmul_qubit_formula():
    for L in (2, 3, 4):
        assert build_inmul(FixedPointFormat(8, 6, False), NewtonConfig(L, 1)).num_qubits == (L + 5) * 8 + 1


def test_insq_qubit_formula():
    # the published count (L+3)r+1 leaves no room for the input, the square
    # root's own (L+4)r+1 and the extra copy register; see the decisions log
    for L in (2, 3, 4):
        r = 8
        assert build_insq(FixedPointFormat(r, 6, False), NewtonConfig(L, 1)).num_qubits == (L + 3) * r + 1


# -- exponentiation -----------------------------------------------------------

def _state_of(o):
    return o["result"], o["b"], o["P0"]


def test_exp_matches_mirror_exhaustively():
    f = FixedPointFormat(6, 3, False)
    c = build_exp(f, NewtonConfig(3, 1))
    cs = [{"a": a, "b": b} for a in range(64) for b in range(64)]
    for inp, o in zip(cs, run_cases(c, cs)):
        st_ = ref_exp_state(inp["a"], inp["b"], f, 3, 1)
        assert _state_of(o) == (st_.target, st_.base, st_.residue)
        assert ancillas_clean(c, o, skip={"P0"}) and o["a"] == inp["a"]


@pytest.mark.parametrize("e", [Fraction(1, 2), Fraction(3, 4), Fraction(5, 2), Fraction(1, 8), 3])
def test_qc_exp_matches_mirror(e):
    f = FixedPointFormat(6, 3, False)
    c = build_qc_exp(e, f, NewtonConfig(3, 1))
    cs = [{"b": b} for b in range(64)]
    for inp, o in zip(cs, run_cases(c, cs)):
        st_ = ref_qc_exp_state(e, inp["b"], f, 3, 1)
        assert _state_of(o) == (st_.target, st_.base, st_.residue)


def test_sig_matches_mirror_and_cleans_pool():
    f = FixedPointFormat(6, 3, False)
    coeffs = [Fraction(1, 4), 1, Fraction(1, 2), Fraction(-1, 4)]
    c = build_sig(coeffs, 2, f, NewtonConfig(3, 1))
    cs = [{"b": b} for b in range(64)]
    for inp, o in zip(cs, run_cases(c, cs)):
        assert o["result"] == ref_sig(coeffs, 2, inp["b"], f, 3, 1)
        assert ancillas_clean(c, o) and o["b"] == inp["b"]


def test_sig_constant_only():
    f = FixedPointFormat(6, 3, False)
    c = build_sig([Fraction(3, 2)], 2, f, NewtonConfig(2, 1))
    assert all(o["result"] == encode_code(Fraction(3, 2), f)
               for o in run_cases(c, [{"b": b} for b in range(64)]))


def test_sig_gate_count_linear_in_terms():
    f = FixedPointFormat(6, 3, False)
    cfg = NewtonConfig(2, 1)
    counts = [len(build_sig([0] + [1] * J, 4, f, cfg).gates) for J in (1, 2, 3)]
    # J nonzero terms, exponents 1/4, 2/4, 3/4: costs differ per exponent, so
    # check growth is monotone and no worse than linear in the largest term
    assert counts[0] < counts[1] < counts[2]
    assert counts[2] <= 3 * max(counts[0], counts[1] - counts[0], counts[2] - counts[1])


def test_exp_qubit_formulas():
    f = FixedPointFormat(6, 3, False)
    for L in (2, 3):
        cfg = NewtonConfig(L, 1)
        assert build_exp(f, cfg).num_qubits == (L + 7) * 6 + 1
        assert build_qc_exp(Fraction(1, 2), f, cfg).num_qubits == (L + 6) * 6 + 1
        assert build_sig([0, 1], 2, f, cfg).num_qubits == (L + 7) * 6 + 1
