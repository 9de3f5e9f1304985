"""Kernel correctness against brute-force oracles, and bit-for-bit agreement
between the compiled and pure-Python backends."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sbmgrowth import _kernels

BACKENDS = _kernels.available_backends()
both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")

weights_st = hnp.arrays(
    np.float64,
    st.integers(1, 60),
    elements=st.one_of(st.just(0.0), st.floats(1e-6, 1e6)),
).filter(lambda w: w.sum() > 0)


@pytest.fixture(params=BACKENDS)
def kern(request):
    return _kernels.backend_module(request.param)


def exact_alias_distribution(prob, alias):
    n = len(prob)
    out = prob.astype(float).copy()
    for k in range(n):
        out[alias[k]] += 1.0 - prob[k]
    return out / n


def test_triangle_decode_against_loops(kern):
    n = 90
    expected = [(r, c) for c in range(n) for r in range(c + 1)]
    row, col = kern.triangle_decode(np.arange(len(expected)))
    assert list(zip(row.tolist(), col.tolist())) == expected


def test_triangle_decode_large_slots(kern):
    c = np.array([10**6, 3 * 10**7, 2**31], dtype=np.int64)
    for r_off in (0, 1):
        rows = c - r_off
        s = c * (c + 1) // 2 + rows
        row, col = kern.triangle_decode(s)
        np.testing.assert_array_equal(col, c)
        np.testing.assert_array_equal(row, rows)


def test_weighted_degrees_counts_loops_once(kern):
    i = np.array([0, 0, 1, 2])
    j = np.array([0, 1, 2, 2])
    w = np.array([5.0, 1.0, 2.0, 7.0])
    np.testing.assert_array_equal(kern.weighted_degrees(4, i, j, w), [6.0, 3.0, 9.0, 0.0])


@settings(max_examples=200)
@given(w=weights_st)
def test_alias_table_reproduces_weights(w):
    for name in BACKENDS:
        prob, alias = _kernels.backend_module(name).alias_build(w)
        assert np.all((prob >= 0) & (prob <= 1))
        got = exact_alias_distribution(prob, alias)
        np.testing.assert_allclose(got, w / w.sum(), rtol=1e-9, atol=1e-12)
        # zero weights are never drawn
        assert np.all(got[w == 0] == 0)


def test_alias_rejects_zero_total(kern):
    with pytest.raises(ValueError):
        kern.alias_build(np.zeros(4))


def test_alias_draw_frequencies(kern):
    rng = np.random.default_rng(11)
    w = np.array([1.0, 0.0, 3.0, 6.0])
    prob, alias = kern.alias_build(w)
    m = 200_000
    out = kern.alias_draw(prob, alias, rng.integers(0, 4, m), rng.random(m))
    freq = np.bincount(out, minlength=4) / m
    se = np.sqrt(w / w.sum() * (1 - w / w.sum()) / m)
    assert np.all(np.abs(freq - w / w.sum()) <= 4 * se + 1e-12)


def _brute_ratio(p, rw, bw):
    acc = nonempty = empty = 0.0
    e = len(p)
    for mask in range(1 << e):
        bits = [(mask >> k) & 1 for k in range(e)]
        pr = np.prod([p[k] if bits[k] else 1 - p[k] for k in range(e)])
        r = sum(rw[k] for k in range(e) if bits[k])
        b = sum(bw[k] for k in range(e) if bits[k])
        if r + b > 0:
            acc += pr * r / (r + b)
            nonempty += pr
        else:
            empty += pr
    return acc, nonempty, empty


def test_enumerate_ratio_against_brute_force(kern):
    rng = np.random.default_rng(5)
    p = rng.uniform(0.05, 0.95, 8)
    rw = rng.choice([0.0, 1.0, 2.0], 8)
    bw = rng.choice([0.0, 1.5], 8)
    got = kern.enumerate_ratio(p, rw, bw)
    np.testing.assert_allclose(got, _brute_ratio(p, rw, bw), rtol=1e-13)
    assert got[1] + got[2] == pytest.approx(1.0, abs=1e-14)


# -- backend parity ---------------------------------------------------------


@both
@settings(max_examples=200)
@given(w=weights_st, seed=st.integers(0, 2**32 - 1))
def test_alias_parity_bitwise(w, seed):
    c, py = (_kernels.backend_module(n) for n in ("cython", "python"))
    pc, ac = c.alias_build(w)
    pp, ap = py.alias_build(w)
    np.testing.assert_array_equal(pc, pp)
    np.testing.assert_array_equal(ac, ap)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(w), 500)
    coin = rng.random(500)
    np.testing.assert_array_equal(c.alias_draw(pc, ac, idx, coin), py.alias_draw(pp, ap, idx, coin))


@both
@given(slots=hnp.arrays(np.int64, st.integers(0, 200), elements=st.integers(0, 2**50)))
def test_triangle_parity(slots):
    rc, cc = _kernels.backend_module("cython").triangle_decode(slots)
    rp, cp = _kernels.backend_module("python").triangle_decode(slots)
    np.testing.assert_array_equal(rc, rp)
    np.testing.assert_array_equal(cc, cp)


@both
@given(data=st.data())
def test_degree_parity(data):
    n = data.draw(st.integers(1, 50))
    m = data.draw(st.integers(0, 200))
    a = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m)), dtype=np.int64)
    b = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m)), dtype=np.int64)
    w = np.array(data.draw(st.lists(st.floats(0.0, 1e3), min_size=m, max_size=m)), dtype=np.float64)
    i, j = np.minimum(a, b), np.maximum(a, b)
    dc = _kernels.backend_module("cython").weighted_degrees(n, i, j, w)
    dp = _kernels.backend_module("python").weighted_degrees(n, i, j, w)
    np.testing.assert_array_equal(dc, dp)


@both
def test_enumerate_parity_to_rounding():
    rng = np.random.default_rng(9)
    p = rng.uniform(0.01, 0.99, 16)
    rw = rng.uniform(0, 3, 16)
    bw = rng.uniform(0, 3, 16)
    c = _kernels.backend_module("cython").enumerate_ratio(p, rw, bw)
    py = _kernels.backend_module("python").enumerate_ratio(p, rw, bw)
    np.testing.assert_allclose(c, py, rtol=1e-13)


def test_use_backend_switches_module_functions():
    before = _kernels.BACKEND
    try:
        _kernels.use_backend("python")
        assert _kernels.alias_build is _kernels.backend_module("python").alias_build
        with pytest.raises(ValueError):
            _kernels.use_backend("fortran")
    finally:
        _kernels.use_backend(before)
