"""Trigonometric polynomial invariants: reality, means, Fejer damping."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apcl.freqlattice import Frequency, FrequencyBasis
from apcl.trigpoly import (
    TorusPoly,
    TrigPoly,
    combine,
    fejer_damp,
    fejer_factor,
    mean_and_coeff,
    truncate,
)

B1 = FrequencyBasis.rational()
B2 = FrequencyBasis.with_sqrt(2)

XI = Frequency.of(B1, [[1]])


def sine_poly(mean=0.3, amp=0.5, freq=XI):
    # mean + amp*sin(2 pi xi.x): a_xi = amp/2i = -i*amp/2
    zero = Frequency.of(freq.basis, [[0] * freq.basis.dim] * freq.n)
    return TrigPoly(
        freq.basis,
        freq.n,
        {zero: complex(mean), freq: amp / 2j},
    )


def test_eval_constant():
    p = TrigPoly.constant(B1, 1, 0.7)
    assert p.eval([0.123]) == pytest.approx(0.7, abs=1e-15)
    assert p.eval(np.array([[0.0], [0.9]])) == pytest.approx([0.7, 0.7])


def test_eval_sine_peak():
    p = TrigPoly.sine(XI, 0.5)
    assert p.eval([0.25]) == pytest.approx(0.5, abs=1e-14)


def test_eval_two_cosines_torus():
    # cos 2pi y1 + cos 2pi y2 at the origin
    v = TorusPoly(2, {(1, 0): 0.5, (0, 1): 0.5})
    assert v.eval([0.0, 0.0]) == pytest.approx(2.0, abs=1e-14)
    assert v.eval([0.5, 0.5]) == pytest.approx(-2.0, abs=1e-14)


def test_eval_dimension_mismatch():
    p = TrigPoly.sine(XI)
    with pytest.raises(ValueError):
        p.eval([0.1, 0.2])


def test_mean_and_coeff():
    p = sine_poly()
    zero = Frequency.of(B1, [[0]])
    assert mean_and_coeff(p, zero) == (0.3, pytest.approx(0.3))
    mean, c = mean_and_coeff(p, XI)
    assert mean == 0.3
    assert c == pytest.approx(-0.25j)
    two_xi = Frequency.of(B1, [[2]])
    assert mean_and_coeff(p, two_xi)[1] == 0


def test_reality_invariant_enforced():
    with pytest.raises(ValueError):
        # zero frequency with an imaginary coefficient
        TrigPoly(B1, 1, {Frequency.of(B1, [[0]]): 1j})
    with pytest.raises(ValueError):
        TrigPoly(B1, 1, [(XI, 0.5), (-XI, 0.5j)])  # conjugate conflict


def test_combine_cancellation_and_scaling():
    p = sine_poly()
    z = combine(1.0, p, -1.0, p)
    assert z.spectrum() == ()
    c1 = TrigPoly.constant(B1, 1, 1.0)
    q = combine(2.0, c1, 0.0, p)
    assert q.mean == pytest.approx(2.0)
    assert len(q.spectrum()) == 1


def test_combine_sine_plus_cosine():
    s = TrigPoly.sine(XI)
    c = TrigPoly.cosine(XI)
    both = combine(1.0, s, 1.0, c)
    # a_xi = 1/2 + 1/(2i) = (1 - i)/2
    assert both.coeff(XI) == pytest.approx((1 - 1j) / 2)
    assert both.eval([0.125]) == pytest.approx(
        np.sin(2 * np.pi * 0.125) + np.cos(2 * np.pi * 0.125)
    )


def test_combine_basis_mismatch():
    with pytest.raises(ValueError):
        combine(1.0, sine_poly(), 1.0, TrigPoly.constant(B2, 1, 1.0))


def test_fejer_factor_values():
    assert fejer_factor((1,), 2) == pytest.approx(0.5)
    assert fejer_factor((0, 0), 7) == 1.0
    assert fejer_factor((1, 2), 2) == 0.0
    assert fejer_factor((3,), 2) == 0.0


def test_fejer_damp_drops_and_scales():
    v = TorusPoly(2, {(1, 0): 0.5, (1, 2): 0.25, (0, 0): 1.0})
    d = fejer_damp(v, 2)
    assert d.coeff((0, 0)) == 1.0
    assert d.coeff((1, 0)) == pytest.approx(0.25)
    assert (1, 2) not in d.terms
    with pytest.raises(ValueError):
        fejer_damp(v, 0)


def test_fejer_damp_positivity():
    # (1 + cos 2 pi y)^2 = 3/2 + 2 cos + (1/2) cos 4 pi y, nonnegative
    sq = TorusPoly(1, {(0,): 1.5, (1,): 1.0, (2,): 0.25})
    ys = np.linspace(0.0, 1.0, 2001).reshape(-1, 1)
    assert sq.eval(ys).min() >= -1e-12
    for r in (2, 3, 5, 8):
        damped = fejer_damp(sq, r)
        assert damped.eval(ys).min() >= -1e-12


def test_fejer_damp_converges():
    v = TorusPoly(2, {(1, 0): 0.5, (0, 1): 0.25j, (0, -1): -0.25j})
    kmax = 1
    for r in (4, 8, 16):
        d = fejer_damp(v, r)
        for k, a in v.terms.items():
            err = abs(d.coeff(k) - a)
            assert err <= 2 * kmax / r * abs(a) + 1e-15


def test_truncate():
    p = TrigPoly(B2, 1, {
        Frequency.of(B2, [[1, 0]]): 0.5,
        Frequency.of(B2, [[0, 1]]): 1e-9,
    })
    assert truncate(p, 0.0).terms == p.terms
    t = truncate(p, 1e-6)
    assert len(t.spectrum()) == 2  # the +/- pair of the big term
    assert all(abs(a) > 1e-6 for a in t.terms.values())


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_reality_random_points(data):
    ks = data.draw(st.sets(st.integers(0, 4), min_size=1, max_size=4))
    terms = {}
    for k in ks:
        re = data.draw(st.floats(-2, 2, allow_nan=False))
        im = data.draw(st.floats(-2, 2, allow_nan=False))
        f = Frequency.of(B1, [[k]])
        terms[f] = complex(re) if k == 0 else complex(re, im)
    p = TrigPoly(B1, 1, terms)
    xs = np.linspace(-3, 3, 997).reshape(-1, 1)
    vals = p.eval(xs)  # internal assert carries the reality bound
    assert np.all(np.isfinite(vals))


def test_parseval_desk_scale():
    rng = np.random.default_rng(20240817)
    terms = {}
    for k in [(1, 0), (0, 1), (2, 1), (-1, 2)]:
        terms[k] = complex(rng.normal(), rng.normal())
    terms[(0, 0)] = complex(rng.normal())
    v = TorusPoly(2, terms)
    n = 16  # > 2*max|k_j|
    ys = np.stack(
        np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij"), axis=-1
    ).reshape(-1, 2)
    quad = float(np.mean(v.eval(ys) ** 2))
    exact = sum(abs(a) ** 2 for a in v.terms.values())
    assert quad == pytest.approx(exact, abs=1e-10)


def test_fejer_damp_linear():
    v = TorusPoly(1, {(1,): 0.5, (2,): 0.25})
    w = TorusPoly(1, {(1,): -0.25, (0,): 1.0})
    r = 3
    left = fejer_damp(TorusPoly(1, {
        k: v.coeff(k) + w.coeff(k)
        for k in set(v.terms) | set(w.terms)
    }), r)
    for k in set(v.terms) | set(w.terms) | set(left.terms):
        expect = fejer_factor(k, r) * (v.coeff(k) + w.coeff(k))
        assert left.coeff(k) == pytest.approx(expect, abs=1e-15)
