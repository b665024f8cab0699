from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclat.schur import (
    TracePoleError,
    harmonic_prolongation,
    in_siegel_halfspace,
    trace_on_subset,
)


def rand_spd(rng, n):
    M = rng.standard_normal((n, n))
    return M @ M.T + n * np.eye(n)


def rand_siegel(rng, n):
    re = rng.standard_normal((n, n))
    im = rng.standard_normal((n, n))
    return (re + re.T) / 2 + 1j * (im @ im.T + 0.2 * np.eye(n))


def test_diagonal_trace_is_restriction():
    Q = np.diag([2.0, 3.0, 5.0, 7.0])
    out = trace_on_subset(Q, [0, 2])
    assert np.allclose(out, np.diag([2.0, 5.0]))


def test_two_by_two_value():
    Q = np.array([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]], dtype=object)
    out = trace_on_subset(Q, [0])
    assert out[0, 0] == Fraction(3, 2)


def test_matches_inverse_restrict_invert():
    rng = np.random.default_rng(0)
    for _ in range(25):
        Q = rand_spd(rng, 6)
        keep = [0, 2, 5]
        direct = trace_on_subset(Q, keep)
        oracle = np.linalg.inv(np.linalg.inv(Q)[np.ix_(keep, keep)])
        assert np.max(np.abs(direct - oracle)) <= 1e-10 * np.max(np.abs(oracle))


def test_singular_interior_raises():
    Q = np.zeros((3, 3))
    Q[0, 0] = 1.0
    with pytest.raises(TracePoleError):
        trace_on_subset(Q, [0])


def test_harmonic_prolongation_properties():
    rng = np.random.default_rng(1)
    Q = rand_spd(rng, 6)
    keep = [1, 3]
    f = rng.standard_normal(2)
    H = harmonic_prolongation(Q, keep, f)
    assert np.allclose(H[keep], f)
    drop = [i for i in range(6) if i not in keep]
    assert np.max(np.abs((Q @ H)[drop])) <= 1e-10
    assert np.allclose(trace_on_subset(Q, keep) @ f, (Q @ H)[keep])


def test_identity_prolongation_is_zero_extension():
    # with Q = Id the prolongation leaves the subset values and puts 0 inside
    f = np.array([2.0, -1.0, 0.5])
    H = harmonic_prolongation(np.eye(6), [0, 3, 5], f)
    assert np.allclose(H[[0, 3, 5]], f)
    assert np.allclose(H[[1, 2, 4]], 0)


def test_zero_boundary_data():
    rng = np.random.default_rng(2)
    Q = rand_spd(rng, 5)
    H = harmonic_prolongation(Q, [0, 1], np.zeros(2))
    assert np.allclose(H, 0)


def test_variational_characterization():
    # <Q_F' f, f> minimizes <Qg, g> over extensions; compare with the
    # stationarity-system least-squares solve
    rng = np.random.default_rng(3)
    for _ in range(10):
        Q = rand_spd(rng, 6)
        keep = [0, 4]
        drop = [1, 2, 3, 5]
        f = rng.standard_normal(2)
        direct = f @ trace_on_subset(Q, keep) @ f
        g_int, *_ = np.linalg.lstsq(Q[np.ix_(drop, drop)], -Q[np.ix_(drop, keep)] @ f, rcond=None)
        g = np.zeros(6)
        g[keep] = f
        g[drop] = g_int
        assert direct == pytest.approx(g @ Q @ g, rel=1e-10)
        for _ in range(5):  # any other extension does worse
            h = g.copy()
            h[drop] += rng.standard_normal(4)
            assert h @ Q @ h >= direct - 1e-10


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_tower_property(seed):
    rng = np.random.default_rng(seed)
    Q = rand_spd(rng, 6)
    inner = [0, 2]
    outer = [0, 2, 3, 5]
    once = trace_on_subset(Q, inner)
    # positions of `inner` inside `outer`
    twice = trace_on_subset(trace_on_subset(Q, outer), [0, 1])
    assert np.max(np.abs(once - twice)) <= 1e-10 * np.max(np.abs(once))


def test_markov_property_preserved():
    rng = np.random.default_rng(5)
    for _ in range(10):
        W = np.abs(rng.standard_normal((5, 5)))
        W = (W + W.T) / 2
        np.fill_diagonal(W, 0)
        Q = np.diag(W.sum(axis=1)) - W
        out = trace_on_subset(Q, [0, 1, 4])
        assert np.allclose(out.sum(axis=1), 0, atol=1e-10)
        off = out - np.diag(np.diag(out))
        assert off.max() <= 1e-10


def test_siegel_inputs_never_pole():
    rng = np.random.default_rng(6)
    for _ in range(100):
        Q = rand_siegel(rng, 6)
        assert in_siegel_halfspace(Q)
        out = trace_on_subset(Q, [0, 1, 2])  # must not raise
        assert out.shape == (3, 3)
