import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from fraclat.dynamics import (
    BiProjectiveMap,
    DegreeMatrix,
    GASKET_EXCEPTIONAL,
    RationalMap1D,
    bidegree_sequence,
    compose_reduce_1d,
    dichotomy_classify,
    dynamical_degree,
    gasket_conjugacy_holds,
    gasket_limit_measure,
    gasket_limit_truncation_deficit,
    gasket_maps,
    growth_check,
    interval_green_estimate,
    interval_maps,
    interval_phi_coords,
    interval_rhat_iterate_symbolic,
    phat_preimage_tree,
    phat_preimages,
)


@pytest.fixture(scope="module")
def gm():
    return gasket_maps()


def test_fixed_points_and_roots(gm):
    assert gm.ghat(0) == 0
    assert gm.phat(Fraction(-5, 2)) == 0
    assert gm.phat(Fraction(-3, 2)) == -3


def test_conjugacy_exact():
    assert gasket_conjugacy_holds()


def test_ghat_degree_doubling(gm):
    _, degs = compose_reduce_1d(gm.ghat, 5)
    assert degs == [2, 4, 8, 16, 32]


def test_phat_degree_doubling(gm):
    _, degs = compose_reduce_1d(gm.phat, 5)
    assert degs == [2, 4, 8, 16, 32]


def test_identity_degree_one():
    ident = RationalMap1D.from_coeffs([0, 1], [1])
    assert compose_reduce_1d(ident, 4)[1] == [1, 1, 1, 1]


def test_gasket_degree_matrix(gm):
    assert gm.g.degree_matrix().entries == ((1, 1), (1, 2))


def test_bidegree_sequence_submultiplicative(gm):
    mats = bidegree_sequence(gm.g, 3)
    assert mats[0].entries == ((1, 1), (1, 2))
    assert mats[1] <= mats[0].matmul(mats[0])
    assert mats[2] <= mats[0].matmul(mats[1])
    roots = [m.l_n ** (1.0 / (k + 1)) for k, m in enumerate(mats)]
    assert all(a >= b - 1e-12 for a, b in zip(roots[:-1], roots[1:]))


def test_product_map_block_diagonal_degrees(gm):
    from fraclat.dynamics import U0, U1, V0, V1

    # (ghat acting on the first factor, identity on the second)
    num = gm.ghat.numerator.as_expr().subs(sympy.Symbol("z"), U0 / V0) * V0**2
    den = gm.ghat.denominator.as_expr().subs(sympy.Symbol("z"), U0 / V0) * V0**2
    prod = BiProjectiveMap(
        ((sympy.expand(num), sympy.expand(den)), (U1, V1))
    )
    assert prod.degree_matrix().entries == ((2, 0), (0, 1))


def test_lift_component_form(gm):
    from fraclat.dynamics import U0, U1, V0, V1

    lift = gm.lift
    assert sympy.expand(lift[0] - 3 * U0 * U1 * V1) == 0
    assert sympy.expand(lift[1] - (2 * U0 * V1**2 + V0 * U1 * V1)) == 0


def test_preimages_depth_zero():
    assert phat_preimages(-1.5, 0) == [-1.5]


def test_preimages_depth_one_closed_form():
    got = phat_preimages(-1.5, 1)
    want = sorted([(-5 + math.sqrt(13)) / 4, (-5 - math.sqrt(13)) / 4])
    assert got == pytest.approx(want, abs=1e-14)
    got = phat_preimages(-2.5, 1)
    want = sorted([(-5 + math.sqrt(5)) / 4, (-5 - math.sqrt(5)) / 4])
    assert got == pytest.approx(want, abs=1e-14)


def test_preimages_counts_and_interval():
    for k in range(5):
        for target in (-1.5, -2.5):
            pts = phat_preimages(target, k)
            assert len(pts) == 2**k
            assert all(-2.5 - 1e-12 <= p <= 0.0 for p in pts)


def test_preimages_rejects_outside_interval():
    with pytest.raises(ValueError):
        phat_preimages(0.5, 1)


def test_preimage_tree_structure():
    tree = phat_preimage_tree(-1.5, 3)
    assert len(tree) == 1 + 2 + 4 + 8
    for node in tree[1:]:
        parent = tree[node["parent"]]
        assert node["depth"] == parent["depth"] + 1
        # child maps back to parent under phat
        v = node["location"]
        assert v * (5 + 2 * v) == pytest.approx(parent["location"], abs=1e-9)


def test_limit_measure_depth_zero():
    m = gasket_limit_measure(0)
    assert [(loc, mass) for loc, mass in m.atoms] == [
        (-3.0, Fraction(1, 2)),
        (-2.5, Fraction(1, 6)),
        (-1.5, Fraction(1, 6)),
    ]


def test_limit_measure_masses_exact_rationals():
    m = gasket_limit_measure(4)
    for loc, mass in m.atoms:
        assert isinstance(mass, Fraction)
        assert -3.0 - 1e-12 <= float(loc) <= 0.0
    assert m.total_mass + gasket_limit_truncation_deficit(4) == Fraction(3, 2)


def test_limit_measure_atom_count_no_collisions():
    # 1 isolated atom plus 2 * 2^k distinct preimages per depth k: no merging
    for k_max in (3, 5):
        m = gasket_limit_measure(k_max)
        assert len(m.atoms) == 1 + 2 * (2 ** (k_max + 1) - 1)
        depth_masses = {Fraction(1, 2)} | {
            Fraction(1, 2 * 3 ** (k + 1)) for k in range(k_max + 1)
        }
        assert {mass for _, mass in m.atoms} == depth_masses


def test_limit_measure_total_converges():
    totals = [float(gasket_limit_measure(k).total_mass) for k in range(6)]
    assert all(b > a for a, b in zip(totals[:-1], totals[1:]))
    assert abs(totals[-1] - 1.5) == pytest.approx(
        float(gasket_limit_truncation_deficit(5)), rel=1e-12
    )


def test_exceptional_set():
    assert set(GASKET_EXCEPTIONAL) == {-3.0, -1.5, -2.5}


def test_decimation_containment(gasket_levels):
    # phat maps level-(n+1) Dirichlet spectrum into the level-n spectrum,
    # away from the exceptional set
    from fraclat.spectral import spectrum

    for n in (1, 2, 3):
        hi = gasket_levels.dirichlet(n).eigenvalues
        lo = np.concatenate(
            [
                spectrum(gasket_levels.op(n - 1), "neumann").eigenvalues,
                gasket_levels.dirichlet(n - 1).eigenvalues
                if n > 1
                else np.zeros(0),
            ]
        )
        for lam in hi:
            if any(abs(lam - e) <= 1e-9 for e in GASKET_EXCEPTIONAL):
                continue
            image = 2 * lam * lam + 5 * lam
            assert np.min(np.abs(lo - image)) <= 1e-7


def test_interval_maps_formulas():
    m = interval_maps(Fraction(1, 3))
    assert m.delta == Fraction(1, 2)
    a, d, q = sympy.symbols("a d q")
    # rhat = p(Q) T(Q) with p = delta (a + d/delta)
    p = sympy.Rational(1, 2) * (a + 2 * d)
    for comp, t in zip(m.rhat, m.t_coords):
        assert sympy.simplify(comp - p * t) == 0


def test_interval_rhat_algebraically_stable():
    m = interval_maps(Fraction(1, 3))
    its = interval_rhat_iterate_symbolic(m, 5)
    assert [d for _, d in its] == [2, 4, 8, 16, 32]


def test_interval_zero_locus_description():
    # The common zeros of the R^n components lie on {q = 0} and on lines
    # weight(left cell) * d + weight(right cell) * a = 0 over adjacent cell
    # pairs; for alpha = 1/3 (delta = 1/2) the level-n lines are
    # delta^k a + d = 0 for k = 2-n .. 1.
    m = interval_maps(Fraction(1, 3))
    its = interval_rhat_iterate_symbolic(m, 3)
    a, d, q = sympy.symbols("a d q")
    lines = {
        1: [a + 2 * d],
        2: [a + 2 * d, a + d],
        3: [a + 2 * d, a + d, 2 * a + d],
    }
    for n, (comps, _) in enumerate(its, 1):
        at_q0 = [sympy.expand(c.subs(q, 0)) for c in comps]
        assert at_q0[2] == 0  # the q-component vanishes identically on {q=0}
        g = sympy.gcd(sympy.Poly(at_q0[0], a, d), sympy.Poly(at_q0[1], a, d))
        factors = sympy.factor_list(g.as_expr())[1]
        got = {sympy.expand(sympy.monic(sympy.Poly(f, a, d)).as_expr()) for f, _ in factors}
        want = {sympy.expand(sympy.monic(sympy.Poly(l, a, d)).as_expr()) for l in lines[n]}
        assert got == want


def test_interval_phi_avoids_zero_locus_symbolically():
    m = interval_maps(Fraction(1, 2))
    lam = sympy.Symbol("lam")
    a, d, q = sympy.symbols("a d q")
    coords = interval_phi_coords(lam)
    for n, (comps, _) in enumerate(interval_rhat_iterate_symbolic(m, 4), 1):
        vals = [
            sympy.Poly(sympy.expand(c.subs({a: coords[0], d: coords[1], q: coords[2]})), lam)
            for c in comps
        ]
        g = vals[0]
        for p in vals[1:]:
            g = sympy.gcd(g, p)
        assert g.total_degree() == 0  # no common root: mu^ND = 0


def test_interval_green_cauchy():
    m = interval_maps(Fraction(1, 3))
    rng = np.random.default_rng(0)
    for _ in range(10):
        lam = complex(rng.uniform(-4, 1), rng.uniform(0.3, 1.5))
        Q = interval_phi_coords(lam)
        v20, _ = interval_green_estimate(m, Q, 20)
        v30, _ = interval_green_estimate(m, Q, 30)
        assert abs(v30 - v20) <= 1e-6


def test_dynamical_degree_and_classifier():
    est, seq = dynamical_degree([2, 4, 8, 16, 32])
    assert est == pytest.approx(2.0)
    assert seq == pytest.approx([2.0] * 5)
    assert dichotomy_classify(est, 3) == "case_i"
    assert dichotomy_classify(2.0, 2) == "case_ii"
    assert dichotomy_classify(1.0, 2) == "case_i"
    assert dichotomy_classify(float("nan"), 3) == "inconclusive"
    assert dynamical_degree([1, 1, 1])[0] == pytest.approx(1.0)


def test_growth_check_slope_and_sentinel():
    # synthetic C * 2^n data recovers log 2; zero difference yields -inf
    data = [(n, 3.1 * 2**n) for n in range(3, 8)]
    assert growth_check(data) == pytest.approx(math.log(2), abs=1e-12)
    assert growth_check([(1, 0.0), (2, 0.0)]) == -math.inf
