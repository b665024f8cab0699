"""Renormalization maps on symmetric matrices and on the Grassmann algebra.

T sends Q to the trace on the level-1 boundary of the assembled Q_<1>;
R is its degree-N polynomial lift acting on the balanced Grassmann algebra.
The two are tied by R^n(exp_q(Q)) = C_n det((Q_<n>)|interior) exp_q(T^n Q);
the Green function of R is estimated by a normalized iteration, and the
Dirichlet/Neumann characteristic polynomials come out of exact R-iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import grassmann as gr
from .grassmann import GrassmannElement
from .operator import BaseOperator, assemble
from .schur import TracePoleError, trace_on_subset
from .spectral import AtomicMeasure, nd_nullity, nd_spectrum
from .structure import LatticeLevel, StructureSpec, build_level


def _exact_weights(spec: StructureSpec) -> bool:
    return all(isinstance(a, (int, Fraction)) for a in spec.alpha)


@dataclass(frozen=True)
class RenormContext:
    """Precomputed level-1 data driving t_map and r_map."""

    spec: StructureSpec
    level1: LatticeLevel
    cell_images: tuple[tuple[int, ...], ...]  # generator images of each cell map
    boundary_sorted: tuple[int, ...]
    boundary_labels: tuple[int, ...]  # F-label of each sorted boundary id
    energy_scalings: tuple  # alpha_1/alpha_i per cell
    symg_basis: tuple[np.ndarray, ...]

    @classmethod
    def build(cls, spec: StructureSpec) -> "RenormContext":
        lat1 = build_level(spec, 1)
        images = tuple(
            tuple(lat1.word_to_id[(i, x)] for x in range(spec.N0))
            for i in range(spec.N)
        )
        bsorted = tuple(sorted(lat1.boundary))
        blabels = tuple(lat1.boundary.index(v) for v in bsorted)
        exact = _exact_weights(spec)
        scalings = tuple(
            (Fraction(spec.alpha[0]) / spec.alpha[i]) if exact else spec.alpha[0] / spec.alpha[i]
            for i in range(spec.N)
        )
        return cls(
            spec=spec,
            level1=lat1,
            cell_images=images,
            boundary_sorted=bsorted,
            boundary_labels=blabels,
            energy_scalings=scalings,
            symg_basis=symmetric_commutant_basis(spec),
        )

    @property
    def n_generators(self) -> int:
        return self.spec.N0

    def c_constant(self, n: int):
        """Constant of the R^n/T^n consistency identity.

        C_n = prod_k (alpha_k/alpha_1) ** sum_{j<n} |interior F_j| N^(n-1-j),
        from C_n = C_{n-1}^N * prod_k (alpha_k/alpha_1)^{|interior F_{n-1}|}.
        """
        spec = self.spec
        exact = _exact_weights(spec)
        p = Fraction(1) if exact else 1.0
        for k in range(spec.N):
            p = p * spec.alpha[k] / spec.alpha[0]
        e = 0
        for j in range(n):
            lat = build_level(spec, j)
            e += (lat.num_vertices - spec.N0) * spec.N ** (n - 1 - j)
        return p**e


def symmetric_commutant_basis(spec: StructureSpec) -> tuple[np.ndarray, ...]:
    """Exact basis of Sym^G: indicators of the group orbits of index pairs."""
    n0 = spec.N0
    group = spec.group or ((tuple(range(spec.N))),)
    seen: set[frozenset] = set()
    basis = []
    for x in range(n0):
        for y in range(x, n0):
            orbit = frozenset(
                (min(g[x], g[y]), max(g[x], g[y])) for g in group
            )
            if orbit in seen:
                continue
            seen.add(orbit)
            M = np.zeros((n0, n0), dtype=object)
            for (a, b) in orbit:
                M[a, b] = Fraction(1)
                M[b, a] = Fraction(1)
            basis.append(M)
    return tuple(basis)


def is_g_invariant(spec: StructureSpec, Q: np.ndarray, tol: float = 0.0) -> bool:
    Qc = np.asarray(Q)
    for g in spec.group:
        for x in range(spec.N0):
            for y in range(spec.N0):
                d = Qc[g[x], g[y]] - Qc[x, y]
                if abs(complex(d)) > tol:
                    return False
    return True


# -- gasket coordinates ---------------------------------------------------------


def gasket_matrix(u0, u1) -> np.ndarray:
    """Q = u0 p_W0 + u1 p_W1 on 3 points (W0 = constants)."""
    third = Fraction(1, 3) if all(isinstance(u, (int, Fraction)) for u in (u0, u1)) else 1.0 / 3.0
    J = np.full((3, 3), third, dtype=object)
    I = np.diag([1, 1, 1]).astype(object)
    M = u0 * J + u1 * (I - J)
    if not all(isinstance(u, (int, Fraction)) for u in (u0, u1)):
        M = np.asarray(M, dtype=complex)
    return M


def gasket_coords(Q: np.ndarray) -> tuple:
    """Inverse of gasket_matrix for S3-invariant Q."""
    Q = np.asarray(Q)
    u0 = Q[0, 0] + Q[0, 1] + Q[0, 2]
    u1 = (Q[0, 0] + Q[1, 1] + Q[2, 2] - u0) / 2
    return u0, u1


# -- matrix-level renormalization -----------------------------------------------


def level_matrix(ctx: RenormContext, Q: np.ndarray, lat: LatticeLevel | None = None) -> np.ndarray:
    """Assemble Q_<n>: the weighted sum of copies of Q over all n-cells."""
    spec = ctx.spec
    lat = ctx.level1 if lat is None else lat
    Q = np.asarray(Q)
    exact = Q.dtype == object and _exact_weights(spec)
    V = lat.num_vertices
    out = np.zeros((V, V), dtype=object if exact else complex)
    if exact:
        out = np.array([[Fraction(0)] * V for _ in range(V)], dtype=object)
    from .operator import cell_weights
    from .structure import _words

    for prefix in _words(spec.N, lat.n):
        ids = tuple(lat.word_to_id[prefix + (x,)] for x in range(spec.N0))
        w = cell_weights(spec, prefix, "alpha")
        for x in range(spec.N0):
            for y in range(spec.N0):
                if Q[x, y] != 0:
                    out[ids[x], ids[y]] += w * Q[x, y]
    return out


def t_map(ctx: RenormContext, Q: np.ndarray, strict: bool = False) -> np.ndarray:
    """One decimation step: trace of Q_<1> on the level-1 boundary."""
    Q = np.asarray(Q)
    if Q.shape != (ctx.spec.N0, ctx.spec.N0):
        raise ValueError("Q must act on the base cell")
    if strict and not is_g_invariant(ctx.spec, Q, tol=0.0):
        raise ValueError("Q is not invariant under the symmetry group")
    Q1 = level_matrix(ctx, Q)
    tr = trace_on_subset(Q1, ctx.boundary_sorted)
    n0 = ctx.spec.N0
    out = np.empty_like(tr)
    for p in range(n0):
        for q in range(n0):
            out[ctx.boundary_labels[p], ctx.boundary_labels[q]] = tr[p, q]
    return out


def t_iterate(ctx: RenormContext, Q: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        Q = t_map(ctx, Q)
    return Q


# -- Grassmann-level renormalization --------------------------------------------


def r_map(ctx: RenormContext, X: GrassmannElement) -> GrassmannElement:
    """Lift X into every level-1 cell (scaled per cell energy), multiply,
    and restrict to the boundary algebra."""
    if X.n != ctx.spec.N0:
        raise ValueError("X must live on the base-cell algebra")
    V1 = ctx.level1.num_vertices
    prod: GrassmannElement | None = None
    for i in range(ctx.spec.N):
        lifted = gr.relabel(
            gr.scale_degree(X, ctx.energy_scalings[i]), ctx.cell_images[i], V1
        )
        prod = lifted if prod is None else gr.gr_mul(prod, lifted)
    res = gr.restrict(prod, ctx.boundary_sorted)
    if ctx.boundary_labels != tuple(range(ctx.spec.N0)):
        res = gr.relabel(res, ctx.boundary_labels)
    return res


def r_iterate(ctx: RenormContext, X: GrassmannElement, n: int) -> GrassmannElement:
    for _ in range(n):
        X = r_map(ctx, X)
    return X


def phi(base: BaseOperator, lam) -> GrassmannElement:
    """exp of the quadratic form of A - lambda diag(b)."""
    A = base.matrix()
    n = base.size
    exact = base.exact and isinstance(lam, (int, Fraction))
    if exact:
        Q = np.empty((n, n), dtype=object)
        for x in range(n):
            for y in range(n):
                Q[x, y] = Fraction(A[x, y]) - (Fraction(lam) * base.b[x] if x == y else 0)
    else:
        Q = np.asarray(A, dtype=complex) - lam * np.diag(np.asarray(base.b, dtype=complex))
    return gr.exp_q(Q)


# -- Green function estimation ---------------------------------------------------


ZERO_NORM_FLOOR = 1e-280


@dataclass(frozen=True)
class GreenEstimate:
    value: float
    iterations: int
    tail_bound: float
    log_norm_history: tuple[float, ...]
    hit_zero: bool = False


def green_estimate(ctx: RenormContext, X: GrassmannElement, n_max: int = 40) -> GreenEstimate:
    """lim N^{-n} ln ||R^n X|| by normalized iteration.

    Telescoping is exact by degree-N homogeneity: with x_{k+1} = R(x_k)/||R(x_k)||
    and g_k = ln ||R(x_k)||, the estimate is ln||X|| + sum g_k / N^{k+1} and the
    truncation error is at most sup|g_k| / (N^{n_max} (N-1)).
    """
    N = ctx.spec.N
    nrm = gr.norm(X)
    if nrm == 0:
        raise ValueError("green_estimate needs X != 0")
    x = X.map_coeffs(lambda v: complex(v) / nrm)
    value = math.log(nrm)
    history = []
    for k in range(n_max):
        y = r_map(ctx, x)
        ynorm = gr.norm(y)
        if ynorm <= ZERO_NORM_FLOOR:
            return GreenEstimate(
                value=-math.inf,
                iterations=k + 1,
                tail_bound=0.0,
                log_norm_history=tuple(history),
                hit_zero=True,
            )
        g = math.log(ynorm)
        history.append(g)
        value += g / N ** (k + 1)
        x = y.map_coeffs(lambda v: v / ynorm)
    sup_g = max(abs(g) for g in history) if history else 0.0
    tail = sup_g / (N**n_max * (N - 1))
    return GreenEstimate(
        value=value,
        iterations=n_max,
        tail_bound=tail,
        log_norm_history=tuple(history),
    )


def green_of_phi(ctx: RenormContext, base: BaseOperator, lam: complex, n_max: int = 20) -> GreenEstimate:
    return green_estimate(ctx, phi(base, lam), n_max=n_max)


def harmonicity_residual(
    ctx: RenormContext,
    base: BaseOperator,
    re_lambda: float,
    im_lambda: float = 0.5,
    h: float = 0.05,
    n_max: int = 20,
) -> float:
    """5-point discrete-Laplacian residual of G(phi(lambda)) at one point."""
    lam = complex(re_lambda, im_lambda)
    vals = []
    for d in (0, h, -h, 1j * h, -1j * h):
        vals.append(green_of_phi(ctx, base, lam + d, n_max=n_max).value)
    return abs(vals[1] + vals[2] + vals[3] + vals[4] - 4 * vals[0]) / h**2


# -- exact spectral polynomials ---------------------------------------------------


def _exact_r_samples(ctx, base: BaseOperator, n: int, nodes) -> list[GrassmannElement]:
    out = []
    for t in nodes:
        out.append(r_iterate(ctx, phi(base, t), n))
    return out


def dirichlet_poly(ctx: RenormContext, base: BaseOperator, n: int) -> list[Fraction]:
    """Coefficients (ascending) of lambda -> <R^n(phi(lambda)), 1>.

    Exact rational path; the roots are the pencil eigenvalues of the
    Dirichlet problem at level n (the negatives of the reported spectrum),
    each with its multiplicity.
    """
    if not base.exact or not _exact_weights(ctx.spec):
        raise ValueError("dirichlet_poly needs exact rational inputs")
    lat = build_level(ctx.spec, n)
    deg = lat.num_vertices - ctx.spec.N0
    nodes = [Fraction(t) for t in range(deg + 1)]
    samples = _exact_r_samples(ctx, base, n, nodes)
    values = [s.unit_coefficient for s in samples]
    return gr._newton_coeffs(nodes, values)


def neumann_poly(ctx: RenormContext, base: BaseOperator, n: int) -> list[Fraction]:
    """Coefficients of lambda -> <R^n(phi(lambda)), prod etabar eta>; roots are
    the Neumann pencil eigenvalues at level n."""
    if not base.exact or not _exact_weights(ctx.spec):
        raise ValueError("neumann_poly needs exact rational inputs")
    lat = build_level(ctx.spec, n)
    deg = lat.num_vertices
    nodes = [Fraction(t) for t in range(deg + 1)]
    samples = _exact_r_samples(ctx, base, n, nodes)
    top = gr.generator_pair_product(ctx.spec.N0, range(ctx.spec.N0))
    values = [gr.scalar_product(s, top) for s in samples]
    return gr._newton_coeffs(nodes, values)


# -- order of vanishing / N-D multiplicities ---------------------------------------


def rho_n(ctx: RenormContext, base: BaseOperator, lam0: float, n: int) -> int:
    """N-D multiplicity at eigenvalue lam0 and level n: the stacked-system
    nullity of A_n + lam0 diag(b_n) with vanishing boundary values."""
    lat = build_level(ctx.spec, n)
    op = assemble(base, ctx.spec, lat)
    return nd_nullity(op, float(lam0))


def rho_n_vanishing_order(ctx: RenormContext, base: BaseOperator, lam0, n: int) -> int:
    """Cross-check of rho_n: exact order of vanishing at lam=0 of
    lambda -> R^n(exp_q(A + lam0 diag(b) - lambda diag(b))).

    The shifted operator line hits the eigenvalue at lambda = 0; feasible
    for small n only (exact Grassmann iteration).
    """
    if not base.exact or not isinstance(lam0, (int, Fraction)):
        raise ValueError("exact path needs rational lam0")
    lat = build_level(ctx.spec, n)
    deg = lat.num_vertices
    nodes = [Fraction(t) for t in range(deg + 1)]
    samples = []
    for t in nodes:
        samples.append(r_iterate(ctx, phi(base, t - Fraction(lam0)), n))
    keys = set()
    for s in samples:
        keys.update(s.coeffs)
    order = deg + 1
    for key in keys:
        values = [s.coeffs.get(key, Fraction(0)) for s in samples]
        poly = gr._newton_coeffs(nodes, values)
        lead = next((p for p, c in enumerate(poly) if c != 0), None)
        if lead is not None:
            order = min(order, lead)
            if order == 0:
                break
    return order


def mu_nd_estimate(ctx: RenormContext, base: BaseOperator, n: int, **kw) -> AtomicMeasure:
    """nu^ND_n / N^n, the level-n approximation of the N-D density."""
    lat = build_level(ctx.spec, n)
    op = assemble(base, ctx.spec, lat)
    return nd_spectrum(op, **kw).scale(Fraction(1, ctx.spec.N**n))


# -- Siegel half-space ---------------------------------------------------------------


def siegel_cross_ratio(Q1: np.ndarray, Q2: np.ndarray) -> np.ndarray:
    Q1 = np.asarray(Q1, dtype=complex)
    Q2 = np.asarray(Q2, dtype=complex)
    A = (Q1 - Q2) @ np.linalg.inv(Q1 - Q2.conj())
    B = (Q1.conj() - Q2.conj()) @ np.linalg.inv(Q1.conj() - Q2)
    return A @ B


def siegel_distance(Q1: np.ndarray, Q2: np.ndarray) -> float:
    """Geodesic distance on the Siegel upper half-space."""
    for Q in (Q1, Q2):
        im = np.imag(np.asarray(Q, dtype=complex))
        if np.linalg.eigvalsh(0.5 * (im + im.T))[0] <= 0:
            raise ValueError("arguments must have positive-definite imaginary part")
    R = siegel_cross_ratio(Q1, Q2)
    r = np.linalg.svd(R, compute_uv=False)
    r = np.clip(r, 0.0, 1.0 - 1e-16)
    s = np.sqrt(r)
    return float(np.sqrt(np.sum(np.log((1 + s) / (1 - s)) ** 2)))


def random_siegel_sample(ctx: RenormContext, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random G-invariant Siegel point: random real part, SPD imaginary part."""
    basis = ctx.symg_basis
    n0 = ctx.spec.N0
    re = sum(float(rng.standard_normal()) * np.asarray(B, dtype=float) for B in basis)
    im = sum(float(rng.standard_normal()) * np.asarray(B, dtype=float) for B in basis)
    im = im @ im.T + 0.1 * np.eye(n0)  # SPD and still G-invariant
    return scale * (re + 1j * im)


@dataclass(frozen=True)
class SiegelCheck:
    im_positive: bool
    contraction_lower: bool  # min char root of Im(TQ) >= alpha_1/alpha_max * min of Im(Q)
    contraction_inverse: bool
    distance_bound: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.im_positive
            and self.contraction_lower
            and self.contraction_inverse
            and self.distance_bound
        )


def siegel_invariance_check(
    ctx: RenormContext, Q: np.ndarray, n_iter: int = 3, slack: float = 1e-9
) -> SiegelCheck:
    """Check T-invariance of S_+ and the contraction estimates on one sample."""
    alphas = [float(a) for a in ctx.spec.alpha]
    a1, amin, amax = alphas[0], min(alphas), max(alphas)
    n0 = ctx.spec.N0

    def min_root(M):
        return float(np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)[-1])

    TQ = t_map(ctx, Q)
    imTQ = np.imag(TQ)
    im_pos = bool(np.linalg.eigvalsh(0.5 * (imTQ + imTQ.T))[0] > 0)
    lower = min_root(np.imag(TQ)) >= a1 / amax * min_root(np.imag(Q)) - slack
    inv = min_root(np.imag(np.linalg.inv(TQ))) >= (amin / a1) * min_root(
        np.imag(np.linalg.inv(Q))
    ) - slack

    iid = 1j * np.eye(n0)
    d_base = siegel_distance(iid, Q)
    d_step = siegel_distance(iid, t_map(ctx, iid))
    ok_dist = True
    Qn = Q
    dets = {}
    for n in range(1, n_iter + 1):
        Qn = t_map(ctx, Qn)
        lhs = siegel_distance(iid, Qn)
        rhs = math.sqrt(n0) * (d_base + n * d_step)
        dets[n] = (lhs, rhs)
        if lhs > rhs + slack:
            ok_dist = False
    return SiegelCheck(im_pos, lower, inv, ok_dist, details=dets)
