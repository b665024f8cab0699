"""Balanced Grassmann algebra over generators {etabar_x, eta_x}_{x in F}.

Elements live in the span of monomials with equally many etabar and eta
factors.  The canonical basis monomial for subset pair (I, J) is

    etabar_{i1} ... etabar_{ik} . eta_{j1} ... eta_{jk}     (indices ascending)

and subsets are stored as bitmasks.  Coefficients may be exact
(int/Fraction) or complex floats; all sign bookkeeping is integral so both
paths share the code.  exp of a quadratic form etabar Q eta carries the
minors of Q as coefficients; restriction to a subset is the interior
product by the product of the dropped generator pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MAX_GENERATORS = 16


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _merge_sign(a: int, b: int) -> int:
    """Parity sign of interleaving sorted(b) after sorted(a): (-1)^inversions."""
    inv = 0
    for k in _bits(b):
        inv += (a >> (k + 1)).bit_count()
    return -1 if inv & 1 else 1


def _interleave_sign(k: int) -> int:
    """Sign relating the interleaved monomial (etabar eta)^k to canonical order."""
    return -1 if (k * (k - 1) // 2) & 1 else 1


@dataclass(frozen=True)
class GrassmannElement:
    """Sparse element of the balanced subalgebra on ``n`` generators."""

    n: int
    coeffs: dict

    def __post_init__(self):
        if self.n > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators supported")

    @classmethod
    def unit(cls, n: int) -> "GrassmannElement":
        return cls(n, {(0, 0): 1})

    @classmethod
    def zero(cls, n: int) -> "GrassmannElement":
        return cls(n, {})

    @classmethod
    def from_terms(cls, n: int, terms) -> "GrassmannElement":
        """terms: iterable of (I indices, J indices, coeff) with |I| = |J|."""
        coeffs: dict = {}
        for I, J, c in terms:
            im = sum(1 << i for i in set(I))
            jm = sum(1 << j for j in set(J))
            if im.bit_count() != len(tuple(I)) or jm.bit_count() != len(tuple(J)):
                raise ValueError("repeated generator in a monomial")
            if im.bit_count() != jm.bit_count():
                raise ValueError("unbalanced monomial")
            key = (im, jm)
            coeffs[key] = coeffs.get(key, 0) + c
        return cls(n, {k: v for k, v in coeffs.items() if v != 0})

    def __getitem__(self, key) -> object:
        I, J = key
        if isinstance(I, int) and isinstance(J, int):
            return self.coeffs.get((I, J), 0)
        im = sum(1 << i for i in I)
        jm = sum(1 << j for j in J)
        return self.coeffs.get((im, jm), 0)

    @property
    def unit_coefficient(self):
        return self.coeffs.get((0, 0), 0)

    @property
    def top_coefficient(self):
        full = (1 << self.n) - 1
        return self.coeffs.get((full, full), 0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def map_coeffs(self, f) -> "GrassmannElement":
        out = {k: f(v) for k, v in self.coeffs.items()}
        return GrassmannElement(self.n, {k: v for k, v in out.items() if v != 0})

    def __add__(self, other: "GrassmannElement") -> "GrassmannElement":
        if self.n != other.n:
            raise ValueError("mismatched generator counts")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return GrassmannElement(self.n, {k: v for k, v in out.items() if v != 0})

    def __sub__(self, other: "GrassmannElement") -> "GrassmannElement":
        return self + other.map_coeffs(lambda v: -v)

    def __rmul__(self, scalar) -> "GrassmannElement":
        if scalar == 0:
            return GrassmannElement.zero(self.n)
        return self.map_coeffs(lambda v: scalar * v)


def scalar_product(X: GrassmannElement, Y: GrassmannElement):
    """Canonical scalar product (conjugate-linear in the second argument)."""
    if X.n != Y.n:
        raise ValueError("mismatched generator counts")
    small, big = (X.coeffs, Y.coeffs) if len(X.coeffs) < len(Y.coeffs) else (Y.coeffs, X.coeffs)
    total = 0
    for k, v in X.coeffs.items():
        w = Y.coeffs.get(k)
        if w is not None:
            total += v * _conj(w)
    return total


def _conj(v):
    return v.conjugate() if isinstance(v, complex) else v


def norm(X: GrassmannElement) -> float:
    return float(np.sqrt(sum(abs(v) ** 2 for v in X.coeffs.values())))


def gr_mul(X: GrassmannElement, Y: GrassmannElement) -> GrassmannElement:
    """Exterior product restricted to the balanced subalgebra (commutative)."""
    if X.n != Y.n:
        raise ValueError("mismatched generator counts")
    out: dict = {}
    for (i1, j1), c1 in X.coeffs.items():
        k1 = i1.bit_count()
        for (i2, j2), c2 in Y.coeffs.items():
            if (i1 & i2) or (j1 & j2):
                continue
            sign = _merge_sign(i1, i2) * _merge_sign(j1, j2)
            if (k1 * i2.bit_count()) & 1:
                sign = -sign
            key = (i1 | i2, j1 | j2)
            val = out.get(key, 0) + sign * c1 * c2
            if val == 0:
                out.pop(key, None)
            else:
                out[key] = val
    return GrassmannElement(X.n, out)


def interior_product(Y: GrassmannElement, X: GrassmannElement) -> GrassmannElement:
    """i_Y(X): adjoint of left multiplication by Y, <i_Y(X), Z> = <X, YZ>."""
    if X.n != Y.n:
        raise ValueError("mismatched generator counts")
    out: dict = {}
    for (ky, ly), cy in Y.coeffs.items():
        cyc = _conj(cy)
        for (ix, jx), cx in X.coeffs.items():
            if (ky & ix) != ky or (ly & jx) != ly:
                continue
            i, j = ix ^ ky, jx ^ ly
            sign = _merge_sign(ky, i) * _merge_sign(ly, j)
            if (i.bit_count() * ly.bit_count()) & 1:
                sign = -sign
            key = (i, j)
            val = out.get(key, 0) + sign * cyc * cx
            if val == 0:
                out.pop(key, None)
            else:
                out[key] = val
    return GrassmannElement(X.n, out)


def generator_pair_product(n: int, subset) -> GrassmannElement:
    """prod_{x in subset} etabar_x eta_x, as an element (canonical form)."""
    mask = sum(1 << i for i in subset)
    return GrassmannElement(n, {(mask, mask): _interleave_sign(mask.bit_count())})


def restrict(X: GrassmannElement, subset) -> GrassmannElement:
    """R_{F -> F'}: interior product by the dropped pairs, reindexed to F'.

    ``subset`` lists the generators to keep; the result lives on
    len(subset) generators, relabelled order-preservingly.
    """
    keep = sorted(set(int(i) for i in subset))
    drop = [i for i in range(X.n) if i not in set(keep)]
    Y = generator_pair_product(X.n, drop)
    mid = interior_product(Y, X)
    pos = {g: p for p, g in enumerate(keep)}
    out: dict = {}
    for (i, j), c in mid.coeffs.items():
        im = sum(1 << pos[g] for g in _bits(i))
        jm = sum(1 << pos[g] for g in _bits(j))
        out[(im, jm)] = c
    return GrassmannElement(len(keep), out)


def relabel(X: GrassmannElement, images, n_out: int | None = None) -> GrassmannElement:
    """Algebra morphism sending generator x to generator images[x].

    ``images`` must be injective; monomials pick up the parity of sorting
    the image indices.
    """
    n_out = X.n if n_out is None else n_out
    images = list(images)
    if len(set(images)) != len(images):
        raise ValueError("generator images must be distinct")
    table = {}
    out: dict = {}
    for (i, j), c in X.coeffs.items():
        for mask in (i, j):
            if mask not in table:
                imgs = [images[g] for g in _bits(mask)]
                sign, sorted_imgs = _sort_parity(imgs)
                table[mask] = (sum(1 << g for g in sorted_imgs), sign)
        (im, si), (jm, sj) = table[i], table[j]
        key = (im, jm)
        out[key] = out.get(key, 0) + si * sj * c
    return GrassmannElement(n_out, {k: v for k, v in out.items() if v != 0})


def _sort_parity(values: list[int]) -> tuple[int, list[int]]:
    vals = list(values)
    sign = 1
    for a in range(len(vals)):
        for b in range(a + 1, len(vals)):
            if vals[a] > vals[b]:
                vals[a], vals[b] = vals[b], vals[a]
                sign = -sign
    return sign, vals


def scale_degree(X: GrassmannElement, factor) -> GrassmannElement:
    """Multiply every k-balanced coefficient by factor^k."""
    out = {}
    for (i, j), c in X.coeffs.items():
        out[(i, j)] = c * factor ** i.bit_count()
    return GrassmannElement(X.n, {k: v for k, v in out.items() if v != 0})


# -- exponentials of quadratic forms -------------------------------------------


def _det_exact(M: list[list]) -> object:
    """Bareiss fraction-free determinant (exact for int/Fraction entries)."""
    k = len(M)
    if k == 0:
        return Fraction(1)
    A = [[Fraction(v) for v in row] for row in M]
    sign = 1
    prev = Fraction(1)
    for col in range(k - 1):
        piv = next((r for r in range(col, k) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            sign = -sign
        for r in range(col + 1, k):
            for c in range(col + 1, k):
                A[r][c] = (A[r][c] * A[col][col] - A[r][col] * A[col][c]) / prev
            A[r][col] = Fraction(0)
        prev = A[col][col]
    return sign * A[k - 1][k - 1]


def _minor_dets(Q: np.ndarray, exact: bool):
    dtype = complex if np.iscomplexobj(Q) else float

    def det(imask: int, jmask: int):
        I = _bits(imask)
        J = _bits(jmask)
        sub = [[Q[a, b] for b in J] for a in I]
        if exact:
            return _det_exact(sub)
        return dtype(np.linalg.det(np.asarray(sub, dtype=dtype)))

    return det


def exp_q(Q) -> GrassmannElement:
    """exp(etabar Q eta): the (I, J) coefficient is the (I, J) minor of Q,
    with the sign from re-sorting the interleaved monomial into canonical
    order; the empty pair carries 1."""
    Q = np.asarray(Q)
    n = Q.shape[0]
    if Q.shape != (n, n):
        raise ValueError("Q must be square")
    exact = Q.dtype == object or np.issubdtype(Q.dtype, np.integer)
    det = _minor_dets(Q, exact)
    one = Fraction(1) if exact else 1.0
    coeffs: dict = {(0, 0): one}
    masks_by_size: list[list[int]] = [[] for _ in range(n + 1)]
    for m in range(1, 1 << n):
        masks_by_size[m.bit_count()].append(m)
    for k in range(1, n + 1):
        s = _interleave_sign(k)
        for im in masks_by_size[k]:
            for jm in masks_by_size[k]:
                d = det(im, jm)
                if d != 0:
                    coeffs[(im, jm)] = s * d
    return GrassmannElement(n, coeffs)


def quadratic_form(Q) -> GrassmannElement:
    """etabar Q eta itself (degree-1 part only)."""
    Q = np.asarray(Q)
    n = Q.shape[0]
    coeffs = {}
    for i in range(n):
        for j in range(n):
            if Q[i, j] != 0:
                coeffs[(1 << i, 1 << j)] = Q[i, j]
    return GrassmannElement(n, coeffs)


def nd_order(Q0, B, subset) -> int:
    """Order of vanishing at 0 of lambda -> restrict(exp_q(Q0 - lambda B), F').

    Exact path: every coefficient is a polynomial in lambda of degree <= |F|,
    recovered by Newton interpolation at integer nodes; the order equals
    dim{f in ker Q0 : f vanishes on F'}.
    """
    Q0 = np.asarray(Q0)
    B = np.asarray(B)
    n = Q0.shape[0]
    keep = sorted(set(int(i) for i in subset))
    nodes = [Fraction(t) for t in range(n + 1)]
    samples = []
    for t in nodes:
        Qt = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                Qt[a, b] = Fraction(Q0[a, b]) - t * Fraction(B[a, b])
        samples.append(restrict(exp_q(Qt), keep))
    keys = set()
    for s in samples:
        keys.update(s.coeffs)
    if not keys:
        return n + 1  # identically zero: cannot happen for finite matrices
    order = n + 1
    for key in keys:
        values = [s.coeffs.get(key, Fraction(0)) for s in samples]
        poly = _newton_coeffs(nodes, values)
        lead = next((p for p, c in enumerate(poly) if c != 0), None)
        if lead is not None:
            order = min(order, lead)
            if order == 0:
                break
    return order if order <= n else n


def _newton_coeffs(xs, ys) -> list:
    """Exact coefficients (ascending powers) of the interpolating polynomial."""
    k = len(xs)
    dd = list(ys)
    for level in range(1, k):
        for i in range(k - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level])
    coeffs = [Fraction(0)] * k
    # Horner expansion of the Newton form.
    for i in range(k - 1, -1, -1):
        new = [Fraction(0)] * k
        new[0] = dd[i]
        for p in range(k - 1):
            new[p + 1] += coeffs[p]
            new[p] += -xs[i] * coeffs[p]
        coeffs = new
    return coeffs
