"""Eigensolving, counting measures and Neumann-Dirichlet spectrum detection.

Eigenvalues are reported in the difference-operator convention (all <= 0):
an eigenpair solves A_n f = -lambda * b_n f.  The Neumann-Dirichlet
multiplicity of a Dirichlet eigenvalue lambda is the dimension of
{f : f = 0 on the boundary, (A_n + lambda diag(b_n)) f = 0}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator import LevelOperator

DEFAULT_MERGE_TOL = 1e-7
DEFAULT_NULLITY_TOL = 1e-8
DENSE_CEILING = 12000


class SizeCeilingError(RuntimeError):
    pass


# -- atomic measures ----------------------------------------------------------


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite atomic measure: sorted (location, mass) atoms.

    Locations within ``merge_tol`` coalesce with masses added.  Masses may
    be exact Fractions (limit measures) or floats (counting measures).
    """

    atoms: tuple[tuple[float, object], ...]
    merge_tol: float = DEFAULT_MERGE_TOL

    @classmethod
    def from_points(cls, locations, merge_tol: float = DEFAULT_MERGE_TOL):
        return cls.from_atoms([(x, 1) for x in locations], merge_tol)

    @classmethod
    def from_atoms(cls, atoms, merge_tol: float = DEFAULT_MERGE_TOL):
        merged: list[list] = []
        for loc, mass in sorted(atoms, key=lambda t: float(t[0])):
            if mass == 0:
                continue
            if mass < 0:
                raise ValueError("masses must be positive")
            if merged and float(loc) - float(merged[-1][0]) <= merge_tol:
                tot = merged[-1][1] + mass
                merged[-1][0] = (
                    float(merged[-1][0]) * float(merged[-1][1]) + float(loc) * float(mass)
                ) / float(tot)
                merged[-1][1] = tot
            else:
                merged.append([loc, mass])
        return cls(tuple((loc, mass) for loc, mass in merged), merge_tol)

    @property
    def total_mass(self):
        return sum((m for _, m in self.atoms), 0)

    @property
    def locations(self) -> tuple:
        return tuple(loc for loc, _ in self.atoms)

    def mass_at(self, location: float, tol: float | None = None):
        tol = self.merge_tol if tol is None else tol
        return sum(m for loc, m in self.atoms if abs(float(loc) - location) <= tol)

    def scale(self, c) -> "AtomicMeasure":
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return AtomicMeasure(
            tuple((loc, m * c) for loc, m in self.atoms), self.merge_tol
        )

    def cdf(self, lam: float) -> float:
        """Mass carried by [lam, 0] (spectral repartition function)."""
        return float(
            sum(m for loc, m in self.atoms if lam <= float(loc) <= 0.0)
        )


def counting_measure(eig: "EigenDecomposition", merge_tol=DEFAULT_MERGE_TOL) -> AtomicMeasure:
    return AtomicMeasure.from_points(eig.eigenvalues, merge_tol)


def scale(m: AtomicMeasure, c) -> AtomicMeasure:
    return m.scale(c)


def cdf(m: AtomicMeasure, lam: float) -> float:
    return m.cdf(lam)


def sup_cdf_distance(m1: AtomicMeasure, m2: AtomicMeasure) -> float:
    """Kolmogorov distance of the repartition functions, with atoms closer
    than the merge tolerance treated as aligned: the sup runs over points
    strictly between location clusters (pointwise evaluation at jittered
    jumps would report the whole jump)."""
    tol = max(m1.merge_tol, m2.merge_tol)
    locs = sorted(float(loc) for loc, _ in m1.atoms + m2.atoms)
    if not locs:
        return 0.0
    probes = [locs[0] - 1.0]
    for a, b in zip(locs[:-1], locs[1:]):
        if b - a > tol:
            probes.append(0.5 * (a + b))
    probes.append(locs[-1] + max(tol, 1e-9))
    return max(abs(m1.cdf(q) - m2.cdf(q)) for q in probes)


def dominates(m1: AtomicMeasure, m2: AtomicMeasure, tol: float = 1e-9) -> bool:
    """True when m1 >= m2 atomwise: every atom of m2 is covered (within the
    coarser merge_tol) by at least as much m1 mass."""
    wtol = max(m1.merge_tol, m2.merge_tol)
    for loc, mass in m2.atoms:
        if m1.mass_at(float(loc), wtol) < float(mass) - tol:
            return False
    return True


# -- eigensolving -------------------------------------------------------------


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectrum of a (A, diag(b)) pencil, in operator convention.

    ``eigenvalues`` are <= 0 and descending; ``eigenvectors[:, k]`` is
    b-orthonormal and solves A v = -eigenvalue_k * b v.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    b: np.ndarray

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def residual(self, A: np.ndarray) -> float:
        R = A @ self.eigenvectors + (self.b[:, None] * self.eigenvectors) * (
            self.eigenvalues[None, :]
        )
        return float(np.max(np.abs(R))) if R.size else 0.0


def _pencil_eigh(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized solve of A v = w b v; returns (w ascending, b-orthonormal V)."""
    if len(b) == 0:
        return np.zeros(0), np.zeros((0, 0))
    s = 1.0 / np.sqrt(b)
    M = (A * s[None, :]) * s[:, None]
    M = 0.5 * (M + M.T)
    w, U = np.linalg.eigh(M)
    return w, U * s[:, None]


def spectrum(op: LevelOperator, boundary_condition: str = "neumann") -> EigenDecomposition:
    """Dense spectrum of H^+ (neumann) or H^- (dirichlet)."""
    if op.size > DENSE_CEILING:
        raise SizeCeilingError(
            f"problem size {op.size} exceeds dense ceiling {DENSE_CEILING}"
        )
    (An, bn), (Ad, bd) = _split(op)
    if boundary_condition == "neumann":
        A, b = An, bn
    elif boundary_condition == "dirichlet":
        A, b = Ad, bd
    else:
        raise ValueError(f"unknown boundary condition {boundary_condition!r}")
    w, V = _pencil_eigh(A, b)
    return EigenDecomposition(eigenvalues=-w, eigenvectors=V, b=b)


def _split(op: LevelOperator):
    A = op.matrix_float()
    b = op.b_float()
    idx = np.array(op.interior, dtype=int)
    return (A, b), (A[np.ix_(idx, idx)], b[idx])


# -- Neumann-Dirichlet detection ----------------------------------------------


def nd_nullity(op: LevelOperator, lam: float, tol: float = DEFAULT_NULLITY_TOL) -> int:
    """dim{f : f|boundary = 0, (A + lam diag(b)) f = 0} by a stacked SVD.

    The stacked system restricts (A + lam diag(b)) to interior columns,
    which is the matrix form of appending boundary-indicator rows.
    """
    A = op.matrix_float()
    b = op.b_float()
    idx = np.array(op.interior, dtype=int)
    if len(idx) == 0:
        return 0
    S = (A + lam * np.diag(b))[:, idx]
    sv = np.linalg.svd(S, compute_uv=False)
    smax = sv[0] if sv[0] > 0 else 1.0
    return int(np.sum(sv < tol * smax))


def nd_spectrum(
    op: LevelOperator,
    tol: float = DEFAULT_NULLITY_TOL,
    merge_tol: float = DEFAULT_MERGE_TOL,
    dirichlet: EigenDecomposition | None = None,
) -> AtomicMeasure:
    """Counting measure of Neumann-Dirichlet eigenvalues.

    Only Dirichlet eigenvalues are candidates.  Eigenvalues within
    ``merge_tol`` form one cluster; the cluster's N-D multiplicity is the
    stacked-system nullity, evaluated on the cluster's eigenbasis: with V
    the b-orthonormal Dirichlet eigenvectors of the cluster, f = 0-extension
    of V c solves the stacked system iff A[boundary, interior] V c = 0.
    """
    eig = dirichlet if dirichlet is not None else spectrum(op, "dirichlet")
    if eig.size == 0:
        return AtomicMeasure((), merge_tol)
    A = op.matrix_float()
    idx = np.array(op.interior, dtype=int)
    bidx = np.array(op.boundary, dtype=int)
    flux = A[np.ix_(bidx, idx)]
    scale_ = max(float(np.max(np.abs(A))), 1.0)

    order = np.argsort(eig.eigenvalues)
    lams = eig.eigenvalues[order]
    V = eig.eigenvectors[:, order]
    atoms = []
    start = 0
    while start < len(lams):
        stop = start + 1
        while stop < len(lams) and lams[stop] - lams[stop - 1] <= merge_tol:
            stop += 1
        M = flux @ V[:, start:stop]
        sv = np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)
        thresh = tol * max(float(sv[0]) if len(sv) else 0.0, scale_)
        mult = (stop - start) - int(np.sum(sv > thresh))
        if mult > 0:
            atoms.append((float(np.mean(lams[start:stop])), mult))
        start = stop
    return AtomicMeasure.from_atoms(atoms, merge_tol)


# -- argument-principle zero counting ------------------------------------------


def argument_principle_count(
    A: np.ndarray,
    b: np.ndarray,
    re_range: tuple[float, float],
    im_range: tuple[float, float] = (-1.0, 1.0),
    base_steps: int = 64,
    max_refine: int = 14,
) -> int:
    """Zeros of lambda -> det(A - lambda diag(b)) inside a rectangle.

    Winding number of det along the boundary, with adaptive bisection until
    every argument increment is < pi/2.  The rectangle must avoid zeros on
    its boundary.  det(A - lambda diag(b)) vanishes exactly at the pencil
    eigenvalues (the negatives of the operator eigenvalues).
    """
    x0, x1 = re_range
    y0, y1 = im_range
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate rectangle")
    corners = [
        complex(x0, y0),
        complex(x1, y0),
        complex(x1, y1),
        complex(x0, y1),
        complex(x0, y0),
    ]
    bdiag = np.diag(np.asarray(b, dtype=complex))
    Ac = np.asarray(A, dtype=complex)

    def logdet_arg(lam: complex) -> float:
        sign, _ = np.linalg.slogdet(Ac - lam * bdiag)
        if sign == 0:
            raise ArithmeticError("det vanished on the contour")
        return float(np.angle(sign))

    total = 0.0
    for a_, b_ in zip(corners[:-1], corners[1:]):
        ts = np.linspace(0.0, 1.0, base_steps + 1)
        args = [logdet_arg(a_ + t * (b_ - a_)) for t in ts]
        segs = list(zip(ts[:-1], ts[1:], args[:-1], args[1:]))
        while segs:
            t0, t1, a0, a1 = segs.pop()
            delta = (a1 - a0 + np.pi) % (2 * np.pi) - np.pi
            if abs(delta) < np.pi / 2:
                total += delta
                continue
            if t1 - t0 < 2.0 ** (-max_refine) / base_steps:
                raise ArithmeticError("argument step failed to resolve")
            tm = 0.5 * (t0 + t1)
            am = logdet_arg(a_ + tm * (b_ - a_))
            segs.append((t0, tm, a0, am))
            segs.append((tm, t1, am, a1))
    winding = total / (2 * np.pi)
    count = int(round(winding))
    if abs(winding - count) > 1e-6:
        raise ArithmeticError(f"non-integer winding {winding}")
    return count
