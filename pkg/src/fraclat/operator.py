"""Self-similar difference operators on lattice levels.

The level-n operator is the weighted sum over all n-cells of copies of a
base operator A on F; the level-n measure is the analogous sum of copies
of the base weights b.  Assembly keeps exact (Fraction) coefficients when
the inputs are exact; eigensolving densifies to float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .structure import LatticeLevel, StructureSpec


class DimensionError(ValueError):
    pass


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


@dataclass(frozen=True)
class BaseOperator:
    """Difference operator A f(x) = -sum_y a_{x,y}(f(y)-f(x)) plus weights b.

    ``a`` is the symmetric nonnegative coupling matrix (zero diagonal
    ignored); ``b`` the positive vertex weights.  Entries may be Fractions
    for the exact pipelines.
    """

    a: tuple[tuple, ...]
    b: tuple

    def __post_init__(self):
        n = len(self.a)
        if any(len(row) != n for row in self.a) or len(self.b) != n:
            raise DimensionError("a must be square and b of matching length")
        for x in range(n):
            for y in range(n):
                if self.a[x][y] != self.a[y][x]:
                    raise ValueError("coupling matrix must be symmetric")
                if x != y and self.a[x][y] < 0:
                    raise ValueError("couplings must be >= 0")
        if any(not (w > 0) for w in self.b):
            raise ValueError("weights must be positive")

    @property
    def size(self) -> int:
        return len(self.b)

    @property
    def exact(self) -> bool:
        return _is_exact([v for row in self.a for v in row]) and _is_exact(self.b)

    def matrix(self):
        """Full matrix of A (exact entries preserved, object dtype if exact)."""
        n = self.size
        zero = Fraction(0) if self.exact else 0.0
        M = [[zero] * n for _ in range(n)]
        for x in range(n):
            diag = zero
            for y in range(n):
                if y == x:
                    continue
                M[x][y] = -self.a[x][y]
                diag += self.a[x][y]
            M[x][x] = diag
        dtype = object if self.exact else float
        return np.array(M, dtype=dtype)

    def is_group_invariant(self, spec: StructureSpec) -> bool:
        for g in spec.group:
            for x in range(self.size):
                if self.b[g[x]] != self.b[x]:
                    return False
                for y in range(self.size):
                    if self.a[g[x]][g[y]] != self.a[x][y]:
                        return False
        return True

    def is_irreducible(self) -> bool:
        """Connectivity of the positive-coupling graph."""
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in range(self.size):
                if y != x and y not in seen and self.a[x][y] > 0:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == self.size


def laplacian_base(spec: StructureSpec) -> BaseOperator:
    """Unit-coupling Laplacian with unit weights on F (the canonical choice)."""
    n0 = spec.N0
    one, zero = Fraction(1), Fraction(0)
    a = tuple(
        tuple(one if x != y else zero for y in range(n0)) for x in range(n0)
    )
    return BaseOperator(a=a, b=(one,) * n0)


@dataclass(frozen=True)
class LevelOperator:
    """Assembled A_n (sparse symmetric coordinate entries, exact when the
    inputs are exact) and weights b_n; densified lazily for eigensolves."""

    level: int
    entries: dict
    b: tuple
    boundary: tuple[int, ...]
    lattice: LatticeLevel
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.b)

    @property
    def interior(self) -> tuple[int, ...]:
        bset = set(self.boundary)
        return tuple(v for v in range(self.size) if v not in bset)

    def matrix_float(self) -> np.ndarray:
        if "A" not in self._cache:
            A = np.zeros((self.size, self.size))
            for (i, j), v in self.entries.items():
                A[i, j] = float(v)
            self._cache["A"] = A
        return self._cache["A"]

    def b_float(self) -> np.ndarray:
        if "b" not in self._cache:
            self._cache["b"] = np.asarray(self.b, dtype=float)
        return self._cache["b"]

    def coordinate_entries(self):
        """Upper-triangle nonzeros as (row, col, value) for matrix export."""
        for (i, j) in sorted(k for k in self.entries if k[0] <= k[1]):
            yield i, j, self.entries[(i, j)]


def cell_weights(spec: StructureSpec, prefix, kind: str):
    """Scaling of the copy on a cell: energy alpha_1^p/prod(alpha), measure
    prod(beta)/beta_1^p (blow-up fixed to the constant sequence 1)."""
    if kind == "alpha":
        w = Fraction(1) if _is_exact(spec.alpha) else 1.0
        for i in prefix:
            w = w * spec.alpha[0] / spec.alpha[i]
        return w
    w = Fraction(1) if _is_exact(spec.beta) else 1.0
    for i in prefix:
        w = w * spec.beta[i] / spec.beta[0]
    return w


def assemble(base: BaseOperator, spec: StructureSpec, lat: LatticeLevel) -> LevelOperator:
    """Sum weighted copies of (A, b) over every n-cell of the lattice."""
    if base.size != spec.N0:
        raise DimensionError(
            f"base operator has size {base.size}, structure needs {spec.N0}"
        )
    if lat.spec is not spec and lat.spec != spec:
        raise DimensionError("lattice was built from a different structure")

    exact = base.exact and _is_exact(spec.alpha) and _is_exact(spec.beta)
    zero = Fraction(0) if exact else 0.0
    entries: dict = {}
    b = [zero] * lat.num_vertices
    base_mat = base.matrix()

    from .structure import _words

    for prefix in _words(spec.N, lat.n):
        ids = tuple(lat.word_to_id[prefix + (x,)] for x in range(spec.N0))
        wa = cell_weights(spec, prefix, "alpha")
        wb = cell_weights(spec, prefix, "beta")
        for x in range(spec.N0):
            b[ids[x]] += wb * base.b[x]
            row = base_mat[x]
            for y in range(spec.N0):
                if row[y] != 0:
                    key = (ids[x], ids[y])
                    entries[key] = entries.get(key, zero) + wa * row[y]

    return LevelOperator(
        level=lat.n,
        entries={k: v for k, v in entries.items() if v != 0},
        b=tuple(b),
        boundary=lat.boundary,
        lattice=lat,
    )


def h_matrices(op: LevelOperator):
    """Generalized pencils for the Neumann and Dirichlet problems.

    Returns ((A_n, b_n), (A_n restricted, b_n restricted)); eigenvalues of
    the difference operators are the negatives of the pencil eigenvalues.
    """
    A = op.matrix_float()
    b = op.b_float()
    idx = np.array(op.interior, dtype=int)
    return (A, b), (A[np.ix_(idx, idx)], b[idx])
