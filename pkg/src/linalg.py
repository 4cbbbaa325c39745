"""Exact sparse linear algebra over Q(i).

Matrices are dict-of-dicts ``{row: {col: value}}`` with no stored zeros, the
representation sympy's sparse domain matrices use internally. Reduced row
echelon forms come from ``sdm_irref``; kernels, images, solutions and
cokernel certificates are read off the echelon form with deterministic
pivots (leftmost nonzero column first).

Generic ranks of jet matrices are computed either symbolically, by
fraction-free Bareiss elimination over the polynomial ring, or by exact rank
at random conjugation-consistent rational points.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.matrices.sdm import sdm_irref

from src import MAX_SAMPLE_DENOMINATOR
from src.jets import Jet, JetRing, consistent_point, jet_eval
from src.scalars import ZERO, gauss, to_scalar

logger = logging.getLogger(__name__)

Vector = Dict[int, object]


class SparseMatrix:
    """An immutable-by-convention sparse matrix of Gaussian rationals."""

    def __init__(self, rows: Mapping[int, Mapping[int, object]], nrows: int, ncols: int):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: Dict[int, Dict[int, object]] = {}
        for i, row in rows.items():
            clean = {j: v for j, v in row.items() if v}
            if clean:
                self.rows[i] = clean

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[object]], ncols: Optional[int] = None) -> "SparseMatrix":
        nrows = len(data)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        rows = {
            i: {j: to_scalar(v) for j, v in enumerate(row) if v}
            for i, row in enumerate(data)
        }
        return cls(rows, nrows, ncols)

    @classmethod
    def from_columns(cls, columns: Sequence[Vector], nrows: int) -> "SparseMatrix":
        rows: Dict[int, Dict[int, object]] = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    rows.setdefault(i, {})[j] = v
        return cls(rows, nrows, len(columns))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls({}, nrows, ncols)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def transpose(self) -> "SparseMatrix":
        rows: Dict[int, Dict[int, object]] = {}
        for i, row in self.rows.items():
            for j, v in row.items():
                rows.setdefault(j, {})[i] = v
        return SparseMatrix(rows, self.ncols, self.nrows)

    def column(self, j: int) -> Vector:
        return {i: row[j] for i, row in self.rows.items() if j in row}

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [{} for _ in range(self.ncols)]
        for i, row in self.rows.items():
            for j, v in row.items():
                cols[j][i] = v
        return cols

    def matvec(self, x: Vector) -> Vector:
        out: Vector = {}
        for i, row in self.rows.items():
            total = ZERO
            for j, v in row.items():
                if j in x:
                    total += v * x[j]
            if total:
                out[i] = total
        return out

    def hstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if other.nrows != self.nrows:
            raise ValueError(f"Row mismatch in hstack: {self.nrows} vs {other.nrows}")
        rows = {i: dict(row) for i, row in self.rows.items()}
        for i, row in other.rows.items():
            target = rows.setdefault(i, {})
            for j, v in row.items():
                target[j + self.ncols] = v
        return SparseMatrix(rows, self.nrows, self.ncols + other.ncols)

    def to_dense(self) -> List[List[object]]:
        return [
            [self.rows.get(i, {}).get(j, ZERO) for j in range(self.ncols)]
            for i in range(self.nrows)
        ]

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseMatrix) and self.shape == other.shape and self.rows == other.rows


def rref(matrix: SparseMatrix) -> Tuple[List[Dict[int, object]], List[int]]:
    """Reduced row echelon form.

    Returns:
        (pivot rows in pivot order, pivot column indices)
    """
    if not matrix.rows:
        return [], []
    reduced, pivots, _ = sdm_irref({i: dict(r) for i, r in matrix.rows.items()})
    rows = [reduced[k] for k in range(len(pivots))]
    return rows, list(pivots)


def _kernel_from_rref(rows: List[Dict[int, object]], pivots: List[int], ncols: int) -> List[Vector]:
    pivot_set = set(pivots)
    kernel = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec: Vector = {free: gauss(1)}
        for row, p in zip(rows, pivots):
            if free in row:
                vec[p] = -row[free]
        kernel.append(vec)
    return kernel


@dataclass(frozen=True)
class KernelImage:
    """Kernel basis, image basis and rank of a matrix."""

    kernel: List[Vector]
    image: List[Vector]
    rank: int
    pivots: Tuple[int, ...]


def kernel_image_basis(matrix: SparseMatrix) -> KernelImage:
    """Kernel and image bases in deterministic pivot order.

    The kernel has one vector per free column (1 there, back-substituted pivot
    entries elsewhere); the image basis is the set of pivot columns of the
    original matrix.
    """
    rows, pivots = rref(matrix)
    kernel = _kernel_from_rref(rows, pivots, matrix.ncols)
    image = [matrix.column(p) for p in pivots]
    return KernelImage(kernel=kernel, image=image, rank=len(pivots), pivots=tuple(pivots))


def rank(matrix: SparseMatrix) -> int:
    return len(rref(matrix)[1])


@dataclass(frozen=True)
class Membership:
    """Outcome of :func:`membership_solve`.

    ``solution`` is set when v lies in the column space; otherwise
    ``residue`` holds v paired against each cokernel basis vector.
    """

    member: bool
    solution: Optional[Vector] = None
    residue: Optional[List[object]] = None
    cokernel: List[Vector] = field(default_factory=list)


def membership_solve(matrix: SparseMatrix, v: Vector) -> Membership:
    """Solve M x = v or certify that no solution exists."""
    augmented = matrix.hstack(SparseMatrix.from_columns([v], matrix.nrows))
    rows, pivots = rref(augmented)
    rhs = matrix.ncols
    if rhs not in pivots:
        solution: Vector = {}
        for row, p in zip(rows, pivots):
            if rhs in row:
                solution[p] = row[rhs]
        return Membership(member=True, solution=solution)
    cokernel = kernel_image_basis(matrix.transpose()).kernel
    residue = []
    for y in cokernel:
        total = ZERO
        for i, val in y.items():
            if i in v:
                total += val * v[i]
        residue.append(total)
    return Membership(member=False, residue=residue, cokernel=cokernel)


class ImageReducer:
    """Reduce many vectors modulo the column space of one fixed matrix.

    The echelon form of the transpose spans the column space; a vector is in
    the image iff its reduction is empty.
    """

    def __init__(self, matrix: SparseMatrix):
        self.nrows = matrix.nrows
        rows, pivots = rref(matrix.transpose())
        self._rows = dict(zip(pivots, rows))
        self._pivots = pivots

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce(self, v: Vector) -> Vector:
        residual = {i: c for i, c in v.items() if c}
        for p in self._pivots:
            c = residual.get(p)
            if not c:
                continue
            for j, r in self._rows[p].items():
                value = residual.get(j, ZERO) - c * r
                if value:
                    residual[j] = value
                else:
                    residual.pop(j, None)
        return residual

    def contains(self, v: Vector) -> bool:
        return not self.reduce(v)


def bareiss_rank(entries: Sequence[Sequence[object]], one, zero) -> int:
    """Rank by fraction-free elimination with exact divisions.

    Works for any exact integral domain whose elements support ``exquo``
    (sympy polynomial ring elements).
    """
    m = [list(row) for row in entries]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    r = 0
    prev = one
    for col in range(ncols):
        if r == nrows:
            break
        pivot = next((i for i in range(r, nrows) if m[i][col]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][col]
        for i in range(r + 1, nrows):
            lead = m[i][col]
            for j in range(col + 1, ncols):
                m[i][j] = (p * m[i][j] - lead * m[r][j]).exquo(prev)
            m[i][col] = zero
        prev = p
        r += 1
    return r


def sample_point(ring: JetRing, rng: np.random.Generator, max_den: int = MAX_SAMPLE_DENOMINATOR) -> Dict[str, object]:
    """A conjugation-consistent random rational point with bounded denominators."""
    values = {}
    for p in ring.params:
        parts = []
        for _ in range(2):
            den = int(rng.integers(1, max_den + 1))
            num = int(rng.integers(-den, den + 1))
            parts.append(Fraction(num, den))
        values[p] = gauss(parts[0], parts[1])
    return consistent_point(ring, values)


def evaluate_matrix(entries: Sequence[Sequence[Jet]], point: Mapping[str, object]) -> SparseMatrix:
    rows = {
        i: {j: jet_eval(e, point) for j, e in enumerate(row) if e}
        for i, row in enumerate(entries)
    }
    ncols = len(entries[0]) if entries else 0
    return SparseMatrix(rows, len(entries), ncols)


@dataclass(frozen=True)
class RankResult:
    """Generic rank, or ``None`` with status 'inconclusive' when samples disagree."""

    rank: Optional[int]
    status: str
    samples: Tuple[int, ...] = ()


def generic_rank(
    entries: Sequence[Sequence[Jet]],
    mode: str,
    rng: Optional[np.random.Generator] = None,
) -> RankResult:
    """Rank of a jet matrix at a generic point of the base.

    Args:
        entries: Dense matrix of jets sharing one ring
        mode: 'symbolic' (Bareiss over the polynomial ring) or 'sampled'
        rng: Random generator, required in sampled mode

    Returns:
        RankResult with the rank and a status
    """
    nonzero = [e for row in entries for e in row if e]
    if not nonzero:
        return RankResult(rank=0, status="ok")
    ring = nonzero[0].ring
    if mode == "symbolic":
        poly_ring = ring.poly_ring
        polys = [[e.poly for e in row] for row in entries]
        return RankResult(rank=bareiss_rank(polys, poly_ring.one, poly_ring.zero), status="ok")
    if mode == "sampled":
        if rng is None:
            raise ValueError("Sampled generic rank requires a seeded random generator")
        ranks = tuple(rank(evaluate_matrix(entries, sample_point(ring, rng))) for _ in range(2))
        if ranks[0] != ranks[1]:
            logger.info("Sampled ranks disagree: %s", ranks)
            return RankResult(rank=None, status="inconclusive", samples=ranks)
        return RankResult(rank=ranks[0], status="ok", samples=ranks)
    raise ValueError(f"Unknown rank mode: {mode}")
