"""Quasideterminants and block inversion over any RingElement backend.

Index convention: the quasideterminant at position (i, j) is the ring
inverse of entry (j, i) of the full matrix inverse.  This is the unique
convention consistent with the 2x2 expansion

    qd(A, 0, 0) = a00 - a01 * a11^-1 * a10,

and it is what both the recursive expansion and the inverse-based oracle
below implement.  All indices in this module are 0-based.
"""

from __future__ import annotations

import numpy as np

from .ring import MatrixElement, NearSingularError, RingElement


class BlockMatrix:
    """Rectangular array of RingElements drawn from one ring."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("BlockMatrix needs at least one entry")
        width = len(rows[0])
        for row in rows:
            if len(row) != width:
                raise ValueError("ragged rows in BlockMatrix")
            for e in row:
                if not isinstance(e, RingElement):
                    raise TypeError(
                        f"entries must be RingElements, got {type(e).__name__}")
        self.entries = rows

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries[0])

    @property
    def is_square(self) -> bool:
        return self.n == self.m

    def entry(self, i: int, j: int) -> RingElement:
        return self.entries[i][j]

    def __add__(self, other):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        self._require_same_shape(other)
        return BlockMatrix([[a + b for a, b in zip(ra, rb)]
                            for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        self._require_same_shape(other)
        return BlockMatrix([[a - b for a, b in zip(ra, rb)]
                            for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self):
        return BlockMatrix([[-a for a in row] for row in self.entries])

    def __mul__(self, scalar):
        if isinstance(scalar, BlockMatrix):
            return NotImplemented
        return BlockMatrix([[a * scalar for a in row] for row in self.entries])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        if self.m != other.n:
            raise ValueError(f"shape mismatch: {self.n}x{self.m} "
                             f"@ {other.n}x{other.m}")
        out = []
        for i in range(self.n):
            row = []
            for j in range(other.m):
                acc = self.entries[i][0] * other.entries[0][j]
                for k in range(1, self.m):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return BlockMatrix(out)

    def _require_same_shape(self, other):
        if self.n != other.n or self.m != other.m:
            raise ValueError(f"shape mismatch: {self.n}x{self.m} "
                             f"vs {other.n}x{other.m}")

    def identity_like(self) -> "BlockMatrix":
        if not self.is_square:
            raise ValueError("identity_like needs a square BlockMatrix")
        template = self.entries[0][0]
        return BlockMatrix([[template.one_like() if i == j
                             else template.zero_like()
                             for j in range(self.m)] for i in range(self.n)])

    def submatrix(self, skip_row: int, skip_col: int) -> "BlockMatrix":
        """Copy with one row and one column deleted."""
        return BlockMatrix([[e for j, e in enumerate(row) if j != skip_col]
                            for i, row in enumerate(self.entries)
                            if i != skip_row])

    def _block(self, r0, r1, c0, c1) -> "BlockMatrix":
        return BlockMatrix([row[c0:c1] for row in self.entries[r0:r1]])

    def norm(self) -> float:
        return sum(e.norm() ** 2 for row in self.entries
                   for e in row) ** 0.5

    def allclose(self, other, rtol=1e-9, atol=1e-12) -> bool:
        self._require_same_shape(other)
        return all(a.allclose(b, rtol=rtol, atol=atol)
                   for ra, rb in zip(self.entries, other.entries)
                   for a, b in zip(ra, rb))

    def __repr__(self):
        return f"BlockMatrix({self.n}x{self.m})"


def _stack(tl: BlockMatrix, tr: BlockMatrix,
           bl: BlockMatrix, br: BlockMatrix) -> BlockMatrix:
    top = [list(a) + list(b) for a, b in zip(tl.entries, tr.entries)]
    bottom = [list(a) + list(b) for a, b in zip(bl.entries, br.entries)]
    return BlockMatrix(top + bottom)


def _inverse_labeled(block: BlockMatrix, label: str) -> BlockMatrix:
    try:
        return block_inverse(block)
    except NearSingularError as exc:
        raise NearSingularError(str(exc), condition=exc.condition,
                                where=label) from exc


def block_inverse(a: BlockMatrix) -> BlockMatrix:
    """Inverse by recursive 2x2 block decomposition, split at ceil(n/2).

    Uses the noncommutative Schur-complement formula

        [[P, Q], [R, S]]^-1 =
        [[ (P - Q S^-1 R)^-1,  -P^-1 Q (S - R P^-1 Q)^-1 ],
         [ -(S - R P^-1 Q)^-1 R P^-1,  (S - R P^-1 Q)^-1 ]]

    which is exact over any associative ring.  A NearSingularError from any
    pivot block is re-raised naming the block that failed.
    """
    if not a.is_square:
        raise ValueError("block_inverse needs a square BlockMatrix")
    n = a.n
    if n == 1:
        return BlockMatrix([[a.entry(0, 0).inv()]])
    k = (n + 1) // 2
    p = a._block(0, k, 0, k)
    q = a._block(0, k, k, n)
    r = a._block(k, n, 0, k)
    s = a._block(k, n, k, n)
    p_inv = _inverse_labeled(p, "leading diagonal block")
    s_inv = _inverse_labeled(s, "trailing diagonal block")
    schur_lead = p - q @ (s_inv @ r)
    schur_trail = s - r @ (p_inv @ q)
    lead_inv = _inverse_labeled(schur_lead, "Schur complement of leading block")
    trail_inv = _inverse_labeled(schur_trail,
                                 "Schur complement of trailing block")
    return _stack(lead_inv,
                  -(p_inv @ q @ trail_inv),
                  -(trail_inv @ r @ p_inv),
                  trail_inv)


def quasideterminant(a: BlockMatrix, i: int, j: int) -> RingElement:
    """Quasideterminant at (i, j): a_ij - row_i * (A^ij)^-1 * col_j.

    ``row_i`` is row i with entry j removed, ``col_j`` is column j with
    entry i removed, and A^ij is the submatrix with row i and column j
    deleted.  For a 1x1 matrix this is just the entry itself.
    """
    if not a.is_square:
        raise ValueError("quasideterminant needs a square BlockMatrix")
    n = a.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"position ({i},{j}) outside {n}x{n} matrix")
    if n == 1:
        return a.entry(0, 0)
    try:
        sub_inv = block_inverse(a.submatrix(i, j))
    except NearSingularError as exc:
        raise NearSingularError(str(exc), condition=exc.condition,
                                where=f"submatrix for position ({i},{j})"
                                ) from exc
    row = [a.entry(i, q) for q in range(n) if q != j]
    col = [a.entry(p, j) for p in range(n) if p != i]
    acc = a.entry(i, j)
    for pi in range(n - 1):
        weighted = row[0] * sub_inv.entry(0, pi)
        for qi in range(1, n - 1):
            weighted = weighted + row[qi] * sub_inv.entry(qi, pi)
        acc = acc - weighted * col[pi]
    return acc


def quasideterminant_oracle(a: BlockMatrix, i: int, j: int) -> RingElement:
    """Independent evaluation: ring inverse of entry (j, i) of A^-1."""
    full_inv = block_inverse(a)
    try:
        return full_inv.entry(j, i).inv()
    except NearSingularError as exc:
        raise NearSingularError(str(exc), condition=exc.condition,
                                where=f"inverse entry ({j},{i})") from exc


def all_quasideterminants(a: BlockMatrix) -> list[list[RingElement]]:
    """All n*n quasideterminants of a square BlockMatrix."""
    return [[quasideterminant(a, i, j) for j in range(a.m)]
            for i in range(a.n)]


def to_complex_matrix(a: BlockMatrix) -> np.ndarray:
    """Flatten a scalar-backend (d = 1) BlockMatrix to a complex ndarray."""
    out = np.empty((a.n, a.m), dtype=complex)
    for i in range(a.n):
        for j in range(a.m):
            e = a.entry(i, j)
            if not isinstance(e, MatrixElement) or e.d != 1:
                raise ValueError("scalar backend (d = 1) required")
            out[i, j] = e.data[0, 0]
    return out


def determinant_ratio(a: BlockMatrix, i: int, j: int) -> complex:
    """Commutative-limit value (-1)^(i+j) det(A) / det(A^ij)."""
    arr = to_complex_matrix(a)
    sub = np.delete(np.delete(arr, i, axis=0), j, axis=1)
    if sub.size:
        s = np.linalg.svd(sub, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= 1e-12 * s[0]:
            cond = float("inf") if s[-1] == 0 else float(s[0] / s[-1])
            raise NearSingularError(
                "deleted submatrix is near-singular", condition=cond,
                where=f"submatrix for position ({i},{j})")
        det_sub = np.linalg.det(sub)
    else:
        det_sub = 1.0 + 0j
    return (-1) ** (i + j) * np.linalg.det(arr) / det_sub


def commutative_limit_residual(a: BlockMatrix, i: int, j: int) -> float:
    """|quasideterminant - determinant ratio| on the scalar backend."""
    value = quasideterminant(a, i, j)
    got = complex(value.data[0, 0])
    return abs(got - determinant_ratio(a, i, j))
