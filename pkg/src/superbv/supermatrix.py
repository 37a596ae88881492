"""Block (even|odd) graded matrices over the jet ring.

A matrix of graded shape (p|q) has rows and columns 0..p-1 even and
p..p+q-1 odd.  An even matrix has entries whose parity equals the sum of
their row and column parities; those are the matrices the superdeterminant
accepts.  Entries multiply in the written order everywhere, since odd
entries anticommute.
"""

from __future__ import annotations

import itertools

from .jetring import (
    GaussianRational,
    JetError,
    JetSuperFunction,
    NotAUnitError,
    RingSignature,
)


class SuperMatrixError(JetError):
    pass


class SuperMatrix:
    __slots__ = ("sig", "p", "q", "rows")

    def __init__(self, sig: RingSignature, p: int, q: int, rows):
        size = p + q
        if len(rows) != size or any(len(r) != size for r in rows):
            raise SuperMatrixError(f"expected a {size}x{size} entry grid")
        self.sig = sig
        self.p = p
        self.q = q
        self.rows = [list(r) for r in rows]
        for row in self.rows:
            for entry in row:
                if entry.sig != sig:
                    raise SuperMatrixError("all entries must share one ring signature")

    @property
    def size(self) -> int:
        return self.p + self.q

    def index_parity(self, i: int) -> int:
        return 0 if i < self.p else 1

    @staticmethod
    def identity(sig: RingSignature, p: int, q: int) -> "SuperMatrix":
        size = p + q
        one = JetSuperFunction.one(sig)
        zero = JetSuperFunction.zero(sig)
        return SuperMatrix(sig, p, q, [[one if i == j else zero for j in range(size)] for i in range(size)])

    @staticmethod
    def zero(sig: RingSignature, p: int, q: int) -> "SuperMatrix":
        zero = JetSuperFunction.zero(sig)
        return SuperMatrix(sig, p, q, [[zero] * (p + q) for _ in range(p + q)])

    def entry(self, i: int, j: int) -> JetSuperFunction:
        return self.rows[i][j]

    def is_even(self) -> bool:
        for i in range(self.size):
            for j in range(self.size):
                e = self.rows[i][j]
                if e.is_zero():
                    continue
                if e.parity() != (self.index_parity(i) + self.index_parity(j)) % 2:
                    return False
        return True

    def _require_even(self, what: str) -> None:
        if not self.is_even():
            raise SuperMatrixError(f"{what} requires an even graded matrix")

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_shape(other)
        return SuperMatrix(self.sig, self.p, self.q,
                           [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_shape(other)
        return SuperMatrix(self.sig, self.p, self.q,
                           [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> "SuperMatrix":
        return SuperMatrix(self.sig, self.p, self.q, [[-a for a in row] for row in self.rows])

    def _check_shape(self, other: "SuperMatrix") -> None:
        if (self.p, self.q, self.sig) != (other.p, other.q, other.sig):
            raise SuperMatrixError("graded shapes or ring signatures differ")

    def __mul__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_shape(other)
        size = self.size
        zero = JetSuperFunction.zero(self.sig)
        rows = []
        for i in range(size):
            row = []
            for j in range(size):
                acc = zero
                for k in range(size):
                    a = self.rows[i][k]
                    b = other.rows[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            rows.append(row)
        return SuperMatrix(self.sig, self.p, self.q, rows)

    def agrees_with(self, other: "SuperMatrix") -> bool:
        self._check_shape(other)
        return all(a.agrees_with(b) for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def blocks(self):
        """Return (A, B, C, D) entry grids."""
        p = self.p
        a = [row[:p] for row in self.rows[:p]]
        b = [row[p:] for row in self.rows[:p]]
        c = [row[:p] for row in self.rows[p:]]
        d = [row[p:] for row in self.rows[p:]]
        return a, b, c, d

    def supertranspose(self) -> "SuperMatrix":
        """Supertranspose with entry rule (M^ST)^i_j = (-1)^(|j| + |j||i|) M^j_i.

        Blockwise this sends (A, B, C, D) to (A^T, -C^T, B^T, D^T); it is the
        unique sign table compatible with both the covector pullback rule and
        sdet-invariance.
        """
        size = self.size
        rows = [[None] * size for _ in range(size)]
        for i in range(size):
            for j in range(size):
                src = self.rows[j][i]
                sign = self.index_parity(j) * (1 + self.index_parity(i))
                rows[i][j] = -src if sign % 2 else src
        return SuperMatrix(self.sig, self.p, self.q, rows)

    def str_(self) -> JetSuperFunction:
        """Supertrace: trace of the even-even block minus trace of the odd-odd block."""
        acc = JetSuperFunction.zero(self.sig)
        for i in range(self.size):
            entry = self.rows[i][i]
            acc = acc - entry if self.index_parity(i) else acc + entry
        return acc

    supertrace = str_

    def body_matrix(self):
        """Constant part of every entry, as a grid of GaussianRationals."""
        return [[e.body() for e in row] for row in self.rows]

    def inverse(self) -> "SuperMatrix":
        """Two-sided inverse up to the working precision.

        Splits off the constant body, inverts it exactly, then runs the
        terminating geometric series on the nilpotent-plus-higher remainder.
        """
        self._require_even("inversion")
        body = self.body_matrix()
        try:
            body_inv = _invert_scalar_matrix(body)
        except ZeroDivisionError:
            raise NotAUnitError("body of the matrix is not invertible") from None
        size = self.size
        b_inv = SuperMatrix(self.sig, self.p, self.q,
                            [[JetSuperFunction.scalar(self.sig, body_inv[i][j]) for j in range(size)]
                             for i in range(size)])
        identity = SuperMatrix.identity(self.sig, self.p, self.q)
        remainder = identity - b_inv * self
        acc = identity
        power = remainder
        prec = min((e.prec for row in self.rows for e in row), default=self.sig.cap)
        limit = prec + 2 * self.sig.m + 2
        steps = 0
        while not all(e.is_zero() for row in power.rows for e in row):
            acc = acc + power
            power = power * remainder
            steps += 1
            if steps > limit:
                raise SuperMatrixError("matrix geometric series failed to terminate")
        return acc * b_inv

    def det_even_block(self, grid) -> JetSuperFunction:
        return det_even(self.sig, grid)

    def sdet(self) -> JetSuperFunction:
        """Superdeterminant det(A - B D^-1 C) * det(D)^-1 of an even matrix."""
        self._require_even("sdet")
        a, b, c, d = self.blocks()
        if self.q == 0:
            return self.det_even_block(a)
        d_mat = SuperMatrix(self.sig, 0, self.q, d)
        d_inv = d_mat.inverse()
        det_d = self.det_even_block(d)
        if self.p == 0:
            return det_d.invert()
        schur = []
        for i in range(self.p):
            row = []
            for j in range(self.p):
                acc = a[i][j]
                for k in range(self.q):
                    for l in range(self.q):
                        acc = acc - b[i][k] * d_inv.rows[k][l] * c[l][j]
                row.append(acc)
            schur.append(row)
        return self.det_even_block(schur) * det_d.invert()

    def sdet_via_a_block(self) -> JetSuperFunction:
        """Cross-check form det(A)*det(D - C A^-1 B)^-1; oracle for tests only."""
        self._require_even("sdet")
        a, b, c, d = self.blocks()
        if self.p == 0:
            return self.det_even_block(d).invert()
        a_mat = SuperMatrix(self.sig, self.p, 0, a)
        a_inv = a_mat.inverse()
        det_a = self.det_even_block(a)
        if self.q == 0:
            return det_a
        schur = []
        for i in range(self.q):
            row = []
            for j in range(self.q):
                acc = d[i][j]
                for k in range(self.p):
                    for l in range(self.p):
                        acc = acc - c[i][k] * a_inv.rows[k][l] * b[l][j]
                row.append(acc)
            schur.append(row)
        return det_a * self.det_even_block(schur).invert()

    def render(self) -> str:
        body = "; ".join("[" + ", ".join(e.render() for e in row) + "]" for row in self.rows)
        return f"[{body}]"

    def __repr__(self) -> str:
        return f"<supermatrix ({self.p}|{self.q}) {self.render()}>"


def det_even(sig: RingSignature, grid) -> JetSuperFunction:
    """Leibniz determinant of a square grid of even (hence central) entries."""
    size = len(grid)
    if size == 0:
        return JetSuperFunction.one(sig)
    acc = JetSuperFunction.zero(sig)
    for perm in itertools.permutations(range(size)):
        sign = _perm_sign(perm)
        prod = JetSuperFunction.one(sig)
        for i in range(size):
            prod = prod * grid[i][perm[i]]
            if prod.is_zero():
                break
        acc = acc + prod if sign > 0 else acc - prod
    return acc


def _perm_sign(perm) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def _invert_scalar_matrix(grid):
    """Exact Gauss-Jordan inverse of a grid of GaussianRationals."""
    size = len(grid)
    work = [[grid[i][j] for j in range(size)] for i in range(size)]
    result = [[GaussianRational.of(1 if i == j else 0) for j in range(size)] for i in range(size)]
    for col in range(size):
        pivot_row = next((r for r in range(col, size) if work[r][col]), None)
        if pivot_row is None:
            raise ZeroDivisionError("singular matrix")
        work[col], work[pivot_row] = work[pivot_row], work[col]
        result[col], result[pivot_row] = result[pivot_row], result[col]
        pivot = work[col][col]
        work[col] = [x / pivot for x in work[col]]
        result[col] = [x / pivot for x in result[col]]
        for r in range(size):
            if r == col:
                continue
            factor = work[r][col]
            if not factor:
                continue
            work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
            result[r] = [x - factor * y for x, y in zip(result[r], result[col])]
    return result
