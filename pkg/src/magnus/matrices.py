"""Dense matrices over any exact field (Fraction, CycloRat) as lists of lists."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list]


def identity(n: int, one=1, zero=0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    n, m = len(A), len(B[0])
    out = []
    for i in range(n):
        row = [0] * m
        for k, a in enumerate(A[i]):
            if a:
                Bk = B[k]
                for j in range(m):
                    if Bk[j]:
                        row[j] = row[j] + a * Bk[j]
        out.append(row)
    return out


def mat_inv(A: Sequence[Sequence]) -> Matrix:
    """Gauss-Jordan inverse; entries must support exact division."""
    n = len(A)
    M = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c]), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        M[c], M[piv] = M[piv], M[c]
        p = M[c][c]
        inv_p = Fraction(1, p) if isinstance(p, int) else 1 / p
        M[c] = [x * inv_p if x else x for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [x - f * y if y else x for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def mat_pow(A: Sequence[Sequence], k: int) -> Matrix:
    if k < 0:
        A, k = mat_inv(A), -k
    result = identity(len(A))
    base = [list(r) for r in A]
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def mat_eq(A: Sequence[Sequence], B: Sequence[Sequence]) -> bool:
    return len(A) == len(B) and all(
        len(ra) == len(rb) and all(a == b for a, b in zip(ra, rb)) for ra, rb in zip(A, B)
    )


class MatrixOps:
    """Group operations on invertible matrices, for word evaluation."""

    def __init__(self, dim: int):
        self.dim = dim

    def mul(self, a, b):
        return mat_mul(a, b)

    def inv(self, a):
        return mat_inv(a)

    def identity(self):
        return identity(self.dim)


def vecmat(v: Sequence[int], M: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Row vector times integer matrix."""
    m = len(M[0]) if M else 0
    out = [0] * m
    for vi, row in zip(v, M):
        if vi:
            for j, x in enumerate(row):
                if x:
                    out[j] += vi * x
    return tuple(out)


def int_mat_mul(A, B) -> tuple[tuple[int, ...], ...]:
    return tuple(vecmat(r, B) for r in A)
