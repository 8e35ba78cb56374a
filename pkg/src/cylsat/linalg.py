"""Small exact linear-algebra helpers over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def det3(m: Sequence[Sequence]):
    """Determinant of a 3x3 matrix (entries may be any ring elements)."""
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by fraction Gaussian elimination."""
    a = [[Fraction(x) for x in r] for r in rows]
    if not a:
        return 0
    n_cols = len(a[0])
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, len(a)):
            if a[i][c]:
                t = a[i][c] / a[r][c]
                a[i] = [x - t * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == len(a):
            break
    return r
