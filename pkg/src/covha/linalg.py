"""Small dense complex elimination: rank, reduced row echelon form, null space.

Pivots below ``rtol`` times the largest entry of the input are treated as zero.
"""

from __future__ import annotations

import numpy as np

PIVOT_RTOL = 1e-10


def rref(a: np.ndarray, rtol: float = PIVOT_RTOL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form by Gauss-Jordan elimination with partial pivoting."""
    m = np.array(a, dtype=complex, copy=True)
    if m.size == 0:
        return m, []
    rows, cols = m.shape
    thresh = rtol * max(np.abs(m).max(), np.finfo(float).tiny)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) <= thresh:
            m[r:, c] = 0
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] /= m[r, c]
        others = np.arange(rows) != r
        m[others] -= np.outer(m[others, c], m[r])
        m[others, c] = 0
        pivots.append(c)
        r += 1
    m[r:] = 0
    return m, pivots


def rank(a: np.ndarray, rtol: float = PIVOT_RTOL) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref(a, rtol)[1])


def null_space(a: np.ndarray, rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Basis of ``{x : a @ x = 0}`` as columns, one per free variable.

    Each column has a 1 at its free variable and zeros at the other free
    variables, so the basis is deterministic.
    """
    a = np.asarray(a, dtype=complex)
    cols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    r, pivots = rref(a, rtol)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((cols, len(free)), dtype=complex)
    for k, fcol in enumerate(free):
        basis[fcol, k] = 1.0
        for i, pcol in enumerate(pivots):
            basis[pcol, k] = -r[i, fcol]
    return basis


def column_space(a: np.ndarray, rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Linearly independent columns of ``a`` (pivot columns)."""
    a = np.asarray(a, dtype=complex)
    _, pivots = rref(a, rtol)
    return a[:, pivots]
