"""Dense GF(2) linear algebra on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


def rref(M):
    """Reduced row-echelon form over GF(2).

    Pivots are searched left to right, so column order sets the pivot
    preference.

    Returns:
        (R, pivots): reduced matrix and the list of pivot column indices.
    """
    R = (np.asarray(M, dtype=np.uint8) & 1).copy()
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.flatnonzero(R[row:, col])
        if nz.size == 0:
            continue
        r = row + nz[0]
        if r != row:
            R[[row, r]] = R[[r, row]]
        hits = np.flatnonzero(R[:, col])
        hits = hits[hits != row]
        R[hits] ^= R[row]
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M) -> int:
    M = np.asarray(M, dtype=np.uint8)
    if M.size == 0:
        return 0
    return len(rref(M)[1])


def solve(A, b):
    """One solution x of A x = b over GF(2), free variables set to 0.

    Returns None when the system is inconsistent.
    """
    A = np.asarray(A, dtype=np.uint8) & 1
    b = np.asarray(b, dtype=np.uint8).reshape(-1, 1) & 1
    m, n = A.shape
    R, pivots = rref(np.hstack([A, b]))
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for i, col in enumerate(pivots):
        x[col] = R[i, n]
    return x


def nullspace(A):
    """Basis of {x : A x = 0} as rows of a uint8 matrix."""
    A = np.asarray(A, dtype=np.uint8) & 1
    m, n = A.shape
    if m == 0:
        return np.eye(n, dtype=np.uint8)
    R, pivots = rref(A)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, col in enumerate(pivots):
            basis[k, col] = R[i, f]
    return basis


def span(rows):
    """All 2^k combinations of the given rows (k small), shape (2^k, n)."""
    rows = np.asarray(rows, dtype=np.uint8)
    k, n = rows.shape
    coeff = (np.arange(1 << k)[:, None] >> np.arange(k)[None, :]) & 1
    return (coeff.astype(np.int64) @ rows.astype(np.int64) & 1).astype(np.uint8)
