"""Small mod-q linear algebra helpers (q prime, desk-scale sizes)."""

from __future__ import annotations

import numpy as np

from .errors import ContractError, InvalidInputError

__all__ = ["solve_mod", "uniform_matrix"]


def uniform_matrix(rows: int, cols: int, q: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, q, size=(rows, cols), dtype=np.int64)


def solve_mod(A: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    """One particular solution x of A x = u (mod q), free variables set to 0.

    Plain Gauss-Jordan over the field Z_q; A is n x m with n <= m here.
    Raises ContractError if the system is inconsistent.
    """
    A = np.asarray(A, dtype=np.int64) % q
    u = np.asarray(u, dtype=np.int64) % q
    n, m = A.shape
    if u.shape != (n,):
        raise InvalidInputError(f"syndrome length {u.shape} does not match {n} rows")
    aug = np.concatenate([A, u.reshape(n, 1)], axis=1)
    pivots: list[tuple[int, int]] = []
    row = 0
    for col in range(m):
        if row == n:
            break
        hit = np.nonzero(aug[row:, col])[0]
        if hit.size == 0:
            continue
        lead = row + int(hit[0])
        if lead != row:
            aug[[row, lead]] = aug[[lead, row]]
        inv = pow(int(aug[row, col]), -1, q)
        aug[row] = aug[row] * inv % q
        for r in range(n):
            if r != row and aug[r, col]:
                aug[r] = (aug[r] - aug[r, col] * aug[row]) % q
        pivots.append((row, col))
        row += 1
    if any(aug[r, m] and not aug[r, :m].any() for r in range(row, n)):
        raise ContractError("inconsistent modular system: no preimage exists")
    x = np.zeros(m, dtype=np.int64)
    for r, c in pivots:
        x[c] = aug[r, m]
    return x
