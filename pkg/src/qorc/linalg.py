"""Dense complex kernels: Haar unitaries, repeated-index submatrices, permanents."""

import numpy as np

from . import _accel
from .errors import InvalidDimensionError, ShapeError
from .rng import make_rng

MAX_PERMANENT_DIM = 30
UNITARITY_TOL = 1e-10


def haar_random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed ``dim x dim`` unitary, deterministic in ``seed``.

    QR of a complex Ginibre matrix, with each column of Q multiplied by the
    phase of the matching diagonal entry of R so the result is Haar rather than
    QR-biased.
    """
    if dim < 1:
        raise InvalidDimensionError(f"unitary dimension must be >= 1, got {dim}")
    rng = make_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def is_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))) <= tol


def submatrix(m: np.ndarray, rows, cols) -> np.ndarray:
    """``m[rows][:, cols]`` where ``rows``/``cols`` may repeat indices.

    ``rows`` lists one output mode per photon and ``cols`` one input mode per
    photon, so occupations greater than one show up as repeated rows/columns.
    """
    m = np.asarray(m)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.shape != cols.shape or rows.ndim != 1:
        raise ShapeError(f"row and column multisets differ in size: {rows.size} vs {cols.size}")
    if rows.size and (rows.min() < 0 or rows.max() >= m.shape[0]):
        raise ShapeError("row index out of range")
    if cols.size and (cols.min() < 0 or cols.max() >= m.shape[1]):
        raise ShapeError("column index out of range")
    return m[np.ix_(rows, cols)]


def occupation_to_indices(occupation) -> np.ndarray:
    """(2, 0, 1) -> [0, 0, 2]"""
    occ = np.asarray(occupation, dtype=np.int64)
    return np.repeat(np.arange(occ.size), occ)


@_accel.njit
def _ryser_numba(a):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    rowsum = np.zeros(n, dtype=np.complex128)
    chosen = np.zeros(n, dtype=np.bool_)
    size = 0
    total = 0.0 + 0.0j
    for k in range(1, 1 << n):
        # Gray code: flip the lowest set bit of k
        j = 0
        kk = k
        while (kk & 1) == 0:
            kk >>= 1
            j += 1
        if chosen[j]:
            for i in range(n):
                rowsum[i] -= a[i, j]
            chosen[j] = False
            size -= 1
        else:
            for i in range(n):
                rowsum[i] += a[i, j]
            chosen[j] = True
            size += 1
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= rowsum[i]
        if size & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        return -total
    return total


def _subset_masks(n: int, start: int, stop: int):
    ids = np.arange(start, stop, dtype=np.int64)
    bits = ((ids[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)
    signs = np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0)
    return bits, signs


def _ryser_numpy(a, chunk: int = 1 << 15):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    for start in range(1, 1 << n, chunk):
        bits, signs = _subset_masks(n, start, min(start + chunk, 1 << n))
        sums = bits @ a.T  # (subsets, rows)
        total += np.dot(signs, np.prod(sums, axis=1))
    return -total if n & 1 else total


def permanent(m) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula in Gray-code order, O(2^n n)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"permanent needs a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_PERMANENT_DIM:
        raise InvalidDimensionError(f"permanent dimension {a.shape[0]} exceeds {MAX_PERMANENT_DIM}")
    if _accel.USE_NUMBA:
        return complex(_ryser_numba(np.ascontiguousarray(a)))
    return complex(_ryser_numpy(a))


@_accel.njit
def _perm_abs2_batch_numba(u_cols, rows):
    n_out, k = rows.shape
    res = np.empty(n_out, dtype=np.float64)
    sub = np.empty((k, k), dtype=np.complex128)
    for b in range(n_out):
        for i in range(k):
            for j in range(k):
                sub[i, j] = u_cols[rows[b, i], j]
        p = _ryser_numba(sub)
        res[b] = p.real * p.real + p.imag * p.imag
    return res


def _perm_abs2_batch_numpy(u_cols, rows, chunk: int = 4096):
    n_out, k = rows.shape
    if k == 0:
        return np.ones(n_out)
    bits, signs = _subset_masks(k, 1, 1 << k)
    res = np.empty(n_out)
    for start in range(0, n_out, chunk):
        sub = u_cols[rows[start:start + chunk]]  # (b, k rows, k cols)
        sums = sub @ bits.T  # (b, k, subsets)
        perms = np.prod(sums, axis=1) @ signs
        if k & 1:
            perms = -perms
        res[start:start + chunk] = np.abs(perms) ** 2
    return res


def permanent_abs2_batch(u_cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """``|perm(u_cols[rows[b], :])|**2`` for every row-multiset ``rows[b]``.

    ``u_cols`` is ``M x k`` (the interferometer columns of the occupied input
    modes) and ``rows`` is ``B x k`` with one output mode per photon.
    """
    u_cols = np.ascontiguousarray(u_cols, dtype=np.complex128)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    if rows.ndim != 2 or rows.shape[1] != u_cols.shape[1]:
        raise ShapeError(f"rows shape {rows.shape} incompatible with {u_cols.shape[1]} input photons")
    if _accel.USE_NUMBA:
        return _perm_abs2_batch_numba(u_cols, rows)
    return _perm_abs2_batch_numpy(u_cols, rows)
