"""Dense linear-algebra kernels for small ill-conditioned systems.

Everything here operates on the (M+2)-dimensional matrices of the
variational linear system.  Determinants are computed after a two-sided
power-of-two equilibration (exact rescaling, no rounding introduced) so
that their accuracy degrades with the conditioning of the balanced
matrix rather than the raw one.  Adjugates come from three routes:
det(A) A^{-1} away from singularity, an SVD rank-revealing product form
near it, and an exact Laplace-expansion evaluator for small dimensions
that serves as the independent oracle in tests.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .errors import SingularMatrix

__all__ = [
    "one_norm",
    "balanced_det",
    "lu_solve_det",
    "solve_extended",
    "adjugate",
    "adjugate_cofactor",
    "det_cofactor",
    "cond_one",
    "hadamard_bound",
]

# pivots below this fraction of ||A||_1 count as exact singularity; the
# floor sits far beneath quadrature noise so conditioning diagnostics,
# not solver failure, decide what is "singular"
PIVOT_FLOOR = 1e-30


def one_norm(a: np.ndarray) -> float:
    """Matrix 1-norm (maximum absolute column sum)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=0).max())


def hadamard_bound(a: np.ndarray) -> float:
    """Product of row 2-norms; an upper bound on |det| and its natural scale."""
    a = np.asarray(a)
    norms = np.sqrt((np.abs(a) ** 2).sum(axis=1))
    return float(np.prod(norms))


def _lu(a: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    return lu, piv


def _det_from_lu(lu: np.ndarray, piv: np.ndarray):
    diag = np.diag(lu)
    sign = 1.0 if (piv != np.arange(len(piv))).sum() % 2 == 0 else -1.0
    return sign * np.prod(diag)


def _balance_scales(a: np.ndarray, sweeps: int = 3) -> np.ndarray:
    """Power-of-two row/column scaling exponents (symmetric equilibration)."""
    n = a.shape[0]
    expo = np.zeros(n)
    mag = np.abs(a)
    for _ in range(sweeps):
        scale = np.exp2(expo)
        m = mag * scale[:, None] * scale[None, :]
        size = np.maximum(m.max(axis=0), m.max(axis=1))
        nz = size > 0.0
        if not np.any(nz):
            break
        expo[nz] -= np.round(0.5 * np.log2(size[nz]))
    return expo


def balanced_det(a: np.ndarray):
    """Determinant via LU of the equilibrated matrix.

    Scaling by powers of two is exact, so the result equals det(A) up to
    the rounding of the balanced factorization.  Works for real and
    complex matrices.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if n == 0:
        return 1.0
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    expo = _balance_scales(a)
    scale = np.exp2(expo)
    det_scaled = _det_from_lu(*_lu(a * scale[:, None] * scale[None, :]))
    # undo the scaling: det(A) = det(DAD) / prod(d_i)^2
    total = float(2.0 * expo.sum())
    return det_scaled * 2.0 ** (-total)


def lu_solve_det(a: np.ndarray, rhs: np.ndarray):
    """Solve a x = rhs by partial-pivoted LU; also return det(a).

    Raises SingularMatrix when a pivot falls below PIVOT_FLOOR * ||a||_1.
    """
    a = np.asarray(a)
    lu, piv = _lu(a)
    floor = PIVOT_FLOOR * one_norm(a)
    if not np.all(np.abs(np.diag(lu)) > floor):
        raise SingularMatrix(
            f"pivot below {floor:.3e} in {a.shape[0]}x{a.shape[0]} system"
        )
    x = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    return x, balanced_det(a)


def solve_extended(a: np.ndarray, rhs: np.ndarray):
    """Partial-pivoted LU solve carried out in extended precision.

    The correlation basis drives condition numbers past 1e20, where a
    double-precision solve leaves ~1e-7 noise in the stationary
    functional.  Factorizing in numpy longdouble (80-bit on x86) cuts
    that noise by the ratio of the machine epsilons (~2000x) at
    negligible cost for these small dense systems.  On platforms where
    longdouble is plain double this degrades gracefully.

    Returns (x, det) in extended precision; forward substitution is
    fused into the elimination.
    """
    complex_input = np.iscomplexobj(a) or np.iscomplexobj(rhs)
    dtype = np.clongdouble if complex_input else np.longdouble
    m = np.array(a, dtype=dtype)
    x = np.array(rhs, dtype=dtype)
    n = m.shape[0]
    floor = PIVOT_FLOOR * one_norm(a)
    sign = 1.0
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if p != k:
            m[[k, p]] = m[[p, k]]
            x[[k, p]] = x[[p, k]]
            sign = -sign
        pivot = m[k, k]
        if abs(pivot) <= floor:
            raise SingularMatrix(f"pivot {abs(pivot):.3e} below floor {floor:.3e}")
        mult = m[k + 1:, k] / pivot
        m[k + 1:, k + 1:] -= np.outer(mult, m[k, k + 1:])
        x[k + 1:] -= mult * x[k]
    if abs(m[n - 1, n - 1]) <= floor:
        raise SingularMatrix("last pivot below floor")
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - m[i, i + 1:] @ x[i + 1:]) / m[i, i]
    det = sign * np.prod(np.diag(m))
    return x, det


def cond_one(a: np.ndarray) -> tuple[float, float]:
    """Exact 1-norm condition number and reciprocal distance to singularity.

    kappa = ||A||_1 ||A^-1||_1 with the inverse norm taken from n unit
    vector solves; Lambda = 1/kappa.  Singular input gives (inf, 0).
    """
    a = np.asarray(a)
    n = a.shape[0]
    na = one_norm(a)
    lu, piv = _lu(a)
    if not np.all(np.abs(np.diag(lu)) > PIVOT_FLOOR * na):
        return math.inf, 0.0
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)
    if not np.all(np.isfinite(inv)):
        return math.inf, 0.0
    kappa = na * one_norm(inv)
    if not math.isfinite(kappa) or kappa <= 0.0:
        return math.inf, 0.0
    return kappa, 1.0 / kappa


# ---------------------------------------------------------------------------
# adjugates
# ---------------------------------------------------------------------------

def det_cofactor(a: np.ndarray):
    """Determinant by Laplace expansion over column subsets (exact oracle).

    O(n^2 2^n); intended for n <= 10 in tests and small-system fallbacks.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if n > 12:
        raise ValueError("cofactor determinant limited to n <= 12")
    if n == 0:
        return 1.0
    # dp over column bitmasks, expanding along consecutive rows
    dp = {0: a.dtype.type(1.0) * 1.0}
    for row in range(n):
        nxt = {}
        for mask, val in dp.items():
            if val == 0.0:
                continue
            sign = 1.0
            for col in range(n):
                bit = 1 << col
                if mask & bit:
                    continue
                contrib = sign * val * a[row, col]
                key = mask | bit
                nxt[key] = nxt.get(key, 0.0) + contrib
                sign = -sign
        dp = nxt
    return dp[(1 << n) - 1]


def adjugate_cofactor(a: np.ndarray) -> np.ndarray:
    """Adjugate from explicit cofactors; exact oracle for small n."""
    a = np.asarray(a)
    n = a.shape[0]
    adj = np.empty_like(a, dtype=np.result_type(a.dtype, float))
    rows = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = a[np.ix_(rows != i, rows != j)]
            adj[j, i] = (-1.0) ** (i + j) * det_cofactor(minor)
    return adj


def _adjugate_svd(a: np.ndarray) -> np.ndarray:
    """Rank-revealing adjugate: adj(U S V^T) = det(U)det(V) V P U^T,
    where P = diag of products of the other singular values."""
    u, s, vt = np.linalg.svd(a)
    n = len(s)
    pref = np.concatenate(([1.0], np.cumprod(s)))
    suff = np.concatenate((np.cumprod(s[::-1])[::-1], [1.0]))
    prods = pref[:n] * suff[1:]
    sign = np.sign(np.linalg.det(u)) * np.sign(np.linalg.det(vt))
    return sign * (vt.T * prods) @ u.T


def adjugate(a: np.ndarray, det: float | None = None) -> np.ndarray:
    """adj(A), defined for singular A as well (A adj(A) = det(A) I).

    Away from singularity this is det(A) A^{-1} from the pivoted
    factorization; near it (|det| under 1e-12 of the Hadamard scale) a
    rank-revealing SVD product takes over.  Exact cofactors hold for
    small dimensions.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if det is None:
        det = balanced_det(a)
    if n <= 4:
        return adjugate_cofactor(a)
    scale = max(hadamard_bound(a), 1e-300)
    if abs(det) < 1e-12 * scale:
        return _adjugate_svd(a)
    lu, piv = _lu(a)
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)
    return det * inv
