"""Exact determinants of dyadic-rational matrices.

The variational matrices built from the power-exponential correlation
basis are so ill-conditioned (condition numbers beyond 1e20 at the
default basis size) that floating-point determinants carry no correct
digits.  Every float is a dyadic rational, though, so after scaling by
a common power of two the matrix is integral and the fraction-free
Bareiss elimination yields det(A) exactly with big integers; entry
growth is bounded (roughly n times the entry bit width), which keeps a
14x14 determinant around a few milliseconds.

Real matrices use plain integers, complex ones Gaussian integers
(Bareiss divisions stay exact over any integral domain).  Results are
rounded to float once at the end, in log2 space to dodge overflow of
the intermediate big integers.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = [
    "det_exact",
    "det_exact_complex",
    "cramer_xb_exact",
    "scaled_int_matrix",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(float(x))


def _pow2_denominator_bits(x: Fraction) -> int:
    d = x.denominator
    bits = d.bit_length() - 1
    if d != (1 << bits):
        raise ValueError("entry is not a dyadic rational")
    return bits


def scaled_int_matrix(rows):
    """Common power-of-two scaling of a Fraction/float matrix.

    Returns (int_rows, shift) with int_rows = rows * 2^shift exactly.
    """
    fr = [[_frac(x) for x in row] for row in rows]
    shift = 0
    for row in fr:
        for x in row:
            shift = max(shift, _pow2_denominator_bits(x))
    ints = [
        [x.numerator << (shift - _pow2_denominator_bits(x)) for x in row]
        for row in fr
    ]
    return ints, shift


def _int_bareiss(m: list) -> int:
    """Fraction-free Gaussian elimination; exact integer determinant."""
    n = len(m)
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i = m[i]
            row_k = m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def _int_to_float(v: int, shift_pow2: int) -> float:
    """float(v / 2^shift_pow2) without materializing huge floats."""
    if v == 0:
        return 0.0
    bits = v.bit_length()
    if bits > 64:
        return math.ldexp(float(v >> (bits - 64)), (bits - 64) - shift_pow2)
    return math.ldexp(float(v), -shift_pow2)


def det_exact(rows) -> float:
    """Exact determinant of a real matrix given as Fractions or floats."""
    n = len(rows)
    if n == 0:
        return 1.0
    ints, shift = scaled_int_matrix(rows)
    return _int_to_float(_int_bareiss(ints), n * shift)


def cramer_xb_exact(rows, b):
    """Exact det(A) and adj(A)b . b for a real system.

    adj(A)b . b = sum_i b_i det(A with column i replaced by b); all the
    determinants are evaluated exactly over a joint power-of-two scale.
    Returns (det, xb) as floats.
    """
    n = len(rows)
    joint = [list(r) + [bi] for r, bi in zip(rows, b)]
    ints, shift = scaled_int_matrix(joint)
    mi = [row[:n] for row in ints]
    bi = [row[n] for row in ints]
    det = _int_to_float(_int_bareiss(mi), n * shift)
    acc = 0
    for i in range(n):
        mc = [row[:] for row in mi]
        for r in range(n):
            mc[r][i] = bi[r]
        acc += bi[i] * _int_bareiss(mc)
    xb = _int_to_float(acc, (n + 1) * shift)
    return det, xb


# ---------------------------------------------------------------------------
# Gaussian-integer Bareiss
# ---------------------------------------------------------------------------

def _gauss_div(nr: int, ni: int, dr: int, di: int):
    """Exact division in Z[i]; the Bareiss quotients are guaranteed integral."""
    nrm = dr * dr + di * di
    re, rem = divmod(nr * dr + ni * di, nrm)
    if rem:
        raise ArithmeticError("non-exact Gaussian division in Bareiss step")
    im, rem = divmod(ni * dr - nr * di, nrm)
    if rem:
        raise ArithmeticError("non-exact Gaussian division in Bareiss step")
    return re, im


def det_exact_complex(rows_re, rows_im) -> complex:
    """Exact determinant of a complex matrix given as (re, im) parts."""
    n = len(rows_re)
    if n == 0:
        return complex(1.0)
    joint = [list(rr) + list(ri) for rr, ri in zip(rows_re, rows_im)]
    ints, shift = scaled_int_matrix(joint)
    mr = [row[:n] for row in ints]
    mi = [row[n:] for row in ints]

    sign = 1
    prev_r, prev_i = 1, 0
    for k in range(n - 1):
        if mr[k][k] == 0 and mi[k][k] == 0:
            for r in range(k + 1, n):
                if mr[r][k] != 0 or mi[r][k] != 0:
                    mr[k], mr[r] = mr[r], mr[k]
                    mi[k], mi[r] = mi[r], mi[k]
                    sign = -sign
                    break
            else:
                return complex(0.0)
        pr, pi = mr[k][k], mi[k][k]
        for i in range(k + 1, n):
            air, aii = mr[i][k], mi[i][k]
            row_ir, row_ii = mr[i], mi[i]
            row_kr, row_ki = mr[k], mi[k]
            for j in range(k + 1, n):
                tr = row_ir[j] * pr - row_ii[j] * pi - (air * row_kr[j] - aii * row_ki[j])
                ti = row_ir[j] * pi + row_ii[j] * pr - (air * row_ki[j] + aii * row_kr[j])
                if prev_i == 0:
                    if prev_r == 1:
                        row_ir[j], row_ii[j] = tr, ti
                    else:
                        row_ir[j] = tr // prev_r
                        row_ii[j] = ti // prev_r
                else:
                    row_ir[j], row_ii[j] = _gauss_div(tr, ti, prev_r, prev_i)
        prev_r, prev_i = pr, pi
    dr = _int_to_float(sign * mr[n - 1][n - 1], n * shift)
    di = _int_to_float(sign * mi[n - 1][n - 1], n * shift)
    return complex(dr, di)
