"""Outgoing-wave (complex boundary) variant of the variational solver.

Replacing the rotated cosine function by Tbar = Sbar + i Cbar turns the
real linear system into a complex one built from the same tau = 0
element table; no new integrals appear.  Because Tbar(tau) =
exp(-i tau) Tbar(0), the determinant traces a circle in the complex
plane,

    det A'(tau) = D exp(-2 i tau),      D = (A - C) - i B,

with (A, B, C) the real determinant-form coefficients, so singularities
exist only where D itself vanishes; they can neither be found nor
avoided by moving tau.  |D| over the momentum sweep is therefore the
persistent-anomaly predictor.

The stationary value of the functional with the same Kato surface-term
normalization (which becomes -2i/(N^2 k) for the outgoing pair) is
J' = (exp(-2i theta) - 1)/2 with theta = eta - tau + c, from which the
phase is extracted through the S-matrix value: branch-stable and with
||S|-1| reported as the unitarity deficit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import ElementTable, _rotate, _sbar_cbar
from .exactdet import det_exact_complex
from .linalg import solve_extended
from .potentials import wrap_half_pi

__all__ = [
    "ComplexKohnSolution",
    "DScan",
    "assemble_complex",
    "complex_phase_shift",
    "solve_complex_at_tau",
    "det_complex_exact",
    "scan_D",
]

# |D| below this multiple of the sweep median marks a momentum where
# no choice of tau (or complex boundary) avoids the singularity
D_FLAG_RTOL = 1e-8


@dataclass(frozen=True)
class ComplexKohnSolution:
    """Complex-boundary solution and diagnostics at one (k, tau)."""

    tau: float
    a_t: complex
    p: np.ndarray
    eta_v: float
    deficit: float
    det_a: complex
    d_const: complex


@dataclass(frozen=True)
class DScan:
    """|D|(k) trace with persistent-anomaly flags."""

    ks: np.ndarray
    d: np.ndarray
    flags: np.ndarray
    threshold: float


def _assemble(table: ElementTable, tau: float, dtype):
    """A', b' from the real rotated blocks: Tbar rows/columns are the
    Sbar blocks plus i times the Cbar blocks."""
    a, b, sbar_sbar = _rotate(table, tau, dtype)
    sbar_cbar = _sbar_cbar(table, tau, dtype)
    ct, st = dtype(math.cos(tau)), dtype(math.sin(tau))
    sbar_chi = ct * table.s_chi + st * table.c_chi
    chi_sbar = ct * table.chi_s + st * table.chi_c

    cdtype = np.clongdouble if dtype is np.longdouble else complex
    dim = table.dim
    ap = np.empty((dim, dim), dtype=cdtype)
    bp = np.empty(dim, dtype=cdtype)
    ap[0, 0] = sbar_sbar + 1j * sbar_cbar + 1j * b[0] - a[0, 0]
    ap[0, 1:] = sbar_chi + 1j * a[0, 1:]
    ap[1:, 0] = chi_sbar + 1j * a[1:, 0]
    ap[1:, 1:] = table.chi_chi
    bp[0] = sbar_sbar + 1j * b[0]
    bp[1:] = chi_sbar
    return ap, bp, sbar_sbar


def assemble_complex(table: ElementTable, tau: float):
    """(A', b') of the outgoing-wave system as ordinary complex arrays."""
    ap, bp, _ = _assemble(table, tau, np.float64)
    return ap.astype(complex), bp.astype(complex)


def _phase_from_jprime(j_prime: complex, tau: float, c: float):
    t = 1j * j_prime / (1.0 + j_prime)
    s = (1.0 + 1j * t) / (1.0 - 1j * t)
    eta = wrap_half_pi(0.5 * math.atan2(s.imag, s.real) + tau - c)
    return eta, abs(abs(s) - 1.0)


def _j_prime_full(x, ap, bp, table, tau):
    """a'_t - kato' <Psi',Psi'> with the full quadratic form.

    The full form is stationary, hence second-order robust against the
    solve error the ill-conditioned chi block leaves in x'; the reduced
    form -kato'(<Sbar,Sbar> + b'.x') couples to that error at first
    order and is noisier by the condition number.  All cross terms keep
    their true bra order (<Sbar,chi> and <chi,Sbar> each appear once):
    that preserves, entry for entry, the algebraic identity making the
    stationary value independent of tau, which symmetrizing would break
    at the level of the quadrature asymmetry times the coefficients.
    """
    ld = np.longdouble
    ct, st = ld(math.cos(tau)), ld(math.sin(tau))
    _, _, sbar_sbar = _rotate(table, tau, ld)
    sbar_tbar = sbar_sbar + 1j * _sbar_cbar(table, tau, ld)
    sbar_chi = ct * table.s_chi + st * table.c_chi
    chi_sbar = ct * table.chi_s + st * table.chi_c
    kato_p = -2j / (ld(table.basis.norm) ** 2 * ld(table.k))
    quad = (
        sbar_sbar
        + x[0] * (sbar_tbar + bp[0])
        + x[1:] @ (sbar_chi + chi_sbar)
        + x @ (ap @ x)
    )
    return complex(x[0] - kato_p * quad)


def complex_phase_shift(
    a_prime: np.ndarray,
    b_prime: np.ndarray,
    table: ElementTable,
    tau: float,
    c: float,
):
    """Solve the complex system and extract (eta_v, unitarity deficit).

    The stationary value J' = a'_t - kato' <Psi',Psi'> with kato' =
    -2i/(N^2 k) approximates (exp(-2i theta) - 1)/2; the complex tangent
    t = i J'/(1 + J') then gives the S-matrix value s = (1+it)/(1-it)
    whose argument carries the phase and whose modulus measures how
    non-unitary the stationary value is.
    """
    ap = np.asarray(a_prime, dtype=np.clongdouble)
    bp = np.asarray(b_prime, dtype=np.clongdouble)
    x, _ = solve_extended(ap, -bp)
    j_prime = _j_prime_full(x, ap, bp, table, tau)
    return _phase_from_jprime(j_prime, tau, c)


def solve_complex_at_tau(
    table: ElementTable,
    tau: float,
    c: float | None = None,
) -> ComplexKohnSolution:
    """Extended-precision assemble + solve + phase at one boundary phase."""
    if c is None:
        c = table.basis.c
    ap, bp, _ = _assemble(table, tau, np.longdouble)
    x, det = solve_extended(ap, -bp)
    eta, deficit = _phase_from_jprime(_j_prime_full(x, ap, bp, table, tau), tau, c)
    det_c = complex(det)
    return ComplexKohnSolution(
        tau=tau,
        a_t=complex(x[0]),
        p=x[1:].astype(complex),
        eta_v=eta,
        deficit=deficit,
        det_a=det_c,
        d_const=det_c * complex(math.cos(2 * tau), math.sin(2 * tau)),
    )


def det_complex_exact(table: ElementTable, tau: float) -> complex:
    """Exact det A'(tau) over Gaussian integers.

    Real parts carry the Sbar blocks, imaginary parts the Cbar blocks;
    the rotation is done in exact rational arithmetic so the circle
    identity holds to the accuracy of cos^2 + sin^2 = 1 in floats.
    """
    ct, st = Fraction(math.cos(tau)), Fraction(math.sin(tau))
    ss, sc = Fraction(table.ss), Fraction(table.sc)
    cs, cc = Fraction(table.cs), Fraction(table.cc)
    sbar_sbar = ct * ct * ss + st * ct * (sc + cs) + st * st * cc
    sbar_cbar = -st * ct * ss + ct * ct * sc - st * st * cs + st * ct * cc
    cbar_sbar = -st * ct * ss - st * st * sc + ct * ct * cs + st * ct * cc
    cbar_cbar = st * st * ss - st * ct * (sc + cs) + ct * ct * cc

    dim = table.dim
    zero = Fraction(0)
    rows_re = [[zero] * dim for _ in range(dim)]
    rows_im = [[zero] * dim for _ in range(dim)]
    rows_re[0][0] = sbar_sbar - cbar_cbar
    rows_im[0][0] = sbar_cbar + cbar_sbar
    for j in range(dim - 1):
        s_chi = ct * Fraction(table.s_chi[j]) + st * Fraction(table.c_chi[j])
        c_chi = -st * Fraction(table.s_chi[j]) + ct * Fraction(table.c_chi[j])
        chi_s = ct * Fraction(table.chi_s[j]) + st * Fraction(table.chi_c[j])
        chi_c = -st * Fraction(table.chi_s[j]) + ct * Fraction(table.chi_c[j])
        rows_re[0][j + 1] = s_chi
        rows_im[0][j + 1] = c_chi
        rows_re[j + 1][0] = chi_s
        rows_im[j + 1][0] = chi_c
        row_chi = table.chi_chi[j]
        for i in range(dim - 1):
            rows_re[j + 1][i + 1] = Fraction(row_chi[i])
    return det_exact_complex(rows_re, rows_im)


def scan_D(ks, coeffs_seq) -> DScan:
    """|D|(k) over a sweep with near-zero flags.

    D = (A - C) - iB per momentum; a value below D_FLAG_RTOL times the
    sweep median predicts a persistent anomaly that no tau (real or
    complex boundary) can avoid.
    """
    ks = np.asarray(list(ks), dtype=float)
    d = np.array([co.d_const for co in coeffs_seq], dtype=complex)
    if ks.shape != d.shape:
        raise ValueError("ks and coefficient sequence differ in length")
    med = float(np.median(np.abs(d))) if d.size else 0.0
    threshold = D_FLAG_RTOL * med
    flags = np.abs(d) < threshold
    return DScan(ks=ks, d=d, flags=flags, threshold=threshold)
