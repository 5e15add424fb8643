"""Singular boundary phases: detection, classification, optimization.

det A(tau) is a quadratic form in (sin tau, cos tau),

    det A(tau) = A sin^2 tau + B sin tau cos tau + C cos^2 tau,

so three determinant evaluations pin the coefficients and the singular
phases follow from a quadratic in tan(tau).  Determinants are computed
exactly (big-integer elimination over exactly rotated entries); at the
condition numbers of the correlation basis a floating determinant has
no correct digits, and root locations would be meaningless without
this.

A real root tau_s is anomaly-free when the solved phase converges, from
both sides, to the value eta_hat = tau_s - c + pi/2 (mod pi) forced by
the boundary condition; it is a Schwartz singularity when the phase
nearby stays far from eta_hat (the anomalous case).  Two tau-selection
schemes are provided: the anomaly-free root itself (no linear solve
needed for the phase) and the median phase over a tau grid.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .engine import ElementTable, _solve_eta, fraction_rotated_system
from .errors import (
    DegenerateSystem,
    InsufficientData,
    KohnError,
    NoAnomalyFreeRoot,
    SingularMatrix,
)
from .exactdet import det_exact
from .linalg import cond_one
from .potentials import wrap_half_pi

__all__ = [
    "QuadraticCoeffs",
    "TauRoots",
    "RootClass",
    "SingularityReport",
    "MeasureResult",
    "det_at_tau",
    "extract_coeffs",
    "form_value",
    "form_max",
    "singular_taus",
    "eta_hat_of_root",
    "classify_root",
    "analyze_table",
    "anomaly_measure",
    "conditioning",
    "optimize_tau",
]

logger = logging.getLogger(__name__)

# relative floor deciding when a quadratic coefficient counts as zero
COEFF_RTOL = 1e-10
# classification probe offsets and thresholds
CLASSIFY_DELTAS = (1e-2, 1e-3, 1e-4)
ACCEPT_TOL = 1e-3
REJECT_TOL = 1e-1
# near-real complex roots hint at a real root lost to coefficient noise
NEAR_REAL_IMAG = 0.1


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Coefficients of det A(tau), fixed up to the common element scale."""

    a: float
    b: float
    c: float

    @property
    def probe_max(self) -> float:
        """max(|det|) over the three extraction phases 0, pi/4, pi/2."""
        return max(abs(self.c), abs(self.a), 0.5 * abs(self.a + self.b + self.c))

    @property
    def threshold(self) -> float:
        return COEFF_RTOL * self.probe_max

    @property
    def d_const(self) -> complex:
        """Determinant constant of the outgoing-wave variant, (A-C) - iB."""
        return complex(self.a - self.c, -self.b)


@dataclass(frozen=True)
class TauRoots:
    """Zeros of det A(tau) in [0, pi)."""

    real: tuple[float, ...]
    complex_pair: tuple[complex, complex] | None
    degenerate: bool
    near_real_complex: bool = False


class RootClass(enum.Enum):
    ANOMALY_FREE = "anomaly_free"
    SCHWARTZ = "schwartz"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class SingularityReport:
    """Roots and classifications of det A(tau) at one momentum."""

    k: float
    c: float
    coeffs: QuadraticCoeffs
    roots: TauRoots
    classifications: tuple[RootClass, ...]
    af_root: float | None
    eta_hat: float | None
    degenerate: bool


@dataclass(frozen=True)
class MeasureResult:
    """Phase-shift sweep over an equidistant tau grid."""

    taus: np.ndarray
    etas: np.ndarray
    deltas: np.ndarray
    median: float
    n_failed: int


def det_at_tau(table: ElementTable, tau: float) -> float:
    """Exact det A(tau) (big-integer elimination of the rotated system)."""
    rows, _, _ = fraction_rotated_system(table, tau)
    return det_exact(rows)


def extract_coeffs(table: ElementTable) -> QuadraticCoeffs:
    """Pin the quadratic form from determinants at tau = 0, pi/4, pi/2."""
    c = det_at_tau(table, 0.0)
    a = det_at_tau(table, 0.5 * math.pi)
    b = 2.0 * det_at_tau(table, 0.25 * math.pi) - a - c
    return QuadraticCoeffs(a=a, b=b, c=c)


def form_value(coeffs: QuadraticCoeffs, tau: float) -> float:
    st, ct = math.sin(tau), math.cos(tau)
    return coeffs.a * st * st + coeffs.b * st * ct + coeffs.c * ct * ct


def form_max(coeffs: QuadraticCoeffs) -> float:
    """max over tau of |det A(tau)| in closed form."""
    mean = 0.5 * (coeffs.a + coeffs.c)
    radius = math.hypot(0.5 * (coeffs.c - coeffs.a), 0.5 * coeffs.b)
    return abs(mean) + radius


def _wrap_root(tau: float) -> float:
    tau = tau % math.pi
    return tau if tau < math.pi else 0.0


def singular_taus(coeffs: QuadraticCoeffs) -> TauRoots:
    """Roots of A t^2 + B t + C = 0 with t = tan(tau_s), mapped to [0, pi).

    A below the coefficient floor puts one root at tau = pi/2 (the
    sin^2 coefficient vanishes) plus the root of the remaining linear
    equation; all three below the floor is the degenerate case where
    the determinant vanishes identically and no phase is defined.
    """
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    thr = coeffs.threshold
    if abs(a) <= thr:
        if abs(b) <= thr and abs(c) <= thr:
            return TauRoots(real=(), complex_pair=None, degenerate=True)
        roots = [0.5 * math.pi]
        if abs(b) > thr:
            roots.append(_wrap_root(math.atan(-c / b)))
        return TauRoots(real=tuple(sorted(set(roots))), complex_pair=None,
                        degenerate=False)

    disc = b * b - 4.0 * a * c
    if disc >= 0.0:
        # stable quadratic formula: no cancellation in the larger root
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b if b != 0.0 else 1.0))
        if q == 0.0:
            ts = [0.0]
        else:
            ts = [q / a, c / q]
        roots = sorted({_wrap_root(math.atan(t)) for t in ts})
        return TauRoots(real=tuple(roots), complex_pair=None, degenerate=False)

    ts = (-b + 1j * math.sqrt(-disc)) / (2.0 * a)
    try:
        tau_c = cmath.atan(ts)
    except ValueError:  # branch point tan(tau) = +-i
        tau_c = complex(0.5 * math.pi, math.inf)
    re = _wrap_root(tau_c.real)
    im = abs(tau_c.imag)
    pair = (complex(re, im), complex(re, -im))
    near = im < NEAR_REAL_IMAG
    if near:
        logger.warning(
            "complex singular taus %.4f +- %.4fi: small imaginary part "
            "suggests a real root lost to coefficient noise", re, im
        )
    return TauRoots(real=(), complex_pair=pair, degenerate=False,
                    near_real_complex=near)


def eta_hat_of_root(tau_s: float, c: float) -> float:
    """Boundary-condition phase at a singular tau: tau_s - c + pi/2 mod pi."""
    return wrap_half_pi(tau_s - c + 0.5 * math.pi)


def _mod_pi_distance(x: float, y: float) -> float:
    return abs(wrap_half_pi(x - y))


def classify_root(
    table: ElementTable,
    tau_s: float,
    c: float,
    others: tuple[float, ...] = (),
) -> RootClass:
    """Anomaly-free / Schwartz / undetermined from phase probes.

    Solves at tau_s +- delta for delta in CLASSIFY_DELTAS and compares
    against eta_hat.  Anomaly-free demands the deviation shrink from
    both sides (within slack, or below a floor well under the accept
    tolerance) and end below ACCEPT_TOL; a deviation beyond REJECT_TOL
    at the smallest offset on either side is the anomalous signature.
    Probes landing on another root are stepped once further out.
    """
    target = eta_hat_of_root(tau_s, c)
    devs = {+1: [], -1: []}
    for delta in CLASSIFY_DELTAS:
        for side in (+1, -1):
            probe = tau_s + side * delta
            if any(abs(probe - o) < 0.5 * delta for o in others):
                probe += side * delta
            try:
                eta = _solve_eta(table, probe, c)
            except (SingularMatrix, KohnError):
                probe += side * delta
                eta = _solve_eta(table, probe, c)
            devs[side].append(_mod_pi_distance(eta, target))

    final = max(devs[+1][-1], devs[-1][-1])
    if final > REJECT_TOL:
        return RootClass.SCHWARTZ
    shrinking = all(
        d2 <= max(1.5 * d1, 0.1 * ACCEPT_TOL)
        for seq in devs.values()
        for d1, d2 in zip(seq, seq[1:])
    )
    if shrinking and final <= ACCEPT_TOL:
        return RootClass.ANOMALY_FREE
    return RootClass.UNDETERMINED


def analyze_table(
    table: ElementTable,
    c: float | None = None,
    classify: bool = True,
) -> SingularityReport:
    """Full singularity workup at one momentum."""
    if c is None:
        c = table.basis.c
    coeffs = extract_coeffs(table)
    roots = singular_taus(coeffs)
    classes: list[RootClass] = []
    af_root = None
    if classify and not roots.degenerate:
        for i, tau_s in enumerate(roots.real):
            others = tuple(r for j, r in enumerate(roots.real) if j != i)
            classes.append(classify_root(table, tau_s, c, others=others))
        af = [r for r, cl in zip(roots.real, classes)
              if cl is RootClass.ANOMALY_FREE]
        if af:
            af_root = af[0]
    elif roots.degenerate:
        classes = [RootClass.UNDETERMINED for _ in roots.real]
    return SingularityReport(
        k=table.k,
        c=c,
        coeffs=coeffs,
        roots=roots,
        classifications=tuple(classes),
        af_root=af_root,
        eta_hat=None if af_root is None else eta_hat_of_root(af_root, c),
        degenerate=roots.degenerate,
    )


def anomaly_measure(
    table: ElementTable,
    p: int = 1001,
    c: float | None = None,
) -> MeasureResult:
    """Phase shifts over p equidistant tau in [0, pi) and their spread
    around the median (the anomaly indicator)."""
    if p < 3:
        raise ValueError("need p >= 3 grid points")
    if c is None:
        c = table.basis.c
    taus = np.linspace(0.0, math.pi, p, endpoint=False)
    etas = np.full(p, np.nan)
    for i, tau in enumerate(taus):
        try:
            etas[i] = _solve_eta(table, float(tau), c)
        except (SingularMatrix, KohnError):
            continue
    good = np.isfinite(etas)
    n_failed = int(p - good.sum())
    if good.sum() < p / 2:
        raise InsufficientData(f"only {int(good.sum())}/{p} grid points solvable")
    median = float(np.median(etas[good]))
    deltas = np.abs(etas - median)
    return MeasureResult(taus=taus, etas=etas, deltas=deltas,
                         median=median, n_failed=n_failed)


def conditioning(a: np.ndarray) -> tuple[float, float]:
    """1-norm condition number and reciprocal distance to singularity.

    kappa = ||A||_1 ||A^-1||_1 with the inverse norm from n unit-vector
    solves; Lambda = 1/kappa exactly as computed.  Singular input maps
    to (inf, 0).
    """
    return cond_one(np.asarray(a, dtype=float))


def optimize_tau(
    scheme: str,
    report: SingularityReport | None = None,
    measure: MeasureResult | None = None,
) -> tuple[float, float]:
    """Select the boundary phase and its phase shift under one scheme.

    "anomaly_free": tau* is the anomaly-free root and the phase comes
    straight from the boundary condition (no linear solve).  "median":
    tau* is the grid point whose phase equals the median (lower index
    on ties).  A degenerate report makes both schemes refuse: when the
    determinant vanishes identically no consistent phase exists.
    """
    if report is not None and report.degenerate:
        raise DegenerateSystem(
            "determinant coefficients vanish identically; no phase defined"
        )
    if scheme == "anomaly_free":
        if report is None:
            raise ValueError("anomaly_free scheme needs a SingularityReport")
        af_roots = [
            r for r, cl in zip(report.roots.real, report.classifications)
            if cl is RootClass.ANOMALY_FREE
        ]
        if not af_roots:
            raise NoAnomalyFreeRoot(f"no anomaly-free root at k={report.k}")
        if len(af_roots) > 1 and measure is not None:
            af_roots.sort(key=lambda r: abs(
                abs(eta_hat_of_root(r, report.c)) - abs(measure.median)
            ))
        tau_star = af_roots[0]
        return tau_star, eta_hat_of_root(tau_star, report.c)
    if scheme == "median":
        if measure is None:
            raise ValueError("median scheme needs a MeasureResult")
        good = np.isfinite(measure.etas)
        idx = int(np.argmin(np.where(
            good, np.abs(measure.etas - measure.median), np.inf
        )))
        return float(measure.taus[idx]), float(measure.etas[idx])
    raise ValueError(f"unknown scheme {scheme!r}")
