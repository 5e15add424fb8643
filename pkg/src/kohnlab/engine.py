"""Variational phase-shift engine.

All matrix elements <X,(H-E)Y> = int_0^rmax X(r) [(H-E)Y](r) dr are
evaluated once at tau = 0 over the basis order [S, C, chi_0 ... chi_M].
(H-E) applied to each basis function is coded in closed form, so every
integrand decays exponentially: (H-E)S = V S exactly, while C, chi_0 and
the correlation functions leave short-range kinetic remainders.

A boundary-phase value tau turns the stored blocks into the linear
system A(tau) x = -b(tau) through the 2x2 rotation of (S, C); nothing is
re-integrated.  Solving it and evaluating the stationary functional

    J = a_t - kato_norm * <Psi,(H-E)Psi>,   kato_norm = 2 / (N^2 k),

gives the variational phase shift eta_v = arctan(J) + tau - c.  The
normalization constant is fixed by the Wronskian surface term
<S,(H-E)C> - <C,(H-E)S> = N^2 k / 2, which makes the functional exact
for the free particle.

Precision strategy: the power-exponential correlation basis makes
A(tau) spectacularly ill-conditioned (kappa beyond 1e20 at the default
basis size), so production solves and functional evaluations run in
extended precision (see linalg.solve_extended) and determinant-level
statements are delegated to exact big-integer elimination (exactdet).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basis import BasisSpec, eval_C, eval_S, eval_chi, eval_chi0
from .errors import DegenerateLimit, KohnError, QuadratureNotConverged, SingularMatrix
from .exactdet import cramer_xb_exact
from .linalg import cond_one, solve_extended
from .potentials import PotentialSpec, RadialGrid, evaluate_potential, wrap_half_pi

__all__ = [
    "ElementTable",
    "KohnSolution",
    "assemble_elements",
    "rotate_table",
    "fraction_rotated_system",
    "solve_kohn",
    "phase_shift",
    "stationary_values",
    "kohn_cotangent",
    "solve_at_tau",
    "kato_normalization",
]

# relative change allowed between an element computed on n and 2n nodes
QUADRATURE_GATE = 1e-10
# agreement demanded between the quadratic-form and reduced functionals
STATIONARY_RTOL = 1e-9


@dataclass(frozen=True)
class ElementTable:
    """(H-E) matrix elements among {S, C, chi_0 ... chi_M} at tau = 0.

    Scalars follow bra-ket order: sc = <S,(H-E)C>, cs = <C,(H-E)S>.
    Vectors run over j = 0..M in the order [chi_0, chi_1, ...]:
    s_chi[j] = <S,chi_j>, chi_s[j] = <chi_j,S> and likewise for C.
    chi_chi is the symmetric square-integrable block.
    """

    k: float
    e: float
    ss: float
    sc: float
    cs: float
    cc: float
    s_chi: np.ndarray = field(repr=False)
    chi_s: np.ndarray = field(repr=False)
    c_chi: np.ndarray = field(repr=False)
    chi_c: np.ndarray = field(repr=False)
    chi_chi: np.ndarray = field(repr=False)
    basis: BasisSpec = field(default_factory=BasisSpec)
    gate_rel_change: float = 0.0

    def __post_init__(self):
        for arr in (self.s_chi, self.chi_s, self.c_chi, self.chi_c, self.chi_chi):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.basis.m + 2

    @property
    def wronskian(self) -> float:
        """sc - cs; equals N^2 k / 2 up to quadrature error."""
        return self.sc - self.cs


@dataclass(frozen=True)
class KohnSolution:
    """Solved coefficients and diagnostics at one (k, tau)."""

    tau: float
    a_t: float
    p: np.ndarray
    eta_v: float
    det_a: float
    kappa: float
    lam: float


def kato_normalization(basis: BasisSpec, k: float) -> float:
    """Prefactor 2/(N^2 k) making the functional free-particle exact."""
    return 2.0 / (basis.norm**2 * k)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _basis_arrays(basis: BasisSpec, k: float, r: np.ndarray):
    """Values F[j,:] and kinetic remainders G[j,:] on the nodes.

    G[j] = (-1/2 d^2/dr^2 - k^2/2) applied to function j in closed form,
    so (H-E) X_j = G[j] + V(r) F[j].
    """
    n_f = basis.m + 3
    f = np.empty((n_f, r.size))
    g = np.empty((n_f, r.size))
    norm, gam = basis.norm, basis.gamma
    cos_kr, sin_kr = np.cos(k * r), np.sin(k * r)
    e_g = np.exp(-gam * r)

    f[0] = eval_S(basis, k, r)
    g[0] = 0.0

    f[1] = eval_C(basis, k, r)
    g[1] = 0.5 * norm * gam * e_g * (gam * cos_kr + 2.0 * k * sin_kr)

    f[2] = eval_chi0(basis, k, r)
    g[2] = norm * gam * (
        -0.5 * e_g * (gam * cos_kr + 2.0 * k * sin_kr)
        + 2.0 * e_g**2 * (gam * cos_kr + k * sin_kr)
    )

    for i in range(1, basis.m + 1):
        if i <= basis.m1:
            power, expo = i, basis.alpha
        else:
            power, expo = i - basis.m1, basis.beta
        f[2 + i] = eval_chi(basis, i, r)
        poly = expo**2 * r**power - 2.0 * expo * power * r ** (power - 1)
        if power >= 2:
            poly = poly + power * (power - 1) * r ** (power - 2)
        g[2 + i] = -0.5 * np.exp(-expo * r) * poly - 0.5 * k**2 * f[2 + i]
    return f, g


def _contract(f: np.ndarray, g: np.ndarray, v: np.ndarray, w: np.ndarray):
    """raw[i,j] = sum_n w_n F[i,n] (G[j,n] + V_n F[j,n]), plus the same
    contraction of absolute values (quadrature scale reference)."""
    rhs = g + v * f
    raw = f @ (w * rhs).T
    scale = np.abs(f) @ (w * np.abs(rhs)).T
    return raw, scale


def _raw_table(potential, basis, k, grid):
    v = evaluate_potential(potential, grid.nodes)
    f, g = _basis_arrays(basis, k, grid.nodes)
    return _contract(f, g, v, grid.weights)


def assemble_elements(
    potential: PotentialSpec,
    basis: BasisSpec,
    k: float,
    grid: RadialGrid,
) -> ElementTable:
    """Integrate every (H-E) element once at tau = 0.

    The assembly runs on the given grid and on its node-doubled version;
    if any entry moves by more than QUADRATURE_GATE (relative, with an
    absolute-integrand floor for entries dominated by cancellation) the
    quadrature is declared unconverged.  The finer result is returned.
    """
    if not k > 0.0:
        raise ValueError("k must be > 0")
    tail = math.exp(-basis.gamma * grid.r_max)
    if tail >= 1e-12:
        raise ValueError(
            f"r_max = {grid.r_max} too small: exp(-gamma r_max) = {tail:.2e}"
        )
    v_tail = abs(evaluate_potential(potential, grid.r_max))
    if v_tail >= 1e-12:
        raise ValueError(f"r_max too small: |V(r_max)| = {v_tail:.2e}")

    coarse, _ = _raw_table(potential, basis, k, grid)
    fine, scale = _raw_table(potential, basis, k, grid.doubled())
    denom = np.maximum(np.abs(fine), 1e-3 * scale) + 1e-300
    rel = float(np.max(np.abs(fine - coarse) / denom))
    if rel > QUADRATURE_GATE:
        raise QuadratureNotConverged(
            f"element change {rel:.3e} on node doubling exceeds {QUADRATURE_GATE}"
        )

    return ElementTable(
        k=k,
        e=0.5 * k * k,
        ss=float(fine[0, 0]),
        sc=float(fine[0, 1]),
        cs=float(fine[1, 0]),
        cc=float(fine[1, 1]),
        s_chi=fine[0, 2:].copy(),
        chi_s=fine[2:, 0].copy(),
        c_chi=fine[1, 2:].copy(),
        chi_c=fine[2:, 1].copy(),
        chi_chi=fine[2:, 2:].copy(),
        basis=basis,
        gate_rel_change=rel,
    )


# ---------------------------------------------------------------------------
# rotation
# ---------------------------------------------------------------------------

def _rotate(table: ElementTable, tau: float, dtype):
    """A(tau), b(tau), <Sbar,Sbar> in the requested float dtype."""
    one = dtype(1.0)
    ct, st = dtype(math.cos(tau)), dtype(math.sin(tau))
    ss, sc = dtype(table.ss), dtype(table.sc)
    cs, cc = dtype(table.cs), dtype(table.cc)
    dim = table.dim
    a = np.empty((dim, dim), dtype=dtype)
    a[0, 0] = st * st * ss - st * ct * (sc + cs) + ct * ct * cc
    a[0, 1:] = -st * table.s_chi + ct * table.c_chi
    a[1:, 0] = -st * table.chi_s + ct * table.chi_c
    a[1:, 1:] = table.chi_chi

    b = np.empty(dim, dtype=dtype)
    b[0] = -st * ct * ss - st * st * sc + ct * ct * cs + st * ct * cc
    b[1:] = ct * table.chi_s + st * table.chi_c

    sbar_sbar = ct * ct * ss + st * ct * (sc + cs) + st * st * cc
    return a, b, sbar_sbar * one


def rotate_table(table: ElementTable, tau: float):
    """Linear system blocks at boundary phase tau.

    Returns (A, b, sbar_sbar) with rows/columns ordered
    [Cbar, chi_0 ... chi_M]; everything follows from the tau = 0 blocks
    through the orthogonal mixing of (S, C).
    """
    a, b, sbar_sbar = _rotate(table, tau, np.float64)
    return a, b, float(sbar_sbar)


def fraction_rotated_system(table: ElementTable, tau: float):
    """Exact-rational A(tau), b(tau), <Sbar,Sbar>.

    The rotation is carried out in Fraction arithmetic on the dyadic
    table entries (with the float values of cos tau and sin tau), so the
    result satisfies the bilinear rotation identities exactly; exact
    determinant statements are meaningless without this.
    """
    ct, st = Fraction(math.cos(tau)), Fraction(math.sin(tau))
    ss, sc = Fraction(table.ss), Fraction(table.sc)
    cs, cc = Fraction(table.cs), Fraction(table.cc)
    dim = table.dim
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    b = [Fraction(0)] * dim
    rows[0][0] = st * st * ss - st * ct * (sc + cs) + ct * ct * cc
    b[0] = -st * ct * ss - st * st * sc + ct * ct * cs + st * ct * cc
    for j in range(dim - 1):
        rows[0][j + 1] = -st * Fraction(table.s_chi[j]) + ct * Fraction(table.c_chi[j])
        rows[j + 1][0] = -st * Fraction(table.chi_s[j]) + ct * Fraction(table.chi_c[j])
        b[j + 1] = ct * Fraction(table.chi_s[j]) + st * Fraction(table.chi_c[j])
        row_chi = table.chi_chi[j]
        for i in range(dim - 1):
            rows[j + 1][i + 1] = Fraction(row_chi[i])
    sbar_sbar = ct * ct * ss + st * ct * (sc + cs) + st * st * cc
    return rows, b, sbar_sbar


def _sbar_cbar(table: ElementTable, tau: float, dtype=np.float64):
    """<Sbar,(H-E)Cbar>; the only entry whose bra order matters."""
    ct, st = dtype(math.cos(tau)), dtype(math.sin(tau))
    ss, sc = dtype(table.ss), dtype(table.sc)
    cs, cc = dtype(table.cs), dtype(table.cc)
    return -st * ct * ss + ct * ct * sc - st * st * cs + st * ct * cc


# ---------------------------------------------------------------------------
# solving and phase extraction
# ---------------------------------------------------------------------------

def solve_kohn(a: np.ndarray, b: np.ndarray):
    """Solve A x = -b; returns (x, det A) as ordinary floats.

    The factorization is a partial-pivoted LU carried in extended
    precision; SingularMatrix is raised only when a pivot sits below the
    1e-30 * ||A|| floor, leaving "near singular" to the conditioning
    diagnostics.
    """
    x, det = solve_extended(np.asarray(a), -np.asarray(b))
    if np.iscomplexobj(x):
        return x.astype(complex), complex(det)
    return x.astype(float), float(det)


def _stationary_pair(x_ld, table: ElementTable, tau: float):
    """Both stationary-functional routes plus their exact finite-x gap.

    The full quadratic form keeps bra order for the Sbar/Cbar pair; the
    chi cross terms are order-insensitive and enter symmetrized.  For
    the computed (not exactly stationary) x the routes differ by
    a_t (1 - kato W) - kato x.res with res = A x + b and W the rotated
    antisymmetric part; that gap and the rounding scale of the
    cancellation-heavy form are returned so the cross-check can separate
    algebra errors from arithmetic noise.
    """
    ld = np.longdouble
    a, b, sbar_sbar = _rotate(table, tau, ld)
    sbar_cbar = _sbar_cbar(table, tau, ld)
    kato = ld(2.0) / (ld(table.basis.norm) ** 2 * ld(table.k))
    ax = a @ x_ld
    quad = (
        sbar_sbar
        + x_ld[0] * (sbar_cbar + b[0])
        + 2.0 * (x_ld[1:] @ b[1:])
        + x_ld @ ax
    )
    j_full = x_ld[0] - kato * quad
    j_reduced = -kato * (sbar_sbar + b @ x_ld)
    res = ax + b
    gap = x_ld[0] * (1.0 - kato * (sbar_cbar - b[0])) - kato * (x_ld @ res)
    cancel = float(kato) * float(np.abs(x_ld) @ (np.abs(a) @ np.abs(x_ld)))
    return j_full, j_reduced, gap, x_ld[0], cancel


def stationary_values(x: np.ndarray, table: ElementTable, tau: float, c: float):
    """Stationary functional from both evaluation routes, as floats.

    Full route: J = a_t - kato_norm <Psi,(H-E)Psi> with the complete
    quadratic form (bra order kept for the Sbar/Cbar pair).  Reduced
    route, valid at stationarity: J = -kato_norm (<Sbar,Sbar> + b.x).
    """
    j_full, j_reduced, _, _, _ = _stationary_pair(
        np.asarray(x, dtype=np.longdouble), table, tau
    )
    return float(j_full), float(j_reduced)


def _phase_from_x(x_ld, table: ElementTable, tau: float, c: float) -> float:
    j_full, j_reduced, gap, a_t, cancel = _stationary_pair(x_ld, table, tau)
    eps = float(np.finfo(np.longdouble).eps)
    rounding = 16.0 * eps * cancel
    scale = max(1.0, abs(float(j_full)), abs(float(j_reduced)), abs(float(a_t)))
    # identity check: the routes must coincide once the computed
    # residual gap is accounted for (catches algebra errors at any
    # conditioning) ...
    if abs(float(j_full - j_reduced - gap)) > max(STATIONARY_RTOL * scale, rounding):
        raise KohnError(
            "stationary-value routes disagree beyond the residual gap: "
            f"{float(j_full)!r} vs {float(j_reduced)!r} at tau={tau}"
        )
    # ... and the raw disagreement must sit at the 1e-9 contract unless
    # the solve's own non-stationarity (gap) or arithmetic floor is larger
    if abs(float(j_full - j_reduced)) > max(
        STATIONARY_RTOL * scale, 4.0 * abs(float(gap)) + rounding
    ):
        raise KohnError(
            "stationary-value routes disagree: "
            f"{float(j_full)!r} vs {float(j_reduced)!r} at tau={tau}"
        )
    return wrap_half_pi(math.atan(float(j_full)) + tau - c)


def phase_shift(x: np.ndarray, table: ElementTable, tau: float, c: float) -> float:
    """Variational phase shift eta_v in (-pi/2, pi/2] for one solution.

    Both functional routes are evaluated (in extended precision) and
    must agree to STATIONARY_RTOL above the arithmetic floor of the
    cancellation-heavy quadratic form; disagreement indicates a
    corrupted solve and is raised rather than returned.
    """
    x_ld = np.asarray(x, dtype=np.longdouble)
    return _phase_from_x(x_ld, table, tau, c)


def _solve_eta(table: ElementTable, tau: float, c: float) -> float:
    """Extended-precision rotate + solve + phase in one step."""
    a, b, _ = _rotate(table, tau, np.longdouble)
    x_ld, _ = solve_extended(a, -b)
    return _phase_from_x(x_ld, table, tau, c)


def kohn_cotangent(
    table: ElementTable,
    tau: float,
    c: float,
    method: str = "auto",
) -> float:
    """cot(eta_v - tau + c) = det(A) / [kato_norm (adj(A)b.b - det(A) <Sbar,Sbar>)].

    The expression survives singular A, where the solve-based phase
    breaks down; with adj(A) = det(A) A^{-1} eliminated through the
    factorization it reduces to -1/(kato_norm (<Sbar,Sbar> + b.x)) for
    nonsingular A.  method="exact" evaluates determinant and adjugate
    form by exact big-integer elimination (the defensible route at and
    around the singular points); "auto" uses the fast factorization
    route and falls back to "exact" when the factorization hits the
    singularity floor.
    """
    if method not in ("auto", "exact"):
        raise ValueError("method must be 'auto' or 'exact'")
    kato = kato_normalization(table.basis, table.k)
    if method == "auto":
        try:
            a, b, sbar_sbar = _rotate(table, tau, np.longdouble)
            x_ld, _ = solve_extended(a, -b)
            denom = kato * float(sbar_sbar + b @ x_ld)
            if denom == 0.0:
                return math.inf
            return -1.0 / denom
        except SingularMatrix:
            pass
    rows, b_fr, sbar_sbar = fraction_rotated_system(table, tau)
    det, xb = cramer_xb_exact(rows, b_fr)
    if det == 0.0 and xb == 0.0:
        raise DegenerateLimit(
            "det(A) and adj(A)b.b vanish together; cotangent limit undefined"
        )
    denom = xb - det * float(sbar_sbar)
    if denom == 0.0:
        return math.copysign(math.inf, det / kato)
    return det / (kato * denom)


def solve_at_tau(
    table: ElementTable,
    tau: float,
    c: float | None = None,
    with_conditioning: bool = True,
) -> KohnSolution:
    """Rotate, solve, and diagnose the system at one boundary phase."""
    if c is None:
        c = table.basis.c
    a_ld, b_ld, _ = _rotate(table, tau, np.longdouble)
    x_ld, det_ld = solve_extended(a_ld, -b_ld)
    eta = _phase_from_x(x_ld, table, tau, c)
    if with_conditioning:
        a, _, _ = rotate_table(table, tau)
        kappa, lam = cond_one(a)
    else:
        kappa, lam = math.nan, math.nan
    return KohnSolution(
        tau=tau,
        a_t=float(x_ld[0]),
        p=x_ld[1:].astype(float),
        eta_v=eta,
        det_a=float(det_ld),
        kappa=kappa,
        lam=lam,
    )
