"""Model radial scattering problem and the independent phase-shift oracle.

The interaction V(r) is a short-range s-wave potential in model units
(hbar = m = 1, energies in hartree-like units, lengths dimensionless).
The radial equation solved throughout the package is

    -1/2 u''(r) + V(r) u(r) = (k^2/2) u(r),   u(0) = 0,

whose regular solution behaves asymptotically as A sin(kr + eta).  The
oracle integrates this equation directly with a fixed-step Numerov
propagator and extracts eta by matching at two far points, giving
ground-truth phase shifts against which every variational result is
validated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergence

__all__ = [
    "PotentialKind",
    "PotentialSpec",
    "RadialGrid",
    "build_grid",
    "evaluate_potential",
    "oracle_phase_shift",
]


class PotentialKind(enum.Enum):
    ZERO = "zero"
    EXPONENTIAL = "exponential"
    SQUARE_WELL = "square_well"


@dataclass(frozen=True)
class PotentialSpec:
    """Short-range model interaction V(r).

    kind        selects the functional form
    strength    well/peak value V0 (negative = attractive)
    range_      length scale r0; decay length for the exponential kind,
                edge radius for the square well
    """

    kind: PotentialKind
    strength: float = 0.0
    range_: float = 1.0

    def __post_init__(self):
        if self.kind is not PotentialKind.ZERO and not self.range_ > 0.0:
            raise ValueError("potential range r0 must be > 0")

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls(PotentialKind.ZERO)

    @classmethod
    def exponential(cls, strength: float, range_: float) -> "PotentialSpec":
        return cls(PotentialKind.EXPONENTIAL, strength, range_)

    @classmethod
    def square_well(cls, strength: float, range_: float) -> "PotentialSpec":
        return cls(PotentialKind.SQUARE_WELL, strength, range_)

    def breakpoints(self) -> tuple[float, ...]:
        """Radii where V is not smooth (quadrature panels must break there)."""
        if self.kind is PotentialKind.SQUARE_WELL:
            return (self.range_,)
        return ()


def evaluate_potential(spec: PotentialSpec, r):
    """V(r) for scalar or array r >= 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("r must be >= 0")
    if spec.kind is PotentialKind.ZERO:
        out = np.zeros_like(r)
    elif spec.kind is PotentialKind.EXPONENTIAL:
        out = spec.strength * np.exp(-r / spec.range_)
    else:
        out = np.where(r < spec.range_, spec.strength, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RadialGrid:
    """Composite Gauss-Legendre quadrature on (0, r_max].

    Panels are delimited by `edges`; each panel carries `order` nodes.
    Nodes are strictly increasing and weights strictly positive, so the
    grid integrates the exponentially decaying matrix-element integrands
    to spectral accuracy.
    """

    r_max: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    edges: tuple[float, ...] = field(repr=False, default=())
    order: int = 0

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if n.shape != w.shape or n.ndim != 1 or n.size == 0:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if not (np.all(np.diff(n) > 0.0) and n[0] > 0.0 and n[-1] <= self.r_max):
            raise ValueError("nodes must be strictly increasing in (0, r_max]")
        if not np.all(w > 0.0):
            raise ValueError("weights must be positive")
        n.setflags(write=False)
        w.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    def doubled(self) -> "RadialGrid":
        """Same panel layout with twice the nodes per panel."""
        return _compose(self.edges, 2 * self.order, self.r_max)


def _compose(edges: tuple[float, ...], order: int, r_max: float) -> RadialGrid:
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return RadialGrid(
        r_max=r_max,
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        edges=edges,
        order=order,
    )


def build_grid(
    r_max: float = 60.0,
    n_nodes: int = 480,
    potential: PotentialSpec | None = None,
) -> RadialGrid:
    """Construct a composite Gauss-Legendre grid on [0, r_max].

    The panel length is ~2 model units (resolves both the k <= 1
    oscillations and the basis decay scales).  Potential breakpoints
    (square-well edge) are inserted as panel boundaries so every panel
    integrand is smooth.
    """
    if not r_max > 0.0:
        raise ValueError("r_max must be > 0")
    order = 16
    n_panels = max(1, round(n_nodes / order))
    edges = list(np.linspace(0.0, r_max, n_panels + 1))
    if potential is not None:
        for brk in potential.breakpoints():
            if 0.0 < brk < r_max:
                edges.append(brk)
    edges = sorted(set(edges))
    # drop panels thinner than a sliver created by a breakpoint collision
    cleaned = [edges[0]]
    for e in edges[1:]:
        if e - cleaned[-1] > 1e-9 * r_max:
            cleaned.append(e)
    cleaned[-1] = r_max
    return _compose(tuple(cleaned), order, r_max)


# ---------------------------------------------------------------------------
# ODE oracle
# ---------------------------------------------------------------------------

def _numerov_segment(f, h: float, u, i_from: int, i_to: int) -> None:
    """Propagate u'' = f(r) u over mesh indices [i_from, i_to].

    Summed phi-form with Kahan compensation: with
    phi_i = u_i (1 - h^2 f_i / 12) the recursion is

        d_i   = d_{i-1} + h^2 f_i u_i,
        phi_{i+1} = phi_i + d_i,

    which keeps the tiny per-step increments from being swallowed by the
    accumulator (the raw three-term form loses ~h^{-3/2} sqrt-growth of
    roundoff on long slowly-oscillating stretches).
    Requires u[i_from] and u[i_from + 1] already set.
    """
    h2 = h * h
    c = h2 / 12.0
    phi = u[i_from + 1] * (1.0 - c * f[i_from + 1])
    d = phi - u[i_from] * (1.0 - c * f[i_from])
    comp_d = 0.0
    comp_phi = 0.0
    for i in range(i_from + 1, i_to):
        y = h2 * f[i] * u[i] - comp_d
        t = d + y
        comp_d = (t - d) - y
        d = t
        y = d - comp_phi
        t = phi + y
        comp_phi = (t - phi) - y
        phi = t
        u[i + 1] = phi / (1.0 - c * f[i + 1])


def _derivative_left(u, i: int, h: float) -> float:
    """One-sided 4th-order derivative from the five mesh points ending at i."""
    return math.fsum(
        (25.0 * u[i], -48.0 * u[i - 1], 36.0 * u[i - 2],
         -16.0 * u[i - 3], 3.0 * u[i - 4])
    ) / (12.0 * h)


def _match_sine(u1: float, u2: float, r1: float, r2: float, k: float) -> float:
    """Solve u_i = A sin(k r_i + eta) for eta from two samples.

    Degenerate when k (r2 - r1) is a multiple of pi; callers must choose
    the spacing to avoid that.
    """
    det = math.sin(k * (r1 - r2))
    if abs(det) < 1e-3:
        raise NonConvergence(
            f"two-point match degenerate: sin(k dr) = {det:.3e} at k = {k}"
        )
    a_cos = (u1 * math.cos(k * r2) - u2 * math.cos(k * r1)) / det
    a_sin = (u2 * math.sin(k * r1) - u1 * math.sin(k * r2)) / det
    if a_cos == 0.0 and a_sin == 0.0:
        raise NonConvergence("zero solution at both match points")
    return wrap_half_pi(math.atan2(a_sin, a_cos))


def wrap_half_pi(angle: float) -> float:
    """Reduce an angle modulo pi into (-pi/2, pi/2]; -pi/2 maps to +pi/2."""
    w = math.remainder(angle, math.pi)
    if w <= -math.pi / 2.0:
        w += math.pi
    return w


def oracle_phase_shift(
    spec: PotentialSpec,
    k: float,
    grid: RadialGrid,
    step: float = 1e-3,
) -> float:
    """Ground-truth s-wave phase shift from direct outward integration.

    Fixed-step Numerov (4th-order global) from u(0) = 0 out to the first
    mesh point r1 >= r_max, where |V| < 1e-12 by the grid invariant.
    From there the solution is free and is carried analytically to
    r2 = r1 + pi/(2k); matching u at (r1, r2) then has sin(k dr) ~ 1,
    far from the degenerate spacings.  A square-well edge is kept on a
    mesh node and crossed by re-expanding the free solution from the
    one-sided derivative.  Returns eta wrapped to (-pi/2, pi/2] mod pi.
    """
    if not k > 0.0:
        raise ValueError("k must be > 0")
    if not step > 0.0:
        raise ValueError("step must be > 0")
    r_max = grid.r_max
    v_tail = abs(evaluate_potential(spec, r_max))
    if v_tail >= 1e-12:
        raise ValueError(f"|V(r_max)| = {v_tail:.2e} too large for matching")

    h = step
    breaks = [b for b in spec.breakpoints() if b < r_max]
    for brk in breaks:
        # land a mesh point exactly on the discontinuity
        h = brk / max(5, math.ceil(brk / step))
    i1 = max(math.ceil(r_max / h), 6)

    r = np.arange(i1 + 1, dtype=float) * h
    f_arr = 2.0 * evaluate_potential(spec, r) - k * k
    i_breaks = []
    for brk in breaks:
        ib = round(brk / h)
        # the segment ending at the edge must see the left-limit value
        f_arr[ib] = 2.0 * evaluate_potential(spec, np.nextafter(brk, 0.0)) - k * k
        i_breaks.append(ib)
    f = f_arr.tolist()

    u = [0.0] * (i1 + 1)
    f0 = 2.0 * float(evaluate_potential(spec, 0.0)) - k * k
    # series start u(h) = h + f(0) h^3/6 + f'(0) h^4/12 + O(h^5)
    u[1] = h * (1.0 + f0 * h * h / 6.0 + (f[1] - f0) * h * h / 12.0)

    start = 0
    for ib in i_breaks:
        _numerov_segment(f, h, u, start, ib)
        du = _derivative_left(u, ib, h)
        # V = 0 beyond the edge: step across on the exact free solution
        u[ib + 1] = u[ib] * math.cos(k * h) + du * math.sin(k * h) / k
        f[ib] = -k * k
        start = ib
    _numerov_segment(f, h, u, start, i1)

    r1 = r[i1]
    du1 = _derivative_left(u, i1, h)
    gap = math.pi / (2.0 * k)
    r2 = r1 + gap
    u2 = u[i1] * math.cos(k * gap) + du1 * math.sin(k * gap) / k
    return _match_sine(u[i1], u2, r1, r2, k)
