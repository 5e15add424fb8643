"""Open-channel and short-range trial functions.

The open-channel pair is S(r) = N sin(kr) and the shielded
C(r) = N cos(kr) (1 - exp(-gamma r)), regular at the origin and tending
to N cos(kr) at large r.  A boundary-phase parameter tau mixes them by a
2x2 rotation; the asymptotic offset constant c is carried through the
phase formulas but never enters the functions themselves.

The square-integrable set is chi_0 (shielded cosine times an extra decay
factor) plus two families of power-times-exponential correlation
functions, r^i exp(-alpha r) and r^i exp(-beta r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "BasisSpec",
    "RotatedPair",
    "eval_S",
    "eval_C",
    "eval_chi0",
    "eval_chi",
    "rotate_pair",
]


@dataclass(frozen=True)
class BasisSpec:
    """Parameters of the trial-function family.

    gamma   shielding that regularizes C at the origin
    c       asymptotic phase offset (fixed per problem, not varied with tau)
    alpha   decay exponent of the first correlation family
    beta    decay exponent of the second correlation family
    m1, m2  sizes of the two families (M = m1 + m2)
    norm    overall normalization N of S, C and chi_0
    """

    gamma: float = 0.75
    c: float = 0.0
    alpha: float = 0.6
    beta: float = 1.0
    m1: int = 6
    m2: int = 6
    norm: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be > 0")
        if not self.alpha > 0.0:
            raise ValueError("alpha must be > 0")
        if not self.beta > 0.0:
            raise ValueError("beta must be > 0")
        if self.m1 < 0 or self.m2 < 0 or self.m1 + self.m2 < 1:
            raise ValueError("need m1, m2 >= 0 with m1 + m2 >= 1")

    @property
    def m(self) -> int:
        return self.m1 + self.m2


class RotatedPair(NamedTuple):
    sbar: float
    cbar: float


def eval_S(spec: BasisSpec, k: float, r):
    """Incident-wave function N sin(kr)."""
    r = np.asarray(r, dtype=float)
    out = spec.norm * np.sin(k * r)
    return float(out) if out.ndim == 0 else out


def eval_C(spec: BasisSpec, k: float, r):
    """Shielded scattered-wave function N cos(kr) (1 - e^{-gamma r})."""
    r = np.asarray(r, dtype=float)
    out = spec.norm * np.cos(k * r) * (-np.expm1(-spec.gamma * r))
    return float(out) if out.ndim == 0 else out


def eval_chi0(spec: BasisSpec, k: float, r):
    """Square-integrable companion N cos(kr) (1 - e^{-gamma r}) e^{-gamma r}."""
    r = np.asarray(r, dtype=float)
    g = spec.gamma
    out = spec.norm * np.cos(k * r) * (-np.expm1(-g * r)) * np.exp(-g * r)
    return float(out) if out.ndim == 0 else out


def eval_chi(spec: BasisSpec, i: int, r):
    """Correlation function i (1-based): r^i e^{-alpha r} for i <= m1,
    then r^{i-m1} e^{-beta r}."""
    if not 1 <= i <= spec.m:
        raise IndexError(f"chi index {i} outside 1..{spec.m}")
    r = np.asarray(r, dtype=float)
    if i <= spec.m1:
        power, expo = i, spec.alpha
    else:
        power, expo = i - spec.m1, spec.beta
    out = r**power * np.exp(-expo * r)
    return float(out) if out.ndim == 0 else out


def rotate_pair(s, c, tau: float):
    """Mix (S, C) by the boundary-phase rotation.

    [sbar]   [ cos tau  sin tau] [s]
    [cbar] = [-sin tau  cos tau] [c]

    Orthogonal, so sbar^2 + cbar^2 = s^2 + c^2 pointwise.
    """
    ct, st = math.cos(tau), math.sin(tau)
    sbar = ct * s + st * c
    cbar = -st * s + ct * c
    if np.ndim(sbar) == 0:
        return RotatedPair(float(sbar), float(cbar))
    return sbar, cbar
