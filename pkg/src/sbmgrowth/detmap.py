"""Deterministic one-dimensional approximation of the red-fraction dynamics.

The red fraction evolves as ``x -> f(x) = (x + lam * gamma(x)) / (1 + lam)``
where ``gamma(x)`` is the expected red share of total weight. After dividing
through by ``b*beta`` the map depends only on ``rho = a*alpha/(b*beta)`` and
``lam``. Its fixed points are 0, 1/2 and 1 (every point when ``rho == 1``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import RHO_TOL, ModelParams

STABILITY_TOL = 1e-12

FIXED_POINTS = (0.0, 0.5, 1.0)


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NEUTRAL = "neutral"


class Phase(enum.Enum):
    MINORITY_VANISHES = "minority_vanishes"
    PARITY_REACHED = "parity_reached"
    FROZEN = "frozen"


@dataclass(frozen=True)
class DetParams:
    rho: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be finite and positive, got {self.rho!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lambda must be finite and positive, got {self.lam!r}")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "lam", float(self.lam))

    @classmethod
    def from_model(cls, params: ModelParams) -> "DetParams":
        # reuse the stored rho so phase decisions match the stochastic side
        return cls(params.rho, params.lam)

    @property
    def rho_is_one(self) -> bool:
        return abs(self.rho - 1.0) <= RHO_TOL


@dataclass(frozen=True)
class FixedPoint:
    x: float
    derivative: float
    stability: Stability


@dataclass(frozen=True)
class IdentityMap:
    """Returned by :func:`fixed_points` when ``rho == 1``: every x is fixed."""

    derivative: float = 1.0
    stability: Stability = Stability.NEUTRAL


@dataclass(frozen=True)
class DetTrajectory:
    xs: tuple
    converged_to: Optional[float]
    iterations: int


def _check_unit(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise ValueError("x must lie in [0, 1]")
    return arr


def gamma(x, a, alpha, b, beta):
    """Expected red share of total weight when a fraction ``x`` of nodes is red."""
    x = _check_unit(x)
    same = a * alpha
    cross = b * beta
    num = same * x * x + cross * x * (1.0 - x)
    den = same * x * x + 2.0 * cross * x * (1.0 - x) + same * (1.0 - x) ** 2
    out = num / den
    return float(out) if out.ndim == 0 else out


def _denominator(x, rho):
    return 2.0 * x * x * (rho - 1.0) - 2.0 * x * (rho - 1.0) + rho


def _drift(x):
    # x(1-x)(2x-1), the cubic that vanishes exactly at the three fixed points
    return x * (1.0 - x) * (2.0 * x - 1.0)


def f_update(x, p: DetParams):
    """One step of the deterministic map as a function of ``rho`` and ``lam``.

    Evaluated as ``x + lam*(rho-1)*x(1-x)(2x-1) / ((1+lam)*D(x))`` with
    ``D(x) = 2x^2(rho-1) - 2x(rho-1) + rho``. This equals the expanded
    rational form but is exact at 0, 1/2 and 1 and avoids cancellation near
    the boundaries.
    """
    x = _check_unit(x)
    if np.any(_denominator(x, p.rho) <= 0.0):
        raise ArithmeticError(f"non-positive denominator in f for rho={p.rho}")
    out = _f_formula(x, p.rho, p.lam)
    return float(out) if out.ndim == 0 else out


def _f_formula(x, rho, lam):
    # no domain check: finite-difference checks step slightly outside [0, 1]
    return x + lam * (rho - 1.0) * _drift(x) / ((1.0 + lam) * _denominator(x, rho))


def f_update_via_gamma(x, p: DetParams):
    """``(x + lam*gamma(x)) / (1 + lam)`` with ``b*beta`` normalised to 1."""
    x = _check_unit(x)
    out = (x + p.lam * gamma(x, p.rho, 1.0, 1.0, 1.0)) / (1.0 + p.lam)
    return float(out) if np.ndim(out) == 0 else out


def f_derivative(x, p: DetParams):
    """Exact derivative of :func:`f_update` (quotient rule on the factored form)."""
    x = _check_unit(x)
    rho, lam = p.rho, p.lam
    r1 = rho - 1.0
    den = _denominator(x, rho)
    if np.any(den <= 0.0):
        raise ArithmeticError(f"non-positive denominator in f' for rho={rho}")
    h = _drift(x)
    dh = -6.0 * x * x + 6.0 * x - 1.0
    dden = 2.0 * r1 * (2.0 * x - 1.0)
    out = 1.0 + lam * r1 * (dh * den - h * dden) / ((1.0 + lam) * den * den)
    return float(out) if out.ndim == 0 else out


def fprime_at_boundary(p: DetParams) -> float:
    """f'(0) = f'(1) evaluated from its reduced form."""
    return (p.lam + p.rho) / (p.lam * p.rho + p.rho)


def fprime_at_half(p: DetParams) -> float:
    return (2.0 * p.lam * p.rho + p.rho + 1.0) / ((1.0 + p.lam) * (p.rho + 1.0))


def classify_stability(derivative: float, tol: float = STABILITY_TOL) -> Stability:
    d = abs(derivative)
    if d < 1.0 - tol:
        return Stability.STABLE
    if d > 1.0 + tol:
        return Stability.UNSTABLE
    return Stability.NEUTRAL


def fixed_points(p: DetParams) -> Union[tuple, IdentityMap]:
    if p.rho_is_one:
        return IdentityMap()
    out = []
    for x in FIXED_POINTS:
        d = f_derivative(x, p)
        out.append(FixedPoint(x, d, classify_stability(d)))
    return tuple(out)


def classify_phase(p: DetParams) -> Phase:
    if p.rho_is_one:
        return Phase.FROZEN
    return Phase.MINORITY_VANISHES if p.rho > 1.0 else Phase.PARITY_REACHED


def iterate(x0: float, p: DetParams, max_iter: int = 10_000, tol_conv: float = 1e-10) -> DetTrajectory:
    """Iterate ``f`` from ``x0`` until successive values differ by less than
    ``tol_conv`` or ``max_iter`` steps were taken.

    ``converged_to`` is the nearest of 0, 1/2, 1 when the last iterate lies
    within ``100 * tol_conv`` of it.
    """
    if max_iter < 1 or not tol_conv > 0:
        raise ValueError("need max_iter >= 1 and tol_conv > 0")
    x = float(_check_unit(x0))
    xs = [x]
    for _ in range(max_iter):
        nxt = f_update(x, p)
        xs.append(nxt)
        done = abs(nxt - x) < tol_conv
        x = nxt
        if done:
            break
    nearest = min(FIXED_POINTS, key=lambda c: abs(c - x))
    converged = nearest if abs(nearest - x) <= 100.0 * tol_conv else None
    return DetTrajectory(tuple(xs), converged, len(xs) - 1)


# -- CSV export -------------------------------------------------------------


def trajectory_csv(traj: DetTrajectory) -> str:
    lines = ["t,x"]
    lines.extend(f"{t},{x:.17g}" for t, x in enumerate(traj.xs))
    return "\n".join(lines) + "\n"


def curve_csv(p: DetParams, points: int = 1001) -> str:
    """``x,f,fprime`` on a uniform grid of [0, 1]."""
    xs = np.linspace(0.0, 1.0, points)
    fs = f_update(xs, p)
    ds = f_derivative(xs, p)
    lines = ["x,f,fprime"]
    lines.extend(f"{x:.17g},{f:.17g},{d:.17g}" for x, f, d in zip(xs, fs, ds))
    return "\n".join(lines) + "\n"
