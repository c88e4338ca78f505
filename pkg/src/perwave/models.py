"""Nonlinearities, equation families, effective potentials, turning points.

A periodic traveling wave is an oscillation of the planar Hamiltonian system

    (m/2) u_x^2 + W(u; a, c) = E,

where for the gKdV/gZK family W = V(u) = F(u) - (c/2) u^2 - a u and m = 1,
and for the gBBM/gBBM-ZK family W = G(u) = F(u) - ((c-1)/2) u^2 - a u and
m = c.  This module locates and certifies the potential well [u_minus,
u_plus] that bounds one oscillation, and decides membership in the
admissible parameter set Omega.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateRoot, NotInOmega, NoWell, PerwaveError

__all__ = [
    "EquationFamily",
    "Nonlinearity",
    "WaveParams",
    "PotentialWell",
    "make_power_law",
    "make_kdv",
    "make_mkdv",
    "make_bbm_quadratic",
    "potential",
    "potential_derivative",
    "potential_second_derivative",
    "effective_mass",
    "find_turning_points",
    "in_omega",
]

# Scan used by find_turning_points: half-width factor, grid density, widenings.
_SCAN_FACTOR = 10.0
_SCAN_POINTS = 4097
_MAX_WIDENINGS = 6


class EquationFamily(Enum):
    """Which dispersive family the traveling wave belongs to."""

    GKDV_ZK = "gkdv"
    GBBM_ZK = "gbbm"


@dataclass(frozen=True)
class Nonlinearity:
    """Evaluator bundle for f, its derivatives, and the antiderivative F.

    F is normalized so that F(0) = 0.  All callables must accept scalars and
    numpy arrays.  f is required to be C^2 on the hull of any well it is
    used with.
    """

    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    fsecond: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    label: str


def make_power_law(p: float) -> Nonlinearity:
    """Power-law nonlinearity f(u) = u**(p+1), p >= 1.

    Integer exponents are evaluated with integer powers so that negative u
    is handled exactly.
    """
    if p < 1:
        raise ValueError(f"power-law exponent must satisfy p >= 1, got {p}")
    q = p + 1
    if float(q).is_integer():
        q = int(round(q))

    def f(u):
        return u**q

    def fprime(u):
        return q * u ** (q - 1)

    def fsecond(u):
        if q == 2:
            return 2.0 * np.ones_like(np.asarray(u, dtype=float))
        return q * (q - 1) * u ** (q - 2)

    def F(u):
        return u ** (q + 1) / (q + 1)

    return Nonlinearity(f=f, fprime=fprime, fsecond=fsecond, F=F, label=f"power:{p:g}")


def make_kdv() -> Nonlinearity:
    """KdV nonlinearity f(u) = u^2."""
    return make_power_law(1)


def make_mkdv() -> Nonlinearity:
    """Focusing mKdV nonlinearity in the f(u)_x convention: f(u) = u^3 / 3.

    The classical form u_t = u_xxx + u^2 u_x corresponds to f(u) = u^3/3
    once the nonlinear term is written as f(u)_x.  This differs from
    make_power_law(2) (f = u^3) by an exact rescaling u -> sqrt(3) u.
    """

    def f(u):
        return u**3 / 3.0

    def fprime(u):
        return u**2

    def fsecond(u):
        return 2.0 * u

    def F(u):
        return u**4 / 12.0

    return Nonlinearity(f=f, fprime=fprime, fsecond=fsecond, F=F, label="mkdv:u^3/3")


def make_bbm_quadratic() -> Nonlinearity:
    """BBM nonlinearity f(u) = u^2 (use with EquationFamily.GBBM_ZK)."""
    nl = make_power_law(1)
    return Nonlinearity(nl.f, nl.fprime, nl.fsecond, nl.F, label="bbm:u^2")


@dataclass(frozen=True)
class WaveParams:
    """Traveling-wave parameter triple (a, E, c) plus the equation family.

    a is the first integration constant, E the orbit energy, c the wave
    speed.  The gBBM family requires c > 1 (c multiplies u_x^2 in the orbit
    energy, so the structure degenerates at c <= 1... c = 0 in particular).
    The gKdV convention is a rightward frame with c > 0, but Galilean
    representatives of legitimate orbits (e.g. low-modulus cnoidal waves)
    carry c <= 0 and every operation here is sign-agnostic in c, so only
    finiteness is enforced for GKDV_ZK.
    """

    a: float
    E: float
    c: float
    family: EquationFamily = EquationFamily.GKDV_ZK

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.a, self.E, self.c)):
            raise ValueError(f"parameters must be finite, got {self}")
        if self.family is EquationFamily.GBBM_ZK and not self.c > 1:
            raise ValueError(f"gBBM family requires wave speed c > 1, got c={self.c}")

    def replace(self, **kw) -> "WaveParams":
        fields = {"a": self.a, "E": self.E, "c": self.c, "family": self.family}
        fields.update(kw)
        return WaveParams(**fields)


def effective_mass(params: WaveParams) -> float:
    """Coefficient m in the orbit energy (m/2) u_x^2 + W(u) = E."""
    return params.c if params.family is EquationFamily.GBBM_ZK else 1.0


def potential(nl: Nonlinearity, params: WaveParams, u):
    """Effective potential: V for gKdV, G for gBBM.  Vectorized in u."""
    if params.family is EquationFamily.GBBM_ZK:
        return nl.F(u) - 0.5 * (params.c - 1.0) * np.square(u) - params.a * u
    return nl.F(u) - 0.5 * params.c * np.square(u) - params.a * u


def potential_derivative(nl: Nonlinearity, params: WaveParams, u):
    """dW/du.  Vectorized in u."""
    if params.family is EquationFamily.GBBM_ZK:
        return nl.f(u) - (params.c - 1.0) * u - params.a
    return nl.f(u) - params.c * u - params.a


def potential_second_derivative(nl: Nonlinearity, params: WaveParams, u):
    """d^2 W/du^2.  Vectorized in u."""
    if params.family is EquationFamily.GBBM_ZK:
        return nl.fprime(u) - (params.c - 1.0)
    return nl.fprime(u) - params.c


@dataclass(frozen=True)
class PotentialWell:
    """One certified potential well: simple turning points around a local
    minimum of the effective potential, with E strictly above the bottom.

    root_slopes holds d/du of (E - W) at (u_minus, u_plus); both are
    nonzero by the simple-root certificate.
    """

    nl: Nonlinearity
    params: WaveParams
    u_minus: float
    u_plus: float
    u_min_loc: float
    root_slopes: tuple[float, float]

    @property
    def width(self) -> float:
        return self.u_plus - self.u_minus


def _critical_points(nl, params, lo, hi):
    """Roots of W' in [lo, hi], found by sign-change bracketing on a grid."""
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    dw = np.asarray(potential_derivative(nl, params, grid), dtype=float)
    crits = []
    kinds = []  # +1 local min (W' goes - to +), -1 local max
    sign = np.sign(dw)
    for i in range(len(grid) - 1):
        if not np.isfinite(dw[i]) or not np.isfinite(dw[i + 1]):
            continue
        if sign[i] == 0.0:
            crits.append(grid[i])
            kinds.append(1 if (i + 1 < len(dw) and dw[i + 1] > 0) else -1)
        elif sign[i] * sign[i + 1] < 0:
            root = brentq(
                lambda u: potential_derivative(nl, params, u),
                grid[i],
                grid[i + 1],
                xtol=1e-14,
                rtol=1e-15,
            )
            crits.append(root)
            kinds.append(1 if sign[i] < 0 else -1)
    return np.array(crits), np.array(kinds, dtype=int)


def _bracket_root(nl, params, E, segments):
    """First root of E - W along a chain of monotone segments.

    segments is a list of (near, far) pairs walking away from the well
    minimum; on each, W is monotone so E - W changes sign at most once.
    Returns the root or None if E - W stays positive throughout.
    """

    def g(u):
        return E - potential(nl, params, u)

    for near, far in segments:
        g_far = g(far)
        if g_far < 0.0:
            return brentq(g, near, far, xtol=1e-15, rtol=8.881784197001252e-16)
        if g_far == 0.0:
            return far
    return None


def _try_candidate(nl, params, u0, lo, hi, crits):
    """Attempt to build the well around local minimum u0.

    Returns (well, failure_reason); exactly one is not None.  Reasons:
    'below' (E at or below the well bottom), 'open' (no bounding root on a
    side), 'degenerate' (simple-root certificate failed).
    """
    E = params.E
    if not (E - potential(nl, params, u0) > 0.0):
        return None, "below"

    left_crits = sorted([c for c in crits if c < u0], reverse=True)
    right_crits = sorted([c for c in crits if c > u0])
    left_segments = []
    near = u0
    for c in left_crits:
        left_segments.append((near, c))
        near = c
    left_segments.append((near, lo))
    right_segments = []
    near = u0
    for c in right_crits:
        right_segments.append((near, c))
        near = c
    right_segments.append((near, hi))

    u_minus = _bracket_root(nl, params, E, left_segments)
    u_plus = _bracket_root(nl, params, E, right_segments)
    if u_minus is None or u_plus is None:
        return None, "open"

    width = u_plus - u_minus
    d2 = abs(potential_second_derivative(nl, params, u0))
    tol_simple = 1e-8 * (1.0 + d2 * width)
    slope_minus = potential_derivative(nl, params, u_minus)
    slope_plus = potential_derivative(nl, params, u_plus)
    if abs(slope_minus) <= tol_simple or abs(slope_plus) <= tol_simple:
        return None, "degenerate"

    # Certify positivity of E - W strictly inside the well.
    interior = np.linspace(u_minus, u_plus, 1002)[1:-1]
    margin = E - potential(nl, params, interior)
    if np.min(margin) <= -1e-12 * (abs(E) + 1.0) or np.min(margin) <= 0.0:
        return None, "open"

    well = PotentialWell(
        nl=nl,
        params=params,
        u_minus=float(u_minus),
        u_plus=float(u_plus),
        u_min_loc=float(u0),
        root_slopes=(float(-slope_minus), float(-slope_plus)),
    )
    return well, None


def find_turning_points(
    nl: Nonlinearity, params: WaveParams, u_seed: float | None = None
) -> PotentialWell:
    """Locate and certify the potential well bounding one periodic orbit.

    Scans for local minima of the effective potential (widening the range
    up to _MAX_WIDENINGS times), then brackets the first root of E - W on
    each side of the chosen minimum.  When several minima admit an orbit,
    the well containing u_seed wins if a seed is given; otherwise the well
    with the smallest u_min_loc.

    Raises NoWell, NotInOmega, or DegenerateRoot (all map to "not in
    Omega" for in_omega).
    """
    center = float(u_seed) if u_seed is not None else 0.0
    span = 1.0 + abs(center)

    saw_degenerate = False
    saw_candidate = False
    for _ in range(_MAX_WIDENINGS + 1):
        lo = center - _SCAN_FACTOR * span
        hi = center + _SCAN_FACTOR * span
        crits, kinds = _critical_points(nl, params, lo, hi)
        minima = crits[kinds == 1]

        wells = []
        for u0 in minima:
            saw_candidate = True
            well, reason = _try_candidate(nl, params, u0, lo, hi, crits)
            if well is not None:
                wells.append(well)
            elif reason == "degenerate":
                saw_degenerate = True

        if wells:
            if u_seed is not None:
                containing = [w for w in wells if w.u_minus <= u_seed <= w.u_plus]
                if containing:
                    return min(containing, key=lambda w: abs(w.u_min_loc - u_seed))
                return min(wells, key=lambda w: abs(w.u_min_loc - u_seed))
            return min(wells, key=lambda w: w.u_min_loc)

        span *= 2.0

    if saw_degenerate:
        raise DegenerateRoot(
            f"turning points of {params} are not simple (equilibrium or homoclinic limit)"
        )
    if saw_candidate:
        raise NotInOmega(f"no periodic orbit for {params}: no bounded well at this energy")
    raise NoWell(f"effective potential for {params} has no local minimum in scan range")


def in_omega(nl: Nonlinearity, params: WaveParams, u_seed: float | None = None) -> bool:
    """True iff (a, E, c) admits a certified periodic orbit."""
    try:
        find_turning_points(nl, params, u_seed=u_seed)
        return True
    except PerwaveError:
        return False
