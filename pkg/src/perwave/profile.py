"""One period of the traveling-wave profile u(x; a, E, c).

The profile is produced two independent ways and cross-checked: direct
integration of the planar ODE m u'' = -W'(u) from the left turning point,
and the regularized period quadrature.  The translation freedom is fixed
by u(0) = u_minus, u_x(0) = 0, so the wave is even about x = T/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from ._quad import abelian_integrals
from .errors import IntegrationFailure, PeriodMismatch
from .models import (
    EquationFamily,
    PotentialWell,
    effective_mass,
    potential,
    potential_derivative,
)

__all__ = ["WaveProfile", "solve_profile", "period_quadrature"]

_RTOL = 1e-12
_ATOL = 1e-14
_PERIOD_AGREEMENT = 1e-8


@dataclass
class WaveProfile:
    """One period of (u, u_x, u_xx) on a uniform grid, plus a dense evaluator.

    grid has n_points + 1 samples including both endpoints 0 and T, so the
    trapezoid rule on it is the spectrally accurate periodic rectangle rule.
    dense(x) returns (u, u_x) arrays for arbitrary x in [0, T].
    """

    well: PotentialWell
    T: float
    grid: np.ndarray
    u: np.ndarray
    u_x: np.ndarray
    u_xx: np.ndarray
    dense: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    energy_residual: float
    period_residual: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def family(self) -> EquationFamily:
        return self.well.params.family

    @property
    def params(self):
        return self.well.params


def period_quadrature(well: PotentialWell, rtol: float = 1e-12) -> float:
    """Period from the regularized turning-point integral.

    T = 2 * integral sqrt(m) du / sqrt(2 (E - W)) with m = 1 (gKdV) or
    m = c (gBBM).
    """
    m = effective_mass(well.params)
    sqrt_m = np.sqrt(m)
    vals, _ = abelian_integrals(well, {"T": lambda u, y: sqrt_m * np.ones_like(u)}, rtol=rtol)
    T = vals["T"]
    if not np.isfinite(T) or T <= 0.0:
        raise IntegrationFailure(f"period quadrature returned {T}")
    return T


def _make_dense(sol, t_half: float, T: float):
    """Vectorized evaluator on [0, T] from the half-period dense output.

    The orbit is time-reversible through the turning points, so the second
    half is the exact mirror of the first.
    """

    def dense(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s = np.where(x <= t_half, x, T - x)
        s = np.clip(s, 0.0, t_half)
        vals = sol.sol(s)
        u = vals[0]
        ux = np.where(x <= t_half, vals[1], -vals[1])
        return u, ux

    return dense


def solve_profile(well: PotentialWell, n_points: int = 2048, tol: float = 1e-9) -> WaveProfile:
    """Integrate one period of the profile ODE and certify it.

    Integrates m u'' = -W'(u) from (u_minus, 0) to the first return of
    u_x = 0 at u_plus (half period, located on the dense output), mirrors
    to a full period, and resamples on a uniform grid of n_points + 1
    samples.  Raises PeriodMismatch if the ODE period and the quadrature
    period disagree beyond 1e-8 relative, IntegrationFailure if the orbit
    cannot be followed or the energy residual exceeds tol.
    """
    if n_points < 64:
        raise ValueError(f"n_points must be >= 64, got {n_points}")
    params = well.params
    nl = well.nl
    m = effective_mass(params)
    T_quad = period_quadrature(well)

    def rhs(x, y):
        return (y[1], -potential_derivative(nl, params, y[0]) / m)

    def turn(x, y):
        return y[1]

    turn.terminal = True
    turn.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, 0.75 * T_quad),
        (well.u_minus, 0.0),
        method="DOP853",
        rtol=_RTOL,
        atol=_ATOL,
        dense_output=True,
        events=turn,
    )
    if sol.status == -1:
        raise IntegrationFailure(f"profile integration failed: {sol.message}")
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise IntegrationFailure("no return to u_x = 0 within 0.75 quadrature periods")

    t_half = float(sol.t_events[0][0])
    T_ode = 2.0 * t_half
    if abs(T_ode - T_quad) > _PERIOD_AGREEMENT * T_quad:
        raise PeriodMismatch(
            f"ODE period {T_ode!r} vs quadrature period {T_quad!r} "
            f"(relative {abs(T_ode - T_quad) / T_quad:.3e})"
        )

    dense = _make_dense(sol, t_half, T_ode)
    grid = np.linspace(0.0, T_ode, n_points + 1)
    u, u_x = dense(grid)
    u_xx = -np.asarray(potential_derivative(nl, params, u)) / m

    energy = 0.5 * m * u_x**2 + potential(nl, params, u) - params.E
    energy_residual = float(np.max(np.abs(energy)))
    scale_E = abs(params.E) + 1.0
    if energy_residual > tol * scale_E:
        raise IntegrationFailure(
            f"energy residual {energy_residual:.3e} exceeds tol {tol:g} * {scale_E:g}"
        )
    period_residual = float(abs(u[-1] - u[0]) + abs(u_x[-1] - u_x[0]))

    return WaveProfile(
        well=well,
        T=T_ode,
        grid=grid,
        u=u,
        u_x=u_x,
        u_xx=u_xx,
        dense=dense,
        energy_residual=energy_residual,
        period_residual=period_residual,
    )
