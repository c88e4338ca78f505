"""Adaptive Gauss-Legendre quadrature and regularized Abelian integrals.

All five wave functionals are integrals of the form

    I[n] = 2 * integral_{u-}^{u+} n(u, y) / sqrt(2 y) du,    y = E - W(u),

whose integrand has inverse-square-root singularities at the simple turning
points.  The substitution u = u- + (u+ - u-) * sin(theta)^2 removes both
singularities, after which plain Gauss-Legendre converges spectrally.

Close to a turning point the direct subtraction E - W(u) is cancellation-
limited to ~eps * |W|, while the Taylor expansion from the certified simple
root is accurate to O(d^3); each node uses whichever form is better, with
the crossover distance chosen where the two error bounds meet. Without
this, the quadrature noise floor grows with the node count and the
doubling loop never settles.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import QuadratureNonconvergence
from .models import (
    PotentialWell,
    potential,
    potential_second_derivative,
)

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}

_N0 = 200
_MAX_DOUBLINGS = 5
_EPS = np.finfo(float).eps


def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


class _Margin:
    """Evaluator of y = E - W(u) on one well, stable up to the endpoints."""

    def __init__(self, well: PotentialWell):
        self.well = well
        params = well.params
        nl = well.nl
        self.scale = abs(params.E) + max(
            abs(float(potential(nl, params, v)))
            for v in (well.u_minus, well.u_min_loc, well.u_plus)
        )
        # Taylor model from each root: y = s d - W''/2 d^2 - f''/6 d^3, which
        # is exact for cubic W (f quadratic) and O(d^4) otherwise.  Switch to
        # it where direct-eval noise (eps*scale) exceeds the quartic
        # remainder, estimated with f''' ~ |f''(u_pm)| / (1 + width).
        self.d2 = (
            float(potential_second_derivative(nl, params, well.u_minus)),
            float(potential_second_derivative(nl, params, well.u_plus)),
        )
        self.d3 = (
            float(nl.fsecond(well.u_minus)),
            float(nl.fsecond(well.u_plus)),
        )
        f3_scale = tuple(
            max(abs(f2) / (1.0 + well.width), 1e-8 / (1.0 + well.width) ** 2)
            for f2 in self.d3
        )
        # cap at a quarter width so the two endpoint zones never overlap
        # (microscopic wells would otherwise be swallowed whole)
        self.dstar = tuple(
            min((24.0 * _EPS * self.scale / f3) ** 0.25, 0.25 * well.width)
            for f3 in f3_scale
        )

    def __call__(self, u: np.ndarray) -> np.ndarray:
        well = self.well
        params = well.params
        y = np.asarray(params.E - potential(well.nl, params, u), dtype=float)
        s_minus, s_plus = well.root_slopes  # d(E-W)/du at u-, u+ (signs +, -)
        d_minus = u - well.u_minus
        d_plus = well.u_plus - u
        model_minus = d_minus * (
            s_minus - d_minus * (0.5 * self.d2[0] + self.d3[0] / 6.0 * d_minus)
        )
        model_plus = d_plus * (
            (-s_plus) - d_plus * (0.5 * self.d2[1] - self.d3[1] / 6.0 * d_plus)
        )
        y = np.where(d_minus < self.dstar[0], model_minus, y)
        y = np.where(d_plus < self.dstar[1], model_plus, y)
        return np.maximum(y, 1e-300)


def abelian_integrals(
    well: PotentialWell,
    numerators: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]],
    rtol: float = 1e-12,
) -> tuple[dict[str, float], dict[str, float]]:
    """Evaluate I[n_j] for every numerator n_j(u, y) over one well.

    All numerators share nodes; the Gauss rule is doubled from 200 points
    until every component changes by less than rtol relative to
    max(|value|, 0.1 * integral of |integrand|).  A roundoff plateau (the
    change stops shrinking at a tiny level) is accepted with the achieved
    error recorded.  Returns (values, error_estimates).
    """
    width = well.width
    names = list(numerators)
    margin = _Margin(well)
    prev = None
    prev_errs = None
    n = _N0
    for _ in range(_MAX_DOUBLINGS + 1):
        x, w = _gl_nodes(n)
        theta = 0.25 * np.pi * (x + 1.0)
        u = well.u_minus + width * np.sin(theta) ** 2
        y = margin(u)
        base = width * np.sin(2.0 * theta) / np.sqrt(2.0 * y)
        vals = {}
        denom = {}
        for name in names:
            g = numerators[name](u, y) * base
            # factor 2 from the two monotone half-orbits, pi/4 from theta mapping
            vals[name] = 2.0 * 0.25 * np.pi * float(np.dot(w, g))
            mag = 2.0 * 0.25 * np.pi * float(np.dot(w, np.abs(g)))
            denom[name] = max(abs(vals[name]), 0.1 * mag, 1e-300)
        if prev is not None:
            errs = {k: abs(vals[k] - prev[k]) for k in names}
            if all(errs[k] <= rtol * denom[k] for k in names):
                return vals, errs
            if (
                prev_errs is not None
                and n >= 4 * _N0
                and all(errs[k] >= 0.5 * prev_errs[k] for k in names)
                and all(prev_errs[k] <= 1e-7 * denom[k] for k in names)
            ):
                # Change is no longer shrinking: roundoff plateau, not
                # truncation.  Noise grows with the node count, so keep the
                # previous (coarser) values.
                return prev, {k: errs[k] + prev_errs[k] for k in names}
            prev_errs = errs
        prev = vals
        n *= 2
    raise QuadratureNonconvergence(
        f"Abelian quadrature did not reach rtol={rtol:g} at {n // 2} nodes "
        f"for well [{well.u_minus:.6g}, {well.u_plus:.6g}]"
    )
