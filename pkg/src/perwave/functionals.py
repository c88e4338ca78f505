"""Wave functionals T, M, P, H, K, their parameter gradients, and the
Jacobian instability indices.

For the gKdV family (m = 1, W = V):

    T = period,  M = int u dx,  P = int u^2 dx,
    H = int (u_x^2/2 - F(u)) dx,  K = int u_x^2 dx  (classical action).

For the gBBM family (m = c, W = G) the conserved quantities restricted to
traveling waves are used:

    M = int u dx,  P = (1/2) int (u^2 + u_x^2) dx,
    H = int (u^2/2 + F(u)) dx,  K = int u_x^2 dx.

Each functional is an Abelian integral over [u_minus, u_plus]; with a
profile in hand the same quantities are also grid quadratures, and the two
routes are cross-checked.  Gradients in (a, E, c) are Richardson-
extrapolated central differences of the Abelian route.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._quad import abelian_integrals
from .errors import MethodDisagreement, NoiseFloor, PerwaveError, StencilLeftOmega
from .models import (
    EquationFamily,
    Nonlinearity,
    WaveParams,
    find_turning_points,
)
from .profile import WaveProfile

__all__ = [
    "Functionals",
    "StepPolicy",
    "JacobianIndices",
    "Verdict1D",
    "TransverseVerdict",
    "functionals_at",
    "compute_functionals",
    "gradients",
    "jacobian2",
    "jacobian3",
    "indices_from",
    "indices_at",
    "classify",
]

_NAMES = ("T", "M", "P", "H", "K")
_PARAMS = ("a", "E", "c")


@dataclass
class Functionals:
    """Values (and optionally gradients) of T, M, P, H, K at one (a, E, c).

    errors maps quantity names ("T", ..., "grad_T_a", ..., "agreement_T",
    ...) to achieved error estimates.
    """

    T: float
    M: float
    P: float
    H: float
    K: float
    family: EquationFamily
    grad_T: tuple[float, float, float] | None = None
    grad_M: tuple[float, float, float] | None = None
    grad_P: tuple[float, float, float] | None = None
    grad_H: tuple[float, float, float] | None = None
    grad_K: tuple[float, float, float] | None = None
    errors: dict | None = None

    def value(self, name: str) -> float:
        return getattr(self, name)

    def grad(self, name: str) -> tuple[float, float, float]:
        g = getattr(self, "grad_" + name)
        if g is None:
            raise ValueError(f"gradients of {name} not computed")
        return g


@dataclass(frozen=True)
class StepPolicy:
    """Finite-difference policy for parameter gradients.

    base: step is base * (1 + |param|); central differences at (h, h/2,
    h/4) are Richardson-extrapolated twice.
    tol: relative tolerance on the extrapolated gradient (NoiseFloor guard).
    """

    base: float = 1e-4
    tol: float = 1e-6


def _numerators(nl: Nonlinearity, params: WaveParams):
    """Numerator callables n(u, y) for the five Abelian integrals."""
    if params.family is EquationFamily.GBBM_ZK:
        sc = np.sqrt(params.c)
        return {
            "T": lambda u, y: sc * np.ones_like(u),
            "M": lambda u, y: sc * u,
            "P": lambda u, y: 0.5 * sc * u**2 + y / sc,
            "H": lambda u, y: sc * (0.5 * u**2 + nl.F(u)),
            "K": lambda u, y: 2.0 * y / sc,
        }
    return {
        "T": lambda u, y: np.ones_like(u),
        "M": lambda u, y: u,
        "P": lambda u, y: u**2,
        "H": lambda u, y: y - nl.F(u),
        "K": lambda u, y: 2.0 * y,
    }


def functionals_at(
    nl: Nonlinearity,
    params: WaveParams,
    u_seed: float | None = None,
    rtol: float = 1e-12,
) -> Functionals:
    """T, M, P, H, K by regularized Abelian quadrature (no ODE solve)."""
    well = find_turning_points(nl, params, u_seed=u_seed)
    vals, errs = abelian_integrals(well, _numerators(nl, params), rtol=rtol)
    return Functionals(
        T=vals["T"],
        M=vals["M"],
        P=vals["P"],
        H=vals["H"],
        K=vals["K"],
        family=params.family,
        errors=dict(errs),
    )


def _grid_values(profile: WaveProfile) -> dict[str, float]:
    """The same five functionals as periodic-grid quadratures of the profile."""
    u, ux, T = profile.u, profile.u_x, profile.T
    nl = profile.well.nl

    def itrap(f):
        return float(np.trapezoid(f, dx=T / (len(u) - 1)))

    if profile.family is EquationFamily.GBBM_ZK:
        return {
            "T": T,
            "M": itrap(u),
            "P": 0.5 * itrap(u**2 + ux**2),
            "H": itrap(0.5 * u**2 + nl.F(u)),
            "K": itrap(ux**2),
        }
    return {
        "T": T,
        "M": itrap(u),
        "P": itrap(u**2),
        "H": itrap(0.5 * ux**2 - nl.F(u)),
        "K": itrap(ux**2),
    }


def compute_functionals(profile: WaveProfile, rtol: float = 1e-12) -> Functionals:
    """Functionals of a profile, computed two ways and cross-checked.

    The Abelian value is returned; grid values must agree to 1e-6 relative
    (MethodDisagreement otherwise), and the achieved agreement is recorded
    in errors["agreement_<name>"].
    """
    well = profile.well
    nl = well.nl
    vals, errs = abelian_integrals(well, _numerators(nl, well.params), rtol=rtol)
    grid = _grid_values(profile)
    errors = dict(errs)
    scale = max(abs(v) for v in vals.values()) + 1e-300
    for name in _NAMES:
        diff = abs(vals[name] - grid[name]) / max(abs(vals[name]), 0.1 * scale)
        errors["agreement_" + name] = diff
        if diff > 1e-6:
            raise MethodDisagreement(
                f"{name}: Abelian {vals[name]!r} vs grid {grid[name]!r} "
                f"(relative {diff:.3e})"
            )
    return Functionals(
        T=vals["T"],
        M=vals["M"],
        P=vals["P"],
        H=vals["H"],
        K=vals["K"],
        family=profile.family,
        errors=errors,
    )


def gradients(
    nl: Nonlinearity,
    params: WaveParams,
    policy: StepPolicy = StepPolicy(),
    u_seed: float | None = None,
) -> Functionals:
    """Functionals with d/d(a, E, c) filled by Richardson central differences.

    Every stencil point must stay in Omega (StencilLeftOmega otherwise);
    the same well branch is followed by seeding the turning-point search at
    the base well minimum.  NoiseFloor is raised when the Richardson error
    estimate exceeds policy.tol relative to max(|gradient|, 0.1 * dominant
    functional scale) -- gradients that are genuinely ~0 are not flagged.
    """
    base_well = find_turning_points(nl, params, u_seed=u_seed)
    seed = base_well.u_min_loc
    base = functionals_at(nl, params, u_seed=seed)

    grads = {name: [0.0, 0.0, 0.0] for name in _NAMES}
    errors = dict(base.errors or {})

    for ip, pname in enumerate(_PARAMS):
        p0 = getattr(params, pname)
        h = policy.base * (1.0 + abs(p0))
        stencil = {}
        for step in (h, -h, 0.5 * h, -0.5 * h, 0.25 * h, -0.25 * h):
            try:
                pp = params.replace(**{pname: p0 + step})
                stencil[step] = functionals_at(nl, pp, u_seed=seed)
            except (PerwaveError, ValueError) as exc:
                raise StencilLeftOmega(
                    f"stencil point {pname}={p0 + step!r} left Omega: {exc}"
                ) from exc
        scale_all = max(
            abs(f.value(n)) / (1.0 + abs(p0)) for f in stencil.values() for n in _NAMES
        )
        for name in _NAMES:
            # Central differences at h, h/2, h/4 and two Richardson levels;
            # |r2 - r1| measures the error of the value actually returned.
            d = [
                (stencil[s].value(name) - stencil[-s].value(name)) / (2.0 * s)
                for s in (h, 0.5 * h, 0.25 * h)
            ]
            r1 = (4.0 * d[1] - d[0]) / 3.0
            r2 = (4.0 * d[2] - d[1]) / 3.0
            rich = (16.0 * r2 - r1) / 15.0
            err = abs(r2 - r1) / 15.0 + 1e-14 * abs(rich)
            tol_scale = max(abs(rich), 0.1 * scale_all)
            if err > policy.tol * tol_scale:
                raise NoiseFloor(
                    f"d{name}/d{pname}: Richardson estimate {err:.3e} exceeds "
                    f"{policy.tol:g} * {tol_scale:.3e}"
                )
            grads[name][ip] = rich
            errors[f"grad_{name}_{pname}"] = err

    return Functionals(
        T=base.T,
        M=base.M,
        P=base.P,
        H=base.H,
        K=base.K,
        family=params.family,
        grad_T=tuple(grads["T"]),
        grad_M=tuple(grads["M"]),
        grad_P=tuple(grads["P"]),
        grad_H=tuple(grads["H"]),
        grad_K=tuple(grads["K"]),
        errors=errors,
    )


def jacobian2(fn: Functionals) -> float:
    """{T, M}_{a, E} = T_a M_E - T_E M_a."""
    Ta, TE, _ = fn.grad("T")
    Ma, ME, _ = fn.grad("M")
    return Ta * ME - TE * Ma


def jacobian3(fn: Functionals) -> float:
    """{T, M, P}_{a, E, c} = det of d(T, M, P)/d(a, E, c)."""
    J = np.array([fn.grad("T"), fn.grad("M"), fn.grad("P")])
    return float(np.linalg.det(J))


class Verdict1D(Enum):
    STABLE_CANDIDATE = "stable_candidate"
    UNSTABLE_1D = "unstable_1d"
    DEGENERATE = "degenerate"


class TransverseVerdict(Enum):
    UNSTABLE_LONGWAVE = "unstable_longwave"
    INCONCLUSIVE = "inconclusive"
    DEGENERATE = "degenerate"


@dataclass
class JacobianIndices:
    """The two instability indices plus the kinetic integral and verdicts."""

    J2: float
    J3: float
    kinetic: float
    tol_j2: float
    tol_j3: float
    verdict_1d: Verdict1D | None = None
    verdict_transverse: TransverseVerdict | None = None
    errors: dict | None = None


def indices_from(fn: Functionals) -> JacobianIndices:
    """Jacobian indices from an already-computed gradient table.

    Sign tolerances are 1e-7 times a Hadamard-type scale built from the
    gradient vectors, so verdicts are never read off of noise.
    """
    J2 = jacobian2(fn)
    J3 = jacobian3(fn)
    gT, gM, gP = (np.array(fn.grad(n)) for n in ("T", "M", "P"))
    scale2 = np.hypot(gT[0], gT[1]) * np.hypot(gM[0], gM[1])
    scale3 = np.linalg.norm(gT) * np.linalg.norm(gM) * np.linalg.norm(gP)
    idx = JacobianIndices(
        J2=J2,
        J3=J3,
        kinetic=fn.K,
        tol_j2=1e-7 * (scale2 + 1e-300),
        tol_j3=1e-7 * (scale3 + 1e-300),
        errors=fn.errors,
    )
    return classify(idx)


def indices_at(
    nl: Nonlinearity,
    params: WaveParams,
    policy: StepPolicy = StepPolicy(),
    u_seed: float | None = None,
) -> JacobianIndices:
    """Compute J2 = {T,M}_{a,E}, J3 = {T,M,P}_{a,E,c}, and classify."""
    return indices_from(gradients(nl, params, policy=policy, u_seed=u_seed))


def classify(indices: JacobianIndices) -> JacobianIndices:
    """Fill the verdict fields from the signs of J2, J3.

    One-dimensional: UNSTABLE_1D iff J3 < -tol.  Transverse long-wave:
    UNSTABLE_LONGWAVE iff J3 > tol and J2 > tol; INCONCLUSIVE when J2 < -tol
    with J3 > tol (the index carries no information there); DEGENERATE when
    either index sits inside its tolerance band or the wave is already
    one-dimensionally unstable (the long-wave criterion does not apply).
    """
    J2, J3 = indices.J2, indices.J3
    t2, t3 = indices.tol_j2, indices.tol_j3
    if J3 < -t3:
        indices.verdict_1d = Verdict1D.UNSTABLE_1D
    elif J3 > t3:
        indices.verdict_1d = Verdict1D.STABLE_CANDIDATE
    else:
        indices.verdict_1d = Verdict1D.DEGENERATE

    if J3 > t3 and J2 > t2:
        indices.verdict_transverse = TransverseVerdict.UNSTABLE_LONGWAVE
    elif J3 > t3 and J2 < -t2:
        indices.verdict_transverse = TransverseVerdict.INCONCLUSIVE
    else:
        indices.verdict_transverse = TransverseVerdict.DEGENERATE
    return indices
