"""Closed-form solution families on the ball and the half-space.

Every family is packaged as a :class:`ScalarField`: a vectorized evaluator
over point arrays of shape (..., n+1) tagged with its chart and boundary
dimension.  The evaluators are plain formulas, valid on an open neighborhood
of the closed chart (the ``halo``), which lets finite differences use
centered stencils on and slightly across the boundary.

Families
--------
* ``boundary_extremal``       trace data on S^n: -log|1 - <z0, xi>| in the
  logarithmic cases (order 2 / n = 1 and order 4 / n = 3), else the power
  |1 - <z0, xi>|^{(1-n)/2} (order 2) or |1 - <z0, xi>|^{(3-n)/2} (order 4).
* ``harmonic_extension``      second-order extremal extension into the ball.
* ``biharmonic_extension``    fourth-order extremal extension into the ball.
* ``halfspace_solution``      u(x,t) = log(2 lam / ((lam+t)^2 + |x-a|^2))
                              + 2 t lam / ((lam+t)^2 + |x-a|^2) + c t^2, n = 3.
* ``t_cubed_solution``        (2/3) t^3, the finite-free solution of the same
                              boundary system.
* ``sun_solution``            the n > 3 bubble with linear-in-t correction.
* ``transfer_field``          conformal transfer between the two charts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import mobius
from .mobius import BALL, HALFSPACE, ChartDomainError, sq_norm


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on one chart, evaluated on (..., n+1) point arrays.

    ``halo`` is the margin beyond the closed chart on which the formula is
    still smooth (radially for the ball, below t = 0 for the half-space).
    Evaluators return NaN at singular points instead of a large float.
    """

    chart: str
    n: int
    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    halo: float = 0.0
    meta: dict = field(default_factory=dict)

    def __call__(self, pts) -> np.ndarray:
        return self.fn(np.asarray(pts, dtype=float))

    def with_label(self, label: str) -> "ScalarField":
        return replace(self, label=label)


def constant_field(chart: str, n: int, value: float) -> ScalarField:
    def fn(pts):
        return np.full(pts.shape[:-1], float(value))

    return ScalarField(chart, n, fn, f"const({value})", halo=np.inf)


def _check_center(n: int, z0=None, omega0=None) -> np.ndarray:
    if omega0 is None:
        omega0 = mobius.omega_from_z(np.asarray(z0, dtype=float))
    omega0 = np.asarray(omega0, dtype=float)
    if omega0.shape != (n + 1,):
        raise ChartDomainError(f"center must have n+1 = {n + 1} components")
    if sq_norm(omega0) >= 1.0:
        raise ChartDomainError("center must lie in the open unit ball")
    return omega0


def boundary_extremal(order: int, n: int, z0) -> ScalarField:
    """Extremal trace data on S^n for the inequality of the given order."""
    if order not in (2, 4):
        raise ChartDomainError("order must be 2 or 4")
    if order == 2 and n < 1:
        raise ChartDomainError("order 2 requires n >= 1")
    if order == 4 and n < 3:
        raise ChartDomainError("order 4 requires n >= 3")
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (n + 1,):
        raise ChartDomainError(f"z0 must have n+1 = {n + 1} components")
    if sq_norm(z0) >= 1.0:
        raise ChartDomainError("z0 must satisfy |z0| < 1")
    log_case = (order == 2 and n == 1) or (order == 4 and n == 3)
    power = 0.5 * (1 - n) if order == 2 else 0.5 * (3 - n)

    def fn(pts):
        base = 1.0 - pts @ z0
        if log_case:
            return -np.log(np.abs(base))
        return np.abs(base) ** power

    label = f"f(order={order},n={n})"
    # smooth while <z0, xi> < 1, so well past the unit sphere
    halo = (1.0 / max(np.sqrt(sq_norm(z0)), 1e-9) - 1.0) * 0.9
    return ScalarField(BALL, n, fn, label, halo=min(halo, 1e6))


def _ball_halo(omega0: np.ndarray) -> float:
    # F^2 vanishes first at |xi| = 1/|omega0|
    w = math.sqrt(float(sq_norm(omega0)))
    if w < 1e-9:
        return 1e6
    return (1.0 / w - 1.0) * 0.9


def harmonic_extension(n: int, omega0=None, z0=None) -> ScalarField:
    """Harmonic extension of the order-2 extremal data into B^{n+1}.

    n = 1:   v = -log F^2(xi, omega0) + log(1 + |omega0|^2)
    n > 1:   v = (1 + |omega0|^2)^{(n-1)/2} F(xi, omega0)^{1-n}
    """
    omega0 = _check_center(n, z0=z0, omega0=omega0)
    w2 = float(sq_norm(omega0))

    if n == 1:
        shift = math.log1p(w2)

        def fn(pts):
            return -np.log(mobius.f_squared(pts, omega0)) + shift

    else:
        amp = (1.0 + w2) ** (0.5 * (n - 1))
        power = 0.5 * (1 - n)

        def fn(pts):
            return amp * mobius.f_squared(pts, omega0) ** power

    return ScalarField(BALL, n, fn, f"harmonic_ext(n={n})", halo=_ball_halo(omega0))


def biharmonic_extension(n: int, omega0=None, z0=None) -> ScalarField:
    """Biharmonic extension of the order-4 extremal data into B^{n+1}.

    n = 3:   v = -log F^2 + (1 - |xi|^2)/2 * [(1 - |omega0|^2)/F^2 - 1]
                 + log(1 + |omega0|^2)
    n > 3:   v = (1 + |omega0|^2)^{(n-3)/2} F^{3-n}
                 * [1 + (n-3)(1 - |omega0|^2)(1 - |xi|^2) / (4 F^2)]

    Satisfies Delta^2 v = 0, v = f on S^n and eta v = -(n-3)/2 f on S^n.
    """
    if n < 3:
        raise ChartDomainError("fourth-order extensions require n >= 3")
    omega0 = _check_center(n, z0=z0, omega0=omega0)
    w2 = float(sq_norm(omega0))

    if n == 3:
        shift = math.log1p(w2)

        def fn(pts):
            f2 = mobius.f_squared(pts, omega0)
            r2 = sq_norm(pts)
            return -np.log(f2) + 0.5 * (1.0 - r2) * ((1.0 - w2) / f2 - 1.0) + shift

    else:
        amp = (1.0 + w2) ** (0.5 * (n - 3))
        power = 0.5 * (3 - n)
        quarter = 0.25 * (n - 3) * (1.0 - w2)

        def fn(pts):
            f2 = mobius.f_squared(pts, omega0)
            r2 = sq_norm(pts)
            return amp * f2 ** power * (1.0 + quarter * (1.0 - r2) / f2)

    return ScalarField(BALL, n, fn, f"biharmonic_ext(n={n})", halo=_ball_halo(omega0))


@dataclass(frozen=True)
class HalfSpaceBubble:
    """Parameters (a, lam, c) of the logarithmic half-space family, n = 3."""

    a: tuple
    lam: float
    c: float = 0.0

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        object.__setattr__(self, "a", a)
        if self.lam <= 0.0:
            raise ChartDomainError("lam must be positive")


def halfspace_solution(params: HalfSpaceBubble) -> ScalarField:
    """u(x,t) = log(2 lam/D) + 2 t lam/D + c t^2 with D = (lam+t)^2 + |x-a|^2."""
    a = np.asarray(params.a, dtype=float)
    n = a.size
    lam, c = float(params.lam), float(params.c)

    def fn(pts):
        x, t = pts[..., :-1], pts[..., -1]
        D = (lam + t) ** 2 + sq_norm(x - a)
        return np.log(2.0 * lam / D) + 2.0 * t * lam / D + c * t * t

    label = f"u(a={params.a},lam={lam},c={c})"
    return ScalarField(HALFSPACE, n, fn, label, halo=0.9 * lam, meta={"params": params})


def t_cubed_solution(n: int = 3) -> ScalarField:
    """(2/3) t^3: solves the same boundary system with infinite volumes."""

    def fn(pts):
        return (2.0 / 3.0) * pts[..., -1] ** 3

    return ScalarField(HALFSPACE, n, fn, "two_thirds_t_cubed", halo=np.inf)


def sun_solution(n: int, a, lam: float, scale: float = 1.0) -> ScalarField:
    """The n > 3 half-space bubble

        U(x,t) = scale * (lam/D)^{(n-3)/2} [1 + (n-3) t lam / D],
        D = (lam+t)^2 + |x-a|^2.
    """
    if n <= 3:
        raise ChartDomainError("this family requires n > 3")
    a = np.asarray(a, dtype=float)
    if a.shape != (n,):
        raise ChartDomainError(f"a must have n = {n} components")
    if lam <= 0.0:
        raise ChartDomainError("lam must be positive")
    half = 0.5 * (n - 3)

    def fn(pts):
        x, t = pts[..., :-1], pts[..., -1]
        D = (lam + t) ** 2 + sq_norm(x - a)
        return scale * (lam / D) ** half * (1.0 + (n - 3) * t * lam / D)

    label = f"U(n={n},a={tuple(a)},lam={lam},scale={scale})"
    return ScalarField(HALFSPACE, n, fn, label, halo=0.9 * lam)


WEIGHT_POWER = "weight_power"
ADDITIVE_LOG = "additive_log"


def _to_halfspace_weight(v: ScalarField, power: float) -> Callable:
    def fn(pts):
        kappa = mobius.conformal_factor(pts)
        return v(mobius.mobius_to_ball(pts)) * kappa ** power

    return fn


def _to_ball_weight(u: ScalarField, power: float) -> Callable:
    def fn(pts):
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, pts.shape[-1])
        denom = sq_norm(mobius.plus_last_unit(flat))
        out = np.full(flat.shape[0], np.nan)
        ok = denom > 1e-14
        if np.any(ok):
            out[ok] = u(mobius.mobius_to_halfspace(flat[ok])) * (2.0 / denom[ok]) ** power
        return out.reshape(shape)

    return fn


def _to_halfspace_log(v: ScalarField) -> Callable:
    def fn(pts):
        x, t = pts[..., :-1], pts[..., -1]
        plus = sq_norm(x) + (t + 1.0) ** 2
        minus = sq_norm(x) + (t - 1.0) ** 2
        return v(mobius.mobius_to_ball(pts)) + 0.5 - 0.5 * minus / plus + np.log(2.0 / plus)

    return fn


def _to_ball_log(u: ScalarField) -> Callable:
    def fn(pts):
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, pts.shape[-1])
        denom = sq_norm(mobius.plus_last_unit(flat))
        out = np.full(flat.shape[0], np.nan)
        ok = denom > 1e-14
        if np.any(ok):
            good = flat[ok]
            out[ok] = (
                u(mobius.mobius_to_halfspace(good))
                - 0.5 * (1.0 - sq_norm(good))
                + np.log(2.0 / denom[ok])
            )
        return out.reshape(shape)

    return fn


def transfer_field(source: ScalarField, mode: str) -> ScalarField:
    """Conformal transfer of a field to the opposite chart.

    ``weight_power`` (n > 3): multiply by conformal_factor^{(n-3)/2};
    ``additive_log`` (n = 3): the logarithmic transfer with its quadratic
    correction term.  The two directions are exact inverses; ball-chart
    results are singular at the pole -e and return NaN there.
    """
    n = source.n
    if mode == WEIGHT_POWER:
        if n <= 3:
            raise ChartDomainError("weight_power transfer requires n > 3")
        power = 0.5 * (n - 3)
        if source.chart == BALL:
            fn, chart = _to_halfspace_weight(source, power), HALFSPACE
        else:
            fn, chart = _to_ball_weight(source, power), BALL
    elif mode == ADDITIVE_LOG:
        if n != 3:
            raise ChartDomainError("additive_log transfer requires n = 3")
        if source.chart == BALL:
            fn, chart = _to_halfspace_log(source), HALFSPACE
        else:
            fn, chart = _to_ball_log(source), BALL
    else:
        raise ChartDomainError(f"unknown transfer mode {mode!r}")
    halo = 0.05 if source.halo > 0 else 0.0
    return ScalarField(chart, n, fn, f"transfer[{mode}]({source.label})", halo=halo)


def restrict_to_sphere(v: ScalarField) -> ScalarField:
    """Trace of a ball field: evaluates v on xi/|xi| (degree-0 extension)."""

    def fn(pts):
        r = np.sqrt(sq_norm(pts))[..., None]
        return v(pts / r)

    return ScalarField(BALL, v.n, fn, f"trace({v.label})", halo=np.inf)
