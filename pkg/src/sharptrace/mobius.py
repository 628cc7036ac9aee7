"""Conformal transfer between the upper half-space and the unit ball.

Points of the half-space chart are written X = (x, t) with t the last
coordinate; points of the ball chart are written xi.  The transfer map

    S(X) = 2 (X + e) / |X + e|^2 - e,        e = last unit vector,

is an involution of R^{d} minus the pole -e, maps {t > 0} onto the open
unit ball and {t = 0} onto the unit sphere minus {-e}.  All functions act
on the last axis of arrays of shape (..., d), so they vectorize over
arbitrary batches of points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BALL = "ball"
HALFSPACE = "halfspace"

# squared distance to the pole below which the map is treated as singular
POLE_TOL = 1e-28


class PolePointError(ZeroDivisionError):
    """Evaluation at (or numerically on top of) the pole -e of the chart map."""


class ChartDomainError(ValueError):
    """Point or parameter outside the domain of its chart."""


def _as_points(pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 0:
        raise ChartDomainError("points must have at least one coordinate axis")
    return pts


def sq_norm(pts) -> np.ndarray:
    pts = _as_points(pts)
    return np.einsum("...i,...i->...", pts, pts)


def plus_last_unit(pts) -> np.ndarray:
    out = np.array(_as_points(pts), copy=True)
    out[..., -1] += 1.0
    return out


def chart_map(pts) -> np.ndarray:
    """The involution S; same formula in both directions."""
    shifted = plus_last_unit(pts)
    denom = sq_norm(shifted)
    if np.any(denom < POLE_TOL):
        raise PolePointError("chart map evaluated at the pole -e")
    out = 2.0 * shifted / denom[..., None]
    out[..., -1] -= 1.0
    return out


def mobius_to_ball(X) -> np.ndarray:
    """Half-space point(s) (x, t) -> ball point(s) xi."""
    return chart_map(X)


def mobius_to_halfspace(xi) -> np.ndarray:
    """Ball point(s) xi -> half-space point(s) (x, t); pole at xi = -e."""
    return chart_map(xi)


def conformal_factor(pts) -> np.ndarray:
    """Pointwise scale factor 2 / |X + e|^2 of the chart map."""
    denom = sq_norm(plus_last_unit(pts))
    if np.any(denom < POLE_TOL):
        raise PolePointError("conformal factor evaluated at the pole -e")
    return 2.0 / denom


def omega_from_z(z0) -> np.ndarray:
    """Interior center omega0 in the ball for a boundary center z0, |z0| < 1.

    Algebraically omega0 = z0 (1 - sqrt(1 - |z0|^2)) / |z0|^2; the equivalent
    form z0 / (1 + sqrt(1 - |z0|^2)) is exact at z0 = 0, so no series branch
    is needed near the origin.
    """
    z0 = _as_points(z0)
    r2 = sq_norm(z0)
    if np.any(r2 >= 1.0):
        raise ChartDomainError("boundary center must satisfy |z0| < 1")
    return z0 / (1.0 + np.sqrt(1.0 - r2))[..., None]


def z_from_omega(omega0) -> np.ndarray:
    """Inverse of omega_from_z: z0 = 2 omega0 / (1 + |omega0|^2)."""
    omega0 = _as_points(omega0)
    r2 = sq_norm(omega0)
    if np.any(r2 >= 1.0):
        raise ChartDomainError("interior center must satisfy |omega0| < 1")
    return 2.0 * omega0 / (1.0 + r2)[..., None]


def omega_from_halfspace(a, lam) -> np.ndarray:
    """Ball center omega = S(a, lam) of the half-space bubble center (a, lam)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if lam <= 0.0:
        raise ChartDomainError("bubble scale lam must be positive")
    return mobius_to_ball(np.concatenate([a, [float(lam)]]))


def f_squared(xi, omega) -> np.ndarray:
    """F(xi, omega)^2 = |omega|^2 |xi|^2 - 2 omega.xi + 1.

    Polynomial form of | xi/|xi| - |xi| omega |^2; equals 1 at xi = 0 and
    |xi - omega|^2 on the unit sphere.  Vectorizes over xi.
    """
    xi = _as_points(xi)
    omega = np.asarray(omega, dtype=float)
    return sq_norm(omega) * sq_norm(xi) - 2.0 * np.einsum("...i,i->...", xi, omega) + 1.0


def identity_residual(a, lam, X) -> np.ndarray:
    """Residual of the bubble transfer identity

        lam / (|x - a|^2 + (t + lam)^2)
            = (1 - |omega|^2)/4 * |xi + e|^2 / F(xi, omega)^2

    with xi = S(X) and omega = S(a, lam).  Zero in exact arithmetic.
    """
    X = _as_points(X)
    a = np.asarray(a, dtype=float)
    x, t = X[..., :-1], X[..., -1]
    lhs = lam / (sq_norm(x - a) + (t + lam) ** 2)
    omega = omega_from_halfspace(a, lam)
    xi = mobius_to_ball(X)
    rhs = (1.0 - sq_norm(omega)) / 4.0 * sq_norm(plus_last_unit(xi)) / f_squared(xi, omega)
    return lhs - rhs


@dataclass(frozen=True)
class ChartPoint:
    """A point tagged with the chart it lives in."""

    chart: str
    coords: tuple

    def __post_init__(self):
        if self.chart not in (BALL, HALFSPACE):
            raise ChartDomainError(f"unknown chart {self.chart!r}")
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if len(coords) < 2:
            raise ChartDomainError("chart points need ambient dimension >= 2")
        arr = np.asarray(coords)
        if self.chart == HALFSPACE and arr[-1] < 0.0:
            raise ChartDomainError("half-space points require t >= 0")
        if self.chart == BALL and sq_norm(arr) > 1.0 + 1e-12:
            raise ChartDomainError("ball points require |xi| <= 1")

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def transfer(self) -> "ChartPoint":
        if self.chart == HALFSPACE:
            return ChartPoint(BALL, tuple(mobius_to_ball(self.array())))
        out = mobius_to_halfspace(self.array())
        # clip roundoff: boundary sphere points land exactly on t = 0
        if abs(out[-1]) < 1e-14:
            out[-1] = 0.0
        return ChartPoint(HALFSPACE, tuple(out))


@dataclass(frozen=True)
class CenterParams:
    """The three equivalent parametrizations of a bubble center.

    z0 is the boundary-sphere center (|z0| < 1 interpreted in the hyperplane
    coordinates), omega0 = z0 / (1 + sqrt(1 - |z0|^2)) the interior ball
    center, and (a, lam) the half-space center with omega0 = S(a, lam).
    """

    z0: tuple
    omega0: tuple

    @classmethod
    def from_z0(cls, z0) -> "CenterParams":
        z0 = np.atleast_1d(np.asarray(z0, dtype=float))
        return cls(tuple(z0), tuple(omega_from_z(z0)))

    @classmethod
    def from_omega(cls, omega0) -> "CenterParams":
        omega0 = np.atleast_1d(np.asarray(omega0, dtype=float))
        return cls(tuple(z_from_omega(omega0)), tuple(omega0))

    @classmethod
    def from_halfspace(cls, a, lam) -> "CenterParams":
        return cls.from_omega(omega_from_halfspace(a, lam))

    def omega_array(self) -> np.ndarray:
        return np.asarray(self.omega0, dtype=float)

    def z_array(self) -> np.ndarray:
        return np.asarray(self.z0, dtype=float)

    def halfspace_center(self):
        """(a, lam) with S(a, lam) = omega0; lam > 0 requires |omega0| < 1."""
        back = mobius_to_halfspace(self.omega_array())
        return back[:-1], back[-1]
