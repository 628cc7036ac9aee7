"""Finite-difference operators on scalar fields.

All operators act on batches of points (shape (..., d)) and evaluate the
field through vectorized shifted copies, so the cost is one field call per
stencil entry, not per point.  Stencil weights for arbitrary offsets come
from a Vandermonde solve; centered second-difference schemes of order 2 and
4 are precomputed.

Error model: a centered scheme of order p combined with ``richardson_levels``
extrapolation steps has truncation O(h^(p + 2*levels)) on smooth fields,
with roundoff growing like eps / h^2 per Laplacian application (eps / h^4
for the composed bilaplacian, which is why it uses a larger base step).
Halving h on a smooth benchmark reduces the raw scheme error by ~2^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .fields import ScalarField
from .mobius import BALL, HALFSPACE, sq_norm
from .quadrature import QuadRule


class StencilDomainError(ValueError):
    """A stencil would leave the domain (plus halo) the field is defined on."""


@dataclass(frozen=True)
class StencilConfig:
    h: float = 2e-3              # base step for Laplacian / gradient
    h_bilap: float = 5e-2        # base step for the composed bilaplacian
    h_one_sided: float = 1e-2    # one-sided first-derivative step (values)
    h_one_sided_delta: float = 2e-2  # one-sided step when differencing FD Laplacians
    scheme_order: int = 4        # 2 or 4
    richardson_levels: int = 1   # 0..3

    def __post_init__(self):
        if self.scheme_order not in (2, 4):
            raise ValueError("scheme_order must be 2 or 4")
        if not 0 <= self.richardson_levels <= 3:
            raise ValueError("richardson_levels must be in 0..3")


DEFAULT = StencilConfig()


def fd_weights(offsets, order: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j) ~ f^(order)(x) (unit step).

    Solved from the Vandermonde moment conditions; exact for polynomials of
    degree < len(offsets).
    """
    offsets = np.asarray(offsets, dtype=float)
    m = offsets.size
    if order >= m:
        raise ValueError("need more than `order` offsets")
    V = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


# centered second-derivative stencils: offset -> coefficient (unit step)
_CENTRAL_2ND = {
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    4: ((-2, -1.0 / 12.0), (-1, 4.0 / 3.0), (0, -5.0 / 2.0), (1, 4.0 / 3.0), (2, -1.0 / 12.0)),
}
# centered first-derivative stencils
_CENTRAL_1ST = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)),
}
# one-sided second derivative, order 4 (offsets 0..5)
_ONE_SIDED_2ND_OFFSETS = np.arange(6)
_ONE_SIDED_2ND = fd_weights(_ONE_SIDED_2ND_OFFSETS, 2)
_STENCIL_REACH = {2: 1, 4: 2}


def _richardson(estimates, p: int, order_step: int = 2) -> np.ndarray:
    """Extrapolate estimates at steps h, h/2, ... with leading error order p."""
    table = list(estimates)
    k = p
    while len(table) > 1:
        f = 2.0 ** k
        table = [(f * table[i + 1] - table[i]) / (f - 1.0) for i in range(len(table) - 1)]
        k += order_step
    return table[0]


def _needs_one_sided_t(field: ScalarField, pts: np.ndarray, reach: float) -> np.ndarray:
    if field.chart != HALFSPACE or field.halo >= reach:
        return np.zeros(pts.shape[:-1], dtype=bool)
    return pts[..., -1] - reach < -field.halo


def _check_ball_clearance(field: ScalarField, pts: np.ndarray, reach: float):
    if field.chart != BALL or not np.isfinite(field.halo):
        return
    r = np.sqrt(sq_norm(pts))
    if np.any(r + reach > 1.0 + field.halo):
        raise StencilDomainError(
            f"stencil of reach {reach} exceeds the smooth halo of {field.label}"
        )


def _shift(pts: np.ndarray, axis: int, delta: float) -> np.ndarray:
    out = np.array(pts, copy=True)
    out[..., axis] += delta
    return out


def _second_diff_sum(field: ScalarField, pts: np.ndarray, h: float, order: int) -> np.ndarray:
    """Sum over axes of the centered second difference; one-sided in t where
    the half-space halo would be crossed."""
    d = pts.shape[-1]
    stencil = _CENTRAL_2ND[order]
    reach = _STENCIL_REACH[order] * h
    _check_ball_clearance(field, pts, reach)
    one_sided = _needs_one_sided_t(field, pts, reach)
    mixed = bool(np.any(one_sided))
    center = field(pts)
    acc = np.zeros(np.broadcast_shapes(pts.shape[:-1], center.shape))
    for axis in range(d - 1):
        for off, coeff in stencil:
            acc = acc + coeff * (center if off == 0 else field(_shift(pts, axis, off * h)))
    if not mixed:
        for off, coeff in stencil:
            acc = acc + coeff * (center if off == 0 else field(_shift(pts, d - 1, off * h)))
    else:
        central_t = np.zeros_like(acc)
        for off, coeff in stencil:
            if off == 0:
                vals = center
            else:
                shifted = _shift(pts, d - 1, off * h)
                # keep flagged rows in-domain; their centered values are discarded
                vals = field(np.where(one_sided[..., None], pts, shifted))
            central_t = central_t + coeff * vals
        onesided_t = np.zeros_like(acc)
        for off, coeff in zip(_ONE_SIDED_2ND_OFFSETS, _ONE_SIDED_2ND):
            if off == 0:
                vals = center
            else:
                shifted = _shift(pts, d - 1, off * h)
                vals = field(np.where(one_sided[..., None], shifted, pts))
            onesided_t = onesided_t + coeff * vals
        acc = acc + np.where(one_sided, onesided_t, central_t)
    return acc / (h * h)


def laplacian(field: ScalarField, pts, cfg: StencilConfig = DEFAULT, h: float | None = None) -> np.ndarray:
    """Centered-difference Laplacian with Richardson extrapolation."""
    pts = np.asarray(pts, dtype=float)
    h0 = cfg.h if h is None else h
    estimates = [
        _second_diff_sum(field, pts, h0 / 2 ** i, cfg.scheme_order)
        for i in range(cfg.richardson_levels + 1)
    ]
    return _richardson(estimates, cfg.scheme_order)


def laplacian_field(field: ScalarField, cfg: StencilConfig = DEFAULT, h: float | None = None) -> ScalarField:
    """The FD Laplacian wrapped as a field (used by composition and kernels)."""

    def fn(pts):
        return laplacian(field, pts, cfg, h=h)

    halo = field.halo
    if np.isfinite(halo):
        halo = max(halo - 2.0 * (cfg.h if h is None else h), 0.0)
    return ScalarField(field.chart, field.n, fn, f"lap({field.label})", halo=halo)


def bilaplacian(field: ScalarField, pts, cfg: StencilConfig = DEFAULT) -> np.ndarray:
    """Composed FD bilaplacian.

    Both Laplacian applications share the step h_bilap / 2^i on Richardson
    level i, so the composition has a clean h^4, h^6, ... error expansion.
    The larger default base step keeps the eps/h^4 roundoff floor near 1e-10.
    """
    pts = np.asarray(pts, dtype=float)
    estimates = []
    for i in range(cfg.richardson_levels + 1):
        hi = cfg.h_bilap / 2 ** i
        inner = replace(cfg, richardson_levels=0)

        def g(q, _h=hi, _inner=inner):
            return laplacian(field, q, _inner, h=_h)

        gf = ScalarField(field.chart, field.n, g, "inner", halo=field.halo)
        estimates.append(_second_diff_sum(gf, pts, hi, cfg.scheme_order))
    return _richardson(estimates, cfg.scheme_order)


def gradient(field: ScalarField, pts, cfg: StencilConfig = DEFAULT) -> np.ndarray:
    """Centered-difference gradient, shape (..., d)."""
    pts = np.asarray(pts, dtype=float)
    d = pts.shape[-1]
    stencil = _CENTRAL_1ST[cfg.scheme_order]
    out = np.empty(pts.shape)
    for axis in range(d):
        comps = []
        for i in range(cfg.richardson_levels + 1):
            h = cfg.h / 2 ** i
            acc = np.zeros(pts.shape[:-1])
            for off, coeff in stencil:
                shifted = np.array(pts, copy=True)
                shifted[..., axis] += off * h
                acc = acc + coeff * field(shifted)
            comps.append(acc / h)
        out[..., axis] = _richardson(comps, cfg.scheme_order)
    return out


ETA_V = "eta_v"
ETA_DELTA_V = "eta_delta_v"
DT_U = "dt_u"
DT_DELTA_U = "dt_delta_u"


def boundary_normal(field: ScalarField, pts, kind: str, cfg: StencilConfig = DEFAULT) -> np.ndarray:
    """One-sided boundary derivatives.

    ``eta_v`` / ``eta_delta_v``: outward radial derivative of the field / of
    its FD Laplacian at unit-sphere points, via a 5-point stencil along the
    inward ray.  ``dt_u`` / ``dt_delta_u``: the same along +t at t = 0 points
    of the half-space.
    """
    pts = np.asarray(pts, dtype=float)
    if kind in (ETA_V, ETA_DELTA_V):
        if field.chart != BALL:
            raise StencilDomainError("eta derivatives require a ball field")
        h = cfg.h_one_sided if kind == ETA_V else cfg.h_one_sided_delta
        offsets = -h * np.arange(5)
        weights = fd_weights(offsets, 1)
        target = field if kind == ETA_V else laplacian_field(field, cfg)
        acc = np.zeros(pts.shape[:-1])
        for off, w in zip(offsets, weights):
            acc = acc + w * target(pts * (1.0 + off))
        return acc
    if kind in (DT_U, DT_DELTA_U):
        if field.chart != HALFSPACE:
            raise StencilDomainError("dt derivatives require a half-space field")
        h = cfg.h_one_sided if kind == DT_U else cfg.h_one_sided_delta
        offsets = h * np.arange(5)
        weights = fd_weights(offsets, 1)
        target = field if kind == DT_U else laplacian_field(field, cfg)
        acc = np.zeros(pts.shape[:-1])
        for off, w in zip(offsets, weights):
            shifted = np.array(pts, copy=True)
            shifted[..., -1] += off
            acc = acc + w * target(shifted)
        return acc
    raise ValueError(f"unknown boundary derivative kind {kind!r}")


def _homogeneous(field: ScalarField) -> ScalarField:
    def fn(pts):
        r = np.sqrt(sq_norm(pts))[..., None]
        return field(pts / r)

    return ScalarField(BALL, field.n, fn, f"homog({field.label})", halo=np.inf)


def tangential_laplacian(boundary_field: ScalarField, pts, cfg: StencilConfig = DEFAULT) -> np.ndarray:
    """Sphere Laplacian at unit-sphere points via the ambient Laplacian of
    the degree-0 homogeneous extension."""
    return laplacian(_homogeneous(boundary_field), pts, cfg)


def tangential_gradient_sq(boundary_field: ScalarField, pts, cfg: StencilConfig = DEFAULT) -> np.ndarray:
    """|tangential gradient|^2 at unit-sphere points.  The homogeneous
    extension has zero radial derivative, so its ambient gradient is the
    tangential one."""
    g = gradient(_homogeneous(boundary_field), pts, cfg)
    return np.einsum("...i,...i->...", g, g)


def sphere_average(field: ScalarField, center, radius: float, rule: QuadRule) -> float:
    """Mean of the field over the sphere of given center and radius."""
    center = np.asarray(center, dtype=float)
    vals = field(center + radius * rule.nodes)
    if np.any(np.isnan(vals)):
        raise StencilDomainError("field singular on the averaging sphere")
    return float(np.dot(vals, rule.weights) / rule.weights.sum())
