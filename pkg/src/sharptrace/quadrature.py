"""Deterministic quadrature rules and integration helpers.

Rules are plain node/weight tables:

* ``gauss_legendre``        interval [-1, 1] (or mapped to [a, b]),
* ``sphere_rule``           unit sphere S^n, a product of Gauss polar rules
  with the exact latitude weight (1 - s^2)^{(n-2)/2} and an equispaced
  base circle, so smooth integrands converge spectrally and the total
  weight is |S^n| to machine precision,
* ``ball_rule``             radial Gauss-Legendre with weight r^n times a
  sphere rule,
* ``compactified_euclidean`` / ``compactified_halfspace``   radial maps
  r = scale * tan(s) so no truncation radius is introduced.

``integrate`` evaluates a vectorized integrand at all nodes in fixed order
and reduces with ``math.fsum`` (exactly rounded), which makes every
integral bit-reproducible run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

TWO_PI = 2.0 * math.pi


class SingularNodeError(ArithmeticError):
    """An integrand signalled a singular point (NaN) at a quadrature node."""


class ConvergenceFailure(ArithmeticError):
    """Refined and coarse evaluations of an integral disagree beyond tolerance."""


@dataclass(frozen=True)
class QuadRule:
    """Nodes (N, d) or (N,), positive weights (N,), and a domain tag."""

    domain: str
    nodes: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nodes.shape[0] != self.weights.shape[0]:
            raise ValueError("node/weight count mismatch")
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")

    @property
    def count(self) -> int:
        return self.nodes.shape[0]

    def total_weight(self) -> float:
        return math.fsum(self.weights)


def surface_area(n: int) -> float:
    """|S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def ball_volume(n: int) -> float:
    """Volume of the unit ball B^{n+1}."""
    return surface_area(n) / (n + 1)


def gauss_legendre(m: int, a: float = -1.0, b: float = 1.0) -> QuadRule:
    """m-point Gauss-Legendre rule mapped to [a, b]."""
    if m < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(m)
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    return QuadRule("interval", nodes, w * half, {"m": m, "a": a, "b": b})


def _polar_rule(n: int, m: int):
    """Gauss nodes/weights for int_{-1}^{1} g(s) (1 - s^2)^{(n-2)/2} ds.

    This is the latitude factor of S^n; a Gauss-Jacobi rule integrates the
    weight exactly, which plain Gauss-Legendre in cos(theta) cannot do for
    odd n - 2 at the 1e-10 level the rule contracts demand.
    """
    alpha = 0.5 * (n - 2)
    s, w = roots_jacobi(m, alpha, alpha)
    return s, w


def sphere_rule(n: int, res: int) -> QuadRule:
    """Product rule on S^n in R^{n+1}; exact total weight |S^n|.

    Recursive structure S^n = latitude x S^{n-1} with the point pair S^0 as
    base, so S^1 comes out as 2*res equispaced angles.  Node layout:
    xi = (sqrt(1 - s^2) * sigma, s) with sigma from the S^{n-1} rule.
    """
    if n < 0:
        raise ValueError("sphere dimension must be >= 0")
    if n == 0:
        nodes = np.array([[-1.0], [1.0]])
        weights = np.array([1.0, 1.0])
        return QuadRule("sphere", nodes, weights, {"n": 0, "res": res})
    sub = sphere_rule(n - 1, res)
    s, w = _polar_rule(n, res)
    sin_t = np.sqrt(np.maximum(1.0 - s * s, 0.0))
    nodes = np.empty((res * sub.count, n + 1))
    nodes[:, :n] = np.repeat(sin_t, sub.count)[:, None] * np.tile(sub.nodes, (res, 1))
    nodes[:, n] = np.repeat(s, sub.count)
    weights = np.repeat(w, sub.count) * np.tile(sub.weights, res)
    return QuadRule("sphere", nodes, weights, {"n": n, "res": res})


def ball_rule(n: int, res_radial: int, res_sphere: int) -> QuadRule:
    """Rule for the unit ball B^{n+1}: radial Gauss-Legendre with the exact
    polynomial weight r^n folded in, times ``sphere_rule(n, res_sphere)``."""
    radial = gauss_legendre(res_radial, 0.0, 1.0)
    sphere = sphere_rule(n, res_sphere)
    r = radial.nodes
    wr = radial.weights * r ** n
    nodes = r[:, None, None] * sphere.nodes[None, :, :]
    weights = wr[:, None] * sphere.weights[None, :]
    return QuadRule(
        "ball",
        nodes.reshape(-1, n + 1),
        weights.reshape(-1),
        {"n": n, "res_radial": res_radial, "res_sphere": res_sphere},
    )


def _tan_radial(res: int, scale: float, s_lo: float = 0.0):
    """Nodes/weights of r = scale * tan(s) on [s_lo, pi/2): returns (r, w)
    with w containing the Jacobian scale * sec^2(s)."""
    rule = gauss_legendre(res, s_lo, 0.5 * math.pi)
    s = rule.nodes
    r = scale * np.tan(s)
    w = rule.weights * scale / np.cos(s) ** 2
    return r, w


def compactified_euclidean(
    dim: int,
    res_radial: int,
    res_sphere: int | None = None,
    center=None,
    scale: float = 1.0,
) -> QuadRule:
    """Rule for all of R^dim via r = scale * tan(s); no truncation radius.

    ``center`` recentres the rule, which callers use to resolve kernels
    concentrated near a target point.
    """
    if res_sphere is None:
        res_sphere = res_radial
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    r, wr = _tan_radial(res_radial, scale)
    if dim == 1:
        nodes = np.concatenate([-r[::-1], r])[:, None]
        weights = np.concatenate([wr[::-1], wr])
    else:
        sphere = sphere_rule(dim - 1, res_sphere)
        nodes = r[:, None, None] * sphere.nodes[None, :, :]
        weights = (wr * r ** (dim - 1))[:, None] * sphere.weights[None, :]
        nodes = nodes.reshape(-1, dim)
        weights = weights.reshape(-1)
    if center is not None:
        nodes = nodes + np.asarray(center, dtype=float)
    return QuadRule(
        "euclidean",
        nodes,
        weights,
        {"dim": dim, "res_radial": res_radial, "res_sphere": res_sphere, "scale": scale},
    )


def _half_polar_rule(n: int, m: int):
    """Gauss nodes/weights for int_0^1 g(s) (1 - s^2)^{(n-2)/2} ds.

    Gauss-Jacobi on the (1 - s)^{(n-2)/2} factor; the smooth (1 + s) factor
    is folded into the weights.
    """
    alpha = 0.5 * (n - 2)
    x, w = roots_jacobi(m, alpha, 0.0)
    s = 0.5 * (x + 1.0)
    w = w * 0.5 ** (alpha + 1.0) * (1.0 + s) ** alpha
    return s, w


def compactified_halfspace(
    n: int,
    res_radial: int,
    res_polar: int | None = None,
    res_sphere: int | None = None,
    center=None,
    scale: float = 1.0,
) -> QuadRule:
    """Rule for the upper half-space R^{n+1}_+ (boundary dimension n).

    Radial tan map times the upper half of the S^n product rule (polar
    cosine restricted to (0, 1]).  ``center`` shifts the rule in the
    boundary variables only, keeping {t > 0} intact.
    """
    if res_polar is None:
        res_polar = res_radial
    if res_sphere is None:
        res_sphere = res_radial
    rho, w_rho = _tan_radial(res_radial, scale)
    s, ws = _half_polar_rule(n, res_polar)
    sub = sphere_rule(n - 1, res_sphere)
    sin_t = np.sqrt(1.0 - s * s)
    # upper half-sphere nodes
    half_nodes = np.empty((res_polar * sub.count, n + 1))
    half_nodes[:, :n] = np.repeat(sin_t, sub.count)[:, None] * np.tile(sub.nodes, (res_polar, 1))
    half_nodes[:, n] = np.repeat(s, sub.count)
    half_weights = np.repeat(ws, sub.count) * np.tile(sub.weights, res_polar)
    nodes = rho[:, None, None] * half_nodes[None, :, :]
    weights = (w_rho * rho ** n)[:, None] * half_weights[None, :]
    nodes = nodes.reshape(-1, n + 1)
    weights = weights.reshape(-1)
    if center is not None:
        shift = np.zeros(n + 1)
        shift[:n] = np.asarray(center, dtype=float)
        nodes = nodes + shift
    return QuadRule(
        "halfspace",
        nodes,
        weights,
        {
            "n": n,
            "res_radial": res_radial,
            "res_polar": res_polar,
            "res_sphere": res_sphere,
            "scale": scale,
        },
    )


_CHUNK = 1 << 19


def _weighted_values(rule: QuadRule, f, allow_nonfinite: bool) -> list:
    """Evaluate f at all nodes in fixed chunks; returns per-chunk weighted sums
    of a compensated reduction.  NaN values are treated as a singularity signal."""
    parts = []
    for lo in range(0, rule.count, _CHUNK):
        hi = min(lo + _CHUNK, rule.count)
        vals = np.asarray(f(rule.nodes[lo:hi]), dtype=float)
        if vals.shape != (hi - lo,):
            raise ValueError("integrand must return one value per node")
        if np.any(np.isnan(vals)):
            raise SingularNodeError("integrand signalled a singular node")
        if not allow_nonfinite and not np.all(np.isfinite(vals)):
            raise SingularNodeError("integrand returned a non-finite value")
        parts.append(vals * rule.weights[lo:hi])
    return parts


def integrate(rule: QuadRule, f, allow_nonfinite: bool = False) -> float:
    """Weighted sum of ``f`` over the rule, reduced by exact summation in a
    fixed node order (bit-reproducible).  ``f`` receives node blocks of shape
    (m, d) (or (m,) for interval rules) and must return (m,) values."""
    parts = _weighted_values(rule, f, allow_nonfinite)
    return math.fsum(math.fsum(p) for p in parts)


def integrate_pair(make_rule, f, res: int, refine: float = 1.5, allow_nonfinite: bool = False):
    """Integral at resolution ``res`` and at ``ceil(refine * res)``.

    Returns (coarse, fine, rel_gap); callers use the pair both for
    convergence reporting and for divergence detection.
    """
    coarse = integrate(make_rule(res), f, allow_nonfinite)
    fine = integrate(make_rule(int(math.ceil(refine * res))), f, allow_nonfinite)
    denom = max(abs(coarse), abs(fine), 1e-300)
    rel_gap = abs(fine - coarse) / denom
    return coarse, fine, rel_gap


def _log_kernel_rules(x, t, split_radius, res_near, res_far, res_sphere):
    x = np.asarray(x, dtype=float)
    sphere = sphere_rule(x.size - 1, res_sphere)
    near_r = gauss_legendre(res_near, 0.0, split_radius)
    r_far, w_far = _tan_radial(res_far, 1.0, math.atan(split_radius))
    r = np.concatenate([near_r.nodes, r_far])
    wr = np.concatenate([near_r.weights, w_far]) * r ** (x.size - 1)
    return sphere, r, wr


def log_kernel_integrate(
    density,
    target,
    res_near: int = 48,
    res_far: int = 64,
    res_sphere: int = 24,
    split_radius: float = 1.0,
) -> float:
    """v(x, t) = (1/|S^3|) int_{R^3} density(y) log(|y|^2 / (|x-y|^2 + t^2)) dy.

    Spherical coordinates about x: radius [0, split_radius] by Gauss-Legendre
    (the log factor at t = 0 is integrable there) and [split_radius, inf) by
    the tan map.  ``target`` may be a single point (x, t) of shape (4,) or a
    batch (T, 4); the kernel is evaluated with |x - y| = r taken exactly from
    the radial variable, so there is no cancellation near the target.
    """
    target = np.asarray(target, dtype=float)
    single = target.ndim == 1
    targets = target[None, :] if single else target
    dim = targets.shape[1] - 1
    sphere, r, wr = _log_kernel_rules(
        np.zeros(dim), 0.0, split_radius, res_near, res_far, res_sphere
    )
    # offsets (R, S, dim) shared by every target; weights (R, S)
    offsets = r[:, None, None] * sphere.nodes[None, :, :]
    weights = wr[:, None] * sphere.weights[None, :]
    out = np.empty(targets.shape[0])
    for i, tg in enumerate(targets):
        x, t = tg[:dim], tg[dim]
        y = offsets + x
        rho = np.asarray(density(y.reshape(-1, dim)), dtype=float).reshape(offsets.shape[:2])
        if np.any(np.isnan(rho)):
            raise SingularNodeError("density signalled a singular node")
        log_ratio = np.log(np.einsum("rsi,rsi->rs", y, y)) - np.log(
            r[:, None] ** 2 + t * t
        )
        out[i] = math.fsum((weights * rho * log_ratio).ravel())
    out /= surface_area(dim)
    return float(out[0]) if single else out
