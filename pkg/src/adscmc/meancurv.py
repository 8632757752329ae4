"""Finite-difference curvature of spacelike surfaces in the quadric model.

A surface is a map F(u, v) into the quadric (Q = -1).  The future unit
normal n is the Q-orthocomplement of span{F, F_u, F_v}, oriented by the
global time orientation (core.future_reference).  The second fundamental
form is evaluated against the flat second derivatives of the embedding,

    II_ab = 2 B_Q(n, F_ab),

which carries the package-wide curvature convention: II is the unpolarized
symmetrization -g(grad_X n, Y) - g(grad_Y n, X), i.e. twice the eigenvalues
of the Weingarten map.  The mean curvature is the metric trace
H = g^{ab} II_ab; a totally geodesic plane has H = 0 and the constant-angle
torus orbits have H = -4 cot(2 theta).
"""

from __future__ import annotations

import numpy as np

from .core import b_eval, future_reference, G_METRIC
from .errors import NotSpacelikeHere

# Default stencil width for finite differences on analytic surfaces.
DEFAULT_STENCIL = 1e-3


def det3(a, b, c) -> np.ndarray:
    """Determinant of rows a, b, c (batched over leading axes, last axis 3)."""
    return (
        a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
        - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
        + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
    )


def cross4(u, v, w) -> np.ndarray:
    """Generalized cross product: z with z . x = det([x; u; v; w])."""
    cols = []
    idx = [0, 1, 2, 3]
    for i in range(4):
        keep = [j for j in idx if j != i]
        m = det3(u[..., keep], v[..., keep], w[..., keep])
        cols.append(m if i % 2 == 0 else -m)
    return np.stack(cols, axis=-1)


def future_unit_normal(f0, fu, fv):
    """Future unit timelike normal of the surface element (f0; fu, fv).

    Raises NotSpacelikeHere when the orthocomplement fails to be timelike
    (i.e. the tangent plane is not spacelike).
    """
    z = cross4(f0, fu, fv)
    n = z @ G_METRIC  # B_Q(n, x) = z . x = 0 for x in {f0, fu, fv}
    qn = np.asarray(b_eval(n, n))
    if np.any(qn >= 0.0):
        raise NotSpacelikeHere("tangent plane is not spacelike")
    n = n / np.sqrt(-qn)[..., None]
    flip = np.asarray(b_eval(n, future_reference(f0))) > 0.0
    n = np.where(flip[..., None], -n, n)
    return n


def surface_jet(f, u, v, h: float = DEFAULT_STENCIL):
    """Second-order jet of a parametric surface by central differences.

    f maps batched (u, v) arrays to (..., 4) quadric points.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    f0 = f(u, v)
    fpu, fmu = f(u + h, v), f(u - h, v)
    fpv, fmv = f(u, v + h), f(u, v - h)
    fpp, fpm = f(u + h, v + h), f(u + h, v - h)
    fmp, fmm = f(u - h, v + h), f(u - h, v - h)
    return {
        "f0": f0,
        "fu": (fpu - fmu) / (2 * h),
        "fv": (fpv - fmv) / (2 * h),
        "fuu": (fpu - 2 * f0 + fmu) / h**2,
        "fvv": (fpv - 2 * f0 + fmv) / h**2,
        "fuv": (fpp - fpm - fmp + fmm) / (4 * h**2),
    }


def mean_curvature_from_jet(jet, nan_on_invalid: bool = False) -> np.ndarray:
    """Metric trace of the second fundamental form from a surface jet.

    Non-spacelike nodes raise NotSpacelikeHere, or become NaN entries
    when nan_on_invalid is set (matching the compiled kernel behavior).
    """
    f0, fu, fv = jet["f0"], jet["fu"], jet["fv"]
    g11 = np.asarray(b_eval(fu, fu))
    g22 = np.asarray(b_eval(fv, fv))
    g12 = np.asarray(b_eval(fu, fv))
    det_g = g11 * g22 - g12**2
    z = cross4(f0, fu, fv)
    n = z @ G_METRIC
    qn = np.asarray(b_eval(n, n))
    bad = (g11 <= 0) | (det_g <= 0) | (qn >= 0)
    if np.any(bad):
        if not nan_on_invalid:
            raise NotSpacelikeHere("induced metric is not positive definite")
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.sqrt(np.where(qn < 0, -qn, np.nan))
        n = n / scale[..., None]
        flip = np.asarray(b_eval(n, future_reference(f0))) > 0.0
        n = np.where(flip[..., None], -n, n)
        ii11 = 2.0 * b_eval(n, jet["fuu"])
        ii22 = 2.0 * b_eval(n, jet["fvv"])
        ii12 = 2.0 * b_eval(n, jet["fuv"])
        h = (g22 * ii11 - 2.0 * g12 * ii12 + g11 * ii22) / det_g
    return np.where(bad, np.nan, h) if np.ndim(h) else (np.nan if bad else h)


def mean_curvature(f, u, v, h: float = DEFAULT_STENCIL) -> float | np.ndarray:
    """Mean curvature of the parametric surface f at (u, v)."""
    out = mean_curvature_from_jet(surface_jet(f, u, v, h))
    return float(out) if np.ndim(out) == 0 else out


def principal_curvatures(f, u, v, h: float = DEFAULT_STENCIL):
    """Principal curvatures (package convention: twice the Weingarten
    eigenvalues), as generalized eigenvalues of (II, g)."""
    jet = surface_jet(f, u, v, h)
    f0, fu, fv = jet["f0"], jet["fu"], jet["fv"]
    g = np.stack(
        [
            np.stack([b_eval(fu, fu), b_eval(fu, fv)], axis=-1),
            np.stack([b_eval(fu, fv), b_eval(fv, fv)], axis=-1),
        ],
        axis=-2,
    )
    n = future_unit_normal(f0, fu, fv)
    ii = np.stack(
        [
            np.stack([2 * b_eval(n, jet["fuu"]), 2 * b_eval(n, jet["fuv"])], axis=-1),
            np.stack([2 * b_eval(n, jet["fuv"]), 2 * b_eval(n, jet["fvv"])], axis=-1),
        ],
        axis=-2,
    )
    # Generalized symmetric eigenproblem II x = k g x via Cholesky whitening.
    l = np.linalg.cholesky(g)
    l_inv = np.linalg.inv(l)
    sym = l_inv @ ii @ np.swapaxes(l_inv, -1, -2)
    return np.linalg.eigvalsh(sym)


def offset_principal(k, eps: float):
    """Principal curvature after flowing time eps along the future normal.

    Package-convention curvatures evolve as k -> 2 tan(arctan(k/2) + eps);
    eps < 0 flows toward the past.
    """
    return 2.0 * np.tan(np.arctan(np.asarray(k) / 2.0) + eps)


def chart_graph(z_func):
    """Wrap a chart height function z(x, y) as a parametric quadric surface."""
    from .causal import chart_lift_interior

    def f(x, y):
        return chart_lift_interior(x, y, z_func(x, y))

    return f


def normal_offset(f, eps: float, h: float = DEFAULT_STENCIL):
    """Parametric surface obtained by flowing f along its future unit
    normal geodesics for time eps (negative eps flows to the past)."""

    def g(u, v):
        jet_f0 = f(u, v)
        fu = (f(u + h, v) - f(u - h, v)) / (2 * h)
        fv = (f(u, v + h) - f(u, v - h)) / (2 * h)
        n = future_unit_normal(jet_f0, fu, fv)
        # Renormalize the base point exactly onto the quadric first.
        q0 = np.asarray(b_eval(jet_f0, jet_f0))
        base = jet_f0 / np.sqrt(-q0)[..., None]
        return np.cos(eps) * base + np.sin(eps) * n

    return g


def graph_from_parametric(f, x_query, y_query, iters: int = 10, tol: float = 1e-10):
    """Chart height of a near-graph parametric surface at query columns.

    Solves F_xy(u, v) = (x_query, y_query) by fixed-point iteration in the
    chart projection, starting from (u, v) = (x_query, y_query); valid
    when the surface is a small perturbation of a graph over the chart
    disc (the projection displacement is a contraction).  Returns the
    chart z values at the queried columns.
    """
    u = np.array(x_query, dtype=float)
    v = np.array(y_query, dtype=float)
    p = f(u, v)
    for _ in range(iters):
        rx = p[..., 2] / p[..., 0] - x_query
        ry = p[..., 3] / p[..., 0] - y_query
        if max(np.max(np.abs(rx)), np.max(np.abs(ry))) < tol:
            break
        u = u - rx
        v = v - ry
        p = f(u, v)
    return p[..., 1] / p[..., 0]
