"""Hot numeric kernels, in numba and pure-numpy flavors.

Every kernel has two implementations computing identical values: an
@njit-compiled element loop and a vectorized numpy fallback.  The active
flavor is chosen once at import time (config.numba_enabled); set
ADSCMC_NO_NUMBA=1 to force the fallback.  benchmarks/bench_kernels.py
compares the two.
"""

from __future__ import annotations

import numpy as np

from . import config

NUMBA_ENABLED = config.numba_enabled()

if NUMBA_ENABLED:
    from numba import njit
else:  # pragma: no cover - identity decorator keeps the source importable

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# Mean curvature sweep over a torus graph (angle field on a periodic grid).
# ---------------------------------------------------------------------------


def _embed_np(th, t, s):
    a = np.cos(th) * np.exp(t - s)
    b = np.sin(th) * np.exp(t + s)
    c = -np.sin(th) * np.exp(-(t + s))
    d = np.cos(th) * np.exp(s - t)
    return np.stack([0.5 * (a + d), 0.5 * (c - b), 0.5 * (d - a), 0.5 * (b + c)], axis=-1)


def orbit_h_grid_numpy(th_pad, t_pad, s_pad, ha, hb):
    """Mean curvature at interior nodes of a padded (N+2, M+2) angle grid.

    th_pad carries the periodically wrapped angles; t_pad and s_pad the
    unwrapped affine coordinates of the nodes.  Returns H of shape (N, M).
    """
    from .meancurv import mean_curvature_from_jet

    f = _embed_np(th_pad, t_pad, s_pad)
    c = f[1:-1, 1:-1]
    fa_p, fa_m = f[2:, 1:-1], f[:-2, 1:-1]
    fb_p, fb_m = f[1:-1, 2:], f[1:-1, :-2]
    fab_pp, fab_pm = f[2:, 2:], f[2:, :-2]
    fab_mp, fab_mm = f[:-2, 2:], f[:-2, :-2]
    jet = {
        "f0": c,
        "fu": (fa_p - fa_m) / (2 * ha),
        "fv": (fb_p - fb_m) / (2 * hb),
        "fuu": (fa_p - 2 * c + fa_m) / ha**2,
        "fvv": (fb_p - 2 * c + fb_m) / hb**2,
        "fuv": (fab_pp - fab_pm - fab_mp + fab_mm) / (4 * ha * hb),
    }
    return mean_curvature_from_jet(jet, nan_on_invalid=True)


@njit(cache=True)
def _embed_scalar(th, t, s, out):
    a = np.cos(th) * np.exp(t - s)
    b = np.sin(th) * np.exp(t + s)
    c = -np.sin(th) * np.exp(-(t + s))
    d = np.cos(th) * np.exp(s - t)
    out[0] = 0.5 * (a + d)
    out[1] = 0.5 * (c - b)
    out[2] = 0.5 * (d - a)
    out[3] = 0.5 * (b + c)


@njit(cache=True)
def _bq(u, v):
    return -u[0] * v[0] - u[1] * v[1] + u[2] * v[2] + u[3] * v[3]


@njit(cache=True)
def _cross4_g(f0, fu, fv, out):
    # out = G . (generalized cross product), so that B_Q(out, x) = det[x; f0; fu; fv].
    m0 = (
        f0[1] * (fu[2] * fv[3] - fu[3] * fv[2])
        - f0[2] * (fu[1] * fv[3] - fu[3] * fv[1])
        + f0[3] * (fu[1] * fv[2] - fu[2] * fv[1])
    )
    m1 = (
        f0[0] * (fu[2] * fv[3] - fu[3] * fv[2])
        - f0[2] * (fu[0] * fv[3] - fu[3] * fv[0])
        + f0[3] * (fu[0] * fv[2] - fu[2] * fv[0])
    )
    m2 = (
        f0[0] * (fu[1] * fv[3] - fu[3] * fv[1])
        - f0[1] * (fu[0] * fv[3] - fu[3] * fv[0])
        + f0[3] * (fu[0] * fv[1] - fu[1] * fv[0])
    )
    m3 = (
        f0[0] * (fu[1] * fv[2] - fu[2] * fv[1])
        - f0[1] * (fu[0] * fv[2] - fu[2] * fv[0])
        + f0[2] * (fu[0] * fv[1] - fu[1] * fv[0])
    )
    out[0] = -m0
    out[1] = m1
    out[2] = m2
    out[3] = -m3


@njit(cache=True)
def orbit_h_grid_numba(th_pad, t_pad, s_pad, ha, hb):
    n = th_pad.shape[0] - 2
    m = th_pad.shape[1] - 2
    h_out = np.empty((n, m))
    emb = np.empty((th_pad.shape[0], th_pad.shape[1], 4))
    buf = np.empty(4)
    for i in range(th_pad.shape[0]):
        for j in range(th_pad.shape[1]):
            _embed_scalar(th_pad[i, j], t_pad[i, j], s_pad[i, j], buf)
            for k in range(4):
                emb[i, j, k] = buf[k]
    f0 = np.empty(4)
    fu = np.empty(4)
    fv = np.empty(4)
    fuu = np.empty(4)
    fvv = np.empty(4)
    fuv = np.empty(4)
    nrm = np.empty(4)
    kfut = np.empty(4)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            for k in range(4):
                f0[k] = emb[i, j, k]
                fu[k] = (emb[i + 1, j, k] - emb[i - 1, j, k]) / (2 * ha)
                fv[k] = (emb[i, j + 1, k] - emb[i, j - 1, k]) / (2 * hb)
                fuu[k] = (emb[i + 1, j, k] - 2 * f0[k] + emb[i - 1, j, k]) / ha**2
                fvv[k] = (emb[i, j + 1, k] - 2 * f0[k] + emb[i, j - 1, k]) / hb**2
                fuv[k] = (emb[i + 1, j + 1, k] - emb[i + 1, j - 1, k] - emb[i - 1, j + 1, k] + emb[i - 1, j - 1, k]) / (
                    4 * ha * hb
                )
            g11 = _bq(fu, fu)
            g22 = _bq(fv, fv)
            g12 = _bq(fu, fv)
            det_g = g11 * g22 - g12 * g12
            if g11 <= 0.0 or det_g <= 0.0:
                h_out[i - 1, j - 1] = np.nan
                continue
            _cross4_g(f0, fu, fv, nrm)
            qn = _bq(nrm, nrm)
            if qn >= 0.0:
                h_out[i - 1, j - 1] = np.nan
                continue
            scale = 1.0 / np.sqrt(-qn)
            for k in range(4):
                nrm[k] *= scale
            kfut[0] = f0[1]
            kfut[1] = -f0[0]
            kfut[2] = 0.0
            kfut[3] = 0.0
            if _bq(nrm, kfut) > 0.0:
                for k in range(4):
                    nrm[k] = -nrm[k]
            ii11 = 2.0 * _bq(nrm, fuu)
            ii22 = 2.0 * _bq(nrm, fvv)
            ii12 = 2.0 * _bq(nrm, fuv)
            h_out[i - 1, j - 1] = (g22 * ii11 - 2.0 * g12 * ii12 + g11 * ii22) / det_g
    return h_out


def orbit_h_grid(th_pad, t_pad, s_pad, ha, hb):
    if NUMBA_ENABLED:
        return orbit_h_grid_numba(th_pad, t_pad, s_pad, ha, hb)
    return orbit_h_grid_numpy(th_pad, t_pad, s_pad, ha, hb)


# ---------------------------------------------------------------------------
# Sequential profile smoothing of a plane envelope (barrier pipeline).
# ---------------------------------------------------------------------------


def _phi_smoothstep_np(t, eta):
    u = np.clip((t - eta) / eta, 0.0, 1.0)
    ramp = u**3 - 0.5 * u**4
    return np.where(t <= eta, 1.5 * eta, np.where(t >= 2 * eta, t, 1.5 * eta + eta * ramp))


def smoothed_sheet_eval_numpy(normals, offsets, eta, sign, x, y):
    """Replay the per-face smoothing steps over the plane envelope.

    sign=+1 for upper sheets (min envelope, pushed down), -1 for lower.
    """
    heights = (offsets[None, :] - np.multiply.outer(x, normals[:, 0]) - np.multiply.outer(y, normals[:, 1])) / normals[
        None, :, 2
    ]
    z = heights.min(axis=-1) if sign > 0 else heights.max(axis=-1)
    for k in range(len(normals)):
        nz = abs(normals[k, 2])
        plane_h = heights[..., k]
        gap = sign * (plane_h - z) * nz
        z = plane_h - sign * _phi_smoothstep_np(gap, eta) / nz
    return z


@njit(cache=True)
def smoothed_sheet_eval_numba(normals, offsets, eta, sign, x, y):
    n_pts = x.shape[0]
    n_f = normals.shape[0]
    z = np.empty(n_pts)
    for i in range(n_pts):
        # base envelope
        if sign > 0:
            best = 1e300
        else:
            best = -1e300
        for k in range(n_f):
            h = (offsets[k] - x[i] * normals[k, 0] - y[i] * normals[k, 1]) / normals[k, 2]
            if sign > 0:
                if h < best:
                    best = h
            else:
                if h > best:
                    best = h
        zi = best
        for k in range(n_f):
            nz = abs(normals[k, 2])
            plane_h = (offsets[k] - x[i] * normals[k, 0] - y[i] * normals[k, 1]) / normals[k, 2]
            gw = sign * (plane_h - zi) * nz
            # smoothstep profile
            if gw <= eta:
                phi = 1.5 * eta
            elif gw >= 2.0 * eta:
                phi = gw
            else:
                u = (gw - eta) / eta
                phi = 1.5 * eta + eta * (u**3 - 0.5 * u**4)
            zi = plane_h - sign * phi / nz
        z[i] = zi
    return z


def smoothed_sheet_eval(normals, offsets, eta, sign, x, y):
    normals = np.ascontiguousarray(normals, dtype=float)
    offsets = np.ascontiguousarray(offsets, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if NUMBA_ENABLED and x.ndim == 1:
        return smoothed_sheet_eval_numba(normals, offsets, float(eta), float(sign), np.ascontiguousarray(x), np.ascontiguousarray(y))
    return smoothed_sheet_eval_numpy(normals, offsets, float(eta), float(sign), x, y)


# ---------------------------------------------------------------------------
# Brute-force hull oracle: all triangles whose plane does not split the cloud.
# ---------------------------------------------------------------------------


def nonsplitting_triangles_numpy(points, eps):
    n = len(points)
    tris = []
    idx = np.arange(n)
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            base = points[j] - points[i]
            rest = points[j + 1 :] - points[i]
            normals = np.cross(base, rest)  # (n-j-1, 3)
            # offsets of all cloud points against each candidate plane
            d = (points - points[i]) @ normals.T  # (n, n-j-1)
            pos = (d > eps).any(axis=0)
            neg = (d < -eps).any(axis=0)
            ok = ~(pos & neg)
            for m, k in enumerate(idx[j + 1 :]):
                if ok[m]:
                    tris.append((i, j, int(k)))
    return tris


@njit(cache=True)
def _nonsplitting_mask_numba(points, eps):
    n = points.shape[0]
    count = 0
    out = np.empty((n * (n - 1) * (n - 2) // 6, 3), dtype=np.int64)
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            bx = points[j, 0] - points[i, 0]
            by = points[j, 1] - points[i, 1]
            bz = points[j, 2] - points[i, 2]
            for k in range(j + 1, n):
                cx = points[k, 0] - points[i, 0]
                cy = points[k, 1] - points[i, 1]
                cz = points[k, 2] - points[i, 2]
                nx = by * cz - bz * cy
                ny = bz * cx - bx * cz
                nz = bx * cy - by * cx
                has_pos = False
                has_neg = False
                for m in range(n):
                    d = (
                        (points[m, 0] - points[i, 0]) * nx
                        + (points[m, 1] - points[i, 1]) * ny
                        + (points[m, 2] - points[i, 2]) * nz
                    )
                    if d > eps:
                        has_pos = True
                    elif d < -eps:
                        has_neg = True
                    if has_pos and has_neg:
                        break
                if not (has_pos and has_neg):
                    out[count, 0] = i
                    out[count, 1] = j
                    out[count, 2] = k
                    count += 1
    return out[:count]


def nonsplitting_triangles(points, eps):
    """Triangles (i < j < k) whose supporting plane does not split the cloud."""
    points = np.ascontiguousarray(points, dtype=float)
    if NUMBA_ENABLED:
        arr = _nonsplitting_mask_numba(points, eps)
        return [tuple(map(int, row)) for row in arr]
    return nonsplitting_triangles_numpy(points, eps)


# ---------------------------------------------------------------------------
# Pairwise achronality scan on a sampled graph surface.
# ---------------------------------------------------------------------------


def achronal_violations_numpy(pts, f, interior, tol):
    dots = np.clip(pts @ pts.T, -1.0, 1.0)
    dist = np.arccos(dots)
    gap = np.abs(f[:, None] - f[None, :])
    both_interior = interior[:, None] & interior[None, :]
    near = dist <= 1e-12  # duplicated nodes (grid center)
    bad_strict = both_interior & ~near & (gap >= dist - tol)
    bad_boundary = ~both_interior & ~near & (gap > dist + tol)
    bad = np.triu(bad_strict | bad_boundary, k=1)
    ii, jj = np.nonzero(bad)
    return list(zip(ii.tolist(), jj.tolist()))


@njit(cache=True)
def _achronal_violations_numba(pts, f, interior, tol):
    n = pts.shape[0]
    cap = 8 * n
    out = np.empty((cap, 2), dtype=np.int64)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            dot = pts[i, 0] * pts[j, 0] + pts[i, 1] * pts[j, 1] + pts[i, 2] * pts[j, 2]
            if dot > 1.0:
                dot = 1.0
            elif dot < -1.0:
                dot = -1.0
            dist = np.arccos(dot)
            if dist <= 1e-12:
                continue
            gap = abs(f[i] - f[j])
            bad = False
            if interior[i] and interior[j]:
                bad = gap >= dist - tol
            else:
                bad = gap > dist + tol
            if bad and count < cap:
                out[count, 0] = i
                out[count, 1] = j
                count += 1
    return out[:count]


def achronal_violations(pts, f, interior, tol):
    """Violating node pairs of the discrete achronality inequality."""
    pts = np.ascontiguousarray(pts, dtype=float)
    f = np.ascontiguousarray(f, dtype=float)
    interior = np.ascontiguousarray(interior, dtype=np.bool_)
    if NUMBA_ENABLED:
        pairs = _achronal_violations_numba(pts, f, interior, tol)
        return [tuple(map(int, row)) for row in pairs]
    return achronal_violations_numpy(pts, f, interior, tol)
