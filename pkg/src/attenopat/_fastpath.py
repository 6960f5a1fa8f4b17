"""Hot numerical loops, numba-compiled where available.

Set ``ATTENOPAT_NO_NUMBA=1`` to force the pure-numpy fallbacks (used by CI to
cover both paths).  Both paths iterate nodes in a fixed order with per-point
accumulators, so results are deterministic and thread-count independent.
"""

from __future__ import annotations

import os

import numpy as np

_USE_NUMBA = os.environ.get("ATTENOPAT_NO_NUMBA", "0") != "1"

if _USE_NUMBA:
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

if _USE_NUMBA:

    @njit(cache=True, inline="always")
    def _cubic_sample(trace, t0, dt, n, t):
        """4-point Lagrange sample; 0 outside the grid span."""
        if t < t0 or t > t0 + dt * (n - 1):
            return 0.0
        s = (t - t0) / dt
        i1 = int(np.floor(s))
        if i1 > n - 2:
            i1 = n - 2
        i0 = i1 - 1
        if i0 < 0:
            i0 = 0
        if i0 > n - 4:
            i0 = n - 4
        u = s - i0
        w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
        w1 = u * (u - 2.0) * (u - 3.0) / 2.0
        w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
        w3 = u * (u - 1.0) * (u - 2.0) / 6.0
        return (w0 * trace[i0] + w1 * trace[i0 + 1]
                + w2 * trace[i0 + 2] + w3 * trace[i0 + 3])

    @njit(cache=True, parallel=True)
    def weighted_trace_backprojection(points, nodes, weights, traces, t0, dt,
                                      kappa_inf):
        """out[p] = sum_i w_i exp(kappa_inf*d) trace_i(d), d = |node_i - x_p|."""
        npts = points.shape[0]
        nnod = nodes.shape[0]
        nt = traces.shape[1]
        out = np.zeros(npts)
        for p in prange(npts):
            x0 = points[p, 0]
            x1 = points[p, 1]
            x2 = points[p, 2]
            acc = 0.0
            for i in range(nnod):
                d0 = nodes[i, 0] - x0
                d1 = nodes[i, 1] - x1
                d2 = nodes[i, 2] - x2
                d = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                v = _cubic_sample(traces[i], t0, dt, nt, d)
                if kappa_inf != 0.0:
                    v *= np.exp(kappa_inf * d)
                acc += weights[i] * v
            out[p] = acc
        return out

    @njit(cache=True, parallel=True)
    def sphere_shell_means(vol, origin, spacing, centers, radii, dirs, dirw):
        """means[i, l] = (1/4pi) sum_q dirw_q vol(centers_i + radii_l dirs_q).

        Trilinear sampling; points outside the volume count as 0.
        """
        ncen = centers.shape[0]
        nrad = radii.shape[0]
        ndir = dirs.shape[0]
        n0, n1, n2 = vol.shape
        out = np.zeros((ncen, nrad))
        for i in prange(ncen):
            c0 = centers[i, 0]
            c1 = centers[i, 1]
            c2 = centers[i, 2]
            for l in range(nrad):
                r = radii[l]
                acc = 0.0
                for q in range(ndir):
                    p0 = (c0 + r * dirs[q, 0] - origin[0]) / spacing[0]
                    p1 = (c1 + r * dirs[q, 1] - origin[1]) / spacing[1]
                    p2 = (c2 + r * dirs[q, 2] - origin[2]) / spacing[2]
                    if (p0 < 0.0 or p0 > n0 - 1.0 or p1 < 0.0 or p1 > n1 - 1.0
                            or p2 < 0.0 or p2 > n2 - 1.0):
                        continue
                    i0 = int(p0)
                    if i0 > n0 - 2:
                        i0 = n0 - 2
                    i1 = int(p1)
                    if i1 > n1 - 2:
                        i1 = n1 - 2
                    i2 = int(p2)
                    if i2 > n2 - 2:
                        i2 = n2 - 2
                    f0 = p0 - i0
                    f1 = p1 - i1
                    f2 = p2 - i2
                    v00 = vol[i0, i1, i2] * (1 - f2) + vol[i0, i1, i2 + 1] * f2
                    v01 = vol[i0, i1 + 1, i2] * (1 - f2) + vol[i0, i1 + 1, i2 + 1] * f2
                    v10 = vol[i0 + 1, i1, i2] * (1 - f2) + vol[i0 + 1, i1, i2 + 1] * f2
                    v11 = vol[i0 + 1, i1 + 1, i2] * (1 - f2) + vol[i0 + 1, i1 + 1, i2 + 1] * f2
                    v0 = v00 * (1 - f1) + v01 * f1
                    v1 = v10 * (1 - f1) + v11 * f1
                    acc += dirw[q] * (v0 * (1 - f0) + v1 * f0)
                out[i, l] = acc / (4.0 * np.pi)
        return out

    def set_threads(n: int) -> None:
        numba.set_num_threads(max(1, int(n)))

else:

    from .transforms import UniformGrid1D, interp_trace

    def weighted_trace_backprojection(points, nodes, weights, traces, t0, dt,
                                      kappa_inf):
        npts = points.shape[0]
        out = np.zeros(npts)
        grid = UniformGrid1D(t0, dt, traces.shape[1])
        for i in range(nodes.shape[0]):
            d = np.sqrt(np.sum((points - nodes[i]) ** 2, axis=1))
            v = interp_trace(traces[i], grid, d)
            if kappa_inf != 0.0:
                v = v * np.exp(kappa_inf * d)
            out += weights[i] * v
        return out

    def sphere_shell_means(vol, origin, spacing, centers, radii, dirs, dirw):
        ncen = centers.shape[0]
        nrad = radii.shape[0]
        out = np.zeros((ncen, nrad))
        n = np.array(vol.shape)
        for i in range(ncen):
            # points (nrad, ndir, 3)
            pts = centers[i][None, None, :] + radii[:, None, None] * dirs[None, :, :]
            p = (pts - origin[None, None, :]) / spacing[None, None, :]
            ok = np.all((p >= 0.0) & (p <= (n - 1)[None, None, :]), axis=-1)
            p = np.clip(p, 0.0, (n - 1 - 1e-12)[None, None, :])
            ip = np.minimum(p.astype(np.int64), (n - 2)[None, None, :])
            f = p - ip
            i0, i1, i2 = ip[..., 0], ip[..., 1], ip[..., 2]
            f0, f1, f2 = f[..., 0], f[..., 1], f[..., 2]
            v = (vol[i0, i1, i2] * (1 - f0) * (1 - f1) * (1 - f2)
                 + vol[i0, i1, i2 + 1] * (1 - f0) * (1 - f1) * f2
                 + vol[i0, i1 + 1, i2] * (1 - f0) * f1 * (1 - f2)
                 + vol[i0, i1 + 1, i2 + 1] * (1 - f0) * f1 * f2
                 + vol[i0 + 1, i1, i2] * f0 * (1 - f1) * (1 - f2)
                 + vol[i0 + 1, i1, i2 + 1] * f0 * (1 - f1) * f2
                 + vol[i0 + 1, i1 + 1, i2] * f0 * f1 * (1 - f2)
                 + vol[i0 + 1, i1 + 1, i2 + 1] * f0 * f1 * f2)
            v = np.where(ok, v, 0.0)
            out[i] = v @ dirw / (4.0 * np.pi)
        return out

    def set_threads(n: int) -> None:  # numpy path: single threaded
        return None


def using_numba() -> bool:
    return _USE_NUMBA
