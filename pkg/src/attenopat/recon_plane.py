"""Exact planar inversion and its operator-identity surface.

The reconstruction maps the measured spectrum through the inverse attenuation
coefficient::

    Fh(sigma, rho) = -2 i rho * (F q^a)(kappa^{-1}(sgn(rho) sqrt(rho^2 + |sigma|^2)), sigma)

evaluated per sigma-trace by direct Fourier-Laplace summation (arbitrary
complex frequencies, no interpolation in omega).  The constant ``-2 i rho`` is
pinned by the zero-attenuation round trip against the known source; see the
adjoint/remap pair below, whose composition is the identity with the same
constants.

For real targets below the curve ``kappa(R)`` the inverse frequency has a
negative imaginary part and the Fourier-Laplace sum grows like
``exp(|Im z| T)``; frequencies whose growth factor exceeds the configured
budget are zeroed and counted rather than amplified (the formula is exact but
not stable there).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attenuation import AttenuationModel, _newton_inverse
from .errors import EvennessViolation, GridMismatch
from .forward import PlaneMeasurement
from .phantom import VolumeGrid
from .transforms import (
    SpectralField,
    UniformGrid1D,
    dft_forward,
    dft_inverse,
    hermitian_symmetrize,
)

_SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class PlaneReconConfig:
    """Target grid and spectral regularization for the planar inversion.

    ``target_*`` define the output volume; the (x1, x2) axes must decimate the
    measurement patch (same physical extent, sample count dividing evenly).
    ``freq_cutoff`` caps ``|(sigma, rho)|`` (default 0.95 x the time-axis
    Nyquist), ``growth_budget`` caps ``exp(|Im kappa^{-1}| T)``, ``damping``
    is the raised-cosine taper width in rho near the cone boundary (default
    two rho-cells).
    """

    target_origin: tuple[float, float, float]
    target_spacing: tuple[float, float, float]
    target_dims: tuple[int, int, int]
    freq_cutoff: float | None = None
    growth_budget: float = 1e6
    damping: float | None = None

    def __post_init__(self):
        if self.growth_budget < 1.0:
            raise ValueError("growth_budget must be >= 1")

    def target_grids(self):
        return tuple(UniformGrid1D(self.target_origin[a], self.target_spacing[a],
                                   self.target_dims[a]) for a in range(3))


def default_plane_config(meas: PlaneMeasurement, depth: float, nz: int,
                         decimate: int = 1, **kw) -> PlaneReconConfig:
    """Config reconstructing over the measurement patch down to ``depth``."""
    g1, g2 = meas.xi1_grid, meas.xi2_grid
    if g1.n % decimate or g2.n % decimate:
        raise ValueError("decimation must divide the patch sample counts")
    dz = depth / nz
    return PlaneReconConfig(
        target_origin=(g1.start, g2.start, dz),
        target_spacing=(g1.step * decimate, g2.step * decimate, dz),
        target_dims=(g1.n // decimate, g2.n // decimate, nz), **kw)


@dataclass
class PlaneReconReport:
    n_evaluated: int = 0
    n_outside_cutoff: int = 0
    n_growth_zeroed: int = 0
    n_newton_failed: int = 0
    imag_residue: float = 0.0


@dataclass
class PlaneReconResult:
    volume: VolumeGrid
    report: PlaneReconReport


def _central_block_indices(n_meas: int, n_target: int):
    if n_target > n_meas:
        raise GridMismatch("target grid cannot exceed the measurement grid")
    lo = n_meas // 2 - n_target // 2
    return lo, lo + n_target


def reconstruct_plane(meas: PlaneMeasurement, model: AttenuationModel,
                      cfg: PlaneReconConfig) -> PlaneReconResult:
    """Invert planar integrated data to the source volume.

    Numerical failures (growth budget, inverse-map non-convergence) zero the
    affected frequencies and are counted in the report, never raised.
    """
    gx1, gx2, gx3 = cfg.target_grids()
    for gt, gm in ((gx1, meas.xi1_grid), (gx2, meas.xi2_grid)):
        if not np.isclose(gt.step * gt.n, gm.step * gm.n, rtol=1e-12):
            raise GridMismatch("target (x1, x2) axes must span the measurement patch")

    field = SpectralField(
        (meas.t_grid, meas.xi1_grid, meas.xi2_grid),
        np.asarray(meas.values, dtype=complex), ("t", "xi1", "xi2"))
    spatial = dft_forward(field, axes=(1, 2))
    sig1_full, sig2_full = spatial.grids[1], spatial.grids[2]

    lo1, hi1 = _central_block_indices(sig1_full.n, gx1.n)
    lo2, hi2 = _central_block_indices(sig2_full.n, gx2.n)
    traces = spatial.values[:, lo1:hi1, lo2:hi2]
    sig1 = UniformGrid1D(sig1_full.points[lo1], sig1_full.step, gx1.n)
    sig2 = UniformGrid1D(sig2_full.points[lo2], sig2_full.step, gx2.n)
    rho_grid = gx3.dual()

    S1, S2, RHO = np.meshgrid(sig1.points, sig2.points, rho_grid.points,
                              indexing="ij", sparse=False)
    KMAG = np.sqrt(S1 ** 2 + S2 ** 2 + RHO ** 2)
    omega_star = np.sign(RHO) * KMAG

    report = PlaneReconReport()
    cutoff = cfg.freq_cutoff
    if cutoff is None:
        cutoff = 0.95 * np.pi / meas.t_grid.step
    if cutoff > np.pi / meas.t_grid.step + 1e-12:
        raise ValueError("freq_cutoff beyond the measurement Nyquist")
    active = (KMAG <= cutoff) & (RHO != 0.0)
    report.n_outside_cutoff = int(np.sum(~active))

    z = np.zeros(omega_star.shape, dtype=complex)
    ok = np.zeros(omega_star.shape, dtype=bool)
    if np.any(active):
        z_act, ok_act = _newton_inverse(model, omega_star[active])
        z[active] = z_act
        ok[active] = ok_act
        report.n_newton_failed = int(np.sum(active) - np.sum(ok_act))

    t_max = max(abs(meas.t_grid.span[0]), abs(meas.t_grid.span[1]))
    growth = np.exp(np.minimum(np.abs(z.imag) * t_max, 700.0))
    budget_ok = growth <= cfg.growth_budget
    report.n_growth_zeroed = int(np.sum(active & ok & ~budget_ok))
    use = active & ok & budget_ok
    report.n_evaluated = int(np.sum(use))

    # direct Fourier-Laplace sum of every kept (sigma, rho) against its trace
    spectrum = np.zeros(omega_star.shape, dtype=complex)
    t = meas.t_grid.points
    wt = np.full(t.size, meas.t_grid.step)
    wt[0] *= 0.5
    wt[-1] *= 0.5
    flat_traces = (traces * wt[:, None, None]).reshape(t.size, -1)
    use_flat = use.reshape(gx1.n * gx2.n, rho_grid.n)
    z_flat = z.reshape(gx1.n * gx2.n, rho_grid.n)
    vals = np.zeros_like(z_flat)
    for col in range(use_flat.shape[0]):
        sel = use_flat[col]
        if not np.any(sel):
            continue
        phases = np.exp(1j * np.outer(z_flat[col, sel], t))
        vals[col, sel] = phases @ flat_traces[:, col] / _SQRT2PI
    spectrum = vals.reshape(omega_star.shape)

    damping = cfg.damping if cfg.damping is not None else 2.0 * rho_grid.step
    taper = np.ones_like(KMAG)
    if damping > 0:
        u = np.minimum(1.0, np.abs(RHO) / damping)
        taper = 0.5 - 0.5 * np.cos(np.pi * u)
    spectrum = -2j * RHO * spectrum * taper
    spectrum[~use] = 0.0

    spectrum = hermitian_symmetrize(spectrum, (sig1, sig2, rho_grid))
    spec_field = SpectralField((sig1, sig2, rho_grid), spectrum,
                               ("sigma1", "sigma2", "rho"))
    vol_field = dft_inverse(spec_field, target_grids={0: gx1, 1: gx2, 2: gx3})
    re = np.real(vol_field.values)
    im_norm = np.linalg.norm(np.imag(vol_field.values))
    re_norm = np.linalg.norm(re)
    report.imag_residue = float(im_norm / re_norm) if re_norm > 0 else 0.0

    volume = VolumeGrid(origin=cfg.target_origin, spacing=cfg.target_spacing,
                        dims=cfg.target_dims, values=re)
    if gx3.start <= 0:  # reconstruction lives in the half-space x3 > 0
        drop = gx3.points <= 0
        volume.values[:, :, drop] = 0.0
    return PlaneReconResult(volume, report)


# --- operator-identity surface: R*, E, cone projection -----------------------

def _gather_axis0(values: np.ndarray, grid: UniformGrid1D, queries: np.ndarray):
    """Cubic interpolation of values[:, i, j] at queries[i, j, ...] (0 outside)."""
    q = np.asarray(queries, dtype=float)
    out_shape = q.shape
    n1, n2 = values.shape[1], values.shape[2]
    if q.shape[:2] != (n1, n2):
        raise GridMismatch("query block must match the trailing field axes")
    s = (q - grid.start) / grid.step
    inside = (s >= 0.0) & (s <= grid.n - 1)
    i1 = np.clip(np.floor(s).astype(np.int64), 0, grid.n - 2)
    i0 = np.clip(i1 - 1, 0, grid.n - 4)
    u = s - i0
    idx1 = np.arange(n1)[:, None, None]
    idx2 = np.arange(n2)[None, :, None]
    q3 = u.reshape(n1, n2, -1)
    i03 = i0.reshape(n1, n2, -1)
    w = [
        -(q3 - 1) * (q3 - 2) * (q3 - 3) / 6.0,
        q3 * (q3 - 2) * (q3 - 3) / 2.0,
        -q3 * (q3 - 1) * (q3 - 3) / 2.0,
        q3 * (q3 - 1) * (q3 - 2) / 6.0,
    ]
    acc = np.zeros(q3.shape, dtype=values.dtype)
    for m in range(4):
        acc += w[m] * values[i03 + m, idx1, idx2]
    acc = acc.reshape(out_shape)
    return np.where(inside, acc, 0.0)


def _check_even_first_axis(field: SpectralField, tol: float = 1e-10):
    g = field.grids[0]
    idx = np.arange(g.n)
    mirror = (g.n - idx) % g.n
    paired = mirror != idx
    if g.n % 2 == 0:
        paired[0] = False  # unpaired Nyquist row on even centered grids
    diff = field.values[idx[paired]] - field.values[mirror[paired]]
    scale = np.max(np.abs(field.values))
    if scale > 0 and np.max(np.abs(diff)) > tol * scale:
        raise EvennessViolation(
            f"first-axis asymmetry {np.max(np.abs(diff)) / scale:.3g} > {tol:g}")


def rstar_freq_apply(field: SpectralField) -> SpectralField:
    """Spectral form of the adjoint spherical-projection operator.

    Maps a spectrum over (omega, sigma) to one over (sigma, rho)::

        out(sigma, rho) = [F(k, sigma) - F(-k, sigma)] / (2 i k),
        k = sqrt(|sigma|^2 + rho^2)

    with cubic interpolation along omega; the rho axis reuses the omega grid.
    The constant 1/(2i) matches the time-domain form ``(1/4pi) int
    phi(|x - xi|, xi)/|x - xi| d xi`` (checked against quadrature in tests).
    At sigma = rho = 0 the limit is the omega-derivative difference quotient.
    """
    if field.axis_labels[0] != "omega":
        raise GridMismatch("expected axes (omega, sigma1, sigma2)")
    wg = field.grids[0]
    sg1, sg2 = field.grids[1], field.grids[2]
    rho = wg  # output rho axis
    S1, S2, RHO = np.meshgrid(sg1.points, sg2.points, rho.points, indexing="ij")
    K = np.sqrt(S1 ** 2 + S2 ** 2 + RHO ** 2)
    plus = _gather_axis0(field.values, wg, K)
    minus = _gather_axis0(field.values, wg, -K)
    out = np.zeros(K.shape, dtype=complex)
    nz = K > 0
    out[nz] = (plus[nz] - minus[nz]) / (2j * K[nz])
    if np.any(~nz):
        # the only k = 0 point is sigma = rho = 0: limiting difference
        # quotient, dF/domega at 0 divided by i
        i0 = int(np.argmin(np.abs(wg.points)))
        dfd = (field.values[i0 + 1] - field.values[i0 - 1]) / (2 * wg.step)
        for a, b, c in zip(*np.where(~nz)):
            out[a, b, c] = dfd[a, b] / 1j
    return SpectralField((sg1, sg2, rho), out, ("sigma1", "sigma2", "rho"))


def e_remap_apply(field: SpectralField) -> SpectralField:
    """Spectral remap inverse to :func:`rstar_freq_apply` composition.

    For a spectrum even in its first axis::

        out(omega, sigma) = i omega * psi(sgn(omega) sqrt(omega^2 - |sigma|^2), sigma)

    on ``|omega| >= |sigma|`` and 0 outside (no smooth extension into the
    evanescent region; it is zeroed).  Raises :class:`EvennessViolation` when
    the input asymmetry exceeds 1e-10.
    """
    _check_even_first_axis(field)
    wg, sg1, sg2 = field.grids
    W, S1, S2 = np.meshgrid(wg.points, sg1.points, sg2.points, indexing="ij")
    smag = np.sqrt(S1 ** 2 + S2 ** 2)
    incone = np.abs(W) >= smag
    arg = np.sqrt(np.maximum(W ** 2 - smag ** 2, 0.0))  # evenness: sign immaterial
    queries = np.moveaxis(arg, 0, -1)  # (sigma1, sigma2, omega)
    gathered = _gather_axis0(field.values, wg, queries)
    vals = 1j * W * np.moveaxis(gathered, -1, 0)
    vals[~incone] = 0.0
    return SpectralField((wg, sg1, sg2), vals, field.axis_labels)


def cone_project(field: SpectralField) -> SpectralField:
    """Zero the spectrum outside the cone |omega| >= |sigma| (idempotent)."""
    wg, sg1, sg2 = field.grids
    W, S1, S2 = np.meshgrid(wg.points, sg1.points, sg2.points, indexing="ij")
    keep = np.abs(W) >= np.sqrt(S1 ** 2 + S2 ** 2)
    vals = np.where(keep, field.values, 0.0)
    return SpectralField(field.grids, vals, field.axis_labels, field.hermitian)


def cone_energy_fraction(field: SpectralField) -> float:
    """Spectral energy fraction in the evanescent region |omega| < |sigma|."""
    wg, sg1, sg2 = field.grids
    W, S1, S2 = np.meshgrid(wg.points, sg1.points, sg2.points, indexing="ij")
    outside = np.abs(W) < np.sqrt(S1 ** 2 + S2 ** 2)
    total = float(np.sum(np.abs(field.values) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(field.values[outside]) ** 2) / total)
