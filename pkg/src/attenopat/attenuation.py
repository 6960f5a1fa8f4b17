"""Weak attenuation coefficient models.

A weak attenuation coefficient has the form ``kappa(w) = w/c + i*kappa_inf +
kappa_star(w)`` with ``c > 0``, ``kappa_inf >= 0`` and ``kappa_star`` bounded,
smooth and square integrable.  Complex frequencies are plain Python/numpy
``complex``; operations state in their docstrings which half-plane they need.

Two built-in ``kappa_star`` families are provided:

``zero``
    ``kappa_star == 0`` (no dispersive part; pure constant damping).

``rational``
    ``kappa_star(w) = (alpha*w + i*gamma) / (w**2 + beta**2)`` with real
    ``alpha``, ``gamma >= 0``, ``beta > 0``.  Bounded, L2, odd-Hermitian
    (``kappa_star(-w) == -conj(kappa_star(w))``), with the ``w**-m``
    asymptotic expansion needed by the correction-series bounds, and a
    meromorphic continuation whose only poles are ``+/- i*beta``.  The
    subfamily ``gamma == -alpha*beta`` (so ``alpha <= 0``) is pole-free on
    the closed upper half-plane; only for it are the time kernels exactly
    causal ("Herglotz admissible" below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, PoleProximity
from .transforms import UniformGrid1D


@dataclass(frozen=True)
class KappaStarZero:
    """The trivial dispersive part, kappa_star == 0."""

    family = "zero"

    def value(self, z):
        return np.zeros_like(np.asarray(z, dtype=complex))

    def derivative(self, z):
        return np.zeros_like(np.asarray(z, dtype=complex))

    @property
    def poles(self):
        return ()

    @property
    def herglotz_admissible(self) -> bool:
        return True


@dataclass(frozen=True)
class KappaStarRational:
    """Rational dispersive part ``(alpha*w + i*gamma) / (w**2 + beta**2)``."""

    alpha: float
    beta: float
    gamma: float

    family = "rational"

    def __post_init__(self):
        if not (self.beta > 0):
            raise ValueError("beta must be > 0")

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.alpha * z + 1j * self.gamma) / (z * z + self.beta ** 2)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        den = z * z + self.beta ** 2
        return (self.alpha * den - (self.alpha * z + 1j * self.gamma) * 2 * z) / den ** 2

    @property
    def poles(self):
        return (1j * self.beta, -1j * self.beta)

    @property
    def herglotz_admissible(self) -> bool:
        # gamma == -alpha*beta cancels the upper half-plane pole:
        # kappa_star = alpha / (w + i*beta), holomorphic on Im z >= 0.
        return math.isclose(self.gamma, -self.alpha * self.beta,
                            rel_tol=0.0, abs_tol=1e-14)

    def partial_fractions(self):
        """kappa_star = A/(w - i*beta) + B/(w + i*beta)."""
        a, b, g = self.alpha, self.beta, self.gamma
        return (a * b + g) / (2 * b), (a * b - g) / (2 * b)


@dataclass(frozen=True)
class AttenuationModel:
    """Weak attenuation coefficient ``w/c + i*kappa_inf + kappa_star(w)``.

    Immutable; every operation on it is a pure function and safe to call
    concurrently.
    """

    c: float = 1.0
    kappa_inf: float = 0.0
    kappa_star: KappaStarZero | KappaStarRational = field(default_factory=KappaStarZero)
    newton_tol: float = 1e-12
    newton_max_iter: int = 60
    pole_radius: float | None = None

    def __post_init__(self):
        if not (self.c > 0):
            raise ValueError("sound-speed scale c must be > 0")
        if self.kappa_inf < 0:
            raise ValueError("kappa_inf must be >= 0")
        if isinstance(self.kappa_star, KappaStarRational) and self.kappa_star.gamma < 0:
            raise ValueError("rational family requires gamma >= 0")

    @property
    def dissipationless(self) -> bool:
        """True when kappa(w) == w identically (classical wave equation)."""
        return (self.kappa_inf == 0.0 and self.c == 1.0
                and isinstance(self.kappa_star, KappaStarZero))

    def _pole_guard_radius(self) -> float:
        if self.pole_radius is not None:
            return self.pole_radius
        if isinstance(self.kappa_star, KappaStarRational):
            return 0.25 * self.kappa_star.beta
        return 0.0


def no_attenuation() -> AttenuationModel:
    return AttenuationModel(c=1.0, kappa_inf=0.0, kappa_star=KappaStarZero())


def eval_kappa_continued(model: AttenuationModel, z):
    """kappa's closed-form continuation at any finite z (both half-planes).

    The built-in families are entire or meromorphic; values within the pole
    guard radius raise :class:`PoleProximity`.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite frequency")
    guard = model._pole_guard_radius()
    if guard > 0:
        for p in model.kappa_star.poles:
            if np.any(np.abs(z - p) < guard):
                raise PoleProximity(
                    f"evaluation within {guard:g} of pole {p}")
    return z / model.c + 1j * model.kappa_inf + model.kappa_star.value(z)


def eval_kappa(model: AttenuationModel, z):
    """Evaluate kappa on the closed upper half-plane (Im z >= 0).

    Scalar or array ``z``.  Rejects points below the real axis; use
    :func:`eval_kappa_continued` for the lower half-plane continuation that
    the inverse map can land in.
    """
    za = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(za)):
        raise ValueError("non-finite frequency")
    if np.any(za.imag < -1e-300):
        raise ValueError("eval_kappa requires Im z >= 0")
    out = eval_kappa_continued(model, za)
    return out if za.shape else complex(out)


def _kappa_derivative(model: AttenuationModel, z):
    return 1.0 / model.c + model.kappa_star.derivative(np.asarray(z, dtype=complex))


def _newton_inverse(model: AttenuationModel, z):
    """Damped Newton solve of ``kappa(w) = z``; returns (w, converged_mask).

    Never raises on non-convergence (callers choose); raises
    :class:`PoleProximity` if an iterate enters the pole guard.
    """
    za = np.asarray(z, dtype=complex)
    w = np.array(model.c * (za - 1j * model.kappa_inf), dtype=complex)
    if isinstance(model.kappa_star, KappaStarZero):
        return w, np.ones(za.shape, dtype=bool)
    flat_w = w.reshape(-1)
    flat_z = za.reshape(-1)
    guard = model._pole_guard_radius()
    poles = model.kappa_star.poles
    active = np.ones(flat_w.shape, dtype=bool)
    resid = np.abs(eval_kappa_continued(model, flat_w) - flat_z)
    for _ in range(model.newton_max_iter):
        if not np.any(active):
            break
        wa = flat_w[active]
        fa = eval_kappa_continued(model, wa) - flat_z[active]
        da = _kappa_derivative(model, wa)
        step = fa / da
        # damped update: halve the step until the residual does not grow
        new_w = wa - step
        for _ in range(10):
            bad = np.abs(eval_kappa_continued(model, new_w) - flat_z[active]) > np.abs(fa)
            if not np.any(bad):
                break
            step = np.where(bad, 0.5 * step, step)
            new_w = wa - step
        for p in poles:
            if guard > 0 and np.any(np.abs(new_w - p) < guard):
                raise PoleProximity(
                    f"Newton iterate within {guard:g} of pole {p}")
        flat_w[active] = new_w
        resid[active] = np.abs(eval_kappa_continued(model, new_w) - flat_z[active])
        active = resid > model.newton_tol
    return flat_w.reshape(za.shape), (resid <= model.newton_tol).reshape(za.shape)


def eval_kappa_inverse(model: AttenuationModel, z):
    """Solve ``kappa(w) = z`` by damped complex Newton iteration.

    Seeded at ``w0 = c*(z - i*kappa_inf)``, the exact inverse for the zero
    family.  For real targets below the curve ``kappa(R)`` the solution has
    ``Im w < 0`` (lower half-plane); the closed-form continuation is used
    there.  Scalar or array ``z``.

    Raises :class:`NoConvergence` past ``newton_max_iter`` and
    :class:`PoleProximity` if an iterate approaches a pole of kappa_star.
    """
    za = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(za)):
        raise ValueError("non-finite target")
    w, ok = _newton_inverse(model, za)
    if not np.all(ok):
        raise NoConvergence(
            f"kappa inverse: {int(np.sum(~ok))} of {ok.size} targets above "
            f"tol {model.newton_tol:g} after {model.newton_max_iter} iterations")
    return w if za.shape else complex(w)


@dataclass(frozen=True)
class HerglotzReport:
    """Diagnostic from :func:`herglotz_check`."""

    min_im_continuation: float
    min_real_axis_slope: float
    n_grid_points: int
    passed: bool


def herglotz_check(model: AttenuationModel, omega_max: float = 12.0,
                   im_max: float = 4.0, n_re: int = 121, n_im: int = 41,
                   pole_exclusion: float | None = None) -> HerglotzReport:
    """Sample Im(kappa) on a rectangle of the closed upper half-plane and
    d/dw Re(kappa) on the real axis; pass iff both stay >= -1e-10.

    Points within ``pole_exclusion`` (default ``0.4*beta``) of a pole of the
    continuation are skipped: the rational family with ``gamma != -alpha*beta``
    has a pole at ``+i*beta``, and the check reports the behaviour of the
    coefficient away from it.
    """
    if pole_exclusion is None:
        pole_exclusion = (0.4 * model.kappa_star.beta
                          if isinstance(model.kappa_star, KappaStarRational) else 0.0)
    re = np.linspace(-omega_max, omega_max, n_re)
    im = np.linspace(0.0, im_max, n_im)
    Z = re[None, :] + 1j * im[:, None]
    mask = np.ones(Z.shape, dtype=bool)
    for p in model.kappa_star.poles:
        mask &= np.abs(Z - p) >= max(pole_exclusion, 1e-12)
    zs = Z[mask]
    vals = zs / model.c + 1j * model.kappa_inf + model.kappa_star.value(zs)
    min_im = float(np.min(vals.imag))
    kr = eval_kappa(model, re.astype(complex))
    slope = np.diff(kr.real) / np.diff(re)
    min_slope = float(np.min(slope))
    tol = -1e-10
    return HerglotzReport(
        min_im_continuation=min_im,
        min_real_axis_slope=min_slope,
        n_grid_points=int(zs.size),
        passed=(min_im >= tol and min_slope >= tol),
    )


@dataclass(frozen=True)
class RjKernel:
    """Time-domain correction kernel ``r_j = F^{-1}[(i*kappa_star)^j]``.

    The inverse transform here carries ``1/(2*pi)`` (no unitary split), the
    unique normalization with ``r_0 = delta``.  The Dirac component of ``r_0``
    is held in ``delta_weight``, never as a grid spike.
    """

    j: int
    t_grid: UniformGrid1D
    values: np.ndarray
    delta_weight: float

    def energy_split(self):
        """(energy at t < 0, total energy) of the sampled part."""
        t = self.t_grid.points
        e2 = np.abs(self.values) ** 2
        return float(np.sum(e2[t < 0])), float(np.sum(e2))


def _rational_rj_closed_form(s: np.ndarray, star: KappaStarRational,
                             j: int) -> np.ndarray:
    """Exact residue evaluation of ``(1/2pi) int (i kappa_star)^j e^{-iws} dw``.

    kappa_star splits as A/(w - i*beta) + B/(w + i*beta); the binomial terms
    ``(w - i*beta)^{-k} (w + i*beta)^{-m}`` invert to polynomial-times-
    exponential pieces on each side of s = 0 by residue calculus.
    """
    A, B = star.partial_fractions()
    beta = star.beta
    s = np.asarray(s, dtype=float)
    pos = s > 0
    neg = s < 0
    out = np.zeros(s.shape, dtype=complex)
    pref = (1j) ** j

    def rising(k, l):
        v = 1.0
        for q in range(l):
            v *= k + q
        return v

    for k in range(j + 1):
        m = j - k
        coef = pref * math.comb(j, k) * (A ** k) * (B ** m)
        if coef == 0:
            continue
        if m >= 1 and np.any(pos):
            sp = s[pos]
            acc = np.zeros(sp.shape, dtype=complex)
            for l in range(m):
                acc += (math.comb(m - 1, l) * (-1) ** l * rising(k, l)
                        * (-2j * beta) ** (-k - l)
                        * (-1j * sp) ** (m - 1 - l))
            out[pos] += coef * (-1j) * acc * np.exp(-beta * sp) / math.factorial(m - 1)
        if k >= 1 and np.any(neg):
            sn = s[neg]
            acc = np.zeros(sn.shape, dtype=complex)
            for l in range(k):
                acc += (math.comb(k - 1, l) * (-1) ** l * rising(m, l)
                        * (2j * beta) ** (-m - l)
                        * (-1j * sn) ** (k - 1 - l))
            out[neg] += coef * 1j * acc * np.exp(beta * sn) / math.factorial(k - 1)
    # value at the jump: average of the one-sided limits
    at0 = np.isclose(s, 0.0, atol=0.0)
    if np.any(at0):
        eps = 1e-300
        lim_p = _rational_rj_closed_form(np.array([eps]), star, j)[0]
        lim_m = _rational_rj_closed_form(np.array([-eps]), star, j)[0]
        out[at0] = 0.5 * (lim_p + lim_m)
    return out


def compute_rj(model: AttenuationModel, j: int, t_grid: UniformGrid1D,
               method: str = "auto") -> RjKernel:
    """Build the j-th correction kernel on a uniform time grid.

    ``j = 0`` is the pure Dirac kernel (``delta_weight = 1``, zero samples).
    For ``j >= 1`` with the rational family the defining inverse transform is
    evaluated in closed form (``method="closed_form"``); ``method="dft"``
    samples ``(i*kappa_star)^j`` on the dual grid and inverts discretely,
    which leaves band-truncation ringing for the slowly decaying j = 1
    spectrum and exists mainly as a cross-check.

    The grid must be uniform and bracket t = 0.
    """
    if j < 0:
        raise ValueError("series index j must be >= 0")
    if not (t_grid.span[0] <= 0.0 <= t_grid.span[1]):
        raise ValueError("r_j grids must bracket t = 0")
    if j == 0:
        return RjKernel(0, t_grid, np.zeros(t_grid.n), 1.0)
    if isinstance(model.kappa_star, KappaStarZero):
        return RjKernel(j, t_grid, np.zeros(t_grid.n), 0.0)
    if method == "auto":
        method = "closed_form" if isinstance(model.kappa_star, KappaStarRational) else "dft"
    if method == "closed_form":
        vals = _rational_rj_closed_form(t_grid.points, model.kappa_star, j)
        resid = np.max(np.abs(vals.imag)) if vals.size else 0.0
        if resid > 1e-12 * max(np.max(np.abs(vals.real)), 1e-300):
            raise AssertionError("rational r_j should be real valued")
        return RjKernel(j, t_grid, vals.real, 0.0)
    if method == "dft":
        dual = t_grid.dual()
        spec = (1j * model.kappa_star.value(dual.points.astype(complex))) ** j
        # (1/2pi) sum spec e^{-i w t} dw, grid-aware
        t = t_grid.points
        vals = (spec[None, :] * np.exp(-1j * np.outer(t, dual.points))).sum(axis=1)
        vals *= dual.step / (2.0 * np.pi)
        return RjKernel(j, t_grid, vals.real, 0.0)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class RjReport:
    max_abs_positive_time: float
    causal_energy_fraction: float
    total_energy: float


def rj_boundedness_report(kernel: RjKernel) -> RjReport:
    """Sup of |r_j| on t > 0 and the energy fraction sitting at t < 0."""
    t = kernel.t_grid.points
    vals = np.abs(np.asarray(kernel.values))
    pos_max = float(vals[t > 0].max()) if np.any(t > 0) else 0.0
    neg_energy, total = kernel.energy_split()
    frac = neg_energy / total if total > 0 else 0.0
    return RjReport(max_abs_positive_time=pos_max,
                    causal_energy_fraction=float(frac),
                    total_energy=total)
