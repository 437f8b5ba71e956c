"""Bohr-Sommerfeld data, fiber sections, Bergman kernels, and peak
sections on flat tori.

The unitary gauge makes the covariantly constant fiber section over
b = beta/k exactly sigma(x) = e^{i pi k t(x) b} (plain normalization), so
fiber integrals against the theta basis reduce to one-dimensional
trapezoid sums that are spectrally accurate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .abelian import RiemannMatrix, base_distance, fiber_volume
from .errors import DegenerateSample, NonPositive
from .metrics import gram_matrix, quadrature_grid
from .theta import GaugeValue, ThetaBasis, section_gauge_values, theta_basis


@dataclass(frozen=True)
class BSFiberSet:
    """Exact rational enumeration of Bohr-Sommerfeld points at level k."""

    k: int
    kind: str
    points: tuple


def bs_fibers_abelian(om: RiemannMatrix, k: int) -> BSFiberSet:
    if k < 1:
        raise NonPositive(f"level must be positive, got {k}")
    pts = tuple(
        tuple(Fraction(j, k) for j in idx)
        for idx in itertools.product(range(k), repeat=om.n)
    )
    return BSFiberSet(k=k, kind="abelian", points=pts)


def bs_points_cp1(k: int) -> BSFiberSet:
    if k < 1:
        raise NonPositive(f"level must be positive, got {k}")
    pts = tuple(Fraction(2 * i - k, k) for i in range(k + 1))
    return BSFiberSet(k=k, kind="cp1", points=pts)


def sigma_section(
    om: RiemannMatrix, k: int, i: int, x, norm_mode: str = "plain"
) -> GaugeValue:
    """Covariantly constant section over the i-th Bohr-Sommerfeld fiber.

    In the unitary gauge its modulus is identically 1 (plain mode) or
    1/sqrt(V) (unit mode, V the Riemannian fiber volume); the phase is
    pi k t(x) b_i.
    """
    fibers = bs_fibers_abelian(om, k)
    b = np.array([float(c) for c in fibers.points[i]])
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, om.n)
    phase = np.pi * k * (x @ b)
    if norm_mode == "plain":
        lm = np.zeros_like(phase)
    elif norm_mode == "unit":
        lm = np.full_like(phase, -0.5 * np.log(fiber_volume(om)))
    else:
        raise ValueError(f"unknown norm_mode {norm_mode!r}")
    return GaugeValue(log_mag=lm[None, :], phase=phase[None, :])


def bergman_kernel(basis: ThetaBasis, x1, y1, x2, y2) -> np.ndarray:
    """Pi_k(z, w) = sum_i s_i(z) conj(s_i(w)) in gauge values.

    Inputs are matched batches of (x, y) coordinates for z and w.
    """
    v1 = section_gauge_values(basis, x1, y1).complex_values()
    v2 = section_gauge_values(basis, x2, y2).complex_values()
    return np.einsum("im,im->m", v1, np.conj(v2))


def fiber_coefficients(
    basis: ThetaBasis,
    i: int,
    norm_mode: str = "unit",
    measure: str = "riemannian",
    m_fiber: int | None = None,
) -> np.ndarray:
    """c_j = int over the i-th BS fiber of (sigma_i, s_j)_h.

    measure "riemannian" uses the fiber volume element sqrt(det G_xx) dx;
    "coordinate" uses plain dx.
    """
    om, k, n = basis.om, basis.k, basis.om.n
    m = m_fiber or max(16 * k, 32)
    axes = np.meshgrid(*([np.arange(m) / m] * n), indexing="ij")
    xg = np.stack([a.ravel() for a in axes], axis=-1)
    b = basis.b_points[i]
    yg = np.broadcast_to(b, xg.shape)
    s_vals = section_gauge_values(basis, xg, yg).complex_values()
    sig = sigma_section(om, k, i, xg, norm_mode=norm_mode).complex_values()[0]
    weight = fiber_volume(om) if measure == "riemannian" else 1.0
    return weight * (np.conj(s_vals) @ sig) / xg.shape[0]


@dataclass(frozen=True)
class ReconstructionResult:
    ratio_mean: complex
    ratio_rel_std: float
    measured_abs: float
    printed_abs: float
    printed_matches: bool


def printed_reconstruction_constant(om: RiemannMatrix, k: int) -> float:
    """|C'_Omega| k^{n/4} as printed: 2^{1/4} det(Im om)^{n/4} /
    |det conj(om)|^{n/2} times k^{n/4}."""
    n = om.n
    det_t = float(np.linalg.det(om.im))
    det_om = abs(np.linalg.det(np.conj(om.omega)))
    return 2.0**0.25 * det_t ** (n / 4.0) / det_om ** (n / 2.0) * k ** (n / 4.0)


def berg_reconstruct(
    basis: ThetaBasis, i: int, sample_x, sample_y
) -> ReconstructionResult:
    """Ratio of the fiber-integrated kernel to the i-th section.

    Computes int over the BS fiber of Pi_k(z, x) sigma_i(x) dx (coordinate
    measure, plain-normalized sigma) at each sample z and divides by
    s_i(z); the proposition predicts a z-independent constant.
    """
    om, n = basis.om, basis.om.n
    c = fiber_coefficients(basis, i, norm_mode="plain", measure="coordinate")
    x = np.atleast_2d(np.asarray(sample_x, dtype=float)).reshape(-1, n)
    y = np.atleast_2d(np.asarray(sample_y, dtype=float)).reshape(-1, n)
    vals = section_gauge_values(basis, x, y)
    # double precision leaves ~1e-17 residue at true section zeros, so the
    # degeneracy cutoff must sit well above that cancellation floor
    if np.any(vals.log_mag[i] < np.log(1e-12)):
        raise DegenerateSample("sample point too close to a section zero")
    v = vals.complex_values()
    ratios = (c @ v) / v[i]
    mean = complex(ratios.mean())
    rel_std = float(ratios.std() / max(abs(mean), 1e-300))
    printed = printed_reconstruction_constant(om, basis.k)
    return ReconstructionResult(
        ratio_mean=mean,
        ratio_rel_std=rel_std,
        measured_abs=abs(mean),
        printed_abs=printed,
        printed_matches=bool(abs(abs(mean) - printed) <= 1e-4 * printed),
    )


@dataclass(frozen=True)
class PeakSectionDiagnostics:
    k: int
    proportionality_residual: float
    gram_offdiag_max: float
    band_min: float
    band_max: float
    decay_slope: float
    decay_r2: float
    decay_slope_model: float
    change_of_basis_cond: float
    decay_curve: np.ndarray


def peak_section_suite(
    om: RiemannMatrix, k: int, grid_m: int | None = None
) -> PeakSectionDiagnostics:
    """Peak sections from fiber projections of the exact Bergman kernel.

    s~_i = (k/2pi)^{-n/4} sum_j c_ij s_j with c_ij the unit-mode fiber
    integrals; on a flat torus each s~_i is exactly proportional to s_i,
    so all the asymptotic statements can be checked against that oracle.
    """
    basis = theta_basis(om, k)
    n = om.n
    # the analogue of (k/2pi)^{-n/4} in this curvature normalization: the
    # reciprocal of the limiting fiber-projection coefficient C k^{n/4}
    kappa = np.exp(-basis.log_c_omega - 0.25 * n * np.log(k))
    c = np.stack(
        [fiber_coefficients(basis, i, norm_mode="unit") for i in range(basis.n_sections)]
    )

    # (a) proportionality: mass of row i away from entry i
    row_norm_sq = np.einsum("ij,ij->i", c, np.conj(c)).real
    diag_sq = np.abs(np.diag(c)) ** 2
    prop_res = float(np.sqrt(np.max(1.0 - diag_sq / row_norm_sq)))

    # (b) Gram of the peak sections through the quadrature Gram of the basis
    grid = quadrature_grid(n, max(8 * k, 16))
    gram = gram_matrix(basis, grid)
    gram_peak = kappa**2 * (c @ gram @ c.conj().T)
    dg = np.sqrt(np.abs(np.diag(gram_peak)))
    normalized = gram_peak / np.outer(dg, dg)
    off = np.abs(normalized - np.diag(np.diag(normalized)))
    gram_off = float(off.max())

    sv = np.linalg.svd(c, compute_uv=False)
    cond = float(sv[0] / sv[-1])

    # (d) pointwise band of sum |s~|^2 / k^n
    v = section_gauge_values(basis, grid.x, grid.y).complex_values()
    tilde = kappa * (c @ v)
    band = np.einsum("im,im->m", tilde, np.conj(tilde)).real / k**n

    # (e) decay of s~_0 along the base, against squared base distance
    ys = np.linspace(-0.35, 0.35, 57)
    pts_y = ys.reshape(-1, 1) if n == 1 else np.tile(ys.reshape(-1, 1), (1, n))
    pts_x = np.zeros_like(pts_y)
    gv = section_gauge_values(basis, pts_x, pts_y)
    tilde0 = kappa * (c[0] @ gv.complex_values())
    log_sq = 2.0 * np.log(np.abs(tilde0))
    dists = np.array([base_distance(p, np.zeros(n), om) for p in pts_y])
    a = np.polyfit(dists**2, log_sq, 1)
    fitted = np.polyval(a, dists**2)
    ss_res = float(np.sum((log_sq - fitted) ** 2))
    ss_tot = float(np.sum((log_sq - log_sq.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    curve = np.stack([dists**2, log_sq], axis=1)

    return PeakSectionDiagnostics(
        k=k,
        proportionality_residual=prop_res,
        gram_offdiag_max=gram_off,
        band_min=float(band.min()),
        band_max=float(band.max()),
        decay_slope=float(a[0]),
        decay_r2=float(r2),
        decay_slope_model=-2.0 * np.pi * k,
        change_of_basis_cond=cond,
        decay_curve=curve,
    )


def bsz_model_kernel(g: np.ndarray, k: int, u, v) -> complex:
    """(k/2pi)^n exp(-1/2 tu G ubar - 1/2 tv G vbar + tu G vbar)."""
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    lam = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    if lam[0] <= 0.0:
        raise NonPositive("model metric matrix must be positive definite")
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    n = g.shape[0]
    expo = (
        -0.5 * (u @ g @ np.conj(u))
        - 0.5 * (v @ g @ np.conj(v))
        + u @ g @ np.conj(v)
    )
    return complex((k / (2.0 * np.pi)) ** n * np.exp(expo))


def bsz_comparison(
    om: RiemannMatrix, k: int, n_pairs: int = 40, seed: int = 0, radius: float = 1.0
) -> float:
    """Max relative magnitude error of the model kernel against the exact
    kernel at offsets z0 + u/sqrt(k), with G = pi (Im om)^{-1}.

    The exact kernel is divided by (2pi)^n, matching the model's diagonal
    normalization of the volume form.
    """
    from .abelian import z_to_xy

    n = om.n
    basis = theta_basis(om, k)
    rng = np.random.default_rng(seed)
    g = np.pi * om.im_inv
    z0 = (rng.uniform(size=n) + 1j * rng.uniform(size=n)) @ om.im_chol.T
    worst = 0.0
    for _ in range(n_pairs):
        u = radius * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)) / np.sqrt(2)
        v = radius * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)) / np.sqrt(2)
        za = z0 + u / np.sqrt(k)
        zb = z0 + v / np.sqrt(k)
        xa, ya = z_to_xy(za, om)
        xb, yb = z_to_xy(zb, om)
        exact = bergman_kernel(basis, xa[None, :], ya[None, :], xb[None, :], yb[None, :])[0]
        model = bsz_model_kernel(g, k, u, v)
        err = abs(abs(exact) / (2.0 * np.pi) ** n - abs(model)) / abs(model)
        worst = max(worst, err)
    return worst
