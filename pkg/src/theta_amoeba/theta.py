"""Theta series with characteristics and gauge-fixed section bases.

The level-k basis on X = C^n / (Omega Z^n + Z^n) is indexed by rational
points b_i in (1/k)(Z/k)^n of the base torus. All section evaluation goes
through one truncated lattice sum, reported in log-magnitude / phase form
so large k never overflows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .abelian import RiemannMatrix, xy_to_z
from .errors import NonPositive, NotPositive, TruncationOverflow

# tail budget: drop terms below ~1e-16 relative, plus margin
TAIL_LOG = 16.0 * np.log(10.0) + 5.0
MAX_RADIUS = 200
_CHUNK_TERMS = 4_000_000


def _offsets(n: int, r: int) -> np.ndarray:
    """Integer box [-r, r]^n in lexicographic order (deterministic sums)."""
    return np.array(list(itertools.product(range(-r, r + 1), repeat=n)), dtype=float)


def _truncation_radius(t_eff: np.ndarray, scale: float = 1.0) -> int:
    lam = float(np.linalg.eigvalsh(t_eff)[0])
    if lam <= 0.0:
        raise NotPositive("effective period matrix has nonpositive imaginary part")
    r = int(np.ceil(np.sqrt(TAIL_LOG / (np.pi * lam * scale)))) + 2
    if r > MAX_RADIUS:
        raise TruncationOverflow(
            f"lattice truncation radius {r} exceeds cap {MAX_RADIUS}"
        )
    return r


def theta_char_log(om_eff: np.ndarray, z: np.ndarray, a=None, b=None):
    """Log-form theta sum with characteristics.

    theta[a; b](om_eff, z) = sum_l e(1/2 t(l+a) om (l+a) + t(l+a)(z+b)),
    with e(t) = exp(2 pi i t). Returns (log_mag, phase) arrays over the
    leading axis of z (shape (m, n)).
    """
    om_eff = np.atleast_2d(np.asarray(om_eff, dtype=complex))
    n = om_eff.shape[0]
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    a = np.zeros(n) if a is None else np.asarray(a, dtype=float)
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    t_eff = om_eff.imag
    r = _truncation_radius(t_eff)
    off = _offsets(n, r)

    zb = z + b
    l_star = np.round(-a - zb.imag @ np.linalg.inv(t_eff).T)

    m = z.shape[0]
    chunk = max(1, _CHUNK_TERMS // off.shape[0])
    log_mag = np.empty(m)
    phase = np.empty(m)
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        la = l_star[s:e, None, :] + off[None, :, :] + a
        quad = np.einsum("mjn,np,mjp->mj", la, om_eff, la.astype(complex))
        lin = np.einsum("mjn,mn->mj", la.astype(complex), zb[s:e])
        w = 2j * np.pi * (0.5 * quad + lin)
        shift = w.real.max(axis=1)
        vals = np.exp(w - shift[:, None]).sum(axis=1)
        # theta has honest zeros: log_mag = -inf there, phase arbitrary 0
        with np.errstate(divide="ignore"):
            log_mag[s:e] = shift + np.log(np.abs(vals))
        phase[s:e] = np.angle(vals)
    return log_mag, phase


def theta_char(om_eff, z, a=None, b=None) -> np.ndarray:
    """Complex theta values; only safe when magnitudes are moderate."""
    lm, ph = theta_char_log(om_eff, z, a=a, b=b)
    return np.exp(lm + 1j * ph)


@dataclass(frozen=True)
class GaugeValue:
    """Section values in the unitary gauge, stored as log|.| and phase.

    Arrays have shape (n_sections, n_points). In this gauge the pointwise
    h-norm of a section is exp(log_mag), so norms stay representable at
    any level.
    """

    log_mag: np.ndarray
    phase: np.ndarray

    def complex_values(self) -> np.ndarray:
        return np.exp(self.log_mag + 1j * self.phase)

    def norm_sq(self) -> np.ndarray:
        return np.exp(2.0 * self.log_mag)


@dataclass(frozen=True)
class ThetaBasis:
    """Level-k theta basis, indexed lexicographically over (Z/k)^n."""

    om: RiemannMatrix
    k: int
    indices: np.ndarray

    @property
    def n_sections(self) -> int:
        return self.indices.shape[0]

    @property
    def b_points(self) -> np.ndarray:
        return self.indices / self.k

    @property
    def log_c_omega(self) -> float:
        """log of the L^2 normalizing constant 2^{n/4} det(Im om)^{1/4}."""
        n = self.om.n
        logdet = 2.0 * np.sum(np.log(np.diag(self.om.im_chol)))
        return 0.25 * (n * np.log(2.0) + logdet)


def theta_basis(om: RiemannMatrix, k: int) -> ThetaBasis:
    if int(k) < 1:
        raise NonPositive(f"level k must be a positive integer, got {k}")
    k = int(k)
    idx = np.array(list(itertools.product(range(k), repeat=om.n)), dtype=int)
    return ThetaBasis(om=om, k=k, indices=idx)


def _as_points(x, y, n):
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, n)
    y = np.atleast_2d(np.asarray(y, dtype=float)).reshape(-1, n)
    if x.shape != y.shape:
        raise ValueError("x and y must have matching shapes")
    return x, y


def section_gauge_values(basis: ThetaBasis, x, y) -> GaugeValue:
    """Evaluate every basis section at unreduced coordinates z = Omega x + y.

    The unitary gauge multiplies the holomorphic section by
    exp(i pi k (tx Omega x + tx y)) times the Gaussian h-weight, giving
      log|s_i|_h = log C - (n/4) log k - pi k tx T x + log|Theta_k(z; b_i)|
      arg s_i    = pi k (tx S x + tx y) + arg Theta_k(z; b_i)
    with Theta_k(z; b) = theta[0; 0](Omega / k, z - b).
    """
    om, k, n = basis.om, basis.k, basis.om.n
    x, y = _as_points(x, y, n)
    m = x.shape[0]
    z = xy_to_z(x, y, om)

    # one stacked lattice-sum call: section b enters only as a z-shift
    zs = (z[None, :, :] - basis.b_points[:, None, :]).reshape(-1, n)
    lm, ph = theta_char_log(om.omega / k, zs)
    lm = lm.reshape(basis.n_sections, m)
    ph = ph.reshape(basis.n_sections, m)

    xtx = np.einsum("mi,ij,mj->m", x, om.im, x)
    xsx = np.einsum("mi,ij,mj->m", x, om.re, x)
    xy = np.einsum("mi,mi->m", x, y)
    base_lm = basis.log_c_omega - 0.25 * n * np.log(k) - np.pi * k * xtx
    base_ph = np.pi * k * (xsx + xy)
    return GaugeValue(log_mag=base_lm[None, :] + lm, phase=base_ph[None, :] + ph)


def section_norm_sq_reference(basis: ThetaBasis, x, y) -> np.ndarray:
    """Pointwise h-norms squared through the classical (non-gauge) route.

    Uses s_i = C k^{-n/4} theta_0(z)^k Theta_k(z; b_i) with the holomorphic
    Gaussian theta_0 = exp(pi/2 tz (Im om)^{-1} z) and the level-k metric
    weight exp(-pi k tz (Im om)^{-1} zbar). Serves as an oracle for the
    gauge formulas.
    """
    om, k, n = basis.om, basis.k, basis.om.n
    x, y = _as_points(x, y, n)
    z = xy_to_z(x, y, om)
    zi = np.linalg.solve(om.im_chol.T, np.linalg.solve(om.im_chol, z.T)).T
    theta0_re = 0.5 * np.pi * np.einsum("mi,mi->m", z, zi).real
    weight = -np.pi * np.einsum("mi,mi->m", z, np.conj(zi)).real

    zs = (z[None, :, :] - basis.b_points[:, None, :]).reshape(-1, n)
    lm, _ = theta_char_log(om.omega / k, zs)
    lm = lm.reshape(basis.n_sections, x.shape[0])
    const = 2.0 * basis.log_c_omega - 0.5 * n * np.log(k)
    return np.exp(const + (2.0 * k * theta0_re + k * weight)[None, :] + 2.0 * lm)


def distortion_fk(basis: ThetaBasis, x, y, mode: str = "closed", weights=None):
    """Density f_k = sum_i w_i |s_i|_h^2 of the coherent-state distortion.

    mode "direct" sums the gauge norms section by section and accepts
    per-section weights. mode "closed" uses the lattice resummation over
    the full (unweighted) basis, which collapses the b-sum and is cheap
    at large k.
    """
    om, k, n = basis.om, basis.k, basis.om.n
    x, y = _as_points(x, y, n)
    if mode == "direct":
        sq = section_gauge_values(basis, x, y).norm_sq()
        if weights is None:
            return sq.sum(axis=0)
        w = np.asarray(weights, dtype=float)
        if w.shape != (basis.n_sections,):
            raise ValueError("weights must have one entry per section")
        return w @ sq
    if mode != "closed":
        raise ValueError(f"unknown distortion mode {mode!r}")
    if weights is not None:
        raise ValueError("closed mode supports only the unweighted density")
    return _distortion_closed(om, k, n, x, y)


def _distortion_closed(om: RiemannMatrix, k, n, x, y):
    """f_k = C^2 k^{n/2} sum_{l,q} exp(-pi k (tuTu + tvTv)) cos-phase term

    with u = x + l/k and v = u - q; the phase angle is
    2 pi k tq (S (u - q/2) + y). Derived by summing |s_i|^2 over the basis,
    which forces the two lattice indices to agree mod k.
    """
    t, s = om.im, om.re
    lam = float(np.linalg.eigvalsh(t)[0])
    r = np.sqrt(TAIL_LOG / (np.pi * k * lam))
    lr = int(np.ceil(k * r)) + 2
    qr = int(np.ceil(2.0 * r)) + 2
    if lr > MAX_RADIUS:
        raise TruncationOverflow(f"resummation radius {lr} exceeds cap {MAX_RADIUS}")
    off_l = _offsets(n, lr)
    off_q = _offsets(n, qr)

    m = x.shape[0]
    chunk = max(1, _CHUNK_TERMS // (off_l.shape[0] * off_q.shape[0]))
    out = np.empty(m)
    logdet = 2.0 * np.sum(np.log(np.diag(om.im_chol)))
    const = 0.5 * n * np.log(2.0) + 0.5 * logdet + 0.5 * n * np.log(k)
    for c0 in range(0, m, chunk):
        c1 = min(m, c0 + chunk)
        xs, ys = x[c0:c1], y[c0:c1]
        l_star = np.round(-k * xs)
        u = xs[:, None, :] + (l_star[:, None, :] + off_l[None, :, :]) / k
        v = u[:, :, None, :] - off_q[None, None, :, :]
        utu = np.einsum("mji,ip,mjp->mj", u, t, u)
        vtv = np.einsum("mjqi,ip,mjqp->mjq", v, t, v)
        mag = -np.pi * k * (utu[:, :, None] + vtv)
        su = u @ s.T
        ang = 2.0 * np.pi * k * (
            np.einsum("qi,mji->mjq", off_q, su)
            - 0.5 * np.einsum("qi,ip,qp->q", off_q, s, off_q)[None, None, :]
            + (off_q @ ys.T).T[:, None, :]
        )
        out[c0:c1] = (np.exp(const + mag) * np.cos(ang)).sum(axis=(1, 2))
    return out
