"""Period-matrix validation and flat geometry of X = C^n / (Omega Z^n + Z^n).

Coordinates follow the convention z = Omega x + y with x the fiber (action)
coordinate and y the base coordinate; both live on the unit torus.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotPositive, NotSymmetric

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class RiemannMatrix:
    """Validated n x n complex symmetric matrix with Im(omega) > 0."""

    n: int
    omega: np.ndarray
    im_chol: np.ndarray
    lambda_min: float

    @property
    def re(self) -> np.ndarray:
        return self.omega.real

    @property
    def im(self) -> np.ndarray:
        return self.omega.imag

    @property
    def im_inv(self) -> np.ndarray:
        c = self.im_chol
        return np.linalg.inv(c.T) @ np.linalg.inv(c)

    def hermitian_form(self, z: np.ndarray, w: np.ndarray) -> complex:
        """t(z) (Im omega)^{-1} conj(w), evaluated through the Cholesky factor."""
        a = np.linalg.solve(self.im_chol, np.asarray(z, dtype=complex))
        b = np.linalg.solve(self.im_chol, np.conj(np.asarray(w, dtype=complex)))
        return complex(a @ b)


@dataclass(frozen=True)
class TorusPoint:
    """Point of X in action-angle coordinates, reduced to [0, 1)^n each."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", reduce_mod1(self.x))
        object.__setattr__(self, "y", reduce_mod1(self.y))


@dataclass(frozen=True)
class BaseMetric:
    """Riemannian-submersion quotient metric on the base torus X^-."""

    q: np.ndarray


def reduce_mod1(v) -> np.ndarray:
    """Reduce coordinates to [0, 1), rounding near-1 values down to 0."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    r = np.mod(v, 1.0)
    r[r >= 1.0 - 1e-15] = 0.0
    return r


def validate_riemann_matrix(raw) -> RiemannMatrix:
    """Check symmetry and positivity of Im(omega); derive Cholesky data."""
    om = np.atleast_2d(np.asarray(raw, dtype=complex))
    if om.shape[0] != om.shape[1]:
        raise NotSymmetric(f"matrix is {om.shape}, expected square")
    asym = np.max(np.abs(om - om.T)) if om.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"entrywise asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    im = om.imag.copy()
    try:
        chol = np.linalg.cholesky(im)
    except np.linalg.LinAlgError as exc:
        raise NotPositive("Im(omega) is not positive definite") from exc
    lam = float(np.linalg.eigvalsh(im)[0])
    if lam <= 0.0:
        raise NotPositive("Im(omega) has a nonpositive eigenvalue")
    return RiemannMatrix(n=om.shape[0], omega=om, im_chol=chol, lambda_min=lam)


def riemann_matrix_from_json(source) -> RiemannMatrix:
    """Load {"n": int, "re": [[...]], "im": [[...]]} from a path or dict."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source) as fh:
            data = json.load(fh)
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    om = re + 1j * im
    rm = validate_riemann_matrix(om)
    if rm.n != int(data["n"]):
        raise NotSymmetric(f"declared n={data['n']} but matrix is {rm.n} x {rm.n}")
    return rm


def coords_to_z(p: TorusPoint, om: RiemannMatrix) -> np.ndarray:
    return om.omega @ p.x + p.y


def xy_to_z(x, y, om: RiemannMatrix) -> np.ndarray:
    """Unreduced chart map; x, y may be arrays of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x @ om.omega.T + y


def z_to_coords(z, om: RiemannMatrix) -> TorusPoint:
    x, y = z_to_xy(z, om)
    return TorusPoint(x=x, y=y)


def z_to_xy(z, om: RiemannMatrix):
    """Invert z = Omega x + y without reduction: x = (Im om)^{-1} Im z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x = np.linalg.solve(om.im_chol.T, np.linalg.solve(om.im_chol, z.imag))
    y = z.real - om.re @ x
    return x, y


def h0_log_density(z, om: RiemannMatrix) -> float:
    """log h0 = -pi * t(z) (Im omega)^{-1} conj(z); real by Hermitian symmetry."""
    val = om.hermitian_form(z, z)
    return float(-np.pi * val.real)


def real_metric_tensor(om: RiemannMatrix) -> np.ndarray:
    """Flat metric of omega_0 as a real 2n x 2n form in (x, y) coordinates.

    dz = Omega dx + dy, so G = Re(tA H conj(A)) with A = [Omega | I] and
    H = (Im omega)^{-1}.
    """
    n = om.n
    a = np.hstack([om.omega, np.eye(n)])
    g = (a.T @ om.im_inv @ np.conj(a)).real
    return 0.5 * (g + g.T)


def fiber_block(om: RiemannMatrix) -> np.ndarray:
    return real_metric_tensor(om)[: om.n, : om.n]


def fiber_volume(om: RiemannMatrix) -> float:
    return float(np.sqrt(np.linalg.det(fiber_block(om))))


def base_metric(om: RiemannMatrix) -> BaseMetric:
    """Schur complement of the fiber block in the flat 2n x 2n metric."""
    g = real_metric_tensor(om)
    n = om.n
    gxx, gxy = g[:n, :n], g[:n, n:]
    gyx, gyy = g[n:, :n], g[n:, n:]
    q = gyy - gyx @ np.linalg.solve(gxx, gxy)
    return BaseMetric(q=0.5 * (q + q.T))


def _lattice_shifts(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=n)))


def _torus_quadratic_distance(d: np.ndarray, q: np.ndarray) -> float:
    """Min over one shell of integer shifts of sqrt(t(d+s) q (d+s))."""
    shifts = _lattice_shifts(d.size)
    v = d[None, :] + shifts
    vals = np.einsum("ki,ij,kj->k", v, q, v)
    return float(np.sqrt(max(vals.min(), 0.0)))


def total_distance(p: TorusPoint, q: TorusPoint, om: RiemannMatrix) -> float:
    """Flat geodesic distance on (X, omega_0), one lattice shell per factor.

    Assumes the test matrices are close enough to Minkowski-reduced that the
    nearest lattice representative lies within {-1,0,1}^{2n}.
    """
    g = real_metric_tensor(om)
    d = np.concatenate([p.x - q.x, p.y - q.y])
    return _torus_quadratic_distance(d, g)


def base_distance(y1, y2, om: RiemannMatrix) -> float:
    """Quotient-metric distance on the base torus X^-."""
    q = base_metric(om).q
    d = reduce_mod1(y1) - reduce_mod1(y2)
    return _torus_quadratic_distance(np.atleast_1d(d), q)
