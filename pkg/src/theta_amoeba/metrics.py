"""L^2 structure and pulled-back metrics for the section basis.

Integrals use the periodic tensor trapezoid rule, which on the torus is a
plain grid mean and converges spectrally for smooth integrands. In the
(x, y) chart the flat volume of X is exactly 1, so the grid mean needs no
volume factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .abelian import RiemannMatrix, real_metric_tensor
from .errors import ConfigError, NonPositive
from .theta import ThetaBasis, distortion_fk, section_gauge_values


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform periodic grid on [0,1)^{2n} in (x, y), m nodes per axis."""

    n: int
    m: int
    x: np.ndarray
    y: np.ndarray

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def weight(self) -> float:
        return 1.0 / self.size


@dataclass(frozen=True)
class MetricSample:
    """Metric tensor in (x, y) coordinates at one point."""

    x: np.ndarray
    y: np.ndarray
    g: np.ndarray


@dataclass(frozen=True)
class MetricField:
    """Metric tensors sampled on every node of a quadrature grid."""

    grid: QuadratureGrid
    g: np.ndarray


def quadrature_grid(n: int, m: int) -> QuadratureGrid:
    if m < 2:
        raise ConfigError(f"grid needs at least 2 nodes per axis, got {m}")
    axes = np.meshgrid(*([np.arange(m) / m] * (2 * n)), indexing="ij")
    flat = np.stack([a.ravel() for a in axes], axis=-1)
    return QuadratureGrid(n=n, m=m, x=flat[:, :n], y=flat[:, n:])


def check_grid_resolution(basis: ThetaBasis, grid: QuadratureGrid):
    if grid.n != basis.om.n:
        raise ConfigError(f"grid dimension {grid.n} does not match basis {basis.om.n}")
    if grid.m < 8 * basis.k:
        raise ConfigError(
            f"grid resolution {grid.m} too coarse for level {basis.k}; need >= {8 * basis.k}"
        )


def gram_matrix(basis: ThetaBasis, grid: QuadratureGrid) -> np.ndarray:
    """L^2 Gram matrix (s_i, s_j) by grid-mean quadrature of gauge values."""
    check_grid_resolution(basis, grid)
    v = section_gauge_values(basis, grid.x, grid.y).complex_values()
    g = (v @ v.conj().T) / grid.size
    return 0.5 * (g + g.conj().T)


def _hessian_log_fk(basis: ThetaBasis, x, y, h: float, weights=None):
    """Complex Hessian of log f_k in z, by Richardson-extrapolated central
    differences over the real and imaginary z directions."""
    om, n = basis.om, basis.om.n
    mode = "closed" if weights is None else "direct"

    def log_fk(xs, ys):
        return np.log(distortion_fk(basis, xs, ys, mode=mode, weights=weights))

    # complex displacement vectors for the 2n real directions
    dirs = [np.eye(n)[j] + 0.0j for j in range(n)] + [1j * np.eye(n)[j] for j in range(n)]

    def second_derivs(hh):
        disp = [np.zeros(n, dtype=complex)]
        index = {}
        for r in range(2 * n):
            for sgn in (2.0, -2.0):
                index[(r, r, sgn)] = len(disp)
                disp.append(sgn * hh * dirs[r])
        for r in range(2 * n):
            for s in range(r + 1, 2 * n):
                for sr, ss in itertools.product((1.0, -1.0), repeat=2):
                    index[(r, s, sr, ss)] = len(disp)
                    disp.append(hh * (sr * dirs[r] + ss * dirs[s]))
        dz = np.array(disp)
        # z-shift in unreduced coordinates: dx = T^{-1} Im dz, dy = Re dz - S dx
        dx = np.linalg.solve(om.im, dz.imag.T).T
        dy = dz.real - dx @ om.re.T
        m_pts = x.shape[0]
        xs = (x[:, None, :] + dx[None, :, :]).reshape(-1, n)
        ys = (y[:, None, :] + dy[None, :, :]).reshape(-1, n)
        f = log_fk(xs, ys).reshape(m_pts, len(disp))
        d = np.empty((m_pts, 2 * n, 2 * n))
        for r in range(2 * n):
            d[:, r, r] = (
                f[:, index[(r, r, 2.0)]] - 2.0 * f[:, 0] + f[:, index[(r, r, -2.0)]]
            ) / (4.0 * hh * hh)
        for r in range(2 * n):
            for s in range(r + 1, 2 * n):
                val = (
                    f[:, index[(r, s, 1.0, 1.0)]]
                    - f[:, index[(r, s, 1.0, -1.0)]]
                    - f[:, index[(r, s, -1.0, 1.0)]]
                    + f[:, index[(r, s, -1.0, -1.0)]]
                ) / (4.0 * hh * hh)
                d[:, r, s] = val
                d[:, s, r] = val
        return d

    d = (4.0 * second_derivs(0.5 * h) - second_derivs(h)) / 3.0
    daa = d[:, :n, :n]
    dbb = d[:, n:, n:]
    dab = d[:, :n, n:]
    dba = d[:, n:, :n]
    return 0.25 * ((daa + dbb) + 1j * (dab - dba))


def _field_from_hessian(basis: ThetaBasis, hess: np.ndarray) -> np.ndarray:
    """Real 2n x 2n tensors from the hermitian coefficient matrix
    H_k = (Im om)^{-1} + (1 / pi k) Hess_{z zbar} log f_k."""
    om = basis.om
    n = om.n
    hk = om.im_inv[None, :, :] + hess / (np.pi * basis.k)
    a = np.hstack([om.omega, np.eye(n)])
    g = np.einsum("ni,mip,pq->mnq", a.T, hk, np.conj(a)).real
    return 0.5 * (g + np.swapaxes(g, 1, 2))


def omega_k_field(basis: ThetaBasis, x, y, h_step: float = 1e-3, weights=None):
    """Pulled-back metric tensors at many points, shape (m, 2n, 2n)."""
    if not 1e-5 <= h_step <= 1e-2:
        raise ConfigError(f"h_step {h_step} outside [1e-5, 1e-2]")
    n = basis.om.n
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, n)
    y = np.atleast_2d(np.asarray(y, dtype=float)).reshape(-1, n)
    g = _field_from_hessian(basis, _hessian_log_fk(basis, x, y, h_step, weights))
    lams = np.linalg.eigvalsh(g)
    if lams[:, 0].min() <= 0.0:
        raise NonPositive(
            "pulled-back metric lost positive-definiteness; "
            "refine h_step or increase the level"
        )
    return g


def omega_k_tensor(basis: ThetaBasis, x, y, h_step: float = 1e-3) -> MetricSample:
    g = omega_k_field(basis, x, y, h_step=h_step)[0]
    return MetricSample(x=np.atleast_1d(x), y=np.atleast_1d(y), g=g)


def balanced_matrix(
    basis: ThetaBasis, grid: QuadratureGrid, h_step: float = 1e-3, scales=None
) -> np.ndarray:
    """Embedding mass matrix M_ij = int (s_i, s_j)_h / f against the
    pulled-back volume form.

    scales optionally rescales each section (negative control for the
    balanced condition); the distortion and volume form follow the scaled
    basis.
    """
    check_grid_resolution(basis, grid)
    v = section_gauge_values(basis, grid.x, grid.y).complex_values()
    weights = None
    if scales is not None:
        scales = np.asarray(scales, dtype=float)
        v = scales[:, None] * v
        weights = scales**2
    f = np.einsum("im,im->m", v, v.conj()).real
    gk = omega_k_field(basis, grid.x, grid.y, h_step=h_step, weights=weights)
    vol = np.sqrt(np.linalg.det(gk))
    m = np.einsum("im,jm,m->ij", v, v.conj(), vol / f) / grid.size
    return 0.5 * (m + m.conj().T)


def c0_metric_deviation(
    basis: ThetaBasis, grid: QuadratureGrid, h_step: float = 1e-3
) -> float:
    """sup over the grid of || g0^{-1/2} (g0 - g_k) g0^{-1/2} ||_2."""
    g0 = real_metric_tensor(basis.om)
    gk = omega_k_field(basis, grid.x, grid.y, h_step=h_step)
    chol = np.linalg.cholesky(g0)
    inv = np.linalg.inv(chol)
    rel = inv[None, :, :] @ (g0[None, :, :] - gk) @ inv.T[None, :, :]
    rel = 0.5 * (rel + np.swapaxes(rel, 1, 2))
    return float(np.max(np.abs(np.linalg.eigvalsh(rel))))


def flat_metric_field(om: RiemannMatrix, grid: QuadratureGrid) -> MetricField:
    g0 = real_metric_tensor(om)
    return MetricField(grid=grid, g=np.broadcast_to(g0, (grid.size, 2 * grid.n, 2 * grid.n)))


def omega_k_metric_field(
    basis: ThetaBasis, grid: QuadratureGrid, h_step: float = 1e-3
) -> MetricField:
    return MetricField(
        grid=grid, g=omega_k_field(basis, grid.x, grid.y, h_step=h_step)
    )


def _graph_edges(field: MetricField):
    """Sparse edge list of the periodic one-shell grid graph with
    endpoint-averaged metric edge lengths."""
    grid = field.grid
    dim = 2 * grid.n
    m = grid.m
    shape = (m,) * dim
    node = np.arange(grid.size).reshape(shape)
    rows, cols, vals = [], [], []
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=dim) if any(o)]
    # keep one orientation per undirected edge
    offsets = [o for o in offsets if o > tuple([0] * dim)]
    for o in offsets:
        nb = node
        for ax, step in enumerate(o):
            if step:
                nb = np.roll(nb, -step, axis=ax)
        i = node.ravel()
        j = nb.ravel()
        delta = np.array(o, dtype=float) / m
        gavg = 0.5 * (field.g[i] + field.g[j])
        w = np.sqrt(np.einsum("p,mpq,q->m", delta, gavg, delta))
        rows.append(i)
        cols.append(j)
        vals.append(w)
    return (
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(vals),
    )


def geodesic_distances(field: MetricField, sources) -> np.ndarray:
    """Graph-geodesic distances from source node indices to all nodes."""
    rows, cols, vals = _graph_edges(field)
    n_nodes = field.grid.size
    graph = coo_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    return dijkstra(graph, directed=False, indices=np.asarray(sources, dtype=int))


def node_index(grid: QuadratureGrid, x, y) -> int:
    """Nearest grid node, snapping each coordinate to j/m mod 1."""
    coords = np.concatenate([np.atleast_1d(x), np.atleast_1d(y)])
    j = np.mod(np.round(coords * grid.m).astype(int), grid.m)
    return int(np.ravel_multi_index(j, (grid.m,) * (2 * grid.n)))


def geodesic_distance(field: MetricField, p_xy, q_xy) -> float:
    """Distance between two points snapped to the metric-field grid."""
    src = node_index(field.grid, *p_xy)
    dst = node_index(field.grid, *q_xy)
    return float(geodesic_distances(field, [src])[0, dst])
