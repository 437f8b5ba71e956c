"""Finite metric spaces, Hausdorff and Gromov-Hausdorff estimates, and the
level sweep measuring convergence of the embedded torus to its base.

All Gromov-Hausdorff numbers are correspondence upper bounds: exact GH is
combinatorial, but the convergence statements under test are themselves
proved through explicit epsilon-approximations, so upper bounds carry the
content.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .abelian import RiemannMatrix, base_distance
from .amoeba import (
    amoeba_sample,
    bk_distances,
    moment_points,
    nearest_sample_index,
    phi_k,
)
from .errors import ConfigError, EmptySet, NotACorrespondence
from .metrics import (
    c0_metric_deviation,
    flat_metric_field,
    geodesic_distances,
    omega_k_metric_field,
    quadrature_grid,
)
from .theta import theta_basis


@dataclass(frozen=True)
class FiniteMetricSpace:
    labels: list
    d: np.ndarray

    @property
    def size(self) -> int:
        return self.d.shape[0]


def finite_metric_space(labels, d, check: bool = True, rng=None) -> FiniteMetricSpace:
    d = np.asarray(d, dtype=float)
    if check:
        if not np.allclose(d, d.T, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(d) != 0.0) or np.any(d < 0.0):
            raise ValueError("need zero diagonal and nonnegative entries")
        m = d.shape[0]
        if m <= 200:
            triples = (
                d[:, :, None] + d[None, :, :] - d[:, None, :]
            )
            if triples.min() < -1e-9:
                raise ValueError("triangle inequality violated")
        else:
            rng = rng or np.random.default_rng(0)
            i, j, l = rng.integers(m, size=(3, 4000))
            if np.min(d[i, j] + d[j, l] - d[i, l]) < -1e-9:
                raise ValueError("triangle inequality violated (sampled)")
    return FiniteMetricSpace(labels=list(labels), d=d)


def hausdorff_distance(space: FiniteMetricSpace, a_idx, b_idx) -> float:
    a = np.asarray(a_idx, dtype=int)
    b = np.asarray(b_idx, dtype=int)
    if a.size == 0 or b.size == 0:
        raise EmptySet("Hausdorff distance needs nonempty subsets")
    sub = space.d[np.ix_(a, b)]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def map_distortion(src: FiniteMetricSpace, dst: FiniteMetricSpace, phi):
    """(distortion, covering_radius) of a map given as dst indices per src
    point; the map is an eps-Hausdorff approximation iff both are < eps."""
    phi = np.asarray(phi, dtype=int)
    if phi.size != src.size:
        raise NotACorrespondence("phi must assign a target to every source point")
    dist = float(np.max(np.abs(src.d - dst.d[np.ix_(phi, phi)])))
    covering = float(dst.d[:, phi].min(axis=1).max())
    return dist, covering


def gh_upper_bound(a: FiniteMetricSpace, b: FiniteMetricSpace, corr) -> float:
    """Half the distortion of a correspondence (pairs of indices)."""
    corr = np.asarray(corr, dtype=int)
    if corr.ndim != 2 or corr.shape[1] != 2:
        raise NotACorrespondence("correspondence must be a list of index pairs")
    if (
        np.unique(corr[:, 0]).size != a.size
        or np.unique(corr[:, 1]).size != b.size
    ):
        raise NotACorrespondence("correspondence must cover both spaces")
    da = a.d[np.ix_(corr[:, 0], corr[:, 0])]
    db = b.d[np.ix_(corr[:, 1], corr[:, 1])]
    return 0.5 * float(np.max(np.abs(da - db)))


@dataclass(frozen=True)
class ConvergenceReport:
    ks: np.ndarray
    rows: dict
    slopes: dict
    notes: list = field(default_factory=list)


def fit_loglog_slope(ks, values):
    """Least-squares slope of log value vs log k, excluding the smallest k
    (transient); returns (slope, 95% half-width)."""
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=float)
    if ks.size < 3:
        raise ConfigError("slope fit needs at least 3 levels")
    mask = ks > ks.min() if ks.size > 3 else np.ones_like(ks, dtype=bool)
    res = stats.linregress(np.log(ks[mask]), np.log(np.maximum(values[mask], 1e-300)))
    return float(res.slope), float(1.96 * res.stderr)


def convergence_suite(
    om: RiemannMatrix,
    k_list,
    grid_resolution: int | None = None,
    n_pairs: int = 50,
    seed: int = 0,
) -> ConvergenceReport:
    """Per-level convergence measurements for an n = 1 period matrix.

    For each k: C0 deviation of the pulled-back metric, a GH upper bound
    between flat and pulled-back geodesics through the identity
    correspondence on a fixed node sample, the base-map distortion and
    covering radius of the moment-map image, and the coupled-space defect
    d(pi(p), pi_k(p)) over sampled points.
    """
    if om.n != 1:
        raise ConfigError("convergence suite is implemented for n = 1")
    k_list = sorted(int(k) for k in k_list)
    if len(k_list) < 3:
        raise ConfigError("need at least 3 ascending levels")
    m0 = grid_resolution or max(8 * max(k_list), 32)
    if m0 < 8 * max(k_list):
        raise ConfigError(f"grid resolution {m0} below 8*max(k) = {8 * max(k_list)}")
    rng = np.random.default_rng(seed)

    metric_grid = quadrature_grid(1, m0)
    flat_field = flat_metric_field(om, metric_grid)
    nodes = rng.choice(metric_grid.size, size=min(24, metric_grid.size), replace=False)
    d0_all = geodesic_distances(flat_field, nodes)
    d0 = d0_all[:, nodes]

    rows = {
        "c0_deviation": [],
        "gh_ub_metric": [],
        "phi_distortion": [],
        "phi_covering_radius": [],
        "coupled_defect": [],
        "base_diameter": [],
    }
    for k in k_list:
        basis = theta_basis(om, k)
        rows["c0_deviation"].append(c0_metric_deviation(basis, metric_grid))

        dk_field = omega_k_metric_field(basis, metric_grid)
        dk = geodesic_distances(dk_field, nodes)[:, nodes]
        rows["gh_ub_metric"].append(0.5 * float(np.max(np.abs(d0 - dk))))

        amoeba_grid = quadrature_grid(1, 8 * k)
        sample = amoeba_sample(basis, amoeba_grid)
        ys = np.arange(8 * k) / (8 * k)
        phi_idx = np.array(
            [nearest_sample_index(sample, phi_k(basis, [y])) for y in ys]
        )
        d_phi = bk_distances(sample, phi_idx)
        # the same eight base points j/8 exist exactly on every 8k grid,
        # so the base-distance block is identical across the sweep
        base_sub = np.arange(8) * k
        d_base = np.array(
            [[base_distance([ys[i]], [ys[j]], om) for j in base_sub] for i in base_sub]
        )
        d_img = d_phi[np.ix_(base_sub, phi_idx[base_sub])]
        distortion = float(np.max(np.abs(d_base - d_img)))
        covering = float(d_phi.min(axis=0).max())
        rows["phi_distortion"].append(distortion)
        rows["phi_covering_radius"].append(covering)

        # coupled-space defect: distance inside B_k from the image of p to
        # the image of its base projection, plus the measured distortion
        # as the gluing padding
        p_idx = rng.choice(sample.size, size=min(n_pairs, sample.size), replace=False)
        nearest_phi = np.argmin(
            np.abs(
                np.subtract.outer(sample.pre_y[p_idx, 0], ys)
                - np.round(np.subtract.outer(sample.pre_y[p_idx, 0], ys))
            ),
            axis=1,
        )
        defect = d_phi[nearest_phi, p_idx]
        rows["coupled_defect"].append(float(defect.max()) + distortion)

        rows["base_diameter"].append(float(d_base.max()))

    rows = {k2: np.array(v) for k2, v in rows.items()}
    ks = np.array(k_list, dtype=float)
    slopes = {
        name: fit_loglog_slope(ks, rows[name])
        for name in (
            "c0_deviation",
            "gh_ub_metric",
            "phi_distortion",
            "phi_covering_radius",
            "coupled_defect",
        )
    }
    notes = [
        "smooth-convergence claims are certified only through the C0 proxy",
        "GH numbers are correspondence upper bounds, not exact distances",
    ]
    return ConvergenceReport(ks=ks, rows=rows, slopes=slopes, notes=notes)
