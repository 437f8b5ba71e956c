"""Command-line harness for the experiment suites.

Subcommands cover point evaluation, Gram and balanced matrices, fiber
enumeration, amoeba export, the convergence sweep, the peak-section and
near-diagonal kernel suites, and the mirror two-torus example.  Every run
writes a manifest listing all produced files; data artifacts are
byte-reproducible for a fixed config and seed (the manifest itself carries
wall-clock timings, so it is the one file allowed to differ between runs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .abelian import RiemannMatrix, riemann_matrix_from_json
from .amoeba import amoeba_sample
from .errors import ConfigError, ThetaAmoebaError
from .gh import convergence_suite
from .metrics import balanced_matrix, gram_matrix, quadrature_grid
from .mirror import (
    addition_formula_residual,
    intersection_count_vs_dimension,
    triangle_coefficient,
)
from .quantization import (
    bs_fibers_abelian,
    bs_points_cp1,
    bsz_comparison,
    peak_section_suite,
)
from .theta import section_gauge_values, theta_basis


@dataclass
class ExperimentConfig:
    riemann_matrix: object
    k_list: list
    grid_per_dim: int
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if not self.k_list:
            raise ConfigError("k_list must be nonempty")
        ks = list(self.k_list)
        if any(int(k) != k or k < 1 for k in ks):
            raise ConfigError("k_list entries must be positive integers")
        if ks != sorted(ks) or len(set(ks)) != len(ks):
            raise ConfigError("k_list must be strictly ascending")
        self.k_list = [int(k) for k in ks]
        if self.grid_per_dim < 8 * max(self.k_list):
            raise ConfigError(
                f"grid_per_dim {self.grid_per_dim} is below 8*max(k_list)"
            )
        self.seed = int(self.seed)

    def echo(self) -> dict:
        return {
            "riemann_matrix": {
                "n": self.riemann_matrix.n,
                "re": self.riemann_matrix.re.tolist(),
                "im": self.riemann_matrix.im.tolist(),
            },
            "k_list": self.k_list,
            "grid_per_dim": self.grid_per_dim,
            "tolerances": dict(sorted(self.tolerances.items())),
            "seed": self.seed,
            "output_dir": str(self.output_dir),
        }


def _load_omega(source) -> RiemannMatrix:
    if isinstance(source, RiemannMatrix):
        return source
    if isinstance(source, str):
        with open(source) as fh:
            source = json.load(fh)
    return riemann_matrix_from_json(source)


def load_config(path: str | None, args) -> ExperimentConfig:
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - {
            "riemann_matrix",
            "k_list",
            "grid_per_dim",
            "tolerances",
            "seed",
            "output_dir",
        }
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if args.omega_file is not None:
        raw["riemann_matrix"] = args.omega_file
    if args.k is not None:
        raw["k_list"] = list(args.k)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    if "riemann_matrix" not in raw:
        raw["riemann_matrix"] = {"n": 1, "re": [[0.0]], "im": [[1.0]]}
    if "k_list" not in raw:
        raw["k_list"] = [2, 4]
    if args.grid is not None:
        raw["grid_per_dim"] = args.grid
    if "grid_per_dim" not in raw:
        raw["grid_per_dim"] = 8 * max(raw["k_list"])
    try:
        om = _load_omega(raw["riemann_matrix"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad riemann_matrix: {exc}") from exc
    return ExperimentConfig(
        riemann_matrix=om,
        k_list=raw["k_list"],
        grid_per_dim=raw["grid_per_dim"],
        tolerances=raw.get("tolerances", {}),
        seed=raw.get("seed", 0),
        output_dir=raw.get("output_dir", "out"),
    )


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cap_threads() -> int | None:
    raw = os.environ.get("THETA_AMOEBA_THREADS")
    if raw is None:
        return None
    try:
        limit = max(1, int(raw))
    except ValueError:
        raise ConfigError(f"THETA_AMOEBA_THREADS must be an integer, got {raw!r}")
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=limit)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(limit)
    return limit


def run_theta_eval(cfg: ExperimentConfig, out: Path) -> tuple[dict, list]:
    om = cfg.riemann_matrix
    rows = []
    for k in cfg.k_list:
        basis = theta_basis(om, k)
        grid = quadrature_grid(om.n, 8)
        gv = section_gauge_values(basis, grid.x, grid.y)
        for i in range(basis.n_sections):
            for m in range(grid.size):
                rows.append(
                    [k, i]
                    + [float(v) for v in grid.x[m]]
                    + [float(v) for v in grid.y[m]]
                    + [float(gv.log_mag[i, m]), float(gv.phase[i, m])]
                )
    header = (
        ["k", "section"]
        + [f"x{d}" for d in range(om.n)]
        + [f"y{d}" for d in range(om.n)]
        + ["log_mag", "phase"]
    )
    write_csv(out / "theta_eval.csv", header, rows)
    return {"points_per_level": 8 ** (2 * om.n)}, ["theta_eval.csv"]


def run_gram(cfg: ExperimentConfig, out: Path) -> tuple[dict, list]:
    om = cfg.riemann_matrix
    rows, summary = [], {}
    for k in cfg.k_list:
        basis = theta_basis(om, k)
        grid = quadrature_grid(om.n, cfg.grid_per_dim)
        gram = gram_matrix(basis, grid)
        bal = balanced_matrix(basis, grid)
        gram_dev = float(np.max(np.abs(gram - np.eye(basis.n_sections))))
        tr = bal.trace().real / basis.n_sections
        bal_dev = float(
            np.max(np.abs(bal - tr * np.eye(basis.n_sections))) / tr
        )
        summary[str(k)] = {"gram_max_dev": gram_dev, "balanced_rel_dev": bal_dev}
        for i in range(basis.n_sections):
            for j in range(basis.n_sections):
                rows.append([k, i, j, float(gram[i, j].real), float(gram[i, j].imag)])
    write_csv(out / "gram.csv", ["k", "i", "j", "re", "im"], rows)
    return summary, ["gram.csv"]


def run_bs_count(cfg: ExperimentConfig, out: Path, cp1: bool) -> tuple[dict, list]:
    rows, summary = [], {}
    for k in cfg.k_list:
        if cp1:
            fs = bs_points_cp1(k)
            pts = [(p,) for p in fs.points]
        else:
            fs = bs_fibers_abelian(cfg.riemann_matrix, k)
            pts = fs.points
        summary[str(k)] = {"kind": fs.kind, "count": len(pts)}
        for idx, p in enumerate(pts):
            rows.append([k, idx] + [str(c) for c in p])
    dim = 1 if cp1 else cfg.riemann_matrix.n
    header = ["k", "index"] + [f"b{d}" for d in range(dim)]
    write_csv(out / "bs_count.csv", header, rows)
    return summary, ["bs_count.csv"]


def run_amoeba(cfg: ExperimentConfig, out: Path) -> tuple[dict, list]:
    om = cfg.riemann_matrix
    rows, summary = [], {}
    for k in cfg.k_list:
        basis = theta_basis(om, k)
        grid = quadrature_grid(om.n, cfg.grid_per_dim)
        sample = amoeba_sample(basis, grid)
        summary[str(k)] = {"points": sample.size}
        for m in range(sample.size):
            for comp in range(sample.xi.shape[1]):
                rows.append([k, m, comp, float(sample.xi[m, comp])])
    write_csv(out / "amoeba.csv", ["k", "point", "component", "xi"], rows)
    return summary, ["amoeba.csv"]


def run_converge(cfg: ExperimentConfig, out: Path) -> tuple[dict, list]:
    report = convergence_suite(
        cfg.riemann_matrix, cfg.k_list, cfg.grid_per_dim, seed=cfg.seed
    )
    rows = []
    names = sorted(report.rows)
    for idx, k in enumerate(report.ks):
        rows.append([k] + [float(report.rows[name][idx]) for name in names])
    write_csv(out / "converge.csv", ["k"] + names, rows)
    summary = {
        "slopes": {name: report.slopes[name] for name in sorted(report.slopes)},
        "notes": report.notes,
    }
    return summary, ["converge.csv"]


def run_peak(cfg: ExperimentConfig, out: Path) -> tuple[dict, list]:
    om = cfg.riemann_matrix
    rows, summary = [], {}
    for k in cfg.k_list:
        d = peak_section_suite(om, k)
        bsz_err = bsz_comparison(om, k, n_pairs=20, seed=cfg.seed)
        rows.append(
            [
                k,
                d.proportionality_residual,
                d.gram_offdiag_max,
                d.band_min,
                d.band_max,
                d.decay_slope,
                d.decay_slope_model,
                d.decay_r2,
                bsz_err,
            ]
        )
        summary[str(k)] = {"band": [d.band_min, d.band_max], "bsz_rel_err": bsz_err}
    write_csv(
        out / "peak.csv",
        [
            "k",
            "proportionality_residual",
            "gram_offdiag_max",
            "band_min",
            "band_max",
            "decay_slope",
            "decay_slope_model",
            "decay_r2",
            "bsz_rel_err",
        ],
        rows,
    )
    return summary, ["peak.csv"]


def run_mirror(cfg: ExperimentConfig, out: Path) -> tuple[dict, list]:
    taus = [1j, 0.5 + 1j, 2j]
    rows = []
    for tau in taus:
        b0 = triangle_coefficient(tau, "b0")
        b1 = triangle_coefficient(tau, "b1")
        u, v = np.meshgrid(np.linspace(0.0, 1.0, 10), np.linspace(0.0, 1.0, 10))
        resid = addition_formula_residual(tau, (u + tau * v).ravel())
        rows.append([tau.real, tau.imag, b0.real, b0.imag, b1.real, b1.imag, resid])
    write_csv(
        out / "mirror.csv",
        ["tau_re", "tau_im", "b0_re", "b0_im", "b1_re", "b1_im", "addition_residual"],
        rows,
    )
    counts = {str(k): intersection_count_vs_dimension(k)[0] for k in cfg.k_list}
    return {"intersection_counts": counts}, ["mirror.csv"]


_SUBCOMMANDS = ("theta-eval", "gram", "bs-count", "amoeba", "converge", "peak", "mirror")


def _dispatch(name: str, cfg: ExperimentConfig, out: Path, args) -> tuple[dict, list]:
    if name == "theta-eval":
        return run_theta_eval(cfg, out)
    if name == "gram":
        return run_gram(cfg, out)
    if name == "bs-count":
        return run_bs_count(cfg, out, args.cp1)
    if name == "amoeba":
        return run_amoeba(cfg, out)
    if name == "converge":
        return run_converge(cfg, out)
    if name == "peak":
        return run_peak(cfg, out)
    if name == "mirror":
        return run_mirror(cfg, out)
    raise ConfigError(f"unknown subcommand {name!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="theta-amoeba",
        description="experiment harness for theta section bases on abelian varieties",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--k", type=int, nargs="+", default=None)
        p.add_argument("--omega-file", default=None)
        p.add_argument("--grid", type=int, default=None)
        if name == "bs-count":
            p.add_argument("--cp1", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _cap_threads()
        cfg = load_config(args.config, args)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        start = time.monotonic()
        summary, files = _dispatch(args.subcommand, cfg, out, args)
        elapsed = time.monotonic() - start
        write_json(out / "summary.json", {"subcommand": args.subcommand, "results": summary})
        files = files + ["summary.json"]
        write_json(
            out / "manifest.json",
            {
                "subcommand": args.subcommand,
                "config": cfg.echo(),
                "versions": {
                    "theta_amoeba": __version__,
                    "numpy": np.__version__,
                    "scipy": scipy.__version__,
                    "python": sys.version.split()[0],
                },
                "wall_time_seconds": elapsed,
                "files": sorted(files + ["manifest.json"]),
            },
        )
        if args.subcommand == "bs-count" and args.cp1:
            for k in cfg.k_list:
                pts = ", ".join(str(p) for p in bs_points_cp1(k).points)
                print(f"k={k}: {pts}")
        else:
            print(json.dumps({"subcommand": args.subcommand, "results": summary}, sort_keys=True))
        return 0
    except ThetaAmoebaError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
