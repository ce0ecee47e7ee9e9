"""Batch front door: config ingestion, pipeline orchestration, reports.

Subcommands: predict (cluster sets + spiral sweep + SVG), build (series
operator + plan certificate + cross-check), spectrum (pseudospectrum map and
level sets), verify (full containment pipeline with PASS/FAIL verdict), demo
(run the bundled catalog configs).  Every output file carries the sha256 of
the canonicalized config so reruns are traceable; numeric payloads are
deterministic given the seed.

Exit codes: 0 success/PASS, 1 FAIL verdict, 2 config error, 3 certification
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svg as svgmod
from .grids import BoundaryGrid, DomainError, FrequencyGrid, GridError
from .operators import OperatorMatrix
from .series import (
    QuasiParabolicMap,
    SeriesError,
    SeriesPlan,
    build_series,
    exact_constant_multiplier,
    plan_for_map,
    series_direct_residual,
)
from .spectra import (
    UsageError,
    containment_verdict,
    essential_spectrum_surrogate,
    predicted_set,
    pseudospectrum,
)
from .symbols import ClusterPlan, SymbolError, cluster_set, make_symbol

CONFIG_DIR = Path(__file__).parent / "configs"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_CERT = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Parsed and validated run configuration."""

    name: str
    psi1: dict
    psi2: dict
    p1: float = 1.0
    p2: float = 1.0
    frequency_extent: float = 10.0
    frequency_nodes: int = 32
    boundary_extent: float = 60.0
    boundary_nodes: int = 768
    plan_tol: float = 1e-8
    plan_alpha: float | None = None
    plan_n1: int | None = None
    plan_n2: int | None = None
    remainder_tol: float | None = None
    region: tuple = (-1.1, 1.1, -1.1, 1.1)
    resolution: tuple = (129, 129)
    eps_list: tuple = (1e-2,)
    sizes: tuple = (32, 48, 64)
    t_samples: int = 64
    seed: int = 0
    crosscheck: bool = True
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        return cls.from_dict(raw, default_name=Path(path).stem)

    @classmethod
    def from_dict(cls, raw: dict, default_name: str = "run") -> "RunConfig":
        try:
            sym = raw["symbols"]
            grids = raw.get("grids", {})
            plan = raw.get("plan", {})
            spectra = raw.get("spectra", {})
            cfg = cls(
                name=raw.get("name", default_name),
                psi1=dict(sym["psi1"]),
                psi2=dict(sym["psi2"]),
                p1=float(raw.get("p1", 1.0)),
                p2=float(raw.get("p2", 1.0)),
                frequency_extent=float(grids.get("frequency_extent", 10.0)),
                frequency_nodes=int(grids.get("frequency_nodes", 32)),
                boundary_extent=float(grids.get("boundary_extent", 60.0)),
                boundary_nodes=int(grids.get("boundary_nodes", 768)),
                plan_tol=float(plan.get("tol", 1e-8)),
                plan_alpha=plan.get("alpha"),
                plan_n1=plan.get("n1"),
                plan_n2=plan.get("n2"),
                remainder_tol=plan.get("remainder_tol"),
                region=tuple(spectra.get("region", (-1.1, 1.1, -1.1, 1.1))),
                resolution=tuple(spectra.get("resolution", (129, 129))),
                eps_list=tuple(spectra.get("eps", (1e-2,))),
                sizes=tuple(spectra.get("sizes", (32, 48, 64))),
                t_samples=int(raw.get("t_samples", 64)),
                seed=int(raw.get("seed", 0)),
                raw=raw,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad config structure: {e}")
        for v, label in (
            (cfg.p1, "p1"),
            (cfg.p2, "p2"),
            (cfg.frequency_extent, "frequency_extent"),
            (cfg.frequency_nodes, "frequency_nodes"),
            (cfg.boundary_extent, "boundary_extent"),
            (cfg.boundary_nodes, "boundary_nodes"),
            (cfg.plan_tol, "plan tol"),
            (cfg.t_samples, "t_samples"),
        ):
            if v <= 0:
                raise ConfigError(f"{label} must be positive, got {v}")
        return cfg

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def symbols(self):
        def mk(d):
            return make_symbol(
                d["expr"],
                float(d["im_lower_bound"]),
                float(d["sup_bound"]),
                d.get("class", "continuous-on-closure"),
                seed=self.seed,
            )

        return mk(self.psi1), mk(self.psi2)

    def qmap(self) -> QuasiParabolicMap:
        s1, s2 = self.symbols()
        return QuasiParabolicMap(self.p1, self.p2, s1, s2)

    def fgrids(self, nodes=None):
        n = nodes or self.frequency_nodes
        g = FrequencyGrid.uniform(self.frequency_extent, n)
        return (g, g)

    def bgrids(self):
        g = BoundaryGrid.uniform(self.boundary_extent, self.boundary_nodes)
        return (g, g)


# ---------------------------------------------------------------------------
# output helpers


def _write_points_csv(path: Path, pts: np.ndarray, digest: str) -> None:
    lines = [f"# config {digest}", "re,im"]
    lines += [f"{z.real:.12g},{z.imag:.12g}" for z in np.asarray(pts).reshape(-1)]
    path.write_text("\n".join(lines) + "\n")


def _write_matrix_csv(path: Path, M: np.ndarray, digest: str) -> None:
    # row-major flattening, one entry per line
    lines = [f"# config {digest}", f"# shape {M.shape[0]} {M.shape[1]}", "re,im"]
    flat = M.reshape(-1)
    lines += [f"{v.real:.12g},{v.imag:.12g}" for v in flat]
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict, digest: str) -> None:
    payload = dict(payload)
    payload["config_sha256"] = digest
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_js) + "\n")


def _js(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_predict(cfg: RunConfig, out: Path) -> int:
    digest = cfg.digest()
    s1, s2 = cfg.symbols()
    plan = ClusterPlan(seed=cfg.seed)
    c1 = cluster_set(s1, "infinity", plan)
    c2 = cluster_set(s2, "infinity", plan)
    _write_points_csv(out / "cluster1.csv", c1.points, digest)
    _write_points_csv(out / "cluster2.csv", c2.points, digest)
    pred = predicted_set(c1, c2, t_samples=cfg.t_samples, seed=cfg.seed)
    min_im = min(float(np.min(c1.points.imag)), float(np.min(c2.points.imag)))
    T = 8.0 / min_im
    t = np.linspace(0.0, T, cfg.t_samples)
    # sweep order (t1 outer, t2 inner) so the first row is t=0 -> 1
    paths = []
    sweep = []
    rng = np.random.default_rng(cfg.seed)
    z1s = c1.points if c1.points.size <= 8 else rng.choice(c1.points, 8, replace=False)
    z2s = c2.points if c2.points.size <= 8 else rng.choice(c2.points, 8, replace=False)
    for a in z1s:
        for b in z2s:
            img = np.exp(1j * (a * t[:, None] + b * t[None, :]))
            paths.append(img.reshape(-1))
            sweep.append(img.reshape(-1))
    _write_points_csv(out / "spiral.csv", np.concatenate(sweep), digest)
    (out / "spiral.svg").write_text(svgmod.spiral_figure(paths))
    _write_json(
        out / "predict_report.json",
        {
            "name": cfg.name,
            "seed": cfg.seed,
            "cluster_sizes": [len(c1), len(c2)],
            "cluster_diagnostics": [c1.diagnostics, c2.diagnostics],
            "predicted_points": len(pred.points),
            "t_max": T,
            "params": pred.params,
        },
        digest,
    )
    return EXIT_OK


def _build_pipeline(cfg: RunConfig):
    qmap = cfg.qmap()
    plan = plan_for_map(
        qmap,
        tol=cfg.plan_tol,
        seed=cfg.seed,
        alpha=cfg.plan_alpha,
        n1=cfg.plan_n1,
        n2=cfg.plan_n2,
    )
    op = build_series(qmap, plan, cfg.fgrids())
    return qmap, plan, op


def cmd_build(cfg: RunConfig, cross: bool, out: Path) -> int:
    digest = cfg.digest()
    t0 = time.time()
    try:
        qmap, plan, op = _build_pipeline(cfg)
    except SeriesError as e:
        _write_json(out / "build_report.json", {"error": str(e)}, digest)
        print(f"certification failure: {e}", file=sys.stderr)
        return EXIT_CERT
    _write_matrix_csv(out / "operator.csv", op.entries, digest)
    cert = json.loads(plan.to_json())
    cert.update(
        {
            "name": cfg.name,
            "seed": cfg.seed,
            "p1": cfg.p1,
            "p2": cfg.p2,
            "dilation_applied": cfg.p1 != 1.0 or cfg.p2 != 1.0,
            "frequency_nodes": cfg.frequency_nodes,
            "build_seconds": time.time() - t0,
        }
    )
    if cross:
        resid = series_direct_residual(op, qmap, cfg.bgrids(), seed=cfg.seed)
        cert["series_direct_residual"] = resid
    if _constant_case(cfg):
        a1 = complex(*_const_value(cfg.psi1))
        a2 = complex(*_const_value(cfg.psi2))
        exact = exact_constant_multiplier(a1, a2, cfg.fgrids())
        cert["constant_closed_form_residual"] = float(
            np.max(np.abs(op.entries - exact.entries))
        )
    _write_json(out / "plan_certificate.json", cert, digest)
    if cfg.remainder_tol is not None and plan.remainder > cfg.remainder_tol:
        print(
            f"certification failure: remainder bound {plan.remainder:.3e} exceeds "
            f"tolerance {cfg.remainder_tol:.3e}",
            file=sys.stderr,
        )
        return EXIT_CERT
    return EXIT_OK


def _constant_case(cfg: RunConfig) -> bool:
    return (
        cfg.psi1.get("class") == "constant"
        and cfg.psi2.get("class") == "constant"
        and cfg.p1 == 1.0
        and cfg.p2 == 1.0
    )


def _const_value(d: dict):
    from .symbols import parse_symbol_expression

    v = complex(parse_symbol_expression(d["expr"])(0.0, 0.0))
    return v.real, v.imag


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    digest = cfg.digest()
    try:
        _, plan, op = _build_pipeline(cfg)
    except SeriesError as e:
        print(f"certification failure: {e}", file=sys.stderr)
        return EXIT_CERT
    pmap, levels = pseudospectrum(op, cfg.region, cfg.resolution, cfg.eps_list)
    _write_matrix_csv(out / "sigma_min.csv", pmap.values.astype(complex), digest)
    for eps, ls in zip(cfg.eps_list, levels):
        _write_points_csv(out / f"level_{eps:g}.csv", ls.points.points, digest)
    _write_json(
        out / "spectrum_report.json",
        {
            "name": cfg.name,
            "seed": cfg.seed,
            "region": cfg.region,
            "resolution": cfg.resolution,
            "eps": list(cfg.eps_list),
            "level_counts": [len(ls.points) for ls in levels],
            "plan": json.loads(plan.to_json()),
        },
        digest,
    )
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    digest = cfg.digest()
    t0 = time.time()
    s1, s2 = cfg.symbols()
    cplan = ClusterPlan(seed=cfg.seed)
    c1 = cluster_set(s1, "infinity", cplan)
    c2 = cluster_set(s2, "infinity", cplan)
    pred = predicted_set(c1, c2, t_samples=cfg.t_samples, seed=cfg.seed)
    qmap = cfg.qmap()
    plan = plan_for_map(qmap, tol=cfg.plan_tol, seed=cfg.seed)

    def builder(n):
        return build_series(qmap, plan, cfg.fgrids(n))

    surro = essential_spectrum_surrogate(
        builder, list(cfg.sizes), cfg.eps_list[0], cfg.region, cfg.resolution
    )
    verdict = containment_verdict(pred, surro)
    report = {
        "name": cfg.name,
        "seed": cfg.seed,
        "plan": json.loads(plan.to_json()),
        "verdict": verdict,
        "elapsed_seconds": time.time() - t0,
    }
    _write_json(out / "verify_report.json", report, digest)
    _write_points_csv(out / "surrogate.csv", surro.points.points, digest)
    _write_points_csv(out / "predicted.csv", pred.points.points, digest)
    (out / "overlay.svg").write_text(
        svgmod.overlay_figure(
            [(surro.params["eps"], surro.points.points)], pred.points.points
        )
    )
    print(f"{cfg.name}: {verdict['verdict']} "
          f"(distance {verdict['distance']:.4g}, tol {verdict['tol']:.4g})")
    return EXIT_OK if verdict["verdict"] == "PASS" else EXIT_FAIL


DEMO_RUNS = (
    ("constants_basic", "verify"),
    ("cay_quarter", "build"),
    ("separable_mix", "predict"),
    ("dilation_case", "build"),
)


def cmd_demo(out: Path, seed: int | None) -> int:
    worst = EXIT_OK
    for name, action in DEMO_RUNS:
        cfg = RunConfig.load(CONFIG_DIR / f"{name}.json")
        if seed is not None:
            cfg.seed = seed
            cfg.raw["seed"] = seed
        sub = out / name
        sub.mkdir(parents=True, exist_ok=True)
        t0 = time.time()
        if action == "verify":
            rc = cmd_verify(cfg, sub)
        elif action == "build":
            rc = cmd_build(cfg, cross=True, out=sub)
        else:
            rc = cmd_predict(cfg, sub)
        print(f"demo {name} ({action}): exit {rc} in {time.time() - t0:.1f}s")
        worst = max(worst, rc)
    return worst


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="qpspec",
        description="quasi-parabolic composition operator toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("predict", "build", "spectrum", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--sizes", type=str, default=None)
        p.add_argument("--eps", type=str, default=None)
        p.add_argument("--no-crosscheck", action="store_true")
    d = sub.add_parser("demo")
    d.add_argument("--out", type=Path, default=Path("out"))
    d.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "demo":
        return cmd_demo(out, args.seed)
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.raw["seed"] = args.seed
        if args.sizes:
            cfg.sizes = tuple(int(s) for s in args.sizes.split(","))
        if args.eps:
            cfg.eps_list = tuple(float(s) for s in args.eps.split(","))
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "predict":
            return cmd_predict(cfg, out)
        if args.command == "build":
            return cmd_build(cfg, not args.no_crosscheck, out)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out)
        return cmd_verify(cfg, out)
    except (SymbolError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, GridError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
