"""Command-line front end: ``simulate``, ``detmap``, ``sweep`` and ``verify``.

Every run writes the fully resolved configuration to ``config.json`` in the
output directory; feeding that file back with ``--config`` reproduces the run.

Exit codes: 0 success, 1 invalid configuration, 2 an enforced verification
check failed, 3 population cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels, detmap, dynamics, verify
from .core import ModelParams, ParameterError, Population, PopulationOverflow, validate_params

log = logging.getLogger("sbmgrowth")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2
EXIT_POPULATION_CAP = 3

PHASE_HEADER = ("rho", "lambda", "phase", "fprime_0", "fprime_half")

CONFIG_KEYS = {"p", "zeta", "lambda", "n0", "n0_red", "t_max", "trials", "seed", "epsilon", "dump_graphs", "threads", "sweep"}

# Base defaults: minority of 5 out of 70 in the parity regime (rho = 0.03).
DEFAULTS = {
    "p": [[0.75, 0.25], [0.25, 0.75]],
    "zeta": [[1.0, 100.0], [100.0, 1.0]],
    "lambda": 0.1,
    "n0": 70,
    "n0_red": 5,
    "t_max": 60,
    "trials": 1,
    "seed": 0,
    "epsilon": verify.DEFAULT_EPSILON,
    "dump_graphs": False,
}

COMMAND_DEFAULTS = {
    "verify": {"n0": 2000, "n0_red": 600, "trials": 10_000},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    initial: Population
    t_max: int
    trials: int
    seed: int
    output_dir: Path
    dump_graphs: bool
    epsilon: float
    threads: int

    def to_json(self) -> dict:
        return {
            "p": self.params.p_matrix,
            "zeta": self.params.zeta_matrix,
            "lambda": self.params.lam,
            "n0": self.initial.n,
            "n0_red": self.initial.n_red,
            "t_max": self.t_max,
            "trials": self.trials,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "dump_graphs": self.dump_graphs,
            "threads": self.threads,
        }

    def write(self) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        _write_json(self.output_dir / "config.json", self.to_json())


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_config_file(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return raw


def _as_int(name, v, minimum):
    if isinstance(v, bool) or int(v) != v or v < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {v!r}")
    return int(v)


def resolve_config(args, command: str) -> tuple[RunConfig, dict]:
    """Merge defaults, the config file and command-line overrides."""
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS.get(command, {}))
    extra = {}
    if args.config:
        raw = _load_config_file(args.config)
        extra["sweep"] = raw.pop("sweep", None)
        merged.update(raw)
    for key in ("seed", "trials", "threads", "t_max", "epsilon"):
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    if getattr(args, "dump_graphs", False):
        merged["dump_graphs"] = True
    if getattr(args, "n0", None) is not None:
        merged["n0"] = args.n0
    if getattr(args, "n0_red", None) is not None:
        merged["n0_red"] = args.n0_red
    merged.setdefault("threads", os.cpu_count() or 1)

    params = ModelParams.from_matrices(merged["p"], merged["zeta"], merged["lambda"])
    n0 = _as_int("n0", merged["n0"], 1)
    n0_red = _as_int("n0_red", merged["n0_red"], 0)
    if n0_red > n0:
        raise ConfigError("n0_red cannot exceed n0")
    eps = float(merged["epsilon"])
    if not 0.0 < eps < 0.5:
        raise ConfigError("epsilon must lie in (0, 1/2)")
    seed = _as_int("seed", merged["seed"], 0)
    if seed >= 2**64:
        raise ConfigError("seed must fit in 64 bits")
    cfg = RunConfig(
        params=params,
        initial=Population(n0_red, n0 - n0_red),
        t_max=_as_int("t_max", merged["t_max"], 0),
        trials=_as_int("trials", merged["trials"], 1),
        seed=seed,
        output_dir=Path(args.out),
        dump_graphs=bool(merged["dump_graphs"]),
        epsilon=eps,
        threads=_as_int("threads", merged["threads"], 1),
    )
    return cfg, extra


# -- subcommands ------------------------------------------------------------


def _quantiles(values) -> dict:
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    return {"median": float(med), "q1": float(q1), "q3": float(q3), "mean": float(arr.mean())}


def cmd_simulate(cfg: RunConfig) -> int:
    validate_params(cfg.params, cfg.initial.n)
    cfg.write()
    if cfg.dump_graphs or cfg.threads <= 1:
        runs = (
            dynamics.run_trajectory(
                cfg.initial,
                cfg.params,
                cfg.t_max,
                dynamics.SeedSpec(cfg.seed, stream),
                graph_dir=cfg.output_dir / f"graphs_{stream:04}" if cfg.dump_graphs else None,
            )
            for stream in range(cfg.trials)
        )
    else:
        runs = dynamics.run_trials(cfg.initial, cfg.params, cfg.t_max, cfg.seed, cfg.trials, workers=cfg.threads)
    finals = []
    for stream, records in enumerate(runs):
        dynamics.write_trajectory_csv(cfg.output_dir / f"trajectory_{stream:04}.csv", records)
        finals.append(records[-1].phi)
    summary = {
        "trials": cfg.trials,
        "t_max": cfg.t_max,
        "phi_0": cfg.initial.phi,
        "rho": cfg.params.rho,
        "final_phi": finals,
        **_quantiles(finals),
    }
    _write_json(cfg.output_dir / "summary.json", summary)
    log.info("simulate: %d trials, median final phi %.4f", cfg.trials, summary["median"])
    return EXIT_OK


def _det_params(cfg: RunConfig, args) -> detmap.DetParams:
    rho = getattr(args, "rho", None)
    lam = getattr(args, "lam", None)
    base = detmap.DetParams.from_model(cfg.params)
    return detmap.DetParams(rho if rho is not None else base.rho, lam if lam is not None else base.lam)


def stability_report(p: detmap.DetParams) -> dict:
    fps = detmap.fixed_points(p)
    identity = isinstance(fps, detmap.IdentityMap)
    return {
        "rho": p.rho,
        "lambda": p.lam,
        "phase": detmap.classify_phase(p).value,
        "identity_map": identity,
        "fixed_points": [] if identity else [
            {"x": fp.x, "derivative": fp.derivative, "stability": fp.stability.value} for fp in fps
        ],
    }


def cmd_detmap(cfg: RunConfig, args=None) -> int:
    p = _det_params(cfg, args)
    cfg.write()
    x0 = cfg.initial.phi
    traj = detmap.iterate(x0, p, max_iter=max(cfg.t_max, 1), tol_conv=1e-15)
    (cfg.output_dir / "det_trajectory.csv").write_text(detmap.trajectory_csv(traj))
    (cfg.output_dir / "curve.csv").write_text(detmap.curve_csv(p))
    _write_json(cfg.output_dir / "stability.json", stability_report(p))
    return EXIT_OK


def sweep_grid(grid: dict) -> list[tuple[float, float]]:
    """Expand a grid description into ``(rho, lambda)`` cells.

    Either ``{"rho": [...], "lambda": [...]}`` or
    ``{"a": [...], "b": [...], "alpha": [...], "beta": [...], "lambda": [...]}``.
    """
    lams = grid.get("lambda") or []
    if grid.get("rho"):
        rhos = [float(r) for r in grid["rho"]]
    elif all(grid.get(k) for k in ("a", "b", "alpha", "beta")):
        rhos = [
            ModelParams(a, b, al, be, 1.0).rho
            for a, b, al, be in itertools.product(grid["a"], grid["b"], grid["alpha"], grid["beta"])
        ]
    else:
        rhos = []
    cells = [(r, float(l)) for r in rhos for l in lams]
    if not cells:
        raise ConfigError("sweep grid is empty")
    return cells


def phase_csv(cells) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PHASE_HEADER)
    for rho, lam in cells:
        p = detmap.DetParams(rho, lam)
        w.writerow([
            f"{p.rho:.17g}",
            f"{p.lam:.17g}",
            detmap.classify_phase(p).value,
            f"{detmap.f_derivative(0.0, p):.17g}",
            f"{detmap.f_derivative(0.5, p):.17g}",
        ])
    return buf.getvalue()


def cmd_sweep(cfg: RunConfig, grid: dict) -> int:
    cells = sweep_grid(grid)
    cfg.write()
    _write_json(cfg.output_dir / "sweep.json", grid)
    (cfg.output_dir / "phase.csv").write_text(phase_csv(cells))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    validate_params(cfg.params, cfg.initial.n)
    cfg.write()
    results = verify.run_suite(
        cfg.params, cfg.initial, epsilon=cfg.epsilon, trials=cfg.trials, master_seed=cfg.seed
    )
    failed = verify.suite_failed(results)
    report = {"backend": _kernels.BACKEND, "failed": failed, "checks": [r.to_json() for r in results]}
    _write_json(cfg.output_dir / "verify_report.json", report)
    for r in results:
        log.info("%-24s %-8s statistic=%s bound=%s", r.name, r.status, r.statistic, r.bound)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbmgrowth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, help="64-bit master seed")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--threads", type=int, help="worker processes (affects wall time only)")
        sp.add_argument("--n0", type=int, help="initial population size")
        sp.add_argument("--n0-red", dest="n0_red", type=int, help="initial number of red nodes")
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    sim = common(sub.add_parser("simulate", help="run stochastic trajectories"))
    sim.add_argument("--t-max", dest="t_max", type=int)
    sim.add_argument("--dump-graphs", action="store_true", help="write each round's graph as an edge list")

    det = common(sub.add_parser("detmap", help="deterministic map: trajectory, curve and stability"))
    det.add_argument("--t-max", dest="t_max", type=int)
    det.add_argument("--rho", type=float, help="override rho derived from the config")
    det.add_argument("--lambda", dest="lam", type=float, help="arrival fraction; may exceed 1 here")

    sw = common(sub.add_parser("sweep", help="phase table over a (rho, lambda) grid"))
    for name in ("rho", "a", "b", "alpha", "beta"):
        sw.add_argument(f"--{name}", type=float, nargs="+")
    sw.add_argument("--lambda", dest="lam", type=float, nargs="+")

    common(sub.add_parser("verify", help="run the verification suite"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; keep 2 for failed checks
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg, extra = resolve_config(args, args.command)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "detmap":
            return cmd_detmap(cfg, args)
        if args.command == "sweep":
            grid = dict(extra.get("sweep") or {})
            for name in ("rho", "a", "b", "alpha", "beta"):
                if getattr(args, name) is not None:
                    grid[name] = getattr(args, name)
            if args.lam is not None:
                grid["lambda"] = args.lam
            return cmd_sweep(cfg, grid)
        return cmd_verify(cfg)
    except PopulationOverflow as exc:
        log.error("%s", exc)
        return EXIT_POPULATION_CAP
    except (ParameterError, ConfigError, ValueError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
