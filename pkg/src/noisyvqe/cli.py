"""Experiment driver.

Every subcommand reads one JSON config file, validates it fully before any
computation, and writes a CSV data file plus a JSON metadata sidecar. A
mandatory `seed` makes every run reproducible; the CSV carries a header
line echoing the config hash and seed.

Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, measurement, meanfield, vqe
from .ansatz import build_layout
from .channels import ibm_device_noise, load_device_params, load_device_table
from .hamiltonians import build_model, exact_ground_energy

# Minimal logical depths reproduced by the depth-table command; used as the
# default circuit depth elsewhere.
TABLE_DEPTHS = {
    "tfim": {2: 1, 4: 2, 6: 3, 8: 3},
    "heisenberg": {2: 1, 4: 3, 6: 4, 8: 6},
    "theisenberg": {2: 1, 4: 3, 6: 4, 8: 6},
}

MODEL_NAMES = ("tfim", "heisenberg", "theisenberg")


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    if "seed" not in config:
        raise ConfigError("config must declare a seed")
    return config


def _config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(canonical).hexdigest()[:12]


def _require(config, key, kind, predicate=None, what=""):
    if key not in config:
        raise ConfigError(f"missing config key {key!r}")
    value = config[key]
    if not isinstance(value, kind):
        raise ConfigError(f"config key {key!r} must be {kind}, got {type(value)}")
    if predicate is not None and not predicate(value):
        raise ConfigError(f"config key {key!r} invalid: {what}")
    return value


def _check_model(name) -> str:
    if name not in MODEL_NAMES:
        raise ConfigError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
    return name


def _optimizer_settings(config: dict) -> dict:
    settings = {
        "optimizer": config.get("optimizer", "adam"),
        "learning_rate": float(config.get("learning_rate", 0.05)),
        "max_iterations": int(config.get("max_iterations", 2000)),
        "tolerance": float(config.get("tolerance", 1e-6)),
        "patience": int(config.get("patience", 10)),
        "restarts": int(config.get("restarts", 3)),
    }
    if settings["optimizer"] not in ("adam", "gd"):
        raise ConfigError(f"unknown optimizer {settings['optimizer']!r}")
    if settings["learning_rate"] <= 0:
        raise ConfigError("learning_rate must be positive")
    if settings["max_iterations"] < 1 or settings["restarts"] < 1:
        raise ConfigError("max_iterations and restarts must be >= 1")
    return settings


def _write_outputs(out_path, fieldnames, rows, config, seed, started):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    run_id = _config_hash(config)
    with open(out_path, "w", newline="") as fh:
        fh.write(f"# config_hash={run_id} seed={seed}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    meta = {
        "run_id": run_id,
        "seed": seed,
        "config": config,
        "rows": len(rows),
        "wall_clock_seconds": round(time.time() - started, 3),
        "output": str(out_path),
    }
    with open(out_path.with_suffix(out_path.suffix + ".meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)


def _parallel_map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _vqe_config(H, depth, seed, settings, noise=None, model=""):
    return vqe.VqeConfig(
        hamiltonian=H, depth=depth, noise=noise, seed=seed, model=model, **settings
    )


# -- subcommands ----------------------------------------------------------


def cmd_depth_table(config, seed, out, workers) -> list:
    models = _require(config, "models", list) if "models" in config else list(MODEL_NAMES)
    sizes = _require(config, "sizes", list) if "sizes" in config else [2, 4, 6]
    for m in models:
        _check_model(m)
    max_depth = int(config.get("max_depth", 8))
    threshold = float(config.get("threshold", 0.98))
    settings = _optimizer_settings(config)
    J, h = float(config.get("J", 1.0)), float(config.get("h", 1.0))

    def run_cell(cell):
        model, n = cell
        H = build_model(model, n, J, h)
        e0 = exact_ground_energy(H)
        for depth in range(1, max_depth + 1):
            result = vqe.optimize(_vqe_config(H, depth, seed, settings, model=model))
            ratio = result.best_energy / e0
            if ratio >= threshold:
                return {
                    "model": model, "n": n, "min_depth": depth,
                    "E": result.best_energy, "E0": e0,
                    "ratio": ratio, "reached": True,
                }
        return {
            "model": model, "n": n, "min_depth": max_depth,
            "E": result.best_energy, "E0": e0, "ratio": ratio, "reached": False,
        }

    cells = [(m, int(n)) for m in models for n in sizes]
    return _parallel_map(run_cell, cells, workers)


def cmd_noise_sweep(config, seed, out, workers) -> list:
    model = _check_model(_require(config, "model", str))
    n = int(_require(config, "n", int))
    depths = [int(d) for d in _require(config, "depths", list)]
    probabilities = [float(p) for p in _require(config, "probabilities", list)]
    families = config.get("families", list(vqe.NOISE_FAMILIES))
    for family in families:
        if family not in vqe.NOISE_FAMILIES:
            raise ConfigError(f"unknown noise family {family!r}")
    settings = _optimizer_settings(config)
    H = build_model(model, n, float(config.get("J", 1.0)), float(config.get("h", 1.0)))
    base = _vqe_config(H, depths[0], seed, settings, model=model)

    def run_family(family):
        return vqe.noise_sweep(base, family, probabilities, depths)

    rows = []
    for family_rows in _parallel_map(run_family, list(families), workers):
        rows.extend(family_rows)
    return rows


def cmd_crossover(config, seed, out, workers) -> list:
    cells = _require(config, "cells", list)
    probabilities = [float(p) for p in _require(config, "probabilities", list)]
    settings = _optimizer_settings(config)
    mf_restarts = int(config.get("mf_restarts", 20))

    def run_cell(cell):
        model = _check_model(cell["model"])
        n = int(cell["n"])
        depth = int(cell.get("depth", TABLE_DEPTHS[model][n]))
        H = build_model(model, n, float(config.get("J", 1.0)), float(config.get("h", 1.0)))
        e_mf, _ = meanfield.mf_optimize(H, restarts=mf_restarts, seed=seed)
        base = _vqe_config(H, depth, seed, settings, model=model)
        rows = vqe.noise_sweep(base, "depolarizing", probabilities, [depth])
        means = {}
        for row in rows:
            means.setdefault(row["p"], []).append(row["E"])
        points = [(p, float(np.mean(es))) for p, es in means.items()]
        out_row = {
            "model": model, "n": n, "depth": depth, "E_mf": e_mf,
            "E0": exact_ground_energy(H),
        }
        try:
            fit = analysis.fit_exponential(points)
            out_row.update(
                amplitude=fit.amplitude, rate=fit.rate,
                p_star=analysis.crossover_probability(fit, e_mf), crossed=True,
            )
        except ValueError:
            out_row.update(amplitude=np.nan, rate=np.nan, p_star=np.nan, crossed=False)
        return out_row

    for cell in cells:
        _check_model(cell.get("model"))
        if int(cell.get("n", 0)) < 2:
            raise ConfigError(f"invalid crossover cell {cell}")
    return _parallel_map(run_cell, cells, workers)


def cmd_ibm_compare(config, seed, out, workers) -> list:
    rows_spec = _require(config, "rows", list)
    table = load_device_table()
    known = {k.lower() for k in table}
    for row in rows_spec:
        _check_model(row.get("model"))
        if str(row.get("device", "")).lower() not in known:
            raise ConfigError(f"unknown device key {row.get('device')!r}")
    settings = _optimizer_settings(config)
    sampled = bool(config.get("sampled", False))
    shots = int(config.get("shots", 8192))

    def run_row(row):
        model = row["model"]
        params = load_device_params(row["device"])
        H = build_model(model, 2, 1.0, 1.0)
        noise = ibm_device_noise(params)
        depth = int(row.get("depth", 1))
        result = vqe.optimize(_vqe_config(H, depth, seed, settings, noise, model))
        e_ext = exact_ground_energy(H)
        out_row = {
            "model": model, "device": row["device"], "depth": depth,
            "E_sim": result.best_energy, "E_ext": e_ext,
            "rel_deviation": abs(result.best_energy - e_ext) / abs(e_ext),
        }
        if sampled:
            layout = build_layout(2, depth)
            _, trajectory = measurement.run_sampled_vqe(
                layout, H, noise=noise, shots=shots,
                learning_rate=float(config.get("sampled_learning_rate", 0.1)),
                iterations=int(config.get("sampled_iterations", 100)),
                seed=seed, initial_params=result.best_params,
            )
            out_row["E_sampled_min"] = min(trajectory)
        return out_row

    return _parallel_map(run_row, rows_spec, workers)


def cmd_accumulation(config, seed, out, workers) -> list:
    model = _check_model(_require(config, "model", str))
    n = int(_require(config, "n", int))
    p = float(_require(config, "p", (int, float)))
    depths = [int(d) for d in _require(config, "depths", list)]
    settings = _optimizer_settings(config)
    exponent = config.get("exponent", "logical")
    if exponent not in ("logical", "gate"):
        raise ConfigError(f"unknown exponent mode {exponent!r}")
    H = build_model(model, n, float(config.get("J", 1.0)), float(config.get("h", 1.0)))
    base = _vqe_config(H, depths[0], seed, settings, model=model)
    rows = [
        dict(row, kind="depolarizing_accumulation")
        for row in analysis.accumulation_curve(base, depths, p, exponent)
    ]
    for family in config.get("compare_families", []):
        if family not in ("damping", "dephasing"):
            raise ConfigError(f"compare_families entries must be damping/dephasing")
        for row in analysis.non_accumulation_check(base, family, p, depths):
            rows.append(
                {
                    "model": row["model"], "n": row["n"], "depth": row["depth"],
                    "p": row["p"], "E_sim": row["E"], "E0": row["E0"],
                    "eps_fit": 1.0 - row["E"] / row["E0"], "eps_analytic": "",
                    "E_accum": "", "kind": f"{family}_check",
                }
            )
    return rows


def cmd_meanfield(config, seed, out, workers) -> list:
    models = config.get("models", list(MODEL_NAMES))
    sizes = [int(n) for n in config.get("sizes", [2, 4, 6, 8])]
    for m in models:
        _check_model(m)
    restarts = int(config.get("restarts", 20))
    rows = []
    for model in models:
        for n in sizes:
            H = build_model(
                model, n, float(config.get("J", 1.0)), float(config.get("h", 1.0))
            )
            e_mf, angles = meanfield.mf_optimize(H, restarts=restarts, seed=seed)
            rows.append(
                {
                    "model": model, "n": n, "E_mf": e_mf,
                    "E0": exact_ground_energy(H),
                    "theta": json.dumps([round(t, 6) for t in angles.theta]),
                    "phi": json.dumps([round(p, 6) for p in angles.phi]),
                }
            )
    return rows


def cmd_sampled_vqe(config, seed, out, workers) -> list:
    model = _check_model(_require(config, "model", str))
    n = int(_require(config, "n", int))
    depth = int(config.get("depth", TABLE_DEPTHS[model].get(n, 1)))
    shots = config.get("shots", 8192)
    shots = None if shots in (None, "exact") else int(shots)
    iterations = int(config.get("iterations", 100))
    learning_rate = float(config.get("learning_rate", 0.1))
    H = build_model(model, n, float(config.get("J", 1.0)), float(config.get("h", 1.0)))
    noise = None
    if "device" in config:
        try:
            noise = ibm_device_noise(load_device_params(config["device"]))
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    confusion = None
    if "confusion" in config:
        spec = config["confusion"]
        try:
            confusion = measurement.ConfusionMatrix.from_flip_rates(
                spec["p0_to_1"], spec["p1_to_0"]
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid confusion spec: {exc}") from exc
    layout = build_layout(n, depth)
    _, trajectory = measurement.run_sampled_vqe(
        layout, H, noise=noise, shots=shots, confusion=confusion,
        learning_rate=learning_rate, iterations=iterations, seed=seed,
    )
    e0 = exact_ground_energy(H)
    return [
        {"iteration": i, "E": e, "E0": e0, "rel_energy": (e - e0) / abs(e0)}
        for i, e in enumerate(trajectory)
    ]


COMMANDS = {
    "depth-table": (cmd_depth_table, ["model", "n", "min_depth", "E", "E0", "ratio", "reached"]),
    "noise-sweep": (cmd_noise_sweep, ["model", "n", "depth", "noise_family", "p",
                                      "restart", "E", "E0", "rel_energy", "iterations", "seed"]),
    "crossover": (cmd_crossover, ["model", "n", "depth", "E_mf", "E0", "amplitude",
                                  "rate", "p_star", "crossed"]),
    "ibm-compare": (cmd_ibm_compare, ["model", "device", "depth", "E_sim", "E_ext",
                                      "rel_deviation", "E_sampled_min"]),
    "accumulation": (cmd_accumulation, ["model", "n", "depth", "p", "E_sim", "E0",
                                        "eps_fit", "eps_analytic", "E_accum", "kind"]),
    "meanfield": (cmd_meanfield, ["model", "n", "E_mf", "E0", "theta", "phi"]),
    "sampled-vqe": (cmd_sampled_vqe, ["iteration", "E", "E0", "rel_energy"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisyvqe", description="Noisy-VQE simulation experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON config file")
        cmd.add_argument("--seed", type=int, default=None, help="override config seed")
        cmd.add_argument("--out", default=None, help="output CSV path")
        cmd.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        config = _load_config(args.config)
        seed = int(args.seed if args.seed is not None else config["seed"])
        handler, fieldnames = COMMANDS[args.command]
        rows = handler(config, seed, args.out, max(1, args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError, KeyError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    out = args.out or f"{args.command.replace('-', '_')}.csv"
    _write_outputs(out, fieldnames, rows, config, seed, started)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
