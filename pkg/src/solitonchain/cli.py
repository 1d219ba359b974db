"""Command-line entry point: dispatch experiments, emit CSV plus a JSON manifest.

A run is configured by a JSON document with sections ``chain`` and ``params``;
``--config`` loads one (a previous manifest also works), ``key=value``
arguments override dot paths, and ``--seed`` / ``--out`` override the seed and
output directory.  Unknown fields are rejected.  Artifacts are only written
after the experiment finished, so a failed run leaves no partial output.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import analytic_eof_profile, effective_eta, mirroring_time
from .chain import build_abc_chain, build_storage_chain
from .disorder import (
    KINDS,
    DisorderConfig,
    ensemble_stats_csv,
    run_scenario1,
    run_scenario2,
    spectrum_csv,
    spectrum_statistics,
)
from .errors import ConfigError, ParameterError, SolitonChainError
from .protocols import chain_mirroring_time, run_async_sweep, run_entangling, run_storage

EXPERIMENTS = (
    "dynamics",
    "disorder-sweep",
    "async-sweep",
    "storage",
    "spectrum",
    "trimer-oracle",
)

_CHAIN_DEFAULTS = {"builder": "abc", "extension_m": 0, "delta": 0.1, "big_delta": 1.0}

_PARAM_DEFAULTS = {
    "dynamics": {"t_max": None, "dt": 0.25},
    "disorder-sweep": {
        "kind": "offdiagonal",
        "levels": [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
        "n_realizations": 200,
        "window": 500.0,
        "dt": 0.25,
        "scenarios": [1, 2],
    },
    "async-sweep": {"delays": [round(0.025 * i, 3) for i in range(21)]},
    "storage": {"t_max_after": 500.0, "dt": 0.25},
    "spectrum": {"kind": "offdiagonal", "scale_e": 1.0, "n_realizations": 100},
    "trimer-oracle": {"eta": None, "t_max": None, "dt": 0.25},
}

_DEFAULT_SEED = 12345


def _default_config(experiment: str) -> dict:
    chain = dict(_CHAIN_DEFAULTS)
    if experiment == "storage":
        chain["builder"] = "storage"
    return {
        "experiment": experiment,
        "chain": chain,
        "params": copy.deepcopy(_PARAM_DEFAULTS[experiment]),
        "base_seed": _DEFAULT_SEED,
    }


def _merge_section(target: dict, incoming: dict, prefix: str) -> None:
    for key, value in incoming.items():
        if key not in target:
            raise ConfigError(f"unknown config field '{prefix}{key}'")
        if isinstance(target[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config field '{prefix}{key}' must be an object")
            _merge_section(target[key], value, f"{prefix}{key}.")
        else:
            target[key] = value


def _apply_override(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override '{assignment}' is not of the form key=value")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = path.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config field '{path}'")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config field '{path}'")
    node[parts[-1]] = value


def _require_number(config: dict, section: str, key: str, minimum=None, allow_none=False):
    value = config[section][key] if section else config[key]
    label = f"{section}.{key}" if section else key
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"config field '{label}' must be a number")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config field '{label}' must be a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"config field '{label}' must be >= {minimum}, got {value}")
    return value


def _require_int(config: dict, section: str, key: str, minimum=None) -> int:
    value = _require_number(config, section, key, minimum)
    if int(value) != value:
        label = f"{section}.{key}" if section else key
        raise ConfigError(f"config field '{label}' must be an integer, got {value!r}")
    return int(value)


def _require_number_list(config: dict, section: str, key: str) -> list[float]:
    value = config[section][key]
    if not isinstance(value, list) or not value or any(
        isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
    ):
        raise ConfigError(f"config field '{section}.{key}' must be a non-empty number list")
    return [float(v) for v in value]


def _build_chain(config: dict):
    chain = config["chain"]
    builder = chain["builder"]
    delta = _require_number(config, "chain", "delta")
    big_delta = _require_number(config, "chain", "big_delta")
    extension_m = _require_int(config, "chain", "extension_m", minimum=0)
    try:
        if builder == "abc":
            return build_abc_chain(extension_m, delta, big_delta)
        if builder == "storage":
            return build_storage_chain(delta, big_delta)
    except ParameterError as exc:
        raise ConfigError(f"chain parameters rejected: {exc}") from exc
    raise ConfigError(f"config field 'chain.builder' must be 'abc' or 'storage', got {builder!r}")


def _run_dynamics(config: dict):
    spec = _build_chain(config)
    dt = _require_number(config, "params", "dt", minimum=1e-9)
    t_m = chain_mirroring_time(spec)
    t_max = _require_number(config, "params", "t_max", minimum=0.0, allow_none=True)
    if t_max is None:
        t_max = 2.1 * t_m
        config["params"]["t_max"] = t_max
    trace = run_entangling(spec, t_max, dt)
    eta = effective_eta(max(spec.couplings), min(spec.couplings))
    return trace.to_csv(), {"eta": eta, "t_m": t_m}


def _run_storage_exp(config: dict):
    if config["chain"]["builder"] != "storage":
        raise ConfigError("config field 'chain.builder' must be 'storage' for this experiment")
    spec = _build_chain(config)
    dt = _require_number(config, "params", "dt", minimum=1e-9)
    t_after = _require_number(config, "params", "t_max_after", minimum=0.0)
    trace = run_storage(spec, t_after, dt)
    eta = effective_eta(max(spec.couplings), min(spec.couplings))
    return trace.to_csv(), {"eta": eta, "t_m": trace.metadata["t_m"]}


def _run_disorder(config: dict):
    spec = _build_chain(config)
    kind = config["params"]["kind"]
    if kind not in KINDS:
        raise ConfigError(f"config field 'params.kind' must be one of {KINDS}, got {kind!r}")
    scenarios = config["params"]["scenarios"]
    if not isinstance(scenarios, list) or not scenarios or set(scenarios) - {1, 2}:
        raise ConfigError("config field 'params.scenarios' must be a subset of [1, 2]")
    cfg = DisorderConfig(
        kind=kind,
        levels=tuple(_require_number_list(config, "params", "levels")),
        n_realizations=_require_int(config, "params", "n_realizations", minimum=1),
        window=_require_number(config, "params", "window", minimum=1e-9),
        dt=_require_number(config, "params", "dt", minimum=1e-9),
        base_seed=config["base_seed"],
    )
    runs = []
    if 1 in scenarios:
        runs.append(run_scenario1(spec, cfg))
    if 2 in scenarios:
        runs.append(run_scenario2(spec, cfg))
    eta = effective_eta(max(spec.couplings), min(spec.couplings))
    return ensemble_stats_csv(runs), {"eta": eta, "t_m": chain_mirroring_time(spec)}


def _run_async(config: dict):
    spec = _build_chain(config)
    delays = _require_number_list(config, "params", "delays")
    if any(not 0.0 <= f <= 0.5 for f in delays):
        raise ConfigError("config field 'params.delays' entries must lie in [0, 0.5]")
    rows = run_async_sweep(spec, delays)
    lines = ["delay_fraction,eof"]
    lines += [f"{format(f, '.12g')},{format(v, '.12g')}" for f, v in rows]
    eta = effective_eta(max(spec.couplings), min(spec.couplings))
    return "\n".join(lines) + "\n", {"eta": eta, "t_m": chain_mirroring_time(spec)}


def _run_spectrum(config: dict):
    spec = _build_chain(config)
    kind = config["params"]["kind"]
    if kind not in KINDS:
        raise ConfigError(f"config field 'params.kind' must be one of {KINDS}, got {kind!r}")
    stats = spectrum_statistics(
        spec,
        kind,
        _require_number(config, "params", "scale_e", minimum=0.0),
        _require_int(config, "params", "n_realizations", minimum=1),
        config["base_seed"],
    )
    eta = effective_eta(max(spec.couplings), min(spec.couplings))
    return spectrum_csv(stats), {"eta": eta, "t_m": chain_mirroring_time(spec)}


def _run_trimer_oracle(config: dict):
    eta = _require_number(config, "params", "eta", minimum=0.0, allow_none=True)
    if eta is None:
        delta = _require_number(config, "chain", "delta")
        big_delta = _require_number(config, "chain", "big_delta")
        try:
            eta = effective_eta(big_delta, delta)
        except ParameterError as exc:
            raise ConfigError(f"chain parameters rejected: {exc}") from exc
        config["params"]["eta"] = eta
    t_m = mirroring_time(eta)
    dt = _require_number(config, "params", "dt", minimum=1e-9)
    t_max = _require_number(config, "params", "t_max", minimum=0.0, allow_none=True)
    if t_max is None:
        t_max = 2.0 * t_m
        config["params"]["t_max"] = t_max
    times = dt * np.arange(int(math.floor(t_max / dt + 1e-9)) + 1)
    values = analytic_eof_profile(eta, times)
    lines = ["t,eof_analytic"]
    lines += [f"{format(t, '.12g')},{format(v, '.12g')}" for t, v in zip(times, values)]
    return "\n".join(lines) + "\n", {"eta": eta, "t_m": t_m}


_RUNNERS = {
    "dynamics": _run_dynamics,
    "disorder-sweep": _run_disorder,
    "async-sweep": _run_async,
    "storage": _run_storage_exp,
    "spectrum": _run_spectrum,
    "trimer-oracle": _run_trimer_oracle,
}


def resolve_config(experiment: str, config_path: str | None, overrides: list[str],
                   seed: int | None, out_dir: str | None) -> tuple[dict, Path]:
    config = _default_config(experiment)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {config_path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        if "config" in loaded and isinstance(loaded["config"], dict):
            loaded = loaded["config"]  # accept a previous manifest
        if loaded.get("experiment", experiment) != experiment:
            raise ConfigError(
                f"config is for experiment {loaded['experiment']!r}, not {experiment!r}"
            )
        for key, value in loaded.items():
            if key == "experiment":
                continue
            if key == "base_seed":
                config["base_seed"] = value
            elif key in ("chain", "params"):
                if not isinstance(value, dict):
                    raise ConfigError(f"config field '{key}' must be an object")
                _merge_section(config[key], value, f"{key}.")
            else:
                raise ConfigError(f"unknown config field '{key}'")
    for assignment in overrides:
        _apply_override(config, assignment)
    if seed is not None:
        config["base_seed"] = seed
    if not isinstance(config["base_seed"], int) or isinstance(config["base_seed"], bool):
        raise ConfigError(f"config field 'base_seed' must be an integer, got {config['base_seed']!r}")
    out = Path(out_dir) if out_dir is not None else Path("runs") / experiment
    return config, out


def run_experiment(config: dict, out_dir: Path) -> dict:
    """Execute one resolved config; returns the manifest after writing artifacts."""
    experiment = config["experiment"]
    csv_text, derived = _RUNNERS[experiment](config)
    csv_name = experiment.replace("-", "_") + ".csv"
    manifest = {
        "experiment": experiment,
        "config": config,
        "derived": derived,
        "version": __version__,
        "artifacts": {"csv": csv_name},
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / csv_name).write_text(csv_text)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="solitonchain",
        description="Defect spin-chain entanglement protocols: simulate and export CSV artifacts.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config (or previous manifest)")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--out", default=None, help="output directory (default runs/<experiment>)")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="dot-path config overrides, e.g. params.dt=0.5")
    args = parser.parse_args(argv)
    try:
        config, out_dir = resolve_config(
            args.experiment, args.config, args.overrides, args.seed, args.out
        )
        manifest = run_experiment(config, out_dir)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolitonChainError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out_dir / manifest['artifacts']['csv']} and {out_dir / 'manifest.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
