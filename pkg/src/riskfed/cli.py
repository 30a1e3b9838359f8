"""Experiment entry point: config parsing, dispatch, artifact outputs.

Configs are flat ``key = value`` text (one per line, ``#`` comments
allowed). Unknown keys are rejected so typos cannot silently fall back
to defaults. Every successful run directory contains exactly four
files: resolved_config.txt, metrics.csv, weights.csv, partition.csv.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConfigurationError, ExperimentError
from .federation import (
    ALGORITHMS,
    ExperimentConfig,
    build_data_and_plan,
    run_experiment,
)
from .metrics import MetricsSink, write_metrics_csv
from .partition import validate_partition, write_partition_csv

_REQUIRED = ("algorithm", "clients", "samples_per_client", "rounds", "seed")

# external key -> (config attribute, parser)
_SCHEMA = {
    "algorithm": ("algorithm", str),
    "clients": ("clients", int),
    "samples_per_client": ("samples_per_client", int),
    "rounds": ("rounds", int),
    "seed": ("seed", int),
    "d": ("d", int),
    "num_sectors": ("num_sectors", int),
    "signal": ("signal", float),
    "data_csv": ("data_csv", str),
    "train_fraction": ("train_fraction", float),
    "C": ("labels_per_client", int),
    "alpha": ("dirichlet_alpha", float),
    "beta": ("beta", float),
    "c": ("c", float),
    "epsilon": ("epsilon", float),
    "participation_rate": ("participation_rate", float),
    "dropout_rate": ("dropout_rate", float),
    "local_epochs": ("local_epochs", int),
    "local_lr": ("local_lr", float),
    "mu": ("mu", float),
    "workers": ("workers", int),
}


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a flat key=value config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    values, lines = {}, {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _SCHEMA:
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
        attr, cast = _SCHEMA[key]
        try:
            values[attr] = cast(value)
        except ValueError:
            raise ConfigurationError(
                f"{path}:{lineno}: {key} must be {cast.__name__}, got {value!r}"
            ) from None
        lines[key] = lineno

    missing = [k for k in _REQUIRED if _SCHEMA[k][0] not in values]
    if missing:
        raise ConfigurationError(f"{path}: missing required keys: {', '.join(missing)}")
    if values.get("mu") and values.get("algorithm") != "fedprox":
        raise ConfigurationError(
            f"{path}:{lines['mu']}: mu applies to the fedprox algorithm only"
        )
    if values.get("algorithm") not in ALGORITHMS:
        raise ConfigurationError(
            f"{path}:{lines['algorithm']}: algorithm must be one of {ALGORITHMS}"
        )
    config = ExperimentConfig(**values)
    try:
        config.validate()
    except ConfigurationError as exc:
        key = str(exc).split(" ", 1)[0]
        where = f"{path}:{lines[key]}: " if key in lines else f"{path}: "
        raise ConfigurationError(where + str(exc)) from None
    return config


def resolved_config_text(config: ExperimentConfig) -> str:
    """Canonical flat rendering of a fully-defaulted config."""
    out = []
    for key, (attr, cast) in _SCHEMA.items():
        value = getattr(config, attr)
        out.append(f"{key} = {repr(float(value)) if cast is float else value}")
    return "\n".join(out) + "\n"


def _fingerprint(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write_weights_csv(weights, path) -> None:
    lines = ["index,value"]
    lines += [f"{i},{v:.17g}" for i, v in enumerate(weights)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class RunManifest:
    """One invocation's identity: where it reads from and writes to."""

    config_path: Path
    config: ExperimentConfig
    run_dir: Path
    run_id: str


def _new_manifest(config_path, out_dir) -> RunManifest:
    config = parse_config(config_path)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
    run_id = f"{stamp}-seed{config.seed}"
    run_dir = Path(out_dir) / run_id
    run_dir.mkdir(parents=True)
    return RunManifest(config_path=Path(config_path), config=config,
                       run_dir=run_dir, run_id=run_id)


def _cmd_run(args) -> int:
    manifest = _new_manifest(args.config, args.out)
    result = run_experiment(manifest.config)
    text = resolved_config_text(manifest.config)
    (manifest.run_dir / "resolved_config.txt").write_text(text, encoding="utf-8")
    sink = MetricsSink(run_id=manifest.run_id,
                       config_fingerprint=_fingerprint(text))
    for record in result.records:
        sink.append(record)
    write_metrics_csv(sink, manifest.run_dir / "metrics.csv")
    _write_weights_csv(result.final_weights, manifest.run_dir / "weights.csv")
    write_partition_csv(result.plan, manifest.run_dir / "partition.csv")
    print(manifest.run_dir)
    return 0


def _cmd_validate(args) -> int:
    config = parse_config(args.config)
    print(resolved_config_text(config), end="")
    return 0


def _cmd_partition_report(args) -> int:
    config = parse_config(args.config)
    data, plan = build_data_and_plan(config)
    report = validate_partition(plan, data)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_partition_csv(plan, out_dir / "partition.csv")
    for client, size in enumerate(report.client_sizes):
        composition = ", ".join(
            f"sector {s}: {n}" for s, n in sorted(report.sector_counts[client].items())
        )
        print(f"client {client}: {size} records ({composition})")
    if report.violations:
        for violation in report.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return 1
    print("partition valid")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="riskfed",
        description="Deterministic tail-risk-aware federated learning simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment and write artifacts")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(fn=_cmd_run)
    p_val = sub.add_parser("validate", help="check a config and print it resolved")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(fn=_cmd_validate)
    p_part = sub.add_parser(
        "partition-report", help="emit the partition CSV and per-client stats"
    )
    p_part.add_argument("--config", required=True)
    p_part.add_argument("--out", default="")
    p_part.set_defaults(fn=_cmd_partition_report)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
